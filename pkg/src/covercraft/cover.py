"""Anchor/covering prime-pair mining and CRT covering-system assembly.

A pair (p, q) anchors exponent coverage: q divides a^p - 1 with ord_q(a) = p,
so every exponent i in a fixed residue class mod p forces q to divide the form
value k*m + j*a^i + l once m sits in the right class mod q. Pairs are mined
over a finite anchor window, partitioned across the form triples, and merged
into a single residue class b mod W by the Chinese remainder theorem.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import ntcore
from .errors import (
    BudgetExceeded,
    DistinctnessError,
    DomainError,
    InsufficientPairsError,
    InvariantViolation,
)

DEFAULT_LCM_BOUND = 10**9


@dataclass(frozen=True, order=True)
class FormTriple:
    """Coefficients (j, k, l) of one form k*m + j*a^i + l."""

    j: int
    k: int
    l: int

    def label(self) -> str:
        return f"j={self.j},k={self.k},l={self.l}"


@dataclass(frozen=True, order=True)
class PrimePair:
    """Anchor prime p and covering prime q for base a, with ord_q(a) = p."""

    a: int
    p: int
    q: int

    def failures(self, m_bound: int, k_max: int) -> list[str]:
        """Re-check every admission invariant independently of the mining path."""
        out = []
        if not ntcore.is_prime(self.p):
            out.append(f"anchor {self.p} not prime")
        if not ntcore.is_prime(self.q):
            out.append(f"covering prime {self.q} not prime")
        if pow(self.a, self.p, self.q) != 1:
            out.append(f"{self.q} does not divide {self.a}^{self.p} - 1")
        # p prime forces ord | p, so ord = p exactly unless q | a - 1
        if (self.a - 1) % self.q == 0:
            out.append(f"ord_{self.q}({self.a}) = 1, not {self.p}")
        if self.q < m_bound * self.p:
            out.append(f"q={self.q} below M*p = {m_bound * self.p}")
        if self.q <= k_max * k_max:
            out.append(f"q={self.q} not above K^2 = {k_max * k_max}")
        if self.q <= k_max:
            out.append(f"q={self.q} not above K = {k_max}")
        return out


@dataclass(frozen=True)
class TargetConfig:
    """Parameters of one covering target: form bounds, offsets, mining limits."""

    k_max: int
    offsets: tuple[int, ...]
    m_bound: int
    p_max: int = 1000
    budget_bits: int = ntcore.DEFAULT_FACTOR_BUDGET_BITS
    band: tuple[Fraction, Fraction] | None = None
    min_per_class: int = 1

    def __post_init__(self):
        problems = []
        if self.k_max < 2:
            problems.append(f"K must be >= 2, got {self.k_max}")
        if len(set(self.offsets)) != self.k_max:
            problems.append(
                f"offset set must have cardinality K={self.k_max}, got {sorted(set(self.offsets))}"
            )
        if self.m_bound < 1:
            problems.append(f"M must be >= 1, got {self.m_bound}")
        if self.p_max < 2:
            problems.append(f"p_max must be >= 2, got {self.p_max}")
        if problems:
            raise DomainError("; ".join(problems))
        object.__setattr__(self, "offsets", tuple(sorted(self.offsets)))

    @property
    def a_values(self) -> range:
        return range(2, self.k_max + 1)

    def reciprocal_band(self) -> tuple[Fraction, Fraction]:
        if self.band is not None:
            return self.band
        k3 = 4 * self.k_max**3
        return (
            Fraction(self.m_bound, k3),
            Fraction(self.m_bound, 3 * self.k_max**3),
        )

    def triples(self) -> list[FormTriple]:
        """The full target set: 1 <= |j|, k <= K, l among the offsets."""
        js = [j for j in range(-self.k_max, self.k_max + 1) if j != 0]
        return sorted(
            FormTriple(j, k, l)
            for j in js
            for k in range(1, self.k_max + 1)
            for l in self.offsets
        )


def admissible_anchor(p: int, m_bound: int) -> bool:
    """True when m*p + 1 is composite for every 1 <= m <= m_bound.

    Guarantees any prime q = 1 (mod p) exceeds m_bound * p. Vacuously true
    for m_bound = 0.
    """
    if not ntcore.is_prime(p):
        raise DomainError(f"{p} is not prime")
    return all(not ntcore.is_prime(m * p + 1) for m in range(1, m_bound + 1))


@dataclass(frozen=True)
class AnchorRecord:
    """Mining transcript for one anchor prime: factorization and per-q verdicts."""

    a: int
    p: int
    factors: tuple[tuple[int, int], ...] | None
    accepted: tuple[int, ...]
    rejected: tuple[tuple[int, str], ...]
    skip_reason: str | None = None


@dataclass
class PairMining:
    """Outcome of a mining sweep: admitted pairs plus skip/reject provenance."""

    pairs: list[PrimePair]
    skipped: list[AnchorRecord]
    records: list[AnchorRecord]

    def pairs_for(self, a: int) -> list[PrimePair]:
        return [pr for pr in self.pairs if pr.a == a]


def _mine_anchor(args) -> AnchorRecord:
    a, p, m_bound, k_max, budget_bits = args
    try:
        fac = ntcore.factor(a**p - 1, budget_bits)
    except BudgetExceeded as exc:
        return AnchorRecord(a, p, None, (), (), skip_reason=str(exc))
    accepted, rejected = [], []
    for q in fac.primes:
        problems = PrimePair(a, p, q).failures(m_bound, k_max)
        if problems:
            rejected.append((q, "; ".join(problems)))
        else:
            accepted.append(q)
    return AnchorRecord(a, p, fac.factors, tuple(accepted), tuple(rejected))


def find_prime_pairs(
    a: int,
    m_bound: int,
    p_max: int,
    k_max: int,
    budget_bits: int = ntcore.DEFAULT_FACTOR_BUDGET_BITS,
    workers: int = 1,
) -> PairMining:
    """Mine covering pairs for base a over anchor primes p <= p_max.

    For each anchor, a^p - 1 is factored within the bit budget; every prime
    factor q with ord_q(a) = p, q >= m_bound*p and q > k_max^2 becomes a pair.
    Anchors whose cofactor resists factoring within budget are reported in
    ``skipped``, never silently dropped. Anchors factor independently (and in
    parallel when workers > 1); results reassemble in anchor order, so the
    pair list always comes back sorted by (p, q).
    """
    if a < 2:
        raise DomainError(f"base must be >= 2, got {a}")
    if a > k_max:
        raise DomainError(f"base {a} exceeds K = {k_max}")
    if p_max < 2:
        raise DomainError(f"p_max must be >= 2, got {p_max}")
    jobs = [(a, p, m_bound, k_max, budget_bits) for p in ntcore.primes_upto(p_max)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_mine_anchor, jobs))
    else:
        records = [_mine_anchor(job) for job in jobs]
    pairs = [PrimePair(a, r.p, q) for r in records for q in r.accepted]
    pairs.sort(key=lambda pr: (pr.p, pr.q))
    skipped = [r for r in records if r.skip_reason]
    return PairMining(pairs, skipped, records)


def dedupe_pairs(pairs: list[PrimePair]) -> tuple[list[PrimePair], list[PrimePair]]:
    """Drop pairs whose covering prime q already appeared under another anchor
    (distinct q is a global requirement).

    Keep order is deterministic: pairs sorted by (q, a, p), first wins. An
    exact duplicate (same a, p, q twice) signals a corrupted pair list and
    raises instead. Returns (kept, dropped), kept re-sorted by (a, p, q).
    """
    kept: dict[int, PrimePair] = {}
    dropped = []
    for pair in sorted(pairs, key=lambda pr: (pr.q, pr.a, pr.p)):
        if pair.q in kept:
            if kept[pair.q] == pair:
                raise DistinctnessError(
                    f"pair (a={pair.a}, p={pair.p}, q={pair.q}) listed twice"
                )
            dropped.append(pair)
        else:
            kept[pair.q] = pair
    return sorted(kept.values(), key=lambda pr: (pr.a, pr.p, pr.q)), dropped


@dataclass
class Partition:
    """Disjoint assignment of mined pairs to (a, triple) classes."""

    classes: dict[tuple[int, FormTriple], tuple[PrimePair, ...]]
    band: tuple[Fraction, Fraction]

    def reciprocal_sums(self) -> dict[tuple[int, FormTriple], Fraction]:
        return {
            key: sum((Fraction(1, pr.p) for pr in prs), Fraction(0))
            for key, prs in self.classes.items()
        }

    def in_band(self) -> dict[tuple[int, FormTriple], bool]:
        lo, hi = self.band
        return {k: lo <= s <= hi for k, s in self.reciprocal_sums().items()}

    def all_pairs(self) -> list[PrimePair]:
        return [pr for prs in self.classes.values() for pr in prs]


def partition_pairs(
    pairs: list[PrimePair],
    triples: list[FormTriple],
    band: tuple[Fraction, Fraction],
    min_per_class: int = 1,
) -> Partition:
    """Split each base's pairs across all form triples.

    Pairs are handed out largest reciprocal first (ascending anchor p, larger
    q first within an anchor), cycling through the classes in sorted triple
    order, so every class ends within one pair of the others. Achieved
    reciprocal sums are reported against the target band; at desk scale the
    band is usually unreachable and only min_per_class is guaranteed.
    """
    if band[0] < 0:
        raise DomainError("band lower end must be >= 0")
    by_a: dict[int, list[PrimePair]] = {}
    for pair in pairs:
        by_a.setdefault(pair.a, []).append(pair)
    shortfalls = []
    for a, prs in sorted(by_a.items()):
        if len({pr.q for pr in prs}) != len(prs):
            raise DomainError(f"duplicate covering prime among base-{a} pairs")
        need = len(triples) * min_per_class
        if len(prs) < need:
            shortfalls.append(f"a={a}: have {len(prs)} pairs, need {need}")
    if shortfalls:
        raise InsufficientPairsError("; ".join(shortfalls))
    classes: dict[tuple[int, FormTriple], list[PrimePair]] = {}
    order = sorted(triples)
    for a, prs in sorted(by_a.items()):
        for key in ((a, t) for t in order):
            classes[key] = []
        queue = sorted(prs, key=lambda pr: (pr.p, -pr.q))
        for idx, pair in enumerate(queue):
            classes[(a, order[idx % len(order)])].append(pair)
    return Partition({k: tuple(v) for k, v in classes.items()}, band)


def compute_I(a: int, j: int, l: int, q: int) -> int:
    """Smallest exponent offset in {0, 1} keeping j*a^i + l nonzero mod q."""
    if (j + l) % q != 0:
        return 0
    if (j * a + l) % q != 0:
        return 1
    # impossible for admitted pairs: q | j(a-1) forces q <= K(K-1)
    raise InvariantViolation(
        f"both j+l and j*a+l vanish mod q={q} (a={a}, j={j}, l={l})"
    )


@dataclass(frozen=True)
class CoverEntry:
    """One congruence of the system: q | k*m + j*a^(residue_i) + l on its class."""

    a: int
    triple: FormTriple
    pair: PrimePair
    residue_i: int


@dataclass
class CoveringSystem:
    """Assembled system: entries plus the CRT class b mod W they pin down."""

    config: TargetConfig
    entries: list[CoverEntry]
    modulus: int  # W: product of all covering primes
    residue: int  # b: the CRT solution, coprime to W

    def entries_for(self, a: int, triple: FormTriple) -> list[CoverEntry]:
        return [e for e in self.entries if e.a == a and e.triple == triple]


def build_covering_system(partition: Partition, config: TargetConfig) -> CoveringSystem:
    """Solve k*b + j*a^I + l = 0 (mod q) per entry and CRT-combine to (b, W).

    The local residue is b = -(j*a^I + l) * k^{-1} mod q (k invertible since
    q > K). An empty partition yields the degenerate (b, W) = (0, 1).
    """
    entries: list[CoverEntry] = []
    for (a, triple), prs in sorted(partition.classes.items()):
        for pair in sorted(prs):
            i0 = compute_I(a, triple.j, triple.l, pair.q)
            entries.append(CoverEntry(a, triple, pair, i0))
    qs = [e.pair.q for e in entries]
    if len(set(qs)) != len(qs):
        dup = sorted(q for q in set(qs) if qs.count(q) > 1)
        raise DistinctnessError(f"covering primes repeat across entries: {dup}")
    congruences = []
    for e in entries:
        q = e.pair.q
        rhs = -(e.triple.j * e.a**e.residue_i + e.triple.l) % q
        if math.gcd(e.triple.k, q) != 1:
            raise InvariantViolation(f"k={e.triple.k} not invertible mod q={q}")
        congruences.append((rhs * pow(e.triple.k, -1, q) % q, q))
    residue, modulus = ntcore.crt_combine(congruences)
    if math.gcd(residue, modulus) != 1:
        raise InvariantViolation("gcd(b, W) != 1 after CRT assembly")
    return CoveringSystem(config, entries, modulus, residue)


@dataclass
class VerificationReport:
    """Itemized re-check of a covering system; collects failures, never raises."""

    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    samples_run: int = 0

    def record(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, ok, detail))

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [(n, d) for n, ok, d in self.checks if not ok]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_covering_system(
    system: CoveringSystem, samples: int = 200, seed: int = 20240809
) -> VerificationReport:
    """Re-verify every invariant from first principles, then sample the cover.

    Checks pair admission, residue offsets, distinctness, W and b, the defining
    congruences, and finally random (m, i) with m = b (mod W), i = I (mod p),
    i >= 1, asserting exact divisibility of the form value.
    """
    report = VerificationReport()
    cfg = system.config
    try:
        for e in system.entries:
            tag = f"a={e.a} {e.triple.label()} p={e.pair.p} q={e.pair.q}"
            problems = e.pair.failures(cfg.m_bound, cfg.k_max)
            report.record(f"pair invariants [{tag}]", not problems, "; ".join(problems))
            ok_i = e.residue_i in (0, 1)
            try:
                ok_i = ok_i and compute_I(e.a, e.triple.j, e.triple.l, e.pair.q) == e.residue_i
            except InvariantViolation as exc:
                report.record(f"offset well-defined [{tag}]", False, str(exc))
                continue
            report.record(f"offset minimal [{tag}]", ok_i)
            nonzero = (e.triple.j * e.a**e.residue_i + e.triple.l) % e.pair.q != 0
            report.record(f"offset nondegenerate [{tag}]", nonzero)
        qs = [e.pair.q for e in system.entries]
        report.record("covering primes distinct", len(set(qs)) == len(qs))
        report.record("W is the product of the q", system.modulus == math.prod(qs))
        report.record("b in range", 0 <= system.residue < system.modulus)
        report.record("gcd(b, W) = 1", math.gcd(system.residue, system.modulus) == 1)
        for e in system.entries:
            v = e.triple.k * system.residue + e.triple.j * e.a**e.residue_i + e.triple.l
            report.record(
                f"defining congruence [q={e.pair.q}]",
                v % e.pair.q == 0,
                f"k*b + j*a^I + l = {v} not divisible by {e.pair.q}" if v % e.pair.q else "",
            )
        if system.entries and samples > 0:
            rng = random.Random(seed)
            bad = 0
            first_bad = ""
            for s in range(samples):
                e = system.entries[s % len(system.entries)]
                m = system.residue + rng.randrange(0, 1 << 20) * system.modulus
                i = e.residue_i + rng.randrange(1, 1 << 12) * e.pair.p
                v = e.triple.k * m + e.triple.j * e.a**i + e.triple.l
                if v % e.pair.q != 0:
                    bad += 1
                    if not first_bad:
                        first_bad = f"m={m}, i={i}, q={e.pair.q}"
            report.samples_run = samples
            report.record(
                f"sampled divisibility ({samples} draws)", bad == 0,
                f"{bad} failures, first at {first_bad}" if bad else "",
            )
    except Exception as exc:  # malformed systems must yield a report, not a crash
        report.record("verification aborted", False, repr(exc))
    return report


def verify_cover(
    classes: list[tuple[int, int]], lcm_bound: int = DEFAULT_LCM_BOUND
) -> tuple[bool, int | None]:
    """Exhaustively test whether residue classes cover every integer.

    Diagnostic only: the covering systems built here cover a density of
    exponents, not all of them. Returns (True, None) or (False, least
    uncovered residue).
    """
    if any(m < 1 for _, m in classes):
        raise DomainError("moduli must be >= 1")
    span = math.lcm(*(m for _, m in classes)) if classes else 1
    if span > lcm_bound:
        raise BudgetExceeded(f"lcm of moduli is {span}, above the bound {lcm_bound}")
    hit = bytearray(span)
    for r, m in classes:
        start = r % m
        count = (span - start + m - 1) // m
        hit[start::m] = b"\x01" * count
    missing = hit.find(0)
    return (True, None) if missing == -1 else (False, missing)


def coverage_density(moduli: list[int]) -> Fraction:
    """Exact fraction 1 - prod(1 - 1/p) of residues covered by one class per prime."""
    if len(set(moduli)) != len(moduli):
        raise DomainError("moduli must be distinct")
    if any(not ntcore.is_prime(p) for p in moduli):
        raise DomainError("moduli must be prime")
    out = Fraction(1)
    for p in moduli:
        out *= Fraction(p - 1, p)
    return 1 - out
