"""Prime-window search: enumerate the CRT class, check every form, report.

The brute-force oracle at the bottom shares nothing with the covering logic;
it rechecks compositeness of every form value with ntcore primitives only and
is the ground truth the pipeline is tested against.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import ntcore
from .cover import CoveringSystem, FormTriple, TargetConfig
from .errors import BudgetExceeded, DomainError, InvariantViolation

ORACLE_SPAN_LIMIT = 10**6

COMPOSITE_WITNESSED = "composite_witnessed"
COMPOSITE_CHECKED = "composite_checked"
PRIME_EXCEPTION = "prime_exception"
UNIT_OR_ZERO_EXCEPTION = "unit_or_zero_exception"
SKIPPED_ZERO_OFFSET = "skipped_zero_offset"

_EXCEPTION_STATUSES = (PRIME_EXCEPTION, UNIT_OR_ZERO_EXCEPTION)


@dataclass(frozen=True)
class SearchWindow:
    """Window [n_low, n_high] with the exponent ceiling for form checks."""

    n_low: int
    n_high: int
    i_max: int

    def __post_init__(self):
        if self.n_low < 2:
            raise DomainError(f"window start must be >= 2, got {self.n_low}")
        if self.n_high <= self.n_low:
            raise DomainError(f"window [{self.n_low}, {self.n_high}] is degenerate")
        if self.i_max < 1:
            raise DomainError(f"i_max must be >= 1, got {self.i_max}")

    @classmethod
    def for_target(
        cls, n: int, k_max: int, upper: int | None = None, i_max: int | None = None
    ) -> "SearchWindow":
        """Window [N, (1 + 1/K) N] with i running to ceil(K ln N) inclusive."""
        if upper is None:
            upper = n + n // k_max
        if i_max is None:
            i_max = math.ceil(k_max * math.log(n))
        return cls(n, upper, i_max)


@dataclass(frozen=True)
class FormOutcome:
    """Classification of one form value |k*m + j*a^i + l|."""

    a: int
    i: int
    triple: FormTriple
    value: int
    status: str
    witness: int | None = None


@dataclass
class CandidateResult:
    m: int
    survivor: bool
    counts: dict[str, int]
    exception_slots: list[tuple[int, int, FormTriple, str]]


@dataclass
class SearchReport:
    """Counts and witnesses for one window against one covering system."""

    window: SearchWindow
    system_digest: str
    q_n: int
    q: int
    candidates: list[CandidateResult]
    survivors: list[int]
    tallies: dict[tuple[int, int, FormTriple], dict[str, int]]
    wall_time_s: float
    probabilistic_primality: bool


def find_candidate_primes(window: SearchWindow, system: CoveringSystem) -> list[int]:
    """Primes m in the window with m = b (mod W), ascending."""
    w, b = system.modulus, system.residue
    if w == 1:
        return ntcore.primes_in_range(window.n_low, window.n_high)
    first = b + (window.n_low - b + w - 1) // w * w
    return [m for m in range(first, window.n_high + 1, w) if ntcore.is_prime(m)]


def _coverage_index(system: CoveringSystem):
    index: dict[tuple[int, FormTriple], list] = {}
    for e in system.entries:
        index.setdefault((e.a, e.triple), []).append(e)
    for entries in index.values():
        entries.sort(key=lambda e: (e.pair.p, e.pair.q))
    return index


def _classify(m, a, i, triple, a_pow_i, covering_entries):
    offset = triple.j * a_pow_i + triple.l
    if offset == 0:
        return FormOutcome(a, i, triple, 0, SKIPPED_ZERO_OFFSET)
    v = triple.k * m + offset
    av = abs(v)
    if av <= 1:
        return FormOutcome(a, i, triple, v, UNIT_OR_ZERO_EXCEPTION)
    matches = [e for e in covering_entries if (i - e.residue_i) % e.pair.p == 0]
    if matches:
        for e in matches:
            if v % e.pair.q != 0:
                raise InvariantViolation(
                    f"covered slot broken: q={e.pair.q} does not divide {v} "
                    f"(m={m}, a={a}, i={i}, {triple.label()})"
                )
        q0 = matches[0].pair.q
        if av == q0:
            return FormOutcome(a, i, triple, v, PRIME_EXCEPTION, witness=q0)
        return FormOutcome(a, i, triple, v, COMPOSITE_WITNESSED, witness=q0)
    if ntcore.is_prime(av):
        return FormOutcome(a, i, triple, v, PRIME_EXCEPTION)
    return FormOutcome(a, i, triple, v, COMPOSITE_CHECKED)


def verify_forms(
    m: int,
    config: TargetConfig,
    window: SearchWindow,
    system: CoveringSystem,
) -> list[FormOutcome]:
    """Classify every in-scope form value for candidate m.

    Scope: a in [1, K] with a = 1 collapsed to i = 1 (constant form), i in
    [1, i_max], every triple. Covered slots (i = I mod p for an assigned
    entry) must show the forced divisor; anything else is tested directly.
    """
    if m % system.modulus != system.residue % system.modulus:
        raise DomainError(f"candidate {m} not in class b mod W")
    index = _coverage_index(system)
    triples = config.triples()
    outcomes = []
    for a in range(1, config.k_max + 1):
        i_values = (1,) if a == 1 else range(1, window.i_max + 1)
        a_pow = a
        for i in i_values:
            for triple in triples:
                outcomes.append(
                    _classify(m, a, i, triple, a_pow, index.get((a, triple), ()))
                )
            a_pow *= a
    return outcomes


def _candidate_result(m, config, window, system) -> CandidateResult:
    counts: dict[str, int] = {}
    slots = []
    for out in verify_forms(m, config, window, system):
        counts[out.status] = counts.get(out.status, 0) + 1
        if out.status in _EXCEPTION_STATUSES:
            slots.append((out.a, out.i, out.triple, out.status))
    survivor = not any(counts.get(s) for s in _EXCEPTION_STATUSES)
    return CandidateResult(m, survivor, counts, slots)


def _candidate_worker(args):
    return _candidate_result(*args)


def run_experiment(
    config: TargetConfig,
    window: SearchWindow,
    system: CoveringSystem,
    system_digest: str = "",
    workers: int = 1,
) -> SearchReport:
    """Count class primes and the survivors whose every form value is composite."""
    for l in config.offsets:
        if abs(l) > config.k_max * window.n_low:
            raise DomainError(f"offset {l} outside [-K*N, K*N] for N={window.n_low}")
    ntcore.primality_stats.reset()
    start = time.monotonic()
    candidates = find_candidate_primes(window, system)
    if workers > 1 and len(candidates) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(_candidate_worker, [(m, config, window, system) for m in candidates])
            )
    else:
        results = [_candidate_result(m, config, window, system) for m in candidates]
    results.sort(key=lambda r: r.m)
    tallies: dict[tuple[int, int, FormTriple], dict[str, int]] = {}
    for res in results:
        for a, i, triple, status in res.exception_slots:
            slot = tallies.setdefault((a, i, triple), {})
            slot[status] = slot.get(status, 0) + 1
    survivors = [r.m for r in results if r.survivor]
    return SearchReport(
        window=window,
        system_digest=system_digest,
        q_n=len(candidates),
        q=len(survivors),
        candidates=results,
        survivors=survivors,
        tallies=tallies,
        wall_time_s=time.monotonic() - start,
        probabilistic_primality=ntcore.primality_stats.probabilistic_mode_used,
    )


def _oracle_survives(m: int, config: TargetConfig, window: SearchWindow) -> bool:
    for a in range(1, config.k_max + 1):
        i_values = (1,) if a == 1 else range(1, window.i_max + 1)
        a_pow = a
        for _i in i_values:
            for triple in config.triples():
                offset = triple.j * a_pow + triple.l
                if offset == 0:
                    continue
                av = abs(triple.k * m + offset)
                if av <= 1 or ntcore.is_prime(av):
                    return False
            a_pow *= a
    return True


def _oracle_worker(args):
    return _oracle_survives(*args)


def brute_oracle(
    window: SearchWindow, config: TargetConfig, workers: int = 1
) -> list[int]:
    """Ground truth: every prime in the window (no residue restriction) whose
    in-scope form values, where j*a^i + l != 0, are all composite.

    Guarded to spans of at most 10^6. Uses ntcore primitives only.
    """
    if window.n_high - window.n_low > ORACLE_SPAN_LIMIT:
        raise BudgetExceeded(
            f"oracle window span {window.n_high - window.n_low} exceeds {ORACLE_SPAN_LIMIT}"
        )
    primes = ntcore.primes_in_range(window.n_low, window.n_high)
    if workers > 1 and len(primes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            keep = list(pool.map(_oracle_worker, [(m, config, window) for m in primes]))
    else:
        keep = [_oracle_survives(m, config, window) for m in primes]
    return [m for m, ok in zip(primes, keep) if ok]
