"""Desk-scale numerical checks of the analytic ingredients.

Mertens-type reciprocal sums, Chebyshev-style prime-counting bounds, pair
sums over primes p with m*p + 1 prime, and truncated divisor sums grouped by
the first exponent at which a divisor hits the form j*a^i + l. All sums are
exact enumerations over sieved primes; floats carry full double precision
(the reciprocal sums are fsum-rounded, error well under 1e-12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import ntcore
from .errors import BudgetExceeded, DomainError

#: slack applied to the strict inequalities so float rounding at the
#: boundary can never produce a spurious failure
INEQUALITY_MARGIN = 1e-9

HIT_CUTOFF_LIMIT = 10**7
DEFAULT_HIT_CUTOFF = 10**5


@dataclass(frozen=True)
class MertensPoint:
    x: int
    value: float
    loglog: float
    ok: bool
    exact: Fraction | None = None


def mertens_sum(x: int, exact: bool = False, segment_size: int = 1 << 21) -> MertensPoint:
    """Sum of 1/p over primes p <= x, checked against (log log x, log log x + 1)."""
    if x < 2:
        raise DomainError(f"x must be >= 2, got {x}")
    primes = ntcore.primes_in_range(2, x, segment_size=segment_size)
    value = math.fsum(1.0 / p for p in primes)
    loglog = math.log(math.log(x))
    ok = loglog - INEQUALITY_MARGIN < value < loglog + 1 + INEQUALITY_MARGIN
    frac = sum((Fraction(1, p) for p in primes), Fraction(0)) if exact else None
    return MertensPoint(x, value, loglog, ok, frac)


@dataclass(frozen=True)
class PiBoundsPoint:
    x: int
    pi: int
    lower: float
    upper: float
    ok: bool


def pi_bounds_check(x: int, segment_size: int = 1 << 21) -> PiBoundsPoint:
    """Exact pi(x) against x/log x * (1 + 1/(2 log x)) and * (1 + 3/(2 log x))."""
    if x < 59:
        raise DomainError(f"bounds hold for x >= 59 only, got {x}")
    pi = len(ntcore.primes_in_range(2, x, segment_size=segment_size))
    lx = math.log(x)
    lower = x / lx * (1 + 1 / (2 * lx))
    upper = x / lx * (1 + 3 / (2 * lx))
    ok = lower - INEQUALITY_MARGIN < pi < upper + INEQUALITY_MARGIN
    return PiBoundsPoint(x, pi, lower, upper, ok)


@dataclass(frozen=True)
class PairSum:
    """Sum of 1/p over primes p <= x with m*p + 1 prime, with per-decade growth."""

    m: int
    x: int
    value: float
    decades: tuple[tuple[int, float], ...]  # (decade cap, cumulative sum at cap)


def brun_pair_sum(m: int, x: int, segment_size: int = 1 << 21) -> PairSum:
    """Bounded-looking pair sum; no constant is asserted, only the growth is shown."""
    if m < 2:
        raise DomainError(f"m must be >= 2, got {m}")
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    hits = (
        [p for p in ntcore.primes_in_range(2, x, segment_size=segment_size)
         if ntcore.is_prime(m * p + 1)]
        if x >= 2
        else []
    )
    psums = []
    cap = 10
    while cap < x:
        psums.append((cap, math.fsum(1.0 / p for p in hits if p <= cap)))
        cap *= 10
    value = math.fsum(1.0 / p for p in hits)
    psums.append((x, value))
    return PairSum(m, x, value, tuple(psums))


@dataclass(frozen=True)
class HitTerm:
    """Squarefree d with rough support, its divisor count weight, and the first
    exponent e at which d divides j*a^e + l (with the period of those hits)."""

    d: int
    omega: int
    e: int
    period: int


def _smallest_prime_factors(limit: int) -> list[int]:
    spf = list(range(limit + 1))
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == p:
            for m in range(p * p, limit + 1, p):
                if spf[m] == m:
                    spf[m] = p
    return spf


def hit_terms(k_max: int, a: int, j: int, l: int, cutoff: int) -> list[HitTerm]:
    """All qualifying divisors d <= cutoff: squarefree, every prime factor above
    k_max, coprime to a, with j*a^i + l = 0 (mod d) solvable.

    Per-prime exponent congruences are solved once and cached; composite d
    intersect their prime components' progressions.
    """
    if cutoff < 2:
        raise DomainError(f"cutoff must be >= 2, got {cutoff}")
    if cutoff > HIT_CUTOFF_LIMIT:
        raise BudgetExceeded(f"cutoff {cutoff} above limit {HIT_CUTOFF_LIMIT}")
    spf = _smallest_prime_factors(cutoff)
    component: dict[int, object] = {}

    def prime_component(p):
        if p not in component:
            component[p] = ntcore._form_component(a, j, l, p, 1)
        return component[p]

    out = []
    for d in range(2, cutoff + 1):
        n = d
        ps = []
        squarefree = True
        while n > 1:
            p = spf[n]
            ps.append(p)
            n //= p
            if n % p == 0:
                squarefree = False
                break
        if not squarefree or any(p <= k_max or a % p == 0 for p in ps):
            continue
        congs = []
        solvable = True
        for p in ps:
            comp = prime_component(p)
            if comp is None:
                solvable = False
                break
            if comp != "free":
                congs.append(comp)
        if not solvable:
            continue
        merged = ntcore._merge_congruences(congs)
        if merged is None:
            continue
        e0, period = merged
        e = e0 % period or period
        out.append(HitTerm(d, len(ps), e, period))
    return out


@dataclass(frozen=True)
class HitSum:
    value: float
    ratio_log_sq: float | None
    terms: int
    x: int | None
    cutoff: int
    exact: Fraction | None = None


def hit_divisor_sum(
    x: int, k_max: int, a: int, j: int, l: int,
    cutoff: int = DEFAULT_HIT_CUTOFF, exact: bool = False,
) -> HitSum:
    """Sum 2^omega(d) / d over qualifying d whose first hit exponent is <= x."""
    terms = [t for t in hit_terms(k_max, a, j, l, cutoff) if t.e <= x]
    if exact:
        total = sum((Fraction(2**t.omega, t.d) for t in terms), Fraction(0))
        value = float(total)
    else:
        total = None
        value = math.fsum(2**t.omega / t.d for t in terms)
    ratio = value / math.log(x) ** 2 if x > 1 else None
    return HitSum(value, ratio, len(terms), x, cutoff, total)


def hit_divisor_sum_by_exponent(
    x: int, k_max: int, a: int, j: int, l: int,
    cutoff: int = DEFAULT_HIT_CUTOFF, exact: bool = False,
) -> HitSum:
    """Same sum, grouped the other way: over exponents e <= x, then divisors with
    that first hit. A distinct code path so the grouping identity is testable."""
    by_e: dict[int, list[HitTerm]] = {}
    for t in hit_terms(k_max, a, j, l, cutoff):
        by_e.setdefault(t.e, []).append(t)
    groups = [by_e[e] for e in sorted(by_e) if e <= x]
    if exact:
        total = sum(
            (sum((Fraction(2**t.omega, t.d) for t in g), Fraction(0)) for g in groups),
            Fraction(0),
        )
        value = float(total)
    else:
        total = None
        value = math.fsum(math.fsum(2**t.omega / t.d for t in g) for g in groups)
    n_terms = sum(len(g) for g in groups)
    ratio = value / math.log(x) ** 2 if x > 1 else None
    return HitSum(value, ratio, n_terms, x, cutoff, total)


def hit_divisor_sum_weighted(
    k_max: int, a: int, j: int, l: int,
    cutoff: int = DEFAULT_HIT_CUTOFF, exact: bool = False,
) -> HitSum:
    """Sum 2^omega(d) / (d * e(d)) over all qualifying d (no exponent cap)."""
    terms = hit_terms(k_max, a, j, l, cutoff)
    if exact:
        total = sum((Fraction(2**t.omega, t.d * t.e) for t in terms), Fraction(0))
        return HitSum(float(total), None, len(terms), None, cutoff, total)
    value = math.fsum(2**t.omega / (t.d * t.e) for t in terms)
    return HitSum(value, None, len(terms), None, cutoff)


def hit_divisor_sum_weighted_by_exponent(
    k_max: int, a: int, j: int, l: int,
    cutoff: int = DEFAULT_HIT_CUTOFF, exact: bool = False,
) -> HitSum:
    """Regrouped weighted sum: sum over e of (1/e) * sum of 2^omega(d)/d at that e."""
    by_e: dict[int, list[HitTerm]] = {}
    for t in hit_terms(k_max, a, j, l, cutoff):
        by_e.setdefault(t.e, []).append(t)
    if exact:
        total = sum(
            (
                Fraction(1, e) * sum((Fraction(2**t.omega, t.d) for t in g), Fraction(0))
                for e, g in sorted(by_e.items())
            ),
            Fraction(0),
        )
        n = sum(len(g) for g in by_e.values())
        return HitSum(float(total), None, n, None, cutoff, total)
    value = math.fsum(
        math.fsum(2**t.omega / t.d for t in g) / e for e, g in sorted(by_e.items())
    )
    return HitSum(value, None, sum(len(g) for g in by_e.values()), None, cutoff)


@dataclass(frozen=True)
class DiagnosticsRow:
    x: int
    mertens: MertensPoint
    pi_bounds: PiBoundsPoint | None
    pair_sums: tuple[PairSum, ...]
    hit: HitSum | None


@dataclass(frozen=True)
class SieveDiagnostics:
    rows: tuple[DiagnosticsRow, ...]
    pair_m_values: tuple[int, ...]
    hit_params: tuple[int, int, int, int, int] | None  # (k_max, a, j, l, cutoff)


def _diagnostics_row(args) -> DiagnosticsRow:
    x, pair_m_values, hit_params, segment_size = args
    mert = mertens_sum(x, segment_size=segment_size)
    pib = pi_bounds_check(x, segment_size=segment_size) if x >= 59 else None
    pairs = tuple(brun_pair_sum(m, x, segment_size=segment_size) for m in pair_m_values)
    hit = None
    if hit_params is not None:
        k_max, a, j, l, cutoff = hit_params
        hit = hit_divisor_sum(x, k_max, a, j, l, cutoff)
    return DiagnosticsRow(x, mert, pib, pairs, hit)


def build_diagnostics(
    grid: list[int],
    pair_m_values: list[int] = (2,),
    hit_params: tuple[int, int, int, int, int] | None = None,
    segment_size: int = 1 << 21,
    workers: int = 1,
) -> SieveDiagnostics:
    """One row per grid point: Mertens sum, pi bounds where defined, pair sums,
    and the hit-exponent sum with its log^2 ratio. Grid points are pure and
    independent; workers > 1 evaluates them in parallel, output order fixed."""
    jobs = [
        (x, tuple(pair_m_values), hit_params, segment_size) for x in sorted(set(grid))
    ]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_diagnostics_row, jobs))
    else:
        rows = [_diagnostics_row(job) for job in jobs]
    return SieveDiagnostics(tuple(rows), tuple(pair_m_values), hit_params)
