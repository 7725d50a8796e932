"""Exact integer number theory: primality, factoring, modular orders, CRT, sieves.

Everything here is a pure function of its inputs (the Miller-Rabin rounds and
Pollard rho walks are seeded from the number under test), so all operations are
safe to call concurrently. Arbitrary-precision ints throughout; numpy is used
only inside the sieves as a fixed-width fast path.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, DomainError, InvariantViolation

# Deterministic Miller-Rabin witness set for n < 2^64 (Sinclair/Jaeschke bases).
_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TWO64 = 1 << 64
# 64 extra random rounds above 2^64: error probability < 4^-64 = 2^-128.
_MR_ROUNDS_LARGE = 64

_TINY_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59)

DEFAULT_FACTOR_BUDGET_BITS = 96
_TRIAL_DIVISION_BOUND = 100_000
_SIEVE_DIRECT_ROOT = 1_000_000  # segmented sieving while sqrt(hi) stays below this


@dataclass
class PrimalityStats:
    """Counters noting whether any call left the deterministic (< 2^64) regime."""

    probabilistic_calls: int = 0

    @property
    def probabilistic_mode_used(self) -> bool:
        return self.probabilistic_calls > 0

    def reset(self) -> None:
        self.probabilistic_calls = 0


#: Process-wide diagnostics; reset per run by callers that report the flag.
primality_stats = PrimalityStats()

_small_prime_cache: list[int] = []


def _small_primes() -> list[int]:
    global _small_prime_cache
    if not _small_prime_cache:
        _small_prime_cache = primes_upto(_TRIAL_DIVISION_BOUND)
    return _small_prime_cache


def _mr_composite_witness(n: int, a: int, d: int, s: int) -> bool:
    """True if base a witnesses compositeness of n = d*2^s + 1 (d odd)."""
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_prime(n: int) -> bool:
    """Primality test: exact below 2^64, error < 2^-128 above.

    Above 2^64 the call is probabilistic and bumps ``primality_stats`` so
    reports can flag the regime.
    """
    if n < 2:
        return False
    for p in _TINY_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _TWO64:
        bases = _MR_BASES_64
    else:
        primality_stats.probabilistic_calls += 1
        rng = random.Random(n)
        bases = _MR_BASES_64 + tuple(
            rng.randrange(2, n - 1) for _ in range(_MR_ROUNDS_LARGE)
        )
    return not any(_mr_composite_witness(n, a, d, s) for a in bases)


@dataclass(frozen=True)
class Factorization:
    """Complete factorization of ``base`` as strictly increasing (prime, exponent) pairs."""

    base: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        """Number of distinct prime factors."""
        return len(self.factors)

    def product(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out

    def verify(self) -> list[str]:
        """Re-check the factorization from first principles; returns failure strings."""
        problems = []
        if self.product() != self.base:
            problems.append(f"product of factors != {self.base}")
        if list(self.primes) != sorted(set(self.primes)):
            problems.append("primes not strictly increasing")
        for p, e in self.factors:
            if e < 1:
                problems.append(f"exponent of {p} not positive")
            if not is_prime(p):
                problems.append(f"factor {p} is not prime")
        return problems


def _pollard_brent(n: int) -> int:
    """Nontrivial factor of odd composite n (Brent's cycle variant, seeded from n)."""
    rng = random.Random(n)
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        # cycle collapsed; retry with fresh parameters


def factor(n: int, budget_bits: int = DEFAULT_FACTOR_BUDGET_BITS) -> Factorization:
    """Factor n completely: trial division below 10^5, then Pollard-Brent rho.

    Raises BudgetExceeded when a composite cofactor larger than ``budget_bits``
    bits remains to be split (prime cofactors of any size are accepted).
    The result is verified before return: product check plus a primality check
    of every factor.
    """
    if n < 2:
        raise DomainError(f"factor requires n >= 2, got {n}")
    counts: dict[int, int] = {}
    remaining = n
    for p in _small_primes():
        if p * p > remaining:
            break
        while remaining % p == 0:
            counts[p] = counts.get(p, 0) + 1
            remaining //= p
    stack = [remaining] if remaining > 1 else []
    while stack:
        c = stack.pop()
        if is_prime(c):
            counts[c] = counts.get(c, 0) + 1
            continue
        if c.bit_length() > budget_bits:
            raise BudgetExceeded(
                f"factoring {n}: composite cofactor of {c.bit_length()} bits "
                f"exceeds the {budget_bits}-bit budget"
            )
        d = _pollard_brent(c)
        stack.append(d)
        stack.append(c // d)
    result = Factorization(n, tuple(sorted(counts.items())))
    problems = result.verify()
    if problems:
        raise InvariantViolation(f"factor({n}) self-check failed: {problems}")
    return result


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """base**exponent mod modulus, result in [0, modulus)."""
    if modulus < 1:
        raise DomainError(f"modulus must be >= 1, got {modulus}")
    return pow(base, exponent, modulus)


def multiplicative_order(a: int, q: int, budget_bits: int = 192) -> int:
    """Order of a modulo prime q: factor q-1, then strip prime factors."""
    if not is_prime(q):
        raise DomainError(f"{q} is not prime")
    if a % q == 0:
        raise DomainError(f"{q} divides {a}")
    e = q - 1
    for r in factor(q - 1, budget_bits).primes:
        while e % r == 0 and pow(a, e // r, q) == 1:
            e //= r
    return e


def _order_mod(a: int, m: int, budget_bits: int = 192) -> int:
    """Order of a in (Z/mZ)* for any m >= 2 with gcd(a, m) = 1."""
    if m < 2:
        raise DomainError(f"modulus must be >= 2, got {m}")
    if math.gcd(a, m) != 1:
        raise DomainError(f"gcd(a={a}, m={m}) > 1")
    order = 1
    for p, v in factor(m, budget_bits).factors:
        pv = p**v
        e = (p - 1) * p ** (v - 1)
        radicals = set(factor(p - 1, budget_bits).primes) if p > 2 else set()
        if v > 1:
            radicals.add(p)
        for r in radicals:
            while e % r == 0 and pow(a, e // r, pv) == 1:
                e //= r
        order = math.lcm(order, e)
    return order


def crt_combine(congruences: list[tuple[int, int]]) -> tuple[int, int]:
    """Solve a system of congruences with pairwise coprime moduli.

    Args:
        congruences: (residue, modulus) pairs, each 0 <= residue < modulus, modulus >= 2.

    Returns:
        (b, W) with W the product of the moduli and b the unique solution in [0, W).
        The empty system yields (0, 1).

    Raises:
        CrtConflictError: two moduli share a factor (names the offending pair).
    """
    from .errors import CrtConflictError

    b, w = 0, 1
    seen: list[int] = []
    for residue, modulus in congruences:
        if modulus < 2:
            raise DomainError(f"modulus must be >= 2, got {modulus}")
        if not 0 <= residue < modulus:
            raise DomainError(f"residue {residue} out of range for modulus {modulus}")
        if math.gcd(w, modulus) != 1:
            clash = next(m for m in seen if math.gcd(m, modulus) != 1)
            raise CrtConflictError(f"moduli {clash} and {modulus} are not coprime")
        t = (residue - b) * pow(w, -1, modulus) % modulus
        b += w * t
        w *= modulus
        seen.append(modulus)
    return b, w


def _discrete_log_in_cycle(a: int, c: int, m: int, budget_bits: int = 192):
    """Solve a^i = c (mod m) inside the cycle generated by a.

    Returns (e, T) with T = ord_m(a) and solution set i = e (mod T), or None
    when c is outside the cycle. Baby-step giant-step over the cycle.
    """
    a %= m
    c %= m
    t = _order_mod(a, m, budget_bits)
    if c == 1 % m:
        return 0, t
    s = math.isqrt(t - 1) + 1
    baby: dict[int, int] = {}
    x = 1
    for r in range(s):
        baby.setdefault(x, r)
        x = x * a % m
    giant = pow(a, t - s, m)  # a^(-s) mod m
    g = c
    for step in range(s + 1):
        if g in baby:
            return (step * s + baby[g]) % t, t
        g = g * giant % m
    return None


def _form_component(a: int, j: int, l: int, p: int, v: int, budget_bits: int = 192):
    """Constraint that p^v divides j*a^i + l, reduced to an exponent congruence.

    Returns None (unsatisfiable), "free" (holds for every i), or (e, T)
    meaning i = e (mod T).
    """
    pv = p**v
    alpha = 0
    jj = abs(j)
    while jj and jj % p == 0:
        jj //= p
        alpha += 1
    if j == 0 or alpha >= v:
        return "free" if l % pv == 0 else None
    beta = 0
    ll = abs(l)
    while ll and ll % p == 0:
        ll //= p
        beta += 1
    if l == 0 or beta != alpha:
        return None
    m2 = p ** (v - alpha)
    j2 = (j // p**alpha) % m2
    l2 = (l // p**alpha) % m2
    c = -l2 * pow(j2, -1, m2) % m2
    return _discrete_log_in_cycle(a, c, m2, budget_bits)


def _merge_congruences(congs: list[tuple[int, int]]):
    """Intersect progressions i = e_t (mod T_t); moduli need not be coprime."""
    e0, t0 = 0, 1
    for e, t in congs:
        g = math.gcd(t0, t)
        if (e - e0) % g:
            return None
        step = (e - e0) // g * pow(t0 // g, -1, t // g) % (t // g)
        e0 += t0 * step
        t0 = t0 // g * t
        e0 %= t0
    return e0, t0


def form_exponent_order(a: int, j: int, l: int, d: int, budget_bits: int = 192):
    """Least i >= 1 with j*a^i + l = 0 (mod d), plus the period of the solution set.

    Returns (e, period) where the full solution set is exactly
    {i >= 1 : i = e (mod period)}, or None when no exponent works. The period
    equals ord_d(a) whenever gcd(j, d) = 1; when j shares factors with d the
    true period can be a proper divisor of ord_d(a).
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if math.gcd(a, d) != 1:
        raise DomainError(f"gcd(a={a}, d={d}) > 1")
    congs = []
    for p, v in factor(d, budget_bits).factors:
        comp = _form_component(a, j, l, p, v, budget_bits)
        if comp is None:
            return None
        if comp != "free":
            congs.append(comp)
    merged = _merge_congruences(congs)
    if merged is None:
        return None
    e0, period = merged
    e = e0 % period or period
    return e, period


def _sieve_flags(limit: int) -> np.ndarray:
    """Boolean array of length limit+1 with True exactly at prime indices."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def primes_upto(n: int) -> list[int]:
    """All primes <= n, ascending (plain sieve of Eratosthenes)."""
    if n < 2:
        return []
    return np.flatnonzero(_sieve_flags(n)).tolist()


def primes_in_range(lo: int, hi: int, segment_size: int = 1 << 21) -> list[int]:
    """All primes p with lo <= p <= hi, ascending.

    Segmented sieving while sqrt(hi) stays sieve-sized; per-candidate
    Miller-Rabin above that.
    """
    if lo > hi:
        raise DomainError(f"empty range: lo={lo} > hi={hi}")
    lo = max(lo, 2)
    if lo > hi:
        return []
    root = math.isqrt(hi)
    if root > _SIEVE_DIRECT_ROOT:
        out = [2] if lo <= 2 else []
        first = max(lo, 3) | 1
        out += [m for m in range(first, hi + 1, 2) if is_prime(m)]
        return out
    base = primes_upto(root)
    out = []
    start = lo
    while start <= hi:
        stop = min(start + segment_size - 1, hi)
        flags = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            first = max(p * p, (start + p - 1) // p * p)
            if first > stop:
                continue
            flags[first - start :: p] = False
        out.extend((np.flatnonzero(flags) + start).tolist())
        start = stop + 1
    return out


def next_prime_above(n: int) -> int:
    """Smallest prime strictly greater than n."""
    c = n + 1
    while not is_prime(c):
        c += 1
    return c
