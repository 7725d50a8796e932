import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covercraft import ntcore
from covercraft.errors import BudgetExceeded, CrtConflictError, DomainError


def trial_division_is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class TestIsPrime:
    def test_unit_is_not_prime(self):
        assert ntcore.is_prime(1) is False

    def test_31_prime(self):
        # oracle: trial division to sqrt(31)
        assert trial_division_is_prime(31)
        assert ntcore.is_prime(31) is True

    def test_2047_composite(self):
        # oracle: trial division finds 23 (2047 = 23 * 89)
        assert 2047 % 23 == 0
        assert ntcore.is_prime(2047) is False

    def test_exhaustive_below_1e6_matches_trial_division_sieve(self):
        limit = 10**6
        flags = ntcore._sieve_flags(limit - 1)
        mismatches = [n for n in range(limit) if ntcore.is_prime(n) != bool(flags[n])]
        assert mismatches == []

    def test_large_input_uses_probabilistic_mode_and_flags_it(self):
        ntcore.primality_stats.reset()
        assert ntcore.is_prime(2**127 - 1) is True  # Mersenne prime
        assert ntcore.is_prime(2**101 - 1) is False
        assert ntcore.primality_stats.probabilistic_mode_used
        ntcore.primality_stats.reset()
        assert ntcore.is_prime(2**61 - 1) is True  # below 2^64: deterministic
        assert not ntcore.primality_stats.probabilistic_mode_used


class TestFactor:
    def test_small_composite(self):
        assert ntcore.factor(12).factors == ((2, 2), (3, 1))

    def test_2047(self):
        # oracle: trial division
        assert ntcore.factor(2047).factors == ((23, 1), (89, 1))

    def test_mersenne_13_is_prime(self):
        # oracle: trial division to 90 finds no divisor of 8191
        assert trial_division_is_prime(8191)
        assert ntcore.factor(8191).factors == ((8191, 1),)

    def test_below_two_rejected(self):
        with pytest.raises(DomainError):
            ntcore.factor(1)

    def test_budget_exceeded_names_input(self):
        n = 2**101 - 1  # composite with no factor below the trial-division bound
        with pytest.raises(BudgetExceeded, match=str(n)):
            ntcore.factor(n, budget_bits=96)
        # a generous budget splits it
        fac = ntcore.factor(n, budget_bits=128)
        assert fac.product() == n and fac.omega == 2

    def test_prime_cofactor_exempt_from_budget(self):
        # 2^107-1 is prime: accepted even though it dwarfs the budget
        fac = ntcore.factor(2**107 - 1, budget_bits=96)
        assert fac.factors == ((2**107 - 1, 1),)

    @given(st.integers(min_value=2, max_value=10**6))
    @settings(max_examples=300, deadline=None)
    def test_roundtrip_and_primality_of_factors(self, n):
        fac = ntcore.factor(n)
        assert fac.product() == n
        assert fac.verify() == []
        assert list(fac.primes) == sorted(fac.primes)


class TestModPow:
    def test_zero_exponent(self):
        assert ntcore.mod_pow(7, 0, 13) == 1

    def test_wraparound(self):
        assert ntcore.mod_pow(2, 5, 31) == 1  # 32 = 31 + 1

    def test_1024_mod_1000(self):
        assert ntcore.mod_pow(2, 10, 1000) == 24

    def test_zero_modulus_rejected(self):
        with pytest.raises(DomainError):
            ntcore.mod_pow(2, 3, 0)

    def test_against_naive_repeated_multiplication_sample(self):
        # vectorized naive oracle: multiply step by step, 1e5 random triples < 2^10
        rng = np.random.RandomState(987654)
        size = 100_000
        base = rng.randint(0, 1024, size=size).astype(np.int64)
        expo = rng.randint(0, 1024, size=size).astype(np.int64)
        mod = rng.randint(1, 1024, size=size).astype(np.int64)
        acc = np.ones(size, dtype=np.int64) % mod
        b = base % mod
        for step in range(1, 1024):
            mask = expo >= step
            if not mask.any():
                break
            acc[mask] = acc[mask] * b[mask] % mod[mask]
        got = np.fromiter(
            (ntcore.mod_pow(int(x), int(e), int(m)) for x, e, m in zip(base, expo, mod)),
            dtype=np.int64,
            count=size,
        )
        assert np.array_equal(acc, got)


class TestMultiplicativeOrder:
    def test_identity_element(self):
        assert ntcore.multiplicative_order(1, 7) == 1
        assert ntcore.multiplicative_order(8, 7) == 1  # 8 = 1 mod 7

    def test_order_of_2_mod_31(self):
        # oracle: 2^5 = 32 = 1 mod 31, and no smaller exponent works
        assert all(pow(2, e, 31) != 1 for e in range(1, 5))
        assert ntcore.multiplicative_order(2, 31) == 5

    def test_order_of_2_mod_23(self):
        assert pow(2, 11, 23) == 1
        assert ntcore.multiplicative_order(2, 23) == 11

    def test_composite_modulus_rejected(self):
        with pytest.raises(DomainError):
            ntcore.multiplicative_order(2, 15)

    def test_divisible_base_rejected(self):
        with pytest.raises(DomainError):
            ntcore.multiplicative_order(62, 31)

    @given(st.sampled_from(ntcore.primes_upto(500)[2:]), st.integers(2, 1000))
    @settings(max_examples=200, deadline=None)
    def test_order_divides_q_minus_1(self, q, a):
        if a % q == 0:
            a += 1
        e = ntcore.multiplicative_order(a, q)
        assert (q - 1) % e == 0
        assert pow(a, e, q) == 1


class TestCrtCombine:
    def test_single_congruence(self):
        assert ntcore.crt_combine([(3, 7)]) == (3, 7)

    def test_two_small(self):
        # oracle: enumerate 0..14
        expected = next(x for x in range(15) if x % 3 == 0 and x % 5 == 1)
        assert expected == 6
        assert ntcore.crt_combine([(0, 3), (1, 5)]) == (6, 15)

    def test_golden_31_89(self):
        # oracle: walk the residue class 25 mod 31 until it hits 85 mod 89
        expected = next(x for x in range(25, 31 * 89, 31) if x % 89 == 85)
        assert expected == 1420
        assert ntcore.crt_combine([(25, 31), (85, 89)]) == (1420, 2759)

    def test_empty(self):
        assert ntcore.crt_combine([]) == (0, 1)

    def test_conflict_names_pair(self):
        with pytest.raises(CrtConflictError, match="6 and 15"):
            ntcore.crt_combine([(1, 6), (2, 35), (4, 15)])

    def test_bad_residue_rejected(self):
        with pytest.raises(DomainError):
            ntcore.crt_combine([(7, 7)])
        with pytest.raises(DomainError):
            ntcore.crt_combine([(0, 1)])

    @given(
        st.lists(
            st.sampled_from([2, 3, 5, 7, 11, 13, 17, 19, 23, 29]),
            unique=True,
            max_size=6,
        ).flatmap(
            lambda mods: st.tuples(
                st.just(mods), st.tuples(*[st.integers(0, m - 1) for m in mods])
            )
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_solution_satisfies_all_congruences(self, case):
        mods, residues = case
        b, w = ntcore.crt_combine(list(zip(residues, mods)))
        assert w == math.prod(mods)
        assert 0 <= b < w
        for r, m in zip(residues, mods):
            assert b % m == r


class TestFormExponentOrder:
    def test_order_case(self):
        # 2^i = 1 mod 31 first at i = ord = 5
        assert ntcore.form_exponent_order(2, 1, -1, 31) == (5, 5)

    def test_negative_one_case(self):
        # 2^2 = 4 = -1 mod 5; ord_5(2) = 4
        assert ntcore.form_exponent_order(2, 1, 1, 5) == (2, 4)

    def test_unreachable_target(self):
        # powers of 2 mod 7 are {1, 2, 4}, never 3
        assert ntcore.form_exponent_order(2, 1, -3, 7) is None

    def test_shared_factor_rejected(self):
        with pytest.raises(DomainError):
            ntcore.form_exponent_order(2, 1, 1, 6)

    def test_period_can_properly_divide_order_when_j_shares_factors(self):
        # 5*2^i = 10 (mod 15) holds exactly for odd i; ord_15(2) = 4
        assert ntcore.form_exponent_order(2, 5, -10, 15) == (1, 2)

    @pytest.mark.parametrize(
        "a,j,l,d",
        [
            (2, 1, -1, 31),
            (2, 1, 1, 5),
            (2, 3, 4, 13),
            (3, -2, 7, 25),
            (5, 1, -1, 341),
            (2, -1, 9, 49),
            (7, 2, -3, 55),
        ],
    )
    def test_coset_characterization(self, a, j, l, d):
        if math.gcd(a, d) != 1:
            pytest.skip("bad fixture")
        got = ntcore.form_exponent_order(a, j, l, d)
        brute = [i for i in range(1, 4 * d) if (j * a**i + l) % d == 0]
        if got is None:
            assert brute == []
            return
        e, period = got
        assert (j * a**e + l) % d == 0
        rng = random.Random(20240809)
        for _ in range(50):
            i = rng.randrange(1, 10 * period + 1)
            assert ((j * a**i + l) % d == 0) == (i % period == e % period)


class TestPrimesInRange:
    def test_empty_gap(self):
        assert ntcore.primes_in_range(14, 16) == []

    def test_first_hundred(self):
        got = ntcore.primes_in_range(1, 100)
        assert len(got) == 25
        assert got[:4] == [2, 3, 5, 7] and got[-1] == 97

    def test_tiny(self):
        assert ntcore.primes_in_range(2, 10) == [2, 3, 5, 7]

    def test_reversed_bounds_rejected(self):
        with pytest.raises(DomainError):
            ntcore.primes_in_range(10, 2)

    def test_segment_size_does_not_matter(self):
        a = ntcore.primes_in_range(10**6 - 10**4, 10**6 + 10**4, segment_size=1 << 12)
        b = ntcore.primes_in_range(10**6 - 10**4, 10**6 + 10**4, segment_size=1 << 13)
        assert a == b

    def test_large_candidates_above_sieve_scale(self):
        lo = 2**70
        got = ntcore.primes_in_range(lo, lo + 1000)
        assert all(ntcore.is_prime(p) for p in got)
        assert got == sorted(got) and len(got) > 0


def test_next_prime_above():
    assert ntcore.next_prime_above(2) == 3
    assert ntcore.next_prime_above(3) == 5
    assert ntcore.next_prime_above(89) == 97
