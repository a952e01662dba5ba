import random
from fractions import Fraction

import numpy as np
import pytest

from elacomplex import exactlin as xl
from elacomplex.rational import Q


def brute_select(rows):
    """Oracle: greedy independent-subset selection over exact Fractions."""
    kept = []
    basis = []  # echelon rows as lists of Fraction

    def reduce(v):
        v = list(v)
        for piv, b in basis:
            if v[piv]:
                c = v[piv]
                v = [a - c * bb for a, bb in zip(v, b)]
        return v

    def to_frac(x):
        return x if isinstance(x, Fraction) else Fraction(int(x))

    for i, row in enumerate(rows):
        v = reduce([to_frac(x) for x in row])
        piv = next((j for j, x in enumerate(v) if x), None)
        if piv is not None:
            inv = 1 / v[piv]
            basis.append((piv, [x * inv for x in v]))
            kept.append(i)
    return kept


def test_modmul_exact_against_python_ints():
    rng = np.random.default_rng(0)
    p = xl.PRIMES[0]
    A = rng.integers(0, p, size=(37, 23)).astype(np.float64)
    B = rng.integers(0, p, size=(23, 31)).astype(np.float64)
    C = xl.modmul(A, B, p)
    Ai = A.astype(object).astype(int)
    Bi = B.astype(object).astype(int)
    expected = (np.array(Ai) @ np.array(Bi)) % p
    assert np.array_equal(C.astype(int), expected.astype(int))


def test_primes_are_prime_and_in_range():
    def is_prime(n):
        if n % 2 == 0:
            return False
        d = 3
        while d * d <= n:
            if n % d == 0:
                return False
            d += 2
        return True

    for p in xl.PRIMES:
        assert p < 2**26
        assert is_prime(p)
    assert len(set(xl.PRIMES)) == len(xl.PRIMES)


def test_crt_and_rational_reconstruction_roundtrip():
    rng = random.Random(1)
    primes = xl.PRIMES[:3]
    m = primes[0] * primes[1] * primes[2]
    for _ in range(200):
        num = rng.randint(-10**6, 10**6)
        den = rng.randint(1, 10**6)
        from math import gcd

        g = gcd(abs(num), den)
        if g:
            num, den = num // g, den // g
        if den == 0:
            continue
        residues = [(num * pow(den, -1, p)) % p for p in primes]
        a, mod = xl.crt_int(residues, primes)
        assert mod == m
        q = xl.rat_reconstruct(a % mod, mod)
        assert q == Q(num, den)


def test_select_rows_matches_bruteforce_oracle():
    rng = np.random.default_rng(7)
    for trial in range(10):
        n, m = 24, 15
        base = rng.integers(-5, 6, size=(10, m))
        mix = rng.integers(-3, 4, size=(n, 10))
        nums = (mix @ base).astype(np.int64)  # rank <= 10 with dependencies
        kept, _ = xl.select_rows(nums)
        assert kept == brute_select(nums)


def test_select_rows_expansions_exact():
    rng = np.random.default_rng(11)
    n, m = 18, 12
    base = rng.integers(-4, 5, size=(6, m))
    mix = rng.integers(-6, 7, size=(n, 6))
    nums = (mix @ base).astype(np.int64)
    dens = rng.integers(1, 4, size=n).astype(np.int64)
    flags = np.ones(n, dtype=bool)
    kept, exps = xl.select_rows(nums, dens, flags, primes=xl.PRIMES[:3])
    frac_rows = [
        [Fraction(int(x), int(d)) for x in row] for row, d in zip(nums, dens)
    ]
    assert kept == brute_select(frac_rows)
    for idx, coeffs in exps.items():
        target = [Q(int(x), int(dens[idx])) for x in nums[idx]]
        acc = [Q(0)] * m
        for c, krow in zip(coeffs, kept):
            if c == 0:
                continue
            dk = int(dens[krow])
            for j in range(m):
                acc[j] += c * Q(int(nums[krow][j]), dk)
        assert acc == target


def test_ranks_certified():
    rng = np.random.default_rng(3)
    base = rng.integers(-5, 6, size=(4, 9))
    mix = rng.integers(-3, 4, size=(12, 4))
    nums = (mix @ base).astype(np.int64)
    r = xl.certified_rank(nums)
    # oracle via exact Fraction elimination
    assert r == len(brute_select(nums))
    assert r <= 4


def test_rank_of_identity_and_zero():
    eye = np.eye(5, dtype=np.int64)
    assert xl.certified_rank(eye) == 5
    assert xl.certified_rank(np.zeros((4, 6), dtype=np.int64)) == 0


def test_reconstruction_failure_raises_with_too_few_primes():
    # a fraction too tall to reconstruct from a single 26-bit prime
    primes = xl.PRIMES[:1]
    big_num, big_den = 10**9 + 7, 10**9 + 9
    residue = (big_num * pow(big_den, -1, primes[0])) % primes[0]
    a, mod = xl.crt_int([residue], primes)
    q = xl.rat_reconstruct(a % mod, mod)
    assert q is None or q != Q(big_num, big_den)


def test_blocked_and_unblocked_agree():
    rng = np.random.default_rng(13)
    nums = rng.integers(-9, 10, size=(40, 25)).astype(np.int64)
    k1, _ = xl.select_rows(nums, block=4)
    k2, _ = xl.select_rows(nums, block=1000)
    assert k1 == k2


def test_select_rows_multiblock_stress_vs_oracle():
    rng = random.Random(99)
    rank, m, extra = 25, 40, 35
    base = [
        [Q(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(m)]
        for _ in range(rank)
    ]
    rows, flags = [], []
    for i in range(rank + extra):
        if i < rank and rng.random() < 0.7:
            rows.append(base[i])
            flags.append(False)
        else:
            combo = [Q(0)] * m
            for _ in range(rng.randint(1, 4)):
                c = Q(rng.randint(-3, 3), rng.randint(1, 3))
                src = base[rng.randrange(rank)]
                combo = [a + c * b for a, b in zip(combo, src)]
            rows.append(combo)
            flags.append(True)
    nums = np.empty((len(rows), m), dtype=np.int64)
    dens = []
    for i, row in enumerate(rows):
        den = 1
        for q in row:
            den = den * q.denominator // np.gcd(den, q.denominator)
        dens.append(den)
        for j, q in enumerate(row):
            nums[i, j] = int(q * den)
    kept, expans = xl.select_rows(
        nums, dens=dens, expand_flags=flags, block=16
    )
    frac_rows = [[Fraction(q.numerator, q.denominator) for q in r] for r in rows]
    assert kept == brute_select(frac_rows)
    for idx, coeffs in expans.items():
        for j in range(m):
            total = sum(
                Fraction(c.numerator, c.denominator) * frac_rows[k][j]
                for c, k in zip(coeffs, kept)
            )
            assert total == frac_rows[idx][j]
