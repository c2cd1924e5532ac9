import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subconvex.arith import (divisor_count, divisors, euler_phi, factorize, kloosterman_batch,
                             kloosterman_row, kloosterman_sum, mobius, mod_inverse, primes_in,
                             ramanujan_sum, ramanujan_sums)
from subconvex.errors import NonInvertible, PreconditionError


def brute_kloosterman(a, b, c):
    # Independent oracle: plain loop with cmath and pow(x, -1, c).
    total = 0j
    for x in range(c):
        if math.gcd(x, c) == 1:
            xb = pow(x, -1, c) if c > 1 else 0
            total += cmath.exp(2j * math.pi * (a * x + b * xb) / c)
    return total


def brute_ramanujan(q, n):
    return sum(cmath.exp(2j * math.pi * a * n / q) for a in range(1, q + 1)
               if math.gcd(a, q) == 1).real


@pytest.mark.parametrize("q, phi", [(1, 1), (9, 6), (10, 4), (12, 4), (97, 96)])
def test_euler_phi(q, phi):
    assert euler_phi(q) == phi


def test_mod_inverse():
    assert mod_inverse(1, 5) == 1
    assert mod_inverse(1, 2) == 1
    assert mod_inverse(3, 7) == 5
    with pytest.raises(NonInvertible):
        mod_inverse(2, 4)


def test_kloosterman_small_values():
    assert complex(kloosterman_sum(0, 0, 12)) == pytest.approx(euler_phi(12))
    assert complex(kloosterman_sum(1, 1, 2)) == pytest.approx(1)
    assert complex(kloosterman_sum(1, 1, 3)) == pytest.approx(-1)


def test_ramanujan_small_values():
    assert ramanujan_sum(7, 0) == 6
    assert ramanujan_sum(1, 5) == 1
    assert ramanujan_sum(4, 2) == -2


def test_divisor_count():
    assert divisor_count(1) == 1
    assert divisor_count(12) == 6
    assert all(divisor_count(p) == 2 for p in primes_in(2, 200))


def test_factorize_and_mobius():
    assert factorize(360) == ((2, 3), (3, 2), (5, 1))
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    with pytest.raises(PreconditionError):
        factorize(0)


def test_kloosterman_bad_modulus():
    with pytest.raises(PreconditionError):
        kloosterman_sum(1, 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 120))
def test_kloosterman_matches_brute_force(a, b, c):
    assert abs(complex(kloosterman_sum(a, b, c)) - brute_kloosterman(a, b, c)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 400))
def test_weil_bound(a, b, c):
    S = abs(kloosterman_sum(a, b, c))
    bound = divisor_count(c) * math.sqrt(math.gcd(math.gcd(a, b), c)) * math.sqrt(c)
    assert S <= bound * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1000), st.integers(0, 1000), st.integers(1, 200))
def test_kloosterman_symmetric_and_real(a, b, c):
    S = complex(kloosterman_sum(a, b, c))
    assert abs(S.imag) < 1e-9
    assert abs(S - complex(kloosterman_sum(b, a, c))) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 100), st.integers(1, 100), st.integers(1, 100))
def test_kloosterman_unit_twist(a, b, c):
    # S(a u, b; c) = S(a, b u; c) for every unit u.
    us = [u for u in range(1, c + 1) if math.gcd(u, c) == 1]
    u = us[(a + b) % len(us)]
    assert abs(complex(kloosterman_sum(a * u, b, c)) - complex(kloosterman_sum(a, b * u, c))) < 1e-9


@pytest.mark.parametrize("c", [1, 2, 7, 12, 30, 97])
def test_kloosterman_row_and_batch_agree(c):
    row = kloosterman_row(3, c)
    batch = kloosterman_batch(np.full(c, 3), np.arange(c), c)
    assert np.allclose(row, batch, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(-300, 300))
def test_ramanujan_matches_brute_force(q, n):
    assert ramanujan_sum(q, n) == pytest.approx(brute_ramanujan(q, n), abs=1e-8)
    assert ramanujan_sums(q, [n])[0] == ramanujan_sum(q, n)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3000))
def test_divisors_consistent(n):
    ds = divisors(n)
    assert len(ds) == divisor_count(n)
    assert all(n % d == 0 for d in ds)
    assert sum(mobius(d) for d in ds) == (1 if n == 1 else 0)
