import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subconvex.arith import euler_phi
from subconvex.characters import (character_by_index, enumerate_characters, epsilon_sign,
                                  eval_character, gauss_sum, primitive_characters,
                                  principal_character)
from subconvex.errors import NotPrimitive, PreconditionError


def quadratic(M):
    return next(c for c in enumerate_characters(M) if c.order == 2 and c.is_primitive)


def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def test_counts():
    assert len(enumerate_characters(1)) == 1
    assert len(enumerate_characters(5)) == 4
    assert len(primitive_characters(5)) == 3
    assert len(enumerate_characters(8)) == 4


def test_evaluation_examples():
    for chi in enumerate_characters(12):
        assert eval_character(chi, 1) == 1
        assert eval_character(chi, 12) == 0
    assert eval_character(quadratic(3), 2) == pytest.approx(-1)


def test_gauss_sum_examples():
    assert gauss_sum(principal_character(1)) == pytest.approx(1)
    assert gauss_sum(quadratic(5)) == pytest.approx(math.sqrt(5))
    assert gauss_sum(quadratic(3)) == pytest.approx(1j * math.sqrt(3))
    assert epsilon_sign(quadratic(5)) == pytest.approx(1)
    assert epsilon_sign(quadratic(3)) == pytest.approx(1j)


def test_gauss_sum_needs_primitive():
    with pytest.raises(NotPrimitive):
        gauss_sum(principal_character(5))


def test_bad_modulus_and_index():
    with pytest.raises(PreconditionError):
        enumerate_characters(0)
    with pytest.raises(PreconditionError):
        character_by_index(5, 4)


def test_quadratic_is_legendre():
    for p in (3, 5, 7, 11, 13, 101):
        chi = quadratic(p)
        assert all(eval_character(chi, a) == legendre(a, p) for a in range(p))


@pytest.mark.parametrize("M", [1, 2, 8, 9, 12, 16, 24, 45, 60])
def test_orthogonality(M):
    chars = enumerate_characters(M)
    assert len(chars) == euler_phi(M)
    V = np.array([c.values for c in chars])
    G = V @ V.conj().T
    assert np.allclose(G, euler_phi(M) * np.eye(len(chars)), atol=1e-9)


@pytest.mark.parametrize("M", [1, 3, 4, 8, 15, 16, 27, 36, 100])
def test_primitive_count_matches_moebius_formula(M):
    # Number of primitive characters mod M is sum_{d | M} mu(M / d) phi(d).
    from subconvex.arith import divisors, mobius
    expected = sum(mobius(M // d) * euler_phi(d) for d in divisors(M))
    assert len(primitive_characters(M)) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 150), st.data())
def test_multiplicative(M, data):
    chars = enumerate_characters(M)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    m = data.draw(st.integers(-10**4, 10**4))
    n = data.draw(st.integers(-10**4, 10**4))
    assert abs(eval_character(chi, m * n) - eval_character(chi, m) * eval_character(chi, n)) < 1e-9
    assert abs(eval_character(chi, m + M) - eval_character(chi, m)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 120), st.data())
def test_gauss_sum_modulus_and_conjugate(M, data):
    prim = primitive_characters(M)
    if not prim:
        return
    chi = prim[data.draw(st.integers(0, len(prim) - 1))]
    g = gauss_sum(chi)
    assert abs(abs(g) - math.sqrt(M)) < 1e-9 * math.sqrt(M)
    # tau(chi-bar) = chi(-1) conj(tau(chi)).
    assert abs(gauss_sum(chi.conj()) - eval_character(chi, -1) * g.conjugate()) < 1e-8


def test_conductor_of_induced_character():
    # chi mod 12 induced from the quadratic character mod 3.
    for chi in enumerate_characters(12):
        vals = [eval_character(chi, n) for n in range(12)]
        from3 = [0 if math.gcd(n, 12) > 1 else legendre(n, 3) for n in range(12)]
        if np.allclose(vals, from3):
            assert chi.conductor == 3
            assert not chi.is_primitive
            return
    pytest.fail("induced character not found")
