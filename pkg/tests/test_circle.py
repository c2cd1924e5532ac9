import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subconvex.arith import euler_phi
from subconvex.calibration import CIRCLE, JUTILA
from subconvex.characters import primitive_characters
from subconvex.circle import (ModuliSet, build_product_moduli, circle_error, circle_kernel,
                              circle_seed, i_tilde, jutila_bound, jutila_error_parseval,
                              jutila_error_quadrature, kernel_mass, loglog_slope, parseval_tail,
                              s_direct, s_tilde)
from subconvex.errors import DomainError, EmptyRange, PreconditionError


def farey_count(members, delta, x):
    """Covering intervals of x by brute force in exact rationals."""
    x = Fraction(x)
    d = Fraction(delta)
    count = 0
    for q in members:
        for a in range(q):
            if math.gcd(a, q) == 1:
                c = Fraction(a, q)
                dist = min((x - c) % 1, (c - x) % 1)
                count += dist <= d
    return count


# ---------------------------------------------------------------- kernel

def test_single_fraction_kernel():
    m = ModuliSet.from_members([1], 0.01, Q=10)
    x = np.array([0.0, 0.005, 0.995, 0.02, 0.5])
    assert np.allclose(i_tilde(m, x), [50, 50, 50, 0, 0])


def test_kernel_two_moduli_farey():
    m = ModuliSet.from_members([2, 3], 0.01, Q=10)
    x = 1 / 3
    expected = farey_count([2, 3], Fraction(1, 100), Fraction(1, 3)) / (2 * 0.01 * 3)
    assert i_tilde(m, x) == pytest.approx(expected, rel=1e-12)
    assert expected > 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=6, unique=True),
       st.floats(0.0, 1.0, exclude_max=True))
def test_kernel_matches_enumeration(members, x):
    Q = max(members)
    delta = 0.3 / Q**1.5
    m = ModuliSet.from_members(members, delta)
    mass = sum(euler_phi(q) for q in members)
    expected = farey_count(members, delta, x) / (2 * delta * mass)
    # Boundaries are measure zero; skip points within round-off of one.
    near = any(abs(((x - a / q) % 1) - delta) < 1e-12 or abs(((a / q - x) % 1) - delta) < 1e-12
               for q in members for a in range(q))
    if not near:
        assert float(i_tilde(m, x)) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 60), st.floats(0.1, 5.0))
def test_kernel_mass_is_one(Q, c):
    m = ModuliSet.up_to(Q, min(0.5, c / Q**1.5))
    assert abs(kernel_mass(m) - 1) < 1e-9


def test_delta_range():
    with pytest.raises(DomainError):
        ModuliSet.up_to(20, 1e-6)
    with pytest.raises(DomainError):
        ModuliSet.up_to(20, 0.9)
    with pytest.raises(PreconditionError):
        ModuliSet.from_members([5, 30], 1e-2, Q=20)


# ---------------------------------------------------------------- L2 error

def test_single_fraction_closed_form():
    d = 0.01
    m = ModuliSet.from_members([1], d, Q=10)
    closed = (1 - 2 * d) + 2 * d * (1 - 1 / (2 * d)) ** 2
    assert jutila_error_quadrature(m) == pytest.approx(closed, rel=1e-12)
    assert jutila_error_parseval(m) == pytest.approx(closed, rel=1e-9)


def test_quadrature_and_parseval_agree():
    m = ModuliSet.up_to(20, 1e-3)
    quad = jutila_error_quadrature(m)
    pars = jutila_error_parseval(m)
    assert abs(quad - pars) < 1e-7
    # Frozen from both evaluations.
    assert quad == pytest.approx(2.90625, abs=1e-9)


def test_truncated_parseval_within_tail():
    m = ModuliSet.up_to(12, 5e-3)
    exact = jutila_error_parseval(m)
    n_max = 40000
    trunc = jutila_error_parseval(m, n_max)
    assert 0 <= exact - trunc <= 3 * parseval_tail(m, n_max) + 1e-9


def test_jutila_bound_random_sets():
    rng = np.random.default_rng(3)
    for _ in range(20):
        Q = int(rng.integers(5, 60))
        members = sorted(set(rng.integers(1, Q + 1, int(rng.integers(1, Q)))) | {Q})
        delta = float(rng.uniform(0.2, 3.0)) / Q**1.5
        m = ModuliSet.from_members(members, min(delta, 0.5))
        assert jutila_error_quadrature(m) <= jutila_bound(m, JUTILA.value)


# ---------------------------------------------------------------- product moduli

def test_product_moduli_small():
    m = build_product_moduli(1, 1, 2, 5)
    assert m.factored[1:] == ((2, 3), (5, 7))
    assert m.members == (10, 14, 15, 21)


def test_product_moduli_coprimality():
    m = build_product_moduli(1, 7, 5, 11)
    assert 7 not in m.factored[1]
    assert m.factored[1] == (5,)


def test_product_moduli_errors():
    with pytest.raises(PreconditionError):
        build_product_moduli(1, 1, 5, 5)
    with pytest.raises(EmptyRange):
        build_product_moduli(1, 6, 2, 11)  # 2 and 3 both divide M


def test_product_factorisation_unique():
    m = build_product_moduli(2, 3, 5, 13)
    P, A, B = m.factored
    for q in m.members:
        pairs = [(a, b) for a in A for b in B if P * a * b == q]
        assert len(pairs) == 1
    assert max(m.members) <= m.Q


# ---------------------------------------------------------------- S versus S-tilde

def test_kernel_diagonal_is_one():
    m = ModuliSet.up_to(10, 1 / 50)
    assert circle_kernel(m, np.array([0]))[0] == pytest.approx(1.0, abs=1e-14)


def test_kernel_matches_interval_average():
    # K(d) is the Fourier coefficient of the kernel at -d.
    m = ModuliSet.up_to(6, 0.02)
    for d in (1, 2, 5, 13):
        x, dx = np.linspace(0, 1, 400001, retstep=True)
        vals = i_tilde(m, x) * np.cos(2 * np.pi * d * x)
        direct = float(np.sum(vals[:-1]) * dx)
        assert circle_kernel(m, np.array([d]))[0] == pytest.approx(direct, abs=2e-4)


def test_pointwise_bound(delta20k):
    N, Q = 50.0, 40
    for seed in range(3):
        chi, t = circle_seed(seed)
        assert circle_error(delta20k, chi, t, N, Q) <= CIRCLE.value * N**1.6 / Q


def test_trivial_character_pointwise(delta20k):
    chi = primitive_characters(1)[0]
    m = ModuliSet.up_to(40, 1 / 50)
    err = abs(s_direct(delta20k, chi, 0.0, 50.0) - s_tilde(delta20k, chi, 0.0, 50.0, m))
    assert err <= CIRCLE.value * 50**1.6 / 40


def test_doubling_factor(delta20k):
    # Geometric-mean reduction per doubling of Q, over 10 seeds.
    ladder = (20, 40, 80, 160)
    slopes = []
    for seed in range(10):
        chi, t = circle_seed(seed)
        errs = [circle_error(delta20k, chi, t, 200.0, Q) for Q in ladder]
        slopes.append(loglog_slope(ladder, errs))
    factor = 2 ** (-np.mean(slopes))
    assert 1.5 <= factor <= 3.0
