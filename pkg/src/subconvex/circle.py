"""Overlapping-interval circle method.

A moduli collection Q with mass L = sum phi(q) defines the kernel

    I(x) = (1/(2 delta L)) * #{(q, a): q in Q, (a, q) = 1, |x - a/q| <= delta mod 1},

which approximates the indicator of [0, 1]. Its L^2 error is computed twice:
by integrating the step function exactly on its breakpoints, and from the
Fourier side, where the coefficients are Ramanujan sums times a sinc.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .arith import euler_phi, factorize, primes_in, ramanujan_period, units_and_inverses
from .characters import DirichletCharacter, eval_character
from .errors import BreakpointOverflow, DomainError, EmptyRange, PreconditionError
from .forms import CoefficientSource
from .windows import SmoothWindow

log = logging.getLogger(__name__)

MAX_BREAKPOINTS = 10**7


@dataclass(frozen=True)
class ModuliSet:
    members: tuple[int, ...]
    Q: float
    delta: float
    factored: tuple[int, tuple[int, ...], tuple[int, ...]] | None = None
    mass: int = field(init=False)

    def __post_init__(self):
        members = tuple(sorted(int(q) for q in self.members))
        if not members or members[0] < 1:
            raise PreconditionError("moduli must be positive and nonempty")
        if len(set(members)) != len(members):
            raise PreconditionError("duplicate moduli")
        if members[-1] > self.Q:
            raise PreconditionError(f"modulus {members[-1]} exceeds Q = {self.Q}")
        # Q^-2 << delta << Q^-1, with slack 20 below and 10 above.
        lo, hi = 0.05 / self.Q**2, min(0.5, 10.0 / self.Q)
        if not lo <= self.delta <= hi:
            raise DomainError(f"delta = {self.delta} outside [{lo:.3g}, {hi:.3g}]")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "mass", sum(euler_phi(q) for q in members))

    @classmethod
    def from_members(cls, members, delta: float | None = None, Q: float | None = None) -> "ModuliSet":
        """Moduli with Q = max(members) by default and delta = min(Q^(-3/2), 1/2) if unset."""
        members = tuple(members)
        Q = float(Q if Q is not None else max(members))
        return cls(members, Q, float(delta if delta is not None else min(Q**-1.5, 0.5)))

    @classmethod
    def up_to(cls, Q: int, delta: float) -> "ModuliSet":
        return cls(tuple(range(1, Q + 1)), float(Q), float(delta))

    @property
    def density(self) -> float:
        """L / Q^2, logged rather than asserted."""
        return self.mass / self.Q**2

    @cached_property
    def _events(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted breakpoints in [0, 1] and the interval count right of each."""
        d = self.delta
        if 2 * self.mass + 2 > MAX_BREAKPOINTS:
            raise BreakpointOverflow(f"{2 * self.mass} breakpoints exceed {MAX_BREAKPOINTS}")
        starts, ends = [], []
        for q in self.members:
            units, _ = units_and_inverses(q)
            c = units / q
            starts.append(c - d)
            ends.append(c + d)
        s = np.concatenate(starts)
        e = np.concatenate(ends)
        # Wrap intervals crossing 0 or 1 into [0, 1).
        pts = np.concatenate([np.mod(s, 1.0), np.mod(e, 1.0)])
        steps = np.concatenate([np.ones(len(s)), -np.ones(len(e))])
        base = int(np.sum(s < 0) + np.sum(e > 1))  # intervals covering x = 0
        order = np.argsort(pts, kind="stable")
        pts, steps = pts[order], steps[order]
        counts = base + np.cumsum(steps)
        return pts, counts

    def i_tilde(self, x) -> np.ndarray:
        return i_tilde(self, x)


def build_product_moduli(P: int, M: int, Q1: float, Q2: float,
                         delta: float | None = None) -> ModuliSet:
    """Members P q1 q2 with q_i prime in [Q_i, 2 Q_i) and coprime to P M."""
    if Q1 < 2 or Q2 < 2:
        raise PreconditionError("need Q1, Q2 >= 2")
    if Q1 < 2 * Q2 and Q2 < 2 * Q1:
        raise PreconditionError(f"ranges [{Q1}, {2 * Q1}) and [{Q2}, {2 * Q2}) overlap")
    bad = {p for p, _ in factorize(P * M)} if P * M > 1 else set()
    lo1, lo2 = int(math.ceil(Q1)), int(math.ceil(Q2))
    Q1s = tuple(p for p in primes_in(lo1, int(math.ceil(2 * Q1))) if p not in bad)
    Q2s = tuple(p for p in primes_in(lo2, int(math.ceil(2 * Q2))) if p not in bad)
    if not Q1s or not Q2s:
        raise EmptyRange(f"no admissible primes in [{Q1}, {2 * Q1}) or [{Q2}, {2 * Q2})")
    Q = 4 * P * Q1 * Q2
    members = tuple(sorted(P * a * b for a in Q1s for b in Q2s))
    if delta is None:
        delta = Q**-1.5
    return ModuliSet(members, float(Q), float(delta), factored=(P, Q1s, Q2s))


def i_tilde(moduli: ModuliSet, x) -> np.ndarray:
    """Kernel value at x (taken mod 1)."""
    pts, counts = moduli._events
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    # Closed intervals: count starts <= x minus ends < x. Boundaries have
    # measure zero, so the right-continuous count is used.
    idx = np.searchsorted(pts, x, side="right") - 1
    base = counts[-1] if len(counts) else 0  # count just below 1 equals count at 0
    c = np.where(idx >= 0, counts[np.clip(idx, 0, None)], base)
    return c / (2 * moduli.delta * moduli.mass)


def _segments(moduli: ModuliSet):
    pts, counts = moduli._events
    edges = np.concatenate([[0.0], pts, [1.0]])
    vals = np.concatenate([[counts[-1]], counts])
    return np.diff(edges), vals / (2 * moduli.delta * moduli.mass)


def kernel_mass(moduli: ModuliSet) -> float:
    """Exact integral of the kernel over [0, 1]; equals 1."""
    lengths, vals = _segments(moduli)
    return float(np.sum(lengths * vals))


def jutila_error_quadrature(moduli: ModuliSet) -> float:
    """int_0^1 |1 - I(x)|^2 dx on the exact breakpoint partition."""
    lengths, vals = _segments(moduli)
    return float(np.sum(lengths * (1.0 - vals) ** 2))


def _fourier_coeffs(moduli: ModuliSet, n: np.ndarray) -> np.ndarray:
    """a(n) = (1/L) sum_q c_q(n) sinc(2 pi n delta)."""
    acc = np.zeros(len(n))
    for q in moduli.members:
        acc += ramanujan_period(q)[np.mod(n, q)]
    arg = 2 * np.pi * moduli.delta * n
    sinc = np.where(n == 0, 1.0, np.sin(arg) / np.where(n == 0, 1, arg))
    return acc * sinc / moduli.mass


def _periodic_sinc2(ell: int, delta: float) -> np.ndarray:
    """G(r) = sum_k sinc^2(2 pi delta (r + k ell)) for r = 0..ell-1, by Poisson."""
    w = 2 * delta * ell
    J = int(math.ceil(w)) - 1
    r = np.arange(ell)
    G = np.full(ell, 1.0 / w)
    for j in range(1, J + 1):
        G += (2.0 / w) * (1 - j / w) * np.cos(2 * np.pi * j * r / ell)
    return G


def jutila_error_parseval(moduli: ModuliSet, n_max: int | None = None) -> float:
    """sum_{n != 0} |a(n)|^2 + |a(0) - 1|^2 from the Fourier side.

    With ``n_max`` the series is summed over |n| <= n_max (see
    :func:`parseval_tail`). Without it the full series is summed exactly:
    a(n)^2 is a finite sum of terms c_q(n) c_q'(n) sinc^2(2 pi delta n), each
    periodic times sinc^2, and the sinc^2 periodization has a finite cosine
    expansion.
    """
    if n_max is not None:
        n = np.arange(-n_max, n_max + 1)
        a = _fourier_coeffs(moduli, n)
        a[n_max] -= 1.0
        return float(np.sum(a * a))
    Lm = moduli.mass
    delta = moduli.delta
    total = 0.0
    qs = moduli.members
    for i, q in enumerate(qs):
        cq = ramanujan_period(q)
        for qp in qs[i:]:
            ell = math.lcm(q, qp)
            r = np.arange(ell)
            prod = cq[r % q] * ramanujan_period(qp)[r % qp]
            s = float(np.dot(prod, _periodic_sinc2(ell, delta)))
            total += s if qp == q else 2 * s
    # sum_n |a(n)|^2 includes a(0)^2 = 1; removing it and adding (a(0) - 1)^2 = 0.
    return total / Lm**2 - 1.0


def parseval_tail(moduli: ModuliSet, n_max: int | None = None) -> float:
    """Estimated mass of |n| > n_max: mean |sum_q c_q(n)|^2 = L, sinc^2 ~ 1/(2 (2 pi n delta)^2)."""
    if n_max is None:
        return 0.0
    return 1.0 / (4 * np.pi**2 * moduli.delta**2 * moduli.mass * n_max)


def jutila_bound(moduli: ModuliSet, constant: float = 10.0, eps: float = 0.1) -> float:
    return constant * moduli.Q ** (2 + eps) / (moduli.delta * moduli.mass**2)


# ---------------------------------------------------------------- S vs S-tilde


def _sequences(src: CoefficientSource, chi: DirichletCharacter, t: float, N: float):
    h = SmoothWindow("h", N)
    hs = SmoothWindow("h_star", N)
    n = h.integer_points()
    src.require(int(n.max()))
    a = src.lam(n) * h.at(n)
    m = hs.integer_points()
    m = m[m > 0]
    b = eval_character(chi, m) * np.exp(-1j * t * np.log(m)) * hs.at(m)
    return n, a, m, b


def s_direct(src: CoefficientSource, chi: DirichletCharacter, t: float, N: float) -> complex:
    """sum lambda(n) chi(n) n^{-it} h(n/N)."""
    h = SmoothWindow("h", N)
    n = h.integer_points()
    src.require(int(n.max()))
    vals = src.lam(n) * eval_character(chi, n) * np.exp(-1j * t * np.log(n)) * h.at(n)
    return complex(vals.sum())


def circle_kernel(moduli: ModuliSet, d: np.ndarray) -> np.ndarray:
    """K(d) = (1/L) sum_q c_q(d) sinc(2 pi delta d); K(0) = 1."""
    return _fourier_coeffs(moduli, np.asarray(d, dtype=np.int64))


def s_tilde(src: CoefficientSource, chi: DirichletCharacter, t: float, N: float,
            moduli: ModuliSet) -> complex:
    """Circle-method version: sum_{n,m} lambda(n) h(n/N) chi(m) m^{-it} h*(m/N) K(n - m)."""
    n, a, m, b = _sequences(src, chi, t, N)
    lo, hi = int(n.min() - m.max()), int(n.max() - m.min())
    d = np.arange(lo, hi + 1)
    K = circle_kernel(moduli, d)
    mat = K[(n[:, None] - m[None, :]) - lo]
    log.debug("circle: Q=%s L/Q^2=%.4f", moduli.Q, moduli.density)
    return complex(a @ mat @ b)


def circle_seed(seed: int):
    """Random (character, t) for one seed of the circle-method ladder."""
    from .characters import enumerate_characters
    rng = np.random.default_rng(seed)
    M = int(rng.choice([1, 3, 5, 7]))
    chars = enumerate_characters(M)
    chi = chars[int(rng.integers(len(chars)))]
    t = float(rng.uniform(-5, 5))
    return chi, t


def circle_error(src: CoefficientSource, chi: DirichletCharacter, t: float, N: float,
                 Q: int) -> float:
    """|S(N) - S~(N)| with all moduli q <= Q and delta = 1/N."""
    moduli = ModuliSet.up_to(Q, 1.0 / N)
    return abs(s_direct(src, chi, t, N) - s_tilde(src, chi, t, N, moduli))


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
