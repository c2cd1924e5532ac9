"""Twisted L-values on the critical line from a smoothed approximate
functional equation.

With gamma(s) = Q^s prod Gamma(a_j s + b_j) and Lambda(s) = gamma(s) L(s),

    Lambda(s) = gamma(s) sum a_n n^-s V_s(n / X)
                + eps gamma~(1 - s) sum a~_n n^-(1-s) V~_{1-s}(n X)

where V_w(y) = (1/2 pi i) int_(c) gamma(w + u)/gamma(w) G(u) y^-u du/u with
G(u) = exp(u^2), a_n = lambda(n) chi(n) and a~_n = conj(lambda(n)) chi-bar(n)
(the dual twist). The root number eps is measured, never assembled from
Gauss sums: the AFE must not depend on X, which pins eps down from two cutoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

from .characters import DirichletCharacter, eval_character, primitive_characters
from .errors import ConfigError, DegeneratePoint, DomainError, InsufficientCoefficients
from .forms import CoefficientSource

CONTOUR = 1.5
V_HALF_WIDTH = 7.0
V_STEP = 0.1
# Dirichlet-series terms are kept while |V| exceeds this.
TRUNC = 1e-8
SPLINE_MIN = 20000
SPLINE_STEP = 2e-3
ROOT_POINT = 0.75
ROOT_POINT_ALT = 0.75 + 0.5j
ROOT_CUTOFFS = (1.0, 1.25)


@dataclass(frozen=True)
class LPoint:
    s: complex
    chi_id: str
    value: complex
    error_estimate: float
    terms_used: int

    @property
    def t(self) -> float:
        return self.s.imag

    @property
    def T(self) -> float:
        return 3 + abs(self.s.imag)


def _chi_id(chi: DirichletCharacter) -> str:
    return f"{chi.modulus}:{chi.index}"


def gamma_params(src: CoefficientSource, chi: DirichletCharacter):
    """(Q, [(a_j, b_j)]) with gamma(s) = Q^s prod Gamma(a_j s + b_j)."""
    M, P = chi.modulus, src.level_P
    if src.is_holomorphic:
        return M * math.sqrt(P) / (2 * math.pi), [(1.0, (src.weight_k - 1) / 2)]
    delta = (src.parity + chi.parity_bit) % 2
    mu = src.spectral_mu
    return M * math.sqrt(P) / math.pi, [(0.5, (delta + 1j * mu) / 2), (0.5, (delta - 1j * mu) / 2)]


def log_gamma_factor(src: CoefficientSource, chi: DirichletCharacter, s) -> np.ndarray:
    Q, facs = gamma_params(src, chi)
    s = np.asarray(s, dtype=np.complex128)
    out = s * math.log(Q)
    for a, b in facs:
        out = out + loggamma(a * s + b)
    return out


def gamma_factor(src: CoefficientSource, chi: DirichletCharacter, s) -> complex:
    return complex(np.exp(log_gamma_factor(src, chi, s)))


def _contour(w: complex) -> float:
    # Keep w + u inside the half-plane of absolute convergence.
    return max(CONTOUR, CONTOUR - w.real)


def _v_rule(src, chi, w: complex, step: float):
    c = _contour(w)
    v = np.arange(-V_HALF_WIDTH, V_HALF_WIDTH + step / 2, step)
    u = c + 1j * v
    logw = log_gamma_factor(src, chi, w)
    R = np.exp(log_gamma_factor(src, chi, w + u) - logw + u * u) / u
    return u, R * step / (2 * math.pi)


def _v_direct(u, R, ly):
    out = np.empty(len(ly), dtype=np.complex128)
    coarse = np.empty(len(ly), dtype=np.complex128)
    for lo in range(0, len(ly), 4096):
        block = np.exp(-np.outer(ly[lo:lo + 4096], u))
        out[lo:lo + 4096] = block @ R
        coarse[lo:lo + 4096] = block[:, ::2] @ (2 * R[::2])
    return out, float(np.max(np.abs(out - coarse))) if len(ly) else 0.0


def v_weight(src, chi, w: complex, y) -> tuple[np.ndarray, float]:
    """V_w(y) on the line Re u = c by the trapezoid rule, with the change
    against the half-density rule as the error estimate.

    Long inputs go through a cubic spline in log y built on exact values at
    step SPLINE_STEP; V is band-limited in log y, so the spline error (checked
    at the grid midpoints and added to the estimate) is ~1e-12.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    ly = np.log(y)
    if len(y) <= SPLINE_MIN:
        u, R = _v_rule(src, chi, w, V_STEP)
        return _v_direct(u, R, ly)
    Q, facs = gamma_params(src, chi)
    # V depends on chi only through the gamma factor, so characters of one
    # parity share the spline.
    spline, err = _v_spline(src, chi, (Q, tuple(facs), complex(w)),
                            math.floor(ly.min()), math.ceil(ly.max()))
    return spline(ly), err


_SPLINES: dict = {}


def _v_spline(src, chi, key, lo: int, hi: int):
    full = key + (lo, hi)
    if full not in _SPLINES:
        if len(_SPLINES) > 256:
            _SPLINES.clear()
        u, R = _v_rule(src, chi, key[2], V_STEP)
        nodes = np.linspace(lo, hi, max(8, int(math.ceil((hi - lo) / SPLINE_STEP)) + 1))
        vals, err = _v_direct(u, R, nodes)
        spline = CubicSpline(nodes, vals)
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        exact_mid, _ = _v_direct(u, R, mid)
        err += float(np.max(np.abs(spline(mid) - exact_mid)))
        _SPLINES[full] = (spline, err)
    return _SPLINES[full]


def v_cutoff(src, chi, w: complex) -> float:
    """Smallest y beyond which |V_w(y)| y^(1/2 - Re w) stays below TRUNC.

    The power accounts for the growth of n^-w when Re w < 1/2 (checked on a
    log grid).
    """
    ys = np.exp(np.arange(-2.0, 40.0, 0.25))
    V, _ = v_weight(src, chi, w, ys)
    big = np.nonzero(np.abs(V) * ys ** max(0.0, 0.5 - w.real) >= TRUNC)[0]
    if len(big) == 0:
        return float(ys[0])
    return float(ys[min(big[-1] + 1, len(ys) - 1)])


def terms_needed(src, chi, s: complex, cutoff_X: float = 1.0) -> int:
    """Coefficient count an AFE evaluation at s needs (twice the cutoffs)."""
    s = complex(s)
    n1 = max(1, int(math.ceil(v_cutoff(src, chi, s) * cutoff_X)))
    n2 = max(1, int(math.ceil(v_cutoff(src, chi.conj(), 1 - s) / cutoff_X)))
    return 2 * max(n1, n2)


ROOT_SHIFTS = (0.0, 0.37, 0.81)


def root_terms_needed(src, chi) -> int:
    """Coefficient count the root number solve may touch, over all retries."""
    return max(terms_needed(src, chi, s0 + 1j * sh, X)
               for s0 in (ROOT_POINT, ROOT_POINT_ALT) for sh in ROOT_SHIFTS for X in ROOT_CUTOFFS)


def _series(src, chi, w, X, dual: bool):
    """sum a_n n^-w V_w(n/X) over n <= cutoff, plus error parts."""
    ch = chi.conj() if dual else chi
    ycut = v_cutoff(src, ch, w)
    ncut = max(1, int(math.ceil(ycut * X)))
    if 2 * ncut > src.n_max:
        raise InsufficientCoefficients(f"AFE needs lambda(n) up to {2 * ncut}, have {src.n_max}")
    n = np.arange(1, 2 * ncut + 1, dtype=np.int64)
    lam = src.lam(n)
    if dual:
        lam = np.conj(lam)
    a = lam * eval_character(ch, n) * np.exp(-w * np.log(n))
    V, qerr = v_weight(src, ch, w, n / X)
    terms = a * V
    head = terms[:ncut]
    total = complex(head.sum())
    trunc = float(np.abs(terms[ncut:]).sum())
    quad = qerr * float(np.abs(a[:ncut]).sum())
    return total, trunc + quad, ncut


@dataclass(frozen=True)
class _AfeParts:
    P: complex  # gamma(s) * first sum
    Qd: complex  # gamma~(1-s) * dual sum
    errP: float
    errQ: float
    terms: int
    log_gamma: complex


def _afe_parts(src, chi, s: complex, X: float) -> _AfeParts:
    if not -1.0 <= s.real <= 2.0:
        raise DomainError("need Re(s) in [-1, 2]")
    F, eF, n1 = _series(src, chi, s, X, dual=False)
    Fd, eFd, n2 = _series(src, chi, 1 - s, 1.0 / X, dual=True)
    lg = complex(log_gamma_factor(src, chi, s))
    lgd = complex(log_gamma_factor(src, chi.conj(), 1 - s))
    # Work relative to |gamma(s)| so large |t| does not underflow.
    g, gd = 1.0, complex(np.exp(lgd - lg))
    return _AfeParts(g * F, gd * Fd, eF, abs(gd) * eFd, max(n1, n2), lg)


@dataclass(frozen=True)
class RootNumber:
    value: complex
    alt_value: complex
    s0: complex
    s0_alt: complex

    @property
    def modulus_error(self) -> float:
        return abs(abs(self.value) - 1)

    @property
    def cross_check(self) -> float:
        return abs(self.value - self.alt_value)


def _solve_eps(src, chi, s0: complex) -> complex:
    X1, X2 = ROOT_CUTOFFS
    a = _afe_parts(src, chi, s0, X1)
    b = _afe_parts(src, chi, s0, X2)
    den = a.Qd - b.Qd
    if abs(den) < 1e-12 * max(abs(a.Qd), abs(b.Qd), 1e-300):
        raise DegeneratePoint(f"cutoff change does not move the dual part at s = {s0}")
    return (b.P - a.P) / den


_ROOT_CACHE: dict = {}


def root_number_estimate(src: CoefficientSource, chi: DirichletCharacter) -> RootNumber:
    """Measure eps(f x chi) from cutoff invariance at two test points."""
    if not chi.is_primitive:
        from .errors import NotPrimitive
        raise NotPrimitive("root numbers are defined for primitive characters")
    key = (id(src), src.n_max, chi.modulus, chi.exponents)
    if key in _ROOT_CACHE:
        return _ROOT_CACHE[key]
    s0, s1 = complex(ROOT_POINT), complex(ROOT_POINT_ALT)
    for shift in ROOT_SHIFTS:
        try:
            e0 = _solve_eps(src, chi, s0 + 1j * shift)
            e1 = _solve_eps(src, chi, s1 + 1j * shift)
        except DegeneratePoint:
            continue
        res = RootNumber(complex(e0), complex(e1), s0 + 1j * shift, s1 + 1j * shift)
        _ROOT_CACHE[key] = res
        return res
    raise DegeneratePoint("no usable test point for the root number")


def afe_value(src: CoefficientSource, chi: DirichletCharacter, s, cutoff_X: float = 1.0,
              eps: complex | None = None) -> LPoint:
    """L(s, f x chi) with its error estimate."""
    s = complex(s)
    if eps is None:
        eps = root_number_estimate(src, chi).value
    parts = _afe_parts(src, chi, s, cutoff_X)
    value = parts.P + eps * parts.Qd
    err = parts.errP + abs(eps) * parts.errQ
    return LPoint(s, _chi_id(chi), complex(value), float(err), parts.terms)


def completed_lambda(src: CoefficientSource, chi: DirichletCharacter, s, cutoff_X: float = 1.0,
                     eps: complex | None = None) -> tuple[complex, float]:
    """(Lambda(s, f x chi), error estimate)."""
    pt = afe_value(src, chi, s, cutoff_X, eps)
    g = gamma_factor(src, chi, s)
    return g * pt.value, abs(g) * pt.error_estimate


def functional_equation_residual(src, chi, t: float, cutoffs=(1.3, 1.0)):
    """|Lambda(1/2+it, chi) - eps Lambda(1/2-it, chi-bar)| and the error budget.

    The two sides use different cutoffs so the comparison is not an
    algebraic identity of the AFE.
    """
    rn = root_number_estimate(src, chi)
    eps = rn.value
    s = complex(0.5, t)
    lhs, e1 = completed_lambda(src, chi, s, cutoffs[0], eps)
    rhs, e2 = completed_lambda(src, chi.conj(), 1 - s, cutoffs[1], 1 / eps)
    # Uncertainty of eps propagates through the dual part.
    budget = e1 + e2 + rn.cross_check * abs(rhs)
    return abs(lhs - eps * rhs), budget, lhs, rhs, eps


# ---------------------------------------------------------------- scans


@dataclass(frozen=True)
class ScanConfig:
    M_range: tuple[int, ...]
    t_range: tuple[float, ...] = (0.0,)
    eta: float = 0.05
    N: float | None = None  # defaults to M T

    def __post_init__(self):
        if not 0 <= self.eta < 1 / 18:
            raise ConfigError(f"eta = {self.eta} is not admissible (need 0 <= eta < 1/18)")
        if not self.M_range or not self.t_range:
            raise ConfigError("empty scan grid")
        for M, t in self.grid():
            lo, hi = (M * (3 + abs(t))) ** (2 * self.eta), (M * (3 + abs(t))) ** (0.25 - self.eta / 2)
            q1 = self.Q1(M, t)
            if not lo < q1 < hi:
                raise ConfigError(f"Q1 = {q1:.4g} outside ({lo:.4g}, {hi:.4g}) at M={M}, t={t}")

    def grid(self):
        return [(M, t) for M in self.M_range for t in self.t_range]

    def _N(self, M, t):
        return self.N if self.N is not None else M * (3 + abs(t))

    def Q(self, M: int, t: float) -> float:
        MT = M * (3 + abs(t))
        return self._N(M, t) * MT ** (self.eta - 0.5)

    def Q1(self, M: int, t: float) -> float:
        MT = M * (3 + abs(t))
        return MT ** (7 / 6) / (self._N(M, t) * MT**self.eta)

    def Q2(self, M: int, t: float) -> float:
        return self.Q(M, t) / self.Q1(M, t)


SCAN_COLUMNS = ("M", "t", "chi_index", "re_L", "im_L", "abs_L", "convexity_ref", "ratio", "err_est")


def scan_point(src, M: int, t: float) -> list[dict]:
    rows = []
    T = 3 + abs(t)
    ref = math.sqrt(M * T)
    for chi in primitive_characters(M):
        pt = afe_value(src, chi, complex(0.5, t))
        rows.append({
            "M": M, "t": float(t), "chi_index": chi.index,
            "re_L": pt.value.real, "im_L": pt.value.imag, "abs_L": abs(pt.value),
            "convexity_ref": ref, "ratio": abs(pt.value) / ref, "err_est": pt.error_estimate,
        })
    return rows


@dataclass
class ScanResult:
    rows: list[dict] = field(default_factory=list)
    slope: float = float("nan")


def scan_slope(rows: list[dict]) -> float:
    """Least-squares slope of log max|L| against log(MT).

    Grid points whose largest value is within ten error estimates of zero
    (forced central zeros, e.g. a sole quadratic character with root number
    -1) carry no size information and are left out of the fit.
    """
    best: dict = {}
    for r in rows:
        key = (r["M"], r["t"])
        if key not in best or r["abs_L"] > best[key][0]:
            best[key] = (r["abs_L"], r["err_est"])
    best = {k: v for k, (v, err) in best.items() if v > 10 * err}
    if len(best) < 2:
        return float("nan")
    x = np.log([M * (3 + abs(t)) for M, t in best])
    y = np.log([max(v, 1e-300) for v in best.values()])
    return float(np.polyfit(x, y, 1)[0])


def exponent_scan(src: CoefficientSource, cfg: ScanConfig, mapper=map) -> ScanResult:
    """max over primitive chi of |L(1/2 + it)| across the grid.

    ``mapper`` lets a caller fan grid points out to a pool; it must preserve
    order.
    """
    grid = [(M, t) for M, t in cfg.grid() if primitive_characters(M)]
    chunks = list(mapper(lambda mt: scan_point(src, *mt), grid))
    rows = [r for chunk in chunks for r in chunk]
    return ScanResult(rows, scan_slope(rows))

