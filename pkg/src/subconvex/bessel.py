"""Bessel kernels and the two oscillatory transforms used by the dual sums.

Kernels
    J_{k-1}(u) for holomorphic forms; K_{2i mu}(u) and
    Y_{2i mu}(u) + Y_{-2i mu}(u) for Maass forms.

Transforms
    ``voronoi_weight``   V(y) = const * int v(u) kernel(4 pi sqrt(u y)) du
    ``h_star_transform`` H*(m; q) = int h*(y) y^{-it} e(-x y N) e(-m N y / (M q)) dy
                         and its rescaled companion H#(m; q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .errors import DomainError, PreconditionError, QuadratureFailure
from .quadrature import MAX_PERIODS, ORDER, apply_rule, integrate, panels_for, probe_rows
from .windows import SmoothWindow

# Beyond this many nats of cancellation the real integral representations
# lose too many digits in double precision and mpmath takes over.
_CANCELLATION_LIMIT = 11.5
# Complex entries per quadrature batch of h* transforms (about 32 MB).
_BATCH_ELEMENTS = 2**21
# Maass kernel tables: batches above TABLE_MIN points are interpolated from
# nodes spaced TABLE_STEP in the phase variable, accurate to TABLE_TOL and
# built lazily in chunks of CHUNK_WIDTH.
TABLE_MIN = 64
TABLE_STEP = 0.05
TABLE_TOL = 1e-10
CHUNK_WIDTH = 16.0


@dataclass(frozen=True)
class VoronoiKernelSpec:
    kind: str  # "holomorphic_J", "maass_K" or "maass_Y"
    order_param: float

    def __post_init__(self):
        if self.kind == "holomorphic_J":
            if self.order_param != int(self.order_param) or self.order_param < 11:
                raise PreconditionError("holomorphic kernel needs integer order >= 11")
        elif self.kind in ("maass_K", "maass_Y"):
            if not math.isfinite(self.order_param):
                raise PreconditionError("Maass kernel needs finite mu")
        else:
            raise PreconditionError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def holomorphic(cls, k: int):
        return cls("holomorphic_J", k - 1)

    @classmethod
    def maass(cls, mu: float, sign: str):
        return cls("maass_K" if sign == "+" else "maass_Y", 2.0 * mu)


def _octaves(u: np.ndarray):
    """Index groups of ``u`` lying in the same power-of-two octave."""
    key = np.floor(np.log2(u)).astype(int)
    for k in np.unique(key):
        yield np.nonzero(key == k)[0]


def _rows_per_batch(nodes: int) -> int:
    return max(1, _BATCH_ELEMENTS // max(nodes, 1))


def _batched(f_of_rows, u, periods, a, b, atol):
    """Integrate f_of_rows(rows)(t) for row chunks sized to the memory budget."""
    out = np.empty(len(u))
    step = _rows_per_batch(4 * ORDER * panels_for(periods))
    for s in range(0, len(u), step):
        rows = slice(s, s + step)
        out[rows], _ = integrate(f_of_rows(u[rows]), a, b, periods=periods, rtol=1e-13,
                                 atol=atol)
    return out


def _k_imag_integral(beta: float, u: np.ndarray) -> np.ndarray:
    """K_{i beta}(u) = int_0^inf exp(-u cosh t) cos(beta t) dt."""
    out = np.empty_like(u)
    for idx in _octaves(u):
        ug = u[idx]
        tmax = math.acosh(1.0 + 42.0 / ug.min())
        # The bump exp(-u (cosh t - 1)) has width about 1/sqrt(u).
        periods = beta * tmax / (2 * math.pi) + tmax * math.sqrt(ug.max()) + 1

        def f_rows(ur):
            def f(t):
                return np.exp(-ur[:, None] * (np.cosh(t) - 1.0)[None, :]) * np.cos(beta * t)
            return f
        # The integrand is at most 1, so 1e-15 absolute is round-off level.
        out[idx] = _batched(f_rows, ug, periods, 0.0, tmax, 1e-15) * np.exp(-ug)
    return out


def _y_imag_sum_integral(beta: float, u: np.ndarray) -> np.ndarray:
    """Y_{i beta}(u) + Y_{-i beta}(u) from Schlafli's integrals.

    (2/pi) int_0^pi sin(u sin th) cosh(beta th) dth
      - (2/pi) (1 + cosh(beta pi)) int_0^inf cos(beta t) exp(-u sinh t) dt
    """
    out = np.empty_like(u)
    for idx in _octaves(u):
        ug = u[idx]

        def f1_rows(ur):
            def f(th):
                return np.sin(ur[:, None] * np.sin(th)[None, :]) * np.cosh(beta * th)
            return f
        a = _batched(f1_rows, ug, (ug.max() + beta) / 2 + 1, 0.0, math.pi,
                     1e-16 * math.cosh(beta * math.pi))
        tmax = math.asinh(40.0 / ug.min())

        def f2_rows(ur):
            def f(t):
                return np.cos(beta * t) * np.exp(-ur[:, None] * np.sinh(t)[None, :])
            return f
        b = _batched(f2_rows, ug, beta * tmax / (2 * math.pi) + 1, 0.0, tmax, 1e-15)
        out[idx] = (2 / math.pi) * (a - (1 + math.cosh(beta * math.pi)) * b)
    return out


def bessel_j_int(order: int, x: np.ndarray) -> np.ndarray:
    """J_order(x) for integer order.

    Upward recurrence from J_0, J_1 where x exceeds the order (the stable
    direction); scipy's general-order routine below that.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    big = x >= order + 9
    if np.any(big):
        xb = x[big]
        prev, cur = special.j0(xb), special.j1(xb)
        for n in range(1, order):
            prev, cur = cur, (2 * n / xb) * cur - prev
        out[big] = cur if order >= 1 else prev
    if np.any(~big):
        out[~big] = special.jv(order, x[~big])
    return out


def _mp_k(beta, u):
    return np.array([float(mpmath.besselk(1j * beta, x).real) for x in u])


def _mp_y(beta, u):
    # Y_{ib} + Y_{-ib} = 2 coth(pi b / 2) Im J_{ib} on the positive axis, since
    # J_{-ib} is the conjugate of J_{ib} there; one call instead of two.
    if beta == 0:
        return np.array([float(2 * mpmath.bessely(0, x)) for x in u])
    c = 2 * mpmath.coth(math.pi * beta / 2)
    return np.array([float(c * mpmath.besselj(1j * beta, x).imag) for x in u])


def _hankel_min(beta: float) -> float:
    """Smallest u where the Hankel expansion of Y_{ib} + Y_{-ib} is used."""
    return 60.0 + 2.0 * beta * beta


def _y_sum_hankel_scaled(beta: float, u: np.ndarray) -> np.ndarray:
    """exp(-pi b/2) (Y_{ib}(u) + Y_{-ib}(u)) from the Hankel expansion.

    With nu = ib the coefficients are real and the sum collapses to
    (1 + e^{-pi b}) sqrt(2/(pi u)) (P sin A + Q cos A), A = u - pi/4.
    """
    P = np.ones_like(u)
    Qs = np.zeros_like(u)
    term = np.ones_like(u)
    four_nu2 = -4.0 * beta * beta
    for k in range(1, 80):
        term = term * (four_nu2 - (2 * k - 1) ** 2) / (8.0 * k * u)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            Qs += sign * term
        else:
            P += sign * term
        if np.max(np.abs(term)) < 1e-17:
            break
    else:
        raise QuadratureFailure("Hankel expansion did not converge")
    A = u - math.pi / 4
    return (1 + math.exp(-math.pi * beta)) * np.sqrt(2 / (math.pi * u)) * (P * np.sin(A) + Qs * np.cos(A))


def _maass_exact(kind: str, beta: float, arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    if kind == "maass_K":
        # K_{ib}(u) <= K_0(u) < 1e-320 beyond u = 745.
        live = arr <= 745.0
        bad = live & (math.pi * beta / 2 - arr > _CANCELLATION_LIMIT)
        good = live & ~bad
        if np.any(good):
            out[good] = _k_imag_integral(beta, arr[good])
        if np.any(bad):
            out[bad] = _mp_k(beta, arr[bad])
        return out
    far = arr >= _hankel_min(beta)
    if np.any(far):
        out[far] = _y_sum_hankel_scaled(beta, arr[far]) / _maass_scale(kind, beta)
    near = ~far
    if np.any(near):
        if math.pi * beta / 2 > _CANCELLATION_LIMIT:
            out[near] = _mp_y(beta, arr[near])
        else:
            out[near] = _y_imag_sum_integral(beta, arr[near])
    return out


def _maass_scale(kind: str, beta: float) -> float:
    """Factor that brings the kernel to unit size: K is O(e^{-pi beta/2}), Y O(e^{pi beta/2})."""
    return math.exp(math.pi * beta / 2) if kind == "maass_K" else math.exp(-math.pi * beta / 2)


def _phase_var(u, b: float):
    """w = sqrt(u^2 + b^2) - b asinh(b/u): about b log u for small u, u for large u."""
    u = np.asarray(u, dtype=np.float64)
    return np.sqrt(u * u + b * b) - b * np.arcsinh(b / u)


def _phase_inverse(w, b: float):
    # Newton in log u; w is increasing and convex in log u.
    w = np.asarray(w, dtype=np.float64)
    v = np.where(w < 0, math.log(b) + w / b, np.log(np.maximum(w, 0) + b))
    for _ in range(60):
        u = np.exp(v)
        dv = (_phase_var(u, b) - w) / np.sqrt(u * u + b * b)
        v = v - dv
        if np.max(np.abs(dv)) < 1e-15:
            break
    return np.exp(v)


_LAGRANGE_OFFSETS = np.arange(-3, 5)
# Maps 8 node values at offsets -3..4 to monomial coefficients in t.
_TO_MONOMIAL = np.linalg.inv(np.vander(_LAGRANGE_OFFSETS.astype(float), increasing=True))


def _interpolate(vals: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Values at fractional node positions ``pos`` (3 <= pos < len(vals) - 4).

    Degree-7 interpolation through the 8 nearest nodes, with per-cell
    monomial coefficients evaluated by Horner's rule.
    """
    coef = np.lib.stride_tricks.sliding_window_view(vals, 8) @ _TO_MONOMIAL.T
    j0 = np.floor(pos).astype(np.int64)
    t = pos - j0
    c = coef[j0 - 3]
    out = c[:, 7].copy()
    for k in range(6, -1, -1):
        out *= t
        out += c[:, k]
    return out


_CHUNK_NODES = int(round(CHUNK_WIDTH / TABLE_STEP))
_CHUNKS: dict = {}


def _chunk(kind: str, beta: float, k: int) -> np.ndarray:
    """Scaled kernel at w = (k * CHUNK_NODES + j) * TABLE_STEP, j < CHUNK_NODES.

    Each chunk is checked at interior midpoints against direct evaluation.
    """
    key = (kind, beta, k)
    vals = _CHUNKS.get(key)
    if vals is not None:
        return vals
    b = max(beta, 1.0)
    scale = _maass_scale(kind, beta)
    w = (k * _CHUNK_NODES + np.arange(_CHUNK_NODES)) * TABLE_STEP
    vals = _maass_exact(kind, beta, _phase_inverse(w, b)) * scale
    pos = np.arange(3, _CHUNK_NODES - 5, 8) + 0.5
    exact = _maass_exact(kind, beta, _phase_inverse(w[0] + pos * TABLE_STEP, b)) * scale
    err = float(np.max(np.abs(_interpolate(vals, pos) - exact)))
    if err > TABLE_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise QuadratureFailure(f"kernel table for beta={beta} misses {TABLE_TOL} (error {err:.3g})")
    if len(_CHUNKS) > 4096:
        _CHUNKS.clear()
    _CHUNKS[key] = vals
    return vals


def _tabulated(kind: str, beta: float, u: np.ndarray) -> np.ndarray:
    """Kernel by 8-point interpolation on a uniform grid in the phase variable.

    w = sqrt(u^2 + b^2) - b asinh(b/u) with b = max(beta, 1) is about b log u for
    small u and u for large u, so one unit of w is at most 1/(2 pi) of an
    oscillation everywhere. Nodes are computed lazily in cached chunks.
    """
    pos = _phase_var(u, max(beta, 1.0)) / TABLE_STEP
    k0 = int(math.floor((float(pos.min()) - 4) / _CHUNK_NODES))
    k1 = int(math.floor((float(pos.max()) + 5) / _CHUNK_NODES))
    vals = np.concatenate([_chunk(kind, beta, k) for k in range(k0, k1 + 1)])
    return _interpolate(vals, pos - k0 * _CHUNK_NODES) / _maass_scale(kind, beta)


def kernel_eval(spec: VoronoiKernelSpec, u):
    """Evaluate the kernel at positive ``u`` (scalar or array); always real.

    Large Maass batches go through a cached table checked to TABLE_TOL at
    interval midpoints; small ones are evaluated directly.
    """
    arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(arr <= 0):
        raise DomainError("Bessel kernels are evaluated at u > 0 only")
    if spec.kind == "holomorphic_J":
        out = bessel_j_int(int(spec.order_param), arr)
    else:
        beta = abs(spec.order_param)
        flat = arr.ravel()
        if flat.size > TABLE_MIN:
            out = _tabulated(spec.kind, beta, flat)
        else:
            out = _maass_exact(spec.kind, beta, flat)
        out = out.reshape(arr.shape)
    return float(out.ravel()[0]) if np.ndim(u) == 0 else out


def voronoi_constant(src_kind: str, sign: str, weight_k: int | None = None,
                     mu: float | None = None) -> complex:
    """Constant in front of the kernel integral for V^sign."""
    if src_kind == "holomorphic":
        return 2 * math.pi * (1j ** weight_k) if sign == "-" else 0.0
    if sign == "-":
        return -math.pi / math.cosh(math.pi * mu)
    return 4 * math.cosh(math.pi * mu)


def voronoi_weight(src, window: SmoothWindow, y, x: float = 0.0, sign: str = "-",
                   rtol: float = 1e-11):
    """V^sign_x(y) for the weight v_x(u) = window.at(u) e(x u).

    ``src`` is a :class:`~subconvex.forms.CoefficientSource` (only its kind,
    weight and spectral parameter are used). Returns ``(values, quad_error)``.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    Y = window.scale
    if window.kind != "h":
        raise PreconditionError("Voronoi weights are built on the h window")
    if abs(x) * Y > 1 + 1e-12:
        raise PreconditionError("need |x| <= 1/N")
    const = voronoi_constant(src.kind, sign, src.weight_k, src.spectral_mu)
    if const == 0:
        return np.zeros(len(y), dtype=np.complex128), 0.0
    if src.is_holomorphic:
        spec = VoronoiKernelSpec.holomorphic(src.weight_k)
    else:
        spec = VoronoiKernelSpec.maass(src.spectral_mu, sign)
    a, b = window.support
    root = np.sqrt(Y * y)

    def make(rows):
        r = root[rows][:, None]

        def f(s):
            arg = 4 * math.pi * r * np.sqrt(s)[None, :]
            prof = window(s) * np.exp(2j * math.pi * x * Y * s)
            mask = prof != 0
            vals = np.zeros(arg.shape, dtype=np.complex128)
            vals[:, mask] = kernel_eval(spec, arg[:, mask]) * prof[mask][None, :]
            return vals
        return f

    periods = 2 * float(root.max()) * (math.sqrt(b) - math.sqrt(a)) + abs(x) * Y * (b - a) + 1
    probe = probe_rows(y)
    atol = 1e-15
    if not src.is_holomorphic:
        # Tabulated Maass kernels are good to TABLE_TOL in scaled units.
        atol = 10 * TABLE_TOL * (b - a) / _maass_scale(spec.kind, abs(spec.order_param))
    _, err, panels = integrate(make(probe), a, b, periods=periods, rtol=rtol, atol=atol,
                               start_panels=max(8, panels_for(periods) // 4), with_panels=True)
    step = _rows_per_batch(ORDER * panels)
    vals = np.concatenate([apply_rule(make(slice(s, s + step)), a, b, panels)
                           for s in range(0, len(y), step)])
    return const * Y * vals, float(err * abs(const) * Y)


@dataclass(frozen=True)
class HTransform:
    h_star: np.ndarray
    h_sharp: np.ndarray
    truncated: np.ndarray  # True where the phase exceeded the period budget
    quad_error: float


def h_star_values(m, q: int, M: int, t: float, x: float, N: float,
                  window: SmoothWindow | None = None, rtol: float = 1e-12):
    """H*_x(m; q) for a real or integer array ``m`` (vectorised).

    Entries whose phase runs through more than ``MAX_PERIODS`` periods are
    set to zero and flagged; the window's Fourier decay makes them
    negligible long before that.
    """
    window = window or SmoothWindow("h_star", N)
    m = np.atleast_1d(np.asarray(m, dtype=np.float64))
    a, b = window.support
    freq = x * N + m * N / (M * q)
    periods_each = np.abs(freq) * (b - a) + abs(t) * math.log(b / a) / (2 * math.pi) + 1
    truncated = periods_each > MAX_PERIODS
    out = np.zeros(len(m), dtype=np.complex128)
    err = 0.0
    keep = ~truncated
    if np.any(keep):
        fk = freq[keep]
        # Batch by frequency band so low-frequency entries get a light rule,
        # with batch rows times rule nodes held under a fixed budget.
        order = np.argsort(np.abs(fk))
        pk = periods_each[keep]
        vals = np.empty(len(fk), dtype=np.complex128)
        chunks, start = [], 0
        while start < len(order):
            nodes = 4 * ORDER * panels_for(float(pk[order[min(len(order) - 1, start + 255)]]))
            rows = int(min(256, max(1, _BATCH_ELEMENTS // nodes)))
            chunks.append(order[start:start + rows])
            start += rows
        for chunk in chunks:
            fc = fk[chunk]
            periods = float(np.max(pk[chunk]))

            def f(y, fc=fc):
                base = window(y) * np.exp(-1j * t * np.log(y))
                return base[None, :] * np.exp(-2j * math.pi * fc[:, None] * y[None, :])

            v, e = integrate(f, a, b, periods=periods, rtol=rtol, atol=1e-14)
            vals[chunk] = v
            err = max(err, e)
        out[keep] = vals
    return out, truncated, err


def h_sharp_from_star(h_star, m, q: int, M: int, t: float, N: float):
    """H#(m; q) = (|m| N / (M q))^{1 - it} H*(m; q)."""
    m = np.asarray(m, dtype=np.float64)
    scale = np.abs(m) * N / (M * q)
    return scale ** (1 - 1j * t) * h_star


def h_sharp_direct(m: float, q: int, M: int, t: float, x: float, N: float,
                   window: SmoothWindow | None = None, rtol: float = 1e-12) -> complex:
    """H#_x(m; q) = int h*(M q y / (m N)) e(-M q x y / m) |y|^{-it} e(-y) dy, by quadrature in y."""
    window = window or SmoothWindow("h_star", N)
    if m == 0:
        raise PreconditionError("H# is defined for m != 0")
    s = m * N / (M * q)
    a, b = sorted((window.support[0] * s, window.support[1] * s))
    periods = (b - a) * (1 + abs(M * q * x / m)) + abs(t) * abs(math.log(b / a)) / (2 * math.pi) + 1

    def f(y):
        return (window(M * q * y / (m * N)) * np.exp(-2j * math.pi * M * q * x * y / m)
                * np.exp(-1j * t * np.log(np.abs(y))) * np.exp(-2j * math.pi * y))

    val, _ = integrate(f, a, b, periods=periods, rtol=rtol, atol=1e-14 * abs(b - a))
    return complex(val)


def h_star_transform(window: SmoothWindow, m, q: int, M: int, t: float, x: float) -> HTransform:
    """H* and H# at nonzero integers ``m``; ``window`` is h* dilated by N."""
    if window.kind != "h_star":
        raise PreconditionError("H* is built on the h* window")
    N = window.scale
    if abs(x) * N > 1 + 1e-12:
        raise PreconditionError("need |x| <= 1/N")
    m = np.atleast_1d(np.asarray(m, dtype=np.float64))
    if np.any(m == 0):
        raise PreconditionError("m must be nonzero")
    hs, trunc, err = h_star_values(m, q, M, t, x, N, window)
    sharp = np.array([h_sharp_direct(float(mi), q, M, t, x, N, window) if not tr else 0j
                      for mi, tr in zip(m, trunc)])
    return HTransform(hs, sharp, trunc, err)


def recompose_h_star(h_sharp, m, q: int, M: int, t: float, N: float):
    """(|m|^{it} / |m|) (M q / N)^{1 - it} H#, which equals H*."""
    m = np.asarray(m, dtype=np.float64)
    am = np.abs(m)
    return am ** (1j * t) / am * (M * q / N) ** (1 - 1j * t) * h_sharp
