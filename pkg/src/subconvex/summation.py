"""Two-sided numerical checks of the exact transformation identities.

Each check evaluates a finite "direct" side exactly and a "dual" side built
from Bessel or Fourier transforms. Dual sums start at the effective support
suggested by the asymptotics (epsilon frozen at 0.1, safety factor 10) and
are extended by doubling until the absolute sum over the next block of
dropped terms is small; that block sum is reported as the truncation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .arith import e_frac, kloosterman_row, mod_inverse, units_and_inverses
from .bessel import h_sharp_from_star, h_star_values, voronoi_weight
from .characters import DirichletCharacter, epsilon_sign, eval_character
from .circle import ModuliSet
from .errors import IncompatibleModuli, InsufficientCoefficients, NotPrimitive, PreconditionError
from .forms import CoefficientSource
from .quadrature import apply_rule, integrate, panels_for
from .report import IdentityCheck
from .windows import SmoothWindow

EPS = 0.1
SAFETY = 10.0
# Extend a dual sum until the next block is below this fraction of the tolerance.
TAIL_FRACTION = 0.05
MAX_DOUBLINGS = 12
# Transform values below this (relative to their natural unit) are quadrature
# round-off; once a whole block sits there, doubling again cannot help.
NOISE = 1e-14


def _grow(block_sum, R0: int, limit: int, target_fn, floor: float = 0.0):
    """Double the cutoff from R0 until the block (R, 2R] is below target.

    ``block_sum(lo, hi)`` returns ``(sum, abs_sum, max_abs)`` over
    lo < n <= hi; ``target_fn(partial)`` gives the acceptable absolute tail.
    Growth also stops once every term of the next block is below ``floor``.
    Returns ``(total_up_to_R, tail_bound, R)``.
    """
    R = max(1, int(math.ceil(R0)))
    R = min(R, max(1, limit // 2))
    total = block_sum(0, R)[0]
    for _ in range(MAX_DOUBLINGS):
        hi = min(2 * R, limit)
        nxt, tail, peak = block_sum(R, hi)
        if hi == limit or tail <= target_fn(total) or peak <= floor:
            return total, tail, R
        total = total + nxt
        R = hi
    return total, tail, R


# ---------------------------------------------------------------- Voronoi


def voronoi_dual_block(src: CoefficientSource, a: int, q: int, window: SmoothWindow,
                       x: float, lo: int, hi: int):
    """(1/q) psi-bar(a) sum_{+-} sum_{lo<n<=hi} lambda(-+n) e_q(+-abar n) V^+-(n/q^2)."""
    n = np.arange(lo + 1, hi + 1, dtype=np.int64)
    if len(n) == 0:
        return 0j, 0.0, 0.0
    abar = mod_inverse(a, q)
    psi = np.conj(eval_character(src.nebentypus, a))
    total, absum, peak = 0j, 0.0, 0.0
    for sign, s in (("-", -1), ("+", 1)):
        V, _ = voronoi_weight(src, window, n / q**2, x=x, sign=sign)
        if not np.any(V):
            continue
        coeff = src.lam_signed(-s * n)
        terms = coeff * e_frac(s * abar * n, q) * V / q
        total += complex(terms.sum())
        absum += float(np.abs(terms).sum())
        peak = max(peak, float(np.abs(V).max()))
    return psi * total, absum, peak


def voronoi_check(src: CoefficientSource, a: int, q: int, window: SmoothWindow,
                  x: float = 0.0, tolerance: float = 1e-6) -> IdentityCheck:
    """sum lambda(n) e_q(an) v(n) against its Voronoi dual, v = h(n/Y) e(xn)."""
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd({a}, {q}) > 1")
    if window.kind != "h":
        raise PreconditionError("the Voronoi check uses the h window")
    Y = window.scale
    if Y * q > 1e5:
        raise PreconditionError("need Y q <= 1e5")
    if q % src.level_P:
        raise IncompatibleModuli(f"level {src.level_P} does not divide q = {q}")
    n = window.integer_points()
    src.require(int(n.max()))
    lhs = complex(np.sum(src.lam(n) * e_frac(a * n, q) * window.at(n) * np.exp(2j * np.pi * x * n)))
    nominal_R = SAFETY * q**2 * (q * Y) ** EPS / Y

    def block(lo, hi):
        return voronoi_dual_block(src, a, q, window, x, lo, hi)

    target = lambda partial: TAIL_FRACTION * tolerance * max(abs(lhs), abs(partial))
    floor = NOISE * 2 * math.pi * Y
    rhs, tail, R = _grow(block, nominal_R, src.n_max, target, floor)
    return IdentityCheck(
        lhs, complex(rhs), tail, tolerance, "voronoi-summation",
        params={"a": a, "q": q, "Y": Y, "x": x},
        extra={"nominal_cutoff": nominal_R, "cutoff": R},
    )


# ---------------------------------------------------------------- Poisson


def twisted_poisson_lhs(chi: DirichletCharacter, q: int, a: int, t: float, x: float,
                        window: SmoothWindow) -> complex:
    m = window.integer_points()
    m = m[m > 0]
    vals = (eval_character(chi, m) * np.exp(-1j * t * np.log(m)) * e_frac(-a * m, q)
            * window.at(m) * np.exp(-2j * np.pi * x * m))
    return complex(vals.sum())


def _h_star_block(chi, q, a, t, x, window, lo, hi):
    """Sum over lo < |m| <= hi (m = 0 included when lo < 0), m = M a mod q."""
    M = chi.modulus
    N = window.scale
    r = (M * a) % q
    ms = []
    if lo < 0:
        if r == 0:
            ms.append(np.array([0]))
        lo = 0
    first = lo + 1 + ((r - (lo + 1)) % q)
    pos = np.arange(first, hi + 1, q, dtype=np.int64)
    firstn = lo + 1 + ((-r - (lo + 1)) % q)
    neg = -np.arange(firstn, hi + 1, q, dtype=np.int64)
    ms = np.concatenate(ms + [pos, neg]).astype(np.int64)
    if len(ms) == 0:
        return 0j, 0.0, 0.0
    hs, _, _ = h_star_values(ms, q, M, t, x, N, window)
    terms = np.conj(eval_character(chi, ms)) * hs
    return complex(terms.sum()), float(np.abs(terms).sum()), float(np.abs(hs).max())


def poisson_twist_check(chi: DirichletCharacter, q: int, a: int, t: float, x: float,
                        window: SmoothWindow, tolerance: float = 1e-5) -> IdentityCheck:
    """sum chi(m) m^{-it} e_q(-am) h*(m/N) e(-xm) against its Poisson dual."""
    M = chi.modulus
    N = window.scale
    if math.gcd(q, M) != 1:
        raise PreconditionError(f"q = {q} must be coprime to M = {M}")
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd({a}, {q}) > 1")
    if not chi.is_primitive:
        raise NotPrimitive("the Poisson dual needs a primitive character")
    if M * q > 1e4 or N > 1e5 or abs(x) * N > 1 + 1e-12:
        raise PreconditionError("need M q <= 1e4, N <= 1e5, |x| <= 1/N")
    if window.kind != "h_star":
        raise PreconditionError("the Poisson check uses the h* window")
    lhs = twisted_poisson_lhs(chi, q, a, t, x, window)
    T = 3 + abs(t)
    pref = N ** (1 - 1j * t) * epsilon_sign(chi) / math.sqrt(M) * eval_character(chi, q)
    nominal_R = SAFETY * M * T * q * N**EPS / N

    def block(lo, hi):
        s, ab, peak = _h_star_block(chi, q, a, t, x, window, -1 if lo == 0 else lo, hi)
        return pref * s, abs(pref) * ab, peak

    target = lambda partial: TAIL_FRACTION * tolerance * max(abs(lhs), abs(partial))
    # Blocks (R, 2R] with R >= q hold a representative of the residue class on
    # each side, so an empty block can never fake a zero tail.
    rhs, tail, R = _grow(block, max(nominal_R, q), 10**9, target, NOISE)
    return IdentityCheck(
        lhs, complex(rhs), tail, tolerance, "twisted-poisson",
        params={"M": M, "chi": chi.index, "q": q, "a": a, "t": t, "x": x, "N": N},
        extra={"nominal_cutoff": nominal_R, "cutoff": R},
    )


# ---------------------------------------------------------------- dual sum


def _check_moduli(src: CoefficientSource, chi: DirichletCharacter, moduli: ModuliSet):
    for q in moduli.members:
        if math.gcd(q, chi.modulus) != 1:
            raise IncompatibleModuli(f"modulus {q} shares a factor with M = {chi.modulus}")
        if q % src.level_P:
            raise IncompatibleModuli(f"level {src.level_P} does not divide modulus {q}")
    if math.gcd(src.level_P, chi.modulus) != 1:
        raise IncompatibleModuli("level and character modulus must be coprime")


def direct_sum_eval(src: CoefficientSource, chi: DirichletCharacter, moduli: ModuliSet,
                    t: float, x: float, N: float) -> complex:
    """(1/L) sum_q sum*_a sum_{n,m} lambda(n) chi(m) m^{-it} e_q(a(n-m)) h(n/N) h*(m/N) e(x(n-m))."""
    _check_moduli(src, chi, moduli)
    h = SmoothWindow("h", N)
    hs = SmoothWindow("h_star", N)
    n = h.integer_points()
    src.require(int(n.max()))
    an = src.lam(n) * h.at(n) * np.exp(2j * np.pi * x * n)
    m = hs.integer_points()
    m = m[m > 0]
    bm = eval_character(chi, m) * np.exp(-1j * t * np.log(m)) * hs.at(m) * np.exp(-2j * np.pi * x * m)
    total = 0j
    for q in moduli.members:
        units, _ = units_and_inverses(q)
        A = e_frac(units[:, None] * n[None, :], q) @ an
        B = e_frac(-units[:, None] * m[None, :], q) @ bm
        total += complex(np.sum(A * B))
    return total / moduli.mass


@dataclass
class DualSumResult:
    value: complex
    truncation_bound: float
    cutoffs: dict = field(default_factory=dict)


def dual_sum_eval(src: CoefficientSource, chi: DirichletCharacter, moduli: ModuliSet,
                  t: float, x: float, N: float, tolerance: float = 1e-4,
                  scale_hint: float | None = None, fixed_cutoffs: dict | None = None) -> DualSumResult:
    """Right-hand side of the Poisson + Voronoi dual form of the approximating sum.

    Both the n-sum (Voronoi side) and the m-sum (Poisson side) are grown per
    modulus; ``fixed_cutoffs`` ({q: (Rn, Rm)}) bypasses the growth, which is
    how truncation consistency is probed.
    """
    _check_moduli(src, chi, moduli)
    if not chi.is_primitive:
        raise NotPrimitive("the dual form needs a primitive character")
    M = chi.modulus
    T = 3 + abs(t)
    h = SmoothWindow("h", N)
    hs = SmoothWindow("h_star", N)
    psi = src.nebentypus
    L = moduli.mass
    pre = (N ** (1 - 1j * t) * eval_character(psi, M) * epsilon_sign(chi) / (math.sqrt(M) * L))
    Q = max(moduli.members)
    total, bound = 0j, 0.0
    cutoffs = {}
    for q in moduli.members:
        units, inv = units_and_inverses(q)
        pq = pre * eval_character(chi, q) / q

        # m side: per residue class r of m mod q, B[r] = sum chi-bar(m) psi-bar(m) H*(m; q)
        def m_block(lo, hi, q=q, units=units):
            mm = np.arange(lo + 1, hi + 1, dtype=np.int64)
            mm = np.concatenate([[0] if lo == 0 else [], mm, -mm]).astype(np.int64)
            mm = mm[np.gcd(mm, q) == 1]
            if len(mm) == 0:
                return np.zeros(len(units), complex), 0.0, 0.0
            hv, _, _ = h_star_values(mm, q, M, t, x, N, hs)
            w = np.conj(eval_character(chi, mm)) * np.conj(eval_character(psi, mm)) * hv
            cls = np.searchsorted(units, mm % q) if q > 1 else np.zeros(len(mm), int)
            B = np.bincount(cls, weights=w.real, minlength=len(units)) + \
                1j * np.bincount(cls, weights=w.imag, minlength=len(units))
            return B, float(np.abs(w).sum()), float(np.abs(hv).max())

        # n side: A[r] = sum_{+-} sum_n lambda(-+n) e_q(+- M rbar n) V^+-(n/q^2)
        def n_block(lo, hi, q=q, inv=inv):
            nn = np.arange(lo + 1, hi + 1, dtype=np.int64)
            A = np.zeros(len(inv), complex)
            ab, peak = 0.0, 0.0
            if len(nn) == 0:
                return A, ab, peak
            src.require(hi)
            for sign, s in (("-", -1), ("+", 1)):
                V, _ = voronoi_weight(src, h, nn / q**2, x=x, sign=sign)
                if not np.any(V):
                    continue
                c = src.lam_signed(-s * nn) * V
                A += e_frac(s * M * inv[:, None] * nn[None, :], q) @ c
                ab += float(np.abs(c).sum())
                peak = max(peak, float(np.abs(V).max()))
            return A, ab, peak

        if fixed_cutoffs and q in fixed_cutoffs:
            Rn, Rm = fixed_cutoffs[q]
            A = n_block(0, Rn)[0]
            B = m_block(0, Rm)[0]
            _, n_tail, _ = n_block(Rn, 2 * Rn)
            _, m_tail, _ = m_block(Rm, 2 * Rm)
        else:
            Rn = max(1, int(math.ceil(SAFETY * q**2 * N**EPS / N)))
            Rm = max(q, int(math.ceil(SAFETY * M * T * Q * N**EPS / N)))
            A = n_block(0, Rn)[0]
            B = m_block(0, Rm)[0]
            n_next = m_next = None
            for _ in range(MAX_DOUBLINGS):
                if n_next is None:
                    n_next = n_block(Rn, 2 * Rn)
                if m_next is None:
                    m_next = m_block(Rm, 2 * Rm)
                (A_next, n_tail, n_peak), (B_next, m_tail, m_peak) = n_next, m_next
                cur = abs(pq) * abs(np.sum(A * B))
                goal = TAIL_FRACTION * tolerance * max(cur, scale_hint or 0.0) / len(moduli.members)
                done_n = (abs(pq) * n_tail * float(np.abs(B).sum()) <= goal
                          or n_peak <= NOISE * 2 * math.pi * N)
                done_m = (abs(pq) * m_tail * float(np.abs(A).sum()) <= goal
                          or m_peak <= NOISE)
                if done_n and done_m:
                    break
                if not done_n:
                    A = A + A_next
                    Rn *= 2
                    n_next = None
                if not done_m:
                    B = B + B_next
                    Rm *= 2
                    m_next = None
        value = pq * np.sum(A * B)
        tail = abs(pq) * (n_tail * float(np.abs(B).sum()) + m_tail * float(np.abs(A).sum()))
        total += value
        bound += tail
        cutoffs[q] = (Rn, Rm)
    return DualSumResult(complex(total), bound, cutoffs)


def dual_sum_check(src: CoefficientSource, chi: DirichletCharacter, moduli: ModuliSet,
                   t: float, x: float, N: float, tolerance: float = 1e-4) -> IdentityCheck:
    """Direct evaluation against the dual form (holomorphic) or, for Maass
    data, the dual form against itself at doubled cutoffs."""
    params = {"M": chi.modulus, "chi": chi.index, "moduli": " ".join(map(str, moduli.members)),
              "t": t, "x": x, "N": N, "kind": src.kind}
    if src.is_holomorphic:
        lhs = direct_sum_eval(src, chi, moduli, t, x, N)
        dual = dual_sum_eval(src, chi, moduli, t, x, N, tolerance, scale_hint=abs(lhs))
        return IdentityCheck(lhs, dual.value, dual.truncation_bound, tolerance,
                             "poisson-voronoi-dual-sum", params=params,
                             extra={"cutoffs": _fmt_cutoffs(dual.cutoffs)})
    base = dual_sum_eval(src, chi, moduli, t, x, N, tolerance)
    doubled = {q: (2 * rn, 2 * rm) for q, (rn, rm) in base.cutoffs.items()}
    again = dual_sum_eval(src, chi, moduli, t, x, N, tolerance, fixed_cutoffs=doubled)
    return IdentityCheck(base.value, again.value, base.truncation_bound, tolerance,
                         "poisson-voronoi-dual-sum-consistency", params=params,
                         extra={"cutoffs": _fmt_cutoffs(base.cutoffs)})


def _fmt_cutoffs(cut: dict) -> str:
    return " ".join(f"{q}:{rn}/{rm}" for q, (rn, rm) in sorted(cut.items()))


# ---------------------------------------------------------------- bilinear T


def _h_sharp(u, c, M, t, x, N, hs):
    hv, _, err = h_star_values(u, c, M, t, x, N, hs)
    return h_sharp_from_star(hv, u, c, M, t, N), err


def bilinear_t_direct(M, q1, q1p, q2, n, n_p, sign, t, x, X, N, P=1):
    """The m-sum T with weight W(m/X)/m over (m, P q1 q1' q2) = 1."""
    c1, c2, C = P * q1 * q2, P * q1p * q2, P * q1 * q1p * q2
    W = SmoothWindow("W", X)
    top = int(math.floor(2 * X))
    m = np.arange(-top, top + 1, dtype=np.int64)
    m = m[(m != 0) & (np.gcd(m, C) == 1)]
    m = m[W.at(m) > 0] if len(m) else m
    if len(m) == 0:
        return 0j
    hs = SmoothWindow("h_star", N)
    inv1 = np.array([pow(int(v), -1, c1) if c1 > 1 else 0 for v in m], dtype=np.int64)
    inv2 = np.array([pow(int(v), -1, c2) if c2 > 1 else 0 for v in m], dtype=np.int64)
    phase = e_frac(sign * M * inv1 * n, c1) * e_frac(-sign * M * inv2 * n_p, c2)
    H1, _ = _h_sharp(m, c1, M, t, x, N, hs)
    H2, _ = _h_sharp(m, c2, M, t, x, N, hs)
    return complex(np.sum(phase * H1 * np.conj(H2) * W.at(m) / m))


def _bilinear_profile(M, c1, c2, t, x, X, N, z):
    """W(z)/z H#(zX; c1) conj H#(zX; c2), smooth through z = 0."""
    hs = SmoothWindow("h_star", N)
    out = np.zeros(len(z), dtype=np.complex128)
    w = SmoothWindow("W", 1.0)(z)
    keep = (w != 0) & (z != 0)
    u = z[keep] * X
    H1, _, _ = h_star_values(u, c1, M, t, x, N, hs)
    H2, _, _ = h_star_values(u, c2, M, t, x, N, hs)
    # (|u|N/(M c1))^{1-it} conj((|u|N/(M c2))^{1-it}) = u^2 N^2/(M^2 c1 c2) (c1/c2)^{it}
    scale = u * N**2 / (M**2 * c1 * c2) * (c1 / c2) ** (1j * t)
    out[keep] = w[keep] * X * scale * H1 * np.conj(H2)
    return out


def _ell_transform(M, c1, c2, C, t, x, X, N, ell_max, K):
    """I(l) = int W(z)/z H#(zX;c1) conj H#(zX;c2) e(-X l z / C) dz for |l| <= ell_max.

    Trapezoid rule with step h = C/(X K) on [-2, 2], so the phases become a
    length-K DFT. The integrand vanishes to all orders at +-2.
    """
    h = C / (X * K)
    J = int(math.floor(4 / h)) + 1
    j = np.arange(J)
    z = -2.0 + j * h
    prof = _bilinear_profile(M, c1, c2, t, x, X, N, z)
    folded = np.bincount(j % K, weights=prof.real, minlength=K) + \
        1j * np.bincount(j % K, weights=prof.imag, minlength=K)
    F = np.fft.fft(folded)
    ell = np.arange(-ell_max, ell_max + 1, dtype=np.int64)
    return ell, h * np.exp(4j * np.pi * X * ell / C) * F[ell % K]


def bilinear_t_check(M: int, q1: int, q1p: int, q2: int, n: int, n_p: int, sign: int,
                     t: float, x: float, X: float, N: float, P: int = 1,
                     tolerance: float = 1e-4) -> IdentityCheck:
    """T as a direct m-sum against its Kloosterman/integral dual."""
    for p in (q1, q1p, q2):
        if not arith.is_prime(p) or M % p == 0:
            raise PreconditionError(f"{p} must be a prime not dividing M = {M}")
    if sign not in (1, -1):
        raise PreconditionError("sign is +1 or -1")
    if abs(x) * N > 1 + 1e-12:
        raise PreconditionError("need |x| <= 1/N")
    if X <= 0:
        raise PreconditionError("X must be positive")
    c1, c2, C = P * q1 * q2, P * q1p * q2, P * q1 * q1p * q2
    lhs = bilinear_t_direct(M, q1, q1p, q2, n, n_p, sign, t, x, X, N, P)
    D = -sign * M * (q1 * n_p - q1p * n)
    kl = kloosterman_row(D, C)

    # Cycles per unit z of the integrand, from the h* transforms.
    content = X * 2.25 * N / M * (1 / c1 + 1 / c2) + abs(x) * N * X * 2
    Q1 = max(q1, q1p)
    nominal_R = SAFETY * Q1 * (P * Q1 * q2) * N**EPS / X
    R = max(16, int(math.ceil(min(nominal_R, C * (4 * content + 40) / X))))
    for _ in range(MAX_DOUBLINGS):
        span = 2 * R
        need = X * span / C + 2 * content + 60  # samples per unit z
        K = 1 << int(math.ceil(math.log2(max(2 * span + 1, C * need / X))))
        ell, I = _ell_transform(M, c1, c2, C, t, x, X, N, span, K)
        _, I2 = _ell_transform(M, c1, c2, C, t, x, X, N, span, 2 * K)
        quad_err = float(np.max(np.abs(I2 - I)))
        terms = kl[ell % C] * I2 / C
        inner = np.abs(ell) <= R
        total = complex(terms[inner].sum())
        tail = float(np.abs(terms[~inner]).sum())
        if tail <= TAIL_FRACTION * tolerance * max(abs(lhs), abs(total)):
            break
        if float(np.abs(I2[~inner]).max()) <= NOISE * float(np.abs(I2).max()):
            break
        R *= 2
    bound = tail + quad_err * float(np.abs(kl[ell[inner] % C]).sum()) / C
    g = math.gcd(q1 * n_p - q1p * n, q1 * q1p * q2)
    return IdentityCheck(
        lhs, total, bound, tolerance, "bilinear-kloosterman-dual",
        params={"M": M, "q1": q1, "q1p": q1p, "q2": q2, "n": n, "np": n_p, "sign": sign,
                "t": t, "x": x, "X": X, "N": N, "P": P},
        extra={"gcd": g, "cutoff": R, "nominal_cutoff": nominal_R},
    )
