"""Normalized Fourier coefficients of cusp forms.

The built-in source is the weight 12 discriminant form, whose integer
coefficients tau(n) come from the 24th power of Euler's pentagonal series.
The power series products are done exactly by Kronecker substitution: each
truncated series is packed into one big integer (fixed-width slots) and
multiplied with GMP. Maass data is only ever read from a file.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

from .characters import DirichletCharacter, enumerate_characters, principal_character
from .errors import InsufficientCoefficients, MissingHeader, NormalizationError, ParseError

MAX_BUILTIN = 10**6


@dataclass(frozen=True, eq=False)
class CoefficientSource:
    kind: str
    level_P: int
    nebentypus: DirichletCharacter
    coefficients: np.ndarray = field(repr=False)  # index n -> lambda(n), entry 0 unused
    weight_k: int | None = None
    spectral_mu: float | None = None
    parity: int = 0
    tau: tuple[int, ...] | None = field(default=None, repr=False)

    @property
    def n_max(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_holomorphic(self) -> bool:
        return self.kind == "holomorphic"

    @property
    def has_real_coefficients(self) -> bool:
        return bool(np.all(self.coefficients.imag == 0))

    def require(self, n: int) -> None:
        if n > self.n_max:
            raise InsufficientCoefficients(f"need lambda(n) up to {n}, have {self.n_max}")

    def lam(self, n) -> np.ndarray:
        """lambda(n) for positive integer arrays."""
        n = np.asarray(n, dtype=np.int64)
        if n.size and int(n.max()) > self.n_max:
            self.require(int(n.max()))
        return self.coefficients[n]

    def lam_signed(self, n) -> np.ndarray:
        """lambda(n) for nonzero n of either sign.

        Holomorphic forms have no negative-index coefficients. For Maass forms
        lambda(-n) = (-1)^parity lambda(n).
        """
        n = np.asarray(n, dtype=np.int64)
        vals = self.lam(np.abs(n))
        if self.is_holomorphic:
            return np.where(n > 0, vals, 0)
        sign = -1.0 if self.parity else 1.0
        return np.where(n > 0, vals, sign * vals)


def _pentagonal(L: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) modulo q^L."""
    c = [0] * L
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            e = kk * (3 * kk - 1) // 2
            if e < L:
                c[e] = -1 if kk % 2 else 1
                hit = True
        if not hit:
            break
        k += 1
    return c


class _Packer:
    """Kronecker substitution for signed integer series with bounded coefficients."""

    def __init__(self, L: int, bits: int):
        self.L = L
        self.nbytes = (bits + 7) // 8
        self.B = 8 * self.nbytes
        self.half = 1 << (self.B - 1)
        self.mask = (1 << (self.B * L)) - 1
        self.offset = self._pack_nonneg([self.half] * L)

    def _pack_nonneg(self, coeffs) -> int:
        nb = self.nbytes
        return int.from_bytes(b"".join(int(c).to_bytes(nb, "little") for c in coeffs), "little")

    def pack(self, coeffs) -> gmpy2.mpz:
        pos = self._pack_nonneg(max(c, 0) for c in coeffs)
        neg = self._pack_nonneg(max(-c, 0) for c in coeffs)
        return gmpy2.mpz(pos - neg)

    def unpack(self, z) -> list[int]:
        z = (int(z) & self.mask) + self.offset
        raw = (z & self.mask).to_bytes(self.nbytes * self.L, "little")
        nb, half = self.nbytes, self.half
        return [int.from_bytes(raw[i:i + nb], "little") - half for i in range(0, len(raw), nb)]

    def mul(self, a, b):
        return self.unpack(self.pack(a) * self.pack(b))


def eta_power_coefficients(power: int, L: int) -> list[int]:
    """Coefficients of prod (1 - q^n)^power modulo q^L, exactly."""
    bound = math.comb(L - 1 + power - 1, power - 1) if power > 0 else 1
    packer = _Packer(L, bound.bit_length() + 2)
    base = _pentagonal(L)
    result = None
    sq = base
    p = power
    while p:
        if p & 1:
            result = sq if result is None else packer.mul(result, sq)
        p >>= 1
        if p:
            sq = packer.mul(sq, sq)
    return result if result is not None else [1] + [0] * (L - 1)


@lru_cache(maxsize=4)
def ramanujan_tau(n_max: int) -> tuple[int, ...]:
    """(0, tau(1), ..., tau(n_max))."""
    if n_max < 1:
        return (0,)
    series = eta_power_coefficients(24, n_max)
    return (0,) + tuple(series)


@lru_cache(maxsize=4)
def builtin_delta(n_max: int = 20000) -> CoefficientSource:
    """Weight 12 level 1 eigenform with lambda(n) = tau(n) / n^(11/2)."""
    if not 1 <= n_max <= MAX_BUILTIN:
        raise ValueError(f"n_max must lie in [1, {MAX_BUILTIN}]")
    tau = ramanujan_tau(n_max)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    lam = np.zeros(n_max + 1, dtype=np.complex128)
    # float(tau) is exact to 53 bits; the division keeps relative error ~1e-16.
    lam[1:] = np.array([float(t) for t in tau[1:]]) / n**5.5
    return CoefficientSource(
        kind="holomorphic", level_P=1, nebentypus=principal_character(1),
        coefficients=lam, weight_k=12, parity=0, tau=tau,
    )


_HEADER = re.compile(r"^maass\s+(.*)$")


def load_maass(path) -> CoefficientSource:
    """Read a Maass coefficient file.

    The first non-comment line must be
    ``maass mu=<real> level=<int> neb=<index> parity=<0|1>``; every further
    line is ``<n> <re> <im>``. ``#`` starts a comment.
    """
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines or not _HEADER.match(lines[0]):
        raise MissingHeader(f"{path}: first line must start with 'maass'")
    fields = {}
    for tok in _HEADER.match(lines[0]).group(1).split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise ParseError(f"bad header token {tok!r}")
        fields[key] = val
    missing = {"mu", "level", "neb", "parity"} - fields.keys()
    if missing:
        raise MissingHeader(f"header lacks {sorted(missing)}")
    try:
        mu = float(fields["mu"])
        level = int(fields["level"])
        neb = int(fields["neb"])
        parity = int(fields["parity"])
    except ValueError as exc:
        raise ParseError(f"bad header value: {exc}") from None
    if parity not in (0, 1) or level < 1:
        raise ParseError("parity must be 0 or 1 and level positive")
    chars = enumerate_characters(level)
    if not 0 <= neb < len(chars):
        raise ParseError(f"nebentypus index {neb} out of range mod {level}")

    table = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected '<n> <re> <im>'")
        try:
            n = int(parts[0])
            val = complex(float(parts[1]), float(parts[2]))
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric entry {line!r}") from None
        if n < 1 or n in table:
            raise ParseError(f"line {lineno}: bad or repeated index {n}")
        table[n] = val
    if 1 not in table:
        raise ParseError("no coefficient for n = 1")
    if abs(table[1] - 1) > 1e-12:
        raise NormalizationError(f"lambda(1) = {table[1]}, expected 1")
    n_max = max(table)
    if len(table) != n_max:
        raise ParseError(f"coefficient indices must be 1..{n_max} without gaps")
    coeffs = np.zeros(n_max + 1, dtype=np.complex128)
    for n, v in table.items():
        coeffs[n] = v
    return CoefficientSource(
        kind="maass", level_P=level, nebentypus=chars[neb], coefficients=coeffs,
        spectral_mu=mu, parity=parity,
    )


def write_maass(path, mu: float, level: int, neb: int, parity: int, coefficients) -> None:
    """Inverse of :func:`load_maass`; ``coefficients[i]`` is lambda(i + 1)."""
    rows = [f"maass mu={mu!r} level={level} neb={neb} parity={parity}"]
    for n, c in enumerate(coefficients, start=1):
        c = complex(c)
        rows.append(f"{n} {c.real!r} {c.imag!r}")
    Path(path).write_text("\n".join(rows) + "\n")


def rankin_selberg_sum(src: CoefficientSource, x: int) -> float:
    """sum_{1 <= n <= x} |lambda(n)|^2."""
    src.require(x)
    return float(np.sum(np.abs(src.coefficients[1:x + 1]) ** 2))


def hecke_defect(src: CoefficientSource, m: int, n: int) -> int:
    """tau(m) tau(n) - sum_{d | (m, n)} d^11 tau(mn / d^2), exactly.

    Zero for every m, n is Hecke multiplicativity of the normalized
    coefficients.
    """
    if src.tau is None:
        raise ValueError("exact Hecke check needs integer coefficients")
    src.require(m * n)
    tau = src.tau
    g = math.gcd(m, n)
    k1 = (src.weight_k or 12) - 1
    rhs = sum(d**k1 * tau[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
    return tau[m] * tau[n] - rhs
