"""Dirichlet characters modulo M.

A character is stored as one exponent per generator of (Z/MZ)*, with the
generators fixed per prime-power component (a primitive root for odd p^k,
-1 and 5 for 2^k with k >= 3). Values are exact roots of unity e(j/D) with D
the exponent of the group, so ``eval`` never accumulates phase error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .arith import euler_phi, factorize
from .errors import NotPrimitive, PreconditionError

MAX_MODULUS = 10**5


@dataclass(frozen=True)
class _Generator:
    prime: int
    power: int  # p^k of the component
    order: int


class _CharGroup:
    """Generators and discrete-log tables for (Z/MZ)*."""

    def __init__(self, M: int):
        self.M = M
        self.gens: list[_Generator] = []
        tables: list[np.ndarray] = []
        for p, k in factorize(M) if M > 1 else ():
            pk = p**k
            for order, table in _component_logs(p, k):
                self.gens.append(_Generator(p, pk, order))
                tables.append((pk, table))
        self.exponent = math.lcm(*(g.order for g in self.gens)) if self.gens else 1
        n = np.arange(M)
        unit = np.array([math.gcd(int(r), M) == 1 for r in n]) if M > 1 else np.ones(1, bool)
        self.unit = unit
        logs = np.zeros((M, len(self.gens)), dtype=np.int64)
        for j, (pk, table) in enumerate(tables):
            logs[:, j] = table[n % pk]
        logs[~unit] = -1
        self.logs = logs

    def phase_numerators(self, exponents: tuple[int, ...]) -> np.ndarray:
        D = self.exponent
        num = np.zeros(self.M, dtype=np.int64)
        for j, (g, e) in enumerate(zip(self.gens, exponents)):
            num += self.logs[:, j] * (e * (D // g.order))
        num %= D
        num[~self.unit] = -1
        return num


def _component_logs(p: int, k: int):
    """Yield (order, dlog table indexed by residue mod p^k) per generator."""
    pk = p**k
    if p == 2:
        if k == 1:
            return
        neg = np.zeros(pk, dtype=np.int64)
        neg[np.arange(pk) % 4 == 3] = 1
        yield 2, neg
        if k >= 3:
            order = 2 ** (k - 2)
            five = np.zeros(pk, dtype=np.int64)
            r = 1
            for j in range(order):
                five[r] = j
                five[(pk - r) % pk] = j
                r = r * 5 % pk
            yield order, five
        return
    phi = euler_phi(pk)
    g = _primitive_root(p, k)
    table = np.zeros(pk, dtype=np.int64)
    r = 1
    for j in range(phi):
        table[r] = j
        r = r * g % pk
    yield phi, table


def _primitive_root(p: int, k: int) -> int:
    qs = [r for r, _ in factorize(p - 1)] if p > 2 else []
    for g in range(2, p + 1):
        if all(pow(g, (p - 1) // r, p) != 1 for r in qs):
            if k >= 2 and pow(g, p - 1, p * p) == 1:
                continue
            return g
    if p == 2:
        return 1
    raise AssertionError("no primitive root")  # unreachable for odd primes


@lru_cache(maxsize=64)
def _group(M: int) -> _CharGroup:
    return _CharGroup(M)


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponents: tuple[int, ...]
    index: int = field(default=0, compare=False)

    @property
    def _grp(self) -> _CharGroup:
        return _group(self.modulus)

    @cached_property
    def phases(self) -> np.ndarray:
        """j(n) with chi(n) = e(j(n)/D); -1 where gcd(n, M) > 1."""
        return self._grp.phase_numerators(self.exponents)

    @cached_property
    def values(self) -> np.ndarray:
        """chi(n) for n = 0..M-1."""
        num = self.phases
        D = self._grp.exponent
        vals = np.exp(2j * np.pi * np.where(num >= 0, num, 0) / D)
        vals[num < 0] = 0
        if self.is_real:
            vals = np.round(vals.real) + 0j
        return vals

    def __call__(self, n):
        return eval_character(self, n)

    @property
    def order(self) -> int:
        return math.lcm(*(g.order // math.gcd(e, g.order)
                          for g, e in zip(self._grp.gens, self.exponents))) if self.exponents else 1

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @cached_property
    def conductor(self) -> int:
        cond = 1
        gens = self._grp.gens
        for p in sorted({g.prime for g in gens}):
            idx = [i for i, g in enumerate(gens) if g.prime == p]
            if p == 2:
                e_neg = self.exponents[idx[0]]
                if len(idx) == 1:
                    cond *= 4 if e_neg else 1
                    continue
                g5, e5 = gens[idx[1]], self.exponents[idx[1]]
                if e5 == 0:
                    cond *= 4 if e_neg else 1
                else:
                    v = (g5.order // math.gcd(e5, g5.order)).bit_length() - 1
                    cond *= 2 ** (v + 2)
            else:
                g, e = gens[idx[0]], self.exponents[idx[0]]
                if e == 0:
                    continue
                r = g.order // math.gcd(e, g.order)
                v = 0
                while r % p == 0:
                    r //= p
                    v += 1
                cond *= p ** (v + 1)
        return cond

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def parity(self) -> str:
        return "even" if self.modulus <= 2 or self.values[self.modulus - 1].real > 0 else "odd"

    @property
    def parity_bit(self) -> int:
        return 0 if self.parity == "even" else 1

    def conj(self) -> "DirichletCharacter":
        exps = tuple((-e) % g.order for g, e in zip(self._grp.gens, self.exponents))
        return character(self.modulus, exps)

    def __repr__(self):
        return f"DirichletCharacter(M={self.modulus}, index={self.index}, conductor={self.conductor})"


def _radix(M: int) -> list[int]:
    return [g.order for g in _group(M).gens]


def character(M: int, exponents) -> DirichletCharacter:
    orders = _radix(M)
    exponents = tuple(int(e) % o for e, o in zip(exponents, orders))
    if len(exponents) != len(orders):
        raise PreconditionError("wrong number of exponents")
    idx = 0
    for e, o in zip(exponents, orders):
        idx = idx * o + e
    return DirichletCharacter(M, exponents, idx)


def enumerate_characters(M: int) -> list[DirichletCharacter]:
    """All phi(M) characters mod M, principal first, in mixed-radix index order."""
    if not 1 <= M <= MAX_MODULUS:
        raise PreconditionError(f"modulus {M} outside [1, {MAX_MODULUS}]")
    orders = _radix(M)
    return [DirichletCharacter(M, tuple(e), i)
            for i, e in enumerate(itertools.product(*(range(o) for o in orders)))]


def character_by_index(M: int, index: int) -> DirichletCharacter:
    chars = enumerate_characters(M)
    if not 0 <= index < len(chars):
        raise PreconditionError(f"no character with index {index} mod {M}")
    return chars[index]


def principal_character(M: int) -> DirichletCharacter:
    return DirichletCharacter(M, (0,) * len(_radix(M)), 0)


def primitive_characters(M: int) -> list[DirichletCharacter]:
    return [chi for chi in enumerate_characters(M) if chi.is_primitive]


def eval_character(chi: DirichletCharacter, n):
    """chi(n) for an integer or an integer array."""
    if np.ndim(n) == 0:
        return complex(chi.values[int(n) % chi.modulus])
    return chi.values[np.mod(np.asarray(n, dtype=np.int64), chi.modulus)]


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_a chi(a) e(a/M) for primitive chi."""
    if not chi.is_primitive:
        raise NotPrimitive(f"character mod {chi.modulus} has conductor {chi.conductor}")
    M = chi.modulus
    a = np.arange(M)
    return complex(np.sum(chi.values * np.exp(2j * np.pi * a / M)))


def epsilon_sign(chi: DirichletCharacter) -> complex:
    return gauss_sum(chi) / math.sqrt(chi.modulus)
