"""Exact modular arithmetic and complete exponential sums.

Every exponential e_c(k) = exp(2 pi i k / c) is formed from an integer
phase numerator reduced mod c, so the only floating point step is the final
lookup into a table of c-th roots of unity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonInvertible, PreconditionError

MAX_MODULUS = 10**7


@dataclass(frozen=True)
class ExpSumResult:
    value: complex
    terms: int

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of ``n`` as ``((p, k), ...)`` with p increasing."""
    if n < 1:
        raise PreconditionError(f"cannot factor {n}")
    out = []
    for p in (2, 3):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p < hi."""
    if hi <= 2:
        return []
    sieve = np.ones(hi, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(hi - 1) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.flatnonzero(sieve) if p >= lo]


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, k in factorize(n):
        divs = [d * p**j for d in divs for j in range(k + 1)]
    return sorted(divs)


def euler_phi(q: int) -> int:
    if q < 1:
        raise PreconditionError("euler_phi needs q >= 1")
    result = q
    for p, _ in factorize(q):
        result = result // p * (p - 1)
    return result


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(k > 1 for _, k in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisor_count(c: int) -> int:
    if c < 1:
        raise PreconditionError("divisor_count needs c >= 1")
    return math.prod(k + 1 for _, k in factorize(c))


def mod_inverse(a: int, q: int) -> int:
    """Return the inverse of ``a`` modulo ``q`` in ``[1, q)``.

    Modulus 1 is accepted for convenience and returns 0 (the only residue).
    """
    if q < 1:
        raise PreconditionError("modulus must be positive")
    if q == 1:
        return 0
    if math.gcd(a, q) != 1:
        raise NonInvertible(f"{a} is not invertible mod {q}")
    return pow(a % q, -1, q)


@lru_cache(maxsize=256)
def roots_of_unity(c: int) -> np.ndarray:
    """Table ``w[k] = e(k/c)`` for k in [0, c)."""
    k = np.arange(c, dtype=np.float64)
    w = np.exp(2j * np.pi * k / c)
    return w


@lru_cache(maxsize=256)
def units_and_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced residues mod c and their inverses, as int64 arrays."""
    if c == 1:
        return np.array([0], dtype=np.int64), np.array([0], dtype=np.int64)
    x = [r for r in range(1, c) if math.gcd(r, c) == 1]
    xbar = [pow(r, -1, c) for r in x]
    return np.array(x, dtype=np.int64), np.array(xbar, dtype=np.int64)


def e_frac(num, den) -> np.ndarray:
    """e(num/den) with the integer numerator reduced mod den first."""
    num = np.mod(np.asarray(num, dtype=np.int64), den)
    return np.exp(2j * np.pi * num / den)


def kloosterman_sum(a: int, b: int, c: int) -> ExpSumResult:
    """S(a, b; c) = sum over x mod c, (x, c) = 1, of e_c(a x + b xbar)."""
    if c < 1 or c > MAX_MODULUS:
        raise PreconditionError(f"modulus {c} outside [1, {MAX_MODULUS}]")
    x, xbar = units_and_inverses(c)
    phase = (a % c) * x + (b % c) * xbar
    value = roots_of_unity(c)[phase % c].sum()
    return ExpSumResult(complex(value), len(x))


def kloosterman_batch(a: np.ndarray, b: np.ndarray, c: int) -> np.ndarray:
    """S(a_i, b_i; c) for paired integer arrays, exact-phase evaluation."""
    x, xbar = units_and_inverses(c)
    a = np.mod(np.asarray(a, dtype=np.int64), c)[:, None]
    b = np.mod(np.asarray(b, dtype=np.int64), c)[:, None]
    phase = (a * x[None, :] + b * xbar[None, :]) % c
    return roots_of_unity(c)[phase].sum(axis=1)


def kloosterman_row(a: int, c: int) -> np.ndarray:
    """All sums S(a, b; c) for b = 0..c-1 at once via one FFT of length c."""
    x, xbar = units_and_inverses(c)
    g = np.zeros(c, dtype=np.complex128)
    g[x % c] = roots_of_unity(c)[(a % c) * xbar % c]
    return np.fft.ifft(g) * c


def ramanujan_sum(q: int, n: int) -> int:
    """c_q(n) via the divisor formula sum_{d | (q, n)} mu(q/d) d."""
    if q < 1:
        raise PreconditionError("ramanujan_sum needs q >= 1")
    g = math.gcd(q, n)
    return sum(mobius(q // d) * d for d in divisors(g))


@lru_cache(maxsize=4096)
def ramanujan_period(q: int) -> np.ndarray:
    """c_q(r) for r = 0..q-1 (the sum is periodic in n with period q)."""
    return np.array([ramanujan_sum(q, r) for r in range(q)], dtype=np.float64)


def ramanujan_sums(q: int, n) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    return ramanujan_period(q)[np.mod(n, q)]
