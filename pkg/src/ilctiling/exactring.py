"""Exact arithmetic in Z[zeta] with zeta = exp(i*pi/(2n)), a primitive 4n-th root of unity.

Elements are stored as their canonical residue modulo the 4n-th cyclotomic
polynomial, so equality of values is equality of coefficient tuples.  The
same elements double as exact points of the plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_N = (13, 17, 21)


class UnsupportedParameterError(ValueError):
    """Raised for a symmetry parameter outside {13, 17, 21}."""


def check_n(n: int) -> int:
    if n not in SUPPORTED_N:
        raise UnsupportedParameterError(f"n must be one of {SUPPORTED_N}, got {n!r}")
    return n


# ---------------------------------------------------------------------------
# integer polynomial helpers (lowest degree first)
# ---------------------------------------------------------------------------

def _trim(p: list[int]) -> list[int]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_divmod(a: Sequence[int], b: Sequence[int]) -> tuple[list[int], list[int]]:
    """Division by a polynomial whose leading coefficient is +-1 (exact over Z)."""
    a = _trim(list(a))
    b = _trim(list(b))
    lead = b[-1]
    if lead not in (1, -1):
        raise ValueError("divisor must have unit leading coefficient")
    if len(a) < len(b):
        return [0], a
    q = [0] * (len(a) - len(b) + 1)
    r = list(a)
    for i in range(len(q) - 1, -1, -1):
        c = r[i + len(b) - 1] * lead
        q[i] = c
        if c:
            for j, y in enumerate(b):
                r[i + j] -= c * y
    return _trim(q), _trim(r[: len(b) - 1] or [0])


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Phi_m via x^m - 1 = prod_{d | m} Phi_d."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num, rem = poly_divmod(num, cyclotomic_poly(d))
            assert rem == [0], "cyclotomic recursion left a remainder"
    return tuple(num)


# ---------------------------------------------------------------------------
# per-n ring data
# ---------------------------------------------------------------------------

class _RingData:
    def __init__(self, n: int):
        self.n = n
        self.order = 4 * n
        self.phi = cyclotomic_poly(self.order)
        self.dim = len(self.phi) - 1
        d = self.dim
        # canonical residue of zeta^e for every e mod 4n
        table: list[tuple[int, ...]] = []
        for e in range(self.order):
            mono = [0] * e + [1]
            _, r = poly_divmod(mono, self.phi)
            r = r + [0] * (d - len(r))
            table.append(tuple(r))
        self.powers = table
        self.angles = np.array([math.pi * i / (2 * n) for i in range(d)])
        self.basis_complex = np.exp(1j * self.angles)
        # linear maps as integer matrices acting on row vectors: v @ M
        self.rot_mats = np.zeros((self.order, d, d), dtype=np.int64)
        for r in range(self.order):
            for i in range(d):
                self.rot_mats[r, i, :] = table[(i + r) % self.order]
        self.conj_mat = np.zeros((d, d), dtype=np.int64)
        for i in range(d):
            self.conj_mat[i, :] = table[(-i) % self.order]


@lru_cache(maxsize=None)
def ring(n: int) -> _RingData:
    return _RingData(check_n(n))


def _reduce(n: int, coeffs: Sequence[int]) -> tuple[int, ...]:
    """Canonical residue of sum_e coeffs[e] zeta^e (exponents taken mod 4n)."""
    R = ring(n)
    out = [0] * R.dim
    for e, c in enumerate(coeffs):
        if c:
            row = R.powers[e % R.order]
            for i, x in enumerate(row):
                if x:
                    out[i] += c * x
    return tuple(out)


@dataclass(frozen=True)
class CycInt:
    """An element of Z[zeta_{4n}] in canonical form."""

    n: int
    coeffs: tuple[int, ...]

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_poly(cls, n: int, coeffs: Iterable[int]) -> "CycInt":
        return cls(n, _reduce(n, list(coeffs)))

    @classmethod
    def from_int(cls, n: int, value: int) -> "CycInt":
        d = ring(n).dim
        return cls(n, (int(value),) + (0,) * (d - 1))

    @classmethod
    def zero(cls, n: int) -> "CycInt":
        return cls.from_int(n, 0)

    @classmethod
    def one(cls, n: int) -> "CycInt":
        return cls.from_int(n, 1)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "CycInt":
        if isinstance(other, CycInt):
            if other.n != self.n:
                raise ValueError("mixing elements of different rings")
            return other
        if isinstance(other, (int, np.integer)):
            return CycInt.from_int(self.n, int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.n, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.n, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return CycInt(self.n, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            k = int(other)
            return CycInt(self.n, tuple(k * a for a in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.coeffs, o.coeffs
        prod = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return CycInt(self.n, _reduce(self.n, prod))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CycInt":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = CycInt.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def rotate(self, r: int) -> "CycInt":
        """Multiply by zeta^r (rotation by r*pi/(2n) about the origin)."""
        R = ring(self.n)
        out = [0] * R.dim
        for i, c in enumerate(self.coeffs):
            if c:
                row = R.powers[(i + r) % R.order]
                for t, x in enumerate(row):
                    if x:
                        out[t] += c * x
        return CycInt(self.n, tuple(out))

    def conj(self) -> "CycInt":
        """Complex conjugate, i.e. reflection in the real axis."""
        return CycInt(self.n, _reduce(self.n, _conj_poly(self.n, self.coeffs)))

    # -- predicates / evaluation ------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_real(self) -> bool:
        return self == self.conj()

    def embed(self) -> complex:
        R = ring(self.n)
        return complex(np.dot(np.array(self.coeffs, dtype=float), R.basis_complex))

    def __complex__(self) -> complex:
        return self.embed()

    def __float__(self) -> float:
        return self.embed().real

    def __repr__(self) -> str:
        return f"CycInt(n={self.n}, ~{self.embed():.6g})"


def _conj_poly(n: int, coeffs: Sequence[int]) -> list[int]:
    order = 4 * n
    out = [0] * order
    for i, c in enumerate(coeffs):
        if c:
            out[(-i) % order] += c
    return out


def to_array(xs: Sequence[CycInt]) -> np.ndarray:
    """Stack elements into an (N, dim) integer array (object dtype if huge)."""
    if not xs:
        return np.zeros((0, ring(SUPPORTED_N[0]).dim), dtype=np.int64)
    rows = [x.coeffs for x in xs]
    big = max((abs(c) for row in rows for c in row), default=0)
    dtype = np.int64 if big < 2**62 else object
    return np.array(rows, dtype=dtype)


def from_row(n: int, row) -> CycInt:
    return CycInt(n, tuple(int(c) for c in row))


# ---------------------------------------------------------------------------
# named elements
# ---------------------------------------------------------------------------

def zeta_pow(n: int, k: int) -> CycInt:
    R = ring(n)
    return CycInt(n, R.powers[k % R.order])


def unit(n: int, m: int) -> CycInt:
    """Unit vector in direction m*pi/n."""
    return zeta_pow(n, 2 * m)


@lru_cache(maxsize=None)
def s_value(n: int, j: int) -> CycInt:
    """Edge length s_{n,j}: 1 for j = 0, else 2cos(j*pi/n) = zeta^{2j} + zeta^{-2j}."""
    check_n(n)
    if not 0 <= j <= n - 1:
        raise ValueError(f"index j={j} out of range 0..{n - 1}")
    if j == 0:
        return CycInt.one(n)
    return zeta_pow(n, 2 * j) + zeta_pow(n, -2 * j)


def index_set(n: int) -> list[int]:
    return list(range((n - 1) // 2 + 1))


def odd_indices(n: int) -> list[int]:
    return [j for j in index_set(n) if j % 2 == 1]


def even_indices(n: int) -> list[int]:
    return [j for j in index_set(n) if j % 2 == 0]


@lru_cache(maxsize=None)
def mu(n: int) -> CycInt:
    """The inflation factor, as the sum of s_{n,j} over odd j."""
    total = CycInt.zero(n)
    for j in odd_indices(n):
        total = total + s_value(n, j)
    return total


def mu_float(n: int) -> float:
    check_n(n)
    return 1.0 / (2.0 * math.sin(math.pi / (2 * n)))


def embed(x: CycInt) -> complex:
    return x.embed()


@lru_cache(maxsize=None)
def mu_matrix(n: int) -> np.ndarray:
    """Integer matrix M with (v @ M) the coefficient row of mu * v."""
    R = ring(n)
    m = mu(n)
    out = np.zeros((R.dim, R.dim), dtype=np.int64)
    for i in range(R.dim):
        out[i, :] = (zeta_pow(n, i) * m).coeffs
    return out


def unit_complex(n: int, r: int) -> complex:
    """Float value of zeta^r."""
    return cmath.exp(1j * math.pi * r / (2 * n))


def identity_report(n: int) -> dict:
    """Exact checks of the two edge-length identities: the odd and even sums
    both equal mu, and mu s_k = s_0 + ... + s_{h-k} for every k."""
    check_n(n)
    h = (n - 1) // 2
    even = CycInt.zero(n)
    for j in even_indices(n):
        even = even + s_value(n, j)
    sums = (even - mu(n)).is_zero()
    expansion = {}
    for k in range(1, h + 1):
        rhs = CycInt.zero(n)
        for j in range(h - k + 1):
            rhs = rhs + s_value(n, j)
        expansion[k] = (mu(n) * s_value(n, k) - rhs).is_zero()
    return {"n": n, "odd_equals_even": sums, "mu_s_expansion": expansion,
            "ok": sums and all(expansion.values())}
