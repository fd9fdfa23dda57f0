"""Integer linear algebra over Z[mu_n].

The inflation factor mu_n is an eigenvalue of a small 0/1 matrix M_n built from
the edge-length identities.  Everything here is exact (Python integers and
fractions) except the final eigenvalue/eigenvector numerics, which are doubles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactring import (
    check_n,
    index_set,
    mu,
    mu_float,
    poly_divmod,
    poly_mul,
    s_value,
)


class ConsistencyError(RuntimeError):
    """An exact identity that must hold did not (indicates a bug)."""


# ---------------------------------------------------------------------------
# integer polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial, coefficients lowest degree first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = list(self.coeffs) or [0]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    @property
    def degree(self) -> int:
        if self.coeffs == (0,):
            return -1
        return len(self.coeffs) - 1

    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        return IntPoly(tuple(poly_mul(self.coeffs, other.coeffs)))

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def divmod(self, other: "IntPoly") -> tuple["IntPoly", "IntPoly"]:
        q, r = poly_divmod(self.coeffs, other.coeffs)
        return IntPoly(tuple(q)), IntPoly(tuple(r))

    def divides(self, other: "IntPoly") -> bool:
        return other.divmod(self)[1].coeffs == (0,)

    def __str__(self) -> str:
        terms = []
        for e in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if e == 0:
                body = f"{a}"
            else:
                mon = "x" if e == 1 else f"x^{e}"
                body = mon if a == 1 else f"{a}{mon}"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


X_MINUS_1 = IntPoly((-1, 1))


# ---------------------------------------------------------------------------
# M_n and its characteristic polynomial
# ---------------------------------------------------------------------------

def build_M(n: int) -> np.ndarray:
    """The (n+1)/2 square 0/1 matrix with z^T M = mu z^T, z = (s_0, ..., s_h)."""
    check_n(n)
    h = (n - 1) // 2
    M = np.zeros((h + 1, h + 1), dtype=np.int64)
    for j in range(h + 1):
        M[j, 0] = 1 if j % 2 == 0 else 0
    for k in range(1, h + 1):
        M[: h - k + 1, k] = 1
    return M


def char_poly(M) -> IntPoly:
    """det(M - xI) by fraction-free (Bareiss) elimination over Z[x]."""
    A = np.asarray(M)
    size = A.shape[0]
    if A.shape != (size, size):
        raise ValueError("matrix must be square")
    if size == 0:
        return IntPoly((1,))
    # entries are coefficient lists in x
    a = [[[int(A[i, j])] + ([-1] if i == j else []) for j in range(size)] for i in range(size)]
    prev = [1]
    sign = 1
    for k in range(size - 1):
        if a[k][k] == [0] or not any(a[k][k]):
            swap = next((r for r in range(k + 1, size) if any(a[r][k])), None)
            if swap is None:
                return IntPoly((0,))
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = _psub(poly_mul(a[i][j], a[k][k]), poly_mul(a[i][k], a[k][j]))
                q, r = poly_divmod(num, prev)
                if any(r):
                    raise ConsistencyError("Bareiss division left a remainder")
                a[i][j] = q
            a[i][k] = [0]
        prev = a[k][k]
    det = a[size - 1][size - 1]
    return IntPoly(tuple(sign * c for c in det))


def _psub(p: Sequence[int], q: Sequence[int]) -> list[int]:
    m = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(m)]


def q_poly(n: int) -> IntPoly:
    """q_n with p_n = -(x-1) q_n."""
    p = char_poly(build_M(n))
    q, r = (-p).divmod(X_MINUS_1)
    if r.coeffs != (0,):
        raise ConsistencyError("p_n is not divisible by (x - 1)")
    return q


# ---------------------------------------------------------------------------
# minimal polynomial by exact linear dependence in the ring
# ---------------------------------------------------------------------------

def _solve_rational(rows: list[list[int]], target: list[int]) -> list[Fraction] | None:
    """Solve sum_i c_i rows[i] = target over Q; None if inconsistent.

    rows[i] are vectors of equal length; the system is overdetermined in general.
    """
    m = len(rows)
    dim = len(target)
    # augmented matrix with one equation per coordinate
    A = [[Fraction(rows[i][t]) for i in range(m)] + [Fraction(target[t])] for t in range(dim)]
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, dim) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(dim):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, dim):
        if A[i][m] != 0:
            return None
    sol = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        sol[c] = A[i][m]
    return sol


@lru_cache(maxsize=None)
def _mu_powers(n: int, count: int) -> tuple[tuple[int, ...], ...]:
    m = mu(n)
    out = []
    cur = s_value(n, 0)
    for _ in range(count):
        out.append(cur.coeffs)
        cur = cur * m
    return tuple(out)


@lru_cache(maxsize=None)
def minimal_poly(n: int) -> IntPoly:
    """g_n: the monic integer polynomial of least degree vanishing at mu_n."""
    check_n(n)
    dim = len(s_value(n, 0).coeffs)
    for d in range(1, dim + 1):
        pw = _mu_powers(n, d + 1)
        sol = _solve_rational([list(v) for v in pw[:d]], list(pw[d]))
        if sol is None:
            continue
        # mu^d = sum sol_i mu^i, so g = x^d - sum sol_i x^i
        if any(c.denominator != 1 for c in sol):
            raise ConsistencyError("mu_n is not integral over Z")
        g = IntPoly(tuple(-int(c) for c in sol) + (1,))
        if not g.divides(char_poly(build_M(n))):
            raise ConsistencyError("g_n does not divide the characteristic polynomial")
        if abs(g(mu_float(n))) > 1e-9 * max(1.0, mu_float(n) ** d):
            raise ConsistencyError("g_n does not vanish at mu_n")
        return g
    raise ConsistencyError("no linear dependence found among powers of mu_n")


def degree(n: int) -> int:
    return minimal_poly(n).degree


def companion(g: IntPoly) -> np.ndarray:
    """Companion matrix: ones on the subdiagonal, last column = -low coefficients."""
    if not g.is_monic():
        raise ValueError("companion matrix needs a monic polynomial")
    d = g.degree
    G = np.zeros((d, d), dtype=object)
    G[:, :] = 0
    for i in range(1, d):
        G[i, i - 1] = 1
    for i in range(d):
        G[i, d - 1] = -g.coeffs[i]
    return G


def companion_matrix(n: int) -> np.ndarray:
    return companion(minimal_poly(n))


# ---------------------------------------------------------------------------
# conjugates and eigenvectors
# ---------------------------------------------------------------------------

# mu_{n,2} = sign / s_{n,j}
_MU2_FORM = {13: (-1, 5), 17: (-1, 7), 21: (1, 8)}


def conjugate_mu2(n: int) -> float:
    """The conjugate of mu_n of largest modulus after mu_n itself."""
    check_n(n)
    sign, j = _MU2_FORM[n]
    closed = sign / float(s_value(n, j))
    g = minimal_poly(n)
    if abs(g(closed)) > 1e-6:
        raise ConsistencyError(f"mu_{{n,2}} residual too large for n={n}")
    roots = np.roots(list(reversed(g.coeffs)))
    m = mu_float(n)
    rest = sorted((r for r in roots if abs(r - m) > 1e-6), key=lambda r: -abs(r))
    if abs(rest[0] - closed) > 1e-8:
        raise ConsistencyError("closed form is not the dominant conjugate")
    return closed


def left_eigvec_v2(n: int) -> np.ndarray:
    """v = (mu2^{-(d-1)}, ..., mu2^{-1}, 1), a left eigenvector of G_n for mu_{n,2}."""
    m2 = conjugate_mu2(n)
    d = degree(n)
    v = np.array([m2 ** (-(d - 1 - i)) for i in range(d)], dtype=float)
    G = companion_matrix(n).astype(float)
    if np.max(np.abs(v @ G - m2 * v)) > 1e-6:
        raise ConsistencyError("v_{n,2} is not a left eigenvector")
    return v


def root_census(n: int) -> list[dict]:
    """Check the +-1/s_{n,j} eigenvalue pattern against p_n and g_n."""
    h = (n - 1) // 2
    p = char_poly(build_M(n))
    g = minimal_poly(n)
    rows = []
    for j in range(h + 1):
        sign = (-1) ** (h - j)
        val = sign / float(s_value(n, j))
        rows.append({
            "j": j,
            "value": val,
            "p_residual": abs(p(val)),
            "root_of_p": abs(p(val)) < 1e-6,
            "root_of_g": abs(g(val)) < 1e-6,
        })
    return rows


# ---------------------------------------------------------------------------
# coordinates in the basis 1, mu, ..., mu^{d-1}
# ---------------------------------------------------------------------------

def module_vec(n: int, entries: Iterable[int]) -> np.ndarray:
    """An integer vector of length d_n (object dtype, so entries never overflow)."""
    arr = np.array([int(x) for x in entries], dtype=object)
    if arr.shape != (degree(n),):
        raise ValueError(f"module vectors for n={n} have length {degree(n)}")
    return arr


@lru_cache(maxsize=None)
def _y(n: int, j: int) -> tuple[int, ...]:
    d = degree(n)
    pw = _mu_powers(n, d)
    sol = _solve_rational([list(v) for v in pw], list(s_value(n, j).coeffs))
    if sol is None or any(c.denominator != 1 for c in sol):
        raise ConsistencyError(f"s_{{{n},{j}}} is not in Z[mu_n]")
    return tuple(int(c) for c in sol)


def cyc_to_module(x) -> np.ndarray:
    """Coordinates of a ring element of Z[mu_n] in the power basis of mu_n."""
    n = x.n
    d = degree(n)
    sol = _solve_rational([list(v) for v in _mu_powers(n, d)], list(x.coeffs))
    if sol is None or any(c.denominator != 1 for c in sol):
        raise ConsistencyError("element is not in Z[mu_n]")
    return module_vec(n, [int(c) for c in sol])


def y_vec(n: int, j: int) -> np.ndarray:
    """Coordinates of s_{n,j} in the power basis of mu_n (zero-padded)."""
    check_n(n)
    if j not in index_set(n):
        raise ValueError(f"j={j} outside 0..{(n - 1) // 2}")
    y = module_vec(n, _y(n, j))
    err = abs(module_embed(n, y) - float(s_value(n, j)))
    if err > 1e-9:
        raise ConsistencyError("y_vec failed the float check")
    return y


def h_poly(n: int, j: int) -> IntPoly:
    """h_{n,j} with h_{n,j}(mu_n) = s_{n,j}."""
    return IntPoly(tuple(y_vec(n, j)))


def to_module(n: int, combo: Mapping[int, int] | Iterable[int]) -> np.ndarray:
    """Module vector of sum_j c_j s_{n,j}.

    ``combo`` is either a mapping j -> c_j or an iterable of indices (a multiset).
    """
    if isinstance(combo, Mapping):
        items = combo.items()
    else:
        counts: dict[int, int] = {}
        for j in combo:
            counts[j] = counts.get(j, 0) + 1
        items = counts.items()
    out = module_vec(n, [0] * degree(n))
    for j, c in items:
        if c:
            out = out + int(c) * y_vec(n, j)
    return out


def module_embed(n: int, w) -> float:
    m = mu_float(n)
    return float(sum(float(c) * m ** i for i, c in enumerate(w)))


def v_dot_y(n: int) -> dict[int, float]:
    v = left_eigvec_v2(n)
    return {j: float(v @ y_vec(n, j).astype(float)) for j in index_set(n)}


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def algebra_report(n: int) -> dict:
    """Everything the algebra checks produce for one n, as plain JSON data."""
    M = build_M(n)
    p = char_poly(M)
    q = q_poly(n)
    g = minimal_poly(n)
    m2 = conjugate_mu2(n)
    v = left_eigvec_v2(n)
    G = companion(g)
    checks = {}
    checks["p_equals_minus_x_minus_1_times_q"] = (-(X_MINUS_1 * q)).coeffs == p.coeffs
    checks["g_divides_p"] = g.divides(p)
    checks["g_vanishes_at_mu"] = abs(g(mu_float(n))) < 1e-9
    checks["non_pisot"] = abs(m2) > 1
    h_rows = []
    for j in index_set(n):
        hj = h_poly(n, j)
        res = abs(hj(mu_float(n)) - float(s_value(n, j)))
        h_rows.append({"j": j, "h": list(hj.coeffs), "residual": res, "ok": res < 1e-9})
    checks["h_polys"] = all(r["ok"] for r in h_rows)
    vy = v_dot_y(n)
    census = root_census(n)
    return {
        "n": n,
        "M": M.tolist(),
        "char_poly": list(p.coeffs),
        "q": list(q.coeffs),
        "q_str": str(q),
        "minimal_poly": list(g.coeffs),
        "minimal_poly_str": str(g),
        "degree": g.degree,
        "companion": [[int(x) for x in row] for row in G],
        "mu": mu_float(n),
        "mu2": m2,
        "v2": v.tolist(),
        "h": h_rows,
        "v_dot_y": {str(j): val for j, val in vy.items()},
        "root_census": census,
        "checks": checks,
        "ok": all(checks.values()),
    }

