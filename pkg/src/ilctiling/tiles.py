"""Prototiles, placed tiles, patches and exact geometric predicates.

A placed tile is the image of a canonical prototile under
    z -> zeta^rot * (conj(z) if reflected else z) + trans,
with rot in units of pi/(2n).  The reflected flag doubles as the marking.

Patches keep their tiles in parallel numpy arrays so the engine can inflate
thousands of tiles at once; coordinates stay exact (integer coefficient rows).
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .exactring import CycInt, check_n, from_row, ring, s_value, zeta_pow


@dataclass(frozen=True)
class Prototile:
    n: int
    k: int

    def __post_init__(self):
        check_n(self.n)
        if not 1 <= self.k <= (self.n - 1) // 2:
            raise ValueError(f"prototile index k={self.k} out of range for n={self.n}")

    @property
    def base_len(self) -> CycInt:
        return s_value(self.n, self.k)

    @property
    def leg_len(self) -> int:
        return 1

    @property
    def apex_angle(self) -> int:
        """Apex angle in units of pi/n."""
        return self.n - 2 * self.k

    @property
    def base_angle(self) -> int:
        return self.k

    def vertices(self) -> tuple[CycInt, CycInt, CycInt]:
        """(base start, base end, apex) in canonical pose."""
        return CycInt.zero(self.n), self.base_len, zeta_pow(self.n, 2 * self.k)

    def area(self) -> float:
        return 0.5 * float(self.base_len) * float(np.sin(np.pi * self.k / self.n))


def prototiles(n: int) -> list[Prototile]:
    return [Prototile(n, k) for k in range(1, (n - 1) // 2 + 1)]


@dataclass(frozen=True)
class PlacedTile:
    n: int
    k: int
    rot: int
    reflected: bool
    trans: CycInt

    def __post_init__(self):
        object.__setattr__(self, "rot", self.rot % (4 * self.n))

    @property
    def proto(self) -> Prototile:
        return Prototile(self.n, self.k)

    def apply(self, z: CycInt) -> CycInt:
        w = z.conj() if self.reflected else z
        return w.rotate(self.rot) + self.trans

    def key(self) -> tuple:
        return (self.k, self.rot, bool(self.reflected), self.trans.coeffs)


def place(n: int, k: int, rot: int = 0, reflected: bool = False, trans: CycInt | None = None) -> PlacedTile:
    if trans is None:
        trans = CycInt.zero(n)
    return PlacedTile(n, k, rot, bool(reflected), trans)


def vertices(t: PlacedTile) -> tuple[CycInt, CycInt, CycInt]:
    return tuple(t.apply(v) for v in t.proto.vertices())  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# vectorised helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def canonical_vertex_rows(n: int) -> np.ndarray:
    """Array [k, 3, D]: canonical vertices of each prototile (row 0 unused)."""
    R = ring(n)
    h = (n - 1) // 2
    out = np.zeros((h + 1, 3, R.dim), dtype=np.int64)
    for k in range(1, h + 1):
        for i, v in enumerate(Prototile(n, k).vertices()):
            out[k, i] = v.coeffs
    return out


@lru_cache(maxsize=None)
def pose_matrices(n: int) -> np.ndarray:
    """Array [2, 4n, D, D]: row-vector matrix of z -> zeta^r * (conj z if f)."""
    R = ring(n)
    out = np.zeros((2, R.order, R.dim, R.dim), dtype=np.int64)
    out[0] = R.rot_mats
    for r in range(R.order):
        out[1, r] = R.conj_mat @ R.rot_mats[r]
    return out


def _as_exact(a: np.ndarray) -> np.ndarray:
    """Promote to Python-int objects when int64 headroom gets thin."""
    if a.dtype != object and a.size and np.abs(a).max() > 2**40:
        return a.astype(object)
    return a


def apply_pose_rows(n: int, rows: np.ndarray, rot: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Apply z -> zeta^rot_i (conj z if ref_i) to rows[i] (shape [N, ..., D])."""
    P = pose_matrices(n)
    rows = _as_exact(rows)
    out = np.zeros_like(rows)
    rot = np.asarray(rot) % (4 * n)
    ref = np.asarray(ref).astype(np.int64)
    for f, r in set(zip(ref.tolist(), rot.tolist())):
        sel = (ref == f) & (rot == r)
        mat = P[f, r] if rows.dtype != object else P[f, r].astype(object)
        out[sel] = rows[sel] @ mat
    return out


class Patch:
    """A finite set of placed tiles stored column-wise."""

    def __init__(self, n: int, k, rot, ref, trans):
        self.n = check_n(n)
        D = ring(n).dim
        self.k = np.asarray(k, dtype=np.int64).reshape(-1)
        self.rot = np.asarray(rot, dtype=np.int64).reshape(-1) % (4 * n)
        self.ref = np.asarray(ref, dtype=bool).reshape(-1)
        trans = np.asarray(trans)
        if trans.size == 0:
            trans = np.zeros((0, D), dtype=np.int64)
        self.trans = _as_exact(trans.reshape(-1, D))
        if not (len(self.k) == len(self.rot) == len(self.ref) == len(self.trans)):
            raise ValueError("patch columns have different lengths")

    # -- construction ------------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "Patch":
        return cls(n, [], [], [], np.zeros((0, ring(n).dim), dtype=np.int64))

    @classmethod
    def from_tiles(cls, n: int, tiles: Iterable[PlacedTile]) -> "Patch":
        tiles = list(tiles)
        if not tiles:
            return cls.empty(n)
        rows = [t.trans.coeffs for t in tiles]
        big = max(abs(c) for r in rows for c in r)
        trans = np.array(rows, dtype=np.int64 if big < 2**40 else object)
        return cls(n, [t.k for t in tiles], [t.rot for t in tiles], [t.reflected for t in tiles], trans)

    @staticmethod
    def concat(patches: list["Patch"]) -> "Patch":
        n = patches[0].n
        trans = [p.trans for p in patches]
        if any(t.dtype == object for t in trans):
            trans = [t.astype(object) for t in trans]
        return Patch(
            n,
            np.concatenate([p.k for p in patches]),
            np.concatenate([p.rot for p in patches]),
            np.concatenate([p.ref for p in patches]),
            np.concatenate(trans) if trans else np.zeros((0, ring(n).dim), dtype=np.int64),
        )

    def subset(self, idx) -> "Patch":
        idx = np.asarray(idx)
        return Patch(self.n, self.k[idx], self.rot[idx], self.ref[idx], self.trans[idx])

    # -- access --------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.k)

    def tile(self, i: int) -> PlacedTile:
        return PlacedTile(self.n, int(self.k[i]), int(self.rot[i]), bool(self.ref[i]), from_row(self.n, self.trans[i]))

    def __iter__(self) -> Iterator[PlacedTile]:
        for i in range(len(self)):
            yield self.tile(i)

    def keys(self) -> list[tuple]:
        return [
            (int(k), int(r), bool(f), tuple(int(c) for c in t))
            for k, r, f, t in zip(self.k, self.rot, self.ref, self.trans)
        ]

    def key_set(self) -> set:
        return set(self.keys())

    def counts(self) -> np.ndarray:
        """Number of tiles of each prototile index (index 0 unused)."""
        return np.bincount(self.k, minlength=(self.n - 1) // 2 + 1)

    # -- geometry -------------------------------------------------------------
    def vertex_rows(self) -> np.ndarray:
        """Exact vertices, shape [N, 3, D]."""
        canon = canonical_vertex_rows(self.n)[self.k]
        out = apply_pose_rows(self.n, canon, self.rot, self.ref)
        return out + self.trans[:, None, :]

    def vertices_complex(self) -> np.ndarray:
        rows = self.vertex_rows().astype(float)
        return rows @ ring(self.n).basis_complex

    def area(self) -> float:
        return float(sum(Prototile(self.n, int(k)).area() for k in self.k))

    # -- serialisation ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "tiles": [
                {"k": int(k), "rot": int(r), "reflected": bool(f), "trans": [int(c) for c in t]}
                for k, r, f, t in zip(self.k, self.rot, self.ref, self.trans)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Patch":
        n = int(data["n"])
        tiles = [
            PlacedTile(n, int(t["k"]), int(t["rot"]), bool(t["reflected"]), CycInt(n, tuple(int(c) for c in t["trans"])))
            for t in data["tiles"]
        ]
        return cls.from_tiles(n, tiles)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self) -> str:
        return f"Patch(n={self.n}, tiles={len(self)})"


# ---------------------------------------------------------------------------
# edge types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class EdgeType:
    """Relative pose of the second tile in the frame of the first."""

    k_a: int
    k_b: int
    rel_rot: int
    rel_ref: bool
    offset: tuple[int, ...]


def _relative(a: PlacedTile, b: PlacedTile) -> EdgeType:
    delta = (b.trans - a.trans).rotate(-a.rot)
    if a.reflected:
        rel_rot = a.rot - b.rot
        off = delta.conj()
    else:
        rel_rot = b.rot - a.rot
        off = delta
    return EdgeType(a.k, b.k, rel_rot % (4 * a.n), a.reflected != b.reflected, off.coeffs)


def _mirror(t: PlacedTile) -> PlacedTile:
    """Same triangle, opposite marking: compose with z -> s_k - conj(z)."""
    s = s_value(t.n, t.k)
    # f(s - conj z) = zeta^r c(s) - zeta^r c(conj z) + t
    shift = (s.conj() if t.reflected else s).rotate(t.rot)
    return PlacedTile(t.n, t.k, t.rot + 2 * t.n, not t.reflected, t.trans + shift)


def canonical_edge_type(a: PlacedTile, b: PlacedTile, markings: bool = True, check: bool = True) -> EdgeType:
    """Canonical form of the two-tile patch {a, b} up to isometry.

    With ``markings`` the marking (reflected flag) is part of the tile; without
    it each tile's own mirror symmetry is quotiented out too.
    """
    if check and not share_segment(a, b):
        raise ValueError("tiles do not share a boundary segment")
    if markings:
        cands = [_relative(a, b), _relative(b, a)]
    else:
        fa, fb = (a, _mirror(a)), (b, _mirror(b))
        cands = [_relative(x, y) for x in fa for y in fb] + [_relative(y, x) for x in fa for y in fb]
    return min(cands)


# ---------------------------------------------------------------------------
# lines, adjacency and misfits
# ---------------------------------------------------------------------------

def _edge_dirs(n: int, k: np.ndarray, rot: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Directions (units pi/2n, mod 4n) of edges v0->v1, v1->apex, apex->v0."""
    base = np.stack([np.zeros_like(k), 2 * (n - k), 2 * (n + k)], axis=1)
    sign = np.where(ref, -1, 1)[:, None]
    return (rot[:, None] + sign * base) % (4 * n)


def _line_frame(n: int, rows: np.ndarray, dirs: np.ndarray):
    """For points rows[i] on lines of direction dirs[i] (mod 2n), return the exact
    line offset (x - conj x) and the exact position (x + conj x), x = p * zeta^{-dir}."""
    R = ring(n)
    dirs = dirs % (2 * n)
    x = apply_pose_rows(n, rows, (-dirs) % (4 * n), np.zeros(len(dirs), dtype=bool))
    xc = x @ (R.conj_mat.astype(object) if x.dtype == object else R.conj_mat)
    return x - xc, x + xc


def _row_key(row) -> bytes | tuple:
    if isinstance(row, np.ndarray) and row.dtype != object:
        return row.tobytes()
    return tuple(int(c) for c in row)


@dataclass
class _Edge:
    tile: int
    side: int
    lo: float
    hi: float
    lo_exact: object
    hi_exact: object
    forward: bool = True  # counterclockwise traversal of the tile runs lo -> hi


def _edges_by_line(p: Patch):
    n = p.n
    N = len(p)
    if N == 0:
        return {}
    V = p.vertex_rows()
    dirs = _edge_dirs(n, p.k, p.rot, p.ref)
    starts = V.reshape(N * 3, -1)
    ends = V[:, [1, 2, 0], :].reshape(N * 3, -1)
    d = dirs.reshape(-1)
    off_s, pos_s = _line_frame(n, starts, d)
    _, pos_e = _line_frame(n, ends, d)
    basis = ring(n).basis_complex
    fs = (pos_s.astype(float) @ basis).real
    fe = (pos_e.astype(float) @ basis).real
    groups: dict = defaultdict(list)
    for e in range(N * 3):
        key = (int(d[e] % (2 * n)), _row_key(off_s[e]))
        a, b = (fs[e], fe[e])
        ea, eb = pos_s[e], pos_e[e]
        fwd = a < b
        if a > b:
            a, b, ea, eb = b, a, eb, ea
        groups[key].append(_Edge(e // 3, e % 3, a, b, ea, eb, fwd != bool(p.ref[e // 3])))
    return groups


_TOL = 1e-7


def _strictly_less(a: float, b: float, ea, eb) -> bool:
    if b - a > _TOL:
        return True
    if a - b > _TOL:
        return False
    return not np.array_equal(np.asarray(ea, dtype=object), np.asarray(eb, dtype=object)) and a < b


def adjacent_pairs(p: Patch) -> list[tuple[int, int]]:
    """Index pairs of tiles whose edges overlap in a segment of positive length."""
    pairs = set()
    for edges in _edges_by_line(p).values():
        if len(edges) < 2:
            continue
        edges.sort(key=lambda e: e.lo)
        for i, e in enumerate(edges):
            for f in edges[i + 1:]:
                if not _strictly_less(f.lo, e.hi, f.lo_exact, e.hi_exact):
                    break
                if e.tile != f.tile:
                    pairs.add((min(e.tile, f.tile), max(e.tile, f.tile)))
    return sorted(pairs)


def share_segment(a: PlacedTile, b: PlacedTile) -> bool:
    return bool(adjacent_pairs(Patch.from_tiles(a.n, [a, b])))


def find_misfit_vertices(p: Patch) -> list[CycInt]:
    """Tile vertices lying strictly inside an edge of another tile."""
    n = p.n
    N = len(p)
    if N < 2:
        return []
    groups = _edges_by_line(p)
    V = p.vertex_rows()
    flat = V.reshape(N * 3, -1)
    uniq: dict = {}
    for i in range(N * 3):
        uniq.setdefault(_row_key(flat[i]), i)
    idx = np.array(sorted(uniq.values()))
    pts = flat[idx]
    basis = ring(n).basis_complex
    found: dict = {}
    for cls in sorted({key[0] for key in groups}):
        d = np.full(len(pts), cls, dtype=np.int64)
        off, pos = _line_frame(n, pts, d)
        fpos = (pos.astype(float) @ basis).real
        for i in range(len(pts)):
            edges = groups.get((cls, _row_key(off[i])))
            if not edges:
                continue
            for e in edges:
                if _strictly_less(e.lo, fpos[i], e.lo_exact, pos[i]) and _strictly_less(fpos[i], e.hi, pos[i], e.hi_exact):
                    found[_row_key(pts[i])] = pts[i]
                    break
    return [from_row(n, row) for row in found.values()]


def edge_type_census(p: Patch, markings: bool = True) -> Counter:
    census: Counter = Counter()
    tiles = list(p)
    for i, j in adjacent_pairs(p):
        census[canonical_edge_type(tiles[i], tiles[j], markings=markings, check=False)] += 1
    return census
