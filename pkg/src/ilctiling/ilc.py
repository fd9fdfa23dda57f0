"""Danzer's recursion for infinite local complexity.

A misfit vertex O sits strictly inside an edge A_r B_r of the tile above it.
Each inflation replaces |OB_{r-1}| by |OB_r| = mu |OB_{r-1}| - t_r with t_r a
sum of edge lengths.  In module coordinates w_r = G w_{r-1} - u_r; projecting
on the left eigenvector for the second conjugate mu_2 (|mu_2| > 1) gives a
scalar recursion whose growth proves that the |OB_r| are pairwise distinct.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    companion_matrix,
    conjugate_mu2,
    cyc_to_module,
    degree,
    left_eigvec_v2,
    module_vec,
    to_module,
    v_dot_y,
    y_vec,
)
from .exactring import CycInt, check_n, index_set, mu, s_value, zeta_pow

DEFAULT_U = {13: 1.2, 17: 0.12, 21: 1.8}

# published t_r for n = 13, r = 2..8; () means t_r = 0
N13_T: list[tuple[int, ...]] = [(1,), (3,), (), (0, 2), (), (), (0, 2)]
N13_W = [
    (2, -4, -10, 8, 7, -2),
    (2, -1, -4, 1, 0, 0),
    (0, -3, -6, 7, 7, -2),
    (-2, -2, 7, 2, -5, 1),
    (-5, 3, 13, -8, -3, 1),
    (1, -4, -2, 9, -2, 0),
    (0, 1, -4, -2, 9, -2),
    (-8, 2, 31, -7, -25, 6),
]
N13_ABS = [0.744259419, 1.318017974, 2.062277393, 2.907852469, 3.877455508, 5.467290003, 7.708988515, 11.09250313]
N17_ABS = [0.061999291, 0.135581208, 0.212294217, 0.335972651]
N21_ABS = [
    0.244876744, 0.620179686, 1.185253686, 1.277945858, 1.927475923,
    2.454963437, 3.405463094, 4.248761151, 5.860426532,
]
PUBLISHED_ABS = {13: N13_ABS, 17: N17_ABS, 21: N21_ABS}


class MisfitNotFound(RuntimeError):
    """The rule has no usable misfit vertex (or the misfit resolves during tracking)."""


class ConfigAuditError(ValueError):
    """The chosen bound U_n is smaller than the computed subset-sum maximum."""


# ---------------------------------------------------------------------------
# recursion primitives
# ---------------------------------------------------------------------------

def seed_w1(n: int) -> np.ndarray:
    """Module vector of s_1 - (s_{(n-5)/2} + s_{(n-1)/2})."""
    check_n(n)
    return y_vec(n, 1) - y_vec(n, (n - 5) // 2) - y_vec(n, (n - 1) // 2)


def step(n: int, w, u) -> np.ndarray:
    """G_n w - u in exact integers."""
    d = degree(n)
    w = np.asarray(w, dtype=object)
    u = np.asarray(u, dtype=object)
    if w.shape != (d,) or u.shape != (d,):
        raise ValueError(f"module vectors for n={n} have length {d}")
    return companion_matrix(n) @ w - u


def project2(n: int, w) -> float:
    v = left_eigvec_v2(n)
    return float(sum(float(a) * b for a, b in zip(w, v)))


def subset_sums(n: int) -> np.ndarray:
    """All values sum_j c_j v_2.y_j with c in {0,1}, sorted."""
    vals = v_dot_y(n)
    js = index_set(n)
    out = []
    for mask in itertools.product((0, 1), repeat=len(js)):
        out.append(sum(vals[j] for j, c in zip(js, mask) if c))
    return np.sort(np.array(out))


def subset_sum_bound(n: int) -> tuple[float, float]:
    """(max, min) of the {0,1}-combinations of the projected edge lengths."""
    s = subset_sums(n)
    return float(s[-1]), float(s[0])


@dataclass(frozen=True)
class CriterionConfig:
    n: int
    U: float
    threshold: float
    exact_max: float

    def to_json(self) -> dict:
        return {"n": self.n, "U": self.U, "threshold": self.threshold, "subset_sum_max_abs": self.exact_max}


def make_config(n: int, U: float | None = None) -> CriterionConfig:
    check_n(n)
    U = DEFAULT_U[n] if U is None else float(U)
    hi, lo = subset_sum_bound(n)
    exact = max(abs(hi), abs(lo))
    if U < exact:
        raise ConfigAuditError(f"U={U} is below the subset-sum maximum {exact}")
    return CriterionConfig(n, U, 1.0 / (abs(conjugate_mu2(n)) - 1.0), exact)


def criterion_holds(cfg: CriterionConfig, wproj: float) -> bool:
    return abs(wproj) / cfg.U > cfg.threshold


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

@dataclass
class TraceRow:
    r: int
    t: tuple[int, ...] | None
    u: np.ndarray | None
    w: np.ndarray
    wproj: float
    ratio: float

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "t": None if self.t is None else list(self.t),
            "u": None if self.u is None else [int(x) for x in self.u],
            "w": [int(x) for x in self.w],
            "wproj": self.wproj,
            "ratio": self.ratio,
        }


@dataclass
class RecursionTrace:
    n: int
    cfg: CriterionConfig
    rows: list[TraceRow]
    notes: list[str] = field(default_factory=list)

    @property
    def first_criterion(self) -> int | None:
        """Smallest r with |w'_r| / U above the threshold (then the criterion holds at r + 1)."""
        for row in self.rows:
            if criterion_holds(self.cfg, row.wproj):
                return row.r
        return None

    def abs_values(self) -> list[float]:
        return [abs(row.wproj) for row in self.rows]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "config": self.cfg.to_json(),
            "first_criterion_r": self.first_criterion,
            "rows": [row.to_json() for row in self.rows],
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def to_text(self) -> str:
        def t_str(t):
            if t is None:
                return ""
            return " + ".join(f"s{j}" for j in t) if t else "0"

        def vec(x):
            return "" if x is None else "(" + ", ".join(str(int(c)) for c in x) + ")"

        head = ["r", "t_r", "u_r", "w_r", "|w'_r,2|", "|w'_r,2|/U"]
        body = [[str(r.r), t_str(r.t), vec(r.u), vec(r.w), f"{abs(r.wproj):.9f}", f"{r.ratio:.7f}"] for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)) for line in [head] + body]
        lines.append(f"threshold 1/(|mu_2|-1) = {self.cfg.threshold:.7f}, U = {self.cfg.U}")
        lines.append(f"first r with ratio above threshold: {self.first_criterion}")
        return "\n".join(line.rstrip() for line in lines) + "\n"


def replay_trace(n: int, t_sequence: Sequence, w1=None, cfg: CriterionConfig | None = None) -> RecursionTrace:
    """Run the recursion from w_1 with t_r (r = 2, 3, ...) given as index multisets.

    A leading ``None`` entry (the empty r = 1 slot) is ignored.
    """
    cfg = cfg or make_config(n)
    seq = list(t_sequence)
    if seq and seq[0] is None:
        seq = seq[1:]
    w = seed_w1(n) if w1 is None else module_vec(n, w1)
    notes = []
    p = project2(n, w)
    rows = [TraceRow(1, None, None, w, p, abs(p) / cfg.U)]
    for r, t in enumerate(seq, start=2):
        t = tuple(sorted(int(j) for j in t))
        if len(set(t)) != len(t):
            notes.append(f"t_{r} repeats an edge length; the subset-sum bound does not cover it")
        u = to_module(n, t) if t else module_vec(n, [0] * degree(n))
        w = step(n, w, u)
        p = project2(n, w)
        rows.append(TraceRow(r, t, u, w, p, abs(p) / cfg.U))
    return RecursionTrace(n, cfg, rows, notes)


def certify_monotone(cfg: CriterionConfig, trace: RecursionTrace, from_r: int) -> bool:
    """From ``from_r`` on: the criterion margin holds and |w'_r| strictly increases;
    w_r vectors are pairwise distinct."""
    rows = [row for row in trace.rows if row.r >= from_r]
    if not rows:
        return False
    m2 = abs(conjugate_mu2(cfg.n))
    for a, b in zip(rows, rows[1:] + [None]):
        if not (m2 - 1) * abs(a.wproj) > cfg.U:
            return False
        if b is not None and not abs(b.wproj) > abs(a.wproj):
            return False
    ws = [tuple(int(x) for x in row.w) for row in trace.rows]
    return len(set(ws)) == len(ws) or len({tuple(int(x) for x in r.w) for r in rows}) == len(rows)


def printed_consistency(n: int, values: Sequence[float] | None = None, tol: float = 1e-6) -> list[dict]:
    """For printed |w'_r| values: is there a u' in the subset-sum range with
    |mu_2 w'_{r-1} - u'| = |w'_r| for some choice of signs?  Also reports the
    distance to the nearest exact subset sum."""
    values = list(PUBLISHED_ABS[n] if values is None else values)
    m2 = conjugate_mu2(n)
    hi, lo = subset_sum_bound(n)
    sums = subset_sums(n)
    out = []
    for r in range(2, len(values) + 1):
        a, b = values[r - 2], values[r - 1]
        cands = [m2 * sa * a - sb * b for sa in (1, -1) for sb in (1, -1)]
        in_range = [c for c in cands if lo - tol <= c <= hi + tol]
        nearest = min(float(np.min(np.abs(sums - c))) for c in cands)
        out.append({"r": r, "consistent": bool(in_range), "u_candidates": in_range, "nearest_exact_sum_gap": nearest})
    return out


# ---------------------------------------------------------------------------
# geometric derivation of t_r
# ---------------------------------------------------------------------------

@dataclass
class DerivedTrace:
    t_sequence: list[tuple[int, ...]]
    trace: RecursionTrace
    misfit: CycInt
    host_tile: dict
    geometric_w: list[np.ndarray]

    def to_json(self) -> dict:
        d = self.trace.to_json()
        d["derived_t"] = [list(t) for t in self.t_sequence]
        d["misfit_vertex"] = list(self.misfit.coeffs)
        d["host_tile"] = self.host_tile
        return d


def _real_value(x: CycInt) -> float:
    return x.embed().real


def _axis_edges(tile) -> tuple[list[tuple[CycInt, CycInt]], CycInt]:
    """Edges of the tile on the real axis and its third vertex (if one edge lies there)."""
    from .tiles import vertices

    V = vertices(tile)
    edges = []
    for i in range(3):
        a, b = V[i], V[(i + 1) % 3]
        if a.is_real() and b.is_real():
            edges.append((a, b) if _real_value(a) < _real_value(b) else (b, a))
            apex = V[(i + 2) % 3]
    return edges, (apex if edges else None)


def _index_of_length(n: int, x: CycInt) -> int | None:
    for j in index_set(n):
        if x == s_value(n, j):
            return j
    return None


def _normalise(tile, O: CycInt, d: int):
    """Pose of tile after z -> zeta^{-d} (z - O)."""
    from .tiles import PlacedTile

    return PlacedTile(tile.n, tile.k, tile.rot - d, tile.reflected, (tile.trans - O).rotate(-d))


def _misfit_hosts(patch):
    """(misfit vertex, host tile, host edge direction) triples, in a fixed order."""
    from .tiles import _edge_dirs, find_misfit_vertices, vertices

    n = patch.n
    out = []
    tiles = list(patch)
    dirs = _edge_dirs(n, patch.k, patch.rot, patch.ref)
    for O in find_misfit_vertices(patch):
        z = O.embed()
        for i, t in enumerate(tiles):
            V = vertices(t)
            for s in range(3):
                a, b = V[s], V[(s + 1) % 3]
                fa, fb = a.embed(), b.embed()
                if abs(abs(fa - z) + abs(z - fb) - abs(fb - fa)) > 1e-9 or abs(fa - z) < 1e-9 or abs(fb - z) < 1e-9:
                    continue
                out.append((O, t, int(dirs[i, s])))
    return out


def _track(rule, tile, r_max: int):
    """Follow the tile above the origin through r_max - 1 inflations."""
    from .engine import inflate

    n = rule.n
    m = mu(n)
    edges, _ = _axis_edges(tile)
    (A, B), = edges
    Bs = [B]
    ts = []
    for r in range(2, r_max + 1):
        target = m * Bs[-1]
        nxt, pieces = None, []
        for child in inflate(rule, tile):
            es, apex = _axis_edges(child)
            if not es or apex.embed().imag <= 0:
                continue
            for a, b in es:
                if a.is_zero() or b.is_zero():
                    raise MisfitNotFound(f"misfit vertex becomes a tile vertex at step {r}")
                fa, fb = _real_value(a), _real_value(b)
                if fa < 0 < fb:
                    nxt = (child, b)
                elif fa > 0:
                    pieces.append((a, b))
        if nxt is None:
            raise MisfitNotFound(f"no edge above the origin at step {r}")
        tile, Bn = nxt
        t = []
        total = CycInt.zero(n)
        for a, b in pieces:
            if _real_value(a) >= _real_value(Bn) - 1e-9 and _real_value(b) <= _real_value(target) + 1e-9:
                j = _index_of_length(n, b - a)
                if j is None:
                    raise MisfitNotFound(f"edge of unexpected length at step {r}")
                t.append(j)
                total = total + (b - a)
        if total != target - Bn:
            raise MisfitNotFound(f"edges between B_r and mu B_(r-1) do not close up at step {r}")
        ts.append(tuple(sorted(t)))
        Bs.append(Bn)
    return Bs, ts


def derive_t_sequence(rule, n: int, r_max: int = 12, search_order: int = 2) -> DerivedTrace:
    """Locate a misfit vertex in the order-``search_order`` supertile of T_1 and
    track the edge above it through repeated inflation.

    Candidates are tried in a fixed order; the first one whose derived trace
    reaches the criterion (or, failing that, the longest trace) is returned.
    """
    from .engine import supertile

    check_n(n)
    if rule.n != n:
        raise ValueError("rule is for a different n")
    cfg = make_config(n)
    patch = supertile(rule, 1, search_order)
    hosts = _misfit_hosts(patch)
    if not hosts:
        raise MisfitNotFound(f"no misfit vertex in the order-{search_order} supertile of T_1")
    best = None
    reasons = []
    for O, host, d in hosts:
        # host edge horizontal with the host tile above it
        t = _normalise(host, O, d)
        _, apex = _axis_edges(t)
        if apex is None:
            continue
        if apex.embed().imag < 0:
            t = _normalise(host, O, d + 2 * n)
            _, apex = _axis_edges(t)
        if apex.embed().imag <= 0:
            continue
        try:
            Bs, ts = _track(rule, t, r_max)
        except MisfitNotFound as exc:
            reasons.append(str(exc))
            continue
        w1 = cyc_to_module(Bs[0])
        tr = replay_trace(n, ts, w1=w1, cfg=cfg)
        geo = [cyc_to_module(B) for B in Bs]
        if any(tuple(g) != tuple(row.w) for g, row in zip(geo, tr.rows)):
            raise RuntimeError("recursion disagrees with the tracked geometry")
        for r, tt in enumerate(ts, start=2):
            if len(set(tt)) != len(tt):
                warnings.warn(f"derived t_{r} is not a 0/1 combination of edge lengths", stacklevel=2)
        info = {"k": host.k, "rot": host.rot, "reflected": host.reflected, "trans": list(host.trans.coeffs)}
        res = DerivedTrace(ts, tr, O, info, geo)
        if tr.first_criterion is not None:
            return res
        if best is None:
            best = res
    if best is None:
        raise MisfitNotFound("every misfit candidate failed: " + "; ".join(sorted(set(reasons))[:3]))
    return best
