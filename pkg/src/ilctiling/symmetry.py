"""Rotations, reflections, symmetry groups and the nested symmetric patches.

Isometries are z -> zeta^a z + b or z -> zeta^a conj(z) + b with zeta a
primitive 4n-th root of unity, so rotations come in steps of pi/2n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .engine import inflate_patch
from .exactring import CycInt, from_row, mu, s_value, unit
from .kskdissect import SubstitutionRule
from .tiles import Patch, PlacedTile, _mirror, adjacent_pairs, apply_pose_rows, vertices


@dataclass(frozen=True)
class Isometry:
    """z -> zeta^rot (conj z if reflected) + shift."""

    n: int
    rot: int
    reflected: bool
    shift: CycInt

    def apply(self, z: CycInt) -> CycInt:
        return (z.conj() if self.reflected else z).rotate(self.rot) + self.shift

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        rot = self.rot - other.rot if self.reflected else self.rot + other.rot
        return Isometry(self.n, rot % (4 * self.n), self.reflected != other.reflected, self.apply(other.shift))

    def key(self) -> tuple:
        return (self.rot % (4 * self.n), self.reflected, self.shift.coeffs)


def transform_patch(p: Patch, g: Isometry) -> Patch:
    n = p.n
    if g.reflected:
        rot = g.rot - p.rot
        ref = ~p.ref
    else:
        rot = g.rot + p.rot
        ref = p.ref.copy()
    trans = apply_pose_rows(n, p.trans, np.full(len(p), g.rot), np.full(len(p), g.reflected))
    shift = np.asarray(g.shift.coeffs, dtype=trans.dtype)
    return Patch(n, p.k, rot, ref, trans + shift)


def rotate_patch(p: Patch, k: int) -> Patch:
    """Rotate about the origin by k*pi/2n."""
    return transform_patch(p, Isometry(p.n, k % (4 * p.n), False, CycInt.zero(p.n)))


def reflect_patch(p: Patch, axis: int) -> Patch:
    """Reflect in the line through the origin at angle axis*pi/4n: z -> zeta^axis conj(z)."""
    return transform_patch(p, Isometry(p.n, axis % (4 * p.n), True, CycInt.zero(p.n)))


def _geometric_keys(p: Patch) -> set:
    """Tile keys with each tile's marking quotiented out."""
    out = set()
    for t in p:
        m = _mirror(t)
        out.add(min(t.key(), m.key()))
    return out


def _keyset(p: Patch, markings: bool) -> set:
    return p.key_set() if markings else _geometric_keys(p)


def symmetry_group(p: Patch, markings: bool = False) -> list[Isometry]:
    """All isometries with rotation part a multiple of pi/2n that map p onto itself.

    Translations are fixed by the vertex sum, so each of the 8n linear parts
    is tested once, exactly.  Without ``markings`` tiles are compared as
    triangles.
    """
    n = p.n
    if len(p) == 0:
        return []
    V = p.vertex_rows()
    S = np.asarray(V, dtype=object).sum(axis=(0, 1))
    S = from_row(n, S)
    N = 3 * len(p)
    target = _keyset(p, markings)
    out = []
    for reflected in (False, True):
        for a in range(4 * n):
            lin = Isometry(n, a, reflected, CycInt.zero(n))
            diff = S - lin.apply(S)
            if any(c % N for c in diff.coeffs):
                continue
            g = Isometry(n, a, reflected, CycInt(n, tuple(c // N for c in diff.coeffs)))
            if _keyset(transform_patch(p, g), markings) == target:
                out.append(g)
    return out


def is_group(elems: list[Isometry]) -> bool:
    keys = {g.key() for g in elems}
    return all(a.compose(b).key() in keys for a in elems for b in elems)


def contains(big: Patch, small: Patch, markings: bool = True) -> bool:
    return _keyset(small, markings) <= _keyset(big, markings)


# ---------------------------------------------------------------------------
# nesting
# ---------------------------------------------------------------------------

@dataclass
class NestingReport:
    seed: str
    rot: int
    iterations: int
    verdicts: list[bool]
    sizes: list[int]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "rot": self.rot,
            "iterations": self.iterations,
            "verdicts": self.verdicts,
            "sizes": self.sizes,
            "ok": self.ok,
            "notes": self.notes,
        }


def _parity_note(rule: SubstitutionRule, rot: int) -> str | None:
    # children of the canonical tiles have even rotations iff the rule preserves edge-direction parity
    if rot % 2 and all(t.rot % 2 == 0 for ts in rule.tiles.values() for t in ts):
        return (
            "the rule keeps every edge direction's parity (units pi/2n) and an odd rotation flips it, "
            "so no patch can lie inside its rotated inflation"
        )
    return None


def check_nesting(rule: SubstitutionRule, seed: Patch, rot: int, iterations: int = 3,
                  seed_name: str = "seed", markings: bool = True, max_tiles: int = 200000) -> NestingReport:
    """Test P_0 in P_1 in P_2 ... with P_{i+1} = R^rot sigma(P_i), exact containment."""
    verdicts, sizes = [], [len(seed)]
    notes = []
    note = _parity_note(rule, rot)
    if note:
        notes.append(note)
    cur = seed
    for _ in range(iterations):
        if len(cur) * 60 > max_tiles:
            notes.append("stopped early: patch size limit")
            break
        nxt = rotate_patch(inflate_patch(rule, cur), rot)
        verdicts.append(contains(nxt, cur, markings))
        sizes.append(len(nxt))
        cur = nxt
    return NestingReport(seed_name, rot, iterations, verdicts, sizes, notes)


def find_nesting_rotation(rule: SubstitutionRule, seed: Patch, markings: bool = True) -> int | None:
    """Smallest rotation exponent r with seed inside R^r sigma(seed)."""
    big = inflate_patch(rule, seed)
    for r in range(4 * rule.n):
        if contains(rotate_patch(big, r), seed, markings):
            return r
    return None


# ---------------------------------------------------------------------------
# growing the symmetric seed
# ---------------------------------------------------------------------------

@dataclass
class SeedStage:
    name: str
    patch: Patch
    center: CycInt | None = None
    info: dict = field(default_factory=dict)


@dataclass
class SeedReport:
    stages: list[SeedStage]
    failed_stage: str | None
    reason: str = ""
    symmetry_order: int | None = None

    @property
    def ok(self) -> bool:
        return self.failed_stage is None

    @property
    def progress(self) -> tuple[int, int]:
        return (len(self.stages), self.symmetry_order or 0)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failed_stage": self.failed_stage,
            "reason": self.reason,
            "stages": [{"name": s.name, "tiles": len(s.patch), **s.info} for s in self.stages],
            "symmetry_order": self.symmetry_order,
            "note": "K is read as the two tiles at the right corner of sigma(T_2) that share an edge; "
                    "D as two congruent tiles sharing their base; V_i as the tiles of sigma(V_{i-1}) "
                    "around the image of D's centre",
        }


def _quad_shape(a: PlacedTile, b: PlacedTile) -> str | None:
    """'kite' or 'dart' if the two triangles form a quadrilateral with two pairs of equal adjacent sides."""
    va = [v.embed() for v in vertices(a)]
    vb = [v.embed() for v in vertices(b)]
    shared = [p for p in va if any(abs(p - q) < 1e-9 for q in vb)]
    if len(shared) != 2:
        return None
    oa = next(p for p in va if all(abs(p - q) > 1e-9 for q in shared))
    ob = next(p for p in vb if all(abs(p - q) > 1e-9 for q in shared))
    quad = [oa, shared[0], ob, shared[1]]
    sides = [abs(quad[(i + 1) % 4] - quad[i]) for i in range(4)]
    kite = (abs(sides[0] - sides[1]) < 1e-9 and abs(sides[2] - sides[3]) < 1e-9) or (
        abs(sides[1] - sides[2]) < 1e-9 and abs(sides[3] - sides[0]) < 1e-9
    )
    if not kite:
        return None
    cross = [((quad[(i + 1) % 4] - quad[i]).conjugate() * (quad[(i + 2) % 4] - quad[(i + 1) % 4])).imag for i in range(4)]
    return "kite" if all(c > 0 for c in cross) or all(c < 0 for c in cross) else "dart"


def _angle_at(t: PlacedTile, c: CycInt) -> int:
    """Interior angle of t at its vertex c, in units of pi/n."""
    V = vertices(t)
    return t.n - 2 * t.k if V[2] == c else t.k


def _angle_sum(p: Patch, c: CycInt) -> int:
    return sum(_angle_at(t, c) for t in p)


def _star(p: Patch, c: CycInt) -> Patch:
    idx = [i for i, t in enumerate(p) if any(v == c for v in vertices(t))]
    return p.subset(idx)


def grow_symmetric_seed(rule: SubstitutionRule, stages: int = 4) -> SeedReport:
    """K -> D -> V_1 -> ... -> V_stages; the first stage that cannot be formed is named."""
    n = rule.n
    done: list[SeedStage] = []
    if 2 not in rule.tiles:
        return SeedReport(done, "K", "rule has no dissection of T_2")
    m = mu(n)
    corner = m * s_value(n, 2)
    sig = rule.patch(2)
    at_corner = [i for i, t in enumerate(sig) if any(v == corner for v in vertices(t))]
    K = None
    for i, j in adjacent_pairs(sig.subset(at_corner)):
        a, b = sig.tile(at_corner[i]), sig.tile(at_corner[j])
        shape = _quad_shape(a, b)
        if shape:
            K = SeedStage("K", Patch.from_tiles(n, [a, b]), None, {"shape": shape})
            break
    if K is None:
        return SeedReport(done, "K", "no kite-shaped pair at the right corner of sigma(T_2)")
    done.append(K)

    big = inflate_patch(rule, K.patch)
    tiles = list(big)
    cands = []
    for i, j in adjacent_pairs(big):
        a, b = tiles[i], tiles[j]
        if a.k != b.k:
            continue
        va, vb = vertices(a), vertices(b)
        if {va[0].coeffs, va[1].coeffs} == {vb[0].coeffs, vb[1].coeffs}:
            mid2 = va[0] + va[1]
            cands.append((abs(mid2.embed() / 2 - np.mean([v.embed() for v in va + vb])), i, j, mid2))
    if not cands:
        return SeedReport(done, "D", "sigma(K) has no two congruent tiles sharing their base")
    cands.sort(key=lambda c: (round(c[0], 9), c[1], c[2]))
    _, i, j, mid2 = cands[0]
    D = SeedStage("D", big.subset([i, j]), None, {"k": tiles[i].k})
    done.append(D)

    # candidate centres, doubled so the base midpoint stays in the ring
    D_vertices = {v.coeffs: v for t in D.patch for v in vertices(t)}
    centres = [mid2] + [v + v for _, v in sorted(D_vertices.items())]
    best = None
    for c2 in centres:
        rep = _grow_from(rule, D.patch, c2, stages, done)
        if rep.ok:
            return rep
        if best is None or rep.progress > best.progress:
            best = rep
    return best


def _grow_from(rule: SubstitutionRule, seed: Patch, c2: CycInt, stages: int, done: list) -> SeedReport:
    n = rule.n
    m = mu(n)
    done = list(done)
    cur = seed
    for s in range(1, stages + 1):
        big = inflate_patch(rule, cur)
        c2 = m * c2
        if any(x % 2 for x in c2.coeffs):
            return SeedReport(done, f"V_{s}", "image of the centre is not a lattice point")
        c = CycInt(n, tuple(x // 2 for x in c2.coeffs))
        star = _star(big, c)
        if len(star) == 0:
            return SeedReport(done, f"V_{s}", "image of the centre is not a tile vertex")
        if _angle_sum(star, c) != 2 * n:
            return SeedReport(done, f"V_{s}", "image of the centre is not an interior vertex")
        done.append(SeedStage(f"V_{s}", star, c, {"center": list(c.coeffs)}))
        cur = star
    final = done[-1]
    order = len(symmetry_group(centred(final.patch, final.center)))
    if order != 2 * n:
        return SeedReport(done, final.name, f"symmetry group of order {order}, expected {2 * n}", order)
    return SeedReport(done, None, "", order)


def centred(p: Patch, c: CycInt) -> Patch:
    """p translated so that c goes to the origin."""
    return Patch(p.n, p.k, p.rot, p.ref, p.trans - np.asarray(c.coeffs, dtype=p.trans.dtype))


def find_symmetric_star(rule: SubstitutionRule, max_order: int = 3, max_tiles: int = 20000) -> dict | None:
    """A complete vertex star with a symmetry group of order 2n inside some
    supertile, centred at the origin.  Supertiles are scanned by order, then k."""
    from .engine import count_vector, supertile

    n = rule.n
    for order in range(1, max_order + 1):
        for k in sorted(rule.tiles):
            if sum(count_vector(rule, k, order)) > max_tiles:
                continue
            p = supertile(rule, k, order)
            inc: dict = {}
            for i, t in enumerate(p):
                for v in vertices(t):
                    inc.setdefault(v.coeffs, []).append(i)
            for key in sorted(inc, key=lambda c: (len(inc[c]), c)):
                idx = inc[key]
                if len(idx) % n:
                    continue
                c = CycInt(n, key)
                star = p.subset(idx)
                if _angle_sum(star, c) != 2 * n:
                    continue
                star = centred(star, c)
                g = symmetry_group(star)
                if len(g) == 2 * n:
                    return {"patch": star, "order": len(g), "supertile": {"k": k, "order": order},
                            "center": list(key)}
    return None


def adjust_orientations(rule: SubstitutionRule, max_rounds: int = 2) -> tuple[SubstitutionRule, SeedReport, list]:
    """Greedily flip markings of child tiles, corner tiles first, keeping a flip
    whenever the symmetric seed gets further."""
    n = rule.n
    m = mu(n)
    best = rule
    rep = grow_symmetric_seed(best)
    flips: list = []
    if rep.ok:
        return best, rep, flips
    order = []
    for k in sorted(rule.tiles):
        corners = [CycInt.zero(n), m * s_value(n, k), m * unit(n, k)]
        ts = rule.tiles[k]
        first = [i for i, t in enumerate(ts) if any(v in corners for v in vertices(t))]
        rest = [i for i in range(len(ts)) if i not in first]
        order += [(k, i) for i in first] + [(k, i) for i in rest]
    for _ in range(max_rounds):
        improved = False
        for k, i in order:
            cand = best.with_markings({k: {i}})
            r2 = grow_symmetric_seed(cand)
            if r2.progress > rep.progress:
                best, rep = cand, r2
                flips.append((k, i))
                improved = True
                if rep.ok:
                    return best, rep, flips
        if not improved:
            break
    return best, rep, flips


def report_json(rep: SeedReport, nest: NestingReport | None) -> str:
    d = {"seed": rep.to_json(), "nesting": None if nest is None else nest.to_json()}
    return json.dumps(d, indent=1)
