"""Applying a substitution rule to tiles and patches."""

from __future__ import annotations

import numpy as np

from .exactring import CycInt, mu_matrix, ring
from .kskdissect import SubstitutionRule
from .tiles import Patch, PlacedTile, _as_exact, apply_pose_rows, find_misfit_vertices

MAX_TILES = 10**6


class GuardExceeded(RuntimeError):
    """A supertile would exceed the tile budget."""


class InvalidRuleError(ValueError):
    """Inflation produced overlapping or duplicate tiles."""


def _children(rule: SubstitutionRule, k: int) -> Patch:
    if k not in rule.tiles:
        raise KeyError(f"rule has no dissection for prototile {k}")
    cache = rule.__dict__.setdefault("_child_patches", {})
    if k not in cache:
        cache[k] = rule.patch(k)
    return cache[k]


def _mul_mu(n: int, rows: np.ndarray) -> np.ndarray:
    rows = _as_exact(rows)
    M = mu_matrix(n)
    if rows.dtype == object:
        M = M.astype(object)
    return _as_exact(rows @ M)


def inflate_patch(rule: SubstitutionRule, p: Patch, check: bool = False) -> Patch:
    """Replace every tile by its dissection, scaled by mu about the origin.

    Child tiles are emitted in (parent index, child index) order.
    """
    n = rule.n
    if len(p) == 0:
        return Patch.empty(n)
    D = ring(n).dim
    parent_shift = _mul_mu(n, p.trans)
    ks, rots, refs, trans, order = [], [], [], [], []
    for k in np.unique(p.k):
        sel = np.nonzero(p.k == k)[0]
        ch = _children(rule, int(k))
        m, c = len(sel), len(ch)
        prot = np.repeat(p.rot[sel], c)
        pref = np.repeat(p.ref[sel], c)
        crot = np.tile(ch.rot, m)
        cref = np.tile(ch.ref, m)
        ctr = np.tile(ch.trans, (m, 1))
        # parent pose composed with the child pose
        rot = np.where(pref, prot - crot, prot + crot)
        ref = pref ^ cref
        t = apply_pose_rows(n, ctr, prot, pref)
        shift = np.repeat(parent_shift[sel], c, axis=0)
        if t.dtype == object or shift.dtype == object:
            t, shift = t.astype(object), shift.astype(object)
        ks.append(np.tile(ch.k, m))
        rots.append(rot)
        refs.append(ref)
        trans.append(t + shift)
        order.append(np.stack([np.repeat(sel, c), np.tile(np.arange(c), m)]))
    obj = any(t.dtype == object for t in trans)
    T = np.concatenate([t.astype(object) if obj else t for t in trans]).reshape(-1, D)
    par, chi = np.concatenate(order, axis=1)
    idx = np.lexsort((chi, par))
    out = Patch(n, np.concatenate(ks)[idx], np.concatenate(rots)[idx], np.concatenate(refs)[idx], T[idx])
    if check:
        check_disjoint(out)
    return out


def inflate(rule: SubstitutionRule, t: PlacedTile) -> Patch:
    """Dissection of mu * t: the rule's tiles moved by t's pose, translation scaled by mu."""
    if t.k not in rule.tiles:
        raise KeyError(f"rule has no dissection for prototile {t.k}")
    return inflate_patch(rule, Patch.from_tiles(rule.n, [t]))


def count_vector(rule: SubstitutionRule, k: int, order: int) -> np.ndarray:
    """Number of tiles of each index in the order-r supertile of T_k (index 0 unused)."""
    h = (rule.n - 1) // 2
    C = rule.count_matrix().astype(object)
    v = np.zeros(h, dtype=object)
    v[k - 1] = 1
    for _ in range(order):
        v = C @ v
    return np.concatenate([[0], v])


def supertile(rule: SubstitutionRule, k: int, order: int, max_tiles: int = MAX_TILES) -> Patch:
    """omega^order(T_k) for the canonical T_k."""
    if order < 0:
        raise ValueError("order must be non-negative")
    total = int(sum(count_vector(rule, k, order)))
    if total > max_tiles:
        raise GuardExceeded(f"order-{order} supertile of T_{k} has {total} tiles (limit {max_tiles})")
    p = Patch.from_tiles(rule.n, [PlacedTile(rule.n, k, 0, False, CycInt.zero(rule.n))])
    for _ in range(order):
        p = inflate_patch(rule, p)
    return p


def check_disjoint(p: Patch) -> None:
    """Raise if two tiles coincide or a tile centroid lies inside another tile."""
    keys = p.keys()
    if len(set(keys)) != len(keys):
        raise InvalidRuleError("duplicate tiles")
    V = p.vertices_complex()
    if len(p) < 2:
        return
    cen = V.mean(axis=1)
    # centroid of each tile must lie in no other tile
    A, B, C = V[:, 0], V[:, 1], V[:, 2]
    for i in range(len(p)):
        z = cen[i]
        s1 = ((B - A).conj() * (z - A)).imag
        s2 = ((C - B).conj() * (z - B)).imag
        s3 = ((A - C).conj() * (z - C)).imag
        tol = 1e-9
        inside = ((s1 > tol) & (s2 > tol) & (s3 > tol)) | ((s1 < -tol) & (s2 < -tol) & (s3 < -tol))
        inside[i] = False
        if inside.any():
            raise InvalidRuleError(f"tile {i} overlaps tile {int(np.argmax(inside))}")


def misfit_count(p: Patch) -> int:
    return len(find_misfit_vertices(p))
