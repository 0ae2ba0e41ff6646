"""Searching for points where n+1 pieces of a cube decomposition meet.

Three routes:

* :func:`layered_assignment` and :func:`common_point_check` follow the
  layering argument: L_i collects the unused pieces touching the face x_i = 0,
  L_{n+1} the rest, and a point meeting every layer meets n+1 pieces.
* :func:`brouwer_vector` and :func:`fixed_point_search` locate a common point
  of n separating sets as a zero of the vector field x -> (+-d(x, B_i))_i.
* :func:`find_witness` searches for an (n+1)-fold point directly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .decomposition import Decomposition
from .geometry import box_distance

DEFAULT_DELTA = 1e-6
DEFAULT_H_MIN = 1e-4
TOUCH_TOL = 1e-9


# ---------------------------------------------------------------- layering


@dataclass
class LayeredAssignment:
    layers: list  # n+1 lists of piece ids
    entered: dict  # piece id -> layer index (0-based)

    def to_dict(self) -> dict:
        return {"layers": [list(l) for l in self.layers],
                "entered": {str(k): v for k, v in sorted(self.entered.items())}}


def _require_cube(d: Decomposition) -> None:
    if d.domain.kind != "cube":
        raise ValueError("layered assignment needs a cube domain")


def facet_points(d: Decomposition, axis: int, h: float) -> np.ndarray:
    """Grid points on the face x_axis = 0, plus declared probes lying on it."""
    n, s = d.dimension, d.domain.scale
    ticks = np.linspace(0, s, max(2, int(round(s / h)) + 1))
    grid = np.array(list(itertools.product(ticks, repeat=n - 1))) if n > 1 else np.zeros((1, 0))
    pts = np.insert(grid, axis, 0.0, axis=1)
    probes = d.probes[np.abs(d.probes[:, axis]) < 1e-12] if len(d.probes) else d.probes
    return np.concatenate([pts, probes]) if len(probes) else pts


def layered_assignment(d: Decomposition, h: float = 1 / 64) -> LayeredAssignment:
    """Greedy layering by face contact, in piece order."""
    _require_cube(d)
    n = d.dimension
    touches = []
    for axis in range(n):
        pts = facet_points(d, axis, h)
        touches.append(np.min(d.sdf_matrix(pts), axis=0) <= TOUCH_TOL)
    layers: list = [[] for _ in range(n + 1)]
    entered = {}
    for col, p in enumerate(d.pieces):
        layer = next((i for i in range(n) if touches[i][col]), n)
        layers[layer].append(p.id)
        entered[p.id] = layer
    return LayeredAssignment(layers, entered)


def _layer_gap(d: Decomposition, a: LayeredAssignment, pts: np.ndarray) -> np.ndarray:
    """max over layers of (min over the layer's pieces of sdf): <= delta where all layers meet."""
    s = d.sdf_matrix(pts)
    col = {p.id: i for i, p in enumerate(d.pieces)}
    per_layer = [np.min(s[:, [col[i] for i in layer]], axis=1) for layer in a.layers]
    return np.max(np.column_stack(per_layer), axis=1)


def _search_region(d: Decomposition) -> tuple[np.ndarray, np.ndarray]:
    dom = d.domain
    if dom.kind == "ball":
        # inscribed cube of the ball
        half = dom.scale / math.sqrt(dom.dimension)
        return np.full(dom.dimension, -half), np.full(dom.dimension, half)
    return dom.bounds()


def _coarse_grid(lo: np.ndarray, hi: np.ndarray, per_axis: int) -> np.ndarray:
    axes = [np.linspace(a, b, per_axis + 1) for a, b in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))


def _minimise(objective, seeds: np.ndarray, lo: np.ndarray, hi: np.ndarray, step: float,
              h_min: float, target: float, keep: int = 24):
    """Multilevel local grid refinement of a nonnegative-at-optimum objective.

    Steps halve until the target is met or they fall below a quarter of
    ``min(h_min, target)``.

    Returns ``(points, values, evaluations)`` of everything evaluated.
    """
    n = len(lo)
    stencil = np.array(list(itertools.product((-1, 0, 1), repeat=n)), float)
    pts = np.clip(seeds, lo, hi)
    vals = objective(pts)
    all_pts, all_vals = [pts], [vals]
    evals = len(pts)
    while step >= min(h_min, target) / 4 and vals.min() > target:
        order = np.lexsort((*pts.T[::-1], vals))[:keep]
        base = pts[order]
        cand = (base[:, None, :] + step * stencil[None]).reshape(-1, n)
        cand = np.unique(np.clip(cand, lo, hi), axis=0)
        cvals = objective(cand)
        evals += len(cand)
        all_pts.append(cand)
        all_vals.append(cvals)
        pts = np.concatenate([base, cand])
        vals = np.concatenate([vals[order], cvals])
        step /= 2
    return np.concatenate(all_pts), np.concatenate(all_vals), evals


def common_point_check(a: LayeredAssignment, d: Decomposition, delta: float = DEFAULT_DELTA,
                       h: float = 1 / 16, h_min: float = DEFAULT_H_MIN) -> Optional[np.ndarray]:
    """A point whose delta-ball meets every layer L_1..L_{n+1}, or None."""
    if any(len(layer) == 0 for layer in a.layers):
        return None
    lo, hi = _search_region(d)
    per_axis = max(2, int(round((hi[0] - lo[0]) / h)))
    seeds = _coarse_grid(lo, hi, per_axis)
    probes = d.domain_probes()
    if len(probes):
        seeds = np.concatenate([probes, seeds])
    pts, vals, _ = _minimise(lambda p: _layer_gap(d, a, p), seeds, lo, hi,
                             (hi[0] - lo[0]) / per_axis / 2, h_min, delta)
    ok = vals <= delta
    if not ok.any():
        return None
    good = pts[ok]
    return good[np.lexsort(good.T[::-1])[0]]


# ---------------------------------------------------------------- direct search


@dataclass
class WitnessReport:
    point: np.ndarray
    pieces: list
    delta: float
    stats: dict = field(default_factory=dict)

    @property
    def multiplicity(self) -> int:
        return len(self.pieces)

    def success(self, n: int) -> bool:
        return self.multiplicity >= n + 1

    def to_dict(self) -> dict:
        return {"point": [float(v) for v in self.point], "pieces": list(self.pieces),
                "multiplicity": self.multiplicity, "delta": self.delta, "stats": self.stats}


def kth_gap(d: Decomposition, k: int):
    """x -> k-th smallest piece sdf at x (<= delta iff k pieces meet within delta)."""
    def f(pts):
        s = d.sdf_matrix(pts)
        if s.shape[1] < k:
            return np.full(len(pts), np.inf)
        return np.partition(s, k - 1, axis=1)[:, k - 1]
    return f


def find_witness(d: Decomposition, delta: float = DEFAULT_DELTA, h_min: float = DEFAULT_H_MIN,
                 h: Optional[float] = None, use_probes: bool = True) -> WitnessReport:
    """Best point found where at least n+1 pieces meet within delta.

    Ball domains are searched on the inscribed cube. Seeds are the declared
    probes, the layered-assignment common point (cube domains) and a coarse
    grid; the (n+1)-th smallest sdf is then driven to zero by local refinement.
    """
    if d.domain.kind not in ("cube", "ball"):
        raise ValueError("witness search needs a cube or ball domain")
    n = d.dimension
    lo, hi = _search_region(d)
    width = float(hi[0] - lo[0])
    h = h if h is not None else width / (16 if n <= 2 else 8)
    per_axis = max(2, int(round(width / h)))
    seeds = [_coarse_grid(lo, hi, per_axis)]
    sources = {"grid": len(seeds[0])}
    if use_probes:
        probes = d.domain_probes()
        if len(probes):
            inside = np.all((probes >= lo - 1e-12) & (probes <= hi + 1e-12), axis=1)
            seeds.insert(0, probes[inside])
            sources["probes"] = int(inside.sum())
    if use_probes and d.domain.kind == "cube":
        cp = common_point_check(layered_assignment(d), d, delta, h=h, h_min=h_min)
        if cp is not None:
            seeds.insert(0, cp[None])
            sources["layered"] = 1
    objective = kth_gap(d, n + 1)
    pts, vals, evals = _minimise(objective, np.concatenate(seeds), lo, hi, width / per_axis / 2, h_min, delta)
    counts = np.sum(d.sdf_matrix(pts) <= delta, axis=1)
    # most pieces, then smallest gap, then lexicographic
    point = pts[np.lexsort((*pts.T[::-1], vals, -counts))[0]]
    ids = [d.pieces[i].id for i in np.nonzero(d.sdf_matrix(point[None])[0] <= delta)[0]]
    stats = {"evaluations": int(evals), "seeds": sources, "best_gap": float(vals.min()),
             "region": "inscribed-cube" if d.domain.kind == "ball" else "cube"}
    return WitnessReport(point, ids, delta, stats)


# ---------------------------------------------------------------- separating families


class SeparatingFamily:
    """n closed sets B_i, each separating x_i = 0 (side +1) from x_i = 1 (side -1)."""

    n: int

    def side(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class HyperplaneFamily(SeparatingFamily):
    """B_i = {x_i = c_i}."""

    def __init__(self, offsets: Sequence[float]):
        self.c = np.asarray(offsets, float)
        if np.any((self.c <= 0) | (self.c >= 1)):
            raise ValueError("offsets must lie strictly inside (0, 1)")
        self.n = len(self.c)

    def side(self, x):
        return np.where(np.atleast_2d(x) < self.c, 1.0, -1.0)

    def distance(self, x):
        return np.abs(np.atleast_2d(x) - self.c)


class LinearFamily(SeparatingFamily):
    """B_i = {<a_i, x> = b_i} within the cube; side +1 where <a_i, x> < b_i.

    Distances are to the full hyperplane, a 1-Lipschitz function with the same
    zero set as the distance to B_i.
    """

    def __init__(self, normals, offsets):
        self.a = np.asarray(normals, float)
        self.b = np.asarray(offsets, float)
        self.n = self.a.shape[0]
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=self.n)))
        vals = corners @ self.a.T - self.b
        for i in range(self.n):
            near, far = corners[:, i] == 0, corners[:, i] == 1
            if not (np.all(vals[near, i] < 0) and np.all(vals[far, i] > 0)):
                raise ValueError(f"hyperplane {i} does not separate the faces x_{i}=0 and x_{i}=1")

    def _signed(self, x):
        return (np.atleast_2d(x) @ self.a.T - self.b) / np.linalg.norm(self.a, axis=1)

    def side(self, x):
        return np.where(self._signed(x) < 0, 1.0, -1.0)

    def distance(self, x):
        return np.abs(self._signed(x))

    def intersection(self) -> np.ndarray:
        return np.linalg.solve(self.a, self.b)


class GridStaircaseFamily(SeparatingFamily):
    """Separators made of facets of a k^n grid.

    For axis i, ``thresholds[i]`` maps the column index (the cell indices on the
    other axes) to an integer s in 1..k-1; U_i is the union of cells with
    index_i < s, and B_i its boundary inside the cube, stored as degenerate boxes.
    """

    def __init__(self, n: int, k: int, thresholds: Optional[list] = None):
        if k < 2:
            raise ValueError("need k >= 2")
        self.n, self.k = n, k
        cols = list(itertools.product(range(k), repeat=n - 1))
        if thresholds is None:
            thresholds = [{c: 1 for c in cols} for _ in range(n)]
        self.thr = []
        for i in range(n):
            t = {tuple(c): int(v) for c, v in dict(thresholds[i]).items()}
            if set(t) != set(cols) or any(not 1 <= v <= k - 1 for v in t.values()):
                raise ValueError("thresholds must give a value in 1..k-1 for every column")
            self.thr.append(t)
        self.boxes = [self._boxes(i) for i in range(n)]
        self._lo = [np.array([b[0] for b in bx]) for bx in self.boxes]
        self._hi = [np.array([b[1] for b in bx]) for bx in self.boxes]

    def _boxes(self, i: int) -> list:
        k, n, thr = self.k, self.n, self.thr[i]
        other = [a for a in range(n) if a != i]
        out = []
        for c, s in thr.items():
            lo, hi = np.zeros(n), np.zeros(n)
            for a, ci in zip(other, c):
                lo[a], hi[a] = ci / k, (ci + 1) / k
            lo[i] = hi[i] = s / k
            out.append((lo, hi))
            for pos, a in enumerate(other):
                if c[pos] + 1 >= k:
                    continue
                c2 = list(c)
                c2[pos] += 1
                s2 = thr[tuple(c2)]
                if s2 == s:
                    continue
                lo2, hi2 = lo.copy(), hi.copy()
                lo2[a] = hi2[a] = (c[pos] + 1) / k
                lo2[i], hi2[i] = min(s, s2) / k, max(s, s2) / k
                out.append((lo2, hi2))
        return out

    def side(self, x):
        x = np.atleast_2d(x)
        out = np.empty(x.shape)
        idx = np.clip(np.floor(x * self.k).astype(int), 0, self.k - 1)
        for i in range(self.n):
            other = [a for a in range(self.n) if a != i]
            thr = np.array([self.thr[i][tuple(row)] for row in idx[:, other]]) / self.k
            out[:, i] = np.where(x[:, i] < thr, 1.0, -1.0)
        return out

    def distance(self, x):
        x = np.atleast_2d(x)
        out = np.empty(x.shape)
        for i in range(self.n):
            lo, hi = self._lo[i], self._hi[i]
            gap = np.maximum(np.maximum(lo[None] - x[:, None], x[:, None] - hi[None]), 0.0)
            out[:, i] = np.min(np.sqrt(np.sum(gap * gap, axis=-1)), axis=1)
        return out

    def common_corners(self) -> np.ndarray:
        """Grid vertices lying on every B_i (independent enumeration)."""
        ticks = np.arange(self.k + 1) / self.k
        verts = np.array(list(itertools.product(ticks, repeat=self.n)))
        d = self.distance(verts)
        return verts[np.all(d < 1e-12, axis=1)]


def brouwer_vector(f: SeparatingFamily, x) -> np.ndarray:
    """v(x) with v_i = +-d(x, B_i), + on the x_i = 0 side; f(x) = x + v(x) maps the cube to itself."""
    x = np.atleast_2d(np.asarray(x, float))
    v = f.side(x) * f.distance(x)
    return v[0] if v.shape[0] == 1 else v


def fixed_point_search(f: SeparatingFamily, tol: float = 1e-7, max_cells: int = 512) -> np.ndarray:
    """Zero of the Brouwer vector field by sign-covering subdivision of the cube.

    A cell survives when, for every component, its corner values change sign
    or some sample is within the Lipschitz reach (|v_i| <= half-diagonal; each
    v_i is 1-Lipschitz). Surviving cells are bisected until a sample point has
    ``max|v_i| < tol``.
    """
    n = f.n
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
    children = np.array(list(itertools.product((0.0, 0.5), repeat=n)))
    cells = np.zeros((1, n))
    width = 1.0
    while True:
        samples = np.concatenate([cells[:, None, :] + width * corners[None],
                                  cells[:, None, :] + width / 2], axis=1)
        flat = samples.reshape(-1, n)
        v = np.atleast_2d(brouwer_vector(f, flat)).reshape(len(cells), -1, n)
        vmax = np.max(np.abs(v), axis=2)
        best = np.argmin(vmax.ravel())
        if vmax.ravel()[best] < tol:
            return flat[best]
        reach = width * math.sqrt(n) / 2
        signs = (v.max(axis=1) >= 0) & (v.min(axis=1) <= 0)
        near = np.min(np.abs(v), axis=1) <= reach
        keep = np.all(signs | near, axis=1)
        if not keep.any():
            raise ArithmeticError("sign condition violated")
        cells = cells[keep]
        score = np.min(vmax[keep], axis=1)
        if len(cells) > max_cells:
            cells = cells[np.argsort(score, kind="stable")[:max_cells]]
        if width < tol * 1e-3:
            raise ArithmeticError("no zero found at the requested tolerance")
        cells = (cells[:, None, :] + width * children[None]).reshape(-1, n)
        width /= 2
