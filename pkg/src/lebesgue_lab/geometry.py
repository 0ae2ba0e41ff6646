"""Low-dimensional Euclidean primitives.

Everything here works on plain ``numpy`` arrays of shape ``(m, n)`` (a point
set of ``m`` points in R^n) and is a pure function of its inputs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

HULL_TOL = 1e-10
DEGENERATE_MARGIN = 1e-9
MAX_DIM = 8
MAX_POINTS = 32
SUBSET_BUDGET = 2_000_000


def as_points(ps, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``ps`` to a finite float array of shape (m, n)."""
    arr = np.asarray(ps, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim is None or arr.size == dim else arr.reshape(-1, dim)
    if arr.ndim != 2:
        raise ValueError("point set must be a 2-d array of coordinates")
    if arr.shape[1] < 1:
        raise ValueError("dimension must be at least 1")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def simplex_diameter(n: int) -> float:
    """d_n = sqrt(2 + 2/n), the edge of the regular n-simplex inscribed in S^{n-1}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(2.0 + 2.0 / n)


def diameter(ps) -> float:
    """Largest pairwise Euclidean distance of a finite point set."""
    if np.size(ps) == 0:
        raise ValueError("empty point set")
    return float(_pairwise_max(as_points(ps))[0])


def diameter_pair(ps) -> tuple[float, int, int]:
    if np.size(ps) == 0:
        raise ValueError("empty point set")
    return _pairwise_max(as_points(ps))


def _pairwise_max(pts: np.ndarray) -> tuple[float, int, int]:
    m = pts.shape[0]
    if m == 1:
        return 0.0, 0, 0
    if m > 2000:
        pts_idx = _hull_indices(pts)
        if len(pts_idx) < m:
            d, i, j = _pairwise_max(pts[pts_idx])
            return d, int(pts_idx[i]), int(pts_idx[j])
        return _cell_pairwise_max(pts)
    return _block_max(pts, pts)


def _block_max(a: np.ndarray, b: np.ndarray) -> tuple[float, int, int]:
    best, bi, bj = -1.0, 0, 0
    block = max(1, 2**20 // max(len(b), 1))
    for s in range(0, len(a), block):
        d2 = np.sum((a[s:s + block, None, :] - b[None, :, :]) ** 2, axis=-1)
        k = int(np.argmax(d2))
        r, c = divmod(k, len(b))
        if d2[r, c] > best:
            best, bi, bj = float(d2[r, c]), s + r, c
    return math.sqrt(best), bi, bj


def _cell_pairwise_max(pts: np.ndarray) -> tuple[float, int, int]:
    """Exact diameter of a large set by pruning pairs of grid cells.

    A farthest-point sweep gives a lower bound; only cell pairs whose boxes can
    be farther apart than that bound are compared point by point.
    """
    m, n = pts.shape
    i = 0
    bound, bi, bj = 0.0, 0, 0
    for _ in range(4):
        d = np.linalg.norm(pts - pts[i], axis=1)
        j = int(np.argmax(d))
        if d[j] <= bound:
            break
        bound, bi, bj, i = float(d[j]), i, j, j
    lo = pts.min(axis=0)
    g = float(np.max(pts.max(axis=0) - lo)) / max(2, int(round(m ** (1 / (n + 1)))))
    keys = np.floor((pts - lo) / g).astype(np.int64)
    _, cell, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    cell = cell.ravel()
    order = np.argsort(cell, kind="stable")
    starts = np.r_[0, np.cumsum(counts)]
    k = len(counts)
    clo = np.full((k, n), np.inf)
    chi = np.full((k, n), -np.inf)
    np.minimum.at(clo, cell, pts)
    np.maximum.at(chi, cell, pts)
    a, b = np.triu_indices(k)
    span = np.maximum(np.abs(chi[a] - clo[b]), np.abs(chi[b] - clo[a]))
    reach = np.sqrt(np.sum(span * span, axis=1))
    best = (bound, bi, bj)
    for idx in np.argsort(-reach, kind="stable"):
        if reach[idx] <= best[0]:
            break
        ia = order[starts[a[idx]]:starts[a[idx] + 1]]
        ib = order[starts[b[idx]]:starts[b[idx] + 1]]
        d, r, c = _block_max(pts[ia], pts[ib])
        if d > best[0]:
            best = (d, int(ia[r]), int(ib[c]))
    return best


def _hull_indices(pts: np.ndarray) -> np.ndarray:
    """Indices of convex-hull vertices; falls back to all points when degenerate."""
    from scipy.spatial import ConvexHull, QhullError

    n = pts.shape[1]
    if n == 1:
        return np.array([int(np.argmin(pts[:, 0])), int(np.argmax(pts[:, 0]))])
    try:
        return np.asarray(ConvexHull(pts).vertices)
    except (QhullError, ValueError):
        return np.arange(pts.shape[0])


def point_cloud_diameter(pts: np.ndarray) -> float:
    """Diameter of a possibly large cloud (hull-reduced)."""
    pts = np.asarray(pts, dtype=float)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    if pts.shape[0] > 2000:
        pts = pts[_hull_indices(pts)]
    return float(_pairwise_max(pts)[0])


def simplex_vertices(n: int) -> np.ndarray:
    """Vertices of the regular n-simplex inscribed in the unit sphere S^{n-1}.

    Built from the centred standard basis of R^{n+1}, mapped isometrically
    onto R^n via an orthonormal basis of the sum-zero hyperplane. Returns an
    array of shape (n+1, n) with pairwise dot products -1/n.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    n = int(n)
    e = np.eye(n + 1) - 1.0 / (n + 1)
    # orthonormal basis of the sum-zero hyperplane: last n right-singular vectors
    basis = np.linalg.svd(np.ones((1, n + 1)))[2][1:]
    verts = e @ basis.T
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    # 2D: first vertex at (0, 1) so the triangle points up
    if n == 2:
        ang = math.atan2(verts[0, 1], verts[0, 0])
        rot = np.array([[math.cos(-ang + math.pi / 2), -math.sin(-ang + math.pi / 2)],
                        [math.sin(-ang + math.pi / 2), math.cos(-ang + math.pi / 2)]])
        verts = verts @ rot.T
    if n == 1:
        verts = np.array([[1.0], [-1.0]])
    gram = verts @ verts.T
    target = np.full((n + 1, n + 1), -1.0 / n)
    np.fill_diagonal(target, 1.0)
    if not np.allclose(gram, target, atol=1e-12, rtol=0):
        raise ArithmeticError("simplex construction lost precision")
    return verts


def _subsets(m: int, sizes: Sequence[int]):
    for k in sizes:
        yield k, np.array(list(itertools.combinations(range(m), k)), dtype=int).reshape(-1, k)


def _check_budget(m: int, n: int, max_size: int) -> None:
    if n > MAX_DIM or m > MAX_POINTS:
        raise ValueError("exceeds combinatorial budget")
    total = sum(comb(m, k) for k in range(1, min(max_size, m) + 1))
    if total > SUBSET_BUDGET:
        raise ValueError("exceeds combinatorial budget")


def origin_in_hull(ps, tol: float = HULL_TOL) -> bool:
    """Decide 0 in conv(ps) by enumerating Caratheodory subsets of size <= n+1.

    For each subset S the barycentric system ``[S^T; 1] lam = [0; 1]`` is solved
    in the least-squares sense; the origin is in the hull iff some subset has a
    consistent solution with ``lam >= -tol``.
    """
    pts = as_points(ps)
    m, n = pts.shape
    if m == 0:
        raise ValueError("empty point set")
    _check_budget(m, n, n + 1)
    scale = max(1.0, float(np.max(np.abs(pts))))
    for k, idx in _subsets(m, range(1, min(n + 1, m) + 1)):
        for start in range(0, len(idx), 100_000):
            sub = pts[idx[start:start + 100_000]]  # (B, k, n)
            a = np.concatenate([np.swapaxes(sub, 1, 2), np.ones((len(sub), 1, k))], axis=1)
            rhs = np.zeros((n + 1, 1))
            rhs[-1, 0] = 1.0
            lam = np.linalg.pinv(a) @ rhs  # (B, k, 1)
            resid = np.linalg.norm(a @ lam - rhs, axis=(1, 2))
            ok = (resid < tol * scale * 10) & np.all(lam[..., 0] >= -tol, axis=1)
            if np.any(ok):
                return True
    return False


def min_norm_candidates(pts: np.ndarray, max_size: int, tol: float = HULL_TOL):
    """Nearest-to-origin points of affine hulls of small subsets.

    Yields ``(p, lam, subset)`` for each subset whose affine nearest point has
    nonnegative barycentric coordinates, i.e. lies in the subset's convex hull.
    The nearest point of conv(pts) to the origin is among these when
    ``max_size >= n``.
    """
    m, n = pts.shape
    for k, idx in _subsets(m, range(1, min(max_size, m) + 1)):
        for start in range(0, len(idx), 100_000):
            block = idx[start:start + 100_000]
            sub = pts[block]  # (B, k, n)
            gram = sub @ np.swapaxes(sub, 1, 2)
            kkt = np.zeros((len(sub), k + 1, k + 1))
            kkt[:, :k, :k] = gram
            kkt[:, :k, k] = 1.0
            kkt[:, k, :k] = 1.0
            rhs = np.zeros((k + 1, 1))
            rhs[k, 0] = 1.0
            sol = (np.linalg.pinv(kkt) @ rhs)[..., 0]
            lam = sol[:, :k]
            ok = np.all(lam >= -tol, axis=1) & (np.abs(lam.sum(axis=1) - 1.0) < 1e-8)
            for b in np.nonzero(ok)[0]:
                yield lam[b] @ sub[b], lam[b], tuple(block[b])


def min_norm_point(ps) -> np.ndarray:
    """Point of conv(ps) closest to the origin (combinatorial enumeration)."""
    pts = as_points(ps)
    m, n = pts.shape
    _check_budget(m, n, n + 1)
    best = None
    # size n+1 covers an origin strictly inside a full-dimensional simplex
    for p, _, _ in min_norm_candidates(pts, n + 1):
        if best is None or p @ p < best @ best - 1e-15:
            best = p
    if best is None:
        raise ArithmeticError("no valid face found")
    return best


@dataclass(frozen=True)
class HemisphereStatus:
    """Outcome of the open-hemisphere test for a point set.

    ``margin`` is the best value of min_x <u, x> over the candidate directions;
    positive means an open hemisphere contains everything. ``gap`` is the
    distance from the origin to the nearest candidate face, used to flag
    configurations sitting on the feasibility boundary.
    """

    witness: Optional[np.ndarray]
    margin: float
    gap: float

    @property
    def degenerate(self) -> bool:
        return self.gap < DEGENERATE_MARGIN or abs(self.margin) < DEGENERATE_MARGIN


def hemisphere_status(ps, require_unit: bool = True) -> HemisphereStatus:
    pts = as_points(ps)
    m, n = pts.shape
    if require_unit and not np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-9, rtol=0):
        raise ValueError("points must lie on the unit sphere")
    _check_budget(m, n, n)
    best_margin, best_u, gap = -math.inf, None, math.inf
    for p, _, _ in min_norm_candidates(pts, max(n, 1)):
        norm = float(np.linalg.norm(p))
        gap = min(gap, norm)
        if norm < 1e-15:
            continue
        u = p / norm
        margin = float(np.min(pts @ u))
        if margin > best_margin:
            best_margin, best_u = margin, u
    if best_u is None:
        best_margin = 0.0
    witness = best_u if best_margin > DEGENERATE_MARGIN else None
    return HemisphereStatus(witness=witness, margin=best_margin, gap=gap)


def open_hemisphere_witness(ps) -> Optional[np.ndarray]:
    """Unit u with <u, x> > 0 for all x in ps, or None if no open hemisphere holds ps."""
    return hemisphere_status(ps).witness


def box_distance(x, lo, hi) -> np.ndarray:
    """Exact Euclidean distance from points x (m, n) to the box [lo, hi]."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    gap = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return np.sqrt(np.sum(gap * gap, axis=-1))


def distance_to_polyhedral_set(x, cells) -> float:
    """Distance from point x to a union of axis-aligned boxes ``[(lo, hi), ...]``."""
    x = np.asarray(x, dtype=float).ravel()
    if len(cells) == 0:
        raise ValueError("no boxes given")
    lo = np.array([c[0] for c in cells], dtype=float)
    hi = np.array([c[1] for c in cells], dtype=float)
    if lo.ndim != 2 or lo.shape[1] != x.size or hi.shape != lo.shape:
        raise ValueError("dimension mismatch between point and boxes")
    gap = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return float(np.min(np.sqrt(np.sum(gap * gap, axis=1))))


def unit_sphere_samples(n: int, count: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Roughly uniform points on S^{n-1}: exact circle / Fibonacci lattice / Gaussian."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (3 - math.sqrt(5)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = rng or np.random.default_rng(0)
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
