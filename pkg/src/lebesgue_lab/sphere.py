"""Diameter minimisation for point sets on the unit sphere that lie in no open hemisphere.

The regular simplex inscribed in S^{n-1} is the expected minimiser, with
diameter sqrt(2 + 2/n). The local search moves one diameter-realising point at
a time along a tangent direction that shortens all its longest chords.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .decomposition import worker_count
from .geometry import (as_points, diameter, hemisphere_status, min_norm_point,
                       open_hemisphere_witness, simplex_diameter)

RIGID = "locally-rigid"
UNIT_TOL = 1e-9
MIN_STEP = 1e-10
MAX_RETRIES = 10_000


@dataclass
class SphereConfig:
    points: np.ndarray

    def __post_init__(self):
        self.points = as_points(self.points)
        if not np.allclose(np.linalg.norm(self.points, axis=1), 1.0, atol=UNIT_TOL, rtol=0):
            raise ValueError("points must lie on the unit sphere")

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def diameter(self) -> float:
        return diameter(self.points)

    @property
    def feasible(self) -> bool:
        return feasible(self)

    def distance_profile(self) -> np.ndarray:
        """Sorted pairwise distances."""
        p = self.points
        i, j = np.triu_indices(len(p), 1)
        return np.sort(np.linalg.norm(p[i] - p[j], axis=1))

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "points": self.points.tolist(),
                "diameter": self.diameter, "feasible": self.feasible}


def feasible(c: Union[SphereConfig, np.ndarray]) -> bool:
    """True when no open hemisphere contains every point.

    n+1 points in general position are decided by their barycentric
    coordinates of the origin; anything else goes through the hemisphere test.
    """
    pts = as_points(c.points if isinstance(c, SphereConfig) else c)
    m, n = pts.shape
    if m == n + 1:
        a = np.vstack([pts.T, np.ones(m)])
        if np.linalg.cond(a) < 1e8:
            lam = np.linalg.solve(a, np.r_[np.zeros(n), 1.0])
            if np.all(lam > 1e-9) or np.any(lam < -1e-9):
                return bool(np.all(lam > 0))
    return open_hemisphere_witness(pts) is None


def _distances(p: np.ndarray) -> np.ndarray:
    diff = p[:, None, :] - p[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _realising_pairs(dist: np.ndarray, diam: float, tol: float) -> np.ndarray:
    m = dist >= diam - tol
    np.fill_diagonal(m, False)
    return m


def _tangent_direction(p0: np.ndarray, partners: np.ndarray) -> Optional[np.ndarray]:
    """Unit tangent u at p0 with <u, q> > 0 for every partner q, or None.

    Moving along u shortens every chord to a partner once that chord exceeds
    sqrt(2). The min-norm point of the projected partners' hull is such a
    direction whenever the hull avoids the origin.
    """
    proj = partners - np.outer(partners @ p0, p0)
    z = min_norm_point(proj)
    norm = float(np.linalg.norm(z))
    if norm < 1e-12:
        return None
    u = z / norm
    return u if np.all(proj @ u > 0) else None


def improvement_move(c: SphereConfig, tie_tol: float = 1e-12) -> Union[SphereConfig, str]:
    """One move of a diameter point; returns the new configuration or ``RIGID``.

    Pairs within ``tie_tol`` of the diameter count as realising it. The moved
    point ends strictly closer than the old diameter to every other point, so
    the new configuration has a smaller diameter or fewer realising pairs.
    """
    pts = c.points
    dist = _distances(pts)
    diam = float(dist.max())
    if diam <= math.sqrt(2) + 1e-12:
        raise ValueError("diameter must exceed sqrt(2)")
    if not feasible(pts):
        raise ValueError("configuration lies in an open hemisphere")
    real = _realising_pairs(dist, diam, tie_tol)
    k = real.sum(axis=1)
    n = c.dimension
    # fewest partners first, as in the counting argument
    order = sorted(np.nonzero(k)[0], key=lambda i: (k[i] >= n, k[i], i))
    for i in order:
        u = _tangent_direction(pts[i], pts[real[i]])
        if u is None:
            continue
        others = pts[np.arange(len(pts)) != i]
        steps = 0.5 ** np.arange(1, 48)
        q = pts[i] + steps[:, None] * u
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        local = np.max(np.linalg.norm(q[:, None, :] - others[None], axis=2), axis=1)
        best = None
        for j in np.argsort(local, kind="stable"):
            if local[j] >= diam - tie_tol:
                break
            trial = pts.copy()
            trial[i] = q[j]
            if feasible(trial):
                best = (local[j], trial)
                break
        if best is None:
            continue
        new = SphereConfig(best[1])
        _assert_progress(pts, best[1], tie_tol)
        return new
    return RIGID


def _assert_progress(old: np.ndarray, new: np.ndarray, tol: float) -> None:
    d_old, d_new = _distances(old), _distances(new)
    a, b = float(d_old.max()), float(d_new.max())
    count_old = int(_realising_pairs(d_old, a, tol).sum())
    count_new = int(_realising_pairs(d_new, a, tol).sum())
    if not (b < a or count_new < count_old):
        raise AssertionError("move did not reduce the diameter or its realising pairs")
    if not feasible(new):
        raise AssertionError("move broke feasibility")


def random_feasible(n: int, count: int, rng: np.random.Generator) -> SphereConfig:
    """Uniform points on S^{n-1}, rejected while some open hemisphere contains them."""
    for _ in range(MAX_RETRIES):
        p = rng.standard_normal((count, n))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        if feasible(p) and diameter(p) > math.sqrt(2) + 1e-9:
            return SphereConfig(p)
    raise RuntimeError("no feasible start found")


@dataclass
class StartResult:
    config: SphereConfig
    diameter: float
    trajectory: list = field(default_factory=list)
    stop: str = ""

    def to_dict(self) -> dict:
        return {"diameter": self.diameter, "stop": self.stop, "trajectory": self.trajectory,
                "points": self.config.points.tolist()}


def descend(c: SphereConfig, max_moves: int = 20_000, tie_start: float = 1e-2,
            tie_min: float = MIN_STEP) -> StartResult:
    """Repeat improvement moves, tightening the tie tolerance whenever the
    configuration is rigid at the current one and relaxing it after a move."""
    tie = tie_start
    traj = [c.diameter]
    stop = "max-moves"
    for _ in range(max_moves):
        nxt = improvement_move(c, tie)
        if nxt == RIGID:
            tie /= 4
            if tie < tie_min:
                stop = RIGID
                break
            continue
        c = nxt
        tie = min(tie * 4, tie_start)
        traj.append(c.diameter)
    return StartResult(c, c.diameter, traj, stop)


def minimize_diameter(n: int, starts: int = 100, seed: int = 0, points: Optional[int] = None,
                      max_moves: int = 20_000) -> tuple[SphereConfig, float, list]:
    """Best diameter over random feasible starts of ``points`` (default n+1) points.

    Returns ``(config, diameter, per_start_results)``.
    """
    if n not in (2, 3, 4):
        raise ValueError("dimension must be 2, 3 or 4")
    if starts < 1:
        raise ValueError("need at least one start")
    count = points if points is not None else n + 1
    seqs = np.random.SeedSequence(seed).spawn(starts)

    def run(ss):
        return descend(random_feasible(n, count, np.random.default_rng(ss)), max_moves)

    with ThreadPoolExecutor(worker_count()) as ex:
        results = list(ex.map(run, seqs))
    best = min(range(starts), key=lambda i: (results[i].diameter, i))
    return results[best].config, results[best].diameter, results


def circle_feasible_gaps(angles_deg: np.ndarray) -> np.ndarray:
    """Largest arc gap (degrees) of each row of angles; feasible iff <= 180."""
    a = np.sort(np.mod(angles_deg, 360.0), axis=-1)
    gaps = np.diff(a, axis=-1)
    wrap = 360.0 - (a[..., -1] - a[..., 0])
    return np.maximum(gaps.max(axis=-1), wrap)


def chord(deg) -> np.ndarray:
    return 2 * np.sin(np.radians(np.asarray(deg, float)) / 2)


def brute_force_triples(step_deg: float = 0.25) -> tuple[float, tuple]:
    """Minimum diameter of feasible triples on the circle, first point at angle 0.

    Exhaustive over a grid of the other two angles; feasibility from arc gaps.
    """
    grid = np.arange(0.0, 360.0, step_deg)
    b, c = np.meshgrid(grid, grid, indexing="ij")
    b, c = b.ravel(), c.ravel()
    keep = b < c
    b, c = b[keep], c[keep]
    ok = circle_feasible_gaps(np.stack([np.zeros_like(b), b, c], axis=1)) <= 180.0 + 1e-12

    def arc(x):
        x = np.mod(x, 360.0)
        return np.minimum(x, 360.0 - x)

    diam = chord(np.maximum.reduce([arc(b), arc(c), arc(c - b)]))
    diam = np.where(ok, diam, np.inf)
    i = int(np.argmin(diam))
    return float(diam[i]), (0.0, float(b[i]), float(c[i]))


def semicircle_lower_bound_check(ps) -> bool:
    """Points on the unit circle not in an open semicircle have diameter >= sqrt(3)."""
    pts = as_points(ps, 2)
    if not np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=UNIT_TOL, rtol=0):
        raise ValueError("points must lie on the unit circle")
    if not feasible(pts):
        return True
    return diameter(pts) >= math.sqrt(3) - 1e-9


def sampled_hemisphere_oracle(ps, directions: int = 100_000, seed: int = 0) -> tuple[bool, float]:
    """Brute-force check over random directions: (some sampled open hemisphere
    contains the points, best sampled margin)."""
    pts = as_points(ps)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((directions, pts.shape[1]))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    margins = np.min(u @ pts.T, axis=1)
    best = float(margins.max())
    return best > 0, best


def simplex_gap_profile(n: int) -> np.ndarray:
    """All-equal distance profile of the inscribed regular simplex."""
    return np.full((n + 1) * n // 2, simplex_diameter(n))


__all__ = ["RIGID", "SphereConfig", "feasible", "improvement_move", "random_feasible", "descend",
           "minimize_diameter", "brute_force_triples", "semicircle_lower_bound_check",
           "sampled_hemisphere_oracle", "circle_feasible_gaps", "hemisphere_status"]
