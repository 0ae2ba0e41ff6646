"""Builders for the model decompositions, with declared diameters and probes.

Each builder returns a :class:`Decomposition` carrying

* ``analytic_diameter`` on every bounded piece where a formula is known,
* ``declared_multiplicity``, the largest number of pieces meeting at a point,
* ``probes``, singular points (corners, triple curves, wing edges) that a
  uniform grid would miss.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .decomposition import Decomposition, Domain
from .geometry import simplex_diameter, simplex_vertices, unit_sphere_samples
from .pieces import (
    Brick,
    DiskAnnulus,
    GridCell,
    HexPrism,
    PancakeLayer,
    PancakeProfile,
    Shell,
    SimplexCore,
    SimplexWingCell,
)

DEFAULT_T = 1.01


# ---------------------------------------------------------------- grids and bricks


def build_grid(n: int, k: int) -> Decomposition:
    """k^n closed subcubes of [0, 1]^n, each of diameter sqrt(n)/k."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    pieces = []
    for pid, idx in enumerate(itertools.product(range(k), repeat=n)):
        lo = [i / k for i in idx]
        hi = [(i + 1) / k for i in idx]
        pieces.append(GridCell(id=pid, lo=lo, hi=hi, analytic_diameter=math.sqrt(n) / k))
    ticks = np.arange(k + 1) / k
    probes = np.array(list(itertools.product(ticks, repeat=n)))
    return Decomposition(Domain.cube(n), pieces, {"construction": "grid", "n": n, "k": k},
                         probes, 2 ** n if k > 1 else 1)


def build_ball_grid(n: int, k: int) -> Decomposition:
    """Cubical grid of side 2/k on [-1, 1]^n, clipped to the unit ball."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    side = 2.0 / k
    pieces = []
    for idx in itertools.product(range(k), repeat=n):
        lo = np.array([-1 + i * side for i in idx])
        hi = lo + side
        nearest = np.clip(0.0, lo, hi)
        if np.linalg.norm(nearest) >= 1 - 1e-12:
            continue
        full = np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))) <= 1.0
        pieces.append(GridCell(id=len(pieces), lo=lo.tolist(), hi=hi.tolist(), clip="ball",
                               analytic_diameter=side * math.sqrt(n) if full else None))
    ticks = -1 + side * np.arange(k + 1)
    probes = np.array(list(itertools.product(ticks, repeat=n)))
    probes = probes[np.linalg.norm(probes, axis=1) < 1]
    return Decomposition(Domain.ball(n), pieces, {"construction": "ball-grid", "n": n, "k": k},
                         probes, 2 ** n if k > 1 else 1)


def build_offset_bricks(width: float = 0.5, height: float = 0.25, offset: Optional[float] = None) -> Decomposition:
    """Running-bond brick rows on [0, 1]^2; odd rows shifted by ``offset``."""
    if width <= 0 or height <= 0:
        raise ValueError("brick sides must be positive")
    offset = width / 2 if offset is None else offset
    pieces, corners = [], set()
    rows = math.ceil(1 / height - 1e-12)
    for j in range(rows):
        y0, y1 = j * height, min(1.0, (j + 1) * height)
        shift = (offset * (j % 2)) % width
        x = shift - width if shift > 0 else 0.0
        while x < 1 - 1e-12:
            x0, x1 = max(0.0, x), min(1.0, x + width)
            if x1 - x0 > 1e-12:
                pieces.append(Brick(id=len(pieces), lo=[x0, y0], hi=[x1, y1],
                                    analytic_diameter=math.hypot(x1 - x0, y1 - y0)))
                corners.update({(x0, y0), (x1, y0), (x0, y1), (x1, y1)})
            x += width
    aligned = abs(math.remainder(offset, width)) < 1e-12
    probes = np.array(sorted(corners))
    return Decomposition(Domain.cube(2), pieces,
                         {"construction": "offset-bricks", "width": width, "height": height, "offset": offset},
                         probes, 4 if aligned else 3)


# ---------------------------------------------------------------- shells


def build_shells(n: int = 2, radii: Optional[Sequence[float]] = None, window: float = 4.0) -> Decomposition:
    """Disk (ball) and concentric annuli (shells), truncated to the window [-a, a]^n.

    The last piece is the unbounded remainder outside the largest radius;
    pieces poking out of the window are marked partial.
    """
    if n not in (2, 3):
        raise ValueError("shells support dimension 2 or 3")
    if radii is None:
        radii = [float(r) for r in range(1, int(math.floor(window)) + 1)]
    radii = [float(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    if window < radii[0]:
        raise ValueError("window smaller than the innermost radius")
    cls = DiskAnnulus if n == 2 else Shell
    center = [0.0] * n
    bounds = [0.0] + radii + [None]
    pieces = []
    for i, (r0, r1) in enumerate(zip(bounds, bounds[1:])):
        partial = r1 is None or r1 > window
        pieces.append(cls(id=i, center=center, r_inner=r0, r_outer=r1, partial=partial,
                          analytic_diameter=None if partial else 2 * r1))
    dirs = unit_sphere_samples(n, 16 if n == 2 else 64)
    probes = np.concatenate([dirs * r for r in radii])
    dom = Domain.window([-window] * n, [window] * n)
    return Decomposition(dom, pieces, {"construction": "shells", "n": n, "radii": radii, "window": window},
                         probes, 2)


# ---------------------------------------------------------------- pancakes


def pancake_profile(n: int = 2, m: int = 5, w: float = math.pi / 4, heights=None) -> PancakeProfile:
    if m < 1:
        raise ValueError("need at least one pancake layer")
    heights = tuple([0.5] * m if heights is None else heights)
    if len(heights) != m:
        raise ValueError("one bump height per layer")
    return PancakeProfile(dimension=n, w=w, heights=heights)


def build_pancakes(n: int = 2, m: int = 5, w: float = math.pi / 4, heights=None,
                   window: float = 4.0) -> Decomposition:
    """Core disk plus m alternating pancake layers plus the outside remainder.

    Layer k coincides with layer k-1's outer curve on its cap (south for odd k,
    north for even k), so the pieces k-1, k, k+1 meet at the two cap endpoints.
    """
    prof = pancake_profile(n, m, w, heights)
    if prof.max_radius() >= window:
        raise ValueError("window too small for the pancake stack")
    pieces = [PancakeLayer(id=k, index=k, profile=prof, partial=(k == m + 1)) for k in range(m + 2)]
    # singular points: cap endpoints; regular probes along caps and curves for adjacency
    plane = []
    for k in range(1, m + 1):
        cap_psi = w if k % 2 == 1 else math.pi - w
        centre = 0.0 if k % 2 == 1 else math.pi
        for psi in (cap_psi, centre, (cap_psi + centre) / 2):
            plane.append((psi, prof.rho(k, np.array([psi]))[0]))
    for k in range(0, m + 1):
        for psi in np.linspace(0, math.pi, 13):
            plane.append((psi, prof.rho(k, np.array([psi]))[0]))
    probes = []
    azimuths = [0.0, math.pi] if n == 2 else np.linspace(0, 2 * math.pi, 8, endpoint=False)
    for psi, r in plane:
        for phi in azimuths:
            u = r * math.sin(psi)
            z = -r * math.cos(psi)
            if n == 2:
                probes.append((u * math.cos(phi), z))
            else:
                probes.append((u * math.cos(phi), u * math.sin(phi), z))
    dom = Domain.window([-window] * n, [window] * n)
    return Decomposition(dom, pieces, {"construction": "pancakes", "n": n, "m": m, "w": w,
                                       "heights": list(prof.heights), "window": window},
                         np.array(probes), 3)


# ---------------------------------------------------------------- simplex ball


def _polish(x: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Snap a near-feasible unit vector exactly onto its active constraints and the sphere."""
    act = np.abs(A @ x - b) < tol
    if not act.any():
        return x / np.linalg.norm(x)
    Aa, ba = A[act], b[act]
    p, *_ = np.linalg.lstsq(Aa, ba, rcond=None)
    _, sv, vt = np.linalg.svd(Aa)
    rank = int(np.sum(sv > 1e-10))
    null = vt[rank:]
    rest = 1.0 - p @ p
    if rest < 0 or len(null) == 0:
        return x / np.linalg.norm(x)
    z = null @ x
    nz = np.linalg.norm(z)
    if nz == 0:
        return x / np.linalg.norm(x)
    return p + null.T @ (z * math.sqrt(rest) / nz)


def spherical_region_diameter(A: np.ndarray, b: np.ndarray, seeds: np.ndarray, pairs: int = 10,
                              random_pairs: int = 4, seed: int = 0) -> float:
    """Diameter of {x on the unit sphere : A x <= b} by multistart SLSQP.

    ``seeds`` are feasible points used to start the search; the farthest seed
    pairs are refined, then each optimum is snapped exactly onto its active
    constraints before the distance is taken.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    seeds = np.asarray(seeds, float)
    n = A.shape[1]
    d2 = np.sum((seeds[:, None] - seeds[None]) ** 2, axis=-1)
    order = np.dstack(np.unravel_index(np.argsort(-d2, axis=None), d2.shape))[0]
    starts = [(seeds[i], seeds[j]) for i, j in order if i < j][:pairs]
    rng = np.random.default_rng(seed)
    for _ in range(random_pairs):
        i, j = rng.choice(len(seeds), 2, replace=len(seeds) < 2)
        starts.append((seeds[i] + 0.01 * rng.standard_normal(n), seeds[j] + 0.01 * rng.standard_normal(n)))
    best = math.sqrt(float(d2.max()))
    cons = [
        {"type": "eq", "fun": lambda z: z[:n] @ z[:n] - 1.0, "jac": lambda z: np.concatenate([2 * z[:n], np.zeros(n)])},
        {"type": "eq", "fun": lambda z: z[n:] @ z[n:] - 1.0, "jac": lambda z: np.concatenate([np.zeros(n), 2 * z[n:]])},
        {"type": "ineq", "fun": lambda z: b - A @ z[:n], "jac": lambda z: np.hstack([-A, np.zeros_like(A)])},
        {"type": "ineq", "fun": lambda z: b - A @ z[n:], "jac": lambda z: np.hstack([np.zeros_like(A), -A])},
    ]

    def obj(z):
        diff = z[:n] - z[n:]
        return -diff @ diff, np.concatenate([-2 * diff, 2 * diff])

    for x0, y0 in starts:
        res = minimize(obj, np.concatenate([x0, y0]), jac=True, method="SLSQP", constraints=cons,
                       options={"ftol": 1e-15, "maxiter": 400})
        x, y = _polish(res.x[:n], A, b), _polish(res.x[n:], A, b)
        if np.all(A @ x <= b + 1e-12) and np.all(A @ y <= b + 1e-12):
            best = max(best, float(np.linalg.norm(x - y)))
    return best


def _check_t(n: int, t: float) -> None:
    if n < 2:
        raise ValueError("simplex ball needs n >= 2")
    if not 1.0 <= t < n:
        raise ValueError("scale t must satisfy 1 <= t < n")


def edge_exit_points(n: int, t: float) -> np.ndarray:
    """Points where the edges of t*simplex leave the unit sphere (two per edge)."""
    v = simplex_vertices(n)
    c = 2 * (1 + 1 / n)
    disc = c * c - 4 * c * (1 - 1 / t ** 2)
    if disc < 0:
        return np.zeros((0, n))
    s = (c - math.sqrt(disc)) / (2 * c)
    pts = [t * (v[j] + s * (v[k] - v[j])) for j in range(n + 1) for k in range(n + 1) if j != k]
    return np.array(pts)


def core_diameter(n: int, t: float) -> float:
    """Diameter of (t * regular simplex) intersected with the unit ball.

    While the simplex edges still leave the ball, the extreme points are the
    spherical patches around the vertices and the diameter is attained between
    edge exit points. Past that (the patches merge) fall back to optimisation.
    """
    _check_t(n, t)
    if t == 1.0:
        return simplex_diameter(n)
    pts = edge_exit_points(n, t)
    if len(pts):
        d2 = np.sum((pts[:, None] - pts[None]) ** 2, axis=-1)
        return float(math.sqrt(d2.max()))
    v = simplex_vertices(n)
    mids = np.array([(v[i] + v[j]) / np.linalg.norm(v[i] + v[j]) for i, j in itertools.combinations(range(n + 1), 2)])
    return spherical_region_diameter(-v, np.full(n + 1, t / n), np.concatenate([v, mids]))


def _wing_region(n: int, t: float, face: int = 0):
    v = simplex_vertices(n)
    vj = v[face]
    others = [i for i in range(n + 1) if i != face]
    A = np.vstack([vj[None] - v[others], vj[None]])
    b = np.concatenate([np.zeros(n), [-t / n]])
    return v, A, b


def wing_seeds(n: int, t: float, face: int = 0) -> np.ndarray:
    """Centroid directions of face-vertex subsets, pulled into the cap, plus cap/edge corners."""
    v, A, b = _wing_region(n, t, face)
    c = -v[face]
    cap = math.acos(t / n)
    others = [i for i in range(n + 1) if i != face]
    out = []
    for k in range(1, n + 1):
        for sub in itertools.combinations(others, k):
            u = v[list(sub)].sum(axis=0)
            u /= np.linalg.norm(u)
            if u @ c < t / n:
                e = u - (u @ c) * c
                e /= np.linalg.norm(e)
                u = math.cos(cap) * c + math.sin(cap) * e
            out.append(u)
    return np.array(out)


def wing_diameter(n: int, t: float) -> float:
    """Diameter of one exterior (wing) piece of the simplex ball."""
    _check_t(n, t)
    if n == 2:
        # circular segment beyond a chord at distance t/2, at most the 120-degree arc
        return 2 * math.sin(min(math.pi / 3, math.acos(t / 2)))
    _, A, b = _wing_region(n, t)
    return spherical_region_diameter(A, b, wing_seeds(n, t))


def wing_diameter_limit(n: int) -> float:
    """Wing diameter as t -> 1: farthest pair of centroid directions of a balanced split.

    Splitting the n face vertices into groups of a and b = n - a vertices, the
    normalised group sums make angle arccos(-sqrt(ab / ((a+1)(b+1)))).
    """
    a, b = n // 2, n - n // 2
    return math.sqrt(2 + 2 * math.sqrt(a * b / ((a + 1) * (b + 1))))


def stated_wing_formula(n: int) -> float:
    """sqrt(2 + sqrt(2 - 2/n)); agrees with :func:`wing_diameter_limit` for n = 2, 3 only."""
    return math.sqrt(2 + math.sqrt(2 - 2 / n))


def simplex_ball_probes(n: int, t: float, per_edge: int = 25) -> np.ndarray:
    v = simplex_vertices(n)
    probes = []
    for a, b in itertools.combinations(range(n + 1), 2):
        for s in np.linspace(0, 1, per_edge):
            p = t * ((1 - s) * v[a] + s * v[b])
            nrm = np.linalg.norm(p)
            if nrm <= 1:
                probes.append(p)
                # radial wing edge from the simplex edge out to the sphere
                for r in np.linspace(nrm, 1.0, 5)[1:]:
                    probes.append(p / nrm * r)
    probes.extend(edge_exit_points(n, t))
    for j in range(n + 1):
        # vertex rays and face centres
        probes.extend([v[j] * r for r in (0.25, 0.5, 0.75)])
        probes.append(-v[j] * t / n)
    return np.array(probes)


def build_simplex_ball(n: int = 3, t: float = DEFAULT_T) -> Decomposition:
    """n+2 pieces of the unit n-ball: the truncated simplex plus one wing cell per face.

    At t == 1 the simplex vertices touch the sphere, where n+1 pieces would meet,
    so the domain is the open ball in that case.
    """
    _check_t(n, t)
    core_d = core_diameter(n, t)
    wing_d = wing_diameter(n, t)
    pieces = [SimplexCore(id=0, n=n, t=t, analytic_diameter=core_d)]
    pieces += [SimplexWingCell(id=j + 1, n=n, t=t, face=j, analytic_diameter=wing_d) for j in range(n + 1)]
    dom = Domain.ball(n, open_boundary=(t == 1.0))
    return Decomposition(dom, pieces, {"construction": "simplex-ball", "n": n, "t": t},
                         simplex_ball_probes(n, t), n)


def build_equilateral_disk() -> Decomposition:
    """Inscribed equilateral triangle plus three circular segments of the open disc."""
    d = build_simplex_ball(2, 1.0)
    d.provenance = {"construction": "equilateral-disk"}
    return d


def balance_scale(n: int, tol: float = 1e-13) -> tuple[float, float]:
    """Scale t* at which the truncated simplex and the wings have equal diameter.

    Bisection on core_diameter(t) - wing_diameter(t); the bracket is checked
    for monotonicity (core nondecreasing, wing nonincreasing) first.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    f = lambda t: core_diameter(n, t) - wing_diameter(n, t)
    lo = 1.0
    f_lo = f(lo)
    if abs(f_lo) < 1e-12:
        return 1.0, core_diameter(n, 1.0)
    if f_lo > 0:
        raise ValueError("bracket invalid")
    grid = [1.0 + (n - 1.0) * s for s in np.linspace(0, 0.99, 100)[1:]]
    hi = next((t for t in grid if f(t) >= 0), None)
    if hi is None:
        raise ValueError("bracket invalid")
    ts = np.linspace(lo, hi, 9)
    cores = [core_diameter(n, t) for t in ts]
    wings = [wing_diameter(n, t) for t in ts]
    if np.any(np.diff(cores) < -1e-12) or np.any(np.diff(wings) > 1e-12):
        raise ValueError("bracket invalid")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    t_star = (lo + hi) / 2
    return t_star, (core_diameter(n, t_star) + wing_diameter(n, t_star)) / 2


# ---------------------------------------------------------------- hexagonal prisms


def max_hex_diameter(eps: float, height: float = 1.0) -> float:
    """Largest polygon width keeping a prism of the given height within 1 + eps."""
    return math.sqrt(max((1 + eps) ** 2 - height ** 2, 0.0))


def honeycomb_cells(circumdiameter: float, offset=(0.13, 0.07)):
    """Flat-topped hexagons of the given circumdiameter clipped to the unit square.

    Yields ``(clipped_polygon_vertices, hexagon_vertices)``.
    """
    from shapely.geometry import Polygon, box

    R = circumdiameter / 2
    square = box(0.0, 0.0, 1.0, 1.0)
    dx, dy = 1.5 * R, math.sqrt(3) * R
    ang = np.pi / 3 * np.arange(6)
    corner = np.column_stack([np.cos(ang), np.sin(ang)]) * R
    imax = int(math.ceil(1 / dx)) + 2
    jmax = int(math.ceil(1 / dy)) + 2
    for i in range(-2, imax + 1):
        for j in range(-2, jmax + 1):
            c = np.array([offset[0] + i * dx, offset[1] + (j + 0.5 * (i % 2)) * dy])
            hexagon = c + corner
            clipped = Polygon(hexagon).intersection(square)
            if clipped.is_empty or clipped.area < 1e-12:
                continue
            coords = np.asarray(clipped.exterior.coords)[:-1]
            yield coords, hexagon


def build_hex_prism(eps: float = 0.05, circumdiameter: Optional[float] = None, layers: int = 1,
                    offset=(0.13, 0.07)) -> Decomposition:
    """Honeycomb-in-the-square times [0, 1]: pieces of diameter <= 1 + eps meeting in threes.

    ``layers > 1`` slices the height into equal slabs (a refinement with
    diameters below 1, used as a corpus for witness searches).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if layers < 1:
        raise ValueError("need at least one layer")
    limit = max_hex_diameter(eps, 1.0 / layers)
    dh = max_hex_diameter(eps) if circumdiameter is None else circumdiameter
    if dh <= 0 or dh > limit * (1 + 1e-12):
        raise ValueError("hexagon circumdiameter too large for 1 + eps")
    cells = list(honeycomb_cells(dh, offset))
    pieces = []
    for coords, _ in cells:
        for lay in range(layers):
            z0, z1 = lay / layers, (lay + 1) / layers
            piece = HexPrism(id=len(pieces), polygon=coords.tolist(), z_lo=z0, z_hi=z1)
            piece.analytic_diameter = piece.exact_diameter()
            pieces.append(piece)
    verts = np.unique(np.round(np.concatenate([h for _, h in cells]), 12), axis=0)
    verts = verts[np.all((verts >= 0) & (verts <= 1), axis=1)]
    clip_verts = np.unique(np.round(np.concatenate([c for c, _ in cells]), 12), axis=0)
    zs = np.unique(np.concatenate([np.linspace(0, 1, 5), np.arange(layers + 1) / layers]))
    plane = np.concatenate([verts, clip_verts])
    probes = np.array([[x, y, z] for x, y in plane for z in zs])
    return Decomposition(Domain.cube(3), pieces,
                         {"construction": "hex-prism", "eps": eps, "circumdiameter": dh, "layers": layers,
                          "offset": list(offset)},
                         probes, 3 if layers == 1 else 6)
