"""Decompositions of a domain into closed pieces, and their verification.

"Meet at a point" follows the closed-set convention: a piece counts at ``x``
when it intersects the closed ``delta``-ball around ``x``, i.e. when its
``sdf`` at ``x`` is at most ``delta``.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .geometry import point_cloud_diameter, unit_sphere_samples
from .pieces import Piece

SCHEMA = "lebesgue-lab/1"
CHUNK = 200_000


def worker_count() -> int:
    env = os.environ.get("LEBESGUE_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class Domain:
    """Unit cube [0, s]^n, ball of radius s, or a planar/spatial window.

    ``open_boundary`` excludes the boundary of a ball (the open unit disc).
    """

    kind: str
    dimension: int
    scale: float = 1.0
    lo: Optional[tuple] = None
    hi: Optional[tuple] = None
    open_boundary: bool = False

    def __post_init__(self):
        if self.kind not in ("cube", "ball", "planar-window"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "planar-window":
            if self.lo is None or self.hi is None:
                raise ValueError("window needs bounds")
            if len(self.lo) != self.dimension or any(a >= b for a, b in zip(self.lo, self.hi)):
                raise ValueError("invalid window bounds")

    @classmethod
    def cube(cls, n: int, scale: float = 1.0) -> "Domain":
        return cls("cube", n, scale)

    @classmethod
    def ball(cls, n: int, open_boundary: bool = False) -> "Domain":
        return cls("ball", n, open_boundary=open_boundary)

    @classmethod
    def window(cls, lo, hi) -> "Domain":
        lo, hi = tuple(float(v) for v in lo), tuple(float(v) for v in hi)
        return cls("planar-window", len(lo), lo=lo, hi=hi)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.dimension
        if self.kind == "cube":
            return np.zeros(n), np.full(n, self.scale)
        if self.kind == "ball":
            return np.full(n, -self.scale), np.full(n, self.scale)
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    def contains(self, x, tol: float = 1e-12) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        if x.shape[1] != self.dimension:
            raise ValueError("dimension mismatch")
        if self.kind == "ball":
            r = np.linalg.norm(x, axis=1)
            if self.open_boundary:
                return r < self.scale - tol
            return r <= self.scale + tol
        lo, hi = self.bounds()
        return np.all((x >= lo - tol) & (x <= hi + tol), axis=1)

    def grid_chunks(self, h: float, lo=None, hi=None) -> Iterator[np.ndarray]:
        """Grid points at spacing h inside the domain (optionally within a box)."""
        dlo, dhi = self.bounds()
        lo = dlo if lo is None else np.maximum(dlo, lo)
        hi = dhi if hi is None else np.minimum(dhi, hi)
        axes = []
        for a, b in zip(lo, hi):
            # grid anchored at the domain corner so spacing is consistent
            start = math.ceil((a - dlo[len(axes)]) / h - 1e-9)
            stop = math.floor((b - dlo[len(axes)]) / h + 1e-9)
            axes.append(dlo[len(axes)] + h * np.arange(start, stop + 1))
        if any(len(a) == 0 for a in axes):
            return
        # iterate over the first axis in slabs to bound memory
        rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, len(axes) - 1) \
            if len(axes) > 1 else np.zeros((1, 0))
        per = max(1, CHUNK // max(1, len(rest)))
        for s in range(0, len(axes[0]), per):
            first = axes[0][s:s + per]
            pts = np.concatenate([np.repeat(first, len(rest))[:, None], np.tile(rest, (len(first), 1))], axis=1)
            pts = pts[self.contains(pts)]
            if len(pts):
                yield pts

    def boundary_samples(self, h: float) -> np.ndarray:
        """Points on the domain boundary at spacing about h (ball only)."""
        if self.kind != "ball":
            return np.zeros((0, self.dimension))
        n = self.dimension
        area = 2 * math.pi if n == 2 else 4 * math.pi if n == 3 else 2 * math.pi ** (n / 2) / math.gamma(n / 2)
        count = int(min(4_000_000, max(64, area / h ** (n - 1))))
        return unit_sphere_samples(n, count) * self.scale

    def random(self, count: int, rng: np.random.Generator) -> np.ndarray:
        n = self.dimension
        lo, hi = self.bounds()
        if self.kind == "ball":
            g = rng.standard_normal((count, n))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = rng.random(count) ** (1.0 / n)
            pts = g * r[:, None] * self.scale
            return pts[self.contains(pts)]
        return lo + (hi - lo) * rng.random((count, n))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dimension": self.dimension}
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.kind == "planar-window":
            d["lo"], d["hi"] = list(self.lo), list(self.hi)
        if self.open_boundary:
            d["open"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        lo = tuple(d["lo"]) if "lo" in d else None
        hi = tuple(d["hi"]) if "hi" in d else None
        return cls(d["kind"], int(d["dimension"]), float(d.get("scale", 1.0)), lo, hi, bool(d.get("open", False)))


@dataclass
class Decomposition:
    domain: Domain
    pieces: list
    provenance: dict = field(default_factory=dict)
    probes: np.ndarray = None
    declared_multiplicity: Optional[int] = None

    def __post_init__(self):
        ids = [p.id for p in self.pieces]
        if len(set(ids)) != len(ids):
            raise ValueError("piece ids must be unique")
        if self.probes is None:
            self.probes = np.zeros((0, self.domain.dimension))
        self.probes = np.asarray(self.probes, float).reshape(-1, self.domain.dimension)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def ids(self) -> list:
        return [p.id for p in self.pieces]

    def piece(self, pid: int) -> Piece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(f"no piece with id {pid}")

    def sdf_matrix(self, x: np.ndarray) -> np.ndarray:
        """(m, pieces) matrix of piece sdf values."""
        x = np.atleast_2d(x)
        return np.column_stack([p.sdf(x) for p in self.pieces]) if len(x) else np.zeros((0, len(self.pieces)))

    def domain_probes(self) -> np.ndarray:
        if len(self.probes) == 0:
            return self.probes
        return self.probes[self.domain.contains(self.probes)]

    def rescaled(self, s: float) -> "Decomposition":
        """Copy scaled by ``s`` about the origin (cube domains become [0, s]^n)."""
        dom = self.domain
        if dom.kind == "planar-window":
            new_dom = Domain.window(np.asarray(dom.lo) * s, np.asarray(dom.hi) * s)
        else:
            new_dom = Domain(dom.kind, dom.dimension, dom.scale * s, open_boundary=dom.open_boundary)
        prov = dict(self.provenance)
        prov["rescaled"] = prov.get("rescaled", 1.0) * s
        return Decomposition(new_dom, [p.rescaled(s) for p in self.pieces], prov,
                             self.probes * s, self.declared_multiplicity)

    def max_analytic_diameter(self) -> Optional[float]:
        vals = [p.analytic_diameter for p in self.pieces if not p.partial]
        if not vals or any(v is None for v in vals):
            return None
        return max(vals)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dimension": self.dimension,
            "domain": self.domain.to_dict(),
            "pieces": [p.to_dict() for p in self.pieces],
            "provenance": self.provenance,
            "probes": self.probes.tolist(),
            "declared_multiplicity": self.declared_multiplicity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Decomposition":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {d.get('schema')!r}")
        dom = Domain.from_dict(d["domain"])
        if int(d["dimension"]) != dom.dimension:
            raise ValueError("dimension does not match domain")
        pieces = [Piece.from_dict(p) for p in d["pieces"]]
        return cls(dom, pieces, d.get("provenance", {}), np.asarray(d.get("probes", []), float),
                   d.get("declared_multiplicity"))


# ---------------------------------------------------------------- reports


@dataclass
class MultiplicityReport:
    max_multiplicity: int
    attaining: list  # [(point, ids)]
    delta: float
    h: Optional[float] = None
    points_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "max_multiplicity": self.max_multiplicity,
            "attaining": [{"point": list(map(float, p)), "pieces": list(ids)} for p, ids in self.attaining],
            "delta": self.delta,
            "h": self.h,
            "points_checked": self.points_checked,
        }


@dataclass
class DiameterReport:
    per_piece: list  # [(id, sampled, analytic, partial)]
    max_piece_diameter: float
    h: float

    def to_dict(self) -> dict:
        return {
            "per_piece": [{"id": i, "sampled_diameter": s, "analytic_diameter": a, "partial": p}
                          for i, s, a, p in self.per_piece],
            "max_piece_diameter": self.max_piece_diameter,
            "h": self.h,
        }


@dataclass
class ValidationReport:
    coverage_violations: list
    overlap_violations: list  # [(point, ids)]
    points_checked: int

    @property
    def valid(self) -> bool:
        return not self.coverage_violations and not self.overlap_violations

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "coverage_violations": [list(map(float, p)) for p in self.coverage_violations[:20]],
            "overlap_violations": [{"point": list(map(float, p)), "pieces": list(ids)}
                                   for p, ids in self.overlap_violations[:20]],
            "coverage_violation_count": len(self.coverage_violations),
            "overlap_violation_count": len(self.overlap_violations),
            "points_checked": self.points_checked,
        }


# ---------------------------------------------------------------- operations


def multiplicity_at(d: Decomposition, x, delta: float) -> tuple[int, list]:
    """Number of pieces meeting the closed delta-ball at x, with their ids."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, float).reshape(1, -1)
    if not d.domain.contains(x)[0]:
        raise ValueError("point outside domain")
    s = d.sdf_matrix(x)[0]
    ids = [d.pieces[i].id for i in np.nonzero(s <= delta)[0]]
    return len(ids), ids


def _lex_first(points: np.ndarray) -> int:
    order = np.lexsort(points.T[::-1])
    return int(order[0])


def _scan_chunk(d: Decomposition, pts: np.ndarray, delta: float):
    counts = np.sum(d.sdf_matrix(pts) <= delta, axis=1)
    best = int(counts.max())
    at = pts[counts == best]
    return best, at, len(pts)


def _point_sets(d: Decomposition, h: Optional[float], random: int, seed: int, extra) -> list:
    sets = []
    probes = d.domain_probes()
    if len(probes):
        sets.append(probes)
    if extra is not None and len(extra):
        extra = np.atleast_2d(np.asarray(extra, float))
        sets.append(extra[d.domain.contains(extra)])
    if random:
        rng = np.random.default_rng(seed)
        for s in range(0, random, CHUNK):
            sets.append(d.domain.random(min(CHUNK, random - s), rng))
    return sets


def max_multiplicity(d: Decomposition, h: Optional[float], delta: float, random: int = 0,
                     seed: int = 0, extra=None) -> MultiplicityReport:
    """Maximum meeting count over grid points, declared probes and random probes."""
    if delta <= 0 or (h is not None and h <= delta):
        raise ValueError("need h > delta > 0")
    chunks = _point_sets(d, h, random, seed, extra)
    sources = list(chunks)
    if h is not None:
        sources.extend(d.domain.grid_chunks(h))
    with ThreadPoolExecutor(worker_count()) as ex:
        results = list(ex.map(lambda c: _scan_chunk(d, c, delta), [c for c in sources if len(c)]))
    if not results:
        raise ValueError("no probe points in domain")
    best = max(r[0] for r in results)
    pts = np.unique(np.concatenate([r[1] for r in results if r[0] == best]), axis=0)[:5]
    attaining = [(p, multiplicity_at(d, p, delta)[1]) for p in pts]
    return MultiplicityReport(best, attaining, delta, h, sum(r[2] for r in results))


def piece_samples(d: Decomposition, pid: int, h: float) -> np.ndarray:
    p = d.piece(pid)
    box = p.bbox()
    lo, hi = (None, None) if box is None else (box[0] - h, box[1] + h)
    clouds = []
    for pts in d.domain.grid_chunks(h, lo, hi):
        clouds.append(pts[p.sdf(pts) <= 0.0])
    bnd = d.domain.boundary_samples(h)
    if len(bnd):
        clouds.append(bnd[p.sdf(bnd) <= 0.0])
    probes = d.probes
    if len(probes):
        inside = d.domain.contains(probes, tol=1e-9) if not d.domain.open_boundary else \
            np.linalg.norm(probes, axis=1) <= d.domain.scale + 1e-12
        probes = probes[inside]
        clouds.append(probes[p.sdf(probes) <= 0.0])
    return np.concatenate(clouds) if clouds else np.zeros((0, d.dimension))


def piece_diameter(d: Decomposition, pid: int, h: float) -> float:
    """Diameter of the sampled points of piece ``pid`` (a lower bound on the truth)."""
    pts = piece_samples(d, pid, h)
    if len(pts) == 0:
        raise ValueError("resolution too coarse")
    return point_cloud_diameter(pts)


def diameter_report(d: Decomposition, h: float) -> DiameterReport:
    rows = []
    for p in d.pieces:
        try:
            s = piece_diameter(d, p.id, h)
        except ValueError:
            s = float("nan")
        rows.append((p.id, s, p.analytic_diameter, p.partial))
    full = [(a if a is not None else s) for _, s, a, partial in rows if not partial]
    full = [v for v in full if not math.isnan(v)]
    return DiameterReport(rows, max(full) if full else float("nan"), h)


def validate(d: Decomposition, h: float, tau: Optional[float] = None) -> ValidationReport:
    """Check covering and disjoint interiors on the grid of spacing h."""
    cov, over, total = [], [], 0
    for pts in d.domain.grid_chunks(h):
        s = d.sdf_matrix(pts)
        t = np.array([p.tau for p in d.pieces]) if tau is None else np.full(len(d.pieces), tau)
        covered = np.any(s <= t, axis=1)
        cov.extend(pts[~covered])
        inner = s < -t
        bad = np.nonzero(inner.sum(axis=1) >= 2)[0]
        for i in bad:
            over.append((pts[i], [d.pieces[j].id for j in np.nonzero(inner[i])[0]]))
        total += len(pts)
    return ValidationReport(cov, over, total)


def adjacency_graph(d: Decomposition, h: Optional[float], delta: float, extra=None) -> dict:
    """Adjacency as {id: set(ids)}: an edge when some probe sees both pieces within delta."""
    graph = {p.id: set() for p in d.pieces}
    sources = _point_sets(d, h, 0, 0, extra)
    if h is not None:
        sources.extend(d.domain.grid_chunks(h))
    ids = d.ids
    for pts in sources:
        if not len(pts):
            continue
        near = d.sdf_matrix(pts) <= delta
        multi = near[near.sum(axis=1) >= 2]
        if not len(multi):
            continue
        pairs = np.unique(multi, axis=0)
        for row in pairs:
            idx = np.nonzero(row)[0]
            for a, b in itertools.combinations(idx, 2):
                graph[ids[a]].add(ids[b])
                graph[ids[b]].add(ids[a])
    return graph


COLOR_BUDGET = 200_000
COLOR_MAX_EXACT = 400


class _BudgetExceeded(Exception):
    pass


def _colorable(order: list, graph: dict, k: int, budget: list) -> Optional[dict]:
    colors: dict = {}

    def place(i: int) -> bool:
        if i == len(order):
            return True
        budget[0] -= 1
        if budget[0] < 0:
            raise _BudgetExceeded
        v = order[i]
        used = {colors[u] for u in graph[v] if u in colors}
        # symmetry break: never open more than one new colour at a time
        top = max(colors.values(), default=-1)
        for c in range(min(k, top + 2)):
            if c not in used:
                colors[v] = c
                if place(i + 1):
                    return True
                del colors[v]
        return False

    return dict(colors) if place(0) else None


def color(graph: dict, exact_limit: int = 4) -> tuple[dict, int]:
    """Proper colouring; exact chromatic number when it is at most ``exact_limit``.

    The exact search is a backtracking with a node budget; past the budget (or
    for very large graphs) a greedy colouring is returned instead.
    Returns ``(colouring, number_of_colours)``.
    """
    if not graph:
        return {}, 0
    order = sorted(graph, key=lambda v: (-len(graph[v]), v))
    if len(order) <= COLOR_MAX_EXACT:
        budget = [COLOR_BUDGET]
        try:
            for k in range(1, exact_limit + 1):
                c = _colorable(order, graph, k, budget)
                if c is not None:
                    return c, k
        except _BudgetExceeded:
            pass
    colors: dict = {}
    for v in order:
        used = {colors[u] for u in graph[v] if u in colors}
        colors[v] = next(c for c in itertools.count() if c not in used)
    return colors, max(colors.values()) + 1
