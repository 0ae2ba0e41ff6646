"""Closed pieces of a decomposition.

A piece is described by a signed function ``sdf``: negative in the interior,
zero on the boundary, positive outside. For boxes and round bands it is the
exact signed distance; for intersections of convex constraints it is the max
of the constraint distances (exact inside, a lower bound on distance outside);
for pancake layers it is a radial gap. Membership is ``sdf <= 0`` in every
case, which is all the verification code relies on besides small tolerances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np

from .geometry import simplex_vertices

INTERIOR, BOUNDARY, EXTERIOR = "interior", "boundary", "exterior"
DEFAULT_TAU = 1e-9

PIECE_KINDS: dict[str, type["Piece"]] = {}


def register(cls):
    PIECE_KINDS[cls.kind] = cls
    return cls


def _pts(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


@dataclass(kw_only=True)
class Piece:
    id: int
    analytic_diameter: Optional[float] = None
    partial: bool = False
    scale: float = 1.0
    tau: float = DEFAULT_TAU

    kind: ClassVar[str] = "abstract"
    dimension: ClassVar[int] = 0

    def _sdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sdf(self, x) -> np.ndarray:
        x = _pts(x)
        if self.scale == 1.0:
            return self._sdf(x)
        return self.scale * self._sdf(x / self.scale)

    def classify(self, x) -> np.ndarray:
        s = self.sdf(x)
        out = np.full(s.shape, EXTERIOR, dtype=object)
        out[s <= self.tau] = BOUNDARY
        out[s < -self.tau] = INTERIOR
        return out

    def contains(self, x) -> np.ndarray:
        return self.sdf(x) <= 0.0

    def _bbox(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        return None

    def bbox(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        b = self._bbox()
        if b is None:
            return None
        return np.asarray(b[0], float) * self.scale, np.asarray(b[1], float) * self.scale

    def params(self) -> dict:
        raise NotImplementedError

    def dim(self) -> int:
        return self.dimension

    def interior_point(self) -> np.ndarray:
        lo, hi = self.bbox()
        return (lo + hi) / 2

    def outline_2d(self, window) -> list[np.ndarray]:
        """Boundary loops in the plane (for rendering)."""
        return [_radial_outline(self, self.interior_point())]

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind, "params": self.params(), "partial": self.partial}
        if self.analytic_diameter is not None:
            d["analytic_diameter"] = self.analytic_diameter
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Piece":
        kind = d["kind"]
        if kind not in PIECE_KINDS:
            raise ValueError(f"unknown piece kind {kind!r}")
        return PIECE_KINDS[kind].from_params(
            d["params"],
            id=int(d["id"]),
            analytic_diameter=d.get("analytic_diameter"),
            partial=bool(d.get("partial", False)),
            scale=float(d.get("scale", 1.0)),
        )

    @classmethod
    def from_params(cls, params: dict, **common) -> "Piece":
        return cls(**params, **common)

    def rescaled(self, s: float) -> "Piece":
        from dataclasses import replace

        diam = None if self.analytic_diameter is None else self.analytic_diameter * s
        return replace(self, scale=self.scale * s, analytic_diameter=diam)


def _radial_outline(piece: Piece, center: np.ndarray, samples: int = 1440) -> np.ndarray:
    """Star-shaped outline by bisection along rays from an interior point."""
    ang = 2 * np.pi * np.arange(samples) / samples
    dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    lo = np.zeros(samples)
    hi = np.full(samples, 1.0)
    # grow hi until outside
    for _ in range(60):
        out = piece.sdf(center + dirs * hi[:, None]) > 0
        if out.all():
            break
        hi = np.where(out, hi, hi * 2)
    for _ in range(60):
        mid = (lo + hi) / 2
        inside = piece.sdf(center + dirs * mid[:, None]) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return center + dirs * lo[:, None]


def _circle(center, r, samples=720) -> np.ndarray:
    ang = 2 * np.pi * np.arange(samples) / samples
    return np.asarray(center) + r * np.column_stack([np.cos(ang), np.sin(ang)])


def _window_loop(window) -> np.ndarray:
    (x0, y0), (x1, y1) = np.asarray(window[0]), np.asarray(window[1])
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


# ---------------------------------------------------------------- boxes


@dataclass(kw_only=True)
class _BoxBase(Piece):
    lo: list
    hi: list
    clip: Optional[str] = None

    def __post_init__(self):
        self.lo = [float(v) for v in self.lo]
        self.hi = [float(v) for v in self.hi]
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box bounds must satisfy lo <= hi")
        if self.clip not in (None, "ball"):
            raise ValueError("clip must be None or 'ball'")

    def dim(self) -> int:
        return len(self.lo)

    def _sdf(self, x):
        q = np.maximum(np.asarray(self.lo) - x, x - np.asarray(self.hi))
        outside = np.sqrt(np.sum(np.maximum(q, 0.0) ** 2, axis=1))
        s = outside + np.minimum(np.max(q, axis=1), 0.0)
        if self.clip == "ball":
            s = np.maximum(s, np.linalg.norm(x, axis=1) - 1.0)
        return s

    def _bbox(self):
        lo, hi = np.array(self.lo), np.array(self.hi)
        if self.clip == "ball":
            lo, hi = np.maximum(lo, -1.0), np.minimum(hi, 1.0)
        return lo, hi

    def params(self):
        p = {"lo": list(self.lo), "hi": list(self.hi)}
        if self.clip:
            p["clip"] = self.clip
        return p

    def outline_2d(self, window):
        if self.clip:
            return super().outline_2d(window)
        (x0, y0), (x1, y1) = self.lo, self.hi
        return [np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]) * self.scale]

    def interior_point(self):
        if self.clip == "ball":
            c = (np.array(self.lo) + np.array(self.hi)) / 2
            # pull toward origin until inside the ball
            for _ in range(60):
                if self._sdf(c[None])[0] < 0:
                    break
                c = c * 0.9
            return c * self.scale
        return super().interior_point()


@register
@dataclass(kw_only=True)
class GridCell(_BoxBase):
    kind: ClassVar[str] = "grid-cell"


@register
@dataclass(kw_only=True)
class Brick(_BoxBase):
    kind: ClassVar[str] = "brick"


# ---------------------------------------------------------------- radial bands


@dataclass(kw_only=True)
class _RadialBand(Piece):
    center: list
    r_inner: float = 0.0
    r_outer: Optional[float] = None

    def __post_init__(self):
        self.center = [float(c) for c in self.center]
        if len(self.center) != self.dimension:
            raise ValueError(f"{self.kind} needs a {self.dimension}-d center")
        if self.r_inner < 0 or (self.r_outer is not None and self.r_outer <= self.r_inner):
            raise ValueError("radii must satisfy 0 <= r_inner < r_outer")

    def _sdf(self, x):
        r = np.linalg.norm(x - np.asarray(self.center), axis=1)
        s = np.full(r.shape, -np.inf) if self.r_inner == 0 else self.r_inner - r
        if self.r_outer is not None:
            s = np.maximum(s, r - self.r_outer)
        return s

    def _bbox(self):
        if self.r_outer is None:
            return None
        c = np.asarray(self.center)
        return c - self.r_outer, c + self.r_outer

    def params(self):
        return {"center": list(self.center), "r_inner": self.r_inner, "r_outer": self.r_outer}

    def interior_point(self):
        c = np.asarray(self.center, float)
        if self.r_inner == 0:
            return c * self.scale
        off = np.zeros(self.dimension)
        off[0] = self.r_inner + (1.0 if self.r_outer is None else (self.r_outer - self.r_inner) / 2)
        return (c + off) * self.scale

    def outline_2d(self, window):
        loops = []
        if self.r_outer is None:
            loops.append(_window_loop(window))
        else:
            loops.append(_circle(self.center, self.r_outer) * self.scale)
        if self.r_inner > 0:
            loops.append(_circle(self.center, self.r_inner) * self.scale)
        return loops


@register
@dataclass(kw_only=True)
class DiskAnnulus(_RadialBand):
    kind: ClassVar[str] = "disk-annulus"
    dimension: ClassVar[int] = 2


@register
@dataclass(kw_only=True)
class Shell(_RadialBand):
    kind: ClassVar[str] = "shell"
    dimension: ClassVar[int] = 3


# ---------------------------------------------------------------- pancakes


@dataclass(frozen=True)
class PancakeProfile:
    """Nested star-shaped radius functions rho_0 <= rho_1 <= ... <= rho_m.

    Angles are measured from the south pole (psi = 0) to the north pole
    (psi = pi). Odd layers coincide with the previous curve on the south cap
    ``psi < w``, even layers on the north cap ``psi > pi - w``; elsewhere
    layer k adds ``heights[k-1] * (psi_k - w) / (pi - w)``, where psi_k is the
    angular distance from the layer's own cap centre.
    """

    dimension: int
    w: float
    heights: tuple
    base_radius: float = 1.0

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("pancakes support dimension 2 or 3")
        if not 0 < self.w < math.pi / 2:
            raise ValueError("cap half-width must lie in (0, pi/2)")
        if any(h <= 0 for h in self.heights):
            raise ValueError("bump heights must be positive (monotone nesting)")

    @property
    def layers(self) -> int:
        return len(self.heights)

    def polar(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.dimension == 2:
            u, z = x[:, 0], x[:, 1]
        else:
            u, z = np.hypot(x[:, 0], x[:, 1]), x[:, 2]
        r = np.hypot(u, z)
        with np.errstate(invalid="ignore", divide="ignore"):
            psi = np.where(r > 0, np.arccos(np.clip(-z / np.where(r > 0, r, 1.0), -1, 1)), 0.0)
        return r, psi

    def cap_angle(self, k: int, psi: np.ndarray) -> np.ndarray:
        """Angular distance from layer k's cap centre (south for odd k)."""
        return psi if k % 2 == 1 else np.pi - psi

    def rho(self, k: int, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        out = np.full(psi.shape, float(self.base_radius))
        for j in range(1, k + 1):
            a = self.cap_angle(j, psi)
            out = out + self.heights[j - 1] * np.maximum(a - self.w, 0.0) / (np.pi - self.w)
        return out

    def max_radius(self) -> float:
        return self.base_radius + float(sum(self.heights))

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "w": self.w, "heights": list(self.heights),
                "base_radius": self.base_radius}


@register
@dataclass(kw_only=True)
class PancakeLayer(Piece):
    """Layer ``index`` of a pancake stack: 0 is the core disk, layers+1 the outside."""

    index: int
    profile: PancakeProfile

    kind: ClassVar[str] = "pancake-layer"

    def __post_init__(self):
        if isinstance(self.profile, dict):
            p = dict(self.profile)
            p["heights"] = tuple(p["heights"])
            self.profile = PancakeProfile(**p)
        if not 0 <= self.index <= self.profile.layers + 1:
            raise ValueError("layer index out of range")

    def dim(self):
        return self.profile.dimension

    def _sdf(self, x):
        prof = self.profile
        r, psi = prof.polar(x)
        k = self.index
        if k == 0:
            return r - prof.rho(0, psi)
        if k == prof.layers + 1:
            return prof.rho(prof.layers, psi) - r
        s = np.maximum(prof.rho(k - 1, psi) - r, r - prof.rho(k, psi))
        return np.maximum(s, r * (prof.w - prof.cap_angle(k, psi)))

    def _bbox(self):
        if self.index == self.profile.layers + 1:
            return None
        R = self.profile.rho(self.index, np.linspace(0, np.pi, 721)).max()
        d = self.profile.dimension
        return -np.full(d, R), np.full(d, R)

    def params(self):
        return {"index": self.index, "profile": self.profile.to_dict()}

    def interior_point(self):
        prof = self.profile
        if self.index == 0:
            return np.zeros(prof.dimension)
        # the layer is thickest at its cap's antipode
        psi = np.pi if self.index % 2 == 1 else 0.0
        if self.index == prof.layers + 1:
            r = prof.rho(prof.layers, np.array([psi]))[0] + 0.5
        else:
            r = prof.rho(self.index - 1, np.array([psi]))[0] + self.profile.heights[self.index - 1] / 2
        p = np.zeros(prof.dimension)
        p[-1] = -r * math.cos(psi)
        return p * self.scale

    def _curve(self, k: int, samples: int = 1440) -> np.ndarray:
        t = 2 * np.pi * np.arange(samples) / samples
        # planar angle t measured from the south pole; psi folds it to [0, pi]
        psi = np.where(t <= np.pi, t, 2 * np.pi - t)
        rho = self.profile.rho(k, psi)
        return np.column_stack([rho * np.sin(t), -rho * np.cos(t)]) * self.scale

    def outline_2d(self, window):
        if self.profile.dimension != 2:
            raise ValueError("render supports 2D only")
        k, m = self.index, self.profile.layers
        if k == 0:
            return [self._curve(0)]
        if k == m + 1:
            return [_window_loop(window), self._curve(m)]
        return [self._curve(k), self._curve(k - 1)]


# ---------------------------------------------------------------- simplex ball


@dataclass(kw_only=True)
class _SimplexBase(Piece):
    n: int
    t: float

    def __post_init__(self):
        self.n = int(self.n)
        self.t = float(self.t)
        if self.n < 2:
            raise ValueError("simplex ball needs n >= 2")
        self._v = simplex_vertices(self.n)

    def dim(self):
        return self.n

    def _bbox(self):
        return -np.ones(self.n), np.ones(self.n)


@register
@dataclass(kw_only=True)
class SimplexCore(_SimplexBase):
    """(t * regular simplex) intersected with the unit ball."""

    kind: ClassVar[str] = "simplex-core"

    def _sdf(self, x):
        face = np.max(-(x @ self._v.T) - self.t / self.n, axis=1)
        return np.maximum(face, np.linalg.norm(x, axis=1) - 1.0)

    def params(self):
        return {"n": self.n, "t": self.t}

    def interior_point(self):
        return np.zeros(self.n)


@register
@dataclass(kw_only=True)
class SimplexWingCell(_SimplexBase):
    """Points of the ball outside t*simplex whose origin ray exits through ``face``.

    The face opposite vertex j is {<x, v_j> = -t/n}; a ray in direction u exits
    through the face with the most negative <u, v_j>.
    """

    face: int

    kind: ClassVar[str] = "simplex-wing-cell"

    def __post_init__(self):
        super().__post_init__()
        if not 0 <= self.face <= self.n:
            raise ValueError("face index out of range")
        j = self.face
        others = [i for i in range(self.n + 1) if i != j]
        diff = self._v[j][None, :] - self._v[others]
        self._cone = diff / np.linalg.norm(diff, axis=1, keepdims=True)

    def _sdf(self, x):
        vj = self._v[self.face]
        s = x @ vj + self.t / self.n
        s = np.maximum(s, np.max(x @ self._cone.T, axis=1))
        return np.maximum(s, np.linalg.norm(x, axis=1) - 1.0)

    def params(self):
        return {"n": self.n, "t": self.t, "face": self.face}

    def interior_point(self):
        c = -self._v[self.face]
        return c * (self.t / self.n + 1.0) / 2 * self.scale


# ---------------------------------------------------------------- hexagonal prisms


@register
@dataclass(kw_only=True)
class HexPrism(Piece):
    """Convex polygon (a honeycomb cell clipped to the square) times [z_lo, z_hi]."""

    polygon: list
    z_lo: float = 0.0
    z_hi: float = 1.0

    kind: ClassVar[str] = "hex-prism"
    dimension: ClassVar[int] = 3

    def __post_init__(self):
        poly = np.asarray(self.polygon, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
            raise ValueError("polygon needs at least three 2-d vertices")
        # counter-clockwise orientation
        area = 0.5 * np.sum(poly[:, 0] * np.roll(poly[:, 1], -1) - np.roll(poly[:, 0], -1) * poly[:, 1])
        if area < 0:
            poly = poly[::-1]
        self.polygon = poly.tolist()
        edge = np.roll(poly, -1, axis=0) - poly
        normal = np.column_stack([edge[:, 1], -edge[:, 0]])
        normal /= np.linalg.norm(normal, axis=1, keepdims=True)
        self._normal = normal
        self._offset = np.sum(normal * poly, axis=1)

    def sdf2(self, xy: np.ndarray) -> np.ndarray:
        return np.max(xy @ self._normal.T - self._offset, axis=1)

    def _sdf(self, x):
        s = self.sdf2(x[:, :2])
        return np.maximum(s, np.maximum(self.z_lo - x[:, 2], x[:, 2] - self.z_hi))

    def _bbox(self):
        poly = np.asarray(self.polygon)
        return (np.array([*poly.min(axis=0), self.z_lo]), np.array([*poly.max(axis=0), self.z_hi]))

    def params(self):
        return {"polygon": [list(map(float, p)) for p in self.polygon], "z_lo": self.z_lo, "z_hi": self.z_hi}

    def polygon_diameter(self) -> float:
        poly = np.asarray(self.polygon)
        d2 = np.sum((poly[:, None] - poly[None]) ** 2, axis=-1)
        return float(np.sqrt(d2.max()))

    def exact_diameter(self) -> float:
        return math.hypot(self.polygon_diameter(), self.z_hi - self.z_lo) * self.scale

    def interior_point(self):
        poly = np.asarray(self.polygon)
        return np.array([*poly.mean(axis=0), (self.z_lo + self.z_hi) / 2]) * self.scale
