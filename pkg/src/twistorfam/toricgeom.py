"""Combinatorics of smooth complete toric surfaces and lattice polygons.

A smooth complete fan in Z^2 is a counterclockwise cyclic list of primitive
rays with det(v_i, v_{i+1}) = 1 that winds once around the origin.  The
self-intersection a_i of the i-th boundary curve is read off from
v_{i-1} + v_{i+1} = -a_i v_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

Vec = tuple[int, int]

__all__ = [
    "ToricError",
    "InconsistentCycleError",
    "Fan2D",
    "SelfIntCycle",
    "LatticePolygon",
    "EdgeCurve",
    "fan_from_selfint",
    "selfint_from_fan",
    "blow_up_corner",
    "blow_down_ray",
    "k_squared",
    "polygon_degree",
    "edge_curve_data",
    "normal_fan",
    "cycles_equivalent",
    "fan_equivalent",
]


class ToricError(ValueError):
    pass


class InconsistentCycleError(ToricError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def det(v: Vec, w: Vec) -> int:
    return v[0] * w[1] - v[1] * w[0]


def _winding(rays: Sequence[Vec]) -> int:
    """Number of ccw turns of a closed ray sequence whose steps all turn left."""
    n = len(rays)
    return sum(1 for i in range(n) if rays[i][1] < 0 <= rays[(i + 1) % n][1])


@dataclass(frozen=True)
class Fan2D:
    rays: tuple[Vec, ...]

    def __post_init__(self):
        rays = tuple((int(x), int(y)) for x, y in self.rays)
        object.__setattr__(self, "rays", rays)
        n = len(rays)
        if n < 3:
            raise ToricError(f"a complete fan needs at least 3 rays, got {n}")
        for v in rays:
            if math.gcd(*v) != 1:
                raise ToricError(f"ray {v} is not primitive")
        for i in range(n):
            d = det(rays[i], rays[(i + 1) % n])
            if d != 1:
                raise ToricError(f"cone {i} spanned by {rays[i]}, {rays[(i + 1) % n]} has det {d}")
        if _winding(rays) != 1:
            raise ToricError("rays do not cover the plane exactly once")

    def __len__(self) -> int:
        return len(self.rays)

    @property
    def n(self) -> int:
        return len(self.rays)

    def transform(self, m: tuple[tuple[int, int], tuple[int, int]]) -> "Fan2D":
        """Apply an integer matrix of determinant +1 or -1 to every ray."""
        (a, b), (c, d) = m
        dm = a * d - b * c
        if dm not in (1, -1):
            raise ToricError("not a lattice automorphism")
        rays = [(a * x + b * y, c * x + d * y) for x, y in self.rays]
        if dm == -1:
            rays.reverse()
        return Fan2D(tuple(rays))

    def to_text(self) -> str:
        return "\n".join(f"{x} {y}" for x, y in self.rays) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Fan2D":
        rays = []
        for line in text.splitlines():
            line = line.strip()
            if line:
                x, y = line.split()
                rays.append((int(x), int(y)))
        return cls(tuple(rays))


@dataclass(frozen=True)
class SelfIntCycle:
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(a) for a in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def total(self) -> int:
        return sum(self.values)

    def is_balanced(self) -> bool:
        return self.total() == 12 - 3 * len(self.values)

    def to_text(self) -> str:
        return ",".join(str(a) for a in self.values)

    @classmethod
    def parse(cls, text: str) -> "SelfIntCycle":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    def compact(self) -> str:
        """Render periodic cycles as ``(-3,-1)^6``."""
        vals = self.values
        n = len(vals)
        for p in range(1, n + 1):
            if n % p == 0 and vals == vals[:p] * (n // p):
                inner = ",".join(str(a) for a in vals[:p])
                return f"({inner})^{n // p}" if n // p > 1 else f"({inner})"
        raise AssertionError("unreachable")


def _dihedral_images(seq: Sequence) -> list[tuple]:
    seq = tuple(seq)
    n = len(seq)
    out = []
    for s in (seq, tuple(reversed(seq))):
        for k in range(n):
            out.append(s[k:] + s[:k])
    return out


def cycles_equivalent(a: Sequence[int] | SelfIntCycle, b: Sequence[int] | SelfIntCycle) -> bool:
    """Equality of cyclic sequences up to rotation and reflection."""
    a, b = tuple(a), tuple(b)
    return len(a) == len(b) and b in _dihedral_images(a)


def selfint_from_fan(fan: Fan2D) -> SelfIntCycle:
    rays = fan.rays
    n = len(rays)
    values = []
    for i in range(n):
        prev, cur, nxt = rays[i - 1], rays[i], rays[(i + 1) % n]
        sx, sy = prev[0] + nxt[0], prev[1] + nxt[1]
        # sum is an integer multiple of cur because both cones are unimodular
        if cur[0] != 0:
            k = Fraction(sx, cur[0])
        else:
            k = Fraction(sy, cur[1])
        assert k.denominator == 1 and (k * cur[0], k * cur[1]) == (sx, sy)
        values.append(-int(k))
    cycle = SelfIntCycle(tuple(values))
    assert cycle.is_balanced(), "smooth complete fan violates sum a_i = 12 - 3n"
    return cycle


def fan_from_selfint(cycle: SelfIntCycle | Sequence[int]) -> Fan2D:
    """Reconstruct the fan with v_1 = (1,0), v_2 = (0,1) from its cycle."""
    a = tuple(cycle)
    n = len(a)
    if n < 3:
        raise InconsistentCycleError(f"cycle of length {n} is too short", index=None)
    if sum(a) != 12 - 3 * n:
        raise InconsistentCycleError(
            f"sum of self-intersections is {sum(a)}, expected {12 - 3 * n}", index=None
        )
    rays: list[Vec] = [(1, 0), (0, 1)]
    # rays[k] carries a[k]; v_{k+1} = -a_k v_k - v_{k-1}
    for k in range(1, n + 1):
        prev, cur = rays[k - 1], rays[k]
        ak = a[k % n]
        rays.append((-ak * cur[0] - prev[0], -ak * cur[1] - prev[1]))
        if k < n - 1 and _partial_turns(rays[: k + 2]) >= 1:
            raise InconsistentCycleError(
                f"rays wind past a full turn at index {k + 1}", index=k + 1
            )
    if rays[n] != rays[0]:
        raise InconsistentCycleError(f"recurrence does not close: v_{n} = {rays[n]}", index=n)
    if rays[n + 1] != rays[1]:
        raise InconsistentCycleError(f"recurrence does not close: v_{n + 1} = {rays[n + 1]}", index=0)
    fan_rays = tuple(rays[:n])
    if _winding(fan_rays) != 1:
        raise InconsistentCycleError("rays wind more than once", index=None)
    return Fan2D(fan_rays)


def _partial_turns(rays: Sequence[Vec]) -> int:
    return sum(1 for i in range(len(rays) - 1) if rays[i][1] < 0 <= rays[i + 1][1])


def blow_up_corner(fan: Fan2D, i: int) -> Fan2D:
    """Insert v_i + v_{i+1} between rays i and i+1 (indices mod n)."""
    n = fan.n
    if not 0 <= i < n:
        raise IndexError(f"corner index {i} out of range 0..{n - 1}")
    v, w = fan.rays[i], fan.rays[(i + 1) % n]
    new = (v[0] + w[0], v[1] + w[1])
    rays = list(fan.rays)
    rays.insert(i + 1, new)
    return Fan2D(tuple(rays))


def blow_down_ray(fan: Fan2D, i: int) -> Fan2D:
    n = fan.n
    if not 0 <= i < n:
        raise IndexError(f"ray index {i} out of range 0..{n - 1}")
    if n <= 3:
        raise ToricError("cannot contract a curve on a fan with 3 rays")
    a = selfint_from_fan(fan).values[i]
    if a != -1:
        raise ToricError(f"ray {i} has self-intersection {a}, only -1 curves contract smoothly")
    rays = list(fan.rays)
    del rays[i]
    return Fan2D(tuple(rays))


def k_squared(fan: Fan2D) -> int:
    return 12 - fan.n


def fan_equivalent(f: Fan2D, g: Fan2D) -> bool:
    """Isomorphism of smooth complete toric surfaces (same cycle up to D_n)."""
    return cycles_equivalent(selfint_from_fan(f), selfint_from_fan(g))


# ---------------------------------------------------------------- polygons


@dataclass(frozen=True)
class LatticePolygon:
    """Finite point set in Z^2, optionally labelled (one label per point)."""

    points: tuple[Vec, ...]
    labels: tuple[Hashable, ...] | None = None

    def __post_init__(self):
        pts = tuple((int(x), int(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(pts):
                raise ValueError("one label per point is required")
            object.__setattr__(self, "labels", labels)

    def hull(self) -> list[Vec]:
        """Convex hull vertices, counterclockwise, collinear points dropped."""
        pts = sorted(set(self.points))
        if len(pts) < 3:
            return pts

        def half(seq):
            out: list[Vec] = []
            for p in seq:
                while len(out) >= 2 and det(_sub(out[-1], out[-2]), _sub(p, out[-2])) <= 0:
                    out.pop()
                out.append(p)
            return out

        lower = half(pts)
        upper = half(reversed(pts))
        return lower[:-1] + upper[:-1]

    def is_two_dimensional(self) -> bool:
        return len(self.hull()) >= 3

    def lattice_points_in_hull(self) -> int:
        """Lattice points of the closed hull, by Pick's theorem."""
        h = self.hull()
        area2 = _twice_area(h)
        boundary = sum(math.gcd(*_sub(h[(i + 1) % len(h)], h[i])) for i in range(len(h)))
        interior = (area2 - boundary + 2) // 2
        return interior + boundary

    def label_of(self, p: Vec):
        if self.labels is None:
            return None
        return self.labels[self.points.index(p)]

    def transform(self, m, t: Vec = (0, 0)) -> "LatticePolygon":
        (a, b), (c, d) = m
        pts = tuple((a * x + b * y + t[0], c * x + d * y + t[1]) for x, y in self.points)
        return LatticePolygon(pts, self.labels)


def _sub(p: Vec, q: Vec) -> Vec:
    return (p[0] - q[0], p[1] - q[1])


def _twice_area(h: Sequence[Vec]) -> int:
    n = len(h)
    return abs(sum(det(h[i], h[(i + 1) % n]) for i in range(n)))


def _require_2d(poly: LatticePolygon) -> list[Vec]:
    h = poly.hull()
    if len(h) < 3:
        raise ToricError("degenerate polygon: points are collinear")
    return h


def polygon_degree(poly: LatticePolygon) -> int:
    """Normalized area (twice the Euclidean area) of the convex hull."""
    return _twice_area(_require_2d(poly))


@dataclass(frozen=True)
class EdgeCurve:
    start: Vec
    end: Vec
    lattice_length: int
    vanishing: frozenset = field(default_factory=frozenset)
    on_edge: frozenset = field(default_factory=frozenset)

    @property
    def inward_normal(self) -> Vec:
        dx, dy = _sub(self.end, self.start)
        g = math.gcd(dx, dy)
        return (-dy // g, dx // g)


def _on_segment(p: Vec, a: Vec, b: Vec) -> bool:
    if det(_sub(b, a), _sub(p, a)) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def edge_curve_data(poly: LatticePolygon) -> list[EdgeCurve]:
    """Hull edges (ccw) with lattice length and the labels vanishing on them."""
    h = _require_2d(poly)
    labels = poly.labels if poly.labels is not None else poly.points
    out = []
    for i in range(len(h)):
        a, b = h[i], h[(i + 1) % len(h)]
        on = frozenset(lab for p, lab in zip(poly.points, labels) if _on_segment(p, a, b))
        off = frozenset(lab for p, lab in zip(poly.points, labels) if not _on_segment(p, a, b))
        out.append(EdgeCurve(a, b, math.gcd(*_sub(b, a)), off, on))
    return out


def normal_fan(poly: LatticePolygon) -> tuple[Fan2D, list[EdgeCurve]]:
    """Inner normal fan; ``edges[k]`` is the boundary curve of ray ``k``."""
    edges = edge_curve_data(poly)
    rays = tuple(e.inward_normal for e in edges)
    return Fan2D(rays), edges
