"""The nine-quadric family over the lambda-line and its fibers.

Coordinates are ``x0..x6`` on the fibers and ``l`` on the base.  Each
generator is stored as LHS - RHS of ``x_i x_j = coef(l) * x_0 x_m``.  The
normal form uses leading constants a0 = b0 = -1, c0 = d0 = 1, so every
coefficient is a product of the three quadratic factors

    e14 = (l - l1)(l - l4),  e25 = (l - l2)(l - l5),  e36 = (l - l3)(l - l6).
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .polycore import (
    ExactMatrix,
    GaussianRational,
    Polynomial,
    hessian_at,
    jacobian_at,
    laurent_substitute,
    nullspace,
    rank,
)
from .toricgeom import LatticePolygon, edge_curve_data, polygon_degree

FAMILY_VARS = ("l", "x0", "x1", "x2", "x3", "x4", "x5", "x6")
FIBER_VARS = FAMILY_VARS[1:]
INFINITY_VARS = ("m",) + FIBER_VARS

# torus weights of x0..x6 under (s, t)
WEIGHTS: tuple[tuple[int, int], ...] = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (-1, -1), (1, 1))
# real structure: x_k -> conj(x_{CONJ_COORD[k]})
CONJ_COORD = (0, 2, 1, 4, 3, 6, 5)
REAL_STRUCTURE_MAP = {f"x{k}": f"x{CONJ_COORD[k]}" for k in range(7)}

# (lhs pair, name of coefficient, rhs partner of x0)
_GENERATOR_TABLE = (
    ((1, 2), "a", 0),
    ((3, 4), "b", 0),
    ((5, 6), "c", 0),
    ((3, 5), "-e14", 2),
    ((5, 1), "-e36", 4),
    ((1, 3), "e25", 6),
    ((4, 6), "-e14", 1),
    ((2, 6), "-e36", 3),
    ((2, 4), "e25", 5),
)

__all__ = [
    "FAMILY_VARS",
    "WEIGHTS",
    "CONJ_COORD",
    "InvalidInvariantError",
    "MixedWeightError",
    "ConformalInvariant",
    "CoefficientFunctions",
    "FamilyModel",
    "FamilyPoint",
    "FiberClass",
    "FiberComponentParam",
    "TorusSubgroup",
    "OdpAnalysis",
    "RealPointResult",
    "CycleCurve",
    "coefficient_functions",
    "build_family",
    "generator_weight",
    "apply_real_structure",
    "classify_fiber",
    "generic_fiber_parametrization",
    "fiber_components",
    "intersection_conic",
    "conic_isotropy",
    "singular_candidates",
    "analyze_point",
    "verify_odp",
    "jacobian_rank_at",
    "real_point_exists",
    "toric_surface_equations",
    "halves_assignment",
    "cycle_curves",
    "conj_label",
    "infinity_chart_generators",
]


class InvalidInvariantError(ValueError):
    pass


class MixedWeightError(ValueError):
    pass


_RATIONAL = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not _RATIONAL.match(text):
        raise InvalidInvariantError(f"not a rational of the form p/q or integer: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise InvalidInvariantError(f"zero denominator in {text!r}") from None


@dataclass(frozen=True)
class ConformalInvariant:
    lambdas: tuple[Fraction, ...]

    def __post_init__(self):
        lams = tuple(Fraction(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lams)
        if len(lams) != 6:
            raise InvalidInvariantError(f"need exactly six invariants, got {len(lams)}")
        for k in range(5):
            if not lams[k] < lams[k + 1]:
                raise InvalidInvariantError(
                    f"invariants must be strictly increasing: lambda_{k + 1} = {lams[k]} "
                    f">= lambda_{k + 2} = {lams[k + 1]}"
                )

    @classmethod
    def canonical(cls) -> "ConformalInvariant":
        return cls(tuple(range(1, 7)))

    @classmethod
    def parse(cls, text: str) -> "ConformalInvariant":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        return cls(tuple(parse_rational(ln) for ln in lines if ln))

    @classmethod
    def from_file(cls, path: str | Path) -> "ConformalInvariant":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def __getitem__(self, i: int) -> Fraction:
        """1-based access, matching lambda_1 .. lambda_6."""
        if not 1 <= i <= 6:
            raise IndexError(i)
        return self.lambdas[i - 1]


def _factor_builder(ci: ConformalInvariant, variables: Sequence[str]) -> Callable[[int], Polynomial]:
    base = variables[0]
    t = Polynomial.var(base, variables)
    if base == "l":
        return lambda j: t - ci[j]
    # chart at infinity: (l - l_j) * m  ->  1 - l_j m
    return lambda j: 1 - t * ci[j]


@dataclass(frozen=True)
class CoefficientFunctions:
    a: Polynomial
    b: Polynomial
    c: Polynomial
    d: Polynomial
    e14: Polynomial
    e25: Polynomial
    e36: Polynomial

    def named(self, name: str) -> Polynomial:
        if name.startswith("-"):
            return -getattr(self, name[1:])
        return getattr(self, name)

    def at(self, lam) -> dict[str, GaussianRational]:
        b = {self.a.variables[0]: lam}
        return {k: getattr(self, k).eval(b) for k in ("a", "b", "c", "d", "e14", "e25", "e36")}


def _coefficients(ci: ConformalInvariant, variables: Sequence[str]) -> CoefficientFunctions:
    f = _factor_builder(ci, variables)
    e14, e25, e36 = f(1) * f(4), f(2) * f(5), f(3) * f(6)
    return CoefficientFunctions(
        a=-(e25 * e36), b=-(e14 * e25), c=e14 * e36, d=e14 * e25 * e36, e14=e14, e25=e25, e36=e36
    )


def coefficient_functions(ci: ConformalInvariant) -> CoefficientFunctions:
    cf = _coefficients(ci, FAMILY_VARS)
    assert cf.a * cf.b * cf.c == cf.d * cf.d, "abc = d^2 must hold identically"
    return cf


def _generators(cf: CoefficientFunctions, variables: Sequence[str]) -> tuple[Polynomial, ...]:
    x = {k: Polynomial.var(f"x{k}", variables) for k in range(7)}
    gens = []
    for (i, j), name, m in _GENERATOR_TABLE:
        gens.append(x[i] * x[j] - cf.named(name) * x[0] * x[m])
    return tuple(gens)


def generator_weight(g: Polynomial) -> tuple[int, int]:
    """Common torus weight of all monomials of ``g``."""
    idx = {k: g.variables.index(f"x{k}") for k in range(7) if f"x{k}" in g.variables}
    found = set()
    for e in g.terms:
        w0 = sum(e[i] * WEIGHTS[k][0] for k, i in idx.items())
        w1 = sum(e[i] * WEIGHTS[k][1] for k, i in idx.items())
        found.add((w0, w1))
    if len(found) > 1:
        raise MixedWeightError(f"monomials carry different weights {sorted(found)}")
    return found.pop() if found else (0, 0)


def _real_structure(g: Polynomial) -> Polynomial:
    return g.permute(REAL_STRUCTURE_MAP).conj()


@dataclass(frozen=True)
class FamilyModel:
    ci: ConformalInvariant
    coefficients: CoefficientFunctions
    generators: tuple[Polynomial, ...]
    weights: tuple[tuple[int, int], ...]
    # involution[k] = (j, sign): real structure sends g_k to sign * g_j (1-based)
    involution: dict[int, tuple[int, int]] = field(hash=False)

    @property
    def lambdas(self) -> tuple[Fraction, ...]:
        return self.ci.lambdas

    def specialized(self, lam) -> list[Polynomial]:
        return [g.specialize({"l": lam}) for g in self.generators]


def apply_real_structure(fm: FamilyModel | None, g: Polynomial) -> Polynomial:
    """Pull back ``g`` along the real structure (lambda is kept, lambda_i real)."""
    return _real_structure(g)


def _involution_permutation(gens: Sequence[Polynomial]) -> dict[int, tuple[int, int]]:
    perm = {}
    for k, g in enumerate(gens, start=1):
        img = _real_structure(g)
        for j, h in enumerate(gens, start=1):
            if img == h:
                perm[k] = (j, 1)
                break
            if img == -h:
                perm[k] = (j, -1)
                break
        else:
            raise AssertionError(f"real structure does not map g{k} into the generator set")
    return perm


def build_family(ci: ConformalInvariant) -> FamilyModel:
    cf = coefficient_functions(ci)
    gens = _generators(cf, FAMILY_VARS)
    weights = tuple(generator_weight(g) for g in gens)
    return FamilyModel(ci, cf, gens, weights, _involution_permutation(gens))


def infinity_chart_generators(ci: ConformalInvariant) -> tuple[Polynomial, ...]:
    """Generators near l = infinity: l = 1/m, x_k -> m^2 x_k (k >= 1), times m^4."""
    return _generators(_coefficients(ci, INFINITY_VARS), INFINITY_VARS)


def toric_surface_equations(a, b, c, d) -> tuple[Polynomial, ...]:
    """The nine quadrics of a single fiber with constants a, b, c, d."""
    a, b, c, d = (GaussianRational.coerce(v) for v in (a, b, c, d))
    x = {k: Polynomial.var(f"x{k}", FIBER_VARS) for k in range(7)}
    return (
        x[1] * x[2] - x[0] * x[0] * a,
        x[3] * x[4] - x[0] * x[0] * b,
        x[5] * x[6] - x[0] * x[0] * c,
        x[3] * x[5] * a - x[0] * x[2] * d,
        x[1] * x[5] * b - x[0] * x[4] * d,
        x[1] * x[3] * c - x[0] * x[6] * d,
        x[4] * x[6] * d - x[0] * x[1] * (b * c),
        x[2] * x[6] * d - x[0] * x[3] * (a * c),
        x[2] * x[4] * d - x[0] * x[5] * (a * b),
    )


# ---------------------------------------------------------------- fibers


@dataclass(frozen=True)
class FiberClass:
    kind: str  # "smooth" or "reducible"
    index: int | None = None

    def __str__(self) -> str:
        return "Smooth" if self.kind == "smooth" else f"Reducible({self.index})"


def classify_fiber(fm: FamilyModel, lam0) -> FiberClass:
    lam0 = GaussianRational.coerce(lam0)
    for i, li in enumerate(fm.lambdas, start=1):
        if lam0 == li:
            return FiberClass("reducible", i)
    return FiberClass("smooth")


@dataclass(frozen=True)
class FamilyPoint:
    lam: GaussianRational
    coords: tuple[GaussianRational, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", GaussianRational.coerce(self.lam))
        coords = tuple(GaussianRational.coerce(c) for c in self.coords)
        if len(coords) != 7:
            raise ValueError("a point needs seven fiber coordinates x0..x6")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def coordinate_point(cls, lam, k: int) -> "FamilyPoint":
        return cls(lam, tuple(1 if j == k else 0 for j in range(7)))

    def bindings(self) -> dict[str, GaussianRational]:
        out = {"l": self.lam}
        out.update({f"x{k}": c for k, c in enumerate(self.coords)})
        return out

    def conjugate(self) -> "FamilyPoint":
        return FamilyPoint(self.lam.conj(), tuple(self.coords[CONJ_COORD[k]].conj() for k in range(7)))

    def projectively_equal(self, other: "FamilyPoint") -> bool:
        if self.lam != other.lam:
            return False
        k = next(j for j in range(7) if self.coords[j])
        if not other.coords[k]:
            return False
        r = other.coords[k] / self.coords[k]
        return all(o == s * r for s, o in zip(self.coords, other.coords))

    def __str__(self) -> str:
        nz = ", ".join(f"x{k}={c}" for k, c in enumerate(self.coords) if c)
        return f"(l={self.lam}; {nz})"


@dataclass(frozen=True)
class FiberComponentParam:
    """Closure of a torus orbit: x_k = coef_k * s^w1 * u^w2 (w = weight of x_k)."""

    lam: GaussianRational
    zero_coords: frozenset[int]
    coefficients: tuple[GaussianRational, ...]
    name: str = ""

    @property
    def nonzero_coords(self) -> tuple[int, ...]:
        return tuple(k for k in range(7) if k not in self.zero_coords)

    @property
    def exponents(self) -> tuple[tuple[int, int], ...]:
        return WEIGHTS

    @property
    def polygon(self) -> LatticePolygon:
        nz = self.nonzero_coords
        return LatticePolygon(tuple(WEIGHTS[k] for k in nz), tuple(f"x{k}" for k in nz))

    def images(self) -> dict[str, tuple[GaussianRational, tuple[int, int]]]:
        out = {"l": (self.lam, (0, 0))}
        for k in range(7):
            out[f"x{k}"] = (self.coefficients[k], WEIGHTS[k])
        return out

    def substitute(self, g: Polynomial) -> dict:
        return laurent_substitute(g, self.images())

    def annihilates(self, gens: Sequence[Polynomial]) -> bool:
        return all(not self.substitute(g) for g in gens)

    def point(self, s, u) -> FamilyPoint:
        s, u = GaussianRational.coerce(s), GaussianRational.coerce(u)
        return FamilyPoint(
            self.lam,
            tuple(self.coefficients[k] * s ** WEIGHTS[k][0] * u ** WEIGHTS[k][1] for k in range(7)),
        )

    def describe(self) -> dict[str, str]:
        out = {}
        for k in self.nonzero_coords:
            w = WEIGHTS[k]
            mono = " ".join(p for p in (_pow("s", w[0]), _pow("u", w[1])) if p)
            out[f"x{k}"] = f"{self.coefficients[k]}" + (f" * {mono}" if mono else "")
        return out


def _pow(v: str, k: int) -> str:
    return "" if k == 0 else (v if k == 1 else f"{v}^{k}")


def _binomial_relations(fm: FamilyModel, lam) -> list[tuple[tuple[int, int], GaussianRational, int]]:
    vals = fm.coefficients.at(lam)
    out = []
    for (i, j), name, m in _GENERATOR_TABLE:
        v = -vals[name[1:]] if name.startswith("-") else vals[name]
        out.append(((i, j), v, m))
    return out


def _solve_base_point(fm: FamilyModel, lam, nonzero: Sequence[int], free: dict[int, GaussianRational]):
    """Propagate x_i x_j = k x_0 x_m from x0 = 1 and the free coordinates."""
    rels = _binomial_relations(fm, lam)
    known: dict[int, GaussianRational] = {0: GaussianRational(1)}
    known.update({k: GaussianRational.coerce(v) for k, v in free.items()})
    nonzero = set(nonzero)
    changed = True
    while changed:
        changed = False
        for (i, j), kappa, m in rels:
            if kappa.is_zero() or not {i, j, m} <= nonzero:
                continue
            unknown = [v for v in (i, j, m) if v not in known]
            if len(unknown) != 1:
                continue
            u = unknown[0]
            if u == m:
                known[m] = known[i] * known[j] / kappa
            else:
                other = j if u == i else i
                known[u] = kappa * known[m] / known[other]
            changed = True
    missing = nonzero - set(known)
    if missing:
        raise AssertionError(f"base point underdetermined, missing x{sorted(missing)}")
    return tuple(known.get(k, GaussianRational(0)) for k in range(7))


def _lam_value(lam0) -> GaussianRational:
    return GaussianRational.coerce(lam0)


def generic_fiber_parametrization(fm: FamilyModel, lam0, p=1, q=1) -> FiberComponentParam:
    lam0 = _lam_value(lam0)
    vals = fm.coefficients.at(lam0)
    if any(vals[k].is_zero() for k in "abcd"):
        raise ValueError(f"abcd vanishes at lambda = {lam0}; the fiber is not a smooth toric surface")
    coeffs = _solve_base_point(fm, lam0, range(7), {1: p, 3: q})
    param = FiberComponentParam(lam0, frozenset(), coeffs, "generic")
    if not param.annihilates(fm.specialized(lam0)):
        raise AssertionError("orbit parametrization does not satisfy the generators")
    return param


def _check_index(i: int) -> None:
    if not (isinstance(i, int) and 1 <= i <= 6):
        raise IndexError(f"reducible fiber index must be in 1..6, got {i!r}")


def _vanishing_graph(fm: FamilyModel, lam) -> list[tuple[int, int]]:
    return [(i, j) for (i, j), kappa, _ in _binomial_relations(fm, lam) if kappa.is_zero()]


def _minimal_vertex_covers(edges: Sequence[tuple[int, int]]) -> list[frozenset[int]]:
    verts = sorted({v for e in edges for v in e})
    covers: list[frozenset[int]] = []
    for size in range(len(verts) + 1):
        for sub in itertools.combinations(verts, size):
            s = frozenset(sub)
            if all(i in s or j in s for i, j in edges) and not any(c <= s for c in covers):
                covers.append(s)
    return covers


def component_zero_sets(fm: FamilyModel, i: int) -> list[frozenset[int]]:
    """Coordinate sets forced to vanish on the components over lambda_i."""
    _check_index(i)
    return _minimal_vertex_covers(_vanishing_graph(fm, fm.ci[i]))


@dataclass(frozen=True)
class CycleCurve:
    label: str
    kind: str  # "edge" or "vertex"
    coords: frozenset[int]


def conj_label(label: str) -> str:
    if label.startswith("Cbar"):
        return "C" + label[4:]
    if re.fullmatch(r"C\d", label):
        return "Cbar" + label[1:]
    raise ValueError(f"not a cycle label: {label!r}")


@lru_cache(maxsize=1)
def cycle_curves() -> tuple[CycleCurve, ...]:
    """The 12-cycle C1..C6, Cbar1..Cbar6 read off the generic polygon.

    Hull edges of the weight hexagon become C1, C3, C5, Cbar1, Cbar3, Cbar5 and
    the vertices (blown up in the toric model of S) the even curves.  C1 is
    anchored at the edge joining x1 and x6, orientation counterclockwise.
    """
    poly = LatticePolygon(WEIGHTS, tuple(range(7)))
    edges = edge_curve_data(poly)
    start = next(k for k, e in enumerate(edges) if e.on_edge == {1, 6})
    edges = edges[start:] + edges[:start]
    seq: list[tuple[str, frozenset[int]]] = []
    for e in edges:
        seq.append(("edge", frozenset(e.on_edge)))
        seq.append(("vertex", frozenset({poly.labels[poly.points.index(e.end)]})))
    names = [f"C{k}" for k in range(1, 7)] + [f"Cbar{k}" for k in range(1, 7)]
    out = tuple(CycleCurve(n, kind, coords) for n, (kind, coords) in zip(names, seq))
    for k in range(12):
        img = frozenset(CONJ_COORD[c] for c in out[k].coords)
        assert img == out[(k + 6) % 12].coords, "conjugation must act antipodally on the cycle"
    return out


def _cycle_by_label() -> dict[str, CycleCurve]:
    return {c.label: c for c in cycle_curves()}


def _split_plus_minus(fm: FamilyModel, i: int) -> tuple[frozenset[int], frozenset[int]]:
    """Zero sets of (S_i^+, S_i^-): '+' holds C6, or C5 when C6 sits on the conic."""
    covers = component_zero_sets(fm, i)
    if len(covers) != 2 or any(len(c) != 2 for c in covers):
        raise AssertionError(f"fiber {i}: expected two components, found zero sets {covers}")
    by = _cycle_by_label()

    def holds(zero: frozenset[int], label: str) -> bool:
        return not (by[label].coords & zero)

    c0, c1 = covers
    for label in ("C6", "C5"):
        h0, h1 = holds(c0, label), holds(c1, label)
        if h0 != h1:
            return (c0, c1) if h0 else (c1, c0)
    raise AssertionError(f"fiber {i}: cannot orient the two components")


def fiber_components(fm: FamilyModel, i: int) -> tuple[FiberComponentParam, FiberComponentParam]:
    """The two cubic components over lambda_i, ordered (plus, minus)."""
    _check_index(i)
    lam = GaussianRational.coerce(fm.ci[i])
    gens = fm.specialized(lam)
    out = []
    for zero, name in zip(_split_plus_minus(fm, i), ("+", "-")):
        nonzero = [k for k in range(7) if k not in zero]
        free = next(
            (a, b)
            for a, b in itertools.combinations([k for k in nonzero if k], 2)
            if abs(WEIGHTS[a][0] * WEIGHTS[b][1] - WEIGHTS[a][1] * WEIGHTS[b][0]) == 1
        )
        coeffs = _solve_base_point(fm, lam, nonzero, {free[0]: 1, free[1]: 1})
        param = FiberComponentParam(lam, zero, coeffs, name)
        if not param.annihilates(gens):
            raise AssertionError(f"component {name} of fiber {i} does not lie on the fiber")
        out.append(param)
    return out[0], out[1]


@dataclass(frozen=True)
class ConicData:
    index: int
    param: FiberComponentParam
    plane: tuple[int, int, int]  # (0, a, b)
    kappa: GaussianRational  # x_a x_b = kappa x_0^2

    @property
    def equation(self) -> Polynomial:
        a, b = self.plane[1], self.plane[2]
        x = lambda k: Polynomial.var(f"x{k}", FIBER_VARS)  # noqa: E731
        return x(a) * x(b) - x(0) * x(0) * self.kappa

    def is_irreducible(self) -> bool:
        return not self.kappa.is_zero()

    def has_real_points(self) -> bool:
        """Real points for the real structure: x_b = conj(x_a), x_0 real."""
        a, b = self.plane[1], self.plane[2]
        assert CONJ_COORD[a] == b
        # |x_a|^2 = kappa x0^2 with x0 = 0 forces the zero vector
        return self.kappa.is_real() and self.kappa.re > 0


def intersection_conic(fm: FamilyModel, i: int) -> ConicData:
    _check_index(i)
    plus, minus = fiber_components(fm, i)
    zero = plus.zero_coords | minus.zero_coords
    a, b = sorted(k for k in range(1, 7) if k not in zero)
    lam = plus.lam
    kappa = next(k for (p, q), k, m in _binomial_relations(fm, lam) if {p, q} == {a, b} and m == 0)
    coeffs = tuple(
        GaussianRational(1) if k in (0, a) else (kappa if k == b else GaussianRational(0)) for k in range(7)
    )
    param = FiberComponentParam(lam, frozenset(zero), coeffs, f"L{i}")
    if not param.annihilates(fm.specialized(lam)):
        raise AssertionError(f"conic over lambda_{i} is not on the fiber")
    return ConicData(i, param, (0, a, b), kappa)


@dataclass(frozen=True)
class TorusSubgroup:
    """One-parameter subgroup tau -> (tau^p, tau^q) acting trivially; (0,0) if none."""

    vector: tuple[int, int]


def conic_isotropy(fm: FamilyModel, i: int) -> TorusSubgroup:
    conic = intersection_conic(fm, i)
    ws = [WEIGHTS[k] for k in conic.plane if WEIGHTS[k] != (0, 0)]
    if not ws:
        raise AssertionError("conic plane carries no torus weights")
    # weights of a conic plane are collinear: (0,0), w, -w
    w = ws[0]
    if any(v[0] * w[1] - v[1] * w[0] for v in ws):
        return TorusSubgroup((0, 0))
    g = math.gcd(*w)
    p, q = -w[1] // g, w[0] // g
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    return TorusSubgroup((p, q))


def singular_candidates(fm: FamilyModel) -> list[FamilyPoint]:
    """Torus-fixed points of the six conics (x0 = 0 on the conic)."""
    out = []
    for i in range(1, 7):
        conic = intersection_conic(fm, i)
        for k in conic.plane[1:]:
            out.append(FamilyPoint.coordinate_point(fm.ci[i], k))
    return out


@dataclass(frozen=True)
class OdpAnalysis:
    chart: int
    jacobian_rank: int
    kernel_dim: int
    quadric_span: int | None = None
    quadric_rank: int | None = None

    @property
    def is_smooth(self) -> bool:
        return self.jacobian_rank == 4

    @property
    def is_odp(self) -> bool:
        return self.jacobian_rank == 3 and self.quadric_span == 1 and self.quadric_rank == 4


def _chart(fm: FamilyModel, point: FamilyPoint):
    k = next((j for j in range(7) if point.coords[j]), None)
    if k is None:
        raise ValueError("chart undefined: all fiber coordinates vanish")
    scale = point.coords[k]
    coords = tuple(c / scale for c in point.coords)
    variables = ("l",) + tuple(f"x{j}" for j in range(7) if j != k)
    gens = [g.specialize({f"x{k}": 1}) for g in fm.generators]
    bindings = {"l": point.lam}
    bindings.update({f"x{j}": coords[j] for j in range(7) if j != k})
    if any(g.eval(bindings) for g in gens):
        raise ValueError(f"point {point} is not on the family")
    return k, variables, gens, bindings


def jacobian_rank_at(fm: FamilyModel, point: FamilyPoint) -> int:
    _, variables, gens, bindings = _chart(fm, point)
    return rank(jacobian_at(gens, bindings, variables))


def analyze_point(fm: FamilyModel, point: FamilyPoint) -> OdpAnalysis:
    """Jacobian corank and quadratic tangent cone in the affine chart of ``point``.

    Quadrics are taken from combinations sum c_k g_k whose linear part vanishes
    (left kernel of the Jacobian) and restricted to the Jacobian kernel.
    """
    chart, variables, gens, bindings = _chart(fm, point)
    jac = jacobian_at(gens, bindings, variables)
    r = rank(jac)
    kernel = nullspace(jac)
    if r != 3:
        return OdpAnalysis(chart, r, len(kernel))
    kmat = ExactMatrix([list(col) for col in zip(*kernel)], len(kernel))  # n x dim
    hessians = [hessian_at(g, bindings, variables) for g in gens]
    forms = []
    for c in nullspace(jac.transpose()):
        h = ExactMatrix.zeros(len(variables), len(variables))
        for ck, hk in zip(c, hessians):
            if ck:
                h = h + hk.scale(ck)
        forms.append(kmat.transpose() @ h @ kmat)
    flat = ExactMatrix([[x for row in q.entries for x in row] for q in forms])
    span = rank(flat) if forms else 0
    qrank = None
    if span == 1:
        q = next(q for q in forms if any(x for row in q.entries for x in row))
        qrank = rank(q)
    return OdpAnalysis(chart, r, len(kernel), span, qrank)


def verify_odp(fm: FamilyModel, point: FamilyPoint) -> bool:
    return analyze_point(fm, point).is_odp


# ---------------------------------------------------------------- real points


@dataclass(frozen=True)
class RealPointResult:
    exists: bool
    witness: tuple[GaussianRational, ...] | None = None

    def __bool__(self) -> bool:
        return self.exists


def _isqrt_exact(n: int) -> int | None:
    r = math.isqrt(n)
    return r if r * r == n else None


def gaussian_norm_root(r: Fraction, limit: int = 10**12) -> GaussianRational | None:
    """Some z in Q(i) with |z|^2 = r, by a bounded two-squares search."""
    r = Fraction(r)
    if r < 0:
        return None
    if r == 0:
        return GaussianRational(0)
    n = r.numerator * r.denominator
    if n > limit:
        return None
    for u in range(math.isqrt(n), -1, -1):
        v = _isqrt_exact(n - u * u)
        if v is not None:
            return GaussianRational(Fraction(u, r.denominator), Fraction(v, r.denominator))
    return None


def real_point_exists(a, b, c, d) -> RealPointResult:
    """Whether the fiber with constants (a, b, c, d) has a real point.

    Requires a, b, c real and abc = |d|^2.  The answer is a >= 0, b >= 0, c >= 0;
    a witness fixed by the real structure is attached when one with coordinates
    in Q(i) is found.
    """
    a, b, c, d = (GaussianRational.coerce(v) for v in (a, b, c, d))
    if not (a.is_real() and b.is_real() and c.is_real()):
        raise ValueError("a, b, c must be real")
    if a * b * c != d.norm():
        raise ValueError("constants violate abc = |d|^2")
    if not (a.re >= 0 and b.re >= 0 and c.re >= 0):
        return RealPointResult(False)
    x1, x3 = gaussian_norm_root(a.re), gaussian_norm_root(b.re)
    if x1 is None or x3 is None:
        return RealPointResult(True)
    if x1 and x3:
        x5 = d / (x1 * x3)
    else:
        x5 = gaussian_norm_root(c.re)
        if x5 is None:
            return RealPointResult(True)
    pt = (GaussianRational(1), x1, x1.conj(), x3, x3.conj(), x5, x5.conj())
    bind = {f"x{k}": v for k, v in enumerate(pt)}
    assert all(g.eval(bind).is_zero() for g in toric_surface_equations(a, b, c, d))
    return RealPointResult(True, pt)


# ---------------------------------------------------------------- halves


def halves_assignment(fm: FamilyModel, i: int) -> dict[str, str]:
    """Assign each cycle curve to '+', '-' or 'shared' for the fiber over lambda_i.

    A curve belongs to a component when its coordinates survive there; the two
    vertex curves sitting at the torus-fixed points of the conic are 'shared'.
    """
    plus, minus = fiber_components(fm, i)
    out = {}
    for curve in cycle_curves():
        on_plus = not (curve.coords & plus.zero_coords)
        on_minus = not (curve.coords & minus.zero_coords)
        if on_plus and on_minus:
            out[curve.label] = "shared"
        elif on_plus:
            out[curve.label] = "+"
        elif on_minus:
            out[curve.label] = "-"
        else:
            raise AssertionError(f"{curve.label} lies on neither component of fiber {i}")
    return out
