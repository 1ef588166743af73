"""Combinatorial surgery on the fibers: small resolutions, section blow-ups, contractions.

Every fiber is a labelled toric fan (generic fiber) or two labelled fans glued
along the conic ``L`` (reducible fibers).  Corners (cones) carry the name of
the torus-fixed point sitting there when it matters, which is how sections and
double points are tracked through blow-ups.

Curve labels:
  C1..C6, Cbar1..Cbar6  boundary curves of the generic fiber
  L                     the gluing conic
  E:xk                  exceptional curve of the small resolution at the point xk
  F:xk                  exceptional curve of the blow-up of the section through xk
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .familymodel import (
    CONJ_COORD,
    FamilyModel,
    conj_label,
    cycle_curves,
    fiber_components,
    generic_fiber_parametrization,
    halves_assignment,
    intersection_conic,
)
from .toricgeom import (
    Fan2D,
    SelfIntCycle,
    blow_down_ray,
    blow_up_corner,
    cycles_equivalent,
    normal_fan,
    selfint_from_fan,
)

Vec = tuple[int, int]

STAGES = ("X1", "X2", "X3", "Z")
GLUE = "L"
CYCLE_LABELS = tuple(c.label for c in cycle_curves())
# section through the fixed point x_k of the generic fiber, paired with its conjugate
SECTIONS = {"l1": "x6", "l2": "x3", "l3": "x2", "lbar1": "x5", "lbar2": "x4", "lbar3": "x1"}
GENERIC = "generic"
FIBER_KEYS = (GENERIC, "1", "2", "3", "4", "5", "6")

__all__ = [
    "STAGES",
    "SECTIONS",
    "StageError",
    "ChoiceError",
    "LabeledFan",
    "FiberModel",
    "ResolutionChoice",
    "PipelineState",
    "CheckRecord",
    "PipelineRun",
    "curve_conj",
    "initial_fiber_models",
    "small_resolve",
    "blow_up_sections",
    "find_minus_one_pairs",
    "contract_pair",
    "run_pipeline",
    "fiber_cycle",
    "verify_state",
    "state_to_dict",
    "state_from_dict",
]


class StageError(RuntimeError):
    def __init__(self, message: str, stage: str | None = None, fiber: str | None = None):
        where = ", ".join(p for p in (f"stage {stage}" if stage else "", f"fiber {fiber}" if fiber else "") if p)
        super().__init__(f"[{where}] {message}" if where else message)
        self.stage = stage
        self.fiber = fiber


class ChoiceError(StageError):
    pass


def _coord_conj(name: str) -> str:
    k = int(name[1:])
    return f"x{CONJ_COORD[k]}"


def curve_conj(label: str) -> str:
    """Image of a curve or fixed-point label under the real structure."""
    if label == GLUE:
        return label
    m = re.fullmatch(r"([EF]):(x\d)", label)
    if m:
        return f"{m.group(1)}:{_coord_conj(m.group(2))}"
    if re.fullmatch(r"x\d", label):
        return _coord_conj(label)
    if label.startswith("odp:"):
        return "odp:" + curve_conj(label[4:])
    return conj_label(label)


def _opt_conj(name: str | None) -> str | None:
    return None if name is None else curve_conj(name)


@dataclass(frozen=True)
class LabeledFan:
    """Smooth complete fan with one label per ray and an optional name per corner.

    ``corners[k]`` names the fixed point of the cone spanned by rays k and k+1.
    Construction re-checks the fan and the identity sum a_i = 12 - 3n.
    """

    rays: tuple[Vec, ...]
    labels: tuple[str, ...]
    corners: tuple[str | None, ...]

    def __post_init__(self):
        n = len(self.rays)
        if len(self.labels) != n or len(self.corners) != n:
            raise ValueError("rays, labels and corners must have equal length")
        if len(set(self.labels)) != n:
            raise ValueError(f"duplicate curve labels {self.labels}")
        named = [c for c in self.corners if c is not None]
        if len(set(named)) != len(named):
            raise ValueError(f"duplicate corner names {self.corners}")
        cycle = selfint_from_fan(self.fan)
        if not cycle.is_balanced():
            raise AssertionError("sum of self-intersections differs from 12 - 3n")

    @property
    def fan(self) -> Fan2D:
        return Fan2D(self.rays)

    @property
    def n(self) -> int:
        return len(self.rays)

    @property
    def selfint(self) -> SelfIntCycle:
        return selfint_from_fan(self.fan)

    def selfint_of(self, label: str) -> int:
        return self.selfint.values[self.index(label)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no curve {label!r} in {self.labels}") from None

    def corner_of(self, name: str) -> int | None:
        return self.corners.index(name) if name in self.corners else None

    def neighbors(self, label: str) -> tuple[str, str]:
        k = self.index(label)
        return self.labels[k - 1], self.labels[(k + 1) % self.n]

    def blow_up(self, k: int, label: str, left: str | None = None, right: str | None = None) -> "LabeledFan":
        """Blow up corner k; ``left``/``right`` name the corners on either side of the new curve."""
        fan = blow_up_corner(self.fan, k)
        back = blow_down_ray(fan, k + 1)
        assert back == self.fan, "blow-up followed by blow-down must return the fan"
        labels = list(self.labels)
        labels.insert(k + 1, label)
        corners = list(self.corners)
        corners[k : k + 1] = [left, right]
        return LabeledFan(fan.rays, tuple(labels), tuple(corners))

    def blow_down(self, label: str, corner: str | None = None) -> "LabeledFan":
        k = self.index(label)
        fan = blow_down_ray(self.fan, k)
        # blowing the point back up reproduces the ray we removed
        again = blow_up_corner(fan, (k - 1) % fan.n)
        assert sorted(again.rays) == sorted(self.rays), "blow-down followed by blow-up must return the fan"
        labels = list(self.labels)
        del labels[k]
        corners = list(self.corners)
        prev = (k - 1) % self.n
        corners[prev] = corner
        del corners[k]
        return LabeledFan(fan.rays, tuple(labels), tuple(corners))

    def conjugate(self) -> "LabeledFan":
        """Real structure: rays negated (weights flip sign), labels conjugated."""
        return LabeledFan(
            tuple((-x, -y) for x, y in self.rays),
            tuple(curve_conj(l) for l in self.labels),
            tuple(_opt_conj(c) for c in self.corners),
        )

    def rotated_to(self, label: str) -> "LabeledFan":
        k = self.index(label)
        return LabeledFan(
            self.rays[k:] + self.rays[:k], self.labels[k:] + self.labels[:k], self.corners[k:] + self.corners[:k]
        )

    def same_up_to_rotation(self, other: "LabeledFan") -> bool:
        if self.n != other.n or self.labels[0] not in other.labels:
            return False
        return self.rotated_to(self.labels[0]) == other.rotated_to(self.labels[0])

    def relabel(self, mapping: dict[str, str]) -> "LabeledFan":
        return LabeledFan(self.rays, tuple(mapping.get(l, l) for l in self.labels), self.corners)

    def to_dict(self) -> dict:
        return {
            "rays": [list(r) for r in self.rays],
            "labels": list(self.labels),
            "corners": list(self.corners),
            "selfint": list(self.selfint.values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabeledFan":
        fan = cls(tuple(tuple(r) for r in d["rays"]), tuple(d["labels"]), tuple(d["corners"]))
        if "selfint" in d and list(fan.selfint.values) != list(d["selfint"]):
            raise ValueError("stored self-intersections disagree with the rays")
        return fan


@dataclass(frozen=True)
class FiberModel:
    """A generic fiber (``minus`` is None) or two components glued along ``L``."""

    key: str
    lam: str
    plus: LabeledFan
    minus: LabeledFan | None = None
    gluing_length: int | None = None
    odps: tuple[str, ...] = ()

    @property
    def is_glued(self) -> bool:
        return self.minus is not None

    def components(self) -> dict[str, LabeledFan]:
        return {"+": self.plus, "-": self.minus} if self.minus is not None else {GENERIC: self.plus}

    def component(self, side: str) -> LabeledFan:
        return self.components()[side]

    def with_component(self, side: str, fan: LabeledFan) -> "FiberModel":
        if side == "-":
            return replace(self, minus=fan)
        return replace(self, plus=fan)

    @property
    def ray_total(self) -> int:
        return sum(f.n for f in self.components().values())

    def fixed_points(self) -> set[str]:
        return {c for f in self.components().values() for c in f.corners if c is not None}

    def to_dict(self) -> dict:
        out = {"key": self.key, "lambda": self.lam, "plus": self.plus.to_dict()}
        if self.minus is not None:
            out["minus"] = self.minus.to_dict()
            out["gluing_length"] = self.gluing_length
        out["odps"] = list(self.odps)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FiberModel":
        minus = LabeledFan.from_dict(d["minus"]) if "minus" in d else None
        return cls(d["key"], d["lambda"], LabeledFan.from_dict(d["plus"]), minus, d.get("gluing_length"), tuple(d["odps"]))


def fiber_cycle(fiber: FiberModel) -> list[tuple[str, int]]:
    """Boundary cycle of the fiber: the fan cycle, or both components minus ``L``.

    Components are traversed counterclockwise from the successor of ``L`` to
    its predecessor, plus first; the union of the two polygons is then walked
    once around.
    """
    if not fiber.is_glued:
        f = fiber.plus
        return list(zip(f.labels, f.selfint.values))
    out = []
    for f in (fiber.plus, fiber.minus):
        g = f.rotated_to(GLUE)
        vals = g.selfint.values
        out.extend(zip(g.labels[1:], vals[1:]))
    labels = [l for l, _ in out]
    if len(set(labels)) != len(labels):
        raise StageError(f"glued boundary repeats curves: {labels}", fiber=fiber.key)
    return out


# ---------------------------------------------------------------- choices


@dataclass(frozen=True)
class ResolutionChoice:
    """Which component receives the exceptional curve at each of the 12 double points.

    ``symbols[i-1]`` covers fiber i; its two characters refer to the two fixed
    points of the conic in increasing coordinate index.
    """

    symbols: tuple[str, ...]

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) != 6:
            raise ValueError(f"need one symbol per reducible fiber (6), got {len(syms)}")
        for i, s in enumerate(syms, start=1):
            if len(s) != 2 or any(ch not in "+-" for ch in s):
                raise ValueError(f"fiber {i}: symbol {s!r} must be two characters from '+-'")

    @classmethod
    def parse(cls, text: str) -> "ResolutionChoice":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        return cls(tuple(ln for ln in lines if ln))

    @classmethod
    def from_file(cls, path: str | Path) -> "ResolutionChoice":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "\n".join(self.symbols) + "\n"

    def side(self, i: int, slot: int) -> str:
        return self.symbols[i - 1][slot]

    def non_equivariant_fibers(self) -> list[int]:
        # the two points of a conic are conjugate and conjugation swaps + and -
        return [i for i, s in enumerate(self.symbols, start=1) if s[0] == s[1]]

    def is_equivariant(self) -> bool:
        return not self.non_equivariant_fibers()

    @classmethod
    def default(cls, fm: FamilyModel) -> "ResolutionChoice":
        """'+' at the double point that follows the '+' arc in cycle order."""
        syms = []
        for i in range(1, 7):
            halves = halves_assignment(fm, i)
            by_label = {c.label: c for c in cycle_curves()}
            shared = [l for l in CYCLE_LABELS if halves[l] == "shared"]
            after_plus = next(l for l in shared if halves[CYCLE_LABELS[CYCLE_LABELS.index(l) - 1]] == "+")
            k = next(iter(by_label[after_plus].coords))
            plane = intersection_conic(fm, i).plane[1:]
            syms.append("".join("+" if c == k else "-" for c in plane))
        return cls(tuple(syms))

    @classmethod
    def all_equivariant(cls) -> list["ResolutionChoice"]:
        return [cls(t) for t in itertools.product(("+-", "-+"), repeat=6)]


# ---------------------------------------------------------------- state


@dataclass(frozen=True)
class PipelineState:
    stage: str
    fibers: dict[str, FiberModel] = field(hash=False)
    choice: ResolutionChoice | None = None
    pairs: dict[str, tuple[str, str]] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")

    def fiber(self, key: str | int) -> FiberModel:
        return self.fibers[str(key)]

    def sections(self) -> dict[str, dict[str, str]]:
        """For each section, where it meets each fiber: 'side:corner-curves' or 'side:curve'."""
        out: dict[str, dict[str, str]] = {}
        for name, pt in SECTIONS.items():
            row = {}
            for key, fib in self.fibers.items():
                row[key] = _locate_section(fib, pt)
            out[name] = row
        return out


def _locate_section(fib: FiberModel, pt: str) -> str:
    hits = []
    for side, f in fib.components().items():
        k = f.corner_of(pt)
        if k is not None:
            hits.append(f"{side}:{f.labels[k]}|{f.labels[(k + 1) % f.n]}")
        if f"F:{pt}" in f.labels:
            hits.append(f"{side}:F:{pt}")
    return ";".join(hits)


def _require_stage(state: PipelineState, stage: str) -> None:
    if state.stage != stage:
        raise StageError(f"operation expects stage {stage}, state is at {state.stage}", stage=state.stage)


def _component_fan(param, conic_coords: set[int]) -> tuple[LabeledFan, int]:
    fan, edges = normal_fan(param.polygon)
    by_coords = {c.coords: c.label for c in cycle_curves() if c.kind == "edge"}
    labels, corners = [], []
    glue_len = None
    for e in edges:
        on = {int(s[1:]) for s in e.on_edge}
        if conic_coords and conic_coords <= on:
            labels.append(GLUE)
            glue_len = e.lattice_length
        else:
            labels.append(by_coords[frozenset(on - {0})])
        corners.append(param.polygon.label_of(e.end))
    return LabeledFan(fan.rays, tuple(labels), tuple(corners)), glue_len


def initial_fiber_models(fm: FamilyModel) -> PipelineState:
    """Stage X1: hexagonal generic fiber and six pairs of glued cubic surfaces."""
    fibers = {}
    gen = generic_fiber_parametrization(fm, _generic_lambda(fm))
    f, _ = _component_fan(gen, set())
    fibers[GENERIC] = FiberModel(GENERIC, str(gen.lam), f.rotated_to("C1"))
    for i in range(1, 7):
        plus, minus = fiber_components(fm, i)
        conic = intersection_conic(fm, i)
        plane = set(conic.plane[1:])
        fp, lp = _component_fan(plus, plane)
        fmn, lm = _component_fan(minus, plane)
        if lp != lm:
            raise StageError("gluing curve has different lattice length on the two sides", "X1", str(i))
        odps = tuple(f"x{k}" for k in sorted(plane))
        fibers[str(i)] = FiberModel(str(i), str(plus.lam), fp, fmn, lp, odps)
        halves = halves_assignment(fm, i)
        for side, fan in (("+", fp), ("-", fmn)):
            for l in fan.labels:
                if l != GLUE and halves[l] != side:
                    raise StageError(f"curve {l} on {side} disagrees with halves {halves[l]}", "X1", str(i))
    state = PipelineState("X1", fibers)
    verify_state(state)
    return state


def _generic_lambda(fm: FamilyModel) -> Fraction:
    # every fiber off the six roots is the same labelled toric surface
    return Fraction(min(fm.lambdas) - 1)


def small_resolve(state: PipelineState, choice: ResolutionChoice) -> PipelineState:
    """Stage X2: at each double point blow up the chosen component at its corner.

    The exceptional curve E:xk goes between ``L`` and the other curve through
    the point; the section through xk moves to the corner of E:xk and that curve.
    """
    _require_stage(state, "X1")
    bad = choice.non_equivariant_fibers()
    if bad:
        raise ChoiceError(
            f"resolution choice is not conjugation-equivariant (symbol {choice.symbols[bad[0] - 1]!r})",
            stage="X1",
            fiber=str(bad[0]),
        )
    fibers = dict(state.fibers)
    for i in range(1, 7):
        fib = fibers[str(i)]
        for slot, pt in enumerate(fib.odps):
            side = choice.side(i, slot)
            other = "-" if side == "+" else "+"
            comp = fib.component(side)
            k = comp.corner_of(pt)
            if k is None:
                raise StageError(f"double point {pt} is not a corner of component {side}", "X1", str(i))
            if comp.labels[k] == GLUE:
                comp = comp.blow_up(k, f"E:{pt}", left=None, right=pt)
            elif comp.labels[(k + 1) % comp.n] == GLUE:
                comp = comp.blow_up(k, f"E:{pt}", left=pt, right=None)
            else:
                raise StageError(f"double point {pt} is not on the gluing curve", "X1", str(i))
            opp = fib.component(other)
            kk = opp.corner_of(pt)
            corners = list(opp.corners)
            corners[kk] = None
            fib = fib.with_component(side, comp).with_component(other, replace(opp, corners=tuple(corners)))
        fibers[str(i)] = replace(fib, odps=())
    out = PipelineState("X2", fibers, choice)
    verify_state(out)
    return out


def blow_up_sections(state: PipelineState) -> PipelineState:
    """Stage X3: blow up the six points where the sections meet every fiber."""
    _require_stage(state, "X2")
    fibers = {}
    for key, fib in state.fibers.items():
        for pt in SECTIONS.values():
            hits = [(s, f) for s, f in fib.components().items() if f.corner_of(pt) is not None]
            if len(hits) != 1:
                raise StageError(f"section through {pt} meets {len(hits)} corners", "X2", key)
            side, f = hits[0]
            fib = fib.with_component(side, f.blow_up(f.corner_of(pt), f"F:{pt}"))
        fibers[key] = fib
    out = PipelineState("X3", fibers, state.choice)
    verify_state(out)
    return out


def _contract(fib: FiberModel, pair: Sequence[str]) -> FiberModel:
    for label in pair:
        for side, f in fib.components().items():
            if label in f.labels:
                fib = fib.with_component(side, f.blow_down(label, corner=f"odp:{label}"))
                break
        else:
            raise KeyError(label)
    return replace(fib, odps=tuple(f"odp:{l}" for l in pair))


def _final_labels(cycle: Sequence[str]) -> list[str] | None:
    """Rename F:xk to the vertex curve of xk and fill E curves from their neighbours."""
    vertex = {next(iter(c.coords)): c.label for c in cycle_curves() if c.kind == "vertex"}
    names: list[str | None] = []
    for l in cycle:
        if l.startswith("F:"):
            names.append(vertex[int(l[3:])])
        elif l.startswith("E:"):
            names.append(None)
        else:
            names.append(l)
    n = len(names)
    if n != 12:
        return None
    for k in range(n):
        if names[k] is None:
            prev, nxt = names[k - 1], names[(k + 1) % n]
            if prev is None or nxt is None:
                return None
            a, b = CYCLE_LABELS.index(prev), CYCLE_LABELS.index(nxt)
            if (a + 2) % 12 == b:
                names[k] = CYCLE_LABELS[(a + 1) % 12]
            elif (b + 2) % 12 == a:
                names[k] = CYCLE_LABELS[(b + 1) % 12]
            else:
                return None
    return names  # type: ignore[return-value]


def _reads_as_cycle(names: Sequence[str]) -> bool:
    if sorted(names) != sorted(CYCLE_LABELS):
        return False
    k = CYCLE_LABELS.index(names[0])
    fwd = [CYCLE_LABELS[(k + j) % 12] for j in range(12)]
    bwd = [CYCLE_LABELS[(k - j) % 12] for j in range(12)]
    return list(names) in (fwd, bwd)


def _pair_qualifies(fib: FiberModel, x: str, y: str) -> bool:
    sides = {}
    for label in (x, y):
        for side, f in fib.components().items():
            if label in f.labels:
                sides[label] = (side, f)
    if len(sides) != 2 or sides[x][0] == sides[y][0]:
        return False
    # (a) self-intersection -1 in its component; meeting L once makes the
    # normal bundle in the threefold (-1,-1) rather than (-1,0)
    for label, (_, f) in sides.items():
        if f.selfint_of(label) != -1 or GLUE not in f.neighbors(label):
            return False
    # (c) conjugation exchanges the two curves
    if curve_conj(x) != y:
        return False
    # (b) contraction leaves a single 12-cycle reading C1..C6, Cbar1..Cbar6
    try:
        out = _contract(fib, (x, y))
        names = _final_labels([l for l, _ in fiber_cycle(out)])
    except (StageError, ValueError):
        return False
    return names is not None and _reads_as_cycle(names)


def find_minus_one_pairs(state: PipelineState) -> dict[str, tuple[str, str]]:
    """The unique contractible conjugate pair per reducible fiber, by exhaustive search."""
    _require_stage(state, "X3")
    out = {}
    for i in range(1, 7):
        fib = state.fibers[str(i)]
        labels = [l for l, _ in fiber_cycle(fib)]
        found = [
            tuple(sorted((x, y), key=lambda l: 0 if l in fib.plus.labels else 1))
            for x, y in itertools.combinations(labels, 2)
            if _pair_qualifies(fib, x, y)
        ]
        if len(found) != 1:
            raise StageError(f"expected a unique (-1,-1) pair, found {found}", "X3", str(i))
        out[str(i)] = found[0]
    return out


def contract_pair(state: PipelineState, pairs: dict[str, tuple[str, str]]) -> PipelineState:
    """Stage Z: contract the pairs to double points and rename curves C1..Cbar6."""
    _require_stage(state, "X3")
    fibers = {}
    for key, fib in state.fibers.items():
        if key != GENERIC:
            for label in pairs[key]:
                side = "+" if label in fib.plus.labels else "-"
                if fib.component(side).selfint_of(label) != -1:
                    raise StageError(f"{label} is not a (-1)-curve", "X3", key)
            fib = _contract(fib, pairs[key])
        cycle = [l for l, _ in fiber_cycle(fib)]
        names = _final_labels(cycle)
        if names is None or not _reads_as_cycle(names):
            raise StageError(f"boundary {cycle} is not a 12-cycle C1..Cbar6", "X3", key)
        mapping = dict(zip(cycle, names))
        for side, f in fib.components().items():
            fib = fib.with_component(side, f.relabel(mapping))
        fibers[key] = fib
    out = PipelineState("Z", fibers, state.choice, dict(pairs))
    verify_state(out)
    return out


# ---------------------------------------------------------------- checks

EXPECTED_RAY_TOTAL = {"X1": 8, "X2": 10, "X3": 16, "Z": 14}
EXPECTED_GENERIC_LENGTH = {"X1": 6, "X2": 6, "X3": 12, "Z": 12}
EXPECTED_GLUE_SUM = {"X1": 2, "X2": 0, "X3": 0, "Z": 2}


def verify_state(state: PipelineState) -> None:
    """Re-check the stage invariants; raises StageError naming the fiber on failure."""
    st = state.stage
    if set(state.fibers) != set(FIBER_KEYS):
        raise StageError(f"fibers {sorted(state.fibers)} differ from {FIBER_KEYS}", st)
    gen = state.fibers[GENERIC]
    if gen.plus.n != EXPECTED_GENERIC_LENGTH[st]:
        raise StageError(f"generic fiber has {gen.plus.n} curves", st, GENERIC)
    if not gen.plus.conjugate().same_up_to_rotation(gen.plus):
        raise StageError("generic fiber is not conjugation symmetric", st, GENERIC)
    for i in range(1, 7):
        key = str(i)
        fib = state.fibers[key]
        if not fib.is_glued:
            raise StageError("reducible fiber is not glued", st, key)
        if fib.ray_total != EXPECTED_RAY_TOTAL[st]:
            raise StageError(f"{fib.ray_total} boundary curves, expected {EXPECTED_RAY_TOTAL[st]}", st, key)
        glue = fib.plus.selfint_of(GLUE) + fib.minus.selfint_of(GLUE)
        if glue != EXPECTED_GLUE_SUM[st]:
            raise StageError(f"self-intersections of L sum to {glue}", st, key)
        if not fib.plus.conjugate().same_up_to_rotation(fib.minus):
            raise StageError("minus component is not the conjugate of plus", st, key)
        cyc = fiber_cycle(fib)
        if len(cyc) != fib.ray_total - 2:
            raise StageError("glued boundary is not a single cycle", st, key)
        if st == "X1" and len(fib.fixed_points()) != 6:
            raise StageError(f"{len(fib.fixed_points())} fixed points, expected 6", st, key)
    if st == "Z":
        for key, fib in state.fibers.items():
            names = [l for l, _ in fiber_cycle(fib)]
            if not _reads_as_cycle(names):
                raise StageError(f"final boundary {names} is not the 12-cycle", st, key)


@dataclass(frozen=True)
class CheckRecord:
    id: str
    description: str
    passed: bool
    detail: str = ""


@dataclass
class PipelineRun:
    states: dict[str, PipelineState]
    pairs: dict[str, tuple[str, str]]
    checks: list[CheckRecord]

    @property
    def final(self) -> PipelineState:
        return self.states["Z"]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def run_pipeline(fm: FamilyModel, choice: ResolutionChoice | None = None) -> PipelineRun:
    choice = choice if choice is not None else ResolutionChoice.default(fm)
    x1 = initial_fiber_models(fm)
    x2 = small_resolve(x1, choice)
    x3 = blow_up_sections(x2)
    pairs = find_minus_one_pairs(x3)
    z = contract_pair(x3, pairs)
    states = {"X1": x1, "X2": x2, "X3": x3, "Z": z}
    checks = _pipeline_checks(states, pairs)
    return PipelineRun(states, pairs, checks)


def _pipeline_checks(states: dict[str, PipelineState], pairs) -> list[CheckRecord]:
    checks = []
    gen = {st: s.fibers[GENERIC].plus for st, s in states.items()}
    checks.append(
        CheckRecord("surgery.generic.X1", "generic fiber cycle (-1)^6", gen["X1"].selfint.values == (-1,) * 6,
                    gen["X1"].selfint.compact())
    )
    zc = gen["Z"].selfint
    checks.append(
        CheckRecord("surgery.generic.Z", "generic fiber cycle (-3,-1)^6 up to dihedral symmetry",
                    cycles_equivalent(zc, (-3, -1) * 6), zc.compact())
    )
    for st, s in states.items():
        totals = [s.fibers[str(i)].ray_total for i in range(1, 7)]
        checks.append(
            CheckRecord(f"surgery.count.{st}", f"component curve total {EXPECTED_RAY_TOTAL[st]} on reducible fibers",
                        all(t == EXPECTED_RAY_TOTAL[st] for t in totals), str(totals))
        )
    for i in range(1, 7):
        x1f = states["X1"].fibers[str(i)]
        ok = all(f.selfint_of(GLUE) == 1 for f in (x1f.plus, x1f.minus)) and x1f.gluing_length == 2
        checks.append(
            CheckRecord(f"surgery.X1.{i}.glue", "conic is a +1 curve of lattice length 2 on both components", ok,
                        f"length {x1f.gluing_length}")
        )
        pair = pairs[str(i)]
        exceptional = all(p.startswith("E:") for p in pair)
        checks.append(
            CheckRecord(f"surgery.X3.{i}.pair", "unique conjugate (-1,-1) pair", curve_conj(pair[0]) == pair[1],
                        f"{pair[0]},{pair[1]} (exceptional: {'yes' if exceptional else 'no'})")
        )
    for key in FIBER_KEYS:
        cyc = fiber_cycle(states["Z"].fibers[key])
        checks.append(
            CheckRecord(f"surgery.Z.{key}.cycle", "boundary is a 12-cycle C1..C6, Cbar1..Cbar6",
                        len(cyc) == 12 and _reads_as_cycle([l for l, _ in cyc]), _cycle_text(cyc))
        )
    return checks


def _cycle_text(cycle: Iterable[tuple[str, int]]) -> str:
    return " ".join(f"{l}({a})" for l, a in cycle)


# ---------------------------------------------------------------- serialization

STATE_SCHEMA = "twistorfam.pipeline-state/1"


def state_to_dict(state: PipelineState) -> dict:
    return {
        "schema": STATE_SCHEMA,
        "stage": state.stage,
        "choice": list(state.choice.symbols) if state.choice else None,
        "pairs": {k: list(v) for k, v in sorted(state.pairs.items())},
        "fibers": {k: state.fibers[k].to_dict() for k in FIBER_KEYS if k in state.fibers},
        "sections": state.sections(),
    }


def state_from_dict(d: dict) -> PipelineState:
    if d.get("schema") != STATE_SCHEMA:
        raise ValueError(f"unsupported schema {d.get('schema')!r}")
    choice = ResolutionChoice(tuple(d["choice"])) if d.get("choice") else None
    fibers = {k: FiberModel.from_dict(v) for k, v in d["fibers"].items()}
    state = PipelineState(d["stage"], fibers, choice, {k: tuple(v) for k, v in d["pairs"].items()})
    verify_state(state)
    return state
