"""Verification suites and the structured report they produce.

Each suite returns a list of ClaimRecord.  The canonical report holds no
timestamps, so two runs on the same input serialize to identical bytes.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

from . import __version__
from .familymodel import (
    CONJ_COORD,
    FIBER_VARS,
    ConformalInvariant,
    FamilyModel,
    MixedWeightError,
    analyze_point,
    build_family,
    classify_fiber,
    conic_isotropy,
    fiber_components,
    generator_weight,
    generic_fiber_parametrization,
    infinity_chart_generators,
    intersection_conic,
    jacobian_rank_at,
    real_point_exists,
    singular_candidates,
)
from .polycore import Polynomial, check_certificate, jacobian_at, rank
from .surgery import ResolutionChoice, StageError, run_pipeline
from .toricgeom import k_squared, normal_fan, polygon_degree, selfint_from_fan

REPORT_SCHEMA = "twistorfam.report/1"
EXPECTED_INVOLUTION = {1: 1, 2: 2, 3: 3, 4: 7, 5: 8, 6: 9, 7: 4, 8: 5, 9: 6}

__all__ = ["ClaimRecord", "VerificationReport", "SUITES", "run_suites", "generic_samples"]


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    anchor: str
    status: str  # "pass" | "fail" | "skipped"
    witness: str = ""


@dataclass
class VerificationReport:
    lambdas: tuple[str, ...]
    claims: list[ClaimRecord] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def status(self) -> str:
        return "pass" if all(c.status == "pass" for c in self.claims) else "fail"

    def canonical(self) -> dict:
        ids = [c.id for c in self.claims]
        if len(set(ids)) != len(ids):
            raise AssertionError("claim ids must be unique")
        return {
            "schema": REPORT_SCHEMA,
            "tool": "twistorfam",
            "version": self.version,
            "lambdas": list(self.lambdas),
            "status": self.status,
            "claims": [asdict(c) for c in self.claims],
        }

    def to_json(self) -> str:
        return json.dumps(self.canonical(), indent=2, sort_keys=True) + "\n"

    def timing_json(self) -> str:
        return json.dumps({"suites": self.timing}, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"twistorfam {self.version}  lambdas = {', '.join(self.lambdas)}"]
        for c in self.claims:
            lines.append(f"[{c.status.upper():4}] {c.id}: {c.anchor}" + (f"  ({c.witness})" if c.witness else ""))
        n_pass = sum(c.status == "pass" for c in self.claims)
        lines.append(f"{n_pass}/{len(self.claims)} claims pass; overall {self.status.upper()}")
        return "\n".join(lines) + "\n"


def _rec(cid: str, anchor: str, ok: bool, witness: str = "") -> ClaimRecord:
    return ClaimRecord(cid, anchor, "pass" if ok else "fail", witness)


def generic_samples(fm: FamilyModel, count: int, seed: int = 0) -> list[Fraction]:
    """Deterministic rational sample points of the base avoiding the six roots."""
    rng = random.Random(seed)
    out: list[Fraction] = []
    while len(out) < count:
        lam = Fraction(rng.randint(-60, 60), rng.randint(1, 9))
        if lam not in fm.lambdas and lam not in out:
            out.append(lam)
    return out


def suite_family(fm: FamilyModel) -> list[ClaimRecord]:
    cf = fm.coefficients
    out = []
    ident = cf.a * cf.b * cf.c - cf.d * cf.d
    out.append(_rec("family.abc-d2", "abc - d^2 vanishes identically in l", ident.is_zero(),
                    f"deg d = {cf.d.degree()}"))
    roots = all(cf.d.eval({"l": lam}).is_zero() for lam in fm.lambdas)
    out.append(_rec("family.d-roots", "d vanishes at every lambda_j", roots))
    try:
        homog = [generator_weight(g) for g in fm.generators] == list(fm.weights)
    except MixedWeightError:
        homog = False
    quadratic = all(g.degree_in(FIBER_VARS) == 2 for g in fm.generators)
    out.append(_rec("family.weights", "every generator is weight-homogeneous for the torus action",
                    homog and quadratic and len(fm.weights) == 9, " ".join(f"g{k + 1}{w}" for k, w in enumerate(fm.weights))))
    perm = {k: j for k, (j, _) in fm.involution.items()}
    out.append(_rec("family.involution", "real structure permutes generators as (4 7)(5 8)(6 9)",
                    perm == EXPECTED_INVOLUTION, str(sorted(perm.items()))))
    # x1 g4 - e14 x0 g1 = x1 x3 x5 - d x0^3 exhibits x1x3x5 = d x0^3 on the family
    x = {k: Polynomial.var(f"x{k}", fm.generators[0].variables) for k in range(7)}
    target = x[1] * x[3] * x[5] - cf.d * x[0] ** 3
    cert = check_certificate(target, [(x[1], 4), (-(cf.e14 * x[0]), 1)], fm.generators)
    out.append(_rec("family.cubic-relation", "x1 x3 x5 = d x0^3 lies in the ideal", cert,
                    "x1*g4 - e14*x0*g1"))
    return out


def suite_fibers(fm: FamilyModel, samples: int = 20) -> list[ClaimRecord]:
    out = []
    rng = random.Random(1)
    bad = []
    for lam in generic_samples(fm, samples):
        p = generic_fiber_parametrization(fm, lam)
        fan, _ = normal_fan(p.polygon)
        ok = (
            classify_fiber(fm, lam).kind == "smooth"
            and p.annihilates(fm.specialized(lam))
            and polygon_degree(p.polygon) == 6
            and selfint_from_fan(fan).values == (-1,) * 6
            and k_squared(fan) == 6
        )
        for _ in range(5):
            s = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
            u = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
            ok = ok and jacobian_rank_at(fm, p.point(s, u)) == 4
        if not ok:
            bad.append(str(lam))
    out.append(_rec("fibers.generic", "generic fibers are smooth toric sextics with cycle (-1)^6",
                    not bad, f"{samples} samples" + (f", failing {bad}" if bad else "")))
    # chart at infinity: l = 1/m, the fiber over m = 0 is smooth
    gens = infinity_chart_generators(fm.ci)
    pt = {"m": 0, "x1": 1, "x2": -1, "x3": 1, "x4": -1, "x5": 1, "x6": 1}
    chart = [g.specialize({"x0": 1}) for g in gens]
    on = all(g.eval(pt).is_zero() for g in chart)
    r = rank(jacobian_at(chart, pt, ("m",) + tuple(f"x{k}" for k in range(1, 7))))
    out.append(_rec("fibers.infinity", "fiber at l = infinity is smooth at a torus-orbit point",
                    on and r == 4, f"jacobian rank {r}"))
    for i in range(1, 7):
        plus, minus = fiber_components(fm, i)
        conic = intersection_conic(fm, i)
        degs = [polygon_degree(c.polygon) for c in (plus, minus)]
        pts = [c.polygon.lattice_points_in_hull() for c in (plus, minus)]
        swapped = frozenset(CONJ_COORD[k] for k in plus.zero_coords) == minus.zero_coords
        conj_pt = plus.point(2, 3).conjugate()
        on_minus = all(g.eval(conj_pt.bindings()).is_zero() for g in fm.generators) and all(
            not conj_pt.coords[k] for k in minus.zero_coords
        )
        cycles = sorted(sorted(selfint_from_fan(normal_fan(c.polygon)[0]).values) for c in (plus, minus))
        ok = (
            degs == [3, 3]
            and pts == [5, 5]
            and swapped
            and on_minus
            and cycles == [[-1, 0, 0, 1]] * 2
            and conic.is_irreducible()
            and not conic.has_real_points()
            and conic.param.annihilates(fm.specialized(conic.param.lam))
        )
        z = lambda c: "{" + ",".join(f"x{k}" for k in sorted(c.zero_coords)) + "}=0"  # noqa: E731
        out.append(_rec(f"fibers.reducible.{i}",
                        "two toric cubic components swapped by the real structure, meeting in a conic without real points",
                        ok, f"{z(plus)} | {z(minus)}; conic x{conic.plane[1]}x{conic.plane[2]} = {conic.kappa} x0^2"))
    iso = {i: conic_isotropy(fm, i).vector for i in range(1, 7)}
    paired = iso[1] == iso[4] and iso[2] == iso[5] and iso[3] == iso[6]
    distinct = len({iso[1], iso[2], iso[3]}) == 3
    out.append(_rec("fibers.isotropy", "conic isotropy agrees on {1,4}, {2,5}, {3,6} and differs across pairs",
                    paired and distinct, " ".join(f"{i}:{v}" for i, v in iso.items())))
    return out


def suite_odp(fm: FamilyModel) -> list[ClaimRecord]:
    out = []
    cands = singular_candidates(fm)
    closed = all(any(c.conjugate().projectively_equal(d) for d in cands) for c in cands)
    out.append(_rec("odp.count", "twelve torus-fixed points on the six conics, closed under conjugation",
                    len(cands) == 12 and closed, str(len(cands))))
    for pt in cands:
        a = analyze_point(fm, pt)
        k = next(j for j in range(7) if pt.coords[j])
        out.append(_rec(f"odp.l{pt.lam}.x{k}", "ordinary double point (Jacobian corank 1, rank-4 tangent cone)",
                        a.is_odp, f"jacobian rank {a.jacobian_rank}, quadric rank {a.quadric_rank}"))
    negatives = []
    for lam in generic_samples(fm, 2, seed=2):
        negatives.append(generic_fiber_parametrization(fm, lam).point(2, -3))
    for i in range(1, 7):
        negatives.append(intersection_conic(fm, i).param.point(Fraction(1, 2), 5))
    fails = all(not analyze_point(fm, p).is_odp for p in negatives)
    out.append(_rec("odp.negative", "smooth fiber points and non-fixed conic points are not double points",
                    fails, f"{len(negatives)} points"))
    return out


def suite_real(fm: FamilyModel) -> list[ClaimRecord]:
    out = []
    w = real_point_exists(4, 9, 1, 6)
    ok = w.exists and w.witness is not None and [str(c) for c in w.witness] == ["1", "2", "2", "3", "3", "1", "1"]
    out.append(_rec("real.example", "constants (4,9,1,6) admit the real point (1,2,2,3,3,1,1)", ok))
    cf = fm.coefficients.at(0)
    neg = real_point_exists(cf["a"], cf["b"], cf["c"], cf["d"])
    out.append(_rec("real.boundary", "a = 0 boundary case has a real point", real_point_exists(0, 1, 1, 0).exists))
    none = not neg.exists
    for lam in generic_samples(fm, 20, seed=3):
        v = fm.coefficients.at(lam)
        none = none and not real_point_exists(v["a"], v["b"], v["c"], v["d"]).exists
    out.append(_rec("real.fibers", "no real points on fibers over real non-root lambda", none,
                    f"lambda=0: a,b,c = {cf['a']},{cf['b']},{cf['c']}"))
    return out


def suite_surgery(fm: FamilyModel, choice: ResolutionChoice | None = None) -> list[ClaimRecord]:
    try:
        run = run_pipeline(fm, choice)
    except StageError as exc:
        return [_rec("surgery.pipeline", "resolution, section blow-ups and contraction complete", False, str(exc))]
    out = [_rec("surgery.pipeline", "resolution, section blow-ups and contraction complete", True,
                "choice " + " ".join(run.final.choice.symbols))]
    out.extend(_rec(c.id, c.description, c.passed, c.detail) for c in run.checks)
    return out


SUITES: dict[str, Callable[[FamilyModel], list[ClaimRecord]]] = {
    "family": suite_family,
    "fibers": suite_fibers,
    "odp": suite_odp,
    "real": suite_real,
    "surgery": suite_surgery,
}


def run_suites(ci: ConformalInvariant, only: list[str] | None = None) -> VerificationReport:
    names = list(SUITES) if not only else only
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    fm = build_family(ci)
    report = VerificationReport(tuple(str(x) for x in ci.lambdas))
    for name in SUITES:
        if name not in names:
            continue
        t0 = time.perf_counter()
        report.claims.extend(SUITES[name](fm))
        report.timing[name] = round(time.perf_counter() - t0, 4)
    return report
