"""The eleven acceptance criteria, one test each; every comparison is exact.

Each test prints a ``criterion n: PASS|FAIL`` line and the session summary
repeats them in order.
"""

import json
import random
from fractions import Fraction
from pathlib import Path

from hypothesis import given, settings
from test_familymodel import admissible_tuples, brute_force_real_point, sympy_generators, to_sympy_terms
from test_toricgeom import fans

from twistorfam import cli
from twistorfam.familymodel import (
    CONJ_COORD,
    FAMILY_VARS,
    conic_isotropy,
    fiber_components,
    generic_fiber_parametrization,
    intersection_conic,
    jacobian_rank_at,
    real_point_exists,
    singular_candidates,
    verify_odp,
)
from twistorfam.polycore import GaussianRational as G
from twistorfam.polycore import Polynomial, quad_form_rank
from twistorfam.surgery import ResolutionChoice, fiber_cycle, find_minus_one_pairs, run_pipeline
from twistorfam.toricgeom import (
    blow_down_ray,
    blow_up_corner,
    cycles_equivalent,
    fan_from_selfint,
    k_squared,
    normal_fan,
    polygon_degree,
    selfint_from_fan,
)

GOLDEN = Path(__file__).parent / "golden"


def test_criterion_01_equations(fm, record):
    lines = (GOLDEN / "generators_canonical.txt").read_text().splitlines()
    golden = [Polynomial.parse(ln.split(" = ", 1)[1], FAMILY_VARS) for ln in lines]
    same_golden = golden == list(fm.generators)
    same_oracle = all(to_sympy_terms(g) == dict(s.terms()) for g, s in zip(fm.generators, sympy_generators(range(1, 7))))
    ok = len(golden) == 9 and same_golden and same_oracle
    assert record(1, ok, f"9 generators: golden {same_golden}, independent transcription {same_oracle}")


def test_criterion_02_reality_identity(fm, record):
    cf = fm.coefficients
    ident = (cf.a * cf.b * cf.c - cf.d * cf.d).is_zero()
    v = fm.coefficients.at(0)
    values = (v["a"], v["b"], v["c"], v["d"]) == (G(-180), G(-40), G(72), G(720))
    prod = v["a"] * v["b"] * v["c"] == G(518400) == G(720) * G(720)
    ok = ident and values and prod
    assert record(2, ok, f"abc-d^2 == 0: {ident}; (a,b,c,d)(0) = ({v['a']},{v['b']},{v['c']},{v['d']}); abc = 518400")


def test_criterion_03_symmetry(fm, record):
    homog = len(fm.weights) == 9
    perm = {k: j for k, (j, _) in fm.involution.items()}
    expected = {1: 1, 2: 2, 3: 3, 4: 7, 7: 4, 5: 8, 8: 5, 6: 9, 9: 6}
    ok = homog and perm == expected
    assert record(3, ok, f"weights {fm.weights}; involution {sorted(perm.items())}")


def test_criterion_04_generic_fiber(fm, record):
    rng = random.Random(2024)
    lams = []
    while len(lams) < 20:
        lam = Fraction(rng.randint(-99, 99), rng.randint(1, 13))
        if lam not in fm.lambdas and lam not in lams:
            lams.append(lam)
    ok = True
    for lam in lams:
        p = generic_fiber_parametrization(fm, lam)
        fan, _ = normal_fan(p.polygon)
        ok &= p.annihilates(fm.specialized(lam))
        ok &= polygon_degree(p.polygon) == 6
        ok &= selfint_from_fan(fan).values == (-1,) * 6 and k_squared(fan) == 6
        for _ in range(5):
            s = Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 20))
            u = Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 20))
            ok &= jacobian_rank_at(fm, p.point(s, u)) == 4
    assert record(4, ok, "20 random lambda0: annihilation, degree 6, cycle (-1)^6, K^2 = 6, rank 4 at 5 points each")


def test_criterion_05_singular_fibers(fm, record):
    ok = True
    for i in range(1, 7):
        plus, minus = fiber_components(fm, i)
        conic = intersection_conic(fm, i)
        ok &= all(polygon_degree(c.polygon) == 3 and len(c.nonzero_coords) == 5 for c in (plus, minus))
        ok &= all(c.polygon.lattice_points_in_hull() == 5 for c in (plus, minus))
        ok &= frozenset(CONJ_COORD[k] for k in plus.zero_coords) == minus.zero_coords
        ok &= conic.param.zero_coords == plus.zero_coords | minus.zero_coords
        ok &= conic.is_irreducible() and quad_form_rank(conic.equation) == 3
        ok &= not conic.has_real_points()
    assert record(5, ok, "6 fibers: two cubics (5 monomials), swapped by conjugation, irreducible conic, no real points")


def test_criterion_06_odp_suite(fm, record):
    cands = singular_candidates(fm)
    all_odp = all(verify_odp(fm, p) for p in cands)
    neg = [generic_fiber_parametrization(fm, Fraction(-5, 3)).point(3, 7)]
    neg += [intersection_conic(fm, i).param.point(Fraction(2, 5), 1) for i in range(1, 7)]
    none = not any(verify_odp(fm, p) for p in neg)
    ok = len(cands) == 12 and all_odp and none
    assert record(6, ok, f"{len(cands)} candidates, all ODP: {all_odp}; {len(neg)} smooth/conic points rejected: {none}")


def test_criterion_07_isotropy(fm, record):
    iso = {i: conic_isotropy(fm, i).vector for i in range(1, 7)}
    ok = iso[1] == iso[4] and iso[2] == iso[5] and iso[3] == iso[6] and len({iso[1], iso[2], iso[3]}) == 3
    assert record(7, ok, f"isotropy {iso}")


def test_criterion_08_real_points(record):
    tuples = list(admissible_tuples(50))
    agree = 0
    for a, b, c, d in tuples:
        expected = a.re >= 0 and b.re >= 0 and c.re >= 0
        got = real_point_exists(a, b, c, d).exists
        agree += got is expected and brute_force_real_point(a, b, c, d) is expected
    ok = len(tuples) == 50 and agree == 50
    assert record(8, ok, f"{agree}/50 tuples agree with brute force and with a,b,c >= 0")


def test_criterion_09_surgery(fm, record):
    run = run_pipeline(fm, ResolutionChoice.default(fm))
    # exhaustive search over all boundary pairs; raises unless exactly one qualifies per fiber
    unique = find_minus_one_pairs(run.states["X3"]) == run.pairs and len(run.pairs) == 6
    twelve = all(len(fiber_cycle(f)) == 12 for f in run.final.fibers.values())
    gen = run.final.fiber("generic").plus.selfint
    generic = cycles_equivalent(gen, (-3, -1) * 6)
    ok = run.passed and unique and twelve and generic
    assert record(9, ok, f"pairs {run.pairs}; all 12-cycles {twelve}; generic {gen.compact()}")


_FAN_CASES = []


@settings(max_examples=50, database=None)
@given(fans())
def _fan_property(fan):
    cyc = selfint_from_fan(fan)
    ok = sum(cyc.values) == 12 - 3 * fan.n and selfint_from_fan(fan_from_selfint(cyc)) == cyc
    for k in range(fan.n):
        ok &= blow_down_ray(blow_up_corner(fan, k), k + 1) == fan
    _FAN_CASES.append(ok)
    assert ok


def test_criterion_10_toric_identities(run, record):
    _FAN_CASES.clear()
    _fan_property()
    inline = True
    fans_seen = 0
    for s in run.states.values():
        for fib in s.fibers.values():
            for comp in fib.components().values():
                fans_seen += 1
                inline &= sum(comp.selfint.values) == 12 - 3 * comp.n
                for k in range(comp.n):
                    inline &= blow_down_ray(blow_up_corner(comp.fan, k), k + 1) == comp.fan
    ok = len(_FAN_CASES) >= 50 and all(_FAN_CASES) and inline
    assert record(10, ok, f"{len(_FAN_CASES)} random fans pass; {fans_seen} pipeline fans balanced and round-trip")


def test_criterion_11_cli_contract(tmp_path, record, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n1\n3\n4\n5\n6\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = {
        "verify ok": cli.main(["verify", "--quiet", "--json", str(a)]),
        "verify again": cli.main(["verify", "--quiet", "--json", str(b)]),
        "verify bad input": cli.main(["verify", "--lambdas", str(bad)]),
        "fiber ok": cli.main(["fiber", "--lambda", "0", "--quiet"]),
        "fiber bad input": cli.main(["fiber", "--lambda", "x"]),
        "surgery ok": cli.main(["surgery", "--default", "--quiet"]),
    }
    nonequi = tmp_path / "ch.txt"
    nonequi.write_text("--\n+-\n+-\n+-\n+-\n+-\n")
    codes["surgery non-equivariant"] = cli.main(["surgery", "--choices", str(nonequi), "--quiet"])
    codes["surgery bad input"] = cli.main(["surgery", "--choices", str(tmp_path / "none.txt")])
    capsys.readouterr()
    expected = {"verify ok": 0, "verify again": 0, "verify bad input": 2, "fiber ok": 0, "fiber bad input": 2,
                "surgery ok": 0, "surgery non-equivariant": 1, "surgery bad input": 2}
    stable = a.read_bytes() == b.read_bytes() and json.loads(a.read_text())["status"] == "pass"
    ok = codes == expected and stable
    assert record(11, ok, f"exit codes {codes}; byte-stable report {stable}")
