import itertools
import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twistorfam.familymodel import (
    FAMILY_VARS,
    ConformalInvariant,
    FamilyPoint,
    InvalidInvariantError,
    MixedWeightError,
    analyze_point,
    apply_real_structure,
    build_family,
    classify_fiber,
    coefficient_functions,
    conic_isotropy,
    cycle_curves,
    fiber_components,
    generator_weight,
    generic_fiber_parametrization,
    halves_assignment,
    infinity_chart_generators,
    intersection_conic,
    jacobian_rank_at,
    real_point_exists,
    singular_candidates,
    toric_surface_equations,
    verify_odp,
)
from twistorfam.polycore import GaussianRational as G
from twistorfam.polycore import Polynomial, check_certificate, jacobian_at, quad_form_rank, rank
from twistorfam.toricgeom import normal_fan, polygon_degree, selfint_from_fan

GOLDEN = Path(__file__).parent / "golden"


@st.composite
def invariants(draw):
    vals = draw(st.lists(st.fractions(-30, 30, max_denominator=7), min_size=6, max_size=6, unique=True))
    return ConformalInvariant(tuple(sorted(vals)))


def sympy_generators(lams):
    """The nine defining quadrics typed in directly, as LHS - RHS."""
    l = sympy.Symbol("l")
    x = sympy.symbols("x0:7")
    f = {j: l - sympy.Rational(lams[j - 1]) for j in range(1, 7)}
    eqs = [
        (x[1] * x[2], -f[2] * f[5] * f[3] * f[6] * x[0] ** 2),
        (x[3] * x[4], -f[1] * f[4] * f[2] * f[5] * x[0] ** 2),
        (x[5] * x[6], f[1] * f[4] * f[3] * f[6] * x[0] ** 2),
        (x[3] * x[5], -f[1] * f[4] * x[0] * x[2]),
        (x[5] * x[1], -f[3] * f[6] * x[0] * x[4]),
        (x[1] * x[3], f[2] * f[5] * x[0] * x[6]),
        (x[4] * x[6], -f[1] * f[4] * x[0] * x[1]),
        (x[2] * x[6], -f[3] * f[6] * x[0] * x[3]),
        (x[2] * x[4], f[2] * f[5] * x[0] * x[5]),
    ]
    return [sympy.Poly(sympy.expand(a - b), l, *x) for a, b in eqs]


def to_sympy_terms(p: Polynomial):
    return {e: sympy.Rational(c.re) + sympy.I * sympy.Rational(c.im) for e, c in p.terms.items()}


# ---------------------------------------------------------------- construction


def test_golden_generators_match_independent_transcription(fm):
    lines = (GOLDEN / "generators_canonical.txt").read_text().splitlines()
    golden = [Polynomial.parse(ln.split(" = ", 1)[1], FAMILY_VARS) for ln in lines]
    assert golden == list(fm.generators)
    for ours, theirs in zip(golden, sympy_generators(range(1, 7))):
        assert to_sympy_terms(ours) == dict(theirs.terms())


@settings(max_examples=15)
@given(invariants())
def test_generators_match_transcription_for_any_invariants(ci):
    fm = build_family(ci)
    for ours, theirs in zip(fm.generators, sympy_generators(ci.lambdas)):
        assert to_sympy_terms(ours) == dict(theirs.terms())


def test_coefficients_at_zero(fm):
    v = fm.coefficients.at(0)
    assert (v["a"], v["b"], v["c"], v["d"]) == (G(-180), G(-40), G(72), G(720))
    assert v["a"] * v["b"] * v["c"] == G(518400) == v["d"] * v["d"]


@settings(max_examples=20)
@given(invariants())
def test_reality_identity_and_roots(ci):
    cf = coefficient_functions(ci)
    assert (cf.a * cf.b * cf.c - cf.d * cf.d).is_zero()
    assert cf.d.degree() == 6 and (cf.d * cf.d).degree() == 12
    assert all(cf.d.eval({"l": lam}).is_zero() for lam in ci.lambdas)


def test_g1_at_zero(fm):
    x = {k: Polynomial.var(f"x{k}", FAMILY_VARS) for k in range(3)}
    assert fm.generators[0].specialize({"l": 0}) == x[1] * x[2] + x[0] * x[0] * 180


def test_weights(fm):
    assert fm.weights == ((0, 0), (0, 0), (0, 0), (-1, 0), (0, -1), (1, 1), (1, 0), (0, 1), (-1, -1))
    x = {k: Polynomial.var(f"x{k}", FAMILY_VARS) for k in range(7)}
    assert generator_weight(x[1] * x[2]) == (0, 0)
    assert generator_weight(x[3] * x[5]) == (-1, 0)
    assert generator_weight(x[1] * x[3] * x[5]) == (0, 0)
    with pytest.raises(MixedWeightError):
        generator_weight(x[1] * x[2] + x[1] * x[3])


@settings(max_examples=15)
@given(invariants())
def test_involution_permutation_for_any_invariants(ci):
    fm = build_family(ci)
    perm = {k: j for k, (j, _) in fm.involution.items()}
    assert perm == {1: 1, 2: 2, 3: 3, 4: 7, 7: 4, 5: 8, 8: 5, 6: 9, 9: 6}
    for g in fm.generators:
        assert apply_real_structure(fm, apply_real_structure(fm, g)) == g


def test_real_structure_examples(fm):
    x0, x1, x2 = (Polynomial.var(f"x{k}", FAMILY_VARS) for k in range(3))
    assert apply_real_structure(fm, x1) == x2
    assert apply_real_structure(fm, x0 * x0 * G(0, 1)) == x0 * x0 * G(0, -1)
    assert apply_real_structure(fm, fm.generators[3]) == fm.generators[6]


def test_cubic_relation_certificate_sign(fm):
    cf = fm.coefficients
    x = {k: Polynomial.var(f"x{k}", FAMILY_VARS) for k in range(7)}
    target = x[1] * x[3] * x[5] - cf.d * x[0] ** 3
    assert check_certificate(target, [(x[1], 4), (-(cf.e14 * x[0]), 1)], fm.generators)
    assert not check_certificate(target, [(x[1], 4), (cf.e14 * x[0], 1)], fm.generators)


@pytest.mark.parametrize(
    "text, err",
    [("1\n2\n3\n4\n5", "exactly six"), ("1\n3\n2\n4\n5\n6", "strictly increasing"), ("1\n2\n3\n4\n5\n1.5", "p/q"),
     ("1\n2\n3\n4\n5\n6/0", "zero denominator")],
)
def test_invariant_validation(text, err):
    with pytest.raises(InvalidInvariantError, match=err):
        ConformalInvariant.parse(text)


def test_invariant_file(tmp_path):
    p = tmp_path / "ci.txt"
    p.write_text("# canonical\n-1/2\n1\n2\n3\n4\n9/2\n")
    ci = ConformalInvariant.from_file(p)
    assert ci[1] == Fraction(-1, 2) and ci[6] == Fraction(9, 2)


# ---------------------------------------------------------------- fibers


@pytest.mark.parametrize("lam, expected", [(0, "Smooth"), (3, "Reducible(3)"), (Fraction(7, 2), "Smooth")])
def test_classify(fm, lam, expected):
    assert str(classify_fiber(fm, lam)) == expected


def test_generic_parametrization_at_zero(fm):
    p = generic_fiber_parametrization(fm, 0)
    assert [str(c) for c in p.coefficients] == ["1", "1", "-180", "1", "-40", "720", "1/10"]
    assert sorted(p.polygon.hull()) == sorted([(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)])
    assert polygon_degree(p.polygon) == 6
    fan, _ = normal_fan(p.polygon)
    assert selfint_from_fan(fan).values == (-1,) * 6
    with pytest.raises(ValueError):
        generic_fiber_parametrization(fm, 2)


@settings(max_examples=20)
@given(st.fractions(-40, 40, max_denominator=9), st.fractions(1, 5, max_denominator=5), st.fractions(1, 5, max_denominator=5))
def test_generic_parametrization_property(fm, lam, p, q):
    if lam in fm.lambdas:
        return
    param = generic_fiber_parametrization(fm, lam, p, q)
    gens = fm.specialized(lam)
    assert param.annihilates(gens)
    assert jacobian_rank_at(fm, param.point(Fraction(2, 3), -3)) == 4


def test_components_fiber_one(fm):
    plus, minus = fiber_components(fm, 1)
    assert minus.zero_coords == {3, 6} and plus.zero_coords == {4, 5}
    # relations on {x3 = x6 = 0}: x1x2 = -40 x0^2, x5x1 = -10 x0x4, x2x4 = 4 x0x5
    s = {f"x{k}": minus.coefficients[k] for k in range(7)}
    assert s["x1"] * s["x2"] == G(-40) * s["x0"] ** 2
    assert s["x5"] * s["x1"] == G(-10) * s["x0"] * s["x4"]
    assert s["x2"] * s["x4"] == G(4) * s["x0"] * s["x5"]


@pytest.mark.parametrize("i", range(1, 7))
def test_reducible_fiber(fm, i):
    plus, minus = fiber_components(fm, i)
    for c in (plus, minus):
        assert len(c.zero_coords) == 2
        assert polygon_degree(c.polygon) == 3
        assert c.polygon.lattice_points_in_hull() == 5 == len(c.nonzero_coords)
        assert sorted(selfint_from_fan(normal_fan(c.polygon)[0]).values) == [-1, 0, 0, 1]
        assert c.annihilates(fm.specialized(c.lam))
    conic = intersection_conic(fm, i)
    assert conic.param.zero_coords == plus.zero_coords | minus.zero_coords
    assert conic.is_irreducible() and quad_form_rank(conic.equation) == 3
    assert conic.kappa.re < 0 and not conic.has_real_points()
    pt = plus.point(3, Fraction(1, 2)).conjugate()
    assert all(not pt.coords[k] for k in minus.zero_coords)
    assert all(g.eval(pt.bindings()).is_zero() for g in fm.generators)


def test_conic_fiber_one(fm):
    conic = intersection_conic(fm, 1)
    assert conic.plane == (0, 1, 2) and conic.kappa == G(-40)


def test_fiber_index_errors(fm):
    for bad in (0, 7):
        with pytest.raises(IndexError):
            fiber_components(fm, bad)


def test_isotropy(fm):
    iso = {i: conic_isotropy(fm, i).vector for i in range(1, 7)}
    assert iso[1] == iso[4] == (0, 1)
    assert iso[2] == iso[5] and iso[3] == iso[6]
    assert len({iso[1], iso[2], iso[3]}) == 3


# ---------------------------------------------------------------- double points


def test_candidates(fm):
    cands = singular_candidates(fm)
    assert len(cands) == 12
    assert cands[0] == FamilyPoint.coordinate_point(1, 1) and cands[1] == FamilyPoint.coordinate_point(1, 2)
    for a, b in zip(cands[::2], cands[1::2]):
        assert a.conjugate() == b


@pytest.mark.parametrize("k", range(12))
def test_candidates_are_odps(fm, k):
    pt = singular_candidates(fm)[k]
    a = analyze_point(fm, pt)
    assert (a.jacobian_rank, a.kernel_dim, a.quadric_span, a.quadric_rank) == (3, 4, 1, 4)
    assert verify_odp(fm, pt)


def test_non_odps(fm):
    gen = generic_fiber_parametrization(fm, Fraction(-3, 2)).point(2, 5)
    assert analyze_point(fm, gen).is_smooth and not verify_odp(fm, gen)
    for i in range(1, 7):
        conic_pt = intersection_conic(fm, i).param.point(Fraction(1, 3), 1)
        assert analyze_point(fm, conic_pt).is_smooth
        comp_pt = fiber_components(fm, i)[0].point(2, 3)
        assert not verify_odp(fm, comp_pt)


def test_verify_odp_errors(fm):
    with pytest.raises(ValueError, match="not on the family"):
        verify_odp(fm, FamilyPoint(0, (1, 0, 0, 0, 0, 0, 0)))
    with pytest.raises(ValueError, match="chart undefined"):
        verify_odp(fm, FamilyPoint(1, (0,) * 7))


def test_infinity_chart_smooth(ci):
    gens = [g.specialize({"x0": 1}) for g in infinity_chart_generators(ci)]
    pt = {"m": 0, "x1": 1, "x2": -1, "x3": 1, "x4": -1, "x5": 1, "x6": 1}
    assert all(g.eval(pt).is_zero() for g in gens)
    assert rank(jacobian_at(gens, pt, ("m",) + tuple(f"x{k}" for k in range(1, 7)))) == 4


def test_infinity_chart_matches_rescaling(fm, ci):
    """g(1/m, m^2 x) m^4 equals the chart generator: compare at sample points."""
    rng = random.Random(5)
    inf = infinity_chart_generators(ci)
    for _ in range(5):
        m = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        xs = {f"x{k}": Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for k in range(7)}
        scaled = {"l": 1 / m, "x0": xs["x0"], **{f"x{k}": xs[f"x{k}"] / m**2 for k in range(1, 7)}}
        for g, h in zip(fm.generators, inf):
            assert g.eval(scaled) * m**4 == h.eval({"m": m, **xs})


# ---------------------------------------------------------------- real points


@pytest.mark.parametrize(
    "abcd, expected",
    [((4, 9, 1, 6), True), ((-180, -40, 72, 720), False), ((0, 1, 1, 0), True), ((-1, -1, 1, 1), False)],
)
def test_real_point_examples(abcd, expected):
    res = real_point_exists(*abcd)
    assert res.exists is expected
    if expected:
        assert res.witness is not None
        bind = {f"x{k}": v for k, v in enumerate(res.witness)}
        assert all(g.eval(bind).is_zero() for g in toric_surface_equations(*abcd))


def test_real_point_witness_example():
    assert [str(c) for c in real_point_exists(4, 9, 1, 6).witness] == ["1", "2", "2", "3", "3", "1", "1"]


def test_real_point_input_errors():
    with pytest.raises(ValueError):
        real_point_exists(1, 1, 1, 2)
    with pytest.raises(ValueError):
        real_point_exists(G(0, 1), 1, 1, 1)


PHASES = [G(1), G(-1), G(0, 1), G(0, -1)] + [
    G(Fraction(sx * a, 5), Fraction(sy * b, 5)) for a, b in ((3, 4), (4, 3)) for sx in (1, -1) for sy in (1, -1)
]
MODULI = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]


def brute_force_real_point(a, b, c, d) -> bool:
    """Search fixed points x = (x0, z1, conj z1, z3, conj z3, z5, conj z5) over a moduli-phase grid.

    Exhaustive over the grid; branches are pruned as soon as one of the three
    norm equations x1 x2 = a x0^2, x3 x4 = b x0^2, x5 x6 = c x0^2 fails.
    """
    eqs = toric_surface_equations(a, b, c, d)
    grid = [G(0)] + [p * r for r in MODULI[1:] for p in PHASES]
    for x0 in (G(0), G(1)):
        z1s = [z for z in grid if z * z.conj() == a * x0 * x0]
        z3s = [z for z in grid if z * z.conj() == b * x0 * x0]
        z5s = [z for z in grid if z * z.conj() == c * x0 * x0]
        for z1, z3, z5 in itertools.product(z1s, z3s, z5s):
            pt = (x0, z1, z1.conj(), z3, z3.conj(), z5, z5.conj())
            if not any(pt):
                continue
            bind = {f"x{k}": v for k, v in enumerate(pt)}
            if all(g.eval(bind).is_zero() for g in eqs):
                return True
    return False


def admissible_tuples(n: int, seed: int = 11):
    """(a, b, c, d) = (e1 r1^2, e3 r3^2, e5 r5^2, r1 r3 r5 w) with e1 e3 e5 = 1 and |w| = 1."""
    rng = random.Random(seed)
    signs = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    for _ in range(n):
        r1, r3, r5 = (rng.choice(MODULI) for _ in range(3))
        e1, e3, e5 = rng.choice(signs)
        w = rng.choice(PHASES)
        yield G(e1 * r1 * r1), G(e3 * r3 * r3), G(e5 * r5 * r5), w * (r1 * r3 * r5)


def test_real_point_criterion_against_brute_force():
    tuples = list(admissible_tuples(50))
    assert len(tuples) == 50
    for a, b, c, d in tuples:
        expected = a.re >= 0 and b.re >= 0 and c.re >= 0
        assert real_point_exists(a, b, c, d).exists is expected
        assert brute_force_real_point(a, b, c, d) is expected, (a, b, c, d)


@settings(max_examples=30)
@given(st.fractions(-50, 50, max_denominator=11))
def test_no_real_points_on_real_non_root_fibers(fm, lam):
    if lam in fm.lambdas:
        return
    v = fm.coefficients.at(lam)
    assert not real_point_exists(v["a"], v["b"], v["c"], v["d"]).exists


# ---------------------------------------------------------------- halves


def test_cycle_labels_are_antipodally_conjugate():
    curves = cycle_curves()
    assert [c.label for c in curves[:2]] == ["C1", "C2"]
    assert curves[0].coords == {1, 6} and curves[1].coords == {6}


def test_halves_golden(fm):
    assert halves_assignment(fm, 1) == json.loads((GOLDEN / "halves_fiber1.json").read_text())


def _is_arc(labels, cycle):
    idx = {cycle.index(l) for l in labels}
    n = len(cycle)
    return any(idx == {(start + j) % n for j in range(len(idx))} for start in range(n))


@pytest.mark.parametrize("i", range(1, 7))
def test_halves_structure(fm, i):
    h = halves_assignment(fm, i)
    cycle = [c.label for c in cycle_curves()]
    plus = [l for l in cycle if h[l] == "+"]
    minus = [l for l in cycle if h[l] == "-"]
    shared = [l for l in cycle if h[l] == "shared"]
    assert len(plus) == len(minus) == 5 and len(shared) == 2
    assert _is_arc(plus, cycle) and _is_arc(minus, cycle)
    for l in cycle:
        conj = l.replace("Cbar", "C") if l.startswith("Cbar") else "Cbar" + l[1:]
        flip = {"+": "-", "-": "+", "shared": "shared"}[h[l]]
        assert h[conj] == flip
    assert h["C6"] == "+" or (h["C6"] == "shared" and h["C5"] == "+")
