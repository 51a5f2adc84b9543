"""Randomised invariants driven by hypothesis."""

from fractions import Fraction as F

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qbfs.approximation import dyadic_cover
from qbfs.dilation import dilate, lacunary_restrict, split_rearrangement_check
from qbfs.measure import Box, difference_measure
from qbfs.quasinorm import linf, lorentz, lp
from qbfs.rearrangement import RearrangementProfile, distribution_function, nonincreasing_rearrangement, radial_rearrangement
from qbfs.series import chained_triangle_check
from qbfs.stepfunction import StepFunction, absolute, pointwise_combine, restrict, scale

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
NORMS = [lp(0.25), lp(0.5), lp(1), lp(2), lorentz(2, 0.5), lorentz(0.5, 2), linf()]

rationals = st.fractions(min_value=-8, max_value=8, max_denominator=12)


@st.composite
def step_functions(draw, max_pieces=5):
    cuts = draw(st.lists(st.integers(0, 64), min_size=2, max_size=max_pieces + 1, unique=True))
    cuts.sort()
    vals = draw(st.lists(rationals, min_size=len(cuts) - 1, max_size=len(cuts) - 1))
    return StepFunction.from_intervals([(F(a, 8), F(b, 8), v) for a, b, v in zip(cuts, cuts[1:], vals)])


@st.composite
def profiles(draw):
    cuts = sorted(draw(st.lists(st.integers(1, 128), min_size=1, max_size=8, unique=True)))
    vals = sorted(draw(st.lists(st.integers(1, 500), min_size=len(cuts), max_size=len(cuts), unique=True)), reverse=True)
    den = draw(st.sampled_from([1, 3, 16]))
    return RearrangementProfile((0,) + tuple(F(c, 16) for c in cuts), tuple(F(v, den) for v in vals))


@SETTINGS
@given(step_functions())
def test_rearrangement_is_equimeasurable(f):
    prof = nonincreasing_rearrangement(f)
    mu = distribution_function(f)
    levels = {abs(v) for v in f.values} | {F(0)}
    for s in levels | {s / 2 for s in levels}:
        assert prof.distribution(s) == mu(s)
    assert all(a > b for a, b in zip(prof.values, prof.values[1:]))


@SETTINGS
@given(step_functions())
def test_radial_rearrangement_has_same_profile(f):
    r = radial_rearrangement(f)
    assert nonincreasing_rearrangement(r.to_step_function()) == nonincreasing_rearrangement(f)


@SETTINGS
@given(step_functions(), rationals, st.sampled_from(NORMS))
def test_homogeneity(f, a, X):
    assert abs(X(scale(f, a)) - abs(float(a)) * X(f)) <= 1e-12 * max(1.0, X(f) * abs(float(a)))


@SETTINGS
@given(step_functions(), step_functions(), st.sampled_from(NORMS))
def test_lattice_property(f, g, X):
    big = pointwise_combine(absolute(f), absolute(g), "max")
    assert X(f) <= X(big) * (1 + 1e-12)


@SETTINGS
@given(step_functions(), step_functions(), st.sampled_from(NORMS))
def test_quasi_triangle(f, g, X):
    assert X(f + g) <= X.C * (X(f) + X(g)) * (1 + 1e-12)


@SETTINGS
@given(profiles())
def test_split_inequality(g):
    rep = split_rearrangement_check(g, [F(j, 64) for j in range(1, 40)])
    assert rep.holds and rep.worst_margin >= 0


@SETTINGS
@given(profiles())
def test_lacunary_pieces_reconstruct(g):
    r1, r2 = lacunary_restrict(g, 1), lacunary_restrict(g, 2)
    total = pointwise_combine(r1.function, r2.function, "add")
    assert total == restrict(g.to_step_function(), [Box.interval(r1.cutoff, g.support_measure)])
    assert r1.rearrangement().support_measure + r2.rearrangement().support_measure == g.support_measure


@SETTINGS
@given(step_functions(), st.fractions(min_value=F(1, 8), max_value=8, max_denominator=8), st.sampled_from(NORMS))
def test_dilation_profile_and_monotonicity(f, a, X):
    assert nonincreasing_rearrangement(dilate(f, a)) == nonincreasing_rearrangement(f).dilate(a)
    b = a * F(3, 2)
    assert X(dilate(f, b)) <= X(dilate(f, a)) * (1 + 1e-9)


@st.composite
def cover_instances(draw):
    K, G = [], []
    for _ in range(draw(st.integers(1, 3))):
        lo = draw(st.integers(0, 28))
        hi = lo + draw(st.integers(1, 3))
        b = Box.interval(F(lo, 8), F(hi, 8))
        K.append(b)
        G.append(b.expanded(F(1, 2 ** draw(st.integers(4, 6)))))
    return K, G, F(1, 2 ** draw(st.integers(2, 7))), draw(st.integers(0, 3))


@SETTINGS
@given(cover_instances())
def test_cover_properties(inst):
    K, G, eps, k0 = inst
    res = dyadic_cover(K, G, eps, k0)
    boxes = res.boxes()
    assert res.k >= k0
    assert difference_measure(boxes, G) == 0
    assert difference_measure(K, boxes) == 0
    assert difference_measure(boxes, K) < eps


@SETTINGS
@given(st.lists(step_functions(max_pieces=3), min_size=1, max_size=6), st.sampled_from(NORMS))
def test_chained_quasi_triangle(xs, X):
    assert chained_triangle_check(xs, X).holds
