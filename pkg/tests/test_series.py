from fractions import Fraction as F

import pytest

from qbfs.dilation import dilate
from qbfs.quasinorm import linf, lorentz, lp
from qbfs.sampling import random_step_function
from qbfs.series import (
    DisjointGenerator,
    GeometricGenerator,
    ZeroTailGenerator,
    cauchy_subsequence,
    check_operator_conditions,
    fatou_checks,
    integral_functional,
    monotone_truncations,
    chained_triangle_check,
    pairing_functional,
    parse_generator,
    resonance_witness,
    riesz_fischer_sum,
    sliding_bump,
    spike,
)
from qbfs.stepfunction import StepFunction, integrate_abs, scale

from conftest import interval


def test_chained_triangle_two_unit_terms():
    X = lp(0.5)
    x0 = StepFunction.indicator(interval(0, 1))
    x1 = StepFunction.indicator(interval(1, 2))
    rep = chained_triangle_check([x0, x1], X)
    assert rep.rhs == [2.0, 6.0]
    assert rep.lhs[1] == pytest.approx(4.0) and rep.holds


def test_chained_triangle_single_term(f_two_level):
    rep = chained_triangle_check([f_two_level], lp(0.5))
    assert rep.holds and rep.rhs[0] == 2 * rep.lhs[0]


def test_chained_triangle_random(rng):
    for X in (lp(0.5), lorentz(2, 0.5), lp(2), linf()):
        for _ in range(10):
            xs = [random_step_function(rng, complex_prob=0.2) for _ in range(5)]
            rep = chained_triangle_check(xs, X)
            assert rep.holds and rep.min_slack >= 0


def test_chained_triangle_detects_small_constant():
    from dataclasses import replace

    X = replace(lp(0.5), modulus_of_concavity=1.0)
    xs = [StepFunction.indicator(interval(0, 1)), StepFunction.indicator(interval(1, 2))]
    rep = chained_triangle_check(xs, X)
    assert not rep.holds and rep.counterexample == 1


def test_geometric_certificate():
    X = lp(0.5)
    gen = GeometricGenerator(F(1, 4))
    assert gen.limit(0) == StepFunction.indicator(interval(0, 1), F(1, 3))
    cert = riesz_fischer_sum(gen, X, prefix=20)
    assert cert.ok
    for M, r in enumerate(cert.remainders):
        assert r == pytest.approx(4.0 ** (-M - 1) / 3, rel=1e-12)
        assert r <= cert.tails[M]


def test_geometric_divergent_tail():
    with pytest.raises(ValueError):
        riesz_fischer_sum(GeometricGenerator(F(1, 2)), lp(0.5), prefix=3)
    with pytest.raises(ValueError):
        GeometricGenerator(F(3, 2))


def test_disjoint_l1_remainder_exact():
    cert = riesz_fischer_sum(DisjointGenerator(), lp(1), prefix=20)
    assert cert.ok
    assert cert.remainders == [F(1, 2**M) for M in range(21)]


def test_disjoint_other_norm_has_no_closed_form():
    cert = riesz_fischer_sum(DisjointGenerator(), lp(2), prefix=8)
    assert cert.ok and all(r is None for r in cert.remainders)


def test_zero_tail_trivial(f_two_level):
    cert = riesz_fischer_sum(ZeroTailGenerator(f_two_level), lp(0.5), prefix=5)
    assert cert.ok and all(r == 0 for r in cert.remainders)
    assert cert.partial_sum_norms == [lp(0.5)(f_two_level)] * 6


def test_parse_generator():
    assert parse_generator("geometric:ratio=1/8").ratio == F(1, 8)
    assert isinstance(parse_generator("disjoint"), DisjointGenerator)
    with pytest.raises(ValueError):
        parse_generator("harmonic")


def test_fatou_monotone(rng):
    for X in (lp(0.5), lorentz(2, 0.5), linf()):
        f = random_step_function(rng, complex_prob=0.2)
        rep = fatou_checks(f, X)
        assert rep.monotone_ok
        assert rep.monotone_norms[-1] == pytest.approx(X(f))


def test_fatou_truncations_increase(f_two_level):
    fs = monotone_truncations(f_two_level, levels=range(-1, 4))
    assert fs[0] == StepFunction.indicator(interval(0, F(1, 2)), F(1, 2))
    assert fs[-1] == f_two_level


def test_fatou_constant_sequence(f_two_level):
    rep = fatou_checks(f_two_level, lp(0.5), sequence=[f_two_level] * 6)
    assert rep.liminf_ok and rep.strict is False


def test_fatou_sliding_bump_strict():
    rep = fatou_checks(StepFunction.zero(), lp(1), sequence=sliding_bump(12), limit=StepFunction.zero())
    assert rep.liminf_ok and rep.strict and rep.liminf == 1.0


def test_spike_normalisation():
    for n in range(6):
        g = spike(n, 2)
        assert lp(0.5)(g) == pytest.approx(1.0, rel=1e-12)
        assert integrate_abs(g) == (n + 1) * 4 ** (n + 1)


def test_resonance_integral():
    X = lp(0.5)
    w = resonance_witness(lambda n: spike(n, X.C), X, prefix=10)
    assert w.ok and w.dominates
    for k in range(11):
        assert w.phi_f >= w.values[k] >= k
    assert w.norm_prefix <= w.norm_bound


def test_resonance_rate_error():
    X = lp(0.5)
    with pytest.raises(ValueError, match="rate precondition"):
        resonance_witness(lambda n: spike(0, X.C), X, prefix=3)
    with pytest.raises(ValueError, match="rate precondition"):
        resonance_witness(lambda n: scale(spike(n, X.C), 2), X, prefix=3)


def test_resonance_pairing():
    X = lp(0.5)
    f0 = StepFunction.indicator(interval(0, 1), 2)
    w = resonance_witness(lambda n: spike(n, X.C), X, phi=pairing_functional(f0), prefix=8)
    assert w.ok
    assert w.phi_f == 2 * integral_functional(w.f)


def test_cauchy_subsequence():
    X = lp(0.5)
    gen = GeometricGenerator(F(1, 4))
    xs, s = [], StepFunction.zero()
    for n in range(16):
        s = s + gen.term(n)
        xs.append(s)
    sub = cauchy_subsequence(xs, X)
    assert sub.ok and sub.indices == sorted(sub.indices)
    for n, (k, y) in enumerate(zip(sub.indices, sub.y_norms)):
        if n:
            assert y <= (2 * X.C) ** (-n - 1) * (1 + 1e-12)


def test_cauchy_subsequence_refuses_divergent():
    xs = [StepFunction.indicator(interval(0, 1), k) for k in range(5)]
    with pytest.raises(ValueError):
        cauchy_subsequence(xs, lp(1))


def test_operator_conditions(rng):
    samples = [random_step_function(rng) for _ in range(10)]
    good = check_operator_conditions(lambda g: dilate(g, 2), samples)
    assert good.modulus_ok and good.domination_ok and good.checked == 10
    bad = check_operator_conditions(lambda g: scale(g, -1) + StepFunction.indicator(interval(0, 8)), samples)
    assert not (bad.modulus_ok and bad.domination_ok)
