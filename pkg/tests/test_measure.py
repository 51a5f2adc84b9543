from fractions import Fraction as F

import pytest

from qbfs.measure import (
    Box,
    DyadicComplex,
    DyadicCube,
    MeasureSpaceDescriptor,
    difference_measure,
    intersection_measure,
    measure,
)
from qbfs.rational import QComplex, decode_scalar, encode_scalar, modulus, to_scalar
from qbfs.stepfunction import (
    StepFunction,
    absolute,
    integrate,
    integrate_abs,
    pointwise_combine,
    refine,
    restrict,
    scale,
)

from conftest import interval


def test_cube_measure_and_box():
    q = DyadicCube(1, (0,))
    assert q.measure == F(1, 2)
    assert q.box == interval(0, F(1, 2))
    assert measure([q]) == F(1, 2)


def test_disjoint_intervals_measure():
    assert measure([interval(0, 1), interval(1, 3)]) == 3


def test_overlapping_regions_counted_once():
    assert measure([interval(0, 2), interval(1, 3)]) == 3


def test_complex_measure_counts_cubes():
    cubes = [DyadicCube(2, (i, j)) for i, j in [(0, 0), (0, 1), (1, 0), (3, 3), (2, 1)]]
    cx = DyadicComplex(2, frozenset(cubes))
    assert cx.measure == F(5, 16)
    assert measure([cx]) == F(5, 16)


def test_complex_rejects_mixed_orders():
    with pytest.raises(ValueError):
        DyadicComplex(2, frozenset([DyadicCube(2, (0,)), DyadicCube(3, (0,))]))


def test_same_order_cubes_disjoint():
    a, b = DyadicCube(3, (1, 2)), DyadicCube(3, (1, 3))
    assert intersection_measure([a], [b]) == 0
    assert intersection_measure([a], [a]) == a.measure


def test_children_partition_parent():
    q = DyadicCube(0, (1, -1))
    kids = q.children()
    assert len(kids) == 4 and measure(kids) == q.measure
    assert difference_measure([q], kids) == 0


def test_malformed_region_rejected():
    with pytest.raises(ValueError):
        measure([Box((F(1),), (F(0),))])


def test_atomic_descriptor():
    d = MeasureSpaceDescriptor.atomic([1, F(1, 2), 2])
    assert [b.measure for b in d.atom_boxes()] == [1, F(1, 2), 2]
    assert d.total_measure == F(7, 2)
    with pytest.raises(ValueError):
        MeasureSpaceDescriptor.atomic([1, 0])


def test_add_zero_identity(f_two_level):
    assert f_two_level + StepFunction.zero() == f_two_level


def test_multiply_by_indicator(f_two_level):
    g = StepFunction.indicator(interval(0, 2))
    three = StepFunction.indicator(interval(0, 1), 3)
    assert pointwise_combine(three, g, "multiply") == three


def test_overlapping_sum():
    s = StepFunction.indicator(interval(0, 2)) + StepFunction.indicator(interval(1, 3))
    assert s(F(1, 2)) == 1 and s(F(3, 2)) == 2 and s(F(5, 2)) == 1 and s(4) == 0
    assert integrate(s) == 4


def test_dimension_mismatch():
    g = StepFunction.indicator(Box((0, 0), (1, 1)))
    with pytest.raises(ValueError):
        pointwise_combine(StepFunction.indicator(interval(0, 1)), g, "add")


def test_scale_abs_restrict(f_two_level):
    assert scale(f_two_level, 0).is_zero
    assert absolute(StepFunction.indicator(interval(0, 1), QComplex.make(-2, 0))) == StepFunction.indicator(interval(0, 1), 2)
    assert restrict(f_two_level, [interval(2, 4)]) == StepFunction.indicator(interval(2, 3), 1)


def test_integrals(f_two_level):
    assert integrate(StepFunction.indicator(interval(0, 1))) == 1
    assert integrate(f_two_level) == 5
    f = StepFunction.indicator(interval(0, 2), 2)
    g = StepFunction.indicator(interval(1, 3))
    assert integrate_abs(pointwise_combine(f, g, "multiply")) == 2


def test_complex_values_and_modulus():
    z = to_scalar(complex(3, 4))
    assert modulus(z) == 5
    f = StepFunction.indicator(interval(0, 2), z)
    assert integrate_abs(f) == 10
    assert integrate(f) == QComplex.make(6, 8)


def test_refine_is_noop_on_the_function(f_two_level):
    fine = refine(f_two_level, 3)
    assert len(fine.pieces) > len(f_two_level.pieces)
    assert fine == f_two_level
    assert integrate(fine) == integrate(f_two_level)


def test_overlapping_pieces_rejected():
    with pytest.raises(ValueError):
        StepFunction([(interval(0, 2), 1), (interval(1, 3), 1)])


def test_json_round_trip():
    f = StepFunction(
        [(DyadicCube(2, (1,)).box, F(1, 3)), (interval(F(1, 2), F(7, 3)), to_scalar(complex(1, -2)))]
    )
    text = f.to_json()
    assert '"k": 2' in text and '"num"' in text
    assert StepFunction.from_json(text) == f
    assert decode_scalar(encode_scalar(F(-7, 9))) == F(-7, 9)


def test_lattice_integral_monotone(f_two_level):
    g = f_two_level + StepFunction.indicator(interval(0, 5), 1)
    assert integrate_abs(f_two_level) <= integrate_abs(g)
