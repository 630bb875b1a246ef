import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randzeros.errors import ValidationError
from randzeros.piecewise import TAIL_INFINITE, PiecewiseFn


def test_rejects_bad_grids():
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([]), np.array([]))
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([1.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([0.0, 1.0]), np.array([1.0, math.inf]))
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([0.0, 1.0]), np.array([1.0, 2.0]), tail="bogus")
    with pytest.raises(ValidationError):
        PiecewiseFn(np.array([0.0, 1.0]), np.array([1.0, 2.0]), tail=math.nan)


def test_interpolation_and_tails():
    fn = PiecewiseFn(np.array([0.0, 1.0, 3.0]), np.array([0.0, 2.0, 0.0]))
    assert fn(0.5) == 1.0
    assert fn(2.0) == 1.0
    np.testing.assert_allclose(fn(np.array([0.0, 1.0, 3.0])),
                               [0.0, 2.0, 0.0])
    # infinite tail: +inf strictly beyond the last node
    assert fn(3.0) == 0.0
    assert fn(4.0) == math.inf
    assert fn.domain_end == 3.0
    assert fn.tail_slope == math.inf
    # below the first node the first segment extrapolates
    assert fn(-1.0) == -2.0


def test_linear_tail():
    fn = PiecewiseFn(np.array([0.0, 1.0]), np.array([0.0, 1.0]), tail=3.0)
    assert fn(2.0) == 4.0
    assert fn.domain_end == math.inf
    assert fn.tail_slope == 3.0


def test_single_node():
    fn = PiecewiseFn(np.array([1.0]), np.array([5.0]), tail=0.0)
    assert fn(1.0) == 5.0
    assert fn(0.0) == 5.0
    assert fn(9.0) == 5.0


def test_left_slopes():
    fn = PiecewiseFn(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 3.0]))
    np.testing.assert_allclose(fn.left_slopes(), [1.0, 1.0, 2.0])


def test_json_fixed_form():
    fn = PiecewiseFn(np.array([0.0, 2.0]), np.array([1.0, -1.0]))
    d = fn.to_json_dict()
    assert d == {"grid": [[0.0, 1.0], [2.0, -1.0]], "T0": 2.0,
                 "tail": "infinite"}
    fn2 = PiecewiseFn.from_json_dict(d)
    np.testing.assert_array_equal(fn2.x, fn.x)
    np.testing.assert_array_equal(fn2.v, fn.v)


def test_json_declared_t0_must_agree():
    with pytest.raises(ValidationError):
        PiecewiseFn.from_json_dict({"grid": [[0.0, 1.0], [2.0, 1.0]],
                                    "T0": 5.0, "tail": "infinite"})
    with pytest.raises(ValidationError):
        PiecewiseFn.from_json_dict({"grid": [[0.0, 1.0]], "tail": {"bad": 1}})
    with pytest.raises(ValidationError):
        PiecewiseFn.from_json("not json")


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
                min_size=1, max_size=12, unique_by=lambda p: round(p[0], 6)),
       st.one_of(st.none(), st.floats(-10, 10)))
def test_json_round_trip(pairs, slope):
    pairs = sorted(pairs)
    x = np.array([p[0] for p in pairs])
    v = np.array([p[1] for p in pairs])
    fn = PiecewiseFn(x, v, TAIL_INFINITE if slope is None else slope)
    back = PiecewiseFn.from_json(fn.to_json())
    np.testing.assert_array_equal(back.x, fn.x)
    np.testing.assert_array_equal(back.v, fn.v)
    assert back.tail == fn.tail
    q = np.linspace(x[0] - 1, x[-1] + 1, 31)
    np.testing.assert_array_equal(back(q), fn(q))
