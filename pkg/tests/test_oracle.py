import numpy as np
import pytest

from squarepeg import Curve, build_n_square, build_smooth_two_square, enumerate_squares, unit_circle_spec
from squarepeg.acceptance import match_square_sets
from squarepeg.constructions import default_anchors
from squarepeg.oracle import oracle_enumerate, oracle_residual


def test_circle_diameters_complete_to_squares(rng):
    curve = Curve(unit_circle_spec())
    t1 = rng.random(64)
    r = oracle_residual(curve, t1, t1 + 0.5)
    assert np.max(np.abs(r)) < 1e-12


def test_non_square_diagonal_has_residual():
    curve = Curve(unit_circle_spec())
    assert np.min(np.abs(oracle_residual(curve, [0.0], [0.3]))) > 1e-3


def test_resolution_floor():
    with pytest.raises(ValueError):
        oracle_enumerate(Curve(unit_circle_spec()), resolution=128)


@pytest.mark.parametrize(
    "spec",
    [build_n_square(anchors=default_anchors(3)), build_smooth_two_square(1.18264), build_smooth_two_square(1.17)],
    ids=["nsquare-3", "smooth2-1.18264", "smooth2-1.17"],
)
def test_agrees_with_enumerator(spec):
    curve = Curve(spec)
    found = oracle_enumerate(curve)
    same, dist = match_square_sets(enumerate_squares(curve).squares, found)
    assert same and dist < 1e-6


def test_oracle_squares_pass_the_same_filters(curves):
    for sq in oracle_enumerate(curves["nonsmooth2"]):
        assert sq.side_length >= 1e-2
        assert np.allclose(curves["nonsmooth2"].eval(np.array(sq.params)), sq.vertices, atol=1e-9)
