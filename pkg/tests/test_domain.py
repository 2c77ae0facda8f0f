import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evolvesim.domain import (
    BoundedLinearRep,
    FiniteDistribution,
    Halfspace,
    all_bit_patterns,
    clip_p1,
    conjunction_halfspace,
    distribution_from_json,
    distribution_to_json,
    eval_halfspace,
    eval_rep,
    halfspace_from_json,
    halfspace_to_json,
    majority_halfspace,
    margin,
    rep_from_json,
    rep_to_json,
    scaled_cube_points,
    scaled_hypercube,
    scaled_hypercube_uniform,
    validate_point,
    zero_rep,
)
from evolvesim.exceptions import (
    DimensionMismatchError,
    InputDomainError,
    MarginViolationError,
)


class TestClip:
    def test_interior_identity(self):
        assert clip_p1(0.3) == 0.3
        assert clip_p1(-1.0) == -1.0
        assert clip_p1(1.0) == 1.0

    def test_clips_preserving_sign(self):
        assert clip_p1(3.7) == 1.0
        assert clip_p1(-42.0) == -1.0

    def test_rejects_non_finite(self):
        with pytest.raises(InputDomainError):
            clip_p1(float("nan"))
        with pytest.raises(InputDomainError):
            clip_p1(float("inf"))

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_always_in_range(self, v):
        assert -1.0 <= clip_p1(v) <= 1.0


class TestPoints:
    def test_unit_ball_accepted(self):
        validate_point([0.6, 0.8])

    def test_outside_ball_rejected(self):
        with pytest.raises(InputDomainError):
            validate_point([0.8, 0.8])

    def test_scaled_cube_values(self):
        pts = scaled_cube_points(np.array([[0, 1], [1, 1]]), 2)
        s = 1 / np.sqrt(2)
        assert np.allclose(pts, [[-s, s], [s, s]])

    def test_all_bit_patterns_lexicographic(self):
        pats = all_bit_patterns(2)
        assert pats.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_scaled_hypercube_count_and_norm(self):
        pts = scaled_hypercube(4)
        assert pts.shape == (16, 4)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


class TestFiniteDistribution:
    def test_basic(self):
        D = FiniteDistribution(np.array([[0.5], [-0.5]]), np.array([0.25, 0.75]))
        assert D.n == 1 and D.size == 2

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(InputDomainError):
            FiniteDistribution(np.array([[0.5], [-0.5]]), np.array([0.5, 0.4]))

    def test_duplicate_support_rejected(self):
        with pytest.raises(InputDomainError):
            FiniteDistribution(np.array([[0.5], [0.5]]), np.array([0.5, 0.5]))

    def test_point_outside_ball_rejected(self):
        with pytest.raises(InputDomainError):
            FiniteDistribution(np.array([[1.5]]), np.array([1.0]))

    def test_uniform_hypercube(self):
        D = scaled_hypercube_uniform(3)
        assert D.size == 8
        assert np.allclose(D.probs, 1 / 8)

    def test_density_ratio(self):
        pts = np.array([[0.5], [-0.5]])
        D1 = FiniteDistribution(pts, np.array([0.25, 0.75]))
        D2 = FiniteDistribution(pts, np.array([0.5, 0.5]))
        assert np.allclose(D1.density_ratio(D2), [0.5, 1.5])


class TestHalfspace:
    def test_normalization(self):
        f = Halfspace(np.array([3.0, 4.0]), 2.5)
        assert np.allclose(f.w, [0.6, 0.8])
        assert f.theta == pytest.approx(0.5)

    def test_zero_w_rejected(self):
        with pytest.raises(InputDomainError):
            Halfspace(np.zeros(2), 0.0)

    def test_constant_halfspace_rejected(self):
        # after normalization |theta| > 1: sign never changes on the ball
        with pytest.raises(InputDomainError):
            Halfspace(np.array([0.1, 0.0]), 0.5)

    def test_values_are_signs(self):
        f = Halfspace(np.array([1.0, 0.0]), 0.0)
        vals = f.values(np.array([[0.5, 0.1], [-0.5, 0.9]]))
        assert vals.tolist() == [1.0, -1.0]

    def test_exact_zero_rejected(self):
        f = Halfspace(np.array([1.0, 0.0]), 0.0)
        with pytest.raises(MarginViolationError):
            f.values(np.array([[0.0, 0.7]]))

    def test_eval_halfspace_single_point(self):
        f = majority_halfspace(3)
        x = np.full(3, 1 / np.sqrt(3))
        assert eval_halfspace(f, x) == 1.0


class TestMargin:
    def test_majority_margin_scaled_cube(self):
        # one disagreeing coordinate changes the sum by 2/sqrt(n)/sqrt(n) = 2/n;
        # the minimum |sum| over odd-n sign patterns is 1/n
        f = majority_halfspace(5)
        D = scaled_hypercube_uniform(5)
        assert margin(f, D) == pytest.approx(1 / 5)

    def test_conjunction_margin(self):
        f = conjunction_halfspace(6, 2)
        D = scaled_hypercube_uniform(6)
        assert margin(f, D) == pytest.approx(1 / np.sqrt(12))

    def test_zero_margin_raises(self):
        f = Halfspace(np.array([1.0, 0.0]), 0.0)
        D = FiniteDistribution(np.array([[0.0, 0.5]]), np.array([1.0]))
        with pytest.raises(MarginViolationError):
            margin(f, D)


class TestBoundedLinearRep:
    def test_zero_rep(self):
        r = zero_rep(3)
        assert r.coeffs.tolist() == [0.0, 0.0, 0.0, 0.0]
        assert r.n == 3

    def test_eval_clips(self):
        r = BoundedLinearRep(np.array([0.9, 1.0]))
        assert eval_rep(r, np.array([0.5])) == pytest.approx(1.0)
        assert eval_rep(r, np.array([-0.5])) == pytest.approx(0.4)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            eval_rep(zero_rep(3), np.array([0.1, 0.2]))

    def test_key_is_structural(self):
        a = BoundedLinearRep(np.array([0.1, 0.2]))
        b = BoundedLinearRep(np.array([0.1, 0.2]))
        assert a.key() == b.key()

    def test_immutable(self):
        r = zero_rep(2)
        with pytest.raises(ValueError):
            r.coeffs[0] = 1.0


class TestJsonRoundTrip:
    def test_distribution(self):
        D = scaled_hypercube_uniform(3)
        D2 = distribution_from_json(distribution_to_json(D))
        assert np.array_equal(D.points, D2.points)
        assert np.array_equal(D.probs, D2.probs)

    def test_halfspace(self):
        f = Halfspace(np.array([3.0, 4.0]), 1.0)
        f2 = halfspace_from_json(halfspace_to_json(f))
        assert np.array_equal(f.w, f2.w) and f.theta == f2.theta

    def test_rep(self):
        r = BoundedLinearRep(np.array([0.1, -0.7, 1 / 3]))
        r2 = rep_from_json(rep_to_json(r))
        assert np.array_equal(r.coeffs, r2.coeffs)

    @given(st.lists(st.floats(-1, 1, allow_nan=False, width=64), min_size=2, max_size=6))
    @settings(max_examples=50)
    def test_rep_round_trip_exact(self, coeffs):
        r = BoundedLinearRep(np.array(coeffs))
        assert np.array_equal(rep_from_json(rep_to_json(r)).coeffs, r.coeffs)
