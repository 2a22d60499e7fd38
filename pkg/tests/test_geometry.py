"""Configuration error function, gradients, dynamics matrices, bound ledger."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoatt.exceptions import ConstraintViolated, DomainInvalid
from geoatt.geometry import (
    AttractiveWeights,
    BarrierShape,
    ConstraintCone,
    attractive_A,
    barrier_B,
    bound_ledger,
    default_domain_caps,
    err_vec_eR,
    err_vec_eRA,
    err_vec_eRB,
    estimate_quadratic_bounds,
    hessian_psi_at_goal,
    matrix_E,
    matrix_F,
    psi,
    require_feasible,
)
from geoatt.so3 import exp_so3
from geoatt.verify import tight_b1, tight_eRB_bound

from geoatt.verify import random_rotation

G = AttractiveWeights(0.9, 1.1, 1.0)
SHAPE = BarrierShape(15.0)
CONE = ConstraintCone(v=np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0), theta=np.radians(40.0))
R_SENSOR = np.array([1.0, 0.0, 0.0])
E1 = np.array([1.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def feasible_rotation(rng, r=R_SENSOR, cones=(CONE,)):
    while True:
        R = random_rotation(rng)
        try:
            require_feasible(R, r, cones)
            return R
        except ConstraintViolated:
            continue


class TestTypes:
    def test_weights_reject_nonpositive(self):
        with pytest.raises(DomainInvalid):
            AttractiveWeights(0.0, 1.0, 2.0)

    def test_weights_reject_ties(self):
        with pytest.raises(DomainInvalid):
            AttractiveWeights(1.0, 1.0, 2.0)
        with pytest.raises(DomainInvalid):
            AttractiveWeights(1.0, 1.0 + 1e-10, 2.0)

    def test_weights_accept_small_but_distinct(self):
        AttractiveWeights(1.0, 1.0 + 1e-8, 2.0)

    def test_cone_normalizes_axis(self):
        cone = ConstraintCone(v=np.array([2.0, 0.0, 0.0]), theta=0.5)
        np.testing.assert_allclose(cone.v, [1.0, 0.0, 0.0])

    def test_cone_rejects_zero_axis(self):
        with pytest.raises(DomainInvalid):
            ConstraintCone(v=np.zeros(3), theta=0.5)

    def test_cone_rejects_bad_angle(self):
        for theta in (0.0, -0.1, np.pi / 2 + 0.01):
            with pytest.raises(DomainInvalid):
                ConstraintCone(v=E1, theta=theta)

    def test_barrier_shape_positive(self):
        with pytest.raises(DomainInvalid):
            BarrierShape(0.0)


class TestAttractive:
    def test_zero_at_goal(self):
        rng = np.random.default_rng(0)
        R = random_rotation(rng)
        assert attractive_A(R, R, G) == pytest.approx(0.0, abs=1e-15)

    def test_half_turn(self):
        # I - R_z(pi) = diag(2, 2, 0); tr[G diag] = 4; half = 2
        assert attractive_A(exp_so3(np.pi * E3), np.eye(3), G) == pytest.approx(2.0)

    def test_quarter_turn(self):
        assert attractive_A(exp_so3(np.pi / 2 * E3), np.eye(3), G) == pytest.approx(1.0)

    def test_nonnegative(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            assert attractive_A(random_rotation(rng), random_rotation(rng), G) >= 0.0


class TestBarrier:
    def test_value_at_orthogonal(self):
        # r'R'v = 0, theta = 40 deg, alpha = 15
        R = exp_so3(np.radians(135.0) * E3)  # rotates sensor 135 deg from v
        s = R_SENSOR @ (R.T @ CONE.v)
        assert abs(s) < 1e-12
        assert barrier_B(R, R_SENSOR, CONE, SHAPE) == pytest.approx(1.05568, abs=1e-4)

    def test_antipodal_is_one(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        R = exp_so3(np.pi * E3)  # R'v = -e1 = -r
        assert barrier_B(R, R_SENSOR, cone, SHAPE) == pytest.approx(1.0, abs=1e-12)

    def test_diverges_at_boundary(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        values = [
            barrier_B(exp_so3((cone.theta + gap) * E3), R_SENSOR, cone, SHAPE)
            for gap in (1e-2, 1e-5, 1e-8)
        ]
        assert values[0] < values[1] < values[2]
        # logarithmic growth: each 1000x smaller gap adds ln(1000)/alpha
        assert values[2] - values[0] > 2.0 * np.log(1000.0) / SHAPE.alpha * 0.9

    def test_violation_raises_with_index(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        with pytest.raises(ConstraintViolated) as exc_info:
            barrier_B(np.eye(3), R_SENSOR, cone, SHAPE)
        assert exc_info.value.cone_index == 0

    def test_monotone_in_cosine(self):
        # sweep the sensor away from the axis: B strictly decreases
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        angles = np.linspace(cone.theta + 1e-6, np.pi, 300)
        values = [
            barrier_B(exp_so3(a * E3), R_SENSOR, cone, SHAPE) for a in angles
        ]
        assert all(b_next < b for b, b_next in zip(values, values[1:]))
        assert all(b > 1.0 for b in values[:-1])


class TestPsi:
    def test_zero_at_goal(self):
        rng = np.random.default_rng(2)
        R = feasible_rotation(rng)
        assert psi(R, R, R_SENSOR, [CONE], G, SHAPE) == pytest.approx(0.0, abs=1e-15)

    def test_single_cone_is_product(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            R = feasible_rotation(rng)
            Rd = feasible_rotation(rng)
            expected = attractive_A(R, Rd, G) * barrier_B(R, R_SENSOR, CONE, SHAPE)
            assert psi(R, Rd, R_SENSOR, [CONE], G, SHAPE) == pytest.approx(expected)

    def test_duplicate_cone_dominates_single(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            R = feasible_rotation(rng)
            Rd = feasible_rotation(rng)
            one = psi(R, Rd, R_SENSOR, [CONE], G, SHAPE)
            two = psi(R, Rd, R_SENSOR, [CONE, CONE], G, SHAPE)
            assert two >= one - 1e-12

    def test_positive_definite(self):
        rng = np.random.default_rng(5)
        Rd = np.eye(3)
        count = 0
        while count < 10_000:
            R = random_rotation(rng)
            try:
                value = psi(R, Rd, R_SENSOR, [CONE], G, SHAPE)
            except ConstraintViolated:
                continue
            count += 1
            if np.linalg.norm(R - Rd) > 1e-9:
                assert value > 0.0


class TestErrorVectors:
    def test_eRA_zero_at_goal(self):
        rng = np.random.default_rng(6)
        R = random_rotation(rng)
        np.testing.assert_allclose(err_vec_eRA(R, R, G), np.zeros(3), atol=1e-15)

    def test_eRA_quarter_turn(self):
        got = err_vec_eRA(exp_so3(np.pi / 2 * E3), np.eye(3), G)
        np.testing.assert_allclose(got, [0.0, 0.0, 1.0], atol=1e-14)

    def test_eRA_finite_difference(self):
        rng = np.random.default_rng(7)
        eps = 1e-6
        for _ in range(100):
            R, Rd = random_rotation(rng), random_rotation(rng)
            eta = rng.normal(size=3)
            eta /= np.linalg.norm(eta)
            fd = (
                attractive_A(R @ exp_so3(eps * eta), Rd, G)
                - attractive_A(R @ exp_so3(-eps * eta), Rd, G)
            ) / (2 * eps)
            assert fd == pytest.approx(eta @ err_vec_eRA(R, Rd, G), abs=1e-8)

    def test_eRB_basis_case(self):
        cone = ConstraintCone(v=np.array([0.0, 1.0, 0.0]), theta=np.radians(60.0))
        got = err_vec_eRB(np.eye(3), R_SENSOR, cone, BarrierShape(2.0))
        np.testing.assert_allclose(got, [0.0, 0.0, 1.0], atol=1e-14)

    def test_eRB_antiparallel_is_zero(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        R = exp_so3(np.pi * E3)  # R'v antiparallel to r
        np.testing.assert_allclose(
            err_vec_eRB(R, R_SENSOR, cone, SHAPE), np.zeros(3), atol=1e-12
        )

    def test_eRB_finite_difference(self):
        rng = np.random.default_rng(8)
        eps = 1e-6
        for _ in range(100):
            R = feasible_rotation(rng)
            eta = rng.normal(size=3)
            eta /= np.linalg.norm(eta)
            fd = (
                barrier_B(R @ exp_so3(eps * eta), R_SENSOR, CONE, SHAPE)
                - barrier_B(R @ exp_so3(-eps * eta), R_SENSOR, CONE, SHAPE)
            ) / (2 * eps)
            grad = eta @ err_vec_eRB(R, R_SENSOR, CONE, SHAPE)
            assert fd == pytest.approx(grad, rel=1e-5, abs=1e-8)

    def test_eR_zero_at_goal(self):
        rng = np.random.default_rng(9)
        R = feasible_rotation(rng)
        np.testing.assert_allclose(
            err_vec_eR(R, R, R_SENSOR, [CONE], G, SHAPE), np.zeros(3), atol=1e-15
        )

    def test_eR_single_cone_composition(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            R = feasible_rotation(rng)
            Rd = feasible_rotation(rng)
            b = barrier_B(R, R_SENSOR, CONE, SHAPE)
            a = attractive_A(R, Rd, G)
            expected = err_vec_eRA(R, Rd, G) * b + a * err_vec_eRB(
                R, R_SENSOR, CONE, SHAPE
            )
            np.testing.assert_allclose(
                err_vec_eR(R, Rd, R_SENSOR, [CONE], G, SHAPE), expected, atol=1e-12
            )

    def test_eR_gradient_consistency_absolute(self):
        # forward difference within 50 eps, for both probe sizes
        rng = np.random.default_rng(11)
        Rd = np.eye(3)
        for eps in (1e-5, 1e-6):
            for _ in range(100):
                R = feasible_rotation(rng)
                if R_SENSOR @ (R.T @ CONE.v) > CONE.cos_theta - 1e-3:
                    continue  # stay off the barrier where curvature explodes
                eta = rng.normal(size=3)
                eta /= np.linalg.norm(eta)
                fd = (
                    psi(R @ exp_so3(eps * eta), Rd, R_SENSOR, [CONE], G, SHAPE)
                    - psi(R, Rd, R_SENSOR, [CONE], G, SHAPE)
                ) / eps
                grad = eta @ err_vec_eR(R, Rd, R_SENSOR, [CONE], G, SHAPE)
                assert abs(fd - grad) <= 50 * eps


class TestDynamicsMatrices:
    def test_E_at_goal(self):
        got = matrix_E(np.eye(3), np.eye(3), G)
        np.testing.assert_allclose(got, np.diag([1.05, 0.95, 1.0]), atol=1e-14)

    def test_E_directional_rate(self):
        rng = np.random.default_rng(12)
        eps = 1e-6
        for _ in range(100):
            R, Rd = random_rotation(rng), random_rotation(rng)
            omega = rng.normal(size=3)
            fd = (
                err_vec_eRA(R @ exp_so3(eps * omega), Rd, G)
                - err_vec_eRA(R @ exp_so3(-eps * omega), Rd, G)
            ) / (2 * eps)
            np.testing.assert_allclose(fd, matrix_E(R, Rd, G) @ omega, atol=1e-7)

    def test_E_norm_bound(self):
        rng = np.random.default_rng(13)
        cap = G.trace / np.sqrt(2.0)
        for _ in range(10_000):
            R, Rd = random_rotation(rng), random_rotation(rng)
            assert np.linalg.norm(matrix_E(R, Rd, G), 2) <= cap + 1e-12

    def test_F_directional_rate(self):
        rng = np.random.default_rng(14)
        eps = 1e-6
        for _ in range(100):
            R = feasible_rotation(rng)
            omega = rng.normal(size=3)
            fd = (
                err_vec_eRB(R @ exp_so3(eps * omega), R_SENSOR, CONE, SHAPE)
                - err_vec_eRB(R @ exp_so3(-eps * omega), R_SENSOR, CONE, SHAPE)
            ) / (2 * eps)
            np.testing.assert_allclose(
                fd, matrix_F(R, R_SENSOR, CONE, SHAPE) @ omega, rtol=1e-4, atol=1e-7
            )

    def test_F_small_on_far_side(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        far = np.linalg.norm(
            matrix_F(exp_so3(np.pi * E3), R_SENSOR, cone, SHAPE), 2
        )
        near = np.linalg.norm(
            matrix_F(exp_so3((cone.theta + 1e-3) * E3), R_SENSOR, cone, SHAPE), 2
        )
        assert np.isfinite(far)
        assert far < near / 100.0


class TestBoundLedger:
    def test_h_constants_and_b1(self):
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=0.5)
        assert led.h1 == pytest.approx(1.9)
        assert led.h2 == pytest.approx(0.01)
        assert led.h3 == pytest.approx(3.61)
        assert led.h4 == led.h1 and led.h5 == led.h3
        assert led.b1 == pytest.approx(1.9 / 3.62, abs=1e-6)
        assert led.b1 == pytest.approx(0.52486, abs=1e-5)

    def test_eRB_bound_value(self):
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=0.5)
        assert led.eRB_bound == pytest.approx(0.16107, abs=1e-4)

    def test_b2_formula(self):
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=0.5)
        assert led.b2 == pytest.approx(1.9 * 1.9 / (3.61 * (1.9 - 1.71)))

    def test_H_composition(self):
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=0.5)
        expected = (
            led.cB * led.normE_bound
            + 2.0 * led.eRA_bound * led.eRB_bound
            + led.cA * led.normF_bound
        )
        assert led.H == pytest.approx(expected)

    def test_rejects_empty_domain(self):
        # theta = 90 deg leaves no room for 0 < beta < cos(theta) = 0
        cone = ConstraintCone(v=E1, theta=np.pi / 2)
        with pytest.raises(DomainInvalid):
            bound_ledger(G, cone, BarrierShape(1.0), psi_cap=1.0, beta_cap=0.0)

    def test_rejects_psi_cap_out_of_range(self):
        with pytest.raises(DomainInvalid):
            bound_ledger(G, CONE, SHAPE, psi_cap=1.9, beta_cap=0.5)
        with pytest.raises(DomainInvalid):
            bound_ledger(G, CONE, SHAPE, psi_cap=1.0, beta_cap=CONE.cos_theta)

    def test_default_caps(self):
        psi_cap, beta_cap = default_domain_caps(G, [CONE])
        assert psi_cap == pytest.approx(0.9 * 1.9)
        assert beta_cap == pytest.approx(0.9 * CONE.cos_theta)

    def test_reference_eRA_constant_is_loose_near_identity(self):
        # the ledger's b1 (min-based sums) exceeds the true infimum of
        # A/|e_RA|^2, which is 1/max(g_i + g_j) approached at the identity;
        # the tight max-based constant is what sampling can verify
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=0.5)
        R = exp_so3(0.01 * E1)
        a = attractive_A(R, np.eye(3), G)
        n2 = float(err_vec_eRA(R, np.eye(3), G) @ err_vec_eRA(R, np.eye(3), G))
        assert n2 > a / led.b1  # reference constant fails here
        assert n2 <= a / tight_b1(G) + 1e-12

    def test_tight_eRA_bound_sampled(self):
        rng = np.random.default_rng(15)
        b1 = tight_b1(G)
        for _ in range(20_000):
            R, Rd = random_rotation(rng), random_rotation(rng)
            a = attractive_A(R, Rd, G)
            era = err_vec_eRA(R, Rd, G)
            assert float(era @ era) <= a / b1 + 1e-12

    def test_reference_eRB_constant_is_loose_at_domain_edge(self):
        # at r'R'v = beta the numerator is sin(acos(beta)) > sin(theta)
        beta = 0.5
        led = bound_ledger(G, CONE, SHAPE, psi_cap=1.71, beta_cap=beta)
        R = exp_so3((np.radians(45.0) + np.arccos(beta)) * E3)
        s = R_SENSOR @ (R.T @ CONE.v)
        assert s == pytest.approx(beta, abs=1e-12)
        erb = np.linalg.norm(err_vec_eRB(R, R_SENSOR, CONE, SHAPE))
        assert erb > led.eRB_bound
        assert erb <= tight_eRB_bound(CONE, SHAPE, beta) + 1e-12

    def test_tight_eRB_bound_sampled(self):
        rng = np.random.default_rng(16)
        beta = 0.5
        cap = tight_eRB_bound(CONE, SHAPE, beta)
        checked = 0
        while checked < 10_000:
            R = random_rotation(rng)
            if R_SENSOR @ (R.T @ CONE.v) > beta:
                continue
            erb = np.linalg.norm(err_vec_eRB(R, R_SENSOR, CONE, SHAPE))
            assert erb <= cap + 1e-12
            checked += 1


class TestHessian:
    def test_closed_form(self):
        b = barrier_B(np.eye(3), R_SENSOR, CONE, SHAPE)
        got = hessian_psi_at_goal(np.eye(3), R_SENSOR, [CONE], G, SHAPE)
        expected = 0.5 * b * np.diag([3.0 - 0.9, 3.0 - 1.1, 3.0 - 1.0])
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_positive_definite(self):
        got = hessian_psi_at_goal(np.eye(3), R_SENSOR, [CONE], G, SHAPE)
        assert np.all(np.linalg.eigvalsh(got) > 0.0)

    def test_second_difference_oracle(self):
        rng = np.random.default_rng(17)
        hess = hessian_psi_at_goal(np.eye(3), R_SENSOR, [CONE], G, SHAPE)
        eps = 1e-4
        for _ in range(50):
            eta = rng.normal(size=3)
            eta /= np.linalg.norm(eta)
            plus = psi(exp_so3(eps * eta), np.eye(3), R_SENSOR, [CONE], G, SHAPE)
            minus = psi(exp_so3(-eps * eta), np.eye(3), R_SENSOR, [CONE], G, SHAPE)
            second = (plus + minus) / eps**2
            assert second == pytest.approx(float(eta @ hess @ eta), rel=1e-3)

    def test_infeasible_goal_raises(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        with pytest.raises(ConstraintViolated):
            hessian_psi_at_goal(np.eye(3), R_SENSOR, [cone], G, SHAPE)


class TestQuadraticBounds:
    CAPS = dict(psi_cap=1.71, beta_cap=0.5)

    def test_tiny_neighborhood_matches_hessian(self):
        hess = hessian_psi_at_goal(np.eye(3), R_SENSOR, [CONE], G, SHAPE)
        eigs = np.linalg.eigvalsh(hess)
        # beta_cap above the goal's own cosine (0.707) so the neighborhood
        # of the goal is inside the sampling domain
        n1, n2 = estimate_quadratic_bounds(
            np.eye(3), R_SENSOR, [CONE], G, SHAPE,
            samples=20_000, seed=0, max_angle=1e-3,
            psi_cap=1.71, beta_cap=0.75,
        )
        # Psi ~ eta'H eta / 2 and e_R ~ H eta give ratios 1/(2 lambda)
        assert n1 == pytest.approx(1.0 / (2.0 * eigs[-1]), rel=0.1)
        assert n2 == pytest.approx(1.0 / (2.0 * eigs[0]), rel=0.1)
        assert n2 / n1 == pytest.approx(eigs[-1] / eigs[0], rel=0.1)

    def test_single_sample_collapses(self):
        n1, n2 = estimate_quadratic_bounds(
            np.eye(3), R_SENSOR, [CONE], G, SHAPE, samples=1, seed=3, **self.CAPS,
        )
        assert n1 == n2

    def test_resampling_consistency(self):
        n1, n2 = estimate_quadratic_bounds(
            np.eye(3), R_SENSOR, [CONE], G, SHAPE, samples=200_000, seed=0, **self.CAPS,
        )
        assert 0.0 < n1 <= n2
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 10_000:
            R = random_rotation(rng)
            try:
                require_feasible(R, R_SENSOR, [CONE])
            except ConstraintViolated:
                continue
            if R_SENSOR @ (R.T @ CONE.v) >= self.CAPS["beta_cap"]:
                continue
            value = psi(R, np.eye(3), R_SENSOR, [CONE], G, SHAPE)
            if value >= self.CAPS["psi_cap"]:
                continue
            grad = err_vec_eR(R, np.eye(3), R_SENSOR, [CONE], G, SHAPE)
            norm2 = float(grad @ grad)
            if norm2 < 1e-18:
                continue
            assert n1 - 1e-12 <= value / norm2 <= n2 + 1e-12
            checked += 1

    def test_rejects_nonpositive_samples(self):
        with pytest.raises(DomainInvalid):
            estimate_quadratic_bounds(
                np.eye(3), R_SENSOR, [CONE], G, SHAPE, samples=0, **self.CAPS,
            )

    def test_no_feasible_samples(self):
        cone = ConstraintCone(v=E1, theta=np.radians(40.0))
        # goal itself violates, so every neighborhood sample is rejected
        with pytest.raises(DomainInvalid):
            estimate_quadratic_bounds(
                np.eye(3), R_SENSOR, [cone], G, SHAPE,
                samples=50, seed=0, max_angle=1e-6, **self.CAPS,
            )


@given(st.floats(min_value=0.05, max_value=np.pi - 0.05), st.floats(min_value=0.0, max_value=2 * np.pi))
@settings(max_examples=100, deadline=None)
def test_psi_nonnegative_property(angle, phase):
    axis = np.array([np.cos(phase), np.sin(phase), 0.4])
    axis /= np.linalg.norm(axis)
    R = exp_so3(angle * axis)
    try:
        require_feasible(R, R_SENSOR, [CONE])
    except ConstraintViolated:
        return
    assert psi(R, np.eye(3), R_SENSOR, [CONE], G, SHAPE) >= 0.0
