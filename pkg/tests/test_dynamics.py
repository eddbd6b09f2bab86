import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from armtune.dynamics import (
    JointState,
    RobotParams,
    coriolis_vector,
    forward_dynamics,
    friction,
    gravity_vector,
    kinetic_energy,
    mass_matrix,
    potential_energy,
    total_energy,
)
from armtune.errors import InvalidConfig, NonFiniteInput

angles = st.floats(-2 * math.pi, 2 * math.pi)
rates = st.floats(-20, 20)


def _lagrangian_oracle():
    """Derive M, C, G symbolically from point masses at the link tips.

    Heights use cos so that q = 0 is the zero-gravity-torque configuration.
    """
    t = sp.symbols("t")
    m1, m2, l1, l2, g = sp.symbols("m1 m2 l1 l2 g", positive=True)
    q1, q2 = sp.Function("q1")(t), sp.Function("q2")(t)
    x1, y1 = l1 * sp.sin(q1), l1 * sp.cos(q1)
    x2, y2 = x1 + l2 * sp.sin(q1 + q2), y1 + l2 * sp.cos(q1 + q2)
    T = (m1 * (x1.diff(t) ** 2 + y1.diff(t) ** 2) + m2 * (x2.diff(t) ** 2 + y2.diff(t) ** 2)) / 2
    V = m1 * g * y1 + m2 * g * y2
    L = T - V
    eqs = [sp.simplify(L.diff(q.diff(t)).diff(t) - L.diff(q)) for q in (q1, q2)]

    a1, a2, w1, w2, Q1, Q2 = sp.symbols("a1 a2 w1 w2 Q1 Q2")
    subs = {q1.diff(t, 2): a1, q2.diff(t, 2): a2}
    subs2 = {q1.diff(t): w1, q2.diff(t): w2}
    subs3 = {q1: Q1, q2: Q2}
    eqs = [e.subs(subs).subs(subs2).subs(subs3) for e in eqs]
    M = sp.Matrix([[sp.expand(e).coeff(a) for a in (a1, a2)] for e in eqs])
    rest = [sp.expand(e - M[i, 0] * a1 - M[i, 1] * a2) for i, e in enumerate(eqs)]
    G = [r.subs({w1: 0, w2: 0}) for r in rest]
    C = [sp.simplify(r - gi) for r, gi in zip(rest, G)]
    syms = (m1, m2, l1, l2, g, Q1, Q2, w1, w2)
    return (sp.lambdify(syms, M), sp.lambdify(syms, C), sp.lambdify(syms, G))


@pytest.fixture(scope="module")
def oracle():
    return _lagrangian_oracle()


class TestMassMatrix:
    def test_zero_configuration(self, params):
        np.testing.assert_allclose(mass_matrix(params, (0.0, 0.0)),
                                   [[2.890, 1.156], [1.156, 0.578]], atol=1e-12)

    @pytest.mark.parametrize("q1", [0.0, 1.0, -2.5])
    def test_elbow_at_right_angle(self, params, q1):
        np.testing.assert_allclose(mass_matrix(params, (q1, math.pi / 2)),
                                   [[1.734, 0.578], [0.578, 0.578]], atol=1e-12)

    def test_matches_symbolic_lagrangian(self, params, oracle, rng):
        M_ref, _, _ = oracle
        for q in rng.uniform(-math.pi, math.pi, size=(20, 2)):
            ref = np.array(M_ref(5, 5, 0.34, 0.34, 9.81, q[0], q[1], 0, 0), dtype=float)
            np.testing.assert_allclose(mass_matrix(params, q), ref, rtol=1e-12, atol=1e-14)

    @given(angles, angles)
    def test_symmetric(self, q1, q2):
        M = mass_matrix(RobotParams(), (q1, q2))
        assert M[0, 1] == M[1, 0]

    @given(angles, angles)
    def test_positive_definite(self, q1, q2):
        M = mass_matrix(RobotParams(), (q1, q2))
        assert np.linalg.det(M) > 0 and np.trace(M) > 0
        assert np.all(np.linalg.eigvalsh(M) > 0)


class TestCoriolis:
    @given(angles, angles)
    def test_zero_velocity(self, q1, q2):
        np.testing.assert_array_equal(coriolis_vector(RobotParams(), JointState((q1, q2))), 0.0)

    @pytest.mark.parametrize("q2", [0.0, math.pi])
    @pytest.mark.parametrize("mode", ["lagrangian", "paper"])
    def test_vanishes_when_links_aligned(self, q2, mode):
        c = coriolis_vector(RobotParams(coriolis=mode), JointState((0.3, q2), (1.7, -2.2)))
        np.testing.assert_allclose(c, 0.0, atol=1e-14)

    def test_printed_form_at_right_angle(self):
        # m2 l1 l2 = 0.578
        c = coriolis_vector(RobotParams(coriolis="paper"), JointState((0.0, math.pi / 2), (1, 1)))
        np.testing.assert_allclose(c, [-1.734, -0.578], atol=1e-12)

    def test_lagrangian_form_at_right_angle(self, params):
        c = coriolis_vector(params, JointState((0.0, math.pi / 2), (1, 1)))
        np.testing.assert_allclose(c, [-1.734, 0.578], atol=1e-12)

    def test_lagrangian_form_matches_symbolic(self, params, oracle, rng):
        _, C_ref, _ = oracle
        for q1, q2, w1, w2 in rng.uniform(-3, 3, size=(20, 4)):
            ref = np.array(C_ref(5, 5, 0.34, 0.34, 9.81, q1, q2, w1, w2), dtype=float)
            got = coriolis_vector(params, JointState((q1, q2), (w1, w2)))
            np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("mode", ["lagrangian", "paper"])
    @given(q2=angles, w1=rates, w2=rates, alpha=st.floats(-5, 5))
    def test_quadratic_in_velocity(self, mode, q2, w1, w2, alpha):
        p = RobotParams(coriolis=mode)
        base = coriolis_vector(p, JointState((0.0, q2), (w1, w2)))
        scaled = coriolis_vector(p, JointState((0.0, q2), (alpha * w1, alpha * w2)))
        np.testing.assert_allclose(scaled, alpha ** 2 * base, rtol=1e-9, atol=1e-9)


class TestGravity:
    @pytest.mark.parametrize("q", [(0.0, 0.0), (math.pi, 0.0)])
    def test_zero_torque_configurations(self, params, q):
        np.testing.assert_allclose(gravity_vector(params, q), 0.0, atol=1e-12)

    def test_upper_link_horizontal(self, params):
        np.testing.assert_allclose(gravity_vector(params, (math.pi / 2, 0.0)),
                                   [-50.031, -16.677], atol=1e-12)

    def test_matches_symbolic(self, params, oracle, rng):
        _, _, G_ref = oracle
        for q in rng.uniform(-math.pi, math.pi, size=(20, 2)):
            ref = np.array(G_ref(5, 5, 0.34, 0.34, 9.81, q[0], q[1], 0, 0), dtype=float)
            np.testing.assert_allclose(gravity_vector(params, q), ref, rtol=1e-12, atol=1e-12)

    def test_is_potential_gradient(self, params, rng):
        eps = 1e-5
        for q in rng.uniform(-math.pi, math.pi, size=(50, 2)):
            fd = [
                (potential_energy(params, q + eps * e) - potential_energy(params, q - eps * e))
                / (2 * eps)
                for e in np.eye(2)
            ]
            np.testing.assert_allclose(fd, gravity_vector(params, q), atol=1e-6)

    def test_conservative_cross_partials(self, params, rng):
        eps = 1e-5
        for q in rng.uniform(-math.pi, math.pi, size=(50, 2)):
            d = np.eye(2) * eps
            dG1_dq2 = (gravity_vector(params, q + d[1])[0] - gravity_vector(params, q - d[1])[0]) / (2 * eps)
            dG2_dq1 = (gravity_vector(params, q + d[0])[1] - gravity_vector(params, q - d[0])[1]) / (2 * eps)
            assert abs(dG1_dq2 - dG2_dq1) < 1e-6


class TestFriction:
    def test_default_is_frictionless(self, params):
        np.testing.assert_array_equal(friction(params, (4.0, -7.0)), 0.0)

    def test_viscous(self):
        np.testing.assert_array_equal(friction(RobotParams(b1=1, b2=2), (3, -1)), [3, -2])

    def test_at_rest(self):
        np.testing.assert_array_equal(friction(RobotParams(b1=1.5, b2=9), (0, 0)), 0.0)


class TestForwardDynamics:
    def test_gravity_compensation_holds_still(self, params, rng):
        for q in rng.uniform(-math.pi, math.pi, size=(10, 2)):
            tau = gravity_vector(params, q)
            np.testing.assert_allclose(forward_dynamics(params, JointState(q), tau), 0.0, atol=1e-12)

    def test_rest_at_origin(self, params):
        np.testing.assert_array_equal(forward_dynamics(params, JointState((0, 0)), (0, 0)), 0.0)

    @pytest.mark.parametrize("mode", ["lagrangian", "paper"])
    def test_equation_residual(self, mode, rng):
        p = RobotParams(b1=0.7, b2=1.3, coriolis=mode)
        for _ in range(200):
            q = rng.uniform(-math.pi, math.pi, 2)
            w = rng.uniform(-10, 10, 2)
            tau = rng.uniform(-200, 200, 2)
            s = JointState(q, w)
            qdd = forward_dynamics(p, s, tau)
            res = mass_matrix(p, q) @ qdd + coriolis_vector(p, s) + gravity_vector(p, q) + friction(p, w) - tau
            assert np.linalg.norm(res) <= 1e-10

    def test_rejects_non_finite(self, params):
        with pytest.raises(NonFiniteInput):
            forward_dynamics(params, JointState((0, 0)), (math.nan, 0.0))
        with pytest.raises(NonFiniteInput):
            JointState((math.inf, 0.0))


class TestEnergy:
    def test_potential_at_origin(self, params):
        assert total_energy(params, JointState((0, 0))) == pytest.approx(50.031, abs=1e-12)

    @given(angles, angles, rates, rates)
    def test_kinetic_nonnegative(self, q1, q2, w1, w2):
        assert kinetic_energy(RobotParams(), JointState((q1, q2), (w1, w2))) >= 0.0


class TestRobotParams:
    @pytest.mark.parametrize("field", ["m1", "m2", "l1", "l2", "g"])
    def test_positive_fields(self, field):
        with pytest.raises(InvalidConfig) as exc:
            RobotParams(**{field: 0.0})
        assert exc.value.field == field

    def test_negative_friction(self):
        with pytest.raises(InvalidConfig, match="b2"):
            RobotParams(b2=-0.1)

    def test_unknown_coriolis_mode(self):
        with pytest.raises(InvalidConfig, match="coriolis"):
            RobotParams(coriolis="matrix")
