"""Equations of motion of a planar two-link arm.

The model is

    M(q) qddot + C(q, qdot) + G(q) + F(qdot) = tau

where ``C`` is already the full velocity-dependent force vector (it is not
multiplied by ``qdot`` again) and ``F`` is viscous joint friction. Angles are
measured so that ``q = (0, 0)`` is the configuration with zero gravity torque
and maximum potential energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import InvalidConfig, NonFiniteInput

CORIOLIS_MODES = ("lagrangian", "paper")


@dataclass(frozen=True)
class RobotParams:
    """Physical parameters of the arm.

    Defaults are the 5 kg / 0.34 m links used throughout the examples.
    ``coriolis`` selects the second row of the Coriolis vector:
    ``"lagrangian"`` uses ``+m2 l1 l2 sin(q2) qdot1**2`` (consistent with
    ``M`` and conserving energy), ``"paper"`` uses the printed
    ``-m2 l1 l2 sin(q2) qdot1 qdot2``.
    """

    m1: float = 5.0
    m2: float = 5.0
    l1: float = 0.34
    l2: float = 0.34
    g: float = 9.81
    b1: float = 0.0
    b2: float = 0.0
    coriolis: str = "lagrangian"

    def __post_init__(self):
        for f in fields(self):
            if f.name == "coriolis":
                continue
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidConfig(f"{f.name} must be a finite number, got {v!r}", f.name)
            object.__setattr__(self, f.name, float(v))
        for name in ("m1", "m2", "l1", "l2", "g"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be > 0, got {getattr(self, name)}", name)
        for name in ("b1", "b2"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0, got {getattr(self, name)}", name)
        if self.coriolis not in CORIOLIS_MODES:
            raise InvalidConfig(
                f"coriolis must be one of {CORIOLIS_MODES}, got {self.coriolis!r}", "coriolis"
            )

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.m1, self.m2, self.l1, self.l2, self.g, self.b1, self.b2,
             1.0 if self.coriolis == "paper" else 0.0]
        )


@dataclass(frozen=True)
class JointState:
    """Joint angles (rad) and angular velocities (rad/s)."""

    q: tuple[float, float]
    qdot: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        q = tuple(float(v) for v in self.q)
        qdot = tuple(float(v) for v in self.qdot)
        if len(q) != 2 or len(qdot) != 2:
            raise ValueError("JointState holds exactly two joints")
        if not all(math.isfinite(v) for v in q + qdot):
            raise NonFiniteInput(f"non-finite joint state q={q}, qdot={qdot}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)


def _pair(v: Sequence[float]) -> tuple[float, float]:
    a, b = v
    return float(a), float(b)


def mass_matrix(p: RobotParams, q: Sequence[float]) -> np.ndarray:
    """Return the 2x2 inertia matrix M(q) in kg m^2."""
    _, q2 = _pair(q)
    m11, m12, m22 = K.mass_entries(p.as_array(), q2)
    return np.array([[m11, m12], [m12, m22]])


def coriolis_vector(p: RobotParams, s: JointState) -> np.ndarray:
    """Return the Coriolis/centripetal generalized forces in N m."""
    return np.array(K.coriolis_entries(p.as_array(), s.q[1], s.qdot[0], s.qdot[1]))


def gravity_vector(p: RobotParams, q: Sequence[float]) -> np.ndarray:
    q1, q2 = _pair(q)
    return np.array(K.gravity_entries(p.as_array(), q1, q2))


def friction(p: RobotParams, qdot: Sequence[float]) -> np.ndarray:
    w1, w2 = _pair(qdot)
    return np.array([p.b1 * w1, p.b2 * w2])


def forward_dynamics(p: RobotParams, s: JointState, tau: Sequence[float]) -> np.ndarray:
    """Solve the equations of motion for joint accelerations (rad/s^2).

    The 2x2 system is solved in closed form; ``det M`` is strictly positive
    for positive masses and lengths so no pivoting is needed.
    """
    t1, t2 = _pair(tau)
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise NonFiniteInput(f"non-finite torque {tau!r}")
    q1, q2 = s.q
    w1, w2 = s.qdot
    return np.array(K.accel(p.as_array(), q1, q2, w1, w2, t1, t2))


def kinetic_energy(p: RobotParams, s: JointState) -> float:
    qdot = np.asarray(s.qdot)
    return 0.5 * float(qdot @ mass_matrix(p, s.q) @ qdot)


def potential_energy(p: RobotParams, q: Sequence[float]) -> float:
    """Potential whose gradient is :func:`gravity_vector`."""
    q1, q2 = _pair(q)
    return (p.m1 + p.m2) * p.g * p.l1 * math.cos(q1) + p.m2 * p.g * p.l2 * math.cos(q1 + q2)


def total_energy(p: RobotParams, s: JointState) -> float:
    return kinetic_energy(p, s) + potential_energy(p, s.q)
