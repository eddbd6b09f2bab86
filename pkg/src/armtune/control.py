"""Independent-joint PID control law.

The integral of the tracking error is not kept here; it is part of the
integrated closed-loop state (see :mod:`armtune.simulate`), so the functions
below are pure.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import Sequence

import numpy as np

from .dynamics import JointState
from .errors import InvalidConfig

GAIN_NAMES = ("kp1", "ki1", "kd1", "kp2", "ki2", "kd2")


@dataclass(frozen=True)
class PidGains:
    kp1: float = 0.0
    ki1: float = 0.0
    kd1: float = 0.0
    kp2: float = 0.0
    ki2: float = 0.0
    kd2: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise InvalidConfig(f"{f.name} must be finite and >= 0, got {v!r}", f.name)
            object.__setattr__(self, f.name, float(v))

    @classmethod
    def from_array(cls, genes: Sequence[float]) -> "PidGains":
        if len(genes) != 6:
            raise ValueError(f"expected 6 gains, got {len(genes)}")
        return cls(*(float(v) for v in genes))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


# Hand-tuned reference set and the GA-found set reported for the same task.
BASELINE_GAINS = PidGains(30.0, 20.0, 12.0, 32.0, 30.0, 22.0)
PAPER_GA_GAINS = PidGains(97.47, 98.05, 13.46, 98.52, 70.24, 12.15)


@dataclass(frozen=True)
class PidState:
    """Accumulated error integrals (rad s)."""

    ie1: float = 0.0
    ie2: float = 0.0


def pid_torque(
    g: PidGains,
    st: PidState,
    e: Sequence[float],
    edot: Sequence[float],
) -> np.ndarray:
    e1, e2 = e
    d1, d2 = edot
    return np.array(
        [
            g.kp1 * e1 + g.ki1 * st.ie1 + g.kd1 * d1,
            g.kp2 * e2 + g.ki2 * st.ie2 + g.kd2 * d2,
        ]
    )


def error_signals(qd: Sequence[float], s: JointState) -> tuple[np.ndarray, np.ndarray]:
    """Tracking error and its rate for a constant setpoint ``qd``.

    Because the setpoint does not move, ``edot`` is exactly ``-qdot``.
    """
    e = np.asarray(qd, dtype=float) - np.asarray(s.q)
    edot = -np.asarray(s.qdot)
    return e, edot
