"""Fixed-step closed-loop simulation of the PID-controlled arm.

The integrated state is seven-dimensional::

    (q1, q2, qdot1, qdot2, ie1, ie2, J)

with ``d(ie)/dt = e`` carrying the PID integral term and
``dJ/dt = e1**2 + e2**2`` accumulating the integral of squared error (ISE).
All components advance together with classical fourth-order Runge-Kutta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .control import PidGains
from .dynamics import RobotParams
from .errors import InvalidConfig, NonFiniteState

# Fitness assigned to runs that leave the blow-up envelope.
DEFAULT_PENALTY = 1e12

SETTLE_FLOOR = 1e-12  # rad

CSV_HEADER = "t,q1,q2,qd1,qd2,e1,e2,tau1,tau2"


def _finite_pair(name, v):
    try:
        a, b = (float(x) for x in v)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{name} must be a pair of numbers, got {v!r}", name) from None
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidConfig(f"{name} must be finite, got {v!r}", name)
    return a, b


@dataclass(frozen=True)
class SimConfig:
    """Integration and task settings.

    ``stride`` decimates the recorded samples only; metrics always use every
    step. ``torque_limit=None`` disables the symmetric torque clamp.
    """

    dt: float = 1e-3
    t_final: float = 10.0
    q0: tuple[float, float] = (math.pi, math.pi / 2)
    qd: tuple[float, float] = (math.pi / 2, math.pi)
    qdot0: tuple[float, float] = (0.0, 0.0)
    blowup_limit: float = 1e3
    torque_limit: Optional[float] = None
    stride: int = 1
    settle_band: float = 0.02

    def __post_init__(self):
        for name in ("q0", "qd", "qdot0"):
            object.__setattr__(self, name, _finite_pair(name, getattr(self, name)))
        for name in ("dt", "t_final", "blowup_limit", "settle_band"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidConfig(f"{name} must be a finite number, got {v!r}", name)
            object.__setattr__(self, name, float(v))
        if self.dt <= 0:
            raise InvalidConfig(f"dt must be > 0, got {self.dt}", "dt")
        if self.t_final < self.dt:
            raise InvalidConfig(f"t_final must be >= dt, got {self.t_final}", "t_final")
        if self.blowup_limit <= 0:
            raise InvalidConfig(f"blowup_limit must be > 0, got {self.blowup_limit}", "blowup_limit")
        if self.torque_limit is not None:
            if not math.isfinite(self.torque_limit) or self.torque_limit <= 0:
                raise InvalidConfig(
                    f"torque_limit must be > 0 or unset, got {self.torque_limit}", "torque_limit"
                )
            object.__setattr__(self, "torque_limit", float(self.torque_limit))
        if not isinstance(self.stride, int) or isinstance(self.stride, bool) or self.stride < 1:
            raise InvalidConfig(f"stride must be an integer >= 1, got {self.stride!r}", "stride")
        if not 0 < self.settle_band < 1:
            raise InvalidConfig(f"settle_band must be in (0, 1), got {self.settle_band}", "settle_band")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def tlim(self) -> float:
        return math.inf if self.torque_limit is None else self.torque_limit

    def initial_state(self) -> np.ndarray:
        return np.array([*self.q0, *self.qdot0, 0.0, 0.0, 0.0])


@dataclass
class SimResult:
    """Recorded trajectory plus scalar performance metrics.

    Arrays hold one row per recorded sample. Per-joint metrics are NaN when
    the run diverged.
    """

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    e: np.ndarray
    tau: np.ndarray
    qd: tuple[float, float]
    ise: float
    diverged: bool
    overshoot: np.ndarray = field(default_factory=lambda: np.full(2, np.nan))
    settling_time: np.ndarray = field(default_factory=lambda: np.full(2, np.nan))
    steady_state_error: np.ndarray = field(default_factory=lambda: np.full(2, np.nan))

    def table(self) -> np.ndarray:
        """Samples as columns ``t,q1,q2,qd1,qd2,e1,e2,tau1,tau2``."""
        qd = np.broadcast_to(np.asarray(self.qd), self.q.shape)
        return np.column_stack([self.t, self.q, qd, self.e, self.tau])

    def to_csv(self, path) -> None:
        np.savetxt(Path(path), self.table(), delimiter=",", fmt="%.17g",
                   header=CSV_HEADER, comments="")


def read_trajectory_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected trajectory header {header!r}")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _torques(gains: np.ndarray, x: np.ndarray, qd, tlim: float) -> np.ndarray:
    e = np.asarray(qd) - x[:, 0:2]
    tau = (
        gains[[0, 3]] * e
        + gains[[1, 4]] * x[:, 4:6]
        - gains[[2, 5]] * x[:, 2:4]
    )
    return np.clip(tau, -tlim, tlim)


def rk4_step(
    p: RobotParams,
    g: PidGains,
    cfg: SimConfig,
    state,
    dt: float,
    plant: Optional[Callable] = None,
) -> np.ndarray:
    """Advance the augmented state one RK4 step of size ``dt``.

    ``plant`` replaces the closed-loop derivative; it must be a numba-compiled
    function with the signature of ``_kernels.closed_loop_deriv``.
    """
    x = np.array(state, dtype=float)
    if x.shape != (K.STATE_SIZE,):
        raise ValueError(f"state must have {K.STATE_SIZE} entries, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(f"non-finite state {x}")
    if not dt > 0:
        raise InvalidConfig(f"dt must be > 0, got {dt}", "dt")
    out = np.empty_like(x)
    scratch = [np.empty_like(x) for _ in range(5)]
    ok = K.rk4_into(plant or K.closed_loop_deriv, p.as_array(), g.as_array(),
                    np.asarray(cfg.qd), cfg.tlim, x, float(dt), out, *scratch)
    if not ok:
        raise NonFiniteState(f"non-finite derivative while stepping from {x}")
    return out


def step_metrics(t: np.ndarray, e: np.ndarray, q0, qd, t_final: float, band: float = 0.02):
    """Overshoot (%), settling time (s) and steady-state error (rad) per joint.

    The settling band is ``band`` times the initial error magnitude, floored
    at ``SETTLE_FLOOR`` so a zero-size step ignores round-off. A joint
    still outside the band on the last sample has infinite settling time.
    Steady-state error is the mean ``|e|`` over the last 10% of the horizon.
    """
    step = np.asarray(qd, dtype=float) - np.asarray(q0, dtype=float)
    overshoot = np.zeros(2)
    settling = np.zeros(2)
    tail = t >= 0.9 * t_final - 1e-12
    sse = np.mean(np.abs(e[tail]), axis=0)
    for j in range(2):
        size = abs(step[j])
        if size > 0:
            beyond = -np.sign(step[j]) * e[:, j]
            overshoot[j] = max(0.0, float(beyond.max())) / size * 100.0
        outside = np.flatnonzero(np.abs(e[:, j]) > max(band * size, SETTLE_FLOOR))
        if outside.size == 0:
            settling[j] = 0.0
        elif outside[-1] == len(t) - 1:
            settling[j] = math.inf
        else:
            settling[j] = t[outside[-1] + 1]
    return overshoot, settling, sse


def simulate(
    p: RobotParams,
    g: PidGains,
    cfg: SimConfig,
    *,
    penalty: float = DEFAULT_PENALTY,
    plant: Optional[Callable] = None,
) -> SimResult:
    """Run the closed loop from ``t = 0`` to ``cfg.t_final``.

    Stops early and flags ``diverged`` when any joint angle or rate leaves
    ``[-blowup_limit, blowup_limit]`` or turns non-finite; the reported ISE is
    then ``penalty``.
    """
    if not isinstance(cfg, SimConfig):
        raise InvalidConfig(f"expected SimConfig, got {type(cfg).__name__}")
    n = cfg.n_steps
    traj = np.empty((n + 1, K.STATE_SIZE))
    traj[0] = cfg.initial_state()
    gains = g.as_array()
    if np.any(np.abs(traj[0, :4]) > cfg.blowup_limit):
        rows, diverged = 1, True
    else:
        rows, diverged = K.integrate(plant or K.closed_loop_deriv, p.as_array(), gains,
                                     np.asarray(cfg.qd), cfg.tlim, cfg.dt,
                                     cfg.blowup_limit, traj)
    traj = traj[:rows]
    t = np.arange(rows) * cfg.dt
    e = np.asarray(cfg.qd) - traj[:, 0:2]
    tau = _torques(gains, traj, cfg.qd, cfg.tlim)

    k = slice(None, None, cfg.stride)
    result = SimResult(
        t=t[k], q=traj[k, 0:2], qdot=traj[k, 2:4], e=e[k], tau=tau[k],
        qd=cfg.qd, ise=float(penalty) if diverged else float(traj[-1, 6]),
        diverged=bool(diverged),
    )
    if not diverged:
        result.overshoot, result.settling_time, result.steady_state_error = step_metrics(
            t, e, cfg.q0, cfg.qd, cfg.t_final, cfg.settle_band
        )
    return result


def closed_loop_ise(
    p: RobotParams,
    g: PidGains,
    cfg: SimConfig,
    *,
    penalty: float = DEFAULT_PENALTY,
    plant: Optional[Callable] = None,
) -> float:
    """ISE of :func:`simulate` without storing the trajectory.

    Performs the same arithmetic step by step, so the value is bit-identical
    to ``simulate(...).ise``.
    """
    x, diverged = final_state(p, g, cfg, plant=plant)
    return float(penalty) if diverged else float(x[6])


def final_state(
    p: RobotParams,
    g: PidGains,
    cfg: SimConfig,
    *,
    plant: Optional[Callable] = None,
) -> tuple[np.ndarray, bool]:
    """Augmented state at ``t_final`` (or where the run diverged) and the diverged flag."""
    x0 = cfg.initial_state()
    if np.any(np.abs(x0[:4]) > cfg.blowup_limit):
        return x0, True
    x, diverged = K.final_state(plant or K.closed_loop_deriv, p.as_array(), g.as_array(),
                                np.asarray(cfg.qd), cfg.tlim, x0, cfg.dt, cfg.n_steps,
                                cfg.blowup_limit)
    return x, bool(diverged)
