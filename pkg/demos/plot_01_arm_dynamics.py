"""
The two-link arm model
======================

Evaluate the inertia matrix, Coriolis and gravity terms, then let the arm
swing freely and watch total energy stay put.
"""

import math

import numpy as np

from armtune.control import PidGains
from armtune.dynamics import (
    JointState,
    RobotParams,
    coriolis_vector,
    gravity_vector,
    mass_matrix,
    total_energy,
)
from armtune.simulate import SimConfig, simulate

arm = RobotParams()  # 5 kg links, 0.34 m long, no friction
print(arm)

# inertia is largest with the elbow straight (q2 = 0)
for q2 in (0.0, math.pi / 2, math.pi):
    print(f"M(q2={q2:.3f}) =\n{mass_matrix(arm, (0.0, q2))}")

s = JointState(q=(0.3, math.pi / 2), qdot=(1.0, 1.0))
print("Coriolis:", coriolis_vector(arm, s))
print("  printed second row instead:", coriolis_vector(RobotParams(coriolis="paper"), s))

# q = (0, 0) is the top of the potential; (pi, 0) hangs at rest
print("G(pi/2, 0) =", gravity_vector(arm, (math.pi / 2, 0.0)))

# %%
# Free swing: no torque, released at 45 degrees.
free = SimConfig(q0=(math.pi / 4, 0.0), qd=(0.0, 0.0), t_final=5.0, stride=50)
run = simulate(arm, PidGains(), free)
energy = np.array([total_energy(arm, JointState(q, w)) for q, w in zip(run.q, run.qdot)])
print(f"energy range over 5 s: {energy.min():.9f} .. {energy.max():.9f} J")

# The printed Coriolis row leaks energy.
leaky = RobotParams(coriolis="paper")
run = simulate(leaky, PidGains(), free)
energy = np.array([total_energy(leaky, JointState(q, w)) for q, w in zip(run.q, run.qdot)])
print(f"printed form, energy range: {energy.min():.3f} .. {energy.max():.3f} J")
