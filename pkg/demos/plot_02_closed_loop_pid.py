"""
PID regulation of both joints
=============================

Drive the arm from (pi, pi/2) to (pi/2, pi) with the hand-tuned gains and
with the GA-found gains, and plot trajectories, errors and torques.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from armtune.control import BASELINE_GAINS, PAPER_GA_GAINS
from armtune.dynamics import RobotParams
from armtune.simulate import SimConfig, simulate

arm = RobotParams()
task = SimConfig(t_final=6.0)

runs = {
    "PID1 (hand-tuned)": simulate(arm, BASELINE_GAINS, task),
    "PID-GA": simulate(arm, PAPER_GA_GAINS, task),
}

for name, r in runs.items():
    print(f"{name:>18}: ISE {r.ise:.4f}  overshoot {r.overshoot.round(2)} %  "
          f"settling {r.settling_time.round(3)} s")

fig, axes = plt.subplots(3, 2, figsize=(10, 8), sharex=True)
for name, r in runs.items():
    for j in range(2):
        axes[0, j].plot(r.t, r.q[:, j], label=name)
        axes[1, j].plot(r.t, r.e[:, j], label=name)
        axes[2, j].plot(r.t, r.tau[:, j], label=name)
for j in range(2):
    axes[0, j].axhline(task.qd[j], color="k", lw=0.8, ls="--")
    axes[0, j].set_title(f"joint {j + 1}")
    axes[2, j].set_xlabel("t [s]")
axes[0, 0].set_ylabel("q [rad]")
axes[1, 0].set_ylabel("e [rad]")
axes[2, 0].set_ylabel("tau [N m]")
axes[0, 0].legend()
fig.tight_layout()
fig.savefig("closed_loop.png", dpi=120)
print("wrote closed_loop.png")
