"""
Tuning the gains with a genetic algorithm
=========================================

Population 20, crossover 0.6, mutation 0.4, at most 1000 generations.
The run usually stops on the stall rule after 100-200 generations.
"""

import numpy as np

from armtune.control import BASELINE_GAINS, GAIN_NAMES, PAPER_GA_GAINS
from armtune.dynamics import RobotParams
from armtune.ga import GaConfig, run_ga
from armtune.simulate import SimConfig, simulate

arm = RobotParams()
task = SimConfig()
cfg = GaConfig(seed=0, workers=2)


def progress(gen, best, mean):
    if gen % 20 == 0:
        print(f"gen {gen:4d}  best {best:.5f}  mean {mean:.4g}")


report = run_ga(cfg, arm, task, on_generation=progress)
print(report.summary())

for name, gains in (("baseline", BASELINE_GAINS), ("published GA", PAPER_GA_GAINS),
                    ("this run", report.best.gains())):
    r = simulate(arm, gains, task)
    print(f"{name:>13}: ISE {r.ise:.5f}  " +
          " ".join(f"{n}={v:.2f}" for n, v in zip(GAIN_NAMES, gains.as_array())))

# best fitness per generation never goes up
assert np.all(np.diff(report.history[:, 0]) <= 0)
