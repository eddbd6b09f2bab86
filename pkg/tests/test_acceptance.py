"""Exit criteria for the package, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
values. Compiled kernels are warmed up before anything is timed.
"""

import math
import time

import numpy as np
import pytest

from armtune.cli import main
from armtune.control import BASELINE_GAINS, PAPER_GA_GAINS, PidGains
from armtune.dynamics import (
    JointState,
    RobotParams,
    coriolis_vector,
    forward_dynamics,
    friction,
    gravity_vector,
    mass_matrix,
    total_energy,
)
from armtune.ga import Chromosome, GaConfig, run_ga, tournament
from armtune.simulate import SimConfig, final_state, simulate

PARAMS = RobotParams()
TASK = SimConfig()  # q0 = (pi, pi/2) -> qd = (pi/2, pi), dt 1e-3, 10 s


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    forward_dynamics(PARAMS, JointState((0.1, 0.2), (0.3, 0.4)), (1.0, 2.0))
    simulate(PARAMS, BASELINE_GAINS, SimConfig(t_final=0.01))
    final_state(PARAMS, BASELINE_GAINS, SimConfig(t_final=0.01))


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_1_dynamics_residual(capsys):
    rng = np.random.default_rng(2024)
    p = RobotParams(b1=0.4, b2=0.9)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        q = rng.uniform(-math.pi, math.pi, 2)
        w = rng.uniform(-10, 10, 2)
        tau = rng.uniform(-300, 300, 2)
        s = JointState(q, w)
        qdd = forward_dynamics(p, s, tau)
        res = mass_matrix(p, q) @ qdd + coriolis_vector(p, s) + gravity_vector(p, q) + friction(p, w) - tau
        worst = max(worst, float(np.linalg.norm(res)))
    elapsed = time.perf_counter() - start
    report(capsys, 1, worst <= 1e-10 and elapsed < 1.0,
           f"max residual {worst:.3e} (<= 1e-10), {elapsed:.3f} s (< 1 s)")


def test_2_energy_conservation(capsys):
    cfg = SimConfig(dt=1e-3, t_final=5.0, q0=(math.pi / 4, 0.0), qd=(0.0, 0.0))
    start = time.perf_counter()
    x, diverged = final_state(PARAMS, PidGains(), cfg)
    elapsed = time.perf_counter() - start
    e0 = total_energy(PARAMS, JointState(cfg.q0, cfg.qdot0))
    drift = abs(total_energy(PARAMS, JointState(x[:2], x[2:4])) - e0) / abs(e0)
    report(capsys, 2, not diverged and drift <= 1e-6 and elapsed < 1.0,
           f"relative energy drift {drift:.3e} (<= 1e-6), {elapsed:.3f} s (< 1 s)")


def test_3_integrator_order(capsys):
    def run(dt):
        cfg = SimConfig(dt=dt, t_final=1.0, q0=(math.pi / 4, 0.0), qd=(0.0, 0.0))
        return final_state(PARAMS, PidGains(), cfg)[0][:4]

    ref = run(1e-6)
    err_coarse = np.linalg.norm(run(1e-3) - ref)
    err_fine = np.linalg.norm(run(5e-4) - ref)
    ratio = err_coarse / err_fine
    report(capsys, 3, 12 <= ratio <= 20,
           f"errors {err_coarse:.3e} / {err_fine:.3e}, ratio {ratio:.2f} (in [12, 20])")


def test_4_paper_ordering(capsys):
    start = time.perf_counter()
    base = simulate(PARAMS, BASELINE_GAINS, TASK)
    tuned = simulate(PARAMS, PAPER_GA_GAINS, TASK)
    elapsed = time.perf_counter() - start
    ok = (
        tuned.ise < base.ise
        and np.all(tuned.settling_time <= base.settling_time)
        and elapsed < 5.0
    )
    report(capsys, 4, ok,
           f"ISE ga {tuned.ise:.6f} < baseline {base.ise:.6f}; settling ga "
           f"{tuned.settling_time.tolist()} <= baseline {base.settling_time.tolist()} s; "
           f"overshoot ga {np.round(tuned.overshoot, 3).tolist()} vs baseline "
           f"{np.round(base.overshoot, 3).tolist()} %; {elapsed:.3f} s (< 5 s)")


def test_5_ga_end_to_end(capsys):
    start = time.perf_counter()
    rep = run_ga(GaConfig(seed=0), PARAMS, TASK)
    elapsed = time.perf_counter() - start
    base_fit = simulate(PARAMS, BASELINE_GAINS, TASK).ise
    best = rep.history[:, 0]
    ok = (
        rep.generations_run <= 1000
        and rep.best.fitness <= base_fit
        and bool(np.all(np.diff(best) <= 0))
        and elapsed < 600
    )
    report(capsys, 5, ok,
           f"stopped by {rep.terminated_by} after {rep.generations_run} generations "
           f"(<= 1000), best ISE {rep.best.fitness:.6f} <= baseline {base_fit:.6f}, "
           f"history non-increasing, {rep.evaluations} simulations in {elapsed:.1f} s (< 600 s); "
           f"gains {np.round(rep.best.genes, 2).tolist()}")


def test_6_tune_determinism(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        code = main(["tune", "--seed", "17", "--workers", "4", "--out", str(tmp_path / name)])
        assert code == 0
        outs.append(((tmp_path / name / "best_gains").read_bytes(),
                     (tmp_path / name / "ga_history.csv").read_bytes()))
    serial = tmp_path / "serial"
    main(["tune", "--seed", "17", "--workers", "1", "--out", str(serial)])
    ok = outs[0] == outs[1] and outs[0][1] == (serial / "ga_history.csv").read_bytes()
    report(capsys, 6, ok,
           "two parallel tune runs (4 workers, seed 17) give byte-identical best_gains and "
           "ga_history.csv, also identical to a serial run")


def test_7_selection_statistics(capsys):
    pop = [Chromosome(np.zeros(6), f) for f in (1.0, 2.0, 3.0, 4.0)]
    rng = np.random.default_rng(31337)
    wins = sum(tournament(pop, rng) == 0 for _ in range(10_000))
    rate = wins / 10_000
    report(capsys, 7, abs(rate - 7 / 16) <= 0.02,
           f"best-of-four win rate {rate:.4f} vs 7/16 = {7 / 16:.4f} (+/- 0.02)")


def test_8_cli_compare(capsys, tmp_path):
    code = main(["compare", "--out", str(tmp_path / "default")])
    text = (tmp_path / "default" / "comparison.txt").read_text()
    code_self = main(["compare", "--gains", "baseline", "--out", str(tmp_path / "self")])
    ok = code == 0 and "ise_winner = ga-tuned" in text and code_self == 3
    report(capsys, 8, ok,
           f"compare (default config, inline tune) exit {code}, ISE winner ga-tuned: "
           f"{'ise_winner = ga-tuned' in text}; compare --gains baseline exit {code_self} (expect 3)")
