"""Real-coded genetic algorithm for the six PID gains.

Operators: size-2 tournament selection, BLX-alpha blend crossover, per-gene
Gaussian mutation, and elitist (mu + lambda) survivor retention. Fitness is
the closed-loop ISE; lower is better.

All random draws for a generation happen on the calling thread, in a fixed
order, before any fitness evaluation is dispatched. Parallel evaluation
therefore cannot change the result.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .control import GAIN_NAMES, PidGains
from .dynamics import RobotParams
from .errors import InvalidConfig
from .simulate import DEFAULT_PENALTY, SimConfig, closed_loop_ise

log = logging.getLogger(__name__)

N_GENES = 6
BLX_ALPHA = 0.5
MUTATION_SIGMA = 0.05  # fraction of the gene range


@dataclass
class Chromosome:
    genes: np.ndarray
    fitness: Optional[float] = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def gains(self) -> PidGains:
        return PidGains.from_array(self.genes)


@dataclass(frozen=True)
class GaConfig:
    """Hyper-parameters of :func:`run_ga`.

    ``gene_bounds`` is either one ``(lo, hi)`` pair applied to every gene or
    six pairs. The run stops early when the best fitness improved by no more
    than ``stall_tolerance`` (relative) over ``stall_generations`` generations.
    ``workers > 1`` evaluates fitness on a thread pool.
    """

    pop_size: int = 20
    max_generations: int = 1000
    crossover_rate: float = 0.6
    mutation_rate: float = 0.4
    gene_bounds: tuple = (0.0, 150.0)
    elite_count: int = 1
    seed: int = 0
    stall_generations: int = 25
    stall_tolerance: float = 1e-6
    penalty_fitness: float = DEFAULT_PENALTY
    workers: int = 1

    def __post_init__(self):
        for name in ("pop_size", "max_generations", "elite_count", "seed",
                     "stall_generations", "workers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise InvalidConfig(f"{name} must be an integer, got {v!r}", name)
        if self.pop_size < 2:
            raise InvalidConfig(f"pop_size must be >= 2, got {self.pop_size}", "pop_size")
        if self.max_generations < 1:
            raise InvalidConfig(f"max_generations must be >= 1, got {self.max_generations}",
                                "max_generations")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {v}", name)
        if not 0 <= self.elite_count < self.pop_size:
            raise InvalidConfig(
                f"elite_count must be in [0, pop_size), got {self.elite_count}", "elite_count")
        if self.seed < 0:
            raise InvalidConfig(f"seed must be >= 0, got {self.seed}", "seed")
        if self.stall_generations < 1:
            raise InvalidConfig(
                f"stall_generations must be >= 1, got {self.stall_generations}", "stall_generations")
        if not self.stall_tolerance >= 0:
            raise InvalidConfig(
                f"stall_tolerance must be >= 0, got {self.stall_tolerance}", "stall_tolerance")
        if self.workers < 1:
            raise InvalidConfig(f"workers must be >= 1, got {self.workers}", "workers")
        if not (math.isfinite(self.penalty_fitness) and self.penalty_fitness > 0):
            raise InvalidConfig(
                f"penalty_fitness must be finite and > 0, got {self.penalty_fitness}",
                "penalty_fitness")
        self.bounds  # validates gene_bounds

    @property
    def bounds(self) -> np.ndarray:
        """Gene bounds as a ``(6, 2)`` array of ``(lo, hi)`` rows."""
        b = np.asarray(self.gene_bounds, dtype=float)
        if b.shape == (2,):
            b = np.tile(b, (N_GENES, 1))
        if b.shape != (N_GENES, 2):
            raise InvalidConfig(
                f"gene_bounds must be one (lo, hi) pair or {N_GENES} pairs", "gene_bounds")
        if not np.all(np.isfinite(b)) or np.any(b[:, 0] < 0) or np.any(b[:, 0] > b[:, 1]):
            raise InvalidConfig(f"gene_bounds must satisfy 0 <= lo <= hi, got {b.tolist()}",
                                "gene_bounds")
        return b


@dataclass
class GaReport:
    best: Chromosome
    generations_run: int
    history: np.ndarray  # rows of (best, mean) fitness per generation
    terminated_by: str   # "max_generations" or "stall"
    evaluations: int = 0

    def history_csv(self) -> str:
        lines = ["generation,best_fitness,mean_fitness"]
        for k, (b, m) in enumerate(self.history):
            lines.append(f"{k},{b:.17g},{m:.17g}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = [
            f"generations_run = {self.generations_run}",
            f"terminated_by = {self.terminated_by}",
            f"evaluations = {self.evaluations}",
            f"best_fitness = {self.best.fitness:.17g}",
        ]
        lines += [f"{n} = {v:.17g}" for n, v in zip(GAIN_NAMES, self.best.genes)]
        return "\n".join(lines) + "\n"


def max_achievable_ise(sim_cfg: SimConfig) -> float:
    """Upper bound on the ISE of any run that stays inside the blow-up envelope."""
    return sim_cfg.blowup_limit ** 2 * 2 * sim_cfg.t_final


def fitness(
    c: Chromosome,
    p: RobotParams,
    cfg: SimConfig,
    *,
    penalty: float = DEFAULT_PENALTY,
    plant: Optional[Callable] = None,
) -> float:
    """Closed-loop ISE of the gains encoded by ``c`` (``penalty`` if diverged)."""
    return closed_loop_ise(p, c.gains(), cfg, penalty=penalty, plant=plant)


def init_population(cfg: GaConfig, rng: np.random.Generator) -> list[Chromosome]:
    b = cfg.bounds
    genes = rng.uniform(b[:, 0], b[:, 1], size=(cfg.pop_size, N_GENES))
    return [Chromosome(row.copy()) for row in genes]


def tournament(pop: Sequence[Chromosome], rng: np.random.Generator) -> int:
    """Index of the winner of one size-2 tournament (drawn with replacement).

    Lower fitness wins; ties go to the lower population index.
    """
    i, j = rng.integers(len(pop), size=2)
    fi, fj = pop[i].fitness, pop[j].fitness
    if fi is None or fj is None:
        raise ValueError("tournament needs evaluated chromosomes")
    if fi < fj or (fi == fj and i <= j):
        return int(i)
    return int(j)


def select_parents(pop: Sequence[Chromosome], rng: np.random.Generator):
    return pop[tournament(pop, rng)], pop[tournament(pop, rng)]


def crossover(
    a: Chromosome,
    b: Chromosome,
    rate: float,
    rng: np.random.Generator,
    bounds: np.ndarray,
    alpha: float = BLX_ALPHA,
) -> tuple[Chromosome, Chromosome]:
    """BLX-alpha blend of two parents, applied to the whole chromosome with probability ``rate``."""
    if rng.random() >= rate:
        return Chromosome(a.genes.copy()), Chromosome(b.genes.copy())
    lo = np.minimum(a.genes, b.genes)
    hi = np.maximum(a.genes, b.genes)
    spread = alpha * (hi - lo)
    kids = rng.uniform(lo - spread, hi + spread, size=(2, len(lo)))
    kids = np.clip(kids, bounds[:, 0], bounds[:, 1])
    return Chromosome(kids[0]), Chromosome(kids[1])


def mutate(
    c: Chromosome,
    rate: float,
    rng: np.random.Generator,
    bounds: np.ndarray,
    sigma: float = MUTATION_SIGMA,
) -> Chromosome:
    """Perturb each gene with probability ``rate`` by N(0, (sigma * range)^2), then clamp."""
    hit = rng.random(len(c.genes)) < rate
    noise = rng.normal(0.0, 1.0, size=len(c.genes)) * sigma * (bounds[:, 1] - bounds[:, 0])
    genes = np.where(hit, c.genes + noise, c.genes)
    return Chromosome(np.clip(genes, bounds[:, 0], bounds[:, 1]))


def _rank(pop: Sequence[Chromosome]) -> list[int]:
    # stable: equal fitness keeps population order
    return sorted(range(len(pop)), key=lambda i: pop[i].fitness)


class _Evaluator:
    """Memoised, optionally threaded fitness evaluation."""

    def __init__(self, p, sim_cfg, penalty, workers, plant=None):
        self.p = p
        self.sim_cfg = sim_cfg
        self.penalty = penalty
        self.workers = workers
        self.plant = plant
        self.cache: dict[bytes, float] = {}
        self.count = 0

    def _one(self, genes: np.ndarray) -> float:
        return closed_loop_ise(self.p, PidGains.from_array(genes), self.sim_cfg,
                               penalty=self.penalty, plant=self.plant)

    def __call__(self, pop: Sequence[Chromosome]) -> None:
        todo: dict[bytes, np.ndarray] = {}
        for c in pop:
            key = c.genes.tobytes()
            if c.fitness is None and key not in self.cache:
                todo.setdefault(key, c.genes)
        keys = list(todo)
        if self.workers > 1 and len(keys) > 1:
            with ThreadPoolExecutor(self.workers) as ex:
                values = list(ex.map(self._one, (todo[k] for k in keys)))
        else:
            values = [self._one(todo[k]) for k in keys]
        self.cache.update(zip(keys, values))
        self.count += len(keys)
        for c in pop:
            if c.fitness is None:
                c.fitness = self.cache[c.genes.tobytes()]


def _stalled(best_history: list[float], window: int, tol: float) -> bool:
    if len(best_history) <= window:
        return False
    old, new = best_history[-1 - window], best_history[-1]
    return old - new <= tol * abs(old)


def run_ga(
    ga_cfg: GaConfig,
    p: RobotParams,
    sim_cfg: SimConfig,
    *,
    plant: Optional[Callable] = None,
    on_generation: Optional[Callable[[int, float, float], None]] = None,
) -> GaReport:
    """Minimise closed-loop ISE over the six PID gains.

    Each generation: record (best, mean) fitness, test termination, then
    breed ``pop_size - elite_count`` offspring by tournament selection,
    crossover and mutation. The next population is the ``elite_count`` best
    parents plus the best of the remaining parents and offspring combined.
    """
    if ga_cfg.penalty_fitness <= max_achievable_ise(sim_cfg):
        raise InvalidConfig(
            f"penalty_fitness {ga_cfg.penalty_fitness:g} must exceed the largest achievable "
            f"ISE {max_achievable_ise(sim_cfg):g}", "penalty_fitness")
    rng = np.random.default_rng(ga_cfg.seed)
    bounds = ga_cfg.bounds
    evaluate = _Evaluator(p, sim_cfg, ga_cfg.penalty_fitness, ga_cfg.workers, plant)

    pop = init_population(ga_cfg, rng)
    evaluate(pop)
    best = min(pop, key=lambda c: c.fitness)
    history: list[tuple[float, float]] = []
    terminated_by = "max_generations"

    for gen in range(ga_cfg.max_generations):
        fit = np.array([c.fitness for c in pop])
        history.append((float(fit.min()), float(fit.mean())))
        gen_best = pop[int(np.argmin(fit))]
        if gen_best.fitness < best.fitness:
            best = gen_best
        if on_generation is not None:
            on_generation(gen, *history[-1])
        log.debug("generation %d best %.6g mean %.6g", gen, *history[-1])

        if gen + 1 >= ga_cfg.max_generations:
            break
        if _stalled([h[0] for h in history], ga_cfg.stall_generations, ga_cfg.stall_tolerance):
            terminated_by = "stall"
            break

        offspring: list[Chromosome] = []
        n_children = ga_cfg.pop_size - ga_cfg.elite_count
        while len(offspring) < n_children:
            a, b = select_parents(pop, rng)
            for child in crossover(a, b, ga_cfg.crossover_rate, rng, bounds):
                offspring.append(mutate(child, ga_cfg.mutation_rate, rng, bounds))
        offspring = offspring[:n_children]
        evaluate(offspring)

        order = _rank(pop)
        elites = [pop[i] for i in order[: ga_cfg.elite_count]]
        rest = [pop[i] for i in order[ga_cfg.elite_count:]] + offspring
        pop = elites + [rest[i] for i in _rank(rest)[:n_children]]

    return GaReport(
        best=Chromosome(best.genes.copy(), best.fitness),
        generations_run=len(history),
        history=np.array(history),
        terminated_by=terminated_by,
        evaluations=evaluate.count,
    )
