"""Experiment configuration, file formats and the simulate/tune/compare workflows.

Configuration files are INI-style, one section per component::

    [robot]     m1 m2 l1 l2 g b1 b2 coriolis
    [sim]       dt t_final q0 qd qdot0 blowup_limit torque_limit stride settle_band
    [ga]        pop_size max_generations crossover_rate mutation_rate gene_bounds
                elite_count seed stall_generations stall_tolerance penalty_fitness workers
    [baseline]  kp1 ki1 kd1 kp2 ki2 kd2
    [output]    dir

Pairs are written ``a, b``. ``torque_limit = none`` disables the clamp. Every
key is optional; an empty file yields the default two-link task.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .control import BASELINE_GAINS, GAIN_NAMES, PAPER_GA_GAINS, PidGains
from .dynamics import RobotParams
from .errors import ConfigParseError, ConfigValidationError, InvalidConfig
from .ga import GaConfig, run_ga
from .simulate import SimConfig, SimResult, simulate

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 2
EXIT_REGRESSION = 3

DEFAULT_OUTPUT_DIR = "armtune_out"


@dataclass(frozen=True)
class ExperimentConfig:
    robot: RobotParams = field(default_factory=RobotParams)
    sim: SimConfig = field(default_factory=SimConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    baseline_gains: PidGains = BASELINE_GAINS
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)


# ---------------------------------------------------------------------------
# value codecs

def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    return int(s)


def _pair(s: str) -> tuple[float, float]:
    parts = [x.strip() for x in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {s!r}")
    return float(parts[0]), float(parts[1])


def _optional_float(s: str) -> Optional[float]:
    return None if s.strip().lower() in ("none", "") else float(s)


def _bounds(s: str):
    vals = [float(x) for x in s.split(",")]
    if len(vals) == 2:
        return tuple(vals)
    if len(vals) == 12:
        return tuple(zip(vals[0::2], vals[1::2]))
    raise ValueError(f"gene_bounds needs 2 or 12 numbers, got {len(vals)}")


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        flat = []
        for x in v:
            flat.extend(x if isinstance(x, tuple) else (x,))
        return ", ".join(_fmt(float(x)) for x in flat)
    return str(v)


_ROBOT_KEYS = {"m1": _float, "m2": _float, "l1": _float, "l2": _float, "g": _float,
               "b1": _float, "b2": _float, "coriolis": str.strip}
_SIM_KEYS = {"dt": _float, "t_final": _float, "q0": _pair, "qd": _pair, "qdot0": _pair,
             "blowup_limit": _float, "torque_limit": _optional_float, "stride": _int,
             "settle_band": _float}
_GA_KEYS = {"pop_size": _int, "max_generations": _int, "crossover_rate": _float,
            "mutation_rate": _float, "gene_bounds": _bounds, "elite_count": _int,
            "seed": _int, "stall_generations": _int, "stall_tolerance": _float,
            "penalty_fitness": _float, "workers": _int}
_GAIN_KEYS = {name: _float for name in GAIN_NAMES}
_OUTPUT_KEYS = {"dir": str.strip}

SCHEMA = {"robot": _ROBOT_KEYS, "sim": _SIM_KEYS, "ga": _GA_KEYS,
          "baseline": _GAIN_KEYS, "output": _OUTPUT_KEYS}


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) to its 1-based line number, for diagnostics."""
    where = {}
    section = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where.setdefault((section, ""), n)
        elif section is not None:
            for sep in ("=", ":"):
                if sep in line:
                    where.setdefault((section, line.split(sep, 1)[0].strip()), n)
                    break
    return where


def loads_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError("key outside of any [section]", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigParseError("duplicate key", line=exc.lineno, key=exc.option) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigParseError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigParseError(f"cannot parse {line.strip()!r}", line=lineno) from None

    lines = _key_lines(text)
    values: dict[str, dict] = {name: {} for name in SCHEMA}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigParseError(f"unknown section [{section}]", line=lines.get((section, "")))
        keys = SCHEMA[section]
        for key, raw in parser.items(section):
            line = lines.get((section, key))
            if key not in keys:
                raise ConfigParseError(f"unknown key in [{section}]", line=line, key=key)
            try:
                values[section][key] = keys[key](raw)
            except ValueError as exc:
                raise ConfigParseError(str(exc), line=line, key=f"{section}.{key}") from None

    def build(section, cls):
        try:
            return cls(**values[section])
        except InvalidConfig as exc:
            name = f"{section}.{exc.field}" if exc.field else section
            raise ConfigValidationError(f"{name}: {exc}", field=exc.field) from None

    robot = build("robot", RobotParams)
    sim = build("sim", SimConfig)
    ga = build("ga", GaConfig)
    baseline = build("baseline", lambda **kw: dataclasses.replace(BASELINE_GAINS, **kw))
    out = Path(values["output"].get("dir", DEFAULT_OUTPUT_DIR))
    return ExperimentConfig(robot, sim, ga, baseline, out)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return loads_config(path.read_text(), source=str(path))


def dumps_config(cfg: ExperimentConfig) -> str:
    """Serialise every field, so the result reloads to an equal config."""
    parts = []
    for section, obj in (("robot", cfg.robot), ("sim", cfg.sim), ("ga", cfg.ga),
                         ("baseline", cfg.baseline_gains)):
        parts.append(f"[{section}]")
        for f in dataclasses.fields(obj):
            parts.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
        parts.append("")
    parts += ["[output]", f"dir = {cfg.output_dir}", ""]
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# gains files: six labelled values, one per line

def format_gains(g: PidGains) -> str:
    return "".join(f"{name} = {getattr(g, name)!r}\n" for name in GAIN_NAMES)


def write_gains(path, g: PidGains) -> None:
    Path(path).write_text(format_gains(g))


def read_gains(path) -> PidGains:
    found: dict[str, float] = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError("expected 'name = value'", line=n)
        name, value = (s.strip() for s in line.split("=", 1))
        if name not in GAIN_NAMES:
            raise ConfigParseError("unknown gain", line=n, key=name)
        if name in found:
            raise ConfigParseError("duplicate gain", line=n, key=name)
        try:
            found[name] = float(value)
        except ValueError:
            raise ConfigParseError(f"not a number: {value!r}", line=n, key=name) from None
    missing = [n for n in GAIN_NAMES if n not in found]
    if missing:
        raise ConfigParseError(f"missing gains {', '.join(missing)}")
    try:
        return PidGains(**found)
    except InvalidConfig as exc:
        raise ConfigValidationError(str(exc), field=exc.field) from None


def resolve_gains(cfg: ExperimentConfig, source: str) -> PidGains:
    """``baseline`` (from the config), ``paper`` (published GA set) or a gains file path."""
    if source == "baseline":
        return cfg.baseline_gains
    if source == "paper":
        return PAPER_GA_GAINS
    return read_gains(source)


# ---------------------------------------------------------------------------
# reports

def format_metrics(name: str, r: SimResult) -> str:
    rows = [("controller", name), ("diverged", str(r.diverged).lower()),
            ("ise", f"{r.ise:.17g}")]
    for j in range(2):
        rows += [
            (f"overshoot{j + 1}_pct", f"{r.overshoot[j]:.12g}"),
            (f"settling_time{j + 1}", f"{r.settling_time[j]:.12g}"),
            (f"steady_state_error{j + 1}", f"{r.steady_state_error[j]:.12g}"),
        ]
    rows.append(("samples", str(len(r.t))))
    return "".join(f"{k} = {v}\n" for k, v in rows)


METRICS = (
    ("ise", lambda r: r.ise),
    ("overshoot1_pct", lambda r: r.overshoot[0]),
    ("overshoot2_pct", lambda r: r.overshoot[1]),
    ("settling_time1", lambda r: r.settling_time[0]),
    ("settling_time2", lambda r: r.settling_time[1]),
    ("steady_state_error1", lambda r: r.steady_state_error[0]),
    ("steady_state_error2", lambda r: r.steady_state_error[1]),
)


@dataclass
class ComparisonReport:
    """Metric-by-metric comparison; lower wins everywhere."""

    baseline: SimResult
    tuned: SimResult
    names: tuple[str, str] = ("baseline", "ga-tuned")

    def rows(self):
        for metric, get in METRICS:
            a, b = get(self.baseline), get(self.tuned)
            if a == b or (math.isnan(a) and math.isnan(b)):
                winner = "tie"
            elif math.isnan(b) or a < b:
                winner = self.names[0]
            else:
                winner = self.names[1]
            yield metric, a, b, winner

    def winner(self, metric: str) -> str:
        return next(w for m, _, _, w in self.rows() if m == metric)

    def to_text(self) -> str:
        head = f"{'metric':<22}{self.names[0]:>24}{self.names[1]:>24}  winner"
        lines = [head, "-" * len(head)]
        for metric, a, b, w in self.rows():
            lines.append(f"{metric:<22}{a:>24.12g}{b:>24.12g}  {w}")
        lines.append("")
        lines.append(f"ise_winner = {self.winner('ise')}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# workflows; each returns a process exit status

def _outdir(cfg: ExperimentConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def cmd_simulate(cfg: ExperimentConfig, gains_source: str = "baseline") -> int:
    gains = resolve_gains(cfg, gains_source)
    out = _outdir(cfg)
    result = simulate(cfg.robot, gains, cfg.sim, penalty=cfg.ga.penalty_fitness)
    result.to_csv(out / "trajectory.csv")
    (out / "metrics.txt").write_text(format_metrics(gains_source, result))
    log.info("ise %.6g, diverged=%s", result.ise, result.diverged)
    return EXIT_DIVERGED if result.diverged else EXIT_OK


def _tune(cfg: ExperimentConfig):
    out = _outdir(cfg)

    def progress(gen, best, mean):
        if gen % 10 == 0:
            log.info("generation %4d  best %.6g  mean %.6g", gen, best, mean)

    report = run_ga(cfg.ga, cfg.robot, cfg.sim, on_generation=progress)
    (out / "ga_history.csv").write_text(report.history_csv())
    write_gains(out / "best_gains", report.best.gains())
    (out / "tune_summary.txt").write_text(report.summary())
    log.info("stopped by %s after %d generations, best ISE %.6g",
             report.terminated_by, report.generations_run, report.best.fitness)
    return report


def cmd_tune(cfg: ExperimentConfig) -> int:
    """Run the GA and write ``ga_history.csv``, ``best_gains`` and ``tune_summary.txt``."""
    _tune(cfg)
    return EXIT_OK


def cmd_compare(cfg: ExperimentConfig, gains_source: Optional[str] = None) -> int:
    """Simulate baseline and tuned gains on one SimConfig; exit 3 unless tuned ISE is lower.

    Without ``gains_source`` the GA runs first and its best gains are used.
    """
    tuned_gains = _tune(cfg).best.gains() if gains_source is None else resolve_gains(cfg, gains_source)
    out = _outdir(cfg)
    sim = cfg.sim
    base = simulate(cfg.robot, cfg.baseline_gains, sim, penalty=cfg.ga.penalty_fitness)
    tuned = simulate(cfg.robot, tuned_gains, sim, penalty=cfg.ga.penalty_fitness)
    base.to_csv(out / "trajectory_baseline.csv")
    tuned.to_csv(out / "trajectory_tuned.csv")
    report = ComparisonReport(base, tuned)
    text = report.to_text()
    (out / "comparison.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if tuned.ise < base.ise else EXIT_REGRESSION


def with_overrides(cfg: ExperimentConfig, seed: Optional[int] = None,
                   out: Optional[str] = None, workers: Optional[int] = None) -> ExperimentConfig:
    if seed is not None:
        cfg = dataclasses.replace(cfg, ga=dataclasses.replace(cfg.ga, seed=seed))
    if workers is not None:
        cfg = dataclasses.replace(cfg, ga=dataclasses.replace(cfg.ga, workers=workers))
    if out is not None:
        cfg = dataclasses.replace(cfg, output_dir=Path(out))
    return cfg
