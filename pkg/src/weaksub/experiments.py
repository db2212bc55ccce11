"""Synthetic distributed-regression experiments, metrics and CSV output."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .concave import LogisticObjective, SupportFunction, load_labeled_csv
from .errors import ConfigError, UndefinedMetricError
from .greedy import RandomSource, distributed, greedy, partition_uniform, stochastic_greedy
from .regression import (R2Function, RegressionInstance, fit_coefficients, load_csv, normalize,
                         omp_select)

ALGORITHMS = ("greedy-fs", "omp", "stochastic-greedy")
PROBLEMS = ("regression", "logistic")


@dataclass
class ExperimentConfig:
    problem: str = "regression"
    n: int = 800
    d: int = 1000
    s: int = 100
    alpha: float = 0.5
    noise: float = 0.01
    l: int = 10
    k: list[int] = field(default_factory=lambda: list(range(1, 16)))
    delta: list[float] = field(default_factory=lambda: [0.1])
    sweep: str = "k"
    algorithms: list[str] = field(default_factory=lambda: ["greedy-fs", "omp"])
    seed: int = 0
    iterations: int = 10
    input: str | None = None
    balanced: bool = False
    threads: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        for name in ("n", "d", "s", "l", "iterations", "threads"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {getattr(self, name)!r}")
        if self.s > self.d:
            raise ConfigError(f"true sparsity s={self.s} exceeds d={self.d}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.noise < 0:
            raise ConfigError("noise must be nonnegative")
        if not self.k or any(int(k) != k or k < 1 for k in self.k):
            raise ConfigError(f"k sweep must hold positive integers, got {self.k}")
        if not self.delta or any(not 0.0 < x < 1.0 for x in self.delta):
            raise ConfigError(f"delta sweep values must lie in (0, 1), got {self.delta}")
        if self.sweep not in ("k", "delta"):
            raise ConfigError(f"sweep must be 'k' or 'delta', got {self.sweep!r}")
        if not self.algorithms:
            raise ConfigError("no algorithms requested")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        if self.problem == "logistic" and "omp" in self.algorithms:
            raise ConfigError("omp is only defined for the regression problem")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self


_LISTS = {"k": int, "delta": float, "algorithms": str}


def _parse_list(key: str, text: str) -> list:
    cast = _LISTS[key]
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if cast is int and ".." in tok:
            lo, hi = tok.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(cast(tok))
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment.

    Lists are comma separated and integer lists accept ``a..b`` ranges,
    e.g. ``k = 1..15``.
    """
    known = {f.name: f for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _LISTS:
                values[key] = _parse_list(key, val)
            elif key == "balanced":
                if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(val)
                values[key] = val.lower() in ("true", "1", "yes")
            elif key in ("problem", "sweep", "input"):
                values[key] = val
            elif key in ("alpha", "noise"):
                values[key] = float(val)
            else:
                values[key] = int(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


@dataclass
class Dataset:
    problem: str
    train: object
    test: object
    beta: np.ndarray | None
    support: list[int] | None

    @property
    def d(self) -> int:
        return self.train.d


def _ar_design(n: int, d: int, alpha: float, gen: np.random.Generator) -> np.ndarray:
    X = np.empty((n, d))
    X[:, 0] = gen.standard_normal(n)
    rho = math.sqrt(1.0 - alpha**2)
    eps = alpha * gen.standard_normal((n, d - 1))
    for t in range(d - 1):
        X[:, t + 1] = rho * X[:, t] + eps[:, t]
    return X


def _sparse_beta(config: ExperimentConfig, gen: np.random.Generator) -> tuple[np.ndarray, list[int]]:
    d, n, s = config.d, config.n, config.s
    support = sorted(int(j) for j in gen.choice(d, size=s, replace=False))
    signs = np.where(gen.random(s) < 0.5, 1.0, -1.0)
    beta = np.zeros(d)
    beta[support] = signs * (5.0 * math.sqrt(math.log(d) / n) + gen.standard_normal(s))
    return beta, support


def generate_synthetic(config: ExperimentConfig, rng=None):
    """Draw ``(train, test, beta, support)``.

    Rows of ``X`` follow an AR(1) process across features with innovation
    variance ``alpha**2``; ``y = X beta + z`` with ``Var(z) = noise * ||X beta||``.
    Train and test share ``beta`` and are normalized independently.
    For ``problem = logistic`` the response is replaced by labels drawn
    from the logistic model and train/test are :class:`LogisticObjective`.
    """
    config.validate()
    gen = (rng if isinstance(rng, RandomSource) else RandomSource(config.seed if rng is None else rng)).generator
    beta, support = _sparse_beta(config, gen)
    out = []
    for _ in range(2):
        X = _ar_design(config.n, config.d, config.alpha, gen)
        signal = X @ beta
        if config.problem == "logistic":
            p = 1.0 / (1.0 + np.exp(-signal))
            labels = np.where(gen.random(config.n) < p, 1.0, -1.0)
            out.append(LogisticObjective(X, labels))
        else:
            sd = math.sqrt(config.noise * float(np.linalg.norm(signal)))
            y = signal + sd * gen.standard_normal(config.n)
            out.append(RegressionInstance(X, y))
    if config.problem == "regression":
        out = [normalize(inst) for inst in out]
    return out[0], out[1], beta, support


def load_dataset(config: ExperimentConfig) -> Dataset:
    """Synthesize, or read ``config.input`` and split its rows in half (train first)."""
    if config.input is None:
        train, test, beta, support = generate_synthetic(config, RandomSource(config.seed))
        return Dataset(config.problem, train, test, beta, support)
    if config.problem == "regression":
        raw = load_csv(config.input)
        half = raw.n // 2
        if half < 1:
            raise ConfigError(f"{config.input}: need at least two rows")
        train = normalize(RegressionInstance(raw.X[:half], raw.y[:half], names=raw.names))
        test = normalize(RegressionInstance(raw.X[half:], raw.y[half:], names=raw.names))
    else:
        Z, labels, _ = load_labeled_csv(config.input)
        half = len(labels) // 2
        train, test = LogisticObjective(Z[:half], labels[:half]), LogisticObjective(Z[half:], labels[half:])
    if max(config.k) > train.d:
        raise ConfigError(f"k={max(config.k)} exceeds the {train.d} features of {config.input}")
    return Dataset(config.problem, train, test, None, None)


def auroc(scores: Sequence[float], support: Sequence[int]) -> float:
    """Probability that a support feature outscores a non-support one (ties count 1/2)."""
    scores = np.asarray(scores, dtype=float)
    pos = np.zeros(len(scores), dtype=bool)
    pos[list(support)] = True
    if pos.all() or not pos.any():
        raise UndefinedMetricError("AUROC needs at least one positive and one negative feature")
    p, q = scores[pos], scores[~pos]
    wins = (p[:, None] > q[None, :]).sum() + 0.5 * (p[:, None] == q[None, :]).sum()
    return float(wins / (len(p) * len(q)))


def selection_scores(selected: Sequence[int], d: int) -> np.ndarray:
    """Earlier picks score higher; unselected features share the lowest score 0."""
    scores = np.zeros(d)
    for rank, j in enumerate(selected):
        scores[j] = len(selected) - rank
    return scores


@dataclass
class MetricsRow:
    algorithm: str
    sweep: float
    loglik: float
    test_r2: float
    auroc: float
    recovery: float
    time_s: float
    evals: float
    loglik_se: float = 0.0
    test_r2_se: float = 0.0
    auroc_se: float = 0.0
    recovery_se: float = 0.0
    time_s_se: float = 0.0
    evals_se: float = 0.0


COLUMNS = [f.name for f in fields(MetricsRow)]
_METRICS = ["loglik", "test_r2", "auroc", "recovery", "time_s", "evals"]


@dataclass
class RunRecord:
    algorithm: str
    sweep: float
    iteration: int
    selected: list[int]
    loglik: float
    test_r2: float
    auroc: float
    recovery: float
    time_s: float
    evals: int


def _oracle(data: Dataset):
    if data.problem == "regression":
        return R2Function(data.train)
    return SupportFunction(data.train)


def _solver(name: str, delta: float | None):
    if name == "greedy-fs":
        return lambda oracle, cands, k, rng: greedy(oracle, cands, k)
    if name == "stochastic-greedy":
        return lambda oracle, cands, k, rng: stochastic_greedy(oracle, cands, k, delta, rng)
    if name == "omp":
        return lambda oracle, cands, k, rng: omp_select(oracle.instance, k, cands)
    raise ConfigError(f"unknown algorithm {name!r}")


def _test_score(data: Dataset, selected: list[int]) -> float:
    if data.problem == "regression":
        train, test = data.train, data.test
        kept, beta = fit_coefficients(train, selected)
        coef = train.raw_coefficients(kept, beta)
        X_raw = test.X * test.col_scale
        y_raw = test.y * test.y_scale
        resid = y_raw - X_raw @ coef
        return float(1.0 - resid @ resid / (y_raw @ y_raw))
    beta = data.train.solve_support(selected).beta
    null = data.test.value(np.zeros(data.d))
    return (data.test.value(beta) - null) / -null


def _loglik(data: Dataset, value: float) -> float:
    if data.problem == "regression":
        return value
    # fraction of null deviance explained; the saturated model has log-likelihood 0
    return value / -data.train.value(np.zeros(data.d))


def _measure(data: Dataset, algorithm: str, sweep: float, iteration: int, selected, value, elapsed, evals):
    if data.support is not None:
        auc = auroc(selection_scores(selected, data.d), data.support)
        rec = 100.0 * len(set(selected) & set(data.support)) / len(data.support)
    else:
        auc = rec = math.nan
    return RunRecord(algorithm, float(sweep), iteration, list(selected), _loglik(data, value),
                     _test_score(data, list(selected)), auc, rec, elapsed, int(evals))


def _jobs(config: ExperimentConfig):
    """(algorithm, sweep value, k, delta) for every row of the output table."""
    jobs = []
    for alg in config.algorithms:
        if config.sweep == "k":
            for k in config.k:
                jobs.append((alg, float(k), k, config.delta[0]))
        elif alg == "stochastic-greedy":
            for delta in config.delta:
                jobs.append((alg, float(delta), max(config.k), delta))
        else:
            # deterministic algorithms appear once, as the delta -> 0 reference
            jobs.append((alg, 0.0, max(config.k), None))
    return jobs


def _run_iteration(config: ExperimentConfig, data: Dataset, oracle, iteration: int,
                   source: RandomSource) -> list[RunRecord]:
    part_src, alg_src = source.spawn(2)
    cands = list(range(data.d))
    # one partition per iteration, shared by every algorithm and sweep value
    parts = partition_uniform(cands, config.l, part_src, balanced=config.balanced) if config.l > 1 else None
    jobs = _jobs(config)
    streams = alg_src.spawn(len(jobs))
    records = []
    for (alg, sweep, k, delta), stream in zip(jobs, streams):
        if k > data.d:
            raise ConfigError(f"k={k} exceeds d={data.d}")
        solver = _solver(alg, delta)
        start = time.perf_counter()
        if parts is None:
            trace = solver(oracle, cands, k, stream)
            selected, value, evals = trace.selected, trace.value, trace.evaluations
        else:
            res = distributed(oracle, cands, config.l, k, stream, solver=solver, parts=parts)
            selected, value, evals = res.selected, res.value, res.evaluations
        elapsed = time.perf_counter() - start
        records.append(_measure(data, alg, sweep, iteration, selected, value, elapsed, evals))
    return records


def run_records(config: ExperimentConfig, data: Dataset | None = None, threads: int | None = None) -> list[RunRecord]:
    """Every (iteration, algorithm, sweep value) run, in a fixed order."""
    config.validate()
    data = data if data is not None else load_dataset(config)
    if config.l > data.d:
        raise ConfigError(f"l={config.l} partitions exceed d={data.d}")
    oracle = _oracle(data)
    sources = RandomSource(config.seed).spawn(config.iterations + 1)[1:]
    threads = config.threads if threads is None else threads
    work = [(it, src) for it, src in enumerate(sources)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda a: _run_iteration(config, data, oracle, *a), work))
    else:
        chunks = [_run_iteration(config, data, oracle, *a) for a in work]
    return [r for chunk in chunks for r in chunk]


def aggregate(records: list[RunRecord]) -> list[MetricsRow]:
    groups: dict[tuple[str, float], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.algorithm, r.sweep), []).append(r)
    rows = []
    for (alg, sweep), recs in sorted(groups.items()):
        means, ses = {}, {}
        for m in _METRICS:
            vals = np.array([getattr(r, m) for r in recs], dtype=float)
            means[m] = float(np.mean(vals))
            ses[m + "_se"] = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rows.append(MetricsRow(alg, sweep, **means, **ses))
    return rows


def run_experiment(config: ExperimentConfig, data: Dataset | None = None, threads: int | None = None) -> list[MetricsRow]:
    """Run the configured sweep and average each (algorithm, sweep value) over iterations."""
    return aggregate(run_records(config, data, threads))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_metrics_csv(rows: Sequence[MetricsRow], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])


def read_metrics_csv(path) -> list[MetricsRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != COLUMNS:
            raise ConfigError(f"{path}: unexpected header {header}")
        return [MetricsRow(r[0], *(float(v) for v in r[1:])) for r in reader if r]


PLOT_SCRIPT = '''"""Four-panel plot of metrics.csv: log-likelihood, test R^2, AUROC, support recovery."""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
src = Path(sys.argv[1]) if len(sys.argv) > 1 else here / "metrics.csv"
series = defaultdict(list)
with src.open(newline="") as fh:
    for row in csv.DictReader(fh):
        series[row["algorithm"]].append({k: (v if k == "algorithm" else float(v)) for k, v in row.items()})

panels = [("loglik", "normalized log likelihood"), ("test_r2", "test R^2"),
          ("auroc", "area under ROC"), ("recovery", "% true support recovered")]
fig, axes = plt.subplots(2, 2, figsize=(10, 8))
for ax, (key, label) in zip(axes.ravel(), panels):
    for alg, rows in sorted(series.items()):
        rows = sorted(rows, key=lambda r: r["sweep"])
        ax.errorbar([r["sweep"] for r in rows], [r[key] for r in rows],
                    yerr=[r[key + "_se"] for r in rows], marker="o", capsize=2, label=alg)
    ax.set_xlabel("sweep value")
    ax.set_ylabel(label)
    ax.grid(alpha=0.3)
axes[0, 0].legend()
fig.tight_layout()
out = src.with_suffix(".png")
fig.savefig(out, dpi=120)
print(out)
'''


def emit_outputs(rows: Sequence[MetricsRow], path) -> tuple[Path, Path, list[str]]:
    """Write ``metrics.csv`` and ``plot_metrics.py`` into directory ``path``.

    Returns both paths and a list of ``"algorithm@sweep:metric"`` entries
    whose value is NaN (written literally as ``nan``).
    """
    if not rows:
        raise ConfigError("no metrics rows to write")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "metrics.csv"
    plot_path = out / "plot_metrics.py"
    write_metrics_csv(rows, csv_path)
    plot_path.write_text(PLOT_SCRIPT)
    flagged = [f"{r.algorithm}@{r.sweep:g}:{c}" for r in rows for c in COLUMNS[2:]
               if math.isnan(getattr(r, c))]
    return csv_path, plot_path, flagged
