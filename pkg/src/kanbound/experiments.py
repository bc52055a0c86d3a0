"""Synthetic setups, feature-CSV ingestion and the instrumented training loop."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit, log_softmax, softmax

from .complexity import COMPLEXITY_MODES, complexity_report, normalize_series
from .network import ForwardTape, init_network, network_backward, network_forward, save_checkpoint, sgd_step
from .numeric import frobenius_norm, make_rng, sample_standard_normal, split_rng
from .spline import LIPSCHITZ_MODES, SplineSpec

log = logging.getLogger(__name__)

SETUPS = ("i", "ii", "iii", "iv", "csv")
SETUP_INPUT_DIM = {"i": 4, "ii": 100, "iii": 4, "iv": 100}
NOISE_MEAN = -math.log(1.04) / 2
NOISE_VAR = math.log(1.04)

BASE_COLUMNS = ["epoch", "train_loss", "test_loss", "excess_loss", "complexity_raw",
                "complexity_normalized", "rho_prod", "sum_BC23", "D"]


class TrainingDivergedError(RuntimeError):
    pass


class CsvFormatError(ValueError):
    pass


# ---------------------------------------------------------------- targets

def f1(x) -> np.ndarray:
    """exp(½{sin(π(x1²+x2²)) + sin(π(x3²+x4²))}) on the last axis (length 4)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != 4:
        raise ValueError(f"f1 takes 4 inputs, got {x.shape[-1]}")
    a = np.sin(np.pi * (x[..., 0] ** 2 + x[..., 1] ** 2))
    b = np.sin(np.pi * (x[..., 2] ** 2 + x[..., 3] ** 2))
    return np.exp(0.5 * (a + b))


def f2(x) -> np.ndarray:
    """exp((1/100) Σ sin²(π x_i / 2)) on the last axis (length 100)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != 100:
        raise ValueError(f"f2 takes 100 inputs, got {x.shape[-1]}")
    return np.exp(np.mean(np.sin(np.pi * x / 2) ** 2, axis=-1))


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    task: str  # regression | binary | multiclass

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != len(self.y):
            raise ValueError("X must be (n, d) with one target per row")
        if self.task not in ("regression", "binary", "multiclass"):
            raise ValueError(f"unknown task {self.task!r}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1 if self.task == "multiclass" else 1


def draw_targets(setup: str, X, rng) -> tuple[np.ndarray, str]:
    """Responses for inputs ``X`` under setups (i)–(iv)."""
    X = np.asarray(X, dtype=np.float64)
    rng = make_rng(rng)
    f = f1 if setup in ("i", "iii") else f2
    fx = f(X)
    if setup in ("i", "ii"):
        eps = NOISE_MEAN + math.sqrt(NOISE_VAR) * sample_standard_normal(rng, X.shape[0])
        return fx * np.exp(eps), "regression"
    if setup in ("iii", "iv"):
        p1 = 1.0 / (1.0 + fx)
        return (rng.random(X.shape[0]) < p1).astype(np.float64), "binary"
    raise ValueError(f"unknown synthetic setup {setup!r}")


def make_dataset(setup: str, n: int, seed) -> Dataset:
    """n samples with x ~ Unif(-1, 1)^d and targets from :func:`draw_targets`."""
    if n < 1:
        raise ValueError("n must be positive")
    if setup not in SETUP_INPUT_DIM:
        raise ValueError(f"unknown synthetic setup {setup!r}")
    rng = make_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, SETUP_INPUT_DIM[setup]))
    y, task = draw_targets(setup, X, rng)
    return Dataset(X, y, task)


# ---------------------------------------------------------------- CSV features

def load_feature_csv(path, label_column: str) -> Dataset:
    """Read a header-first numeric CSV; all columns except ``label_column`` are features.

    Integer labels give a multiclass task, anything else regression.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise CsvFormatError(f"{path}: no label column {label_column!r} in header {header}")
        li = header.index(label_column)
        rows, labels = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"{path}, line {line}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvFormatError(f"{path}, line {line}: non-numeric value {cell!r} in column {name!r}") from None
                if not math.isfinite(v):
                    raise CsvFormatError(f"{path}, line {line}: non-finite value {cell!r} in column {name!r}")
                vals.append(v)
            labels.append(vals.pop(li))
            rows.append(vals)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if np.all(y == np.round(y)) and np.all(y >= 0):
        return Dataset(X, y, "multiclass")
    return Dataset(X, y, "regression")


def save_feature_csv(data: Dataset, path, label_column: str = "label") -> None:
    """Inverse of :func:`load_feature_csv`; floats use shortest round-trip repr."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(data.X.shape[1])] + [label_column])
        for xi, yi in zip(data.X, data.y):
            label = int(yi) if data.task == "multiclass" else repr(float(yi))
            w.writerow([repr(float(v)) for v in xi] + [label])


# ---------------------------------------------------------------- losses

def loss_and_grad(task: str, pred, y) -> tuple[float, np.ndarray]:
    """Mean loss over rows and its gradient with respect to ``pred``.

    regression: squared error; binary: sigmoid cross-entropy on one logit;
    multiclass: softmax cross-entropy.
    """
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = pred.shape[0]
    if task == "regression":
        r = pred[:, 0] - y
        return float(np.mean(r * r)), (2.0 * r / n)[:, None]
    if task == "binary":
        z = pred[:, 0]
        # log(1 + e^z) - y z, computed stably
        loss = np.logaddexp(0.0, z) - y * z
        return float(np.mean(loss)), ((expit(z) - y) / n)[:, None]
    if task == "multiclass":
        idx = y.astype(int)
        lp = log_softmax(pred, axis=1)
        loss = -lp[np.arange(n), idx]
        g = softmax(pred, axis=1)
        g[np.arange(n), idx] -= 1.0
        return float(np.mean(loss)), g / n
    raise ValueError(f"unknown task {task!r}")


# ---------------------------------------------------------------- configuration

@dataclass
class ExperimentConfig:
    setup: str = "i"
    shape: list[int] = field(default_factory=lambda: [4, 8, 8, 1])
    spline: dict = field(default_factory=lambda: {"p": 3, "G": 5, "a": -1.0, "b": 1.0})
    lr: float = 0.05
    momentum: float = 0.0
    batch_size: int = 64
    epochs: int = 200
    dropout_rate: float = 0.0
    n_train: int = 2000
    n_test: int = 2000
    seed: int = 7
    lipschitz_mode: str = "grid"
    complexity_mode: str = "section3"
    csv_path: str | None = None
    plot_path: str | None = None
    checkpoint_path: str | None = None
    train_csv: str | None = None
    test_csv: str | None = None
    label_column: str = "label"

    def __post_init__(self):
        if self.setup not in SETUPS:
            raise ValueError(f"setup must be one of {SETUPS}")
        if self.lipschitz_mode not in LIPSCHITZ_MODES:
            raise ValueError(f"lipschitz_mode must be one of {LIPSCHITZ_MODES}")
        if self.complexity_mode not in COMPLEXITY_MODES:
            raise ValueError(f"complexity_mode must be one of {COMPLEXITY_MODES}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be positive and epochs nonnegative")
        if self.setup in SETUP_INPUT_DIM:
            if self.shape[0] != SETUP_INPUT_DIM[self.setup] or self.shape[-1] != 1:
                raise ValueError(
                    f"setup {self.setup} needs shape [{SETUP_INPUT_DIM[self.setup]}, ..., 1], got {self.shape}")
        elif not self.train_csv or not self.test_csv:
            raise ValueError("setup 'csv' needs train_csv and test_csv")

    @property
    def spline_spec(self) -> SplineSpec:
        s = self.spline
        return SplineSpec(int(s.get("p", 3)), float(s.get("a", -1.0)), float(s.get("b", 1.0)), int(s.get("G", 5)))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_loss: float
    excess_loss: float
    complexity_raw: float
    complexity_normalized: float
    rho_prod: float
    sum_BC23: float
    D: float
    B: list[float]
    c: list[float]
    rho: list[float]

    def row(self) -> list:
        out = [self.epoch, self.train_loss, self.test_loss, self.excess_loss, self.complexity_raw,
               self.complexity_normalized, self.rho_prod, self.sum_BC23, self.D]
        for b, c, r in zip(self.B, self.c, self.rho):
            out += [b, c, r]
        return out


def csv_columns(depth: int) -> list[str]:
    cols = list(BASE_COLUMNS)
    for l in range(1, depth + 1):
        cols += [f"B_{l}", f"c_{l}", f"rho_{l}"]
    return cols


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def write_records_csv(records: Sequence[EpochRecord], path, depth: int) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_columns(depth))
        for r in records:
            w.writerow([_fmt(v) for v in r.row()])


def write_plot_script(csv_path, plot_path, title: str = "excess loss vs complexity") -> None:
    """Standalone gnuplot script plotting excess loss and normalized complexity per epoch."""
    script = f"""set datafile separator ','
set key autotitle columnhead
set title '{title}'
set xlabel 'epoch'
set terminal pngcairo size 900,600
set output '{Path(plot_path).with_suffix('.png').name}'
plot '{Path(csv_path).name}' using 'epoch':'excess_loss' with lines lw 2, \\
     '' using 'epoch':'complexity_normalized' with lines lw 2
"""
    Path(plot_path).write_text(script)


# ---------------------------------------------------------------- training

def load_data(config: ExperimentConfig) -> tuple[Dataset, Dataset]:
    if config.setup == "csv":
        train = load_feature_csv(config.train_csv, config.label_column)
        test = load_feature_csv(config.test_csv, config.label_column)
    else:
        rng_train, rng_test = split_rng(config.seed, 2)
        train = make_dataset(config.setup, config.n_train, rng_train)
        test = make_dataset(config.setup, config.n_test, rng_test)
    return train, test


def _check_shape(config: ExperimentConfig, train: Dataset) -> None:
    if config.shape[0] != train.X.shape[1]:
        raise ValueError(f"shape[0]={config.shape[0]} but data has {train.X.shape[1]} features")
    want = train.n_classes if train.task == "multiclass" else 1
    if config.shape[-1] != want:
        raise ValueError(f"shape[-1]={config.shape[-1]} but task needs {want} outputs")


def run_experiment(config: ExperimentConfig, data: tuple[Dataset, Dataset] | None = None) -> list[EpochRecord]:
    """Minibatch SGD with an end-of-epoch complexity snapshot.

    Writes the per-epoch CSV, a gnuplot script and a final checkpoint when
    the corresponding paths are configured. ``data`` overrides data loading.
    """
    train, test = data if data is not None else load_data(config)
    _check_shape(config, train)
    # stream 0/1 are the data sets; 2 initializes, 3 shuffles and drops out
    _, _, rng_init, rng_train = split_rng(config.seed, 4)
    net = init_network(config.shape, config.spline_spec, rng_init)
    D = frobenius_norm(train.X)
    velocity = None
    records: list[EpochRecord] = []
    raw: list[float] = []
    n = train.n
    tape = ForwardTape()

    for epoch in range(1, config.epochs + 1):
        order = rng_train.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            pred = network_forward(net, train.X[idx], "train", config.dropout_rate, rng_train, tape)
            _, g = loss_and_grad(train.task, pred, train.y[idx])
            grads = network_backward(net, tape, g)
            velocity = sgd_step(net, grads, config.lr, config.momentum, velocity)

        train_loss, _ = loss_and_grad(train.task, network_forward(net, train.X), train.y)
        test_loss, _ = loss_and_grad(test.task, network_forward(net, test.X), test.y)
        if not (math.isfinite(train_loss) and math.isfinite(test_loss)):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch} (train {train_loss}, test {test_loss})")
        rep = complexity_report(net, D, config.lipschitz_mode)
        value = rep.measure if config.complexity_mode == "section3" else rep.r_kan
        raw.append(value)
        records.append(EpochRecord(
            epoch=epoch, train_loss=train_loss, test_loss=test_loss,
            excess_loss=test_loss - train_loss, complexity_raw=value,
            complexity_normalized=0.0, rho_prod=rep.rho_prod, sum_BC23=rep.sum_BC23, D=D,
            B=[s.B for s in rep.layer_stats], c=[s.c for s in rep.layer_stats],
            rho=[s.rho for s in rep.layer_stats],
        ))
        log.debug("epoch %d train %.6g test %.6g complexity %.6g", epoch, train_loss, test_loss, value)

    if records:
        try:
            norm = normalize_series(raw, [r.excess_loss for r in records])
        except ValueError:
            norm = np.zeros(len(records))
        for r, v in zip(records, norm):
            r.complexity_normalized = float(v)

    if config.csv_path:
        write_records_csv(records, config.csv_path, net.depth)
        if config.plot_path:
            write_plot_script(config.csv_path, config.plot_path)
    if config.checkpoint_path:
        save_checkpoint(net, config.checkpoint_path, seed=config.seed, epoch=config.epochs)
    return records


@dataclass
class DropoutComparison:
    ratio: np.ndarray
    regularized: list[EpochRecord]
    baseline: list[EpochRecord]


def run_dropout_comparison(config: ExperimentConfig, ratio_csv: str | None = None) -> DropoutComparison:
    """Train with ``config.dropout_rate`` and without dropout; compare complexities per epoch."""
    data = load_data(config)
    base_paths = dict(csv_path=None, plot_path=None, checkpoint_path=None)
    reg = run_experiment(dataclasses.replace(config, **base_paths), data)
    base = run_experiment(dataclasses.replace(config, dropout_rate=0.0, **base_paths), data)
    ratio = np.array([a.complexity_raw / b.complexity_raw for a, b in zip(reg, base)])
    path = ratio_csv or config.csv_path
    if path:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "complexity_ratio", "excess_loss_regularized", "excess_loss_baseline",
                        "complexity_regularized", "complexity_baseline"])
            for a, b, q in zip(reg, base, ratio):
                w.writerow([a.epoch, _fmt(q), _fmt(a.excess_loss), _fmt(b.excess_loss),
                            _fmt(a.complexity_raw), _fmt(b.complexity_raw)])
    return DropoutComparison(ratio, reg, base)
