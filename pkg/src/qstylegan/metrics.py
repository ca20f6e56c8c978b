"""Distribution metrics, seed aggregation and direction-aware Z0 significance."""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ParseError, UndefinedSignificanceError


class Direction(str, enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    @classmethod
    def parse(cls, token: str) -> "Direction":
        t = str(token).strip().lower()
        if t in ("max", "maximize", "maximise"):
            return cls.MAXIMIZE
        if t in ("min", "minimize", "minimise"):
            return cls.MINIMIZE
        raise ValueError(f"unknown direction {token!r}")


@dataclass(frozen=True)
class MetricRecord:
    name: str
    mean: float
    std: float
    direction: Direction = Direction.MAXIMIZE

    def __post_init__(self):
        if not self.std >= 0:
            raise ArgumentError(f"{self.name}: std must be >= 0, got {self.std}")
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction.parse(self.direction))


@dataclass
class ScenarioTable:
    scenario: str
    records: list
    printed_z0: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [r.name for r in self.records]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ArgumentError(f"duplicate metric names: {', '.join(dupes)}")

    def by_name(self) -> dict:
        return {r.name: r for r in self.records}

    def names(self) -> list:
        return [r.name for r in self.records]


# ---------------------------------------------------------------------------
# Wasserstein


def wasserstein_1d(a, b) -> float:
    """Order-1 Wasserstein distance between two empirical samples.

    Integrates |F_a - F_b| exactly over the merged support, which equals the
    quantile-function integral for any pair of sample sizes.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ArgumentError("wasserstein_1d needs two non-empty samples")
    if a.size == b.size:
        return float(np.mean(np.abs(a - b)))
    support = np.sort(np.concatenate([a, b]))
    widths = np.diff(support)
    cdf_a = np.searchsorted(a, support[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, support[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * widths))


def per_dimension_wasserstein(x, y) -> np.ndarray:
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    if x.shape[1] != y.shape[1]:
        raise ArgumentError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return np.array([wasserstein_1d(x[:, j], y[:, j]) for j in range(x.shape[1])])


# ---------------------------------------------------------------------------
# Z0


def z0_metric(ref: MetricRecord, test: MetricRecord) -> float:
    """Standardized mean difference, signed so that positive means ``test`` improves on ``ref``."""
    if ref.direction is not test.direction:
        raise ArgumentError(f"{ref.name}: direction mismatch ({ref.direction.value} vs {test.direction.value})")
    spread = math.hypot(ref.std, test.std)
    if spread == 0:
        raise UndefinedSignificanceError(f"{ref.name}: both standard deviations are zero")
    if ref.direction is Direction.MAXIMIZE:
        delta = test.mean - ref.mean
    else:
        delta = ref.mean - test.mean
    return delta / spread


def _check_same_metrics(refs: ScenarioTable, tests: ScenarioTable):
    a, b = set(refs.names()), set(tests.names())
    if a != b:
        parts = []
        if a - b:
            parts.append(f"missing in {tests.scenario!r}: {', '.join(sorted(a - b))}")
        if b - a:
            parts.append(f"missing in {refs.scenario!r}: {', '.join(sorted(b - a))}")
        raise ArgumentError("metric sets differ; " + "; ".join(parts))


def z0_per_metric(refs: ScenarioTable, tests: ScenarioTable) -> dict:
    _check_same_metrics(refs, tests)
    other = tests.by_name()
    return {r.name: z0_metric(r, other[r.name]) for r in refs.records}


def z0_average(refs: ScenarioTable, tests: ScenarioTable) -> float:
    values = z0_per_metric(refs, tests)
    return float(np.mean(list(values.values())))


def printed_z0_average(table: ScenarioTable) -> float:
    """Mean of per-metric Z0 values transcribed alongside a scenario (``z0`` column)."""
    if not table.printed_z0:
        raise ArgumentError(f"scenario {table.scenario!r} carries no printed Z0 values")
    return float(np.mean(list(table.printed_z0.values())))


# ---------------------------------------------------------------------------
# aggregation / correlations


def aggregate_seeds(values, name: str = "metric", direction=Direction.MAXIMIZE) -> MetricRecord:
    """Mean and sample standard deviation (n - 1 denominator) over runs."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise ArgumentError("aggregate_seeds needs at least two runs")
    v = np.sort(v)
    return MetricRecord(name, float(v.mean()), float(v.std(ddof=1)), direction)


def correlation_matrix(dataset) -> np.ndarray:
    """Pearson correlations between columns; zero-variance columns yield NaN rows/columns."""
    rows = getattr(dataset, "rows", dataset)
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ArgumentError("correlation_matrix needs at least two rows")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    std = np.sqrt(np.diag(cov))
    degenerate = std == 0
    if degenerate.any():
        warnings.warn(f"zero-variance columns {np.flatnonzero(degenerate).tolist()}: "
                      "correlations undefined (NaN)", RuntimeWarning, stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.outer(std, std)
    corr[degenerate, :] = np.nan
    corr[:, degenerate] = np.nan
    corr = np.clip(0.5 * (corr + corr.T), -1.0, 1.0)
    ok = ~degenerate
    corr[ok, ok] = 1.0
    return corr


# ---------------------------------------------------------------------------
# scenario-table CSV

_COLUMNS = ["name", "mean", "std", "direction"]


def load_scenario_table(path, scenario: str | None = None) -> ScenarioTable:
    """CSV ``name,mean,std,direction[,z0]`` with an optional header row."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    scenario = scenario or Path(path).stem
    records, printed = [], {}
    seen = set()
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if cells[:4] == _COLUMNS:
            continue
        if len(cells) not in (4, 5):
            raise ParseError(f"expected 4 or 5 columns, got {len(cells)}", line=lineno)
        name = cells[0]
        if name in seen:
            raise ParseError(f"duplicate metric name {name!r}", line=lineno)
        try:
            mean, std = float(cells[1]), float(cells[2])
        except ValueError:
            raise ParseError(f"non-numeric mean/std in {cells[1:3]!r}", line=lineno) from None
        try:
            direction = Direction.parse(cells[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if std < 0:
            raise ParseError(f"negative std {std}", line=lineno)
        if len(cells) == 5 and cells[4]:
            try:
                printed[name] = float(cells[4])
            except ValueError:
                raise ParseError(f"non-numeric z0 {cells[4]!r}", line=lineno) from None
        seen.add(name)
        records.append(MetricRecord(name, mean, std, direction))
    if not records:
        raise ParseError(f"{Path(path).name}: no metric rows")
    return ScenarioTable(scenario, records, printed)


def save_scenario_table(table: ScenarioTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_COLUMNS + (["z0"] if table.printed_z0 else []))
        for r in table.records:
            row = [r.name, repr(r.mean), repr(r.std), r.direction.value]
            if table.printed_z0:
                row.append(repr(table.printed_z0[r.name]) if r.name in table.printed_z0 else "")
            w.writerow(row)


def comparison_rows(refs: ScenarioTable, tests: ScenarioTable) -> list:
    """Report rows ``(metric, ref mean±std, test mean±std, z0)``."""
    z = z0_per_metric(refs, tests)
    other = tests.by_name()
    out = []
    for r in refs.records:
        t = other[r.name]
        out.append((r.name, f"{r.mean:g} ± {r.std:g}", f"{t.mean:g} ± {t.std:g}", z[r.name]))
    return out
