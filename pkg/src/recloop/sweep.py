"""Parameter sweeps over independent seeded runs, with deterministic CSV output."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import WorldConfig, run
from .metrics import CSV_COLUMNS

# sweepable fields in nesting order (outermost first)
GRID_KEYS = ("similarity", "bias", "n_genres", "k", "f1", "phi")
# CSV column for each sweepable field
GRID_COLUMNS = {"similarity": "similarity", "bias": "b", "n_genres": "G", "k": "k", "f1": "f1",
                "phi": "phi"}
VALUE_COLUMNS = ("omega", "omega1", "auc_real", "auc_est", "fallbacks")
COLUMNS = CSV_COLUMNS + ["error"]

PRESETS = {
    "desk": {"config": dict(n_users=500, n_items=100, n_genres=10, k=7, updates_per_user=20_000),
             "instances": 10},
    "paper": {"config": dict(n_users=2000, n_items=100, n_genres=10, k=7, updates_per_user=100_000),
              "instances": 50},
}


def phi_grid(step: float = 0.05) -> list[float]:
    n = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(n + 1)]


@dataclass
class SweepSpec:
    base: WorldConfig
    grid: dict = field(default_factory=dict)
    instances: int = 1
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        for key, values in self.grid.items():
            if key not in GRID_KEYS:
                raise ValueError(f"cannot sweep {key!r}; choose from {GRID_KEYS}")
            if len(values) == 0:
                raise ValueError(f"empty grid for {key!r}")
        for cfg in self.points():
            pass  # validates every grid point

    def points(self) -> list[WorldConfig]:
        keys = [k for k in GRID_KEYS if k in self.grid]
        return [self.base.replace(**dict(zip(keys, combo)))
                for combo in itertools.product(*(self.grid[k] for k in keys))]

    def runs(self) -> list[WorldConfig]:
        return [cfg.replace(instance_index=i) for cfg in self.points() for i in range(self.instances)]


def run_row(config: WorldConfig) -> dict:
    """One run as a CSV row; failures are reported in the ``error`` column."""
    try:
        row = run(config).row()
        row["error"] = ""
    except Exception as exc:  # noqa: BLE001 - recorded per row
        row = {c: "" for c in COLUMNS}
        row.update(phi=config.phi, G=config.n_genres, k=config.k, f1=config.f1,
                   b=config.recommender.bias, similarity=config.recommender.similarity,
                   instance=config.instance_index, error=f"{type(exc).__name__}: {exc}")
    if config.mode == "replay":
        row["G"] = row["k"] = ""
    return row


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def aggregate(rows: list[dict], instances: int) -> list[dict]:
    """Per-instance rows in point order followed by a ``mean`` and a ``stderr`` row per point.

    NaN values (e.g. omega with no recommendation events) are left out of
    the aggregate; the standard error is ``std(ddof=1)/sqrt(n)``.
    """
    out = []
    for start in range(0, len(rows), instances):
        block = rows[start:start + instances]
        out.extend(block)
        mean = {c: block[0][c] for c in COLUMNS}
        se = dict(mean)
        mean["instance"], se["instance"] = "mean", "stderr"
        mean["error"] = se["error"] = ""
        for col in VALUE_COLUMNS:
            vals = np.array([r[col] for r in block if r[col] != ""], dtype=float)
            vals = vals[np.isfinite(vals)]
            mean[col] = float(vals.mean()) if len(vals) else math.nan
            se[col] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.nan
        out.extend([mean, se])
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(rows: list[dict], header: dict | None = None) -> str:
    buf = io.StringIO()
    for key, value in (header or {}).items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


@dataclass
class SweepResult:
    rows: list[dict]
    csv_text: str

    @property
    def failed(self) -> bool:
        return any(r["error"] for r in self.rows)

    def means(self) -> list[dict]:
        return [r for r in self.rows if r["instance"] == "mean"]


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every (grid point, instance) pair and write the CSV if ``spec.output`` is set."""
    rows = _map(run_row, spec.runs(), spec.workers)
    table = aggregate(rows, spec.instances)
    header = {"base": spec.base.as_dict(), "grid": {k: spec.grid[k] for k in GRID_KEYS if k in spec.grid},
              "instances": spec.instances}
    text = format_csv(table, header)
    if spec.output:
        os.makedirs(os.path.dirname(os.path.abspath(spec.output)), exist_ok=True)
        with open(spec.output, "w", newline="") as fh:
            fh.write(text)
    return SweepResult(table, text)


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ValueError(f"{path}: no rows")
    return rows


def threshold(phis, omegas, level: float = 0.9) -> float | None:
    """Smallest phi whose mean omega exceeds ``level`` (None if none does)."""
    for p, w in sorted(zip(phis, omegas)):
        if np.isfinite(w) and w > level:
            return p
    return None


def scan_threshold(base: WorldConfig, instances: int, level: float = 0.9, step: float = 0.05,
                   workers: int = 1):
    """Walk the phi grid upwards and stop at the first mean omega above ``level``.

    Gives the same value as :func:`threshold` on the full curve.  Returns
    ``(phi_star, {phi: mean_omega})``.
    """
    curve = {}
    for phi in phi_grid(step):
        spec = SweepSpec(base.replace(phi=phi), instances=instances, workers=workers)
        mean = run_sweep(spec).means()[0]
        curve[phi] = mean["omega"]
        if np.isfinite(mean["omega"]) and mean["omega"] > level:
            return phi, curve
    return None, curve
