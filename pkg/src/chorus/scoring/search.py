"""Random hyperparameter search over the fixed grid.

Draws trial configurations uniformly and independently per axis, runs a
caller-supplied objective, and appends one JSON line per finished trial to the
log file. Re-running with the same seed and log file skips completed trials,
so an interrupted search resumes where it stopped; a crashed trial is recorded
as failed and the search moves on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

SEARCH_GRID: dict[str, tuple] = {
    "optimizer": ("adam", "sgd", "adagrad", "adadelta", "rmsprop"),
    "learning_rate": (1e-2, 1e-3, 1e-4),
    "activation": ("sigmoid", "relu", "prelu"),
    "init": ("he", "glorot"),
    "dropout": (0.2, 0.4, 0.6, 0.8),
}


@dataclass
class SearchResult:
    records: list[dict] = field(default_factory=list)
    ranked: list[dict] = field(default_factory=list)


def draw_configs(trials: int, seed: int, grid: dict[str, tuple]) -> list[dict]:
    """The full trial plan up front, so resumed runs see identical configs."""
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(trials):
        cfg = {axis: values[int(rng.integers(len(values)))] for axis, values in grid.items()}
        configs.append(cfg)
    return configs


def _load_completed(out_path: Optional[Path]) -> dict[int, dict]:
    if out_path is None or not out_path.exists():
        return {}
    done = {}
    for line in out_path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        done[rec["trial"]] = rec
    return done


def hyperparameter_search(
    objective_fn: Callable[[dict], float],
    trials: int = 100,
    seed: int = 0,
    out_path: Optional[str | Path] = None,
    maximize: bool = True,
    grid: Optional[dict[str, tuple]] = None,
) -> SearchResult:
    grid = grid if grid is not None else SEARCH_GRID
    out = Path(out_path) if out_path is not None else None
    configs = draw_configs(trials, seed, grid)
    completed = _load_completed(out)
    records: list[dict] = []
    log_fh = open(out, "a", encoding="utf-8") if out is not None else None
    try:
        for i, cfg in enumerate(configs):
            if i in completed:
                records.append(completed[i])
                continue
            rec: dict = {"trial": i, "config": cfg}
            try:
                metric = float(objective_fn(cfg))
                rec["status"] = "ok"
                rec["metric"] = metric
            except Exception as exc:  # a crashed trial must not kill the search
                rec["status"] = "failed"
                rec["error"] = f"{type(exc).__name__}: {exc}"
            records.append(rec)
            if log_fh is not None:
                log_fh.write(json.dumps(rec) + "\n")
                log_fh.flush()
    finally:
        if log_fh is not None:
            log_fh.close()
    succeeded = [r for r in records if r.get("status") == "ok"]
    ranked = sorted(succeeded, key=lambda r: r["metric"], reverse=maximize)
    return SearchResult(records=records, ranked=ranked)
