"""Cross-validation of the smoothness hyperparameter L/eps.

Each grid point is trained on the training sample and scored by the
replicate estimate of worst-case risk on a held-out dataset (row-mean losses
over repeated labels, then the CVaR tail mean).  Ties break toward the
smaller lipschitz_ratio; failed grid points are recorded, not fatal, unless
every point fails.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .duals import RobustSpec, replicate_worst_case
from .evaluation import loss_matrix
from .model import Dataset
from .optim import OptimizerConfig, TrainResult, train


@dataclass
class CVEntry:
    lipschitz_ratio: float
    score: float
    error: str | None = None


@dataclass
class CVResult:
    entries: list[CVEntry]
    best_ratio: float
    best_result: TrainResult


def replicate_score(result: TrainResult, holdout: Dataset, kind: str,
                    alpha0: float) -> float:
    """Held-out replicate estimate of worst-case risk for a trained model."""
    if holdout.replicates is None:
        raise ValueError("holdout dataset has no replicates")
    losses = loss_matrix(kind, result.params, holdout.features, holdout.replicates)
    return replicate_worst_case(losses, alpha0)


def cross_validate(dataset: Dataset, kind: str, spec: RobustSpec,
                   opt: OptimizerConfig, grid, holdout: Dataset,
                   score_alpha0: float | None = None, jobs: int = 1) -> CVResult:
    """Train one model per lipschitz_ratio in ``grid`` and keep the best scorer."""
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    score_alpha0 = spec.alpha0 if score_alpha0 is None else float(score_alpha0)

    def run(ratio: float) -> CVEntry | tuple[CVEntry, TrainResult]:
        try:
            result = train(dataset, kind, replace(spec, lipschitz_ratio=ratio), opt)
            score = replicate_score(result, holdout, kind, score_alpha0)
            if not np.isfinite(score):
                raise ValueError(f"non-finite score {score}")
            return CVEntry(ratio, float(score)), result
        except Exception as err:  # record, keep going
            return CVEntry(ratio, np.nan, error=str(err)), None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, grid))
    else:
        outcomes = [run(g) for g in grid]

    entries = [entry for entry, _ in outcomes]
    best = None
    for (entry, result) in outcomes:
        if entry.error is not None:
            continue
        # strict < keeps the smaller ratio on ties (grid is ascending)
        if best is None or entry.score < best[0].score:
            best = (entry, result)
    if best is None:
        raise RuntimeError("every grid point failed: "
                           + "; ".join(f"{e.lipschitz_ratio:g}: {e.error}" for e in entries))
    return CVResult(entries, best[0].lipschitz_ratio, best[1])
