"""Seeded generators for the synthetic benchmark distributions.

Three variants share the covariate mechanism
Z ~ Bernoulli(alpha_true), X1 = (1 - 2Z) * U[0, 1]:

- ``toy_1d``     d = 1, Y = |X1| + 1{X1 >= 0} * N(0, 1)
- ``simdist``    X2..Xd ~ U[-1, 1], same Y as toy_1d
- ``confounded`` X2..Xd ~ U[0, 1], Y = |X1| + 1{X1 >= 0} * C with C uniform
                 on a symmetric five-point grid.

Rows with X1 < 0 form the noiseless minority group (Y = |X1| exactly).
Randomness comes from numpy's PCG64 with SeedSequence-spawned streams per
column, so covariates are bit-identical between ``generate`` and
``generate_replicates`` for the same spec.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .model import Dataset, ParamVector

VARIANTS = ("toy_1d", "simdist", "confounded")

# symmetric five-point confounder support
CONFOUNDER_SUPPORT = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass
class SimSpec:
    """Parameters of one synthetic draw."""

    n: int
    d: int = 1
    alpha_true: float = 0.15
    variant: str = "simdist"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not 0.0 < self.alpha_true < 1.0:
            raise ValueError(f"alpha_true must be in (0, 1), got {self.alpha_true}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "toy_1d" and self.d != 1:
            raise ValueError("toy_1d is one-dimensional; use variant='simdist' for d > 1")


def _streams(spec: SimSpec):
    z_seq, x1_seq, rest_seq, y_seq = np.random.SeedSequence(spec.seed).spawn(4)
    return (np.random.default_rng(z_seq), np.random.default_rng(x1_seq),
            np.random.default_rng(rest_seq), np.random.default_rng(y_seq))


def _covariates(spec: SimSpec, rng_z, rng_x1, rng_rest):
    z = (rng_z.random(spec.n) < spec.alpha_true).astype(float)
    x1 = (1.0 - 2.0 * z) * rng_x1.random(spec.n)
    if spec.d > 1:
        if spec.variant == "confounded":
            rest = rng_rest.random((spec.n, spec.d - 1))
        else:
            rest = rng_rest.uniform(-1.0, 1.0, size=(spec.n, spec.d - 1))
        features = np.column_stack([x1, rest])
    else:
        features = x1[:, None]
    return z, x1, features


def generate(spec: SimSpec) -> Dataset:
    """One seeded draw of the chosen variant, with diagnostics columns."""
    rng_z, rng_x1, rng_rest, rng_y = _streams(spec)
    z, x1, features = _covariates(spec, rng_z, rng_x1, rng_rest)
    right = x1 >= 0
    if spec.variant == "confounded":
        conf = rng_y.choice(CONFOUNDER_SUPPORT, size=spec.n)
        labels = np.abs(x1) + right * conf
        return Dataset(features, labels, group=z, confounder=conf)
    noise = rng_y.standard_normal(spec.n)
    labels = np.abs(x1) + right * noise
    return Dataset(features, labels, group=z)


def generate_replicates(spec: SimSpec, m: int) -> Dataset:
    """Same covariates as ``generate``, with m label draws per row.

    The noisy variants redraw the noise for every replicate.  In the
    confounded variant the label is deterministic given (X, C), so the
    replicates all equal |x1| + 1{x1 >= 0} * c_i for the row's confounder
    draw; conditioning evaluations filter rows on that stored value.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng_z, rng_x1, rng_rest, rng_y = _streams(spec)
    z, x1, features = _covariates(spec, rng_z, rng_x1, rng_rest)
    right = x1 >= 0
    base = np.abs(x1)
    if spec.variant == "confounded":
        conf = rng_y.choice(CONFOUNDER_SUPPORT, size=spec.n)
        reps = np.tile((base + right * conf)[:, None], (1, m))
        return Dataset(features, reps[:, 0], replicates=reps, group=z, confounder=conf)
    noise = rng_y.standard_normal((spec.n, m))
    reps = base[:, None] + right[:, None] * noise
    return Dataset(features, reps[:, 0], replicates=reps, group=z)


def conditional_risk_oracle(params: ParamVector, x, variant: str) -> float:
    """Exact conditional absolute-deviation risk E[|theta'X - Y| given X = x].

    Only the noisy variants are supported; the confounded variant has no
    single conditional law (use replicate evaluation instead).
    """
    x = np.asarray(x, dtype=float).ravel()
    return float(conditional_risks(params, x[None, :], variant)[0])


def conditional_risks(params: ParamVector, features, variant: str) -> np.ndarray:
    """Vectorized ``conditional_risk_oracle`` over the rows of ``features``."""
    if variant not in ("toy_1d", "simdist"):
        raise ValueError(
            f"conditional risk oracle supports toy_1d and simdist, got {variant!r}; "
            "evaluate the confounded variant with replicates"
        )
    features = np.atleast_2d(np.asarray(features, dtype=float))
    pred = params.predict(features)
    x1 = features[:, 0]
    # left group: Y = |x1| exactly; right group: Y = x1 + N(0,1), and
    # E|mu - eps| for eps ~ N(0,1) is the folded-normal mean
    mu = pred - x1
    folded = _SQRT_2_OVER_PI * np.exp(-0.5 * mu**2) + mu * erf(mu / np.sqrt(2.0))
    return np.where(x1 < 0, np.abs(pred - np.abs(x1)), folded)
