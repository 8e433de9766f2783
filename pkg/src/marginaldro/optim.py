"""Full-batch projected subgradient descent for the robust objectives.

Every trainable objective is convex in its variables; the solver keeps the
best iterate seen, projects eta to [0, M] and plans to the nonnegative
orthant each step, and records the running-best objective in the trace.
Block updates are preconditioned so their magnitudes do not shrink with the
sample size: plan gradients scale like 1/n^2 while optimal plan entries are
O(1), so plan steps carry an extra n^2 (and the RKHS smoothing vector an
extra n).  The optimum is unchanged; only the step geometry is.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .duals import RobustSpec, cvar_dual, pnorm_dual
from .model import Dataset, ParamVector, loss_values, loss_residual_slopes
from .objectives import (
    confounding_coefficient,
    floor_value,
    pairwise_distance_power,
    penalty_coefficient,
    plan_adjustments,
    resolve_eps,
)
from .variational import KernelSpec, gram, holder_constant, median_bandwidth

OBJECTIVES = ("erm", "joint_cvar", "joint_pnorm", "marginal",
              "marginal_confounded", "rkhs", "bounded_holder")

DENSE_PLAN_WARN_N = 20000


class DivergenceError(RuntimeError):
    """Objective became NaN/inf; carries the iteration where it happened."""

    def __init__(self, iteration: int):
        super().__init__(f"objective diverged (NaN/inf) at iteration {iteration}")
        self.iteration = iteration


@dataclass
class OptimizerConfig:
    objective: str = "erm"
    max_iters: int = 400
    step0: float = 0.2
    schedule: str = "inv_sqrt"
    tol: float = 0.0
    seed: int = 0
    ridge: float = 0.0
    eta_refresh: int = 10
    fit_intercept: bool = True
    plan_dtype: str = "auto"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step0 <= 0:
            raise ValueError("step0 must be > 0")
        if self.schedule not in ("constant", "inv_sqrt"):
            raise ValueError(f"schedule must be constant or inv_sqrt, got {self.schedule!r}")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.plan_dtype not in ("auto", "float32", "float64"):
            raise ValueError("plan_dtype must be auto, float32 or float64")


@dataclass
class TrainResult:
    params: ParamVector
    objective: float
    trace: np.ndarray
    eta: float | None = None
    plan: np.ndarray | None = None
    beta: np.ndarray | None = None


class ObjectiveFunction:
    """Value and subgradient of one training objective at (w, eta, plan, beta).

    ``w`` stacks theta and the intercept (last coordinate).  Unused blocks
    are ignored and get gradient None.  Distances and Gram matrices are
    precomputed once, so repeated evaluation is cheap; plan gradients reuse
    one buffer, and ``dtype`` can downgrade the n x n arrays to float32 to
    halve memory traffic on large samples (the returned values stay scalar
    float64).
    """

    def __init__(self, dataset: Dataset, kind: str, spec: RobustSpec, objective: str,
                 kernel: KernelSpec | None = None, ridge: float = 0.0,
                 dtype=np.float64):
        if objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
        self.dataset = dataset
        self.kind = kind
        self.objective = objective
        self.ridge = ridge
        self.dtype = np.dtype(dtype)
        self.xa = np.column_stack([dataset.features, np.ones(dataset.n)])
        n = dataset.n
        if objective in ("marginal", "marginal_confounded", "bounded_holder"):
            spec = resolve_eps(spec, loss_values(kind, ParamVector(np.zeros(dataset.d)),
                                                 dataset.features, dataset.labels))
            dist = pairwise_distance_power(dataset.features, spec.p)
            self._gplan = np.empty((n, n), dtype=self.dtype)
            self._plan_vec: np.ndarray | None = None
        if objective in ("marginal", "marginal_confounded"):
            self.pen_coef = penalty_coefficient(spec)
            self.conf_coef = (confounding_coefficient(spec)
                              if objective == "marginal_confounded" else 0.0)
            self.floor = floor_value(spec)
            # combined plan-linear coefficients of the surrogate gradient:
            # (pen_coef * dist + conf_coef) / (n^2 alpha0)
            pd = self.pen_coef * dist + self.conf_coef
            pd /= n * n * spec.alpha0
            self.pen_dist = pd.astype(self.dtype, copy=False)
        if objective == "bounded_holder":
            self.lcoef = holder_constant(spec)
            self.pen_dist = (self.lcoef * dist / (n * n)).astype(self.dtype, copy=False)
        if objective == "rkhs":
            if kernel is None:
                kernel = KernelSpec(bandwidth=median_bandwidth(dataset.features))
            self.kernel = kernel
            self.k = gram(dataset.features, kernel, check=False)
        self.spec = spec
        self.last_losses: np.ndarray | None = None
        self.uses_eta = objective != "erm"
        self.uses_plan = objective in ("marginal", "marginal_confounded", "bounded_holder")
        self.uses_beta = objective == "rkhs"

    def losses(self, w: np.ndarray) -> np.ndarray:
        params = ParamVector(w[:-1], w[-1])
        return loss_values(self.kind, params, self.dataset.features, self.dataset.labels)

    def value_grad(self, w, eta=None, plan=None, beta=None, with_plan_grad=True):
        """Returns (value, g_w, g_eta, g_plan, g_beta); None for unused blocks.

        With ``with_plan_grad=False`` the n x n gradient is not materialized;
        the solver instead applies it through ``plan_step``, which fuses the
        update into broadcast operations on the plan itself.
        """
        w = np.asarray(w, dtype=float)
        params = ParamVector(w[:-1], w[-1])
        ds = self.dataset
        losses = loss_values(self.kind, params, ds.features, ds.labels)
        slopes = loss_residual_slopes(self.kind, params, ds.features, ds.labels)
        self.last_losses = losses
        n = ds.n
        a0 = self.spec.alpha0
        p = self.spec.p

        if self.objective == "erm":
            value = float(losses.mean())
            g_w = self.xa.T @ slopes / n
            g_eta = g_plan = g_beta = None

        elif self.objective == "joint_cvar":
            h = np.maximum(losses - eta, 0.0)
            value = float(h.sum()) / (a0 * n) + eta
            wt = (h > 0).astype(float) / n
            g_w = self.xa.T @ (wt * slopes) / a0
            g_eta = 1.0 - wt.sum() / a0
            g_plan = g_beta = None

        elif self.objective == "joint_pnorm":
            h = np.maximum(losses - eta, 0.0)
            a = float(np.mean(h**p))
            value = a ** (1.0 / p) / a0 + eta
            wt = h ** (p - 1.0) * a ** ((1.0 - p) / p) / n if a > 0 else np.zeros(n)
            g_w = self.xa.T @ (wt * slopes) / a0
            g_eta = 1.0 - wt.sum() / a0
            g_plan = g_beta = None

        elif self.objective in ("marginal", "marginal_confounded"):
            c = np.asarray(plan_adjustments(plan), dtype=float)
            h = np.maximum(losses - c - eta, 0.0)
            a = (p - 1.0) * float(np.mean(h**p))
            # pen_dist folds the confounding constant and the 1/alpha0
            core = a ** (1.0 / p) + a0 * float(np.vdot(self.pen_dist, plan))
            value = max(core, self.floor) / a0 + eta
            if core >= self.floor:
                wt = ((p - 1.0) / n * h ** (p - 1.0) * a ** ((1.0 - p) / p)
                      if a > 0 else np.zeros(n))
                g_w = self.xa.T @ (wt * slopes) / a0
                g_eta = 1.0 - wt.sum() / a0
                self._plan_vec = wt / (n * a0)
                if with_plan_grad:
                    m = (-wt / (n * a0)).astype(self.dtype)
                    g_plan = np.subtract.outer(m, m, out=self._gplan)
                    g_plan += self.pen_dist
                else:
                    g_plan = None
            else:
                g_w = np.zeros_like(w)
                g_eta = 1.0
                self._plan_vec = None
                if with_plan_grad:
                    g_plan = self._gplan
                    g_plan.fill(0.0)
                else:
                    g_plan = None
            g_beta = None

        elif self.objective == "bounded_holder":
            c = np.asarray(plan_adjustments(plan), dtype=float)
            active = (losses - c - eta > 0).astype(float)
            value = (float(np.maximum(losses - c - eta, 0.0).sum()) / (a0 * n)
                     + float(np.vdot(self.pen_dist, plan)) + eta)
            g_w = self.xa.T @ (active * slopes) / (a0 * n)
            g_eta = 1.0 - active.sum() / (a0 * n)
            self._plan_vec = active / (a0 * n * n)
            if with_plan_grad:
                m = (-active / (a0 * n * n)).astype(self.dtype)
                g_plan = np.subtract.outer(m, m, out=self._gplan)
                g_plan += self.pen_dist
            else:
                g_plan = None
            g_beta = None

        else:  # rkhs
            margin = losses - eta + beta
            active = (margin > 0).astype(float)
            kb = self.k @ beta
            quad = max(float(beta @ kb), 0.0)
            norm = np.sqrt(quad / self.kernel.radius)
            value = float(np.maximum(margin, 0.0).sum()) / (a0 * n) + norm / n + eta
            g_w = self.xa.T @ (active * slopes) / (a0 * n)
            g_eta = 1.0 - active.sum() / (a0 * n)
            g_beta = active / (a0 * n)
            if norm > 0:
                g_beta = g_beta + kb / (self.kernel.radius * norm * n)
            g_plan = None

        if self.ridge:
            value += self.ridge * float(w[:-1] @ w[:-1])
            g_w = g_w.copy()
            g_w[:-1] += 2.0 * self.ridge * w[:-1]
        return value, g_w, g_eta, g_plan, g_beta

    def plan_step(self, plan: np.ndarray, step: float):
        """In-place projected plan update, n^2 times the last plan gradient.

        Equivalent to ``plan = max(plan - step * n^2 * g_plan, 0)`` but fused
        into broadcast passes instead of materializing the gradient.
        """
        if self._plan_vec is None:  # floor active, plan gradient is zero
            return
        n = plan.shape[0]
        scale = step * n * n
        u = (scale * self._plan_vec).astype(self.dtype)
        plan += u[:, None]
        plan -= u[None, :]
        np.multiply(self.pen_dist, self.dtype.type(scale), out=self._gplan)
        plan -= self._gplan
        np.maximum(plan, 0.0, out=plan)


def train(dataset: Dataset, kind: str, spec: RobustSpec, opt: OptimizerConfig,
          kernel: KernelSpec | None = None) -> TrainResult:
    """Minimize the configured objective; returns the best iterate.

    The trace holds the running-best objective value per iteration, hence is
    nonincreasing.  Identical inputs give bitwise-identical traces.
    """
    if opt.objective in ("marginal", "marginal_confounded", "bounded_holder"):
        if dataset.n > DENSE_PLAN_WARN_N:
            warnings.warn(
                f"dense transport plan stores 8*n^2 = {8 * dataset.n**2 / 1e9:.1f} GB "
                f"for n = {dataset.n}",
                RuntimeWarning,
            )
    if opt.plan_dtype == "auto":
        dtype = np.float32 if dataset.n >= 1024 else np.float64
    else:
        dtype = np.dtype(opt.plan_dtype)
    fn = ObjectiveFunction(dataset, kind, spec, opt.objective, kernel, opt.ridge,
                           dtype=dtype)
    spec = fn.spec
    n = dataset.n

    w = np.zeros(dataset.d + 1)
    eta = plan = beta = None
    if fn.uses_eta:
        eta = cvar_dual(fn.losses(w), spec.alpha0)[1]
    if fn.uses_plan:
        plan = np.zeros((n, n), dtype=fn.dtype)
    if fn.uses_beta:
        beta = np.zeros(n)

    joint = opt.objective in ("joint_cvar", "joint_pnorm")
    best_value = np.inf
    best = None
    best_plan = np.empty_like(plan) if plan is not None else None
    trace = []
    window = 25
    for t in range(opt.max_iters):
        if joint and opt.eta_refresh and t % opt.eta_refresh == 0:
            p_eff = spec.p if opt.objective == "joint_pnorm" else 1.0
            eta = optimal_eta_exact(fn.losses(w), spec.alpha0, p_eff)
        value, g_w, g_eta, _, g_beta = fn.value_grad(w, eta, plan, beta,
                                                     with_plan_grad=False)
        if not np.isfinite(value):
            raise DivergenceError(t)
        if value < best_value:
            best_value = value
            if plan is not None:
                np.copyto(best_plan, plan)
            best = (w.copy(), eta, beta.copy() if beta is not None else None)
        trace.append(best_value)
        if opt.tol > 0 and t > window:
            prev = trace[-window - 1]
            if prev - best_value <= opt.tol * max(abs(prev), 1e-12):
                break
        step = opt.step0 if opt.schedule == "constant" else opt.step0 / np.sqrt(t + 1.0)
        w = w - step * g_w
        if not opt.fit_intercept:
            w[-1] = 0.0
        if fn.uses_eta:
            eta = float(np.clip(eta - step * g_eta, 0.0, _eta_bound(spec, fn.last_losses)))
        if fn.uses_plan:
            fn.plan_step(plan, step)
        if fn.uses_beta:
            beta = beta - step * n * g_beta

    best_w, best_eta, best_beta = best
    return TrainResult(ParamVector(best_w[:-1], best_w[-1]), best_value,
                       np.asarray(trace), eta=best_eta, plan=best_plan, beta=best_beta)


def optimal_eta_exact(losses, alpha0: float, p: float) -> float:
    """Exact inner-minimizing threshold of the joint dual at fixed losses."""
    if p == 1.0:
        return cvar_dual(losses, alpha0)[1]
    return pnorm_dual(losses, alpha0, p)[1]


def _eta_bound(spec: RobustSpec, losses) -> float:
    if spec.loss_bound is not None:
        return spec.loss_bound
    return float(np.max(losses)) if losses.size else 0.0


def minimize_plan(losses, dist, eta: float, spec: RobustSpec, iters: int = 2000,
                  step0: float = 0.2, confounded: bool = False):
    """Infimum of the transport objective over plans at fixed losses and eta.

    Plain projected subgradient descent on B with the n^2 preconditioner;
    returns (best value, best plan).
    """
    losses = np.asarray(losses, dtype=float).ravel()
    n = losses.size
    spec = resolve_eps(spec, losses)
    pen_coef = penalty_coefficient(spec)
    conf_coef = confounding_coefficient(spec) if confounded else 0.0
    dist = np.asarray(dist, dtype=float)
    p = spec.p
    plan = np.zeros((n, n))
    best_value, best_plan = np.inf, plan.copy()
    for t in range(iters):
        c = plan_adjustments(plan)
        h = np.maximum(losses - c - eta, 0.0)
        a = (p - 1.0) * float(np.mean(h**p))
        value = a ** (1.0 / p) + pen_coef * float(np.vdot(dist, plan)) / n**2
        if confounded:
            value += conf_coef * float(plan.sum()) / n**2
        if value < best_value:
            best_value = value
            np.copyto(best_plan, plan)
        wt = (p - 1.0) / n * h ** (p - 1.0) * a ** ((1.0 - p) / p) if a > 0 else np.zeros(n)
        upd = wt[:, None] - wt[None, :]
        upd *= n
        upd -= pen_coef * dist
        if confounded:
            upd -= conf_coef
        plan += (step0 / np.sqrt(t + 1.0)) * upd
        np.maximum(plan, 0.0, out=plan)
    return float(best_value), best_plan


def minimize_eta_plan(losses, dist, spec: RobustSpec, iters: int = 3000,
                      step0: float = 0.2, confounded: bool = False):
    """Infimum of the floored surrogate over (eta, plan) at fixed losses.

    Returns (best value, best eta, best plan) of
    (1/alpha0) max(objective, eps^(q-1)) + eta.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    n = losses.size
    spec = resolve_eps(spec, losses)
    pen_coef = penalty_coefficient(spec)
    conf_coef = confounding_coefficient(spec) if confounded else 0.0
    floor = floor_value(spec)
    dist = np.asarray(dist, dtype=float)
    p = spec.p
    bound = _eta_bound(spec, losses)
    eta = cvar_dual(losses, spec.alpha0)[1]
    plan = np.zeros((n, n))
    best = (np.inf, eta, plan.copy())
    for t in range(iters):
        c = plan_adjustments(plan)
        h = np.maximum(losses - c - eta, 0.0)
        a = (p - 1.0) * float(np.mean(h**p))
        core = a ** (1.0 / p) + pen_coef * float(np.vdot(dist, plan)) / n**2
        if confounded:
            core += conf_coef * float(plan.sum()) / n**2
        value = max(core, floor) / spec.alpha0 + eta
        if value < best[0]:
            best = (value, eta, plan.copy())
        step = step0 / np.sqrt(t + 1.0)
        if core >= floor:
            wt = (p - 1.0) / n * h ** (p - 1.0) * a ** ((1.0 - p) / p) if a > 0 else np.zeros(n)
            g_eta = 1.0 - wt.sum() / spec.alpha0
            upd = wt[:, None] - wt[None, :]
            upd *= n
            upd -= pen_coef * dist
            if confounded:
                upd -= conf_coef
            plan += (step / spec.alpha0) * upd
            np.maximum(plan, 0.0, out=plan)
        else:
            g_eta = 1.0
        eta = float(np.clip(eta - step * g_eta, 0.0, bound))
    return float(best[0]), float(best[1]), best[2]
