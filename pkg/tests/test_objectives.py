import numpy as np
import pytest

from marginaldro.duals import RobustSpec
from marginaldro.model import Dataset, ParamVector
from marginaldro.objectives import (
    DualState,
    confounded_objective,
    floor_value,
    marginal_objective,
    pairwise_distance_power,
    plan_adjustments,
    primal_inner_sup,
    resolve_eps,
    robust_surrogate,
    subgradient,
)
from marginaldro.optim import minimize_eta_plan, minimize_plan

TWO_POINT = dict(
    losses=np.array([0.0, 2.0]),
    dist=np.array([[0.0, 1.0], [1.0, 0.0]]),
    plan=np.array([[0.0, 0.0], [2.0, 0.0]]),
)


def spec2(**kw):
    base = dict(alpha0=0.5, p=2.0, lipschitz_ratio=1.0, eps=1.0)
    base.update(kw)
    return RobustSpec(**base)


def test_pairwise_distance_power():
    x = np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 0.0]])
    d = pairwise_distance_power(x, 2.0)
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)
    assert d[0, 1] == pytest.approx(5.0)
    # triangle inequality on the base distances
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert d[i, j] <= d[i, k] + d[k, j] + 1e-12
    d15 = pairwise_distance_power(x, 1.5)
    assert np.allclose(d15, d**0.5)


def test_plan_adjustments_sum_to_zero():
    rng = np.random.default_rng(0)
    plan = np.abs(rng.normal(size=(7, 7)))
    c = plan_adjustments(plan)
    assert c.sum() == pytest.approx(0.0, abs=1e-12)


def test_marginal_objective_examples():
    # transport-free case: plain p-norm of the hinged losses
    losses = np.array([1.0, 3.0, 0.5])
    dist = pairwise_distance_power(np.arange(3.0)[:, None], 2.0)
    value = marginal_objective(losses, dist, 0.5, np.zeros((3, 3)), spec2())
    assert value == pytest.approx(np.sqrt(np.mean(np.maximum(losses - 0.5, 0) ** 2)))

    # single example: self transport is free and null
    v1 = marginal_objective([2.0], np.zeros((1, 1)), 0.5, [[7.0]], spec2())
    assert v1 == pytest.approx(1.5)

    # two-point instance, worked by hand: hinge block 1.0, penalty 0.5
    value = marginal_objective(TWO_POINT["losses"], TWO_POINT["dist"], 0.0,
                               TWO_POINT["plan"], spec2())
    c = plan_adjustments(TWO_POINT["plan"])
    block = np.sqrt(((0.0 - c[0]) ** 2 + (2.0 - c[1]) ** 2) / 2.0)
    assert value == pytest.approx(block + 0.5) == pytest.approx(1.5)


def test_negative_plan_rejected():
    with pytest.raises(ValueError):
        marginal_objective([1.0, 1.0], np.zeros((2, 2)), 0.0,
                           np.array([[0.0, -0.1], [0.0, 0.0]]), spec2())


def test_subgradient_rejects_zero_one_loss():
    ds = Dataset([[0.0], [1.0]], [1.0, -1.0])
    state = DualState(ParamVector([0.0]), eta=0.0, plan=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        subgradient(state, ds, "zero_one", spec2())


def test_confounded_objective():
    value = confounded_objective(TWO_POINT["losses"], TWO_POINT["dist"], 0.0,
                                 TWO_POINT["plan"], spec2(delta=1.0))
    assert value == pytest.approx(2.5)
    # delta = 0 reduces to the marginal objective
    assert confounded_objective(TWO_POINT["losses"], TWO_POINT["dist"], 0.0,
                                TWO_POINT["plan"], spec2()) == pytest.approx(1.5)
    # B = 0 kills the extra term
    v0 = confounded_objective(TWO_POINT["losses"], TWO_POINT["dist"], 0.3,
                              np.zeros((2, 2)), spec2(delta=5.0))
    assert v0 == pytest.approx(marginal_objective(TWO_POINT["losses"], TWO_POINT["dist"],
                                                  0.3, np.zeros((2, 2)), spec2()))


def test_robust_surrogate_examples():
    # floor active: (1/alpha0) * floor + eta
    ds = Dataset([[0.0], [1.0]], [0.0, 0.0])
    state = DualState(ParamVector([0.0]), eta=0.3, plan=np.zeros((2, 2)))
    spec = RobustSpec(alpha0=0.5, p=2.0, lipschitz_ratio=1.0, eps=0.01)
    assert robust_surrogate(state, ds, "absolute_deviation", spec) == pytest.approx(0.32)

    # constant losses with eta = c: hinge block zero
    ds = Dataset([[0.0], [1.0]], [2.0, 3.0])   # theta=1, b=2 fits exactly... use direct
    ds = Dataset([[1.0], [1.0]], [1.5, 1.5])
    state = DualState(ParamVector([0.0]), eta=1.5, plan=np.zeros((2, 2)))
    expected = 0.01 / 0.5 + 1.5
    assert robust_surrogate(state, ds, "absolute_deviation", spec) == pytest.approx(expected)

    # two-point instance above the floor: 1.5 / 0.5 = 3.0
    ds = Dataset([[0.0], [1.0]], [0.0, 2.0])
    state = DualState(ParamVector([0.0]), eta=0.0, plan=TWO_POINT["plan"])
    assert robust_surrogate(state, ds, "absolute_deviation", spec) == pytest.approx(3.0)


def test_subgradient_hinge_inactive():
    ds = Dataset([[0.0], [1.0]], [0.5, 0.7])
    spec = RobustSpec(alpha0=0.5, p=2.0, lipschitz_ratio=2.0, eps=1e-6)
    plan = np.array([[0.0, 0.4], [0.1, 0.0]])
    state = DualState(ParamVector([0.0]), eta=5.0, plan=plan)  # all hinges off
    g_theta, g_eta, g_plan = subgradient(state, ds, "absolute_deviation", spec)
    assert np.allclose(g_theta, 0.0)
    assert g_eta == pytest.approx(1.0)
    dist = pairwise_distance_power(ds.features, 2.0)
    expected = 2.0 * dist / 4.0 / 0.5  # penalty coefficients only, over alpha0
    assert np.allclose(g_plan, expected)


def test_subgradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    spec = RobustSpec(alpha0=0.4, p=2.0, lipschitz_ratio=1.5, eps=0.05, delta=0.3)
    checked = 0
    while checked < 30:
        n, d = int(rng.integers(2, 6)), 2
        ds = Dataset(rng.uniform(-1, 1, (n, d)), rng.uniform(0, 2, n))
        state = DualState(ParamVector(rng.normal(size=d) * 0.5, rng.normal() * 0.2),
                          eta=float(rng.uniform(0, 0.5)),
                          plan=np.abs(rng.normal(size=(n, n))) * 0.3)
        for confounded in (False, True):
            g_theta, g_eta, g_plan = subgradient(state, ds, "absolute_deviation", spec,
                                                 confounded)

            def val(st):
                return robust_surrogate(st, ds, "absolute_deviation", spec, confounded)

            h = 1e-6
            ok = True
            # a few random coordinates of each block
            for _ in range(3):
                j = int(rng.integers(0, d))
                tp, tm = state.params.theta.copy(), state.params.theta.copy()
                tp[j] += h
                tm[j] -= h
                fd = (val(DualState(ParamVector(tp, state.params.intercept), state.eta,
                                    state.plan))
                      - val(DualState(ParamVector(tm, state.params.intercept), state.eta,
                                      state.plan))) / (2 * h)
                if abs(fd - g_theta[j]) > 1e-4 * max(1.0, abs(fd)):
                    ok = False
            fd = (val(DualState(state.params, state.eta + h, state.plan))
                  - val(DualState(state.params, state.eta - h, state.plan))) / (2 * h)
            if abs(fd - g_eta) > 1e-4 * max(1.0, abs(fd)):
                ok = False
            i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
            pp, pm = state.plan.copy(), state.plan.copy()
            pp[i, j] += h
            pm[i, j] -= h
            fd = (val(DualState(state.params, state.eta, pp))
                  - val(DualState(state.params, state.eta, pm))) / (2 * h)
            if abs(fd - g_plan[i, j]) > 1e-4 * max(1.0, abs(fd)):
                ok = False
            assert ok
        checked += 1


def test_primal_inner_sup_trivial_cases():
    spec = spec2(lipschitz_ratio=2.0)
    assert primal_inner_sup([2.0], np.zeros((1, 1)), 0.5, spec) == pytest.approx(1.5, abs=1e-9)
    dist = TWO_POINT["dist"]
    assert primal_inner_sup([0.1, 0.2], dist, 0.5, spec) == 0.0
    with pytest.raises(ValueError):
        primal_inner_sup(np.ones(9), np.zeros((9, 9)), 0.0, spec)


def test_weak_duality_any_feasible_plan():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        x = rng.uniform(-1, 1, (n, 2))
        losses = rng.uniform(0, 2, n)
        eta = float(rng.uniform(0, 1))
        spec = spec2(lipschitz_ratio=float(rng.uniform(0.3, 2.0)))
        dist = pairwise_distance_power(x, 2.0)
        primal = primal_inner_sup(losses, dist, eta, spec)
        for _ in range(5):
            plan = np.abs(rng.normal(size=(n, n)))
            assert marginal_objective(losses, dist, eta, plan, spec) >= primal - 1e-9


def test_strong_duality_small_instances():
    rng = np.random.default_rng(6)
    for _ in range(5):
        n = int(rng.integers(2, 5))
        x = rng.uniform(-1, 1, (n, 2))
        losses = rng.uniform(0, 2, n)
        eta = float(rng.uniform(0, 1))
        spec = spec2(lipschitz_ratio=float(rng.uniform(0.3, 2.0)))
        dist = pairwise_distance_power(x, 2.0)
        dual, _ = minimize_plan(losses, dist, eta, spec, iters=4000)
        primal = primal_inner_sup(losses, dist, eta, spec)
        assert dual == pytest.approx(primal, abs=5e-3)


def test_inf_plan_monotone_in_lipschitz_ratio():
    rng = np.random.default_rng(7)
    n = 12
    x = rng.uniform(-1, 1, (n, 2))
    losses = rng.uniform(0, 2, n)
    dist = pairwise_distance_power(x, 2.0)
    values = [minimize_plan(losses, dist, 0.4, spec2(lipschitz_ratio=r), iters=3000)[0]
              for r in (0.1, 1.0, 10.0)]
    assert values[0] <= values[1] + 1e-6 <= values[2] + 2e-6


def test_joint_dro_limit():
    rng = np.random.default_rng(8)
    n = 25
    losses = rng.uniform(0, 2, n)
    dist = pairwise_distance_power(rng.uniform(-1, 1, (n, 2)), 2.0)
    spec = RobustSpec(alpha0=0.3, p=2.0, lipschitz_ratio=1e6, eps=1e-4)
    val, _, plan = minimize_eta_plan(losses, dist, spec, iters=3000)
    from marginaldro.duals import pnorm_dual

    target = pnorm_dual(losses, 0.3, 2.0)[0]
    assert val == pytest.approx(target, rel=1e-3)
    assert plan.max() <= 1e-6


def test_erm_limit():
    rng = np.random.default_rng(9)
    n = 20
    losses = rng.uniform(0, 2, n)
    dist = pairwise_distance_power(rng.uniform(-1, 1, (n, 2)), 2.0)
    for p in (2.0, 1.5):
        eta = 0.3
        spec = RobustSpec(alpha0=0.3, p=p, lipschitz_ratio=0.0, eps=1e-4)
        val, _ = minimize_plan(losses, dist, eta, spec, iters=5000)
        target = (p - 1.0) ** (1.0 / p) * max(losses.mean() - eta, 0.0)
        assert val == pytest.approx(target, abs=1e-3)


def test_confounding_monotone_in_delta():
    rng = np.random.default_rng(10)
    n = 10
    losses = rng.uniform(0, 2, n)
    dist = pairwise_distance_power(rng.uniform(-1, 1, (n, 2)), 2.0)
    eta = 0.2
    values = []
    for delta in (0.0, 0.05, 0.5, 50.0):
        spec = RobustSpec(alpha0=0.3, p=2.0, lipschitz_ratio=1.0, eps=0.5, delta=delta)
        val, plan = minimize_plan(losses, dist, eta, spec, iters=4000, confounded=True)
        values.append(val)
    assert all(values[i] <= values[i + 1] + 1e-6 for i in range(len(values) - 1))
    # delta = 0 coincides with the unconfounded infimum
    spec0 = RobustSpec(alpha0=0.3, p=2.0, lipschitz_ratio=1.0, eps=0.5)
    unconf, _ = minimize_plan(losses, dist, eta, spec0, iters=4000)
    assert values[0] == pytest.approx(unconf, abs=1e-6)
    # huge delta forces the plan to zero: value matches B = 0
    at_zero = marginal_objective(losses, dist, eta, np.zeros((n, n)), spec0)
    assert values[-1] == pytest.approx(at_zero, abs=1e-6)


def test_resolve_eps_default_policy():
    losses = np.array([0.5, 1.5, 1.0])
    spec = resolve_eps(RobustSpec(alpha0=0.25, p=2.0), losses)
    assert floor_value(spec) / spec.alpha0 == pytest.approx(1e-3 * losses.mean())
    # explicit eps is left alone
    spec2_ = resolve_eps(RobustSpec(alpha0=0.25, p=2.0, eps=0.7), losses)
    assert spec2_.eps == 0.7
