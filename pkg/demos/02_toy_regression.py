"""
A one-dimensional mixture where averages lie
============================================

85% of the data sits on x > 0 with very noisy labels y = x + N(0, 1); the
remaining 15% sits on x < 0 with noiseless labels y = -x.  A line fit
through the origin by mean absolute deviation chases the majority group and
leaves the minority with large errors.  Training the transport-smoothed
worst-case objective instead flattens the slope so that both groups see
moderate loss.
"""

from marginaldro import OptimizerConfig, RobustSpec, SimSpec, eval_oracle, generate, train

ds = generate(SimSpec(n=2000, d=1, variant="toy_1d", seed=0))
eval_features = generate(SimSpec(n=20000, d=1, variant="toy_1d", seed=99)).features

opt = OptimizerConfig(objective="erm", max_iters=400, step0=0.5, fit_intercept=False)
models = {}
models["erm"] = train(ds, "absolute_deviation", RobustSpec(alpha0=0.3), opt)

# The joint-DRO baseline hedges against high observed losses, which on this
# data mostly means unlucky noise draws in the majority group.
opt_joint = OptimizerConfig(objective="joint_pnorm", max_iters=400, step0=0.5,
                            fit_intercept=False)
models["joint_dro"] = train(ds, "absolute_deviation", RobustSpec(alpha0=0.3, p=2.0),
                            opt_joint)

# The marginal objective moves observed losses between nearby x before taking
# the tail, so it hedges against hard REGIONS rather than hard examples.
opt_marg = OptimizerConfig(objective="marginal", max_iters=300, step0=0.5,
                           fit_intercept=False)
models["marginal_dro"] = train(
    ds, "absolute_deviation", RobustSpec(alpha0=0.3, p=2.0, lipschitz_ratio=10.0),
    opt_marg)

print(f"{'model':>14s} {'slope':>8s} {'worst-5% risk':>14s} {'mean risk':>10s}")
for name, result in models.items():
    report = eval_oracle(result.params, eval_features, "toy_1d", [0.05, 1.0])
    print(f"{name:>14s} {result.params.theta[0]:+8.3f} {report.risks[0]:14.3f} "
          f"{report.mean_risk:10.3f}")

print("""
The marginal model trades a slightly worse average for a far better worst
case.  Note that the plain LAD line lands near slope 0.67, not 1: the
noiseless minority group pulls it down, and the fit is nearly flat in
between (so on mean risk all three models look deceptively similar).
""")
