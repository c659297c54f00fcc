"""Interaction detection from input Jacobians.

For a focal feature j, the gradient d beta_j(x) / d x_k over all
instances, smoothed against x_j, reveals the structure of the term
beta_j(x) x_j:

  - all curves flat at zero      -> plain linear term (constant attention)
  - only the k = j curve nonzero -> nonlinearity in x_j, no interactions
  - a k != j curve nonzero       -> interaction between x_j and x_k

The synthetic surface plants known cases: x1 is linear, x2 enters as
-x2^2/4 (own-gradient constant near -1/4... the sign depends on how the
optimizer allocated the term), and x4 x5 / 2 is a symmetric linear
interaction whose constant can land on either side or split.
"""

import numpy as np

import localglmnet as lg

N = 20_000

learn_raw, _ = lg.synth_generate(N, 1, lg.rng_stream(1, "datagen"))
learn, _ = lg.standardize(learn_raw)

spec = lg.ModelSpec(q=8, hidden_dims=(20, 15, 10))
params, _ = lg.fit(learn, spec, lg.TrainConfig(batch_size=2000, max_epochs=150, seed=8))

for focal, expectation in (
    ("x1", "all sensitivities flat near zero: beta_1 is constant"),
    ("x2", "own-gradient d beta_2 / d x2 is a nonzero constant: quadratic term"),
    ("x4", "d beta_4 / d x5 is a nonzero constant: linear interaction with x5"),
    ("x5", "interaction mass with x4 (and some with x6 via the x5^2 x6 term)"),
):
    profile = lg.interaction_profiles(params, spec, learn.X, focal,
                                      feature_names=learn.feature_names)
    levels = np.abs(profile.curves).mean(axis=1)
    top = np.argsort(-levels)[:3]
    summary = ", ".join(f"d/d{profile.feature_names[k]}={levels[k]:+.3f}" for k in top)
    print(f"{focal}: strongest mean |sensitivity|: {summary}")
    print(f"    expected: {expectation}")

print("\nEach profile is also available as CSV + SVG through the command line:"
      "\n  localglmnet interactions --model fit/model.json --data learn.csv ...")
