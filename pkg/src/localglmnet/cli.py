"""Command-line front end.

Subcommands cover the full pipeline: ``synth`` writes the synthetic
benchmark datasets, ``fit`` trains the null / GLM / LocalGLMnet ladder
and writes the loss table, ``report`` emits attention, contribution,
selection, importance and per-level boxplot outputs, ``interactions``
writes smoothed sensitivity curves, and ``drop-refit`` re-runs ``fit``
with named features removed.

Every figure is an SVG with a sibling CSV holding the exact plotted
numbers. One ``--seed`` drives all randomness through named substreams,
so re-running a command reproduces its outputs byte for byte. Exit codes:
0 success, 2 configuration error, 3 data/IO error, 4 numeric failure.
"""

import argparse
import os
import sys

import numpy as np

from . import data as data_mod
from . import svg
from .errors import ConfigError, DataError, NumericError
from .families import fit_glm, fit_null, get_family, get_link
from .interpret import interaction_profiles, selection_report, variable_importance
from .linalg import rng_stream
from .model import ModelSpec, attention, contributions, forward, load_model, save_model
from .train import TrainConfig, evaluate_loss, fit, load_train_config

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_kv(path, pairs):
    _write(path, "".join(f"{k} = {v}\n" for k, v in pairs))


def _write_rows(path, header, rows):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_model_spec(path, q):
    kv = data_mod.read_key_values(path)
    known = {"hidden_dims", "activations", "family", "link"}
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"{path}: unknown model options {sorted(unknown)}")
    hidden = tuple(int(s) for s in kv["hidden_dims"].split(",") if s.strip()) \
        if kv.get("hidden_dims") else ()
    acts = tuple(s.strip() for s in kv["activations"].split(",")) \
        if kv.get("activations") else None
    try:
        return ModelSpec(q=q, hidden_dims=hidden, activations=acts,
                         family=kv.get("family", "gaussian"),
                         link=kv.get("link", "identity"))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _prepare_datasets(args, schema):
    """Load, optionally add a control column, and standardize with learning moments."""
    learn_raw = data_mod.load_csv(args.learn, schema)
    test_raw = data_mod.load_csv(args.test, schema) if args.test else None
    control = getattr(args, "add_control", "none")
    if control != "none":
        learn_raw = data_mod.add_control(learn_raw, control,
                                         rng_stream(args.seed, "control-learn"))
        if test_raw is not None:
            test_raw = data_mod.add_control(test_raw, control,
                                            rng_stream(args.seed, "control-test"))
    learn, std_params = data_mod.standardize(learn_raw)
    test = data_mod.apply_standardize(test_raw, std_params) if test_raw is not None else None
    return learn_raw, test_raw, learn, test, std_params


def _glm_design(dataset):
    """Design for the GLM baseline: standardized columns plus one-hot groups
    with a dropped reference level (full one-hot is deliberately not full rank)."""
    drop = {idx[0] for idx in dataset.groups.values()}
    cols = [j for j, kind in enumerate(dataset.feature_kinds)
            if kind in data_mod.STANDARDIZED_KINDS or
            (kind == "onehot" and j not in drop)]
    return dataset.X[:, cols], [dataset.feature_names[j] for j in cols]


def cmd_synth(args):
    os.makedirs(args.out_dir, exist_ok=True)
    rng = rng_stream(args.seed, "datagen")
    learn, test = data_mod.synth_generate(args.n_learn, args.n_test, rng)
    data_mod.write_csv(learn, os.path.join(args.out_dir, "learn.csv"))
    data_mod.write_csv(test, os.path.join(args.out_dir, "test.csv"))
    pairs = [("seed", args.seed), ("n_learn", args.n_learn), ("n_test", args.n_test)]
    for tag, ds in (("learn", learn), ("test", test)):
        corr = float(np.corrcoef(ds.X[:, 1], ds.X[:, 7])[0, 1])
        pairs.append((f"{tag}_corr_x2_x8", repr(corr)))
        pairs.append((f"{tag}_var_y", repr(float(ds.y.var()))))
        pairs.append((f"{tag}_max_abs_feature_mean", repr(float(np.abs(ds.X.mean(0)).max()))))
    _write_kv(os.path.join(args.out_dir, "manifest.txt"), pairs)
    return 0


def _fit_pipeline(args, schema):
    os.makedirs(args.out_dir, exist_ok=True)
    learn_raw, test_raw, learn, test, std_params = _prepare_datasets(args, schema)
    config = load_train_config(args.train_config)
    if args.seed is not None:
        config.seed = args.seed
    spec = _load_model_spec(args.spec, q=learn.q)
    family = get_family(spec.family)
    link = get_link(spec.link)

    rows = []
    if args.synthetic_truth:
        if learn_raw.feature_names[:8] != [f"x{j}" for j in range(1, 9)]:
            raise ConfigError("--synthetic-truth needs feature columns x1..x8")
        mu_l = data_mod.true_mu(learn_raw.X[:, :8])
        row = ["true", repr(family.loss(learn_raw.y, mu_l, learn_raw.v))]
        if test_raw is not None:
            mu_t = data_mod.true_mu(test_raw.X[:, :8])
            row.append(repr(family.loss(test_raw.y, mu_t, test_raw.v)))
        rows.append(row)

    null_value = fit_null(learn.y, learn.v, family)
    null_mu = (learn.v * null_value) if family.uses_exposure else np.full(learn.n, null_value)
    row = ["null", repr(family.loss(learn.y, null_mu, learn.v))]
    if test is not None:
        null_mu_t = (test.v * null_value) if family.uses_exposure else np.full(test.n, null_value)
        row.append(repr(family.loss(test.y, null_mu_t, test.v)))
    rows.append(row)

    Xg, glm_names = _glm_design(learn)
    glm = fit_glm(Xg, learn.y, learn.v, family, link, column_names=glm_names)
    glm_mu = link.inv(glm.linear_predictor(Xg, learn.v, link))
    row = ["glm", repr(family.loss(learn.y, glm_mu, learn.v))]
    if test is not None:
        Xg_t, _ = _glm_design(test)
        glm_mu_t = link.inv(glm.linear_predictor(Xg_t, test.v, link))
        row.append(repr(family.loss(test.y, glm_mu_t, test.v)))
    rows.append(row)

    params, history = fit(learn, spec, config)
    row = ["localglmnet", repr(evaluate_loss(params, spec, learn))]
    if test is not None:
        row.append(repr(evaluate_loss(params, spec, test)))
    rows.append(row)

    header = ["model", "in_sample"] + (["out_of_sample"] if test is not None else [])
    if test is None:
        print("warning: no test file given; loss table is in-sample only", file=sys.stderr)
    _write_rows(os.path.join(args.out_dir, "losses.csv"), header, rows)
    history.write_csv(os.path.join(args.out_dir, "history.csv"))
    preprocess = {
        "standardize": std_params.to_dict(),
        "feature_names": list(learn.feature_names),
        "feature_kinds": list(learn.feature_kinds),
        "groups": {k: list(v) for k, v in learn.groups.items()},
        "control": getattr(args, "add_control", "none"),
    }
    save_model(os.path.join(args.out_dir, "model.json"), spec, params, preprocess)
    return 0


def cmd_fit(args):
    return _fit_pipeline(args, data_mod.load_schema(args.schema))


def cmd_drop_refit(args):
    dropped = [s.strip() for s in args.drop.split(",") if s.strip()]
    if not dropped:
        raise ConfigError("--drop needs at least one column name")
    schema = data_mod.load_schema(args.schema).drop(dropped)
    return _fit_pipeline(args, schema)


def _report_dataset(args, preprocess):
    schema = data_mod.load_schema(args.schema)
    dataset = data_mod.load_csv(args.data, schema)
    control_dist = preprocess.get("control", "none")
    if control_dist != "none":
        dataset = data_mod.add_control(dataset, control_dist,
                                       rng_stream(args.seed, "control-report"))
    std = data_mod.StandardizeParams.from_dict(preprocess["standardize"])
    dataset = data_mod.apply_standardize(dataset, std)
    if list(dataset.feature_names) != list(preprocess["feature_names"]):
        raise ConfigError(
            f"data columns {dataset.feature_names} do not match the model's "
            f"training columns {preprocess['feature_names']}")
    return dataset


def cmd_report(args):
    os.makedirs(args.out_dir, exist_ok=True)
    spec, params, preprocess = load_model(args.model)
    if preprocess is None:
        raise ConfigError(f"{args.model}: model file carries no preprocessing block")
    dataset = _report_dataset(args, preprocess)

    beta = attention(params, spec, dataset.X)
    contrib = contributions(params, spec, dataset.X)
    std_cols = [j for j, k in enumerate(dataset.feature_kinds)
                if k in data_mod.STANDARDIZED_KINDS]
    std_names = [dataset.feature_names[j] for j in std_cols]

    control = args.control
    if control is None and preprocess.get("control", "none") != "none":
        control = dataset.feature_names[-1]
    if control is None:
        raise ConfigError("no control feature: pass --control or fit with --add-control")
    report = selection_report(beta[:, std_cols], std_names, control, args.alpha)
    report.write_csv(os.path.join(args.out_dir, "selection.csv"))

    importance = variable_importance(
        beta, dataset.feature_names,
        standardized=[k in data_mod.STANDARDIZED_KINDS for k in dataset.feature_kinds])
    importance.write_csv(os.path.join(args.out_dir, "importance.csv"))
    order = importance.order
    _write(os.path.join(args.out_dir, "importance.svg"),
           svg.bar_svg([importance.features[j] for j in order],
                       [importance.vi[j] for j in order],
                       title="Variable importance", ylabel="mean |attention|"))

    n_sample = min(args.sample, dataset.n)
    if args.sample > dataset.n:
        print(f"warning: sample {args.sample} exceeds n={dataset.n}; clamped",
              file=sys.stderr)
    pick = np.sort(rng_stream(args.seed, "subsample").choice(dataset.n, size=n_sample,
                                                             replace=False))
    ylim_beta = (float(beta[pick][:, std_cols].min()) - 0.05,
                 float(beta[pick][:, std_cols].max()) + 0.05)
    ylim_contrib = (float(contrib[pick][:, std_cols].min()) - 0.05,
                    float(contrib[pick][:, std_cols].max()) + 0.05)
    guide = [(0.0, "#d62728"), (report.lo, "#17becf"), (report.hi, "#17becf")]
    for j, name in zip(std_cols, std_names):
        x = dataset.X[pick, j]
        _write_rows(os.path.join(args.out_dir, f"attention_{name}.csv"),
                    [name, "attention"],
                    [[repr(float(a)), repr(float(b))] for a, b in zip(x, beta[pick, j])])
        _write(os.path.join(args.out_dir, f"attention_{name}.svg"),
               svg.scatter_svg(x, beta[pick, j], title=f"Attention: {name}",
                               xlabel=name, ylabel="attention",
                               hlines=guide, ylim=ylim_beta))
        _write_rows(os.path.join(args.out_dir, f"contribution_{name}.csv"),
                    [name, "contribution"],
                    [[repr(float(a)), repr(float(c))] for a, c in zip(x, contrib[pick, j])])
        _write(os.path.join(args.out_dir, f"contribution_{name}.svg"),
               svg.scatter_svg(x, contrib[pick, j], title=f"Contribution: {name}",
                               xlabel=name, ylabel="contribution",
                               hlines=[(0.0, "#d62728")], ylim=ylim_contrib))

    for group, cols in dataset.groups.items():
        rows, boxes = [], []
        for j in cols:
            level = dataset.feature_names[j].split("=", 1)[1]
            on = beta[dataset.X[:, j] == 1.0, j]
            summary = (np.percentile(on, [0, 25, 50, 75, 100]) if on.size
                       else np.zeros(5))
            rows.append([level] + [repr(float(s)) for s in summary] + [int(on.size)])
            boxes.append((level, summary))
        _write_rows(os.path.join(args.out_dir, f"onehot_{group}.csv"),
                    ["level", "whisker_lo", "q1", "median", "q3", "whisker_hi", "n"],
                    rows)
        _write(os.path.join(args.out_dir, f"onehot_{group}.svg"),
               svg.box_svg(boxes, title=f"Attention by level: {group}",
                           ylabel="attention"))
    return 0


def cmd_interactions(args):
    os.makedirs(args.out_dir, exist_ok=True)
    spec, params, preprocess = load_model(args.model)
    if preprocess is None:
        raise ConfigError(f"{args.model}: model file carries no preprocessing block")
    dataset = _report_dataset(args, preprocess)
    X = dataset.X
    if args.sample and args.sample < dataset.n:
        pick = np.sort(rng_stream(args.seed, "subsample").choice(dataset.n,
                                                                 size=args.sample,
                                                                 replace=False))
        X = X[pick]
    std_names = [n for n, k in zip(dataset.feature_names, dataset.feature_kinds)
                 if k in data_mod.STANDARDIZED_KINDS]
    focal = [s.strip() for s in args.focal.split(",")] if args.focal else std_names
    for name in focal:
        if name not in dataset.feature_names:
            raise ConfigError(f"unknown focal feature {name!r}")
        profile = interaction_profiles(params, spec, X, name,
                                       feature_names=dataset.feature_names,
                                       n_knots=args.knots)
        profile.write_csv(os.path.join(args.out_dir, f"interaction_{name}.csv"))
        curves = [(k, profile.curves[i]) for i, k in enumerate(profile.feature_names)]
        _write(os.path.join(args.out_dir, f"interaction_{name}.svg"),
               svg.line_svg(profile.grid, curves,
                            title=f"Sensitivities of attention {name}",
                            xlabel=name, ylabel=f"d attention_{name} / d x_k"))
    return 0


def _add_common_fit_args(p):
    p.add_argument("--learn", required=True, help="learning-set CSV")
    p.add_argument("--test", help="test-set CSV (omit for in-sample-only table)")
    p.add_argument("--schema", required=True, help="schema file (name: kind per line)")
    p.add_argument("--spec", required=True, help="model spec file (key = value)")
    p.add_argument("--train-config", required=True, help="training config file (key = value)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (overrides the training config seed)")
    p.add_argument("--add-control", choices=["none", "normal", "uniform"], default="none",
                   help="append an i.i.d. random control feature before fitting")
    p.add_argument("--synthetic-truth", action="store_true",
                   help="add the known synthetic regression surface to the loss table")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="localglmnet",
        description="Train and interpret LocalGLMnet regression models on tabular data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark datasets")
    p.add_argument("--n-learn", type=int, default=100000)
    p.add_argument("--n-test", type=int, default=100000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit null, GLM and LocalGLMnet; write the loss table")
    _add_common_fit_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("drop-refit", help="refit with named feature columns removed")
    _add_common_fit_args(p)
    p.add_argument("--drop", required=True, help="comma-separated schema columns to drop")
    p.set_defaults(func=cmd_drop_refit)

    p = sub.add_parser("report", help="attention/contribution/selection/importance reports")
    p.add_argument("--model", required=True, help="model.json from fit")
    p.add_argument("--data", required=True, help="CSV of instances to report on")
    p.add_argument("--schema", required=True)
    p.add_argument("--alpha", type=float, default=0.001, help="significance level")
    p.add_argument("--control", help="feature column used as the selection control")
    p.add_argument("--sample", type=int, default=5000, help="scatter subsample size")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("interactions", help="smoothed input-Jacobian sensitivity curves")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--focal", help="comma-separated focal features (default: all standardized)")
    p.add_argument("--sample", type=int, default=0, help="cap instances (0 = all)")
    p.add_argument("--knots", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_interactions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
