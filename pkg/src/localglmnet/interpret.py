"""Variable selection, variable importance, and interaction profiling.

The selection test calibrates the null fluctuation of fitted attentions
from a control feature: the band +/- q(alpha/2) * s_control around zero
should cover all attentions of a feature that contributes nothing. A
feature whose attentions escape the band more often than the significance
level allows is kept. Interactions are read off the input Jacobians
d beta_j / d x_k, smoothed against x_j with a penalized cubic B-spline.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .linalg import std_normal_quantile
from .model import ModelSpec, Params, batch_input_jacobian

__all__ = [
    "selection_stats",
    "interval",
    "coverage_and_verdict",
    "SelectionRow",
    "SelectionReport",
    "selection_report",
    "ImportanceReport",
    "variable_importance",
    "smooth_curve",
    "InteractionProfile",
    "interaction_profiles",
]

# A feature is droppable when its outside-band fraction stays within this
# multiple of alpha; the raw coverage is always reported alongside.
DROP_MARGIN = 2.0


def selection_stats(attention_col: np.ndarray):
    """Mean and sample standard deviation (n-1) of one attention column."""
    col = np.asarray(attention_col, dtype=float)
    if col.size < 2:
        raise ValueError(f"need at least 2 instances, got {col.size}")
    return float(col.mean()), float(col.std(ddof=1))


def interval(alpha: float, sd_control: float):
    """Symmetric null band [q(alpha/2) * s, -q(alpha/2) * s] around zero."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"significance level must be in (0, 1/2), got {alpha}")
    if sd_control < 0.0:
        raise ValueError(f"control sd must be >= 0, got {sd_control}")
    lo = std_normal_quantile(alpha / 2.0) * sd_control
    return lo, -lo


def coverage_and_verdict(attention_col: np.ndarray, band, alpha: float):
    """Fraction of attentions inside the band and the keep/drop verdict.

    Verdict "keep" (reject the no-effect hypothesis) when the outside
    fraction exceeds DROP_MARGIN * alpha, else "droppable".
    """
    lo, hi = band
    if hi < lo:
        raise ValueError(f"invalid interval ({lo}, {hi})")
    col = np.asarray(attention_col, dtype=float)
    inside = (col >= lo) & (col <= hi)
    coverage = float(np.mean(inside))
    outside = float(np.mean(~inside))  # not 1 - coverage: keep the boundary exact
    verdict = "droppable" if outside <= DROP_MARGIN * alpha else "keep"
    return coverage, verdict


@dataclass
class SelectionRow:
    feature: str
    mean: float
    sd: float
    coverage: float
    verdict: str


@dataclass
class SelectionReport:
    rows: list
    control: str
    alpha: float
    lo: float
    hi: float
    control_sd: float

    def verdict_of(self, feature: str) -> str:
        for row in self.rows:
            if row.feature == feature:
                return row.verdict
        raise KeyError(f"no feature {feature!r} in report")

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["feature", "mean", "sd", "coverage", "verdict",
                             "interval_lo", "interval_hi", "control", "alpha"])
            for r in self.rows:
                writer.writerow([r.feature, repr(r.mean), repr(r.sd), repr(r.coverage),
                                 r.verdict, repr(self.lo), repr(self.hi),
                                 self.control, repr(self.alpha)])


def selection_report(attentions: np.ndarray, feature_names, control: str,
                     alpha: float = 0.001) -> SelectionReport:
    """Per-feature selection statistics against a named control column."""
    attentions = np.asarray(attentions, dtype=float)
    names = list(feature_names)
    if control not in names:
        raise ValueError(f"control feature {control!r} not among {names}")
    _, sd_control = selection_stats(attentions[:, names.index(control)])
    lo, hi = interval(alpha, sd_control)
    rows = []
    for j, name in enumerate(names):
        mean, sd = selection_stats(attentions[:, j])
        coverage, verdict = coverage_and_verdict(attentions[:, j], (lo, hi), alpha)
        rows.append(SelectionRow(feature=name, mean=mean, sd=sd,
                                 coverage=coverage, verdict=verdict))
    return SelectionReport(rows=rows, control=control, alpha=alpha, lo=lo, hi=hi,
                           control_sd=sd_control)


@dataclass
class ImportanceReport:
    features: list
    vi: np.ndarray
    order: list  # feature indices sorted by decreasing importance
    flagged: list  # features on a 0/1 (non-standardized) scale

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["feature", "importance", "standardized_scale"])
            for j in self.order:
                writer.writerow([self.features[j], repr(float(self.vi[j])),
                                 int(self.features[j] not in self.flagged)])


def variable_importance(attentions: np.ndarray, feature_names=None,
                        standardized=None) -> ImportanceReport:
    """Mean absolute attention per feature, sorted by decreasing value.

    Importances compare across features only when those features live on
    one scale; columns marked non-standardized (e.g. one-hot indicators)
    are included but flagged.
    """
    attentions = np.asarray(attentions, dtype=float)
    q = attentions.shape[1]
    names = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(q)]
    vi = np.mean(np.abs(attentions), axis=0)
    order = list(np.argsort(-vi, kind="stable"))
    flagged = []
    if standardized is not None:
        flagged = [names[j] for j in range(q) if not standardized[j]]
    return ImportanceReport(features=names, vi=vi, order=order, flagged=flagged)


def _greville(knots: np.ndarray, degree: int) -> np.ndarray:
    return np.array([knots[j + 1: j + degree + 1].mean()
                     for j in range(len(knots) - degree - 1)])


def smooth_curve(x: np.ndarray, y: np.ndarray, n_knots: int = 20,
                 smoothing: float = 1.0, grid_size: int = 200):
    """Penalized cubic B-spline regression of y on x, evaluated on a grid.

    Interior knots sit at empirical quantiles of x. The roughness penalty
    is on divided second differences of the coefficients over the Greville
    sites (scaled to match plain second differences at uniform spacing),
    so constants and straight lines are reproduced exactly for any knot
    layout. Returns ``(grid, values)`` over [min x, max x].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if x.size < 10:
        raise ValueError(f"need at least 10 observations, got {x.size}")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise ValueError("x is constant; cannot fit a curve")
    degree = 3
    qs = np.linspace(0.0, 1.0, n_knots + 2)[1:-1]
    interior = np.unique(np.quantile(x, qs))
    interior = interior[(interior > lo) & (interior < hi)]
    knots = np.r_[[lo] * (degree + 1), interior, [hi] * (degree + 1)]

    B = BSpline.design_matrix(x, knots, degree).toarray()
    g = _greville(knots, degree)
    p = B.shape[1]
    dg = np.diff(g)
    sbar = dg.mean()
    D = np.zeros((p - 2, p))
    for j in range(p - 2):
        a, b = sbar / dg[j], sbar / dg[j + 1]
        D[j, j] = a
        D[j, j + 1] = -(a + b)
        D[j, j + 2] = b

    lhs = B.T @ B + smoothing * (D.T @ D)
    rhs = B.T @ y
    try:
        coef = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        coef, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    grid = np.linspace(lo, hi, grid_size)
    values = BSpline.design_matrix(grid, knots, degree).toarray() @ coef
    return grid, values


@dataclass
class InteractionProfile:
    """Smoothed sensitivities of one attention component.

    ``curves[k]`` is the smoothed d beta_focal / d x_k regressed on the
    focal feature's values, evaluated on ``grid``.
    """

    focal: str
    feature_names: list
    grid: np.ndarray
    curves: np.ndarray  # (q, len(grid))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([self.focal] +
                            [f"d_{self.focal}_d_{k}" for k in self.feature_names])
            for i, xval in enumerate(self.grid):
                writer.writerow([repr(float(xval))] +
                                [repr(float(self.curves[k, i]))
                                 for k in range(len(self.feature_names))])


def interaction_profiles(params: Params, spec: ModelSpec, X: np.ndarray,
                         focal, feature_names=None, n_knots: int = 20,
                         smoothing: float = 1.0, grid_size: int = 200) -> InteractionProfile:
    """Input-Jacobian sensitivities of one attention, smoothed against x_focal.

    A flat curve for k == focal means the focal term is linear; a nonzero
    curve for k != focal reveals an interaction between the two features.
    """
    X = np.asarray(X, dtype=float)
    names = list(feature_names) if feature_names is not None else \
        [f"x{j + 1}" for j in range(spec.q)]
    j = names.index(focal) if isinstance(focal, str) else int(focal)
    jac = batch_input_jacobian(params, spec, X)  # (n, q, q)
    xj = X[:, j]
    curves = []
    grid = None
    for k in range(spec.q):
        grid, values = smooth_curve(xj, jac[:, j, k], n_knots=n_knots,
                                    smoothing=smoothing, grid_size=grid_size)
        curves.append(values)
    return InteractionProfile(focal=names[j], feature_names=names,
                              grid=grid, curves=np.asarray(curves))
