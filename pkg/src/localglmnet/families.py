"""Exponential-dispersion losses, link functions, and GLM baselines.

Two response families are supported: Gaussian responses scored by mean
squared error, and Poisson counts with exposures scored by mean Poisson
deviance. Both losses are strictly consistent for the mean, nonnegative,
and zero at a saturated fit. The GLM fit uses iteratively reweighted
least squares with step-halving.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError

__all__ = [
    "IdentityLink",
    "LogLink",
    "Gaussian",
    "Poisson",
    "get_family",
    "get_link",
    "mse_loss",
    "poisson_deviance",
    "fit_null",
    "fit_glm",
    "GlmFit",
]


class IdentityLink:
    name = "identity"

    def g(self, mu):
        return np.asarray(mu, dtype=float)

    def inv(self, eta):
        return np.asarray(eta, dtype=float)

    def inv_deriv(self, eta):
        return np.ones_like(np.asarray(eta, dtype=float))


class LogLink:
    name = "log"

    def g(self, mu):
        return np.log(mu)

    def inv(self, eta):
        return np.exp(eta)

    def inv_deriv(self, eta):
        return np.exp(eta)


class Gaussian:
    """Gaussian family: quadratic cumulant, identity canonical link, MSE loss."""

    name = "gaussian"
    canonical_link = IdentityLink()
    uses_exposure = False

    def loss(self, y, mu, v=None):
        return mse_loss(y, mu)

    def dloss_dmu(self, y, mu):
        # d/dmu of (1/n) sum (y - mu)^2
        y = np.asarray(y, dtype=float)
        return 2.0 * (mu - y) / y.shape[0]


class Poisson:
    """Poisson family: exponential cumulant, log canonical link, deviance loss.

    Exposure enters the mean multiplicatively, mu = v * exp(eta), which is
    the offset-log(v) parameterization of a count rate per unit exposure.
    """

    name = "poisson"
    canonical_link = LogLink()
    uses_exposure = True

    def loss(self, y, mu, v=None):
        return poisson_deviance(y, mu, v)

    def dloss_dmu(self, y, mu):
        # d/dmu of (2/n) sum (mu - y - y log(mu/y))
        y = np.asarray(y, dtype=float)
        return 2.0 * (1.0 - y / mu) / y.shape[0]


_FAMILIES = {"gaussian": Gaussian(), "poisson": Poisson()}
_LINKS = {"identity": IdentityLink(), "log": LogLink()}


def get_family(name: str):
    try:
        return _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_FAMILIES)}") from None


def get_link(name: str):
    try:
        return _LINKS[name]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; choose from {sorted(_LINKS)}") from None


def mse_loss(y: np.ndarray, mu: np.ndarray) -> float:
    """Mean squared error (1/n) sum (y_i - mu_i)^2."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if y.shape != mu.shape:
        raise ValueError(f"length mismatch: y has shape {y.shape}, mu has {mu.shape}")
    if y.size == 0:
        raise ValueError("need at least one observation")
    return float(np.mean((y - mu) ** 2))


def poisson_deviance(y: np.ndarray, mu: np.ndarray, v: np.ndarray | None = None) -> float:
    """Mean Poisson deviance (2/n) sum (mu_i - y_i - y_i log(mu_i / y_i)).

    The y_i = 0 term is read as plain mu_i (the y log y -> 0 limit). The
    exposure vector is accepted for interface symmetry and validation only;
    it already enters through mu = v * exp(eta).
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if y.shape != mu.shape:
        raise ValueError(f"length mismatch: y has shape {y.shape}, mu has {mu.shape}")
    if y.size == 0:
        raise ValueError("need at least one observation")
    if np.any(mu <= 0.0):
        raise ValueError("Poisson deviance requires mu > 0")
    if v is not None and np.any(np.asarray(v, dtype=float) <= 0.0):
        raise ValueError("exposures must be positive")
    terms = mu - y
    pos = y > 0
    terms[pos] -= y[pos] * np.log(mu[pos] / y[pos])
    return float(2.0 * np.mean(terms))


def fit_null(y: np.ndarray, v: np.ndarray | None = None, family=None) -> float:
    """Loss-minimizing constant: the mean for Gaussian, sum(y)/sum(v) for Poisson.

    For the Poisson family the returned value is the frequency per unit
    exposure; the fitted mean for instance i is v_i times this value.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("need a nonempty dataset")
    family = family or Gaussian()
    if not family.uses_exposure:
        return float(np.mean(y))
    v = np.ones_like(y) if v is None else np.asarray(v, dtype=float)
    total = float(np.sum(v))
    if total == 0.0:
        raise ValueError("total exposure is zero")
    return float(np.sum(y) / total)


@dataclass
class GlmFit:
    """Fitted GLM: intercept, coefficient vector, and convergence info."""

    beta0: float
    beta: np.ndarray
    deviance: float
    n_iter: int

    def linear_predictor(self, X: np.ndarray, v: np.ndarray | None = None,
                         link=None) -> np.ndarray:
        eta = self.beta0 + np.asarray(X, dtype=float) @ self.beta
        if v is not None and link is not None and link.name == "log":
            eta = eta + np.log(np.asarray(v, dtype=float))
        return eta


def _check_full_rank(X: np.ndarray, column_names) -> None:
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        names = column_names or [f"col{j}" for j in range(X.shape[1] - 1)]
        # Column 0 is the internal intercept; report the trailing pivots.
        bad = sorted(int(j) - 1 for j in piv[rank:])
        labels = ["intercept" if j < 0 else str(names[j]) for j in bad]
        raise NumericError(
            "design matrix is rank deficient; collinear columns: " + ", ".join(labels)
        )


def fit_glm(
    X: np.ndarray,
    y: np.ndarray,
    v: np.ndarray | None = None,
    family=None,
    link=None,
    column_names=None,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> GlmFit:
    """Fit a GLM by IRLS with step-halving.

    Exposure is treated as an offset log(v) under the log link. Converges
    when the relative deviance change drops below ``tol``; rank-deficient
    designs raise :class:`NumericError` naming the collinear columns.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    family = family or Gaussian()
    link = link or family.canonical_link
    v = np.ones(n) if v is None else np.asarray(v, dtype=float)

    design = np.column_stack([np.ones(n), X])
    _check_full_rank(design, column_names)
    offset = np.log(v) if family.uses_exposure else np.zeros(n)

    # Null start: intercept at the link-scale null value, slopes zero.
    coef = np.zeros(design.shape[1])
    coef[0] = float(link.g(fit_null(y, v, family)))

    def mean_of(c):
        return link.inv(design @ c + offset)

    dev = family.loss(y, mean_of(coef), v)
    n_iter = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for n_iter in range(1, max_iter + 1):
            eta = design @ coef + offset
            mu = link.inv(eta)
            w = link.inv_deriv(eta)  # canonical links: W = (g^-1)'(eta)
            z = (eta - offset) + (y - mu) / np.maximum(w, 1e-300)
            sw = np.sqrt(w)
            new_coef, *_ = np.linalg.lstsq(design * sw[:, None], z * sw, rcond=None)
            # Step-halving keeps the deviance from increasing on bad steps.
            step = new_coef - coef
            new_dev = dev
            for _ in range(30):
                cand = coef + step
                try:
                    new_dev = family.loss(y, mean_of(cand), v)
                except ValueError:
                    new_dev = np.inf
                if np.isfinite(new_dev) and new_dev <= dev + 1e-14 * max(1.0, abs(dev)):
                    break
                step = step / 2.0
            coef = coef + step
            prev, dev = dev, float(new_dev if np.isfinite(new_dev) else dev)
            if abs(prev - dev) <= tol * max(1.0, abs(prev)):
                break
    return GlmFit(beta0=float(coef[0]), beta=coef[1:].copy(), deviance=dev, n_iter=n_iter)
