"""Nadam minibatch training with validation split and early stopping.

The training loop scans all epochs and returns the parameter snapshot
with the smallest validation loss (no early abort unless a patience is
set), so the selected model is exactly reproducible from the history.
All shuffling and splitting is driven by the config seed.
"""

import csv
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .families import get_family, get_link, fit_null
from .linalg import rng_stream
from .model import ModelSpec, Params, init_params, forward, loss_and_param_grads

__all__ = [
    "TrainConfig",
    "TrainHistory",
    "Moments",
    "load_train_config",
    "split_indices",
    "split_learn",
    "nadam_step",
    "evaluate_loss",
    "fit",
]


@dataclass
class TrainConfig:
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    batch_size: int = 5000
    max_epochs: int = 100
    val_fraction: float = 0.2
    seed: int = 0
    shuffle: bool = True
    patience: int | None = None  # optional early abort; default scans all epochs

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")


def load_train_config(path) -> TrainConfig:
    """Build a TrainConfig from a plain key = value file."""
    from .data import read_key_values

    kv = read_key_values(path)
    kwargs = {}
    casts = {
        "learning_rate": float, "beta1": float, "beta2": float, "eps": float,
        "batch_size": int, "max_epochs": int, "val_fraction": float,
        "seed": int, "patience": int,
    }
    for key, value in kv.items():
        if key == "shuffle":
            if value.lower() not in ("true", "false"):
                raise ConfigError(f"shuffle must be true or false, got {value!r}")
            kwargs[key] = value.lower() == "true"
        elif key in casts:
            try:
                kwargs[key] = casts[key](value)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        else:
            raise ConfigError(f"unknown training option {key!r}")
    return TrainConfig(**kwargs)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    epoch_seconds: list = field(default_factory=list)
    best_epoch: int = 0

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for e, (tr, va) in enumerate(zip(self.train_loss, self.val_loss), start=1):
                writer.writerow([e, repr(tr), repr(va)])


def split_indices(n: int, val_fraction: float, rng: np.random.Generator):
    """Disjoint, exhaustive (train, validation) index split.

    The validation size is the rounded fraction, clamped so both parts
    are nonempty; the partition is a seeded permutation.
    """
    if n < 2:
        raise ValueError(f"need at least 2 instances to split, got {n}")
    n_val = int(round(n * val_fraction))
    n_val = min(max(n_val, 1), n - 1)
    perm = rng.permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def split_learn(dataset, val_fraction: float, rng: np.random.Generator):
    """Split a dataset into (training, validation) parts."""
    idx_train, idx_val = split_indices(dataset.n, val_fraction, rng)
    return dataset.subset(idx_train), dataset.subset(idx_val)


@dataclass
class Moments:
    """Nadam first/second moment accumulators, Params-shaped."""

    m: Params
    v: Params

    @classmethod
    def zeros_like(cls, params: Params) -> "Moments":
        def z():
            return Params(weights=[np.zeros_like(w) for w in params.weights],
                          biases=[np.zeros_like(b) for b in params.biases],
                          beta0=0.0)
        return cls(m=z(), v=z())


def nadam_step(params: Params, grads: Params, moments: Moments, t: int,
               config: TrainConfig):
    """One Nadam update; returns new (params, moments).

    Standard exponential moments with a Nesterov-style lookahead on the
    bias-corrected first moment:

        m_hat = beta1 * m_t / (1 - beta1^(t+1)) + (1 - beta1) * g / (1 - beta1^t)
        v_hat = v_t / (1 - beta2^t)
        step  = lr * m_hat / (sqrt(v_hat) + eps)
    """
    if t < 1:
        raise ValueError(f"step index must be >= 1, got {t}")
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.eps
    c1 = 1.0 - b1 ** t
    c1_next = 1.0 - b1 ** (t + 1)
    c2 = 1.0 - b2 ** t

    def update(theta, g, m, v):
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient in optimizer step")
        m_new = b1 * m + (1.0 - b1) * g
        v_new = b2 * v + (1.0 - b2) * g * g
        m_hat = b1 * m_new / c1_next + (1.0 - b1) * g / c1
        return theta - lr * m_hat / (np.sqrt(v_new / c2) + eps), m_new, v_new

    def update_list(thetas, gs, ms, vs):
        triples = [update(th, g, m, v) for th, g, m, v in zip(thetas, gs, ms, vs)]
        return ([tr[0] for tr in triples], [tr[1] for tr in triples],
                [tr[2] for tr in triples])

    new_w, m_w, v_w = update_list(params.weights, grads.weights,
                                  moments.m.weights, moments.v.weights)
    new_b, m_b, v_b = update_list(params.biases, grads.biases,
                                  moments.m.biases, moments.v.biases)
    th0, m0, v0 = update(params.beta0, grads.beta0, moments.m.beta0, moments.v.beta0)
    new_params = Params(weights=new_w, biases=new_b, beta0=float(th0))
    new_moments = Moments(m=Params(weights=m_w, biases=m_b, beta0=float(m0)),
                          v=Params(weights=v_w, biases=v_b, beta0=float(v0)))
    return new_params, new_moments


def evaluate_loss(params: Params, spec: ModelSpec, dataset) -> float:
    """Mean deviance of the model on a dataset."""
    family = get_family(spec.family)
    trace = forward(params, spec, dataset.X, dataset.v)
    return family.loss(dataset.y, trace.mu, dataset.v)


def fit(dataset, spec: ModelSpec, config: TrainConfig):
    """Train on a seeded train/validation split; return best-validation params.

    The returned parameters are a full copy snapshotted at the epoch with
    the smallest validation loss. History covers every epoch run.
    """
    if dataset.q != spec.q:
        raise ConfigError(f"dataset has {dataset.q} feature columns, spec expects {spec.q}")
    train_set, val_set = split_learn(dataset, config.val_fraction,
                                     rng_stream(config.seed, "split"))
    family = get_family(spec.family)
    link = get_link(spec.link)
    null_value = fit_null(train_set.y, train_set.v, family)
    params = init_params(spec, rng_stream(config.seed, "init"),
                         output_bias=float(link.g(null_value)))
    moments = Moments.zeros_like(params)
    shuffle_rng = rng_stream(config.seed, "shuffle")

    history = TrainHistory()
    best_params = params.copy()
    best_val = np.inf
    n_clamped = 0
    t = 0
    n_train = train_set.n
    for epoch in range(1, config.max_epochs + 1):
        tic = time.perf_counter()
        order = shuffle_rng.permutation(n_train) if config.shuffle else np.arange(n_train)
        for start in range(0, n_train, config.batch_size):
            idx = order[start:start + config.batch_size]
            try:
                _, grads = loss_and_param_grads(params, spec, train_set.X[idx],
                                                train_set.y[idx], train_set.v[idx])
            except NumericError as exc:
                raise NumericError(
                    f"epoch {epoch}, batch starting at {start}: {exc}") from exc
            t += 1
            params, moments = nadam_step(params, grads, moments, t, config)
        trace = forward(params, spec, train_set.X, train_set.v)
        n_clamped += trace.n_clamped
        train_loss = family.loss(train_set.y, trace.mu, train_set.v)
        val_loss = evaluate_loss(params, spec, val_set)
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.epoch_seconds.append(time.perf_counter() - tic)
        if val_loss < best_val:
            best_val = val_loss
            best_params = params.copy()
            history.best_epoch = epoch
        if config.patience is not None and epoch - history.best_epoch >= config.patience:
            break
    if n_clamped:
        warnings.warn(f"linear predictor clamp engaged {n_clamped} times during "
                      "training evaluations", RuntimeWarning, stacklevel=2)
    return best_params, history
