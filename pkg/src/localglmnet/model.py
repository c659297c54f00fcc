"""The LocalGLMnet architecture.

A feed-forward tower maps the q-dimensional input back to q regression
attentions beta(x); the skip connection then forms the linear predictor

    eta(x) = beta0 + <beta(x), x>

so the link-scale response decomposes additively into per-feature
contributions beta_j(x) * x_j. The tower is small and fixed, so the
backward pass (parameter gradients) and input Jacobians d beta_j / d x_k
are derived by hand instead of going through an autodiff tape.
"""

import base64
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .families import get_family, get_link

__all__ = [
    "ModelSpec",
    "Params",
    "ForwardTrace",
    "init_params",
    "forward",
    "attention",
    "contributions",
    "predict_mu",
    "loss_and_param_grads",
    "input_jacobian",
    "batch_input_jacobian",
    "save_model",
    "load_model",
]

# Linear predictor is clamped to this window before exponentiation under
# the log link; prevents overflow early in training.
ETA_CLAMP = 30.0

_ACTIVATIONS = ("tanh", "linear")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description: widths, activations, response family and link.

    ``hidden_dims`` are the widths of the intermediate tower layers; the
    tower input and output are both q. ``activations`` has one tag per
    layer (default: tanh on every hidden layer, linear on the output
    layer), restricted to differentiable choices so input gradients exist.
    """

    q: int
    hidden_dims: tuple = ()
    activations: tuple = None
    family: str = "gaussian"
    link: str = "identity"

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"feature dimension must be >= 1, got {self.q}")
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden layer widths must be >= 1")
        depth = len(self.hidden_dims) + 1
        if self.activations is None:
            acts = ("tanh",) * (depth - 1) + ("linear",)
        else:
            acts = tuple(self.activations)
        if len(acts) != depth:
            raise ValueError(f"need {depth} activation tags, got {len(acts)}")
        for a in acts:
            if a not in _ACTIVATIONS:
                raise ValueError(f"unsupported activation {a!r}; choose from {_ACTIVATIONS}")
        object.__setattr__(self, "activations", acts)
        get_family(self.family)
        get_link(self.link)

    @property
    def layer_dims(self) -> tuple:
        """(q_0, q_1, ..., q_d) with q_0 = q_d = q."""
        return (self.q, *self.hidden_dims, self.q)

    @property
    def depth(self) -> int:
        return len(self.hidden_dims) + 1


@dataclass
class Params:
    """All trainable state: per-layer weights/biases plus the output bias.

    ``weights[m]`` has shape (q_m, q_{m+1}) so layer m maps activations by
    ``z @ weights[m] + biases[m]``. ``beta0`` is the intercept added after
    the scalar product with the input.
    """

    weights: list
    biases: list
    beta0: float

    def copy(self) -> "Params":
        return Params(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            beta0=float(self.beta0),
        )

    def check_finite(self) -> None:
        for m, (w, b) in enumerate(zip(self.weights, self.biases)):
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"non-finite parameters in layer {m + 1}")
        if not np.isfinite(self.beta0):
            raise NumericError("non-finite output bias")


@dataclass
class ForwardTrace:
    """Cached forward pass for one batch.

    ``activations[0]`` is the input; ``attentions`` is the tower output
    beta(x); ``eta`` is beta0 + row-sums of attentions * x; ``mu`` is the
    mean on the response scale (exposure-scaled under the log link).
    ``n_clamped`` counts linear-predictor entries hit by the overflow clamp.
    """

    pre_activations: list
    activations: list
    attentions: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    n_clamped: int = 0


def _act(name, a):
    return np.tanh(a) if name == "tanh" else a


def _act_deriv(name, a):
    if name == "tanh":
        t = np.tanh(a)
        return 1.0 - t * t
    return np.ones_like(a)


def init_params(spec: ModelSpec, rng: np.random.Generator, output_bias: float = 0.0) -> Params:
    """Glorot-uniform weights, zero biases, output bias as given.

    Callers that know the data pass the link-scale null value as
    ``output_bias`` so training starts from the null model.
    """
    dims = spec.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Params(weights=weights, biases=biases, beta0=float(output_bias))


def _tower(params: Params, spec: ModelSpec, X: np.ndarray):
    """Run the attention tower, returning per-layer pre-activations and activations."""
    pre, acts = [], [X]
    z = X
    for m in range(spec.depth):
        a = z @ params.weights[m] + params.biases[m]
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite activations in layer {m + 1}")
        z = _act(spec.activations[m], a)
        pre.append(a)
        acts.append(z)
    return pre, acts


def forward(params: Params, spec: ModelSpec, X: np.ndarray,
            v: np.ndarray | None = None) -> ForwardTrace:
    """Full forward pass: attentions, linear predictor, and response mean."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.q:
        raise ValueError(f"X must have shape (n, {spec.q}), got {X.shape}")
    pre, acts = _tower(params, spec, X)
    beta = acts[-1]
    eta = params.beta0 + np.sum(beta * X, axis=1)
    link = get_link(spec.link)
    n_clamped = 0
    if spec.link == "log":
        n_clamped = int(np.sum(np.abs(eta) > ETA_CLAMP))
        mu = link.inv(np.clip(eta, -ETA_CLAMP, ETA_CLAMP))
    else:
        mu = link.inv(eta)
    if get_family(spec.family).uses_exposure and v is not None:
        mu = mu * np.asarray(v, dtype=float)
    return ForwardTrace(pre_activations=pre, activations=acts, attentions=beta,
                        eta=eta, mu=mu, n_clamped=n_clamped)


def attention(params: Params, spec: ModelSpec, X: np.ndarray) -> np.ndarray:
    """Regression attentions beta_j(x_i) as an (n, q) matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.q:
        raise ValueError(f"X must have shape (n, {spec.q}), got {X.shape}")
    _, acts = _tower(params, spec, X)
    return acts[-1]


def contributions(params: Params, spec: ModelSpec, X: np.ndarray) -> np.ndarray:
    """Per-feature terms beta_j(x_i) * x_ij of the additive decomposition."""
    X = np.asarray(X, dtype=float)
    return attention(params, spec, X) * X


def predict_mu(params: Params, spec: ModelSpec, X: np.ndarray,
               v: np.ndarray | None = None) -> np.ndarray:
    """Response-scale predictions."""
    return forward(params, spec, X, v).mu


def loss_and_param_grads(params: Params, spec: ModelSpec, X: np.ndarray,
                         y: np.ndarray, v: np.ndarray | None = None):
    """Batch loss and its gradient with respect to every parameter.

    Returns ``(loss, grads)`` where grads is Params-shaped. The loss is
    the family's mean deviance over the batch. The skip connection routes
    the chain rule into the tower as d eta / d beta_j = x_j.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    family = get_family(spec.family)
    trace = forward(params, spec, X, v)
    loss = family.loss(y, trace.mu, v)

    # Chain rule dL/deta = dL/dmu * dmu/deta; the clamp zeroes the factor
    # outside its window, and exposure scales it when the family uses one.
    dmu = family.dloss_dmu(y, trace.mu)
    if spec.link == "log":
        in_range = np.abs(trace.eta) <= ETA_CLAMP
        dmu_deta = np.where(in_range, np.exp(np.clip(trace.eta, -ETA_CLAMP, ETA_CLAMP)), 0.0)
    else:
        dmu_deta = np.ones_like(trace.eta)
    if family.uses_exposure and v is not None:
        dmu_deta = dmu_deta * np.asarray(v, dtype=float)
    deta = dmu * dmu_deta

    g_beta0 = float(np.sum(deta))
    delta = deta[:, None] * X  # gradient wrt the tower output beta(x)

    g_w = [None] * spec.depth
    g_b = [None] * spec.depth
    for m in range(spec.depth - 1, -1, -1):
        da = delta * _act_deriv(spec.activations[m], trace.pre_activations[m])
        g_w[m] = trace.activations[m].T @ da
        g_b[m] = da.sum(axis=0)
        if m > 0:
            delta = da @ params.weights[m].T
    return loss, Params(weights=g_w, biases=g_b, beta0=g_beta0)


def batch_input_jacobian(params: Params, spec: ModelSpec, X: np.ndarray) -> np.ndarray:
    """Jacobians d beta_j(x_i) / d x_ik as an (n, q, q) array.

    Accumulated layer by layer: J <- diag(act'(a_m)) @ W_m^T @ J, sharing
    one forward pass across all q outputs. The skip connection does not
    enter the attentions, so only the tower is differentiated.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.q:
        raise ValueError(f"X must have shape (n, {spec.q}), got {X.shape}")
    pre, _ = _tower(params, spec, X)
    d0 = _act_deriv(spec.activations[0], pre[0])  # (n, q_1)
    J = d0[:, :, None] * params.weights[0].T[None, :, :]  # (n, q_1, q)
    for m in range(1, spec.depth):
        J = np.matmul(params.weights[m].T, J)  # (q_{m+1}, q_m) @ (n, q_m, q)
        J *= _act_deriv(spec.activations[m], pre[m])[:, :, None]
    return J


def input_jacobian(params: Params, spec: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Jacobian of the attention vector at a single input, shape (q, q)."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return batch_input_jacobian(params, spec, x)[0]


# ---------------------------------------------------------------------------
# Serialization: versioned JSON with base64-encoded float64 buffers, so a
# round trip is bit-exact.

_FORMAT = "localglmnet-model"
_VERSION = 1


def _encode(arr: np.ndarray) -> dict:
    a = np.ascontiguousarray(arr, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(obj: dict) -> np.ndarray:
    buf = base64.b64decode(obj["data"])
    return np.frombuffer(buf, dtype="<f8").reshape(obj["shape"]).copy()


def save_model(path, spec: ModelSpec, params: Params, preprocess: dict | None = None) -> None:
    """Write spec + parameters (+ optional preprocessing metadata) to JSON."""
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "spec": {
            "q": spec.q,
            "hidden_dims": list(spec.hidden_dims),
            "activations": list(spec.activations),
            "family": spec.family,
            "link": spec.link,
        },
        "params": {
            "weights": [_encode(w) for w in params.weights],
            "biases": [_encode(b) for b in params.biases],
            "beta0": _encode(np.array([params.beta0])),
        },
    }
    if preprocess is not None:
        doc["preprocess"] = preprocess
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Read a model file; returns (spec, params, preprocess-or-None)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != _FORMAT:
        raise ConfigError(f"{path}: not a model file (format={doc.get('format')!r})")
    if doc.get("version") != _VERSION:
        raise ConfigError(f"{path}: unsupported model version {doc.get('version')!r}")
    s = doc["spec"]
    spec = ModelSpec(q=s["q"], hidden_dims=tuple(s["hidden_dims"]),
                     activations=tuple(s["activations"]),
                     family=s["family"], link=s["link"])
    p = doc["params"]
    params = Params(
        weights=[_decode(w) for w in p["weights"]],
        biases=[_decode(b) for b in p["biases"]],
        beta0=float(_decode(p["beta0"])[0]),
    )
    expected = list(zip(spec.layer_dims[:-1], spec.layer_dims[1:]))
    got = [w.shape for w in params.weights]
    if got != [tuple(e) for e in expected]:
        raise ConfigError(f"{path}: parameter shapes {got} do not match spec {expected}")
    params.check_finite()
    return spec, params, doc.get("preprocess")
