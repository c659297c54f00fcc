import numpy as np
import pytest
from numpy.testing import assert_allclose

from localglmnet import (
    ModelSpec,
    Params,
    attention,
    batch_input_jacobian,
    contributions,
    fit_glm,
    forward,
    get_family,
    init_params,
    input_jacobian,
    load_model,
    loss_and_param_grads,
    rng_stream,
    save_model,
)
from localglmnet.errors import ConfigError, NumericError


def zero_params(spec, beta0=0.0):
    dims = spec.layer_dims
    return Params(weights=[np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
                  biases=[np.zeros(b) for b in dims[1:]],
                  beta0=beta0)


def fd_param_grads(params, spec, X, y, v=None, h=1e-5):
    """Central finite differences over every parameter entry."""
    family = get_family(spec.family)

    def loss_at(p):
        return family.loss(y, forward(p, spec, X, v).mu, v)

    grads = zero_params(spec)
    for m in range(spec.depth):
        for idx in np.ndindex(params.weights[m].shape):
            p1, p2 = params.copy(), params.copy()
            p1.weights[m][idx] += h
            p2.weights[m][idx] -= h
            grads.weights[m][idx] = (loss_at(p1) - loss_at(p2)) / (2 * h)
        for idx in np.ndindex(params.biases[m].shape):
            p1, p2 = params.copy(), params.copy()
            p1.biases[m][idx] += h
            p2.biases[m][idx] -= h
            grads.biases[m][idx] = (loss_at(p1) - loss_at(p2)) / (2 * h)
    p1, p2 = params.copy(), params.copy()
    p1.beta0 += h
    p2.beta0 -= h
    grads.beta0 = (loss_at(p1) - loss_at(p2)) / (2 * h)
    return grads


def assert_grads_close(got, want, rtol=1e-4):
    scale = max(1e-8, max(np.abs(w).max() for w in want.weights))
    for m in range(len(got.weights)):
        assert np.abs(got.weights[m] - want.weights[m]).max() <= rtol * scale
        assert np.abs(got.biases[m] - want.biases[m]).max() <= rtol * scale
    assert abs(got.beta0 - want.beta0) <= rtol * max(scale, abs(want.beta0))


class TestModelSpec:
    def test_default_activations(self):
        spec = ModelSpec(q=8, hidden_dims=(20, 15, 10))
        assert spec.activations == ("tanh", "tanh", "tanh", "linear")
        assert spec.layer_dims == (8, 20, 15, 10, 8)
        assert spec.depth == 4

    def test_minimal_depth(self):
        spec = ModelSpec(q=3)
        assert spec.layer_dims == (3, 3)
        assert spec.activations == ("linear",)

    def test_rejects_bad_activation(self):
        with pytest.raises(ValueError, match="activation"):
            ModelSpec(q=3, hidden_dims=(4,), activations=("relu", "linear"))

    def test_rejects_wrong_activation_count(self):
        with pytest.raises(ValueError):
            ModelSpec(q=3, hidden_dims=(4,), activations=("tanh",))


class TestInitParams:
    def test_deterministic(self):
        spec = ModelSpec(q=5, hidden_dims=(7,))
        p1 = init_params(spec, rng_stream(3, "init"))
        p2 = init_params(spec, rng_stream(3, "init"))
        for w1, w2 in zip(p1.weights, p2.weights):
            assert np.array_equal(w1, w2)

    def test_glorot_bound(self):
        spec = ModelSpec(q=8, hidden_dims=(20,))
        p = init_params(spec, rng_stream(0, "init"))
        bound = np.sqrt(6.0 / (8 + 20))
        assert np.abs(p.weights[0]).max() <= bound
        assert np.all(p.biases[0] == 0.0)

    def test_output_bias_passthrough(self):
        spec = ModelSpec(q=2)
        assert init_params(spec, rng_stream(0, "i"), output_bias=1.25).beta0 == 1.25


class TestForward:
    def test_constant_net(self):
        spec = ModelSpec(q=4, hidden_dims=(6,))
        params = zero_params(spec, beta0=2.5)
        X = rng_stream(1, "x").standard_normal((10, 4))
        tr = forward(params, spec, X)
        assert_allclose(tr.mu, np.full(10, 2.5))
        assert np.all(tr.attentions == 0.0)

    def test_constant_attention_reproduces_glm(self):
        # A depth-1 linear tower with zero weights and bias b has
        # beta(x) = b constant, so the network is exactly the GLM.
        rng = rng_stream(2, "glm-nest")
        X = rng.standard_normal((200, 3))
        beta = np.array([0.4, -0.7, 1.1])
        y = 0.2 + X @ beta + 0.05 * rng.standard_normal(200)
        glm = fit_glm(X, y)
        spec = ModelSpec(q=3)
        params = zero_params(spec, beta0=glm.beta0)
        params.biases[0][:] = glm.beta
        tr = forward(params, spec, X)
        assert_allclose(tr.mu, glm.beta0 + X @ glm.beta, atol=1e-12)

    def test_eta_equals_attention_dot_product(self):
        rng = rng_stream(3, "dot")
        spec = ModelSpec(q=6, hidden_dims=(9, 5))
        params = init_params(spec, rng, output_bias=0.3)
        X = rng.standard_normal((1, 6))
        tr = forward(params, spec, X)
        beta = attention(params, spec, X)[0]
        assert abs(tr.eta[0] - (params.beta0 + beta @ X[0])) < 1e-12

    def test_additivity_invariant(self):
        rng = rng_stream(4, "addi")
        spec = ModelSpec(q=5, hidden_dims=(8, 6))
        params = init_params(spec, rng, output_bias=-0.2)
        X = rng.standard_normal((300, 5))
        tr = forward(params, spec, X)
        recon = params.beta0 + np.sum(tr.attentions * X, axis=1)
        assert np.abs(tr.eta - recon).max() < 1e-12

    def test_poisson_exposure_scales_mu(self):
        spec = ModelSpec(q=2, family="poisson", link="log")
        params = zero_params(spec, beta0=0.0)
        X = np.ones((4, 2))
        v = np.array([0.25, 0.5, 1.0, 2.0])
        assert_allclose(forward(params, spec, X, v).mu, v)

    def test_overflow_error_names_layer(self):
        spec = ModelSpec(q=2, hidden_dims=(3,))
        params = zero_params(spec)
        params.weights[0][0, 0] = np.inf
        with pytest.raises(NumericError, match="layer 1"):
            forward(params, spec, np.ones((1, 2)))

    def test_log_link_clamps_eta(self):
        spec = ModelSpec(q=1, family="poisson", link="log")
        params = zero_params(spec, beta0=0.0)
        params.biases[0][:] = 100.0  # beta(x) = 100, eta = 100 * x
        tr = forward(params, spec, np.array([[1.0]]), np.array([1.0]))
        assert np.isfinite(tr.mu).all()
        assert tr.n_clamped == 1


class TestAttentionAndContributions:
    def test_zero_net_attention(self):
        spec = ModelSpec(q=3, hidden_dims=(4,))
        assert np.all(attention(zero_params(spec), spec, np.ones((5, 3))) == 0.0)

    def test_zero_feature_contributes_zero(self):
        rng = rng_stream(5, "contrib")
        spec = ModelSpec(q=4, hidden_dims=(6,))
        params = init_params(spec, rng)
        X = rng.standard_normal((7, 4))
        X[:, 2] = 0.0
        assert np.all(contributions(params, spec, X)[:, 2] == 0.0)

    def test_contribution_rows_sum_to_eta(self):
        rng = rng_stream(6, "contrib")
        spec = ModelSpec(q=5, hidden_dims=(7,))
        params = init_params(spec, rng, output_bias=0.4)
        X = rng.standard_normal((50, 5))
        total = contributions(params, spec, X).sum(axis=1) + params.beta0
        assert np.abs(total - forward(params, spec, X).eta).max() < 1e-12


class TestParamGradients:
    def test_constant_predictor_closed_form(self):
        # Zero-weight Gaussian net: d loss / d beta0 = 2 (beta0 - mean y).
        spec = ModelSpec(q=3, hidden_dims=(4,))
        params = zero_params(spec, beta0=1.5)
        y = np.array([0.5, 2.5, 3.0])
        _, grads = loss_and_param_grads(params, spec, np.ones((3, 3)), y)
        assert grads.beta0 == pytest.approx(2.0 * (1.5 - y.mean()), rel=1e-12)

    @pytest.mark.parametrize("family,link", [("gaussian", "identity"), ("poisson", "log"),
                                             ("gaussian", "log")])
    def test_matches_finite_differences(self, family, link):
        rng = rng_stream(7, f"fd-{family}")
        spec = ModelSpec(q=4, hidden_dims=(6, 5), family=family, link=link)
        params = init_params(spec, rng, output_bias=0.1)
        X = rng.standard_normal((12, 4))
        if family == "poisson":
            v = rng.uniform(0.3, 1.0, 12)
            y = rng.poisson(1.0, 12).astype(float)
        else:
            v = None
            y = rng.standard_normal(12)
        _, grads = loss_and_param_grads(params, spec, X, y, v)
        assert_grads_close(grads, fd_param_grads(params, spec, X, y, v))

    def test_gradient_is_descent_direction(self):
        rng = rng_stream(8, "desc")
        spec = ModelSpec(q=3, hidden_dims=(5,))
        params = init_params(spec, rng, output_bias=0.2)
        X = rng.standard_normal((30, 3))
        y = rng.standard_normal(30)
        loss, grads = loss_and_param_grads(params, spec, X, y)
        eps = 1e-3
        stepped = params.copy()
        for m in range(spec.depth):
            stepped.weights[m] -= eps * grads.weights[m]
            stepped.biases[m] -= eps * grads.biases[m]
        stepped.beta0 -= eps * grads.beta0
        new_loss, _ = loss_and_param_grads(stepped, spec, X, y)
        assert new_loss < loss

    def test_batch_permutation_invariance(self):
        rng = rng_stream(9, "perm")
        spec = ModelSpec(q=3, hidden_dims=(4,))
        params = init_params(spec, rng)
        X = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        perm = rng.permutation(20)
        l1, g1 = loss_and_param_grads(params, spec, X, y)
        l2, g2 = loss_and_param_grads(params, spec, X[perm], y[perm])
        assert l1 == pytest.approx(l2, rel=1e-12)
        for m in range(spec.depth):
            assert_allclose(g1.weights[m], g2.weights[m], rtol=1e-10, atol=1e-14)

    def test_rejects_empty_batch(self):
        spec = ModelSpec(q=2)
        with pytest.raises(ValueError, match="empty"):
            loss_and_param_grads(zero_params(spec), spec, np.empty((0, 2)), np.empty(0))


class TestInputJacobian:
    def test_zero_tower_zero_jacobian(self):
        spec = ModelSpec(q=4, hidden_dims=(5,))
        J = input_jacobian(zero_params(spec), spec, np.ones(4))
        assert np.all(J == 0.0)

    def test_depth_one_linear_tower(self):
        rng = rng_stream(10, "lin")
        spec = ModelSpec(q=4)
        params = zero_params(spec)
        params.weights[0] = rng.standard_normal((4, 4))
        params.biases[0] = rng.standard_normal(4)
        J = input_jacobian(params, spec, rng.standard_normal(4))
        assert_allclose(J, params.weights[0].T, atol=1e-14)

    def test_matches_finite_differences(self):
        rng = rng_stream(11, "jfd")
        spec = ModelSpec(q=5, hidden_dims=(7, 6))
        params = init_params(spec, rng)
        x = rng.standard_normal(5)
        J = input_jacobian(params, spec, x)
        h = 1e-5
        for k in range(5):
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            fd = (attention(params, spec, xp[None, :])[0] -
                  attention(params, spec, xm[None, :])[0]) / (2 * h)
            assert np.abs(J[:, k] - fd).max() < 1e-4 * max(1e-8, np.abs(fd).max(), 1.0)

    def test_batch_agrees_with_single(self):
        rng = rng_stream(12, "batch")
        spec = ModelSpec(q=3, hidden_dims=(6,))
        params = init_params(spec, rng)
        X = rng.standard_normal((9, 3))
        JB = batch_input_jacobian(params, spec, X)
        for i in range(9):
            assert_allclose(JB[i], input_jacobian(params, spec, X[i]), atol=1e-14)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = rng_stream(13, "ser")
        spec = ModelSpec(q=4, hidden_dims=(6, 5), family="poisson", link="log")
        params = init_params(spec, rng, output_bias=-1.2345678912345678)
        path = tmp_path / "model.json"
        save_model(path, spec, params, preprocess={"note": "smoke"})
        spec2, params2, pre = load_model(path)
        assert spec2 == spec
        assert pre == {"note": "smoke"}
        assert params2.beta0 == params.beta0
        for w1, w2 in zip(params.weights, params2.weights):
            assert np.array_equal(w1, w2)
        for b1, b2 in zip(params.biases, params2.biases):
            assert np.array_equal(b1, b2)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(ConfigError, match="not a model file"):
            load_model(path)
