"""Autoencoder layer: forward passes, composite loss, analytic gradients.

Vectorized results are checked against straight-line scalar
reimplementations and against central finite differences of the loss.
"""

import math

import numpy as np
import pytest

from nutsort.autoencoder import (
    KL_CLAMP,
    AutoencoderParams,
    SparsityConfig,
    ae_gradients,
    ae_loss,
    central_difference,
    decode,
    encode,
    finite_diff_gradient,
    sigmoid,
    sigmoid_prime_from_output,
)
from nutsort.errors import ParameterError, ShapeError
from nutsort.matrix import make_rng


def scalar_sigmoid(v: float) -> float:
    if v >= 0:
        return 1.0 / (1.0 + math.exp(-v))
    ev = math.exp(v)
    return ev / (1.0 + ev)


def make_params(n: int, m: int, seed: int = 0) -> AutoencoderParams:
    return AutoencoderParams.init(n, m, make_rng(seed))


class TestSigmoid:
    def test_zero_maps_to_half(self):
        assert sigmoid(np.array([[0.0]]))[0, 0] == 0.5

    def test_log3_maps_to_three_quarters(self):
        out = sigmoid(np.array([[math.log(3.0)]]))[0, 0]
        assert abs(out - 0.75) < 1e-15

    def test_symmetry_identity(self):
        rng = make_rng(0)
        v = rng.uniform(-30, 30, size=(50, 4))
        np.testing.assert_allclose(sigmoid(v) + sigmoid(-v), 1.0, atol=1e-12)

    def test_no_overflow_at_700(self):
        out = sigmoid(np.array([[-700.0, 700.0]]))
        assert np.isfinite(out).all()
        assert 0.0 < out[0, 0] < out[0, 1] < 1.0

    def test_outputs_strictly_inside_unit_interval(self):
        out = sigmoid(np.array([[-1e6, 1e6]]))
        assert out[0, 0] > 0.0 and out[0, 1] < 1.0

    def test_matches_scalar_branch(self):
        rng = make_rng(1)
        v = rng.uniform(-20, 20, size=(3, 3))
        want = np.vectorize(scalar_sigmoid)(v)
        np.testing.assert_allclose(sigmoid(v), want, rtol=1e-15)

    def test_prime_identity(self):
        s = sigmoid(np.linspace(-5, 5, 11).reshape(1, -1))
        np.testing.assert_allclose(sigmoid_prime_from_output(s), s * (1 - s), rtol=0)


class TestEncodeDecode:
    def test_zero_params_give_half(self):
        p = AutoencoderParams(np.zeros((3, 4)), np.zeros(3), np.zeros((4, 3)), np.zeros(4))
        x = make_rng(0).uniform(size=(2, 4))
        np.testing.assert_array_equal(encode(p, x), np.full((2, 3), 0.5))
        np.testing.assert_array_equal(decode(p, np.full((2, 3), 0.5)), np.full((2, 4), 0.5))

    def test_single_unit_log3(self):
        p = AutoencoderParams(np.array([[math.log(3.0)]]), np.zeros(1), np.zeros((1, 1)), np.zeros(1))
        out = encode(p, np.array([[1.0]]))
        assert abs(out[0, 0] - 0.75) < 1e-15

    def test_encode_matches_per_neuron_loops(self):
        p = make_params(5, 3, seed=2)
        x = make_rng(3).uniform(size=(4, 5))
        want = np.zeros((4, 3))
        for s in range(4):
            for j in range(3):
                acc = sum(x[s, i] * p.w_enc[j, i] for i in range(5)) + p.b_hidden[j]
                want[s, j] = scalar_sigmoid(acc)
        np.testing.assert_allclose(encode(p, x), want, rtol=1e-12)

    def test_decode_matches_per_neuron_loops(self):
        p = make_params(5, 3, seed=4)
        h = make_rng(5).uniform(size=(2, 3))
        want = np.zeros((2, 5))
        for s in range(2):
            for i in range(5):
                acc = sum(h[s, j] * p.w_dec[i, j] for j in range(3)) + p.b_out[i]
                want[s, i] = scalar_sigmoid(acc)
        np.testing.assert_allclose(decode(p, h), want, rtol=1e-12)

    def test_roundtrip_restores_width(self):
        p = make_params(6, 2)
        x = make_rng(0).uniform(size=(3, 6))
        assert decode(p, encode(p, x)).shape == x.shape

    def test_outputs_in_open_unit_interval(self):
        p = make_params(4, 3, seed=6)
        x = make_rng(7).uniform(size=(5, 4))
        h = encode(p, x)
        y = decode(p, h)
        for a in (h, y):
            assert np.all(a > 0.0) and np.all(a < 1.0)

    def test_shape_errors(self):
        p = make_params(4, 3)
        with pytest.raises(ShapeError):
            encode(p, np.zeros((2, 5)))
        with pytest.raises(ShapeError):
            decode(p, np.zeros((2, 4)))


class TestSparsityConfig:
    def test_defaults_valid(self):
        cfg = SparsityConfig()
        assert cfg.rho == 0.05 and cfg.beta == 1.0 and cfg.weight_decay == 0.001

    @pytest.mark.parametrize("kwargs", [
        {"rho": 0.0}, {"rho": 1.0}, {"rho": -0.1}, {"beta": -1.0}, {"weight_decay": -0.01},
    ])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ParameterError):
            SparsityConfig(**kwargs)


class TestAeLoss:
    def test_perfect_reconstruction_is_zero(self):
        # all-0.5 input is a fixed point of the zero-parameter layer
        p = AutoencoderParams(np.zeros((3, 4)), np.zeros(3), np.zeros((4, 3)), np.zeros(4))
        x = np.full((2, 4), 0.5)
        assert ae_loss(p, x, SparsityConfig(beta=0.0, weight_decay=0.0)) == 0.0

    def test_on_target_sparsity_adds_nothing(self):
        rho = 0.05
        bias = math.log(rho / (1.0 - rho))
        p = AutoencoderParams(np.zeros((3, 4)), np.full(3, bias), np.zeros((4, 3)), np.zeros(4))
        x = np.full((2, 4), 0.5)
        loss = ae_loss(p, x, SparsityConfig(rho=rho, beta=5.0, weight_decay=0.0))
        assert abs(loss) < 1e-12

    def test_matches_scalar_reimplementation(self):
        n, m, batch = 4, 3, 2
        p = make_params(n, m, seed=8)
        x = make_rng(9).uniform(size=(batch, n))
        cfg = SparsityConfig(rho=0.2, beta=0.7, weight_decay=0.01)

        h = [[scalar_sigmoid(sum(x[s][i] * p.w_enc[j, i] for i in range(n)) + p.b_hidden[j])
              for j in range(m)] for s in range(batch)]
        y = [[scalar_sigmoid(sum(h[s][j] * p.w_dec[i, j] for j in range(m)) + p.b_out[i])
              for i in range(n)] for s in range(batch)]
        recon = sum(0.5 * (y[s][i] - x[s][i]) ** 2 for s in range(batch) for i in range(n)) / batch
        decay = 0.5 * cfg.weight_decay * (
            sum(v * v for row in p.w_enc for v in row) + sum(v * v for row in p.w_dec for v in row)
        )
        kl = 0.0
        for j in range(m):
            q = sum(h[s][j] for s in range(batch)) / batch
            q = min(max(q, KL_CLAMP), 1.0 - KL_CLAMP)
            kl += cfg.rho * math.log(cfg.rho / q) + (1 - cfg.rho) * math.log((1 - cfg.rho) / (1 - q))
        want = recon + decay + cfg.beta * kl

        assert abs(ae_loss(p, x, cfg) - want) < 1e-12

    def test_nonnegative_on_random_instances(self):
        rng = make_rng(10)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, 5))
            p = AutoencoderParams.init(n, m, rng)
            x = rng.uniform(size=(int(rng.integers(1, 4)), n))
            assert ae_loss(p, x, SparsityConfig()) >= 0.0

    def test_batch_permutation_invariance(self):
        p = make_params(5, 3, seed=11)
        x = make_rng(12).uniform(size=(6, 5))
        cfg = SparsityConfig(rho=0.1, beta=2.0, weight_decay=0.01)
        perm = make_rng(13).permutation(6)
        assert abs(ae_loss(p, x, cfg) - ae_loss(p, x[perm], cfg)) < 1e-12

    def test_unused_on_target_unit_changes_nothing(self):
        # Append a hidden unit with zero encoder weights, bias placing its
        # mean activation exactly at rho, and a zero decoder column: with
        # no weight decay the loss must not move.
        rho = 0.05
        cfg = SparsityConfig(rho=rho, beta=3.0, weight_decay=0.0)
        p = make_params(4, 3, seed=14)
        x = make_rng(15).uniform(size=(3, 4))
        base = ae_loss(p, x, cfg)

        bias = math.log(rho / (1.0 - rho))
        bigger = AutoencoderParams(
            w_enc=np.vstack([p.w_enc, np.zeros((1, 4))]),
            b_hidden=np.append(p.b_hidden, bias),
            w_dec=np.hstack([p.w_dec, np.zeros((4, 1))]),
            b_out=p.b_out.copy(),
        )
        assert abs(ae_loss(bigger, x, cfg) - base) < 1e-12

    def test_saturated_unit_stays_finite(self):
        p = AutoencoderParams(
            np.zeros((2, 3)), np.array([-800.0, 800.0]), np.zeros((3, 2)), np.zeros(3)
        )
        x = make_rng(16).uniform(size=(2, 3))
        cfg = SparsityConfig(rho=0.05, beta=1.0, weight_decay=0.0)
        assert math.isfinite(ae_loss(p, x, cfg))
        for g in ae_gradients(p, x, cfg).arrays():
            assert np.isfinite(g).all()


class TestAeGradients:
    def test_zero_at_stationary_point(self):
        p = AutoencoderParams(np.zeros((3, 4)), np.zeros(3), np.zeros((4, 3)), np.zeros(4))
        x = np.full((2, 4), 0.5)
        grads = ae_gradients(p, x, SparsityConfig(rho=0.5, beta=0.0, weight_decay=0.0))
        for g in grads.arrays():
            np.testing.assert_allclose(g, 0.0, atol=1e-10)

    def test_matches_finite_differences(self):
        p = make_params(6, 4, seed=17)
        x = make_rng(18).uniform(size=(3, 6))
        cfg = SparsityConfig(rho=0.05, beta=1.0, weight_decay=0.001)
        analytic = ae_gradients(p, x, cfg)
        numeric = finite_diff_gradient(lambda q: ae_loss(q, x, cfg), p, 1e-5)
        for a, n in zip(analytic.arrays(), numeric.arrays()):
            err = np.abs(a - n) / np.maximum(1e-8, np.abs(a) + np.abs(n))
            assert err.max() <= 1e-6

    def test_decay_term_is_linear_in_lambda(self):
        p = make_params(5, 3, seed=19)
        x = make_rng(20).uniform(size=(4, 5))
        lam = 0.003
        g1 = ae_gradients(p, x, SparsityConfig(rho=0.1, beta=0.5, weight_decay=lam))
        g2 = ae_gradients(p, x, SparsityConfig(rho=0.1, beta=0.5, weight_decay=2 * lam))
        np.testing.assert_allclose(g2.d_w_enc - g1.d_w_enc, lam * p.w_enc, atol=1e-12)
        np.testing.assert_allclose(g2.d_w_dec - g1.d_w_dec, lam * p.w_dec, atol=1e-12)
        np.testing.assert_array_equal(g2.d_b_hidden, g1.d_b_hidden)
        np.testing.assert_array_equal(g2.d_b_out, g1.d_b_out)

    def test_gradient_shapes_mirror_parameters(self):
        p = make_params(5, 2, seed=21)
        grads = ae_gradients(p, make_rng(22).uniform(size=(3, 5)), SparsityConfig())
        assert grads.d_w_enc.shape == p.w_enc.shape
        assert grads.d_b_hidden.shape == p.b_hidden.shape
        assert grads.d_w_dec.shape == p.w_dec.shape
        assert grads.d_b_out.shape == p.b_out.shape


class TestCentralDifference:
    def test_quadratic_probe(self):
        grads = central_difference(lambda a: 0.5 * float(a[0][0, 0]) ** 2,
                                   [np.array([[3.0]])], 1e-5)
        assert abs(grads[0][0, 0] - 3.0) < 1e-8

    def test_linear_probe_has_no_truncation_error(self):
        # only rounding remains for a linear loss, and that scales as 1/eps
        for eps in (1e-2, 1e-5, 1e-7):
            grads = central_difference(lambda a: 5.0 * float(a[0][0, 0]),
                                       [np.array([[2.0]])], eps)
            assert abs(grads[0][0, 0] - 5.0) < 1e-14 / eps

    def test_leaves_inputs_untouched(self):
        arr = np.array([[1.0, 2.0]])
        before = arr.copy()
        central_difference(lambda a: float(np.sum(a[0] ** 2)), [arr], 1e-5)
        np.testing.assert_array_equal(arr, before)

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(ParameterError):
            central_difference(lambda a: 0.0, [np.zeros((1, 1))], 0.0)


class TestParamsValidation:
    def test_init_shapes(self):
        p = AutoencoderParams.init(5, 3, make_rng(0))
        assert p.n == 5 and p.m == 3
        p.validate()
        np.testing.assert_array_equal(p.b_hidden, np.zeros(3))
        np.testing.assert_array_equal(p.b_out, np.zeros(5))

    def test_validate_rejects_bad_bias(self):
        p = AutoencoderParams(np.zeros((3, 4)), np.zeros(2), np.zeros((4, 3)), np.zeros(4))
        with pytest.raises(ShapeError):
            p.validate()

    def test_validate_rejects_nan(self):
        p = AutoencoderParams.init(3, 2, make_rng(0))
        p.w_dec[0, 0] = np.nan
        with pytest.raises(ParameterError):
            p.validate()

    def test_copy_is_independent(self):
        p = AutoencoderParams.init(3, 2, make_rng(0))
        q = p.copy()
        q.w_enc[0, 0] += 1.0
        assert p.w_enc[0, 0] != q.w_enc[0, 0]
