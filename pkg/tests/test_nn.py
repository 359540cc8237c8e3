import numpy as np
import pytest

from helpers import fd_gradient_worst_error, make_tiny_net

from lifiloc.errors import NumericsError
from lifiloc.nn.layers import BatchNorm, Conv1D, Dense, Dropout, ReLU
from lifiloc.nn.network import (build_network, cnn_spec, count_parameters,
                                loss_l2, loss_l2_grad, mlp_spec)
from lifiloc.nn.training import (AdamState, TrainConfig, adam_step,
                                 train_network)


class TestForwardBasics:
    def test_dense_identity(self):
        layer = Dense(4, 4, np.random.default_rng(0), "float64")
        layer.params["w"][...] = np.eye(4)
        layer.params["b"][...] = 0.0
        x = np.random.default_rng(1).normal(size=(3, 4))
        np.testing.assert_array_equal(layer.forward(x), x)

    def test_conv_size1_kernel_identity(self):
        conv = Conv1D(1, 1, 1, np.random.default_rng(0), "float64")
        conv.params["w"][...] = 1.0
        conv.params["b"][...] = 0.0
        x = np.arange(10.0).reshape(1, 10, 1)
        np.testing.assert_array_equal(conv.forward(x), x)

    def test_conv_same_padding_window(self):
        # kernel 3, weights picking the left neighbour only
        conv = Conv1D(1, 1, 3, np.random.default_rng(0), "float64")
        conv.params["w"][...] = 0.0
        conv.params["w"][0, 0, 0] = 1.0  # tap at offset -1
        conv.params["b"][...] = 0.0
        x = np.arange(1.0, 6.0).reshape(1, 5, 1)
        out = conv.forward(x)[0, :, 0]
        np.testing.assert_array_equal(out, [0.0, 1.0, 2.0, 3.0, 4.0])

    def test_relu_clips_negative(self):
        x = np.array([[-1.0, 0.0, 2.0]])
        np.testing.assert_array_equal(ReLU().forward(x), [[0.0, 0.0, 2.0]])

    def test_cnn_output_width_is_six(self):
        net = build_network(cnn_spec(16), np.random.default_rng(0))
        out = net.forward(np.zeros((3, 16)), train=False)
        assert out.shape == (3, 6)

    def test_wrong_input_width_raises(self):
        net = build_network(mlp_spec(16), np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.forward(np.zeros((2, 9)))


class TestParameterCounts:
    def test_cnn_matches_published_totals(self):
        net = build_network(cnn_spec(16), np.random.default_rng(0))
        conv_params = sum(l.params["w"].size + l.params["b"].size
                          for l in net.layers if isinstance(l, Conv1D))
        assert conv_params == 1 * 16 * 64 + 64 + 3 * (64 * 16 * 64 + 64)
        trainable, total = count_parameters(net)
        assert total == 205_062
        assert abs(total - 205_062) / 205_062 < 0.01
        assert trainable == 204_550

    def test_mlp_totals(self):
        net = build_network(mlp_spec(16), np.random.default_rng(0))
        trainable, total = count_parameters(net)
        assert total == 207_366  # the published figure drops a digit
        assert trainable == 205_318


class TestLoss:
    def test_zero_residual(self):
        pred = np.random.default_rng(0).normal(size=(7, 6))
        assert loss_l2(pred, pred) == 0.0

    def test_unit_residual_single_sample(self):
        pred = np.zeros((1, 6))
        label = np.ones((1, 6))
        assert loss_l2(pred, label) == pytest.approx(6.0, rel=1e-15)

    def test_batch_permutation_invariant(self):
        rng = np.random.default_rng(1)
        pred = rng.normal(size=(32, 6))
        label = rng.normal(size=(32, 6))
        perm = rng.permutation(32)
        assert loss_l2(pred, label) == pytest.approx(
            loss_l2(pred[perm], label[perm]), rel=1e-12)


class TestAdam:
    def _scalar_setup(self):
        p = np.array([1.0])
        g = np.array([1.0])
        params = [("p", p)]
        grads = [("p", g)]
        return p, g, params, grads, AdamState(params), TrainConfig()

    def test_first_step_magnitude(self):
        # hand oracle: mhat = vhat = 1 after bias correction, so the update
        # is -lr / (1 + eps)
        p, g, params, grads, state, cfg = self._scalar_setup()
        adam_step(params, grads, state, 1, cfg)
        expected = 1.0 - cfg.learning_rate / (1.0 + cfg.eps)
        assert p[0] == pytest.approx(expected, abs=1e-12)

    def test_zero_gradient_no_move(self):
        p, g, params, grads, state, cfg = self._scalar_setup()
        g[0] = 0.0
        adam_step(params, grads, state, 1, cfg)
        assert p[0] == 1.0

    def test_first_step_opposes_gradient_sign(self):
        for sign in (+1.0, -1.0):
            p, g, params, grads, state, cfg = self._scalar_setup()
            g[0] = sign * 0.37
            adam_step(params, grads, state, 1, cfg)
            assert np.sign(p[0] - 1.0) == -np.sign(sign)

    def test_step_index_validated(self):
        p, g, params, grads, state, cfg = self._scalar_setup()
        with pytest.raises(ValueError):
            adam_step(params, grads, state, 0, cfg)


class TestGradients:
    @pytest.mark.parametrize("kind", ["dense", "conv", "norm-dense",
                                      "norm-conv", "dropout"])
    def test_finite_difference_agreement(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        for _ in range(3):
            net, x, y = make_tiny_net(kind, rng)
            assert fd_gradient_worst_error(net, x, y) < 1e-4

    def test_zero_residual_zero_output_grads(self):
        rng = np.random.default_rng(2)
        net = build_network(mlp_spec(5, width=4, depth=1, dropout=0.0), rng,
                            dtype="float64")
        x = rng.normal(size=(3, 5))
        pred = net.forward(x, train=True, rng=rng)
        net.zero_grads()
        net.backward(loss_l2_grad(pred, pred))  # labels equal predictions
        out_layer = net.layers[-1]
        assert np.all(out_layer.grads["w"] == 0.0)
        assert np.all(out_layer.grads["b"] == 0.0)

    def test_dropped_unit_has_zero_outgoing_grad(self):
        rng = np.random.default_rng(3)
        net = build_network(
            {"arch": "mlp", "input_width": 6, "width": 16, "depth": 1,
             "dropout": 0.5, "output": 6}, rng, dtype="float64")
        # strip the batch norm so dropout feeds the output head directly
        dropout = net.layers[2]
        net.layers = [net.layers[0], net.layers[1], dropout, net.layers[4]]
        x = rng.normal(size=(1, 6))
        y = rng.normal(size=(1, 6))
        pred = net.forward(x, train=True, rng=np.random.default_rng(7))
        net.zero_grads()
        net.backward(loss_l2_grad(pred, y))
        dropped = np.where(dropout._mask[0] == 0.0)[0]
        assert len(dropped) > 0
        out_w_grads = net.layers[-1].grads["w"]
        assert np.all(out_w_grads[dropped, :] == 0.0)


class TestDropout:
    def test_train_expectation_matches_inference(self):
        rng = np.random.default_rng(4)
        layer = Dropout(0.2)
        x = rng.uniform(0.5, 2.0, size=(1, 40))
        acc = np.zeros_like(x)
        n = 10_000
        for _ in range(n):
            acc += layer.forward(x, train=True, rng=rng)
        mean_train = acc / n
        infer = layer.forward(x, train=False)
        # MC std of the mask mean is sqrt(p/(1-p)/n) = 0.5%
        np.testing.assert_allclose(mean_train, infer, rtol=0.03)

    def test_infer_mode_is_identity(self):
        x = np.random.default_rng(5).normal(size=(8, 3))
        assert Dropout(0.4).forward(x, train=False) is x


class TestBatchNorm:
    def test_train_output_standardized_before_affine(self):
        rng = np.random.default_rng(6)
        layer = BatchNorm(12, "float64")
        x = rng.normal(3.0, 2.5, size=(4096, 12))
        out = layer.forward(x, train=True)
        assert np.all(np.abs(out.mean(axis=0)) < 1e-6)
        assert np.all(np.abs(out.std(axis=0) - 1.0) < 1e-3)

    def test_running_stats_drive_inference(self):
        rng = np.random.default_rng(7)
        layer = BatchNorm(5, "float64")
        x = rng.normal(1.0, 2.0, size=(512, 5))
        for _ in range(300):
            layer.forward(x, train=True)
        out = layer.forward(x, train=False)
        # running stats converge to the batch stats, so inference matches
        np.testing.assert_allclose(out, layer.forward(x, train=True),
                                   atol=1e-2)

    def test_channels_last_3d_reduction(self):
        rng = np.random.default_rng(8)
        layer = BatchNorm(3, "float64")
        x = rng.normal(-2.0, 4.0, size=(64, 7, 3))
        out = layer.forward(x, train=True)
        flat = out.reshape(-1, 3)
        assert np.all(np.abs(flat.mean(axis=0)) < 1e-6)
        assert np.all(np.abs(flat.std(axis=0) - 1.0) < 1e-3)


class TestTraining:
    def test_memorizes_fifty_records(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(50, 8))
        y = rng.normal(size=(50, 6))
        spec = {"arch": "mlp", "input_width": 8, "width": 64, "depth": 2,
                "dropout": 0.0, "output": 6}
        cfg = TrainConfig(epochs=400, batch_size=50, dropout=0.0, seed=1,
                          dtype="float64")
        net, history = train_network(spec, x, y, x[:0], y[:0], cfg)
        assert history[-1][1] < 1e-2 * history[0][1]

    def test_seeded_determinism(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(256, 8)).astype(np.float32)
        y = rng.normal(size=(256, 6)).astype(np.float32)
        spec = mlp_spec(8, width=16, depth=2)
        cfg = TrainConfig(epochs=3, seed=3)
        net_a, hist_a = train_network(spec, x, y, x, y, cfg)
        net_b, hist_b = train_network(spec, x, y, x, y, cfg)
        assert hist_a == hist_b
        for (_, pa), (_, pb) in zip(net_a.parameters(), net_b.parameters()):
            np.testing.assert_array_equal(pa, pb)

    def test_permutation_of_batch_keeps_gradient_sums(self):
        rng = np.random.default_rng(11)
        net, x, y = make_tiny_net("dense", rng)
        x = np.vstack([x] * 3)
        y = np.vstack([y] * 3)
        perm = rng.permutation(len(x))

        pred = net.forward(x, train=True, rng=rng)
        net.zero_grads()
        net.backward(loss_l2_grad(pred, y))
        ref = {k: v.copy() for k, v in net.gradients()}

        pred = net.forward(x[perm], train=True, rng=rng)
        net.zero_grads()
        net.backward(loss_l2_grad(pred, y[perm]))
        for name, grad in net.gradients():
            np.testing.assert_allclose(grad, ref[name], rtol=1e-10,
                                       atol=1e-14)

    def test_divergence_raises(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(64, 4)).astype(np.float32) * 1e3
        y = rng.normal(size=(64, 6)).astype(np.float32) * 1e3
        spec = mlp_spec(4, width=8, depth=1)
        cfg = TrainConfig(epochs=50, learning_rate=1e12, seed=0)
        with pytest.raises(NumericsError):
            train_network(spec, x, y, x, y, cfg)

    def test_loss_history_length_matches_epochs(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(64, 4)).astype(np.float32)
        y = rng.normal(size=(64, 6)).astype(np.float32)
        _, history = train_network(mlp_spec(4, width=8, depth=1), x, y, x, y,
                                   TrainConfig(epochs=5, seed=0))
        assert [row[0] for row in history] == [1, 2, 3, 4, 5]
