"""Grid encoding, layer gradients, UNet model, training, weight files and inference"""

import math
from collections import OrderedDict
from types import SimpleNamespace

import numpy as np
import pytest

from src.circuits import Circuit, Gate, schedule
from src.gates import CZ, RX
from src.guidance import (
    ArchitectureConfig, TrainConfig, UNetModel, channel_count, encode, evaluate_attention, infer,
    load_model, padded_shape, padded_size, parameter_shapes, prepare_examples, ranking_auc,
    read_loss_history, save_model, train, write_loss_history,
)
from src.guidance.layers import (
    PROBABILITY_EPS, concat_backward, concat_forward, conv2d_backward, conv2d_forward, dropout_mask,
    leaky_relu_backward, leaky_relu_forward, masked_bce_with_logits, maxpool2x2_backward,
    maxpool2x2_forward, sigmoid, upsample2x_backward, upsample2x_forward,
)
from src.guidance.persistence import MODEL_FORMAT_VERSION, MODEL_MAGIC
from src.utils.binary_io import read_framed, write_framed
from src.utils.errors import ChecksumError, FileFormatError, FormatVersionError, GateSetMismatchError

TINY = ArchitectureConfig(base_channels=2, bottleneck_channels=3, dropout=0.0)


def numeric_grad(f, array: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of scalar f() with respect to every entry of array (in place)"""
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        saved = array[index]
        array[index] = saved + h
        plus = f()
        array[index] = saved - h
        minus = f()
        array[index] = saved
        grad[index] = (plus - minus) / (2 * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(1e-12, np.linalg.norm(a) + np.linalg.norm(b)))


def float64_copy(model: UNetModel) -> UNetModel:
    """Finite differences need parameters that hold a 1e-6 step"""
    return UNetModel(model.gate_set, model.architecture,
                     OrderedDict((k, v.astype(np.float64)) for k, v in model.params.items()))


def fig2_target() -> np.ndarray:
    target = np.zeros((4, 2), dtype=np.float32)
    target[0:2, :] = 1.0
    return target


class TestEncoding:

    def test_padding(self):
        assert [padded_size(n) for n in (0, 1, 4, 5, 9)] == [4, 4, 4, 8, 12]
        assert padded_shape(3, 10) == (4, 12)

    def test_channels(self, nisq, fig2_circuit):
        x = encode(fig2_circuit, nisq)
        assert x.shape == (channel_count(nisq), 4, 4) == (8, 4, 4)
        cz, role1, role2, sin_ch, cos_ch, occ = 2, 3, 4, 5, 6, 7
        assert x[cz, 0, 0] == x[cz, 1, 0] == x[cz, 0, 1] == 1.0
        assert x[role1, 0, 0] == 1.0 and x[role2, 1, 0] == 1.0 and x[role2, 0, 0] == 0.0
        assert x[0, 2, 0] == 1.0 and x[role1, 2, 0] == 1.0
        assert x[sin_ch, 2, 0] == pytest.approx(math.sin(0.7))
        assert x[cos_ch, 3, 0] == pytest.approx(math.cos(1.3))
        assert x[cos_ch, 0, 0] == 0.0
        assert x[occ].sum() == 6
        assert x[:, :, 2:].sum() == 0.0

    def test_rejects_kinds_outside_gate_set(self, iontrap, fig2_circuit):
        with pytest.raises(GateSetMismatchError):
            encode(fig2_circuit, iontrap)


class TestLayers:

    def test_conv_gradients(self, rng):
        x = rng.normal(size=(2, 3, 4, 5))
        w = rng.normal(size=(4, 3, 3, 3))
        b = rng.normal(size=4)
        r = rng.normal(size=(2, 4, 4, 5))

        def loss():
            return float((conv2d_forward(x, w, b) * r).sum())

        grad_x, grad_w, grad_b = conv2d_backward(x, w, r)
        assert relative_error(grad_x, numeric_grad(loss, x)) < 1e-6
        assert relative_error(grad_w, numeric_grad(loss, w)) < 1e-6
        assert relative_error(grad_b, numeric_grad(loss, b)) < 1e-6

    def test_conv_matches_direct_sum(self, rng):
        x = rng.normal(size=(1, 1, 3, 3))
        w = rng.normal(size=(1, 1, 3, 3))
        y = conv2d_forward(x, w, np.zeros(1))
        # centre output sees the full kernel
        assert y[0, 0, 1, 1] == pytest.approx(float((x[0, 0] * w[0, 0]).sum()))
        # corner output sees the bottom-right 2x2 of the kernel
        assert y[0, 0, 0, 0] == pytest.approx(float((x[0, 0, :2, :2] * w[0, 0, 1:, 1:]).sum()))

    def test_leaky_relu_gradient(self, rng):
        z = rng.normal(size=(2, 3, 4, 4))
        z += np.sign(z) * 0.1
        r = rng.normal(size=z.shape)
        numeric = numeric_grad(lambda: float((leaky_relu_forward(z, 0.01) * r).sum()), z)
        assert relative_error(leaky_relu_backward(z, r, 0.01), numeric) < 1e-6

    def test_maxpool_routes_to_argmax_only(self):
        x = np.array([[1.0, 5.0, 0.0, 0.0],
                      [2.0, 3.0, 0.0, 7.0],
                      [9.0, 1.0, 4.0, 4.0],
                      [0.0, 0.0, 1.0, 2.0]])[None, None]
        pooled, argmax = maxpool2x2_forward(x)
        np.testing.assert_array_equal(pooled[0, 0], [[5.0, 7.0], [9.0, 4.0]])
        grad = maxpool2x2_backward(np.array([[10.0, 20.0], [30.0, 40.0]])[None, None], argmax)
        expected = np.zeros((4, 4))
        expected[0, 1], expected[1, 3], expected[2, 0], expected[2, 2] = 10.0, 20.0, 30.0, 40.0
        np.testing.assert_array_equal(grad[0, 0], expected)

    def test_maxpool_gradient(self, rng):
        x = rng.normal(size=(2, 2, 4, 4))
        r = rng.normal(size=(2, 2, 2, 2))
        _, argmax = maxpool2x2_forward(x)
        numeric = numeric_grad(lambda: float((maxpool2x2_forward(x)[0] * r).sum()), x)
        assert relative_error(maxpool2x2_backward(r, argmax), numeric) < 1e-6

    def test_upsample_and_concat_gradients(self, rng):
        a = rng.normal(size=(1, 2, 2, 2))
        skip = rng.normal(size=(1, 3, 4, 4))
        r = rng.normal(size=(1, 5, 4, 4))

        def loss():
            return float((concat_forward(upsample2x_forward(a), skip) * r).sum())

        g_up, g_skip = concat_backward(r, 2)
        assert relative_error(upsample2x_backward(g_up), numeric_grad(loss, a)) < 1e-6
        assert relative_error(g_skip, numeric_grad(loss, skip)) < 1e-6

    def test_sigmoid_is_stable(self):
        values = sigmoid(np.array([-800.0, 0.0, 800.0]))
        np.testing.assert_allclose(values, [0.0, 0.5, 1.0], atol=1e-5)
        assert values[1] == 0.5
        assert values[0] == PROBABILITY_EPS and values[2] == 1.0 - PROBABILITY_EPS

    def test_bce_gradient_and_mask(self, rng):
        logits = rng.normal(size=(2, 1, 4, 4))
        target = (rng.random(logits.shape) > 0.5).astype(float)
        mask = (rng.random(logits.shape) > 0.3).astype(float)
        loss, grad = masked_bce_with_logits(logits, target, mask)
        numeric = numeric_grad(lambda: masked_bce_with_logits(logits, target, mask)[0], logits)
        assert relative_error(grad, numeric) < 1e-6
        assert np.all(grad[mask == 0] == 0.0)
        flipped = np.where(mask == 0, 1.0 - target, target)
        assert masked_bce_with_logits(logits, flipped, mask)[0] == pytest.approx(loss)

    def test_dropout_mask_is_inverted(self, rng):
        mask = dropout_mask((200, 200), 0.25, rng)
        assert set(np.unique(mask)) <= {0.0, 1.0 / 0.75}
        assert mask.mean() == pytest.approx(1.0, abs=0.02)
        assert np.all(dropout_mask((3, 3), 0.0, rng) == 1.0)


class TestModel:

    def test_parameter_order_and_shapes(self, nisq):
        model = UNetModel.initialize(nisq, seed=1)
        names = list(model.params)
        assert names[:4] == ["e1.conv1.w", "e1.conv1.b", "e1.conv2.w", "e1.conv2.b"]
        assert names[-2:] == ["head.w", "head.b"]
        assert model.params["e1.conv1.w"].shape == (16, 8, 3, 3)
        assert model.params["d1.conv1.w"].shape == (16, 48, 3, 3)
        assert model.params["d2.conv1.w"].shape == (16, 32, 3, 3)
        assert model.params["b.conv2.w"].shape == (32, 32, 3, 3)
        assert all(p.dtype == np.float32 for p in model.params.values())
        assert model.check_shapes() == []

    def test_zero_weights_give_one_half(self, nisq, fig2_circuit):
        out = UNetModel.zeros(nisq).forward(encode(fig2_circuit, nisq))
        assert out.shape == (1, 4, 4)
        assert np.all(out == 0.5)

    def test_rejects_bad_inputs(self, nisq, iontrap, fig2_circuit):
        model = UNetModel.zeros(nisq)
        with pytest.raises(ValueError):
            model.forward(np.zeros((channel_count(iontrap), 4, 4)))
        with pytest.raises(ValueError):
            model.forward(np.zeros((8, 4, 6)))

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_backward_matches_finite_differences(self, nisq, seed):
        rng = np.random.default_rng(seed)
        model = float64_copy(UNetModel.initialize(nisq, TINY, seed=seed + 3))
        x = rng.normal(size=(1, channel_count(nisq), 4, 4))
        r = rng.normal(size=(1, 1, 4, 4))
        _, cache = model.forward_logits(x, training=True, rng=rng)
        grads = model.backward(cache, r)
        assert list(grads) == list(model.params)

        def loss():
            return float((model.forward_logits(x)[0] * r).sum())

        for name, param in model.params.items():
            numeric = numeric_grad(loss, param, h=1e-6)
            assert relative_error(grads[name], numeric) < 1e-4, name

    def test_backward_reuses_dropout_masks(self, nisq, rng):
        arch = ArchitectureConfig(base_channels=2, bottleneck_channels=3, dropout=0.3)
        model = float64_copy(UNetModel.initialize(nisq, arch, seed=4))
        x = rng.normal(size=(1, channel_count(nisq), 4, 4))
        r = rng.normal(size=(1, 1, 4, 4))
        _, cache = model.forward_logits(x, training=True, rng=np.random.default_rng(99))
        grads = model.backward(cache, r)

        def loss():
            logits, _ = model.forward_logits(x, training=True, rng=np.random.default_rng(99))
            return float((logits * r).sum())

        for name in ("e1.conv1.w", "d2.conv2.b", "head.w"):
            numeric = numeric_grad(loss, model.params[name], h=1e-6)
            assert relative_error(grads[name], numeric) < 1e-4, name

    def test_zero_upstream_gives_zero_gradients(self, nisq, rng):
        model = UNetModel.initialize(nisq, TINY, seed=5)
        _, cache = model.forward_logits(rng.normal(size=(2, 8, 4, 8)), training=True, rng=rng)
        grads = model.backward(cache, np.zeros((2, 1, 4, 8)))
        assert all(not np.any(g) for g in grads.values())

    def test_head_bias_gradient_points_to_one_half(self, nisq, rng):
        model = UNetModel.initialize(nisq, TINY, seed=6)
        x = rng.normal(size=(1, 8, 4, 4))
        logits, cache = model.forward_logits(x, training=True, rng=rng)
        mask = np.ones_like(logits)
        _, grad = masked_bce_with_logits(logits, np.full_like(logits, 0.5), mask)
        grads = model.backward(cache, grad)
        assert np.sign(grads["head.b"][0]) == np.sign((sigmoid(logits) - 0.5).mean())


class TestTraining:

    def samples(self, fig2_circuit):
        return [SimpleNamespace(circuit=fig2_circuit, target=fig2_target())]

    def test_overfits_a_single_sample(self, nisq, fig2_circuit):
        examples = prepare_examples(self.samples(fig2_circuit), nisq)
        model = UNetModel.initialize(nisq, ArchitectureConfig(dropout=0.0), seed=0)
        config = TrainConfig(batch_size=1, learning_rate=0.002, epochs=200, seed=0)
        model, history = train(model, examples, config)
        assert len(history) == 200
        assert history[-1] < 0.5 * history[0]
        attention = infer(model, fig2_circuit, nisq).values
        assert attention[:2].min() > attention[2:, 0].max()

    def test_zero_learning_rate_keeps_weights(self, nisq, fig2_circuit):
        examples = prepare_examples(self.samples(fig2_circuit), nisq)
        model = UNetModel.initialize(nisq, TINY, seed=2)
        before = {k: v.copy() for k, v in model.params.items()}
        train(model, examples, TrainConfig(learning_rate=0.0, epochs=3))
        for name, value in model.params.items():
            np.testing.assert_array_equal(value, before[name])

    def test_mixed_shapes_and_validation(self, nisq, iontrap, fig2_circuit):
        long = Circuit(4, tuple(Gate(RX, (q % 4,), 0.1 * q) for q in range(24)))
        samples = self.samples(fig2_circuit) + [SimpleNamespace(circuit=long, target=np.zeros((4, 6)))]
        examples = prepare_examples(samples, nisq)
        assert {e.shape for e in examples} == {(4, 4), (4, 8)}
        _, history = train(UNetModel.initialize(nisq, TINY), examples, TrainConfig(epochs=2))
        assert len(history) == 2
        with pytest.raises(ValueError):
            train(UNetModel.initialize(iontrap, TINY), examples, TrainConfig(epochs=1))
        with pytest.raises(ValueError):
            train(UNetModel.initialize(nisq, TINY), [], TrainConfig(epochs=1))

    def test_loss_history_csv(self, tmp_path):
        path = tmp_path / "loss.csv"
        write_loss_history([0.7, 0.5, 0.25], path)
        assert path.read_text().splitlines()[0] == "epoch,mean_loss"
        assert read_loss_history(path) == [0.7, 0.5, 0.25]


class TestPersistence:

    def test_roundtrip(self, tmp_path, iontrap):
        model = UNetModel.initialize(iontrap, TINY, seed=8)
        path = tmp_path / "model.qgnw"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.gate_set == iontrap
        assert loaded.architecture == model.architecture
        assert list(loaded.params) == list(parameter_shapes(channel_count(iontrap), TINY))
        for name, value in model.params.items():
            np.testing.assert_array_equal(loaded.params[name], value)

    def test_detects_corruption(self, tmp_path, nisq):
        path = tmp_path / "model.qgnw"
        save_model(UNetModel.initialize(nisq, TINY), path)
        data = bytearray(path.read_bytes())
        data[-10] ^= 0x01
        path.write_bytes(bytes(data))
        with pytest.raises(ChecksumError):
            load_model(path)

    def test_rejects_other_versions(self, tmp_path, nisq):
        path = tmp_path / "model.qgnw"
        save_model(UNetModel.initialize(nisq, TINY), path)
        payload = read_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION)
        write_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION + 1, payload)
        with pytest.raises(FormatVersionError):
            load_model(path)

    def test_save_refuses_wrong_shapes(self, tmp_path, nisq):
        model = UNetModel.initialize(nisq, TINY)
        model.params["head.b"] = np.zeros(2, dtype=np.float32)
        with pytest.raises(ValueError, match="head.b"):
            save_model(model, tmp_path / "model.qgnw")
        assert not (tmp_path / "model.qgnw").exists()

    def test_load_rejects_wrong_shapes(self, tmp_path, nisq):
        path = tmp_path / "model.qgnw"
        save_model(UNetModel.initialize(nisq, TINY), path)
        payload = read_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION)
        # head.b is stored last: u32 dim, then one float32
        payload = payload[:-8] + (2).to_bytes(4, "little") + payload[-4:] + bytes(4)
        write_framed(path, MODEL_MAGIC, MODEL_FORMAT_VERSION, payload)
        with pytest.raises(FileFormatError):
            load_model(path)


class TestInference:

    def test_crops_to_circuit_grid(self, nisq, fig2_circuit):
        attention = infer(UNetModel.zeros(nisq), fig2_circuit, nisq)
        assert attention.shape == (4, 2)
        assert np.all(attention.values == 0.5)

    def test_gate_set_mismatch(self, nisq, iontrap, fig2_circuit):
        with pytest.raises(GateSetMismatchError):
            infer(UNetModel.zeros(iontrap), fig2_circuit, nisq)

    def test_ranking_auc(self):
        assert ranking_auc(np.array([0.9, 0.8]), np.array([0.1, 0.2])) == 1.0
        assert ranking_auc(np.array([0.1]), np.array([0.9])) == 0.0
        assert ranking_auc(np.array([0.5, 0.5]), np.array([0.5])) == 0.5
        assert math.isnan(ranking_auc(np.array([]), np.array([0.5])))

    def test_evaluate_attention_on_flat_model(self, nisq, fig2_circuit):
        sample = SimpleNamespace(circuit=fig2_circuit, target=fig2_target())
        report = evaluate_attention(UNetModel.zeros(nisq), [sample], nisq)
        assert report["samples"] == 1
        assert report["reducible_cells"] == 4
        assert report["other_cells"] == 2
        assert report["mean_reducible"] == report["mean_other"] == 0.5
        assert report["auc"] == 0.5


def test_cz_only_circuits_encode(nisq):
    circuit = Circuit(2, (Gate(CZ, (1, 0)),))
    x = encode(circuit, nisq, schedule(circuit))
    assert x[3, 1, 0] == 1.0 and x[4, 0, 0] == 1.0
