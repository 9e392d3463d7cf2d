import math

import numpy as np
import pytest

from covletnet.interpret import (SaliencyMap, embedding_gradient, grad_cam, rank_regions,
                                 saliency_map, write_saliency_csv)
from covletnet.kernel import DEFAULT_KERNEL
from covletnet.model import TrainedModel, activate, softmax_columns
from covletnet.spectral import SpectralBasis, fit_basis
from oracles import central_difference, close


def hand_model(activation="identity"):
    basis = SpectralBasis(np.eye(2), np.array([1.0, 0.5]))
    arrays = {"weights": np.array([[1.0, 2.0], [-1.0, 0.5]]), "bias": np.zeros(2),
              "log_scales": np.array([0.0])}
    return TrainedModel("ours", arrays, activation, basis, DEFAULT_KERNEL)


def test_hand_case_logit_target():
    # s = 1: g(1) = 1, g(0.5) = 0.25, so e = (2, -0.25) for x = (2, -1)
    m = hand_model()
    x = np.array([2.0, -1.0])
    np.testing.assert_allclose(grad_cam(m, x, 0, "logit"), [2.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(grad_cam(m, x, 1, "logit"), [0.0, 0.0], atol=1e-12)


def test_hand_case_probability_target():
    m = hand_model()
    x = np.array([2.0, -1.0])
    e = [2.0, -0.25]
    z0, z1 = 1.0 * e[0] + 2.0 * e[1], -1.0 * e[0] + 0.5 * e[1]
    p0 = math.exp(z0) / (math.exp(z0) + math.exp(z1))
    p1 = 1 - p0
    # d p0 / d e_k = p0 * (W0k - (p0 W0k + p1 W1k))
    d = [p0 * (1.0 - (p0 * 1.0 + p1 * -1.0)), p0 * (2.0 - (p0 * 2.0 + p1 * 0.5))]
    expected = [max(d[0] * e[0], 0.0), max(d[1] * e[1], 0.0)]
    np.testing.assert_allclose(grad_cam(m, x, 0), expected, atol=1e-10)


def _random_model(seed, J=3, p=5, C=3, activation="tanh"):
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((p, 20))
    Y -= Y.mean(axis=1, keepdims=True)
    arrays = {"weights": rng.standard_normal((C, J * p)), "bias": rng.standard_normal(C),
              "log_scales": rng.uniform(-1, 1, J)}
    return TrainedModel("ours", arrays, activation, fit_basis(Y), DEFAULT_KERNEL), rng


@pytest.mark.parametrize("target", ["probability", "logit"])
@pytest.mark.parametrize("activation", ["tanh", "relu"])
def test_embedding_gradient_finite_differences(target, activation):
    model, rng = _random_model(1, activation=activation)
    x = rng.standard_normal(5)
    W, b = model.arrays["weights"], model.arrays["bias"]
    e, de = embedding_gradient(model, x, 1, target)

    def y_c(flat_e):
        logits = W @ activate(activation, flat_e) + b
        if target == "logit":
            return logits[1]
        return softmax_columns(logits[:, None])[1, 0]

    numeric = central_difference(y_c, e.ravel(), 1e-6)
    assert close(de.ravel(), numeric, rel=1e-5, floor=1e-9)


def test_nonnegative_and_additive():
    model, rng = _random_model(2)
    for _ in range(20):
        x = rng.standard_normal(5)
        for c in range(3):
            m = grad_cam(model, x, c)
            assert np.all(m >= 0) and np.all(np.isfinite(m))
            e, de = embedding_gradient(model, x, c)
            per_scale = [np.maximum(de[i] * e[i], 0) for i in range(e.shape[0])]
            np.testing.assert_allclose(m, np.sum(per_scale, axis=0), atol=1e-15)


def test_relu_annihilates_negative_products():
    m = hand_model()
    x = np.array([-2.0, 4.0])
    # e = (-2, 1): class-0 logit weights (1, 2) give products (-2, 2)
    np.testing.assert_allclose(grad_cam(m, x, 0, "logit"), [0.0, 2.0])


def test_errors():
    model, _ = _random_model(3)
    with pytest.raises(ValueError):
        grad_cam(model, np.zeros(5), 3)
    mlp = TrainedModel("mlp1", {"W0": np.zeros((2, 5)), "b0": np.zeros(2)}, "relu")
    with pytest.raises(ValueError):
        grad_cam(mlp, np.zeros(5), 0)


def test_rank_regions():
    smap = SaliencyMap(np.array([[0.2], [0.9], [0.1]]), 0, 0)
    assert [n for n, _ in rank_regions(smap, ["a", "b", "c"])] == ["b", "a", "c"]
    zero = SaliencyMap(np.zeros((3, 2)), 0, 1)
    assert rank_regions(zero, ["a", "b", "c"]) == [("a", 0.0), ("b", 0.0), ("c", 0.0)]
    with pytest.raises(ValueError):
        rank_regions(smap, ["a"])


def test_rank_is_permutation():
    rng = np.random.default_rng(4)
    names = [f"r{i}" for i in range(30)]
    smap = SaliencyMap(np.round(rng.random((30, 2)), 1), 0, 1)
    ranked = rank_regions(smap, names)
    assert sorted(n for n, _ in ranked) == sorted(names)
    scores = [s for _, s in ranked]
    assert scores == sorted(scores, reverse=True)


def test_saliency_csv(tmp_path):
    model, rng = _random_model(5)
    smap = saliency_map(model, rng.standard_normal(5), 7)
    assert smap.values.shape == (5, 3)
    ranked = rank_regions(smap, list("abcde"))
    write_saliency_csv(tmp_path / "s.csv", ranked, "x")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "region_name,class,saliency,rank"
    assert [int(l.split(",")[3]) for l in lines[1:]] == [1, 2, 3, 4, 5]
