import numpy as np
import pytest
from hypothesis import given, strategies as st

from covletnet.baselines import (MlpSpec, make_1mlp, make_2mlp_identity, make_2mlp_reduced,
                                 matched_reduced, mlp_backward, mlp_forward, train_mlp)
from covletnet.data import apply_standardizer, fit_standardizer
from covletnet.model import TrainConfig, loss, parameter_count
from covletnet.synth import SynthSpec, synth_generate
from oracles import central_difference, close


@pytest.mark.parametrize("C, count", [(2, 322), (4, 644)])
def test_one_layer_counts(C, count):
    assert make_1mlp(160, C).parameter_count() == count


@pytest.mark.parametrize("C, count", [(2, 26082), (4, 26404)])
def test_identity_hidden_counts(C, count):
    spec = make_2mlp_identity(160, C)
    assert spec.layer_widths == (160, 160, C)
    assert spec.parameter_count() == count


def test_tiny_widths():
    assert make_1mlp(1, 2).layer_widths == (1, 2)
    assert make_2mlp_identity(2, 2).layer_widths == (2, 2, 2)


def test_reduced_matches_scale_network_budget():
    spec = make_2mlp_reduced(160, 2, parameter_count(160, 2, 16))
    assert spec.layer_widths == (160, 31, 2)
    assert spec.parameter_count() == 5055
    assert make_2mlp_reduced(160, 2, 5218).layer_widths[1] == 32
    assert matched_reduced(160, 4, 16).parameter_count() <= 10260


def test_reduced_infeasible():
    with pytest.raises(ValueError):
        make_2mlp_reduced(160, 2, 160 + 2 * 2)
    assert make_2mlp_reduced(160, 2, 160 + 2 * 2 + 1).layer_widths[1] == 1


@given(p=st.integers(1, 300), C=st.integers(2, 6), extra=st.integers(0, 100000))
def test_reduced_never_exceeds_target(p, C, extra):
    target = p + 2 * C + 1 + extra
    spec = make_2mlp_reduced(p, C, target)
    h = spec.layer_widths[1]
    assert spec.parameter_count() <= target
    assert MlpSpec((p, h + 1, C)).parameter_count() > target


def test_bad_spec():
    with pytest.raises(ValueError):
        MlpSpec((3,))
    with pytest.raises(ValueError):
        MlpSpec((3, 0, 2))


@pytest.mark.parametrize("widths", [(4, 3), (4, 5, 3), (3, 4, 4, 2)])
@pytest.mark.parametrize("activation", ["relu", "tanh"])
def test_mlp_gradients(widths, activation):
    rng = np.random.default_rng(sum(widths))
    arrays = {}
    for i in range(len(widths) - 1):
        arrays[f"W{i}"] = rng.standard_normal((widths[i + 1], widths[i]))
        arrays[f"b{i}"] = rng.standard_normal(widths[i + 1])
    X = rng.standard_normal((widths[0], 7))
    labels = rng.integers(0, widths[-1], 7)
    pred, cache = mlp_forward(arrays, activation, X)
    grads = mlp_backward(arrays, activation, cache, labels)
    for key, value in arrays.items():
        def f(v, key=key):
            trial = dict(arrays, **{key: v})
            return loss(mlp_forward(trial, activation, X)[0], labels)
        assert close(grads[key], central_difference(f, value, 1e-5)), key


def test_one_layer_on_separable_data():
    d = synth_generate(SynthSpec())
    idx = np.arange(d.n_samples)
    tr_idx, te_idx = idx[idx % 5 != 0], idx[idx % 5 == 0]
    std = fit_standardizer(d.subset(tr_idx))
    tr, te = apply_standardizer(std, d.subset(tr_idx)), apply_standardizer(std, d.subset(te_idx))
    model, log = train_mlp(make_1mlp(d.n_features, 2), tr, te, TrainConfig(epochs=200))
    assert log[-1].test_accuracy >= 0.95
    assert model.parameter_count() == 40 * 2 + 2
    with pytest.raises(ValueError):
        train_mlp(make_1mlp(3, 2), tr, te, TrainConfig(epochs=1))
