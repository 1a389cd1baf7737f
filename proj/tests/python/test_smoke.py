import math
import random

import pytest

dcfair = pytest.importorskip("dcfair")


def make_arrays(n=400, seed=7, base_rate=(0.3, 0.7)):
    rng = random.Random(seed)
    feats, labels, groups = [], [], []
    for i in range(n):
        g = 1 + (rng.random() < 0.5)
        rate = base_rate[g - 1]
        z = 1.0 if rng.random() < rate else -1.0
        feats.append([rng.gauss(0.8 * z, 1.0), rng.gauss(0.0, 1.0)])
        labels.append(z)
        groups.append(g)
    groups[0], groups[1] = 1, 2
    return feats, labels, groups


def test_dataset_and_split():
    feats, labels, groups = make_arrays(200)
    data = dcfair.dataset_from_arrays(feats, labels, groups)
    assert data.n == 200
    assert data.d == 2
    assert data.num_groups == 2
    train, val, test = dcfair.split(data, 0.6, 0.2, 0.2, seed=3)
    assert (train.n, val.n, test.n) == (120, 40, 40)


def test_surrogates():
    v, plus, minus, _, _ = dcfair.hinge_surrogate(0.0)
    assert v == 0.5 and plus == 0.5 and minus == 0.0
    v, plus, minus, _, _ = dcfair.hinge_surrogate(0.73)
    assert abs(v - 1.0) < 1e-15
    s, ds = dcfair.sigmoid_surrogate(0.0)
    assert s == 0.5 and abs(ds - 0.25) < 1e-15


def test_metrics_against_reference():
    a = [3.0, 2.0, 1.0, 0.5]
    b = [3.0, 2.0, 1.0, 0.5]
    assert dcfair.dp_metric([a, b], 1, 2) == 0.0
    assert dcfair.dp_metric([[1.0, 2.0], [3.0, 4.0]], 1, 2) == 1.0

    # wpdp plug-in: p1 = 0.5, p2 = 0.25, I = [0.25, 0.75]
    g1 = [1.0, 1.0, -1.0, -1.0]
    g2 = [1.0, -1.0, -1.0, -1.0]
    got = dcfair.wpdp_metric([g1, g2], 1, 2, 0.25, 0.75, 0.0)
    assert abs(got - (0.5 - 0.25) / 0.5) < 1e-12


def test_featurize_and_score():
    assert dcfair.featurize([0.5], 2) == [1.0, 0.5, 2.0, 1.0]
    w = [0.0, 1.0, 0.0, 0.0]  # score = x1
    assert dcfair.score(w, [2.5], 1) == 2.5


def test_theoretical_schedule():
    s = dcfair.theoretical_schedule(1.0, 1.0, 1.0, 0.1, 1.0, 0.0)
    assert s["K"] == 800
    assert abs(s["eps_k"] - 1.5625e-4) < 1e-18
    assert s["Lambda"] == pytest.approx(2.0 / math.sqrt(2.0))


def test_train_unconstrained_and_pdp():
    feats, labels, groups = make_arrays(800, seed=11)
    data = dcfair.dataset_from_arrays(feats, labels, groups)

    base = dcfair.train(data, family="unconstrained", outer=10, inner=60, seed=1)
    assert 0.5 < base["accuracy"] <= 1.0

    fair = dcfair.train(data, family="pdp", param=0.1, interval=(0.0, 0.8),
                        outer=25, inner=80, seed=1)
    assert fair["feasible_found"]
    assert fair["max_infeas"] <= 1e-3 + 1e-9
    # the constraint should not leave the model less fair than unconstrained
    assert fair["pdp"] <= base["pdp"] + 0.05


def test_select_interval():
    feats, labels, groups = make_arrays(600, seed=5)
    data = dcfair.dataset_from_arrays(feats, labels, groups)
    base = dcfair.train(data, family="unconstrained", outer=10, inner=60, seed=2)
    sel = dcfair.select_interval(data, base["weights"], theta_hat=0.0,
                                 width=0.5, grid_step=0.05)
    a, b = sel["interval"]
    assert 0.0 <= a < b <= 1.0
    assert a - 1e-9 <= sel["pooled_rate"] <= b + 1e-9
    assert len(sel["candidates"]) >= 1


def test_errors_are_typed():
    with pytest.raises(dcfair.DataError):
        dcfair.dataset_from_arrays([[1.0]], [1.0], [1])  # single group
