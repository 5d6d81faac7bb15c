import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from catbreak.analysis import (
    SensitivityRule,
    SensitivityTarget,
    compare_stationarity,
    feature_sensitivity,
    gradient_indicator_fidelity,
    instance_fidelity,
    marginal_gains,
    stationarity_ratio,
    true_changes,
)
from catbreak.attacks import AttackConfig, ScoreRule, TraceRecord, feat_attack
from catbreak.bench import gen_dataset
from catbreak.categorical import Instance
from catbreak.classifier import AffineModel, ClassifierHandle, Objective, make_random_classifier
from catbreak.errors import CatbreakError


def test_sensitivity_isolates_the_switch_feature(switch_model):
    handle = ClassifierHandle(switch_model)
    dataset = [Instance((0, 0, 0), 0), Instance((0, 1, 1), 0)]
    report = feature_sensitivity(handle, dataset)
    assert report.values == pytest.approx((0.4, 0.0, 0.0))
    assert report.ranking() == [0, 1, 2]
    drop = feature_sensitivity(handle, dataset, target=SensitivityTarget.TRUE_DROP)
    assert drop.values == pytest.approx((0.4, 0.0, 0.0))


def test_sensitivity_first_alternative_rule(switch_model):
    handle = ClassifierHandle(switch_model)
    report = feature_sensitivity(handle, [Instance((0, 0, 0), 0)], SensitivityRule.FIRST_ALT)
    assert report.values[0] == pytest.approx(0.4)
    assert report.to_dict()["rule"] == "first-alt"


def test_sensitivity_ranks_planted_feature_first(planted_model):
    dataset = gen_dataset(planted_model, 30, seed=4)
    report = feature_sensitivity(ClassifierHandle(planted_model), dataset)
    assert report.ranking()[0] == planted_model.planted[0]


def test_sensitivity_csv(tmp_path, switch_model):
    report = feature_sensitivity(ClassifierHandle(switch_model), [Instance((0, 0, 0), 0)])
    path = tmp_path / "fs.csv"
    report.to_csv(path)
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["feature", "fs"]
    assert [row[0] for row in rows[1:]] == ["0", "1", "2"]
    assert float(rows[1][1]) == pytest.approx(0.4)


def test_sensitivity_rejects_empty_dataset(switch_model):
    with pytest.raises(CatbreakError, match="EMPTY_DATASET"):
        feature_sensitivity(ClassifierHandle(switch_model), [])


def test_true_changes_measure_objective_moves(switch_model):
    changes = true_changes(ClassifierHandle(switch_model), Instance((0, 0, 0), 0), Objective())
    assert changes.tolist() == pytest.approx([0.8, 0.0, 0.0])


def test_fidelity_is_perfect_for_affine_model_with_present_values(affine_model):
    dataset = gen_dataset(affine_model, 20, seed=0)
    assert all(None not in inst.categories for inst in dataset)
    report = gradient_indicator_fidelity(ClassifierHandle(affine_model), dataset)
    assert report.rule is ScoreRule.EDIT_DELTA
    assert not report.degenerate
    assert report.correlation == pytest.approx(1.0, abs=1e-9)
    valid = [c for c in report.per_instance if not math.isnan(c)]
    assert valid and min(valid) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_is_perfect_for_affine_model_on_empty_instances(affine_model):
    dataset = [Instance((None,) * 6, 0), Instance((None,) * 6, 1)]
    report = gradient_indicator_fidelity(ClassifierHandle(affine_model), dataset)
    assert report.correlation == pytest.approx(1.0, abs=1e-12)
    assert report.instances == 2


def test_fidelity_with_insertions_and_deletions_on_affine_model(affine_model):
    dataset = gen_dataset(affine_model, 12, seed=4, absent_rate=0.3)
    report = gradient_indicator_fidelity(
        ClassifierHandle(affine_model), dataset, allow_delete=True
    )
    assert report.correlation == pytest.approx(1.0, abs=1e-9)


def test_fidelity_is_degenerate_for_constant_ranks(switch_model):
    inst = Instance((None, None, None), 0)
    handle = ClassifierHandle(switch_model)
    assert not math.isnan(instance_fidelity(handle, inst))

    flat = ClassifierHandle(make_random_classifier(2, 1, seed=0))
    assert math.isnan(instance_fidelity(flat, Instance((0, 0), 0)))
    report = gradient_indicator_fidelity(flat, [Instance((0, 0), 0)])
    assert report.degenerate
    assert report.to_dict()["correlation"] is None


def test_fidelity_with_edit_delta_rule_on_random_model():
    model = make_random_classifier(6, 4, k=2, d=4, seed=5, hidden=(16,))
    dataset = gen_dataset(model, 20, seed=1)
    report = gradient_indicator_fidelity(
        ClassifierHandle(model), dataset, sample=10, rule=ScoreRule.EDIT_DELTA
    )
    assert report.instances == 10
    assert -1.0 <= report.correlation <= 1.0


def test_fidelity_validates_arguments(switch_model):
    handle = ClassifierHandle(switch_model)
    with pytest.raises(CatbreakError, match="EMPTY_DATASET"):
        gradient_indicator_fidelity(handle, [])
    with pytest.raises(CatbreakError, match="sample"):
        gradient_indicator_fidelity(handle, [Instance((0, 0, 0))], sample=0)
    with pytest.raises(CatbreakError, match="BLACK_BOX_MODEL"):
        gradient_indicator_fidelity(handle.fork(white_box=False), [Instance((0, 0, 0))])


@pytest.fixture
def nudge_model():
    """Affine model that never flips; editing features 0-2 adds 0.1 to the margin, 3 adds 0.05."""
    weights = np.zeros((4, 2, 2))
    weights[:3, 0] = [0.1, -0.1]
    weights[:3, 1] = [0.05, -0.05]
    weights[3, 0] = [0.15, -0.15]
    weights[3, 1] = [0.125, -0.125]
    return AffineModel(np.array([0.5, 0.5]), weights, (2, 2, 2, 2))


@pytest.mark.parametrize("marginal, reading", [(True, 1.0), (False, 0.4)])
def test_stationarity_on_constant_model_is_flat(stuck_model, marginal, reading):
    handle = ClassifierHandle(stuck_model)
    report = stationarity_ratio(
        handle, Instance((0, 0, 0, 0), 1), [0, 1, 2, 3], window=3, marginal=marginal
    )
    assert report.features == (0, 1, 2, 3)
    assert report.ratios == pytest.approx((0.0,) * 4, abs=1e-12)
    assert report.fraction_below(1e-2) == 1.0
    assert report.measure == "std/mean"
    for values in report.rewards.values():
        assert values == pytest.approx([reading] * 3)


def test_marginal_readings_remove_drift_from_other_edits(nudge_model):
    cfg = AttackConfig(top_l=3, score_rule=ScoreRule.EDIT_DELTA)
    inst = Instance((0, 0, 0, 0), 0)
    marginal = stationarity_ratio(ClassifierHandle(nudge_model), inst, [3], window=3, cfg=cfg)
    raw = stationarity_ratio(
        ClassifierHandle(nudge_model), inst, [3], window=3, cfg=cfg, marginal=False
    )
    # feature 3 is outside the top 3, so only the other edits move its reading
    assert marginal.rewards[3] == pytest.approx([1.05] * 3)
    assert marginal.ratios[0] == pytest.approx(0.0, abs=1e-12)
    assert raw.rewards[3][0] == pytest.approx(0.15)
    assert raw.rewards[3][1] == pytest.approx(0.25)
    assert raw.ratios[0] > 0.1


def test_stationarity_stops_reading_once_the_label_flips(switch_model):
    handle = ClassifierHandle(switch_model)
    report = stationarity_ratio(handle, Instance((0, 0, 0), 0), [0, 1, 2], window=3)
    # the first round flips the label, so only the starting instance is read
    assert all(len(values) == 1 for values in report.rewards.values())
    assert report.rewards[0] == pytest.approx([1.8])
    assert report.rewards[1] == pytest.approx([1.0])
    assert report.ratios == pytest.approx((0.0, 0.0, 0.0))


def test_stationarity_readings_do_not_touch_attack_counter(switch_model):
    handle = ClassifierHandle(switch_model)
    stationarity_ratio(handle, Instance((0, 0, 0), 0), [0, 1, 2], window=3)
    # precheck and three initial pulls; the flipping edit reuses its pull
    assert handle.query_count == 1 + 3


def test_stationarity_needs_two_rounds(switch_model):
    with pytest.raises(CatbreakError, match="two rounds"):
        stationarity_ratio(ClassifierHandle(switch_model), Instance((0, 0, 0)), [0], window=1)


def test_stationarity_rejects_misclassified_instance(switch_model):
    with pytest.raises(CatbreakError, match="already misclassified"):
        stationarity_ratio(ClassifierHandle(switch_model), Instance((1, 0, 0), 0), [0], window=2)


def test_compare_stationarity_reports_both_groups(planted_model):
    handle = ClassifierHandle(planted_model)
    dataset = gen_dataset(planted_model, 10, seed=3)
    sensitivity = feature_sensitivity(handle.fork(), dataset)
    reports = compare_stationarity(
        handle, dataset[0], sensitivity, k=2, window=4, cfg=AttackConfig(), use_variance=True
    )
    assert set(reports) == {"sensitive", "insensitive"}
    assert reports["sensitive"].features[0] == sensitivity.ranking()[0]
    for report in reports.values():
        assert report.measure == "var/mean"
        assert all(ratio >= 0.0 for ratio in report.ratios)


def test_marginal_gains_follow_best_margin(switch_model):
    result = feat_attack(ClassifierHandle(switch_model), Instance((0, 0, 0), 0))
    margins = [-0.5, -0.2, -0.3, 0.1]
    trace = tuple(TraceRecord(1, i + 1, 0, 1, 1.0, m, 1) for i, m in enumerate(margins))
    gains = marginal_gains(replace(result, trace=trace))
    assert gains == pytest.approx([0.3, 0.0, 0.3])
