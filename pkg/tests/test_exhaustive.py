import pytest

from catbreak.attacks import METHODS, AttackConfig, StopReason, feat_attack, run_attack
from catbreak.attacks.exhaustive import enumeration_size, exhaustive_attack
from catbreak.bench import gen_dataset
from catbreak.categorical import Instance
from catbreak.classifier import ClassifierHandle, Sensitivity, make_planted_classifier
from catbreak.errors import CatbreakError


def test_enumeration_size_counts_edits_up_to_budget():
    options = [(1, 2), (0,), (1, 2, 3)]
    # 1 + (2 + 1 + 3) + (2*1 + 2*3 + 1*3)
    assert enumeration_size(options, 2) == 1 + 6 + 11
    assert enumeration_size(options, 0) == 1
    assert enumeration_size(options, 5) == 1 + 6 + 11 + 6


def test_exhaustive_finds_single_flip(switch_model):
    handle = ClassifierHandle(switch_model)
    result = exhaustive_attack(handle, Instance((0, 0, 0), 0))
    assert result.success
    assert result.stop_reason is StopReason.SUCCESS
    assert result.adversarial.categories == (1, 0, 0)
    assert result.queries == 1 + 3


def test_exhaustive_reports_precheck(switch_model):
    result = exhaustive_attack(ClassifierHandle(switch_model), Instance((1, 0, 0), 0))
    assert result.stop_reason is StopReason.PRECHECK
    assert result.changed == 0


def test_exhaustive_failure_is_not_success(stuck_model):
    cfg = AttackConfig(budget=2)
    result = exhaustive_attack(ClassifierHandle(stuck_model), Instance((0, 0, 0, 0), 1), cfg)
    assert not result.success
    assert result.stop_reason is StopReason.EXHAUSTED
    assert result.queries == 1 + 4 * 2 + 6 * 4


def test_exhaustive_refuses_large_enumerations(stuck_model):
    handle = ClassifierHandle(stuck_model)
    cfg = AttackConfig(budget=2, exhaustive_limit=10)
    with pytest.raises(CatbreakError, match="TOO_LARGE"):
        exhaustive_attack(handle, Instance((0, 0, 0, 0), 1), cfg)
    assert handle.query_count == 0


def test_exhaustive_is_never_worse_than_feat(planted_model):
    cfg = AttackConfig(budget=2)
    for inst in gen_dataset(planted_model, 6, seed=1):
        feat = feat_attack(ClassifierHandle(planted_model), inst, cfg)
        oracle = exhaustive_attack(ClassifierHandle(planted_model), inst, cfg)
        if feat.success:
            assert oracle.success
            assert oracle.changed <= feat.changed


@pytest.mark.slow
def test_oracle_bounds_every_method_and_fsgs_comes_close():
    model = make_planted_classifier(4, 3, k=2, d=4, sensitivity=Sensitivity.skewed(1), seed=12)
    dataset = gen_dataset(model, 200, seed=13)
    cfg = AttackConfig(budget=2, seed=1)
    wins = {method: 0 for method in METHODS}
    for inst in dataset:
        solved = {
            method: run_attack(method, ClassifierHandle(model), inst, cfg).success
            for method in METHODS
        }
        if not solved["exhaustive"]:
            assert not any(solved.values())
        for method, success in solved.items():
            wins[method] += success
    assert wins["exhaustive"] > 0
    for method in METHODS:
        assert wins[method] <= wins["exhaustive"]
    assert wins["fsgs"] >= 0.9 * wins["exhaustive"]
