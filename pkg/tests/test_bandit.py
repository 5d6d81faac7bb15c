import math

import numpy as np
import pytest

from catbreak.bandit import (
    ArmStats,
    BanditConfig,
    RewardVariant,
    batch_rewards,
    reward,
    select_arm,
    ucb_score,
    ucb_scores,
    update,
    variant_reward,
)
from catbreak.errors import CatbreakError


def test_reward_is_best_wrong_minus_true_plus_lambda():
    conf_pert = np.array([0.3, 0.5, 0.2])
    conf_base = np.array([0.6, 0.3, 0.1])
    assert reward(conf_pert, conf_base, 0) == pytest.approx(0.5 - 0.6 + 1.0)
    assert reward(conf_pert, conf_pert, 0, lam=0.0) == pytest.approx(0.2)


def test_reward_stays_in_lambda_band():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.dirichlet(np.ones(4), size=2)
        g = reward(a, b, int(rng.integers(4)), lam=1.0)
        assert 0.0 <= g <= 2.0


def test_reward_rejects_mismatched_shapes():
    with pytest.raises(CatbreakError, match="SHAPE_MISMATCH"):
        reward(np.array([0.5, 0.5]), np.array([0.2, 0.3, 0.5]), 0)
    with pytest.raises(CatbreakError, match="label 2"):
        reward(np.array([0.5, 0.5]), np.array([0.5, 0.5]), 2)


def test_variants_pick_their_baseline():
    conf_pert = np.array([0.4, 0.6])
    conf_orig = np.array([0.9, 0.1])
    perturbed = variant_reward(conf_pert, conf_orig, 0, 1.0, RewardVariant.PERTURBED_BASE)
    original = variant_reward(conf_pert, conf_orig, 0, 1.0, RewardVariant.ORIGINAL_BASE)
    assert perturbed == pytest.approx(1.2)
    assert original == pytest.approx(0.7)


@pytest.mark.parametrize("variant", list(RewardVariant))
def test_batch_rewards_match_scalar_rewards(variant):
    probs = np.array([[0.1, 0.7, 0.2], [0.5, 0.2, 0.3]])
    conf_orig = np.array([0.6, 0.3, 0.1])
    batch = batch_rewards(probs, conf_orig, 0, 1.0, variant)
    expected = [variant_reward(row, conf_orig, 0, 1.0, variant) for row in probs]
    assert batch.tolist() == pytest.approx(expected)


def test_update_tracks_mean_and_population_variance():
    stats = ArmStats.tracked()
    for g in (1.0, 2.0, 3.0, 4.0):
        update(stats, g)
    assert stats.pulls == 4
    assert stats.mean == pytest.approx(2.5)
    assert stats.variance == pytest.approx(1.25)
    assert stats.history == [1.0, 2.0, 3.0, 4.0]
    assert stats.to_dict() == {"pulls": 4, "mean": 2.5, "variance": pytest.approx(1.25)}


def test_update_single_pull_has_zero_variance():
    stats = update(ArmStats(), 0.7)
    assert stats.variance == 0.0
    assert stats.history is None


def test_update_rejects_non_finite_reward():
    with pytest.raises(CatbreakError, match="NON_FINITE"):
        update(ArmStats(), float("inf"))


def test_unpulled_arm_has_no_variance_or_score():
    assert ArmStats().to_dict()["mean"] is None
    with pytest.raises(CatbreakError, match="UNPULLED_ARM"):
        _ = ArmStats().variance
    with pytest.raises(CatbreakError, match="UNPULLED_ARM"):
        ucb_score(ArmStats(), 3)


def test_ucb_score_formula():
    stats = ArmStats()
    for g in (1.0, 1.5):
        update(stats, g)
    t = 10
    expected = 1.25 + math.sqrt(4 * 0.0625 * math.log(t) / 2) + math.log(t) / 2
    assert ucb_score(stats, t, alpha=4) == pytest.approx(expected)
    squared = 1.25 + math.sqrt(4 * 0.0625 * math.log(t) / 2) + 16 * math.log(t) / 2
    assert ucb_score(stats, t, alpha=4, squared_alpha_bonus=True) == pytest.approx(squared)


def test_ucb_score_with_zero_alpha_drops_variance_term():
    stats = ArmStats()
    for g in (0.0, 2.0):
        update(stats, g)
    assert ucb_score(stats, 4, alpha=0) == pytest.approx(1.0 + math.log(4) / 2)


def test_ucb_score_rejects_time_below_pulls():
    stats = update(update(ArmStats(), 1.0), 1.0)
    with pytest.raises(CatbreakError, match="t=1"):
        ucb_score(stats, 1)


def test_vectorized_scores_agree_with_scalar_scores():
    arms = [ArmStats(), ArmStats(), ArmStats()]
    for arm, rewards in zip(arms, ([1.0, 1.2], [0.5], [1.1, 0.9, 1.0])):
        for g in rewards:
            update(arm, g)
    t = 6
    vector = ucb_scores(
        np.array([a.mean for a in arms]),
        np.array([a.variance for a in arms]),
        np.array([a.pulls for a in arms]),
        t,
    )
    assert vector.tolist() == pytest.approx([ucb_score(a, t) for a in arms])


def test_vectorized_scores_reject_unpulled():
    with pytest.raises(CatbreakError, match="UNPULLED_ARM"):
        ucb_scores(np.zeros(2), np.zeros(2), np.array([1, 0]), 2)


def test_select_arm_breaks_ties_toward_lowest_index():
    arms = [update(ArmStats(), 1.0), update(ArmStats(), 1.0)]
    chosen, scores = select_arm(arms, alpha=4)
    assert chosen == 0
    assert scores[0] == scores[1]
    update(arms[1], 1.5)
    assert select_arm(arms, alpha=0)[0] == 0


def test_select_arm_scores_at_total_pulls():
    arms = [update(update(ArmStats(), 1.0), 1.5), update(ArmStats(), 0.5)]
    _, scores = select_arm(arms, alpha=4)
    assert scores == pytest.approx([ucb_score(arms[0], 3), ucb_score(arms[1], 3)])


def test_bandit_config_validates_alpha():
    assert BanditConfig().alpha == 4.0
    with pytest.raises(CatbreakError, match="alpha"):
        BanditConfig(alpha=-1.0)


def test_ucb_score_worked_value():
    stats = ArmStats(pulls=2, mean=0.5, m2=0.08)
    assert stats.variance == pytest.approx(0.04)
    assert ucb_score(stats, 8, alpha=4) == pytest.approx(1.9476, abs=1e-4)


def test_welford_matches_batch_mean_and_variance():
    samples = np.random.default_rng(11).uniform(0.0, 2.0, size=1000)
    stats = ArmStats()
    for g in samples:
        update(stats, g)
    assert stats.pulls == 1000
    assert stats.mean == pytest.approx(np.mean(samples), abs=1e-12)
    assert stats.variance == pytest.approx(np.var(samples), abs=1e-12)


@pytest.mark.parametrize("variant", list(RewardVariant))
def test_lambda_shift_keeps_the_best_edit(variant):
    rng = np.random.default_rng(5)
    for _ in range(20):
        probs = rng.dirichlet(np.ones(3), size=6)
        conf_orig = rng.dirichlet(np.ones(3))
        base = batch_rewards(probs, conf_orig, 1, 0.0, variant)
        for lam in (1.0, 2.5, 10.0):
            shifted = batch_rewards(probs, conf_orig, 1, lam, variant)
            assert int(np.argmax(shifted)) == int(np.argmax(base))
            np.testing.assert_allclose(shifted - base, lam)
