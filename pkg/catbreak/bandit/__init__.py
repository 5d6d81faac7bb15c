"""Rewards, variance-aware UCB and regret accounting."""

from catbreak.bandit.regret import (
    ArmDistribution,
    ArmSpec,
    SimulationReport,
    bound_for_arms,
    regret_bound,
    simulate_bandit,
)
from catbreak.bandit.reward import RewardVariant, batch_rewards, reward, variant_reward
from catbreak.bandit.ucb import ArmStats, BanditConfig, select_arm, ucb_score, ucb_scores, update

__all__ = [
    "ArmDistribution",
    "ArmSpec",
    "ArmStats",
    "BanditConfig",
    "RewardVariant",
    "SimulationReport",
    "batch_rewards",
    "bound_for_arms",
    "regret_bound",
    "reward",
    "select_arm",
    "simulate_bandit",
    "ucb_score",
    "ucb_scores",
    "update",
    "variant_reward",
]
