"""The three search reward functions mapping metrics to a scalar.

* mixed: R = alpha * accuracy - (1 - alpha) * Energy*
* power constraint: R = accuracy if peak power <= budget else 0
* accuracy constraint: R = 1 - Energy* if accuracy >= threshold else 0

Energy* is the profile-normalized energy in [0, 1], so the mixed reward is
bounded in [-1, 1] and the constraint rewards in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

from .costmodel import DeviceProfile, MetricVector, normalize_energy
from .errors import ConfigError

MIXED = "mixed"
POWER_CONSTRAINT = "power_constraint"
ACCURACY_CONSTRAINT = "accuracy_constraint"

REWARD_KINDS = (MIXED, POWER_CONSTRAINT, ACCURACY_CONSTRAINT)


@dataclass(frozen=True)
class RewardConfig:
    """Reward kind plus exactly the parameter that kind requires."""

    kind: str
    alpha: float | None = None
    power_budget_w: float | None = None
    accuracy_threshold: float | None = None

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise ConfigError(f"reward kind must be one of {REWARD_KINDS}, got {self.kind!r}")
        expected = {
            MIXED: "alpha",
            POWER_CONSTRAINT: "power_budget_w",
            ACCURACY_CONSTRAINT: "accuracy_threshold",
        }[self.kind]
        for name in ("alpha", "power_budget_w", "accuracy_threshold"):
            value = getattr(self, name)
            if name == expected:
                if value is None:
                    raise ConfigError(f"reward kind {self.kind!r} requires {name}")
            elif value is not None:
                raise ConfigError(f"reward kind {self.kind!r} does not take {name}")
        if self.kind == MIXED and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.kind == POWER_CONSTRAINT and self.power_budget_w <= 0:
            raise ConfigError(f"power_budget_w must be > 0, got {self.power_budget_w}")
        if self.kind == ACCURACY_CONSTRAINT and not 0.0 <= self.accuracy_threshold <= 1.0:
            raise ConfigError(f"accuracy_threshold must be in [0, 1], got {self.accuracy_threshold}")

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in ("alpha", "power_budget_w", "accuracy_threshold"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def mixed_reward(metrics: MetricVector, alpha: float, profile: DeviceProfile) -> float:
    """Weighted accuracy/energy combination; alpha=1 degenerates to accuracy."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    energy_norm = normalize_energy(metrics.energy_j, profile)
    return alpha * metrics.accuracy - (1.0 - alpha) * energy_norm


def power_constraint_reward(metrics: MetricVector, budget_w: float) -> float:
    """Accuracy when peak power fits the budget (boundary passes), else 0."""
    if budget_w <= 0:
        raise ConfigError(f"power budget must be > 0, got {budget_w}")
    return metrics.accuracy if metrics.peak_power_w <= budget_w else 0.0


def accuracy_constraint_reward(
    metrics: MetricVector, threshold: float, profile: DeviceProfile
) -> float:
    """1 - Energy* when accuracy reaches the threshold (boundary passes), else 0."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"accuracy threshold must be in [0, 1], got {threshold}")
    if metrics.accuracy >= threshold:
        return 1.0 - normalize_energy(metrics.energy_j, profile)
    return 0.0


def compute_reward(config: RewardConfig, metrics: MetricVector, profile: DeviceProfile) -> float:
    if config.kind == MIXED:
        return mixed_reward(metrics, config.alpha, profile)
    if config.kind == POWER_CONSTRAINT:
        return power_constraint_reward(metrics, config.power_budget_w)
    return accuracy_constraint_reward(metrics, config.accuracy_threshold, profile)
