"""Accuracy backends: a deterministic synthetic oracle and a tabular benchmark.

Both backends expose the same two calls so engines never branch on the kind:

* ``evaluate(spec, epochs)`` - the accuracy a search engine observes,
* ``true_accuracy(spec)`` - full fidelity, noise disabled, for ground truth.

The synthetic oracle is a logistic score over per-slot one-hot features plus
normalized depth, scaled by a linear training-epoch ramp. Its noise is drawn
from a hash of (oracle seed, architecture encoding), never from the shared
run RNG, so re-evaluating a spec always returns the same value and traces
stay reproducible under any evaluation order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pareto
from .archspace import ArchSpec, SearchSpace, encode, enumerate_space, space_stats, validate
from .costmodel import DeviceProfile, MetricVector, estimate_device_metrics
from .errors import BenchmarkMissError, ConfigError, SpaceTooLargeError, SpecValidationError

ENUMERATION_LIMIT = 1_000_000


@dataclass(frozen=True)
class FidelityConfig:
    """Proxy-vs-full training epochs; proxy accuracy ramps linearly with N."""

    proxy_epochs: int = 10
    full_epochs: int = 10

    def __post_init__(self):
        if self.proxy_epochs < 1:
            raise ConfigError("proxy_epochs must be >= 1")
        if self.full_epochs < self.proxy_epochs:
            raise ConfigError("full_epochs must be >= proxy_epochs")

    def ramp(self, epochs: int) -> float:
        if not 1 <= epochs <= self.full_epochs:
            raise ConfigError(f"epochs must be in [1, {self.full_epochs}], got {epochs}")
        return epochs / self.full_epochs


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _noise_for(seed: int, encoding: str, std: float) -> float:
    if std == 0.0:
        return 0.0
    digest = hashlib.sha256(f"{seed}:{encoding}".encode()).digest()
    sub = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return float(sub.normal(0.0, std))


class SyntheticOracle:
    """Deterministic stand-in for training and validating a child network."""

    def __init__(
        self,
        space: SearchSpace,
        slot_weights: list[np.ndarray],
        depth_weight: float = 0.0,
        bias: float = 0.0,
        seed: int = 0,
        noise_std: float = 0.0,
        max_accuracy: float = 1.0,
        fidelity: FidelityConfig | None = None,
        quadratic: tuple[np.ndarray, np.ndarray] | None = None,
    ):
        cards = space.slot_cardinalities()
        if len(slot_weights) != len(cards):
            raise ConfigError(f"expected {len(cards)} slot weight vectors, got {len(slot_weights)}")
        weights = []
        for i, (w, card) in enumerate(zip(slot_weights, cards)):
            arr = np.asarray(w, dtype=float)
            if arr.shape != (card,):
                raise ConfigError(f"slot {i} weights must have shape ({card},), got {arr.shape}")
            weights.append(arr)
        if noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if not 0 < max_accuracy <= 1:
            raise ConfigError("max_accuracy must be in (0, 1]")
        self.space = space
        self.slot_weights = weights
        self.depth_weight = float(depth_weight)
        self.bias = float(bias)
        self.seed = int(seed)
        self.noise_std = float(noise_std)
        self.max_accuracy = float(max_accuracy)
        self.fidelity = fidelity or FidelityConfig()
        self.quadratic = quadratic
        self._feature_dim = sum(cards) + 1

    @classmethod
    def from_seed(
        cls,
        space: SearchSpace,
        seed: int,
        noise_std: float = 0.0,
        max_accuracy: float = 0.95,
        weight_scale: float = 1.0,
        depth_weight_scale: float = 1.0,
        fidelity: FidelityConfig | None = None,
        quadratic_rank: int = 0,
    ) -> "SyntheticOracle":
        """Draw slot preference weights from a dedicated seeded generator."""
        rng = np.random.default_rng(seed)
        cards = space.slot_cardinalities()
        weights = [rng.normal(0.0, weight_scale, size=card) for card in cards]
        depth_weight = float(rng.normal(0.0, depth_weight_scale))
        quadratic = None
        if quadratic_rank > 0:
            dim = sum(cards) + 1
            scale = weight_scale / math.sqrt(dim)
            quadratic = (
                rng.normal(0.0, scale, size=(quadratic_rank, dim)),
                rng.normal(0.0, scale, size=(quadratic_rank, dim)),
            )
        return cls(
            space,
            weights,
            depth_weight=depth_weight,
            seed=seed,
            noise_std=noise_std,
            max_accuracy=max_accuracy,
            fidelity=fidelity,
            quadratic=quadratic,
        )

    def feature_vector(self, spec: ArchSpec) -> np.ndarray:
        """One-hot of each decided token, padded per slot, plus normalized depth."""
        cards = self.space.slot_cardinalities()
        features = np.zeros(self._feature_dim)
        offset = 0
        for i, card in enumerate(cards):
            if i < len(spec.tokens):
                features[offset + spec.tokens[i]] = 1.0
            offset += card
        features[-1] = len(spec.tokens) / len(cards) if cards else 1.0
        return features

    def _score(self, spec: ArchSpec) -> float:
        score = self.bias
        for i, tok in enumerate(spec.tokens):
            score += float(self.slot_weights[i][tok])
        cards = self.space.slot_cardinalities()
        depth = len(spec.tokens) / len(cards) if cards else 1.0
        score += self.depth_weight * depth
        if self.quadratic is not None:
            f = self.feature_vector(spec)
            u, v = self.quadratic
            score += float(np.dot(u @ f, v @ f))
        return score

    def _check(self, spec: ArchSpec) -> str:
        violations = validate(spec, self.space)
        if violations:
            raise SpecValidationError(violations)
        return encode(spec)

    def evaluate(self, spec: ArchSpec, epochs: int | None = None) -> float:
        """Accuracy at the given training fidelity; pure in (spec, seed, epochs)."""
        encoding = self._check(spec)
        epochs = self.fidelity.proxy_epochs if epochs is None else epochs
        base = self.max_accuracy * _sigmoid(self._score(spec)) * self.fidelity.ramp(epochs)
        value = base + _noise_for(self.seed, encoding, self.noise_std)
        return min(1.0, max(0.0, value))

    def true_accuracy(self, spec: ArchSpec) -> float:
        """Full-fidelity accuracy with noise disabled."""
        self._check(spec)
        value = self.max_accuracy * _sigmoid(self._score(spec))
        return min(1.0, max(0.0, value))


class TabularBenchmark:
    """Pre-computed accuracy lookups keyed by the canonical encoding."""

    def __init__(self, entries: dict[str, dict], space: SearchSpace | None = None):
        self.entries = dict(entries)
        self.space = space
        for key, record in self.entries.items():
            acc = record.get("accuracy")
            if acc is None or not 0.0 <= float(acc) <= 1.0:
                raise ConfigError(f"benchmark entry {key!r} has accuracy outside [0, 1]: {acc}")
        self.coverage = (
            len(self.entries) / space_stats(space).total_candidates if space is not None else None
        )

    @classmethod
    def load_jsonl(cls, path: str | Path, space: SearchSpace | None = None) -> "TabularBenchmark":
        """One JSON object per line: {"arch": ..., "accuracy": ...}; extras ignored."""
        entries: dict[str, dict] = {}
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if "arch" not in record or "accuracy" not in record:
                raise ConfigError(f"{path}:{lineno}: entry needs 'arch' and 'accuracy' fields")
            key = record["arch"]
            if key in entries:
                raise ConfigError(f"{path}:{lineno}: duplicate architecture key {key!r}")
            if space is not None:
                from .archspace import decode

                violations = validate(decode(key), space)
                if violations:
                    raise ConfigError(f"{path}:{lineno}: invalid encoding {key!r}: {violations}")
            entries[key] = record
        return cls(entries, space=space)

    def evaluate(self, spec: ArchSpec, epochs: int | None = None) -> float:
        del epochs  # stored accuracies are reported verbatim
        encoding = encode(spec)
        if encoding not in self.entries:
            raise BenchmarkMissError(encoding)
        return float(self.entries[encoding]["accuracy"])

    def true_accuracy(self, spec: ArchSpec) -> float:
        return self.evaluate(spec)


AccuracyEvaluator = SyntheticOracle | TabularBenchmark


def true_front(
    space: SearchSpace,
    oracle: AccuracyEvaluator,
    profile: DeviceProfile,
    objectives: pareto.ObjectiveSpec,
    input_shape: tuple[int, int, int],
    limit: int = ENUMERATION_LIMIT,
) -> "pareto.ParetoFront":
    """Exhaustive ground-truth Pareto front over the whole space.

    Micro spaces enumerate at full depth. Refuses spaces beyond ``limit``.
    """
    entries = evaluate_all(space, oracle, profile, input_shape, limit=limit)
    return pareto.front_from_evaluations(entries, objectives)


def evaluate_all(
    space: SearchSpace,
    oracle: AccuracyEvaluator,
    profile: DeviceProfile,
    input_shape: tuple[int, int, int],
    limit: int = ENUMERATION_LIMIT,
) -> list[tuple[ArchSpec, MetricVector]]:
    """Every candidate with its full ground-truth metric vector."""
    total = space_stats(space).total_candidates
    if total > limit:
        raise SpaceTooLargeError(total, limit)
    out = []
    for spec in enumerate_space(space):
        metrics = estimate_device_metrics(spec, space, profile, input_shape)
        out.append((spec, metrics.with_accuracy(oracle.true_accuracy(spec))))
    return out


__all__ = [
    "FidelityConfig",
    "SyntheticOracle",
    "TabularBenchmark",
    "AccuracyEvaluator",
    "true_front",
    "evaluate_all",
    "ENUMERATION_LIMIT",
]
