"""Minimal neural substrate shared by the RL controller and the SMBO surrogate.

Everything is plain numpy with hand-written backpropagation: a single tanh
recurrent cell, per-slot softmax policy heads, and a logistic scalar
regression head. Gradients are exact; tests verify them against central
finite differences.

All randomness (initialization, action sampling, shuffling) flows through
injected ``numpy.random.Generator`` instances, so equal seeds give identical
parameter trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

INIT_SCALE = 0.08
GRAD_CLIP_NORM = 5.0

Params = dict[str, np.ndarray]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def _uniform(rng: np.random.Generator, *shape: int, scale: float = INIT_SCALE) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


def _global_norm(grads: Params) -> float:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    return float(np.sqrt(total))


class SgdOptimizer:
    """SGD with optional momentum and global-norm gradient clipping.

    The update is a pure function of (params, grads, velocity state).
    """

    def __init__(self, learning_rate: float, momentum: float = 0.0, clip_norm: float = GRAD_CLIP_NORM):
        if learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 <= momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.clip_norm = clip_norm
        self._velocity: Params = {}

    def apply(self, params: Params, grads: Params) -> None:
        scale = 1.0
        if self.clip_norm:
            norm = _global_norm(grads)
            if norm > self.clip_norm:
                scale = self.clip_norm / norm
        for key, grad in grads.items():
            step = grad * scale
            if self.momentum:
                vel = self._velocity.get(key)
                if vel is None:
                    vel = np.zeros_like(step)
                vel = self.momentum * vel + step
                self._velocity[key] = vel
                step = vel
            params[key] -= self.learning_rate * step


@dataclass
class RewardBaseline:
    """Exponential moving average of rewards, initialized to the first one."""

    decay: float = 0.9
    value: float | None = None

    def advantage(self, reward: float) -> float:
        """Advantage against the current baseline; the baseline updates after use."""
        if self.value is None:
            self.value = float(reward)
        adv = float(reward) - self.value
        self.value = self.decay * self.value + (1.0 - self.decay) * float(reward)
        return adv


class _RecurrentBase:
    """Shared tanh-RNN machinery; subclasses add their output heads."""

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator):
        if input_dim < 1 or hidden_dim < 1:
            raise ConfigError("input_dim and hidden_dim must be positive")
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.params: Params = {
            "W_xh": _uniform(rng, input_dim, hidden_dim),
            "W_hh": _uniform(rng, hidden_dim, hidden_dim),
            "b_h": _uniform(rng, hidden_dim),
        }

    def _step(self, x: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
        pre = x @ self.params["W_xh"] + h_prev @ self.params["W_hh"] + self.params["b_h"]
        return np.tanh(pre)

    def _zero_grads(self) -> Params:
        return {key: np.zeros_like(value) for key, value in self.params.items()}

    def _backprop_step(
        self,
        grads: Params,
        x: np.ndarray,
        h_prev: np.ndarray,
        h: np.ndarray,
        dh: np.ndarray,
    ) -> np.ndarray:
        """Accumulate cell gradients for one step; returns dL/dh_prev."""
        dpre = dh * (1.0 - h * h)
        grads["W_xh"] += np.outer(x, dpre)
        grads["W_hh"] += np.outer(h_prev, dpre)
        grads["b_h"] += dpre
        return self.params["W_hh"] @ dpre

    def state_dict(self) -> dict:
        return {
            "format_version": 1,
            "kind": type(self).__name__,
            "params": {key: value.tolist() for key, value in self.params.items()},
        }

    def load_state(self, state: dict) -> None:
        if state.get("format_version") != 1:
            raise ConfigError(f"unsupported model state version: {state.get('format_version')}")
        for key, value in state["params"].items():
            if key not in self.params:
                raise ConfigError(f"unknown parameter {key!r} in model state")
            arr = np.asarray(value, dtype=float)
            if arr.shape != self.params[key].shape:
                raise ConfigError(
                    f"parameter {key!r} has shape {arr.shape}, expected {self.params[key].shape}"
                )
            self.params[key] = arr


@dataclass
class _PolicyStep:
    x: np.ndarray
    h_prev: np.ndarray
    h: np.ndarray
    probs: np.ndarray
    action: int


@dataclass
class PolicyCache:
    steps: list[_PolicyStep] = field(default_factory=list)

    @property
    def tokens(self) -> tuple[int, ...]:
        return tuple(step.action for step in self.steps)


class PolicyNetwork(_RecurrentBase):
    """Recurrent controller emitting one categorical choice per decision slot.

    The step-t input is the one-hot of the previous action (zeros at t=0),
    padded to the largest slot cardinality.
    """

    def __init__(
        self,
        slot_cardinalities: tuple[int, ...],
        hidden_dim: int,
        rng: np.random.Generator,
    ):
        cards = tuple(int(c) for c in slot_cardinalities)
        if not cards or any(c < 1 for c in cards):
            raise ConfigError("slot cardinalities must be positive and non-empty")
        super().__init__(max(cards), hidden_dim, rng)
        self.slot_cardinalities = cards
        for t, card in enumerate(cards):
            self.params[f"W_out_{t}"] = _uniform(rng, hidden_dim, card)
            self.params[f"b_out_{t}"] = _uniform(rng, card)

    def forward(
        self, tokens: tuple[int, ...] | None = None, rng: np.random.Generator | None = None
    ) -> PolicyCache:
        """Run the sequence, sampling actions unless ``tokens`` teacher-forces them."""
        if tokens is None and rng is None:
            raise ConfigError("sampling requires an rng")
        if tokens is not None and len(tokens) != len(self.slot_cardinalities):
            raise ConfigError(
                f"expected {len(self.slot_cardinalities)} tokens, got {len(tokens)}"
            )
        cache = PolicyCache()
        h = np.zeros(self.hidden_dim)
        x = np.zeros(self.input_dim)
        for t, card in enumerate(self.slot_cardinalities):
            h_prev = h
            h = self._step(x, h_prev)
            probs = softmax(h @ self.params[f"W_out_{t}"] + self.params[f"b_out_{t}"])
            if tokens is None:
                action = int(rng.choice(card, p=probs))
            else:
                action = int(tokens[t])
                if not 0 <= action < card:
                    raise ConfigError(f"token {action} out of bounds for slot {t} (card {card})")
            cache.steps.append(_PolicyStep(x, h_prev, h, probs, action))
            x = np.zeros(self.input_dim)
            x[action] = 1.0
        return cache

    def sample(self, rng: np.random.Generator) -> PolicyCache:
        return self.forward(rng=rng)

    def action_probs(self, tokens: tuple[int, ...]) -> list[np.ndarray]:
        return [step.probs for step in self.forward(tokens=tokens).steps]

    def reinforce_grads(self, cache: PolicyCache, advantage: float) -> Params:
        """Exact gradients of L = -advantage * sum_t log pi(a_t)."""
        grads = self._zero_grads()
        dh_next = np.zeros(self.hidden_dim)
        for t in reversed(range(len(cache.steps))):
            step = cache.steps[t]
            dlogits = advantage * step.probs.copy()
            dlogits[step.action] -= advantage
            grads[f"W_out_{t}"] += np.outer(step.h, dlogits)
            grads[f"b_out_{t}"] += dlogits
            dh = self.params[f"W_out_{t}"] @ dlogits + dh_next
            dh_next = self._backprop_step(grads, step.x, step.h_prev, step.h, dh)
        return grads

    def loss(self, tokens: tuple[int, ...], advantage: float) -> float:
        """REINFORCE surrogate loss for gradient checking."""
        cache = self.forward(tokens=tokens)
        log_probs = sum(float(np.log(s.probs[s.action])) for s in cache.steps)
        return -advantage * log_probs


@dataclass
class RegressorCache:
    xs: list[np.ndarray]
    h_prevs: list[np.ndarray]
    hs: list[np.ndarray]
    output: float


class AccuracyRegressor(_RecurrentBase):
    """Sequence-to-scalar accuracy predictor with a logistic output head.

    Token t maps to input index ``slot_offsets[t] + token`` so distinct
    vocabularies get distinct embeddings. Sequences may be any length up to
    ``len(slot_offsets)``.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        slot_offsets: tuple[int, ...] = (),
    ):
        super().__init__(input_dim, hidden_dim, rng)
        self.slot_offsets = tuple(int(o) for o in slot_offsets)
        self.params["W_r"] = _uniform(rng, hidden_dim)
        self.params["b_r"] = _uniform(rng, 1)

    @classmethod
    def for_micro_space(cls, space, hidden_dim: int, rng: np.random.Generator) -> "AccuracyRegressor":
        n_norm, n_conv = len(space.norm_ops), len(space.conv_ops)
        offsets = tuple(0 if t % 2 == 0 else n_norm for t in range(space.max_layers))
        return cls(n_norm + n_conv, hidden_dim, rng, slot_offsets=offsets)

    def _input_index(self, position: int, token: int) -> int:
        offset = self.slot_offsets[position] if position < len(self.slot_offsets) else 0
        index = offset + int(token)
        if not 0 <= index < self.input_dim:
            raise ConfigError(f"token {token} at position {position} maps outside input_dim")
        return index

    def forward(self, tokens: tuple[int, ...]) -> RegressorCache:
        if not tokens:
            raise ConfigError("regressor input must contain at least one token")
        h = np.zeros(self.hidden_dim)
        xs, h_prevs, hs = [], [], []
        for t, token in enumerate(tokens):
            x = np.zeros(self.input_dim)
            x[self._input_index(t, token)] = 1.0
            h_prev = h
            h = self._step(x, h_prev)
            xs.append(x)
            h_prevs.append(h_prev)
            hs.append(h)
        pre = float(h @ self.params["W_r"] + self.params["b_r"][0])
        output = 1.0 / (1.0 + np.exp(-pre)) if pre >= 0 else np.exp(pre) / (1.0 + np.exp(pre))
        return RegressorCache(xs, h_prevs, hs, float(output))

    def predict(self, tokens: tuple[int, ...]) -> float:
        return self.forward(tokens).output

    def mse_grads(self, cache: RegressorCache, target: float) -> Params:
        """Exact gradients of L = (output - target)^2."""
        grads = self._zero_grads()
        y = cache.output
        dpre = 2.0 * (y - target) * y * (1.0 - y)
        h_last = cache.hs[-1]
        grads["W_r"] += dpre * h_last
        grads["b_r"] += np.array([dpre])
        dh = dpre * self.params["W_r"]
        for t in reversed(range(len(cache.hs))):
            dh = self._backprop_step(grads, cache.xs[t], cache.h_prevs[t], cache.hs[t], dh)
        return grads

    def loss(self, tokens: tuple[int, ...], target: float) -> float:
        y = self.forward(tokens).output
        return (y - target) ** 2


def forward_sequence(network, tokens: tuple[int, ...]):
    """Deterministic forward pass returning (outputs, cache)."""
    if isinstance(network, PolicyNetwork):
        cache = network.forward(tokens=tokens)
        return [step.probs for step in cache.steps], cache
    cache = network.forward(tokens)
    return cache.output, cache


def backward(network, cache, *, advantage: float | None = None, target: float | None = None) -> Params:
    """Exact gradients of the network's loss on a cached forward pass."""
    if isinstance(network, PolicyNetwork):
        if advantage is None:
            raise ConfigError("policy backward needs an advantage")
        return network.reinforce_grads(cache, advantage)
    if target is None:
        raise ConfigError("regression backward needs a target")
    return network.mse_grads(cache, target)


def reinforce_update(
    policy: PolicyNetwork,
    tokens: tuple[int, ...],
    reward: float,
    baseline: RewardBaseline,
    optimizer: SgdOptimizer,
) -> float:
    """One REINFORCE step on an episode sampled from this policy.

    Returns the advantage used (0 exactly when the reward equals the baseline).
    """
    advantage = baseline.advantage(reward)
    cache = policy.forward(tokens=tokens)
    grads = policy.reinforce_grads(cache, advantage)
    optimizer.apply(policy.params, grads)
    return advantage


def dataset_mse(regressor: AccuracyRegressor, pairs: list[tuple[tuple[int, ...], float]]) -> float:
    return float(
        np.mean([(regressor.predict(tokens) - target) ** 2 for tokens, target in pairs])
    )


def fit_regressor(
    regressor: AccuracyRegressor,
    pairs: list[tuple[tuple[int, ...], float]],
    epochs: int,
    learning_rate: float,
    rng: np.random.Generator,
    momentum: float = 0.0,
    max_backoff: int = 3,
) -> float:
    """Per-sample SGD over shuffled epochs; returns the final training MSE.

    Guarantees final MSE <= initial MSE on the same data: if an attempt ends
    worse, the parameters are restored and training retries with a halved
    learning rate (up to ``max_backoff`` times), falling back to the original
    parameters if every attempt fails.
    """
    if not pairs:
        raise ConfigError("fit_regressor needs a non-empty dataset")
    if epochs < 1:
        raise ConfigError("epochs must be >= 1")
    snapshot = {key: value.copy() for key, value in regressor.params.items()}
    before = dataset_mse(regressor, pairs)
    shuffle_seed = int(rng.integers(2**63))
    for attempt in range(max_backoff + 1):
        order_rng = np.random.default_rng(shuffle_seed)
        optimizer = SgdOptimizer(learning_rate / 2**attempt, momentum=momentum)
        for _ in range(epochs):
            for index in order_rng.permutation(len(pairs)):
                tokens, target = pairs[index]
                cache = regressor.forward(tokens)
                grads = regressor.mse_grads(cache, target)
                optimizer.apply(regressor.params, grads)
        after = dataset_mse(regressor, pairs)
        if after <= before:
            return after
        regressor.params = {key: value.copy() for key, value in snapshot.items()}
    return before
