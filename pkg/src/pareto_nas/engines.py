"""Search engines: RL controller search, progressive SMBO search, and baselines.

Every engine consumes a seeded config and produces a :class:`SearchTrace`
plus a final :class:`~pareto_nas.pareto.ParetoFront`. Traces are append-only
and serialize to a fixed-column CSV; equal seeds give byte-identical traces
regardless of the evaluation worker count, because accuracy backends are pure
and batch results are merged in a deterministic order.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .archspace import (
    ArchSpec,
    MacroSpace,
    MicroSpace,
    decode,
    encode,
    enumerate_extensions,
    sample_uniform,
)
from .costmodel import DeviceProfile, MetricVector, estimate_device_metrics
from .errors import ConfigError
from .evaluator import AccuracyEvaluator
from .neuralcore import (
    AccuracyRegressor,
    PolicyNetwork,
    RewardBaseline,
    SgdOptimizer,
    fit_regressor,
    reinforce_update,
)
from .pareto import ObjectiveSpec, ParetoFront, front_from_evaluations, select_k
from .reward import RewardConfig, compute_reward

logger = logging.getLogger(__name__)

DEFAULT_INPUT_SHAPE = (3, 16, 16)

TRACE_COLUMNS = (
    "iteration",
    "arch",
    "accuracy",
    "error_rate",
    "params",
    "flops",
    "latency_s",
    "energy_j",
    "peak_power_w",
    "memory_bytes",
    "reward",
    "phase",
)

PREDICT_PHASE = "predict"


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    arch: str
    metrics: MetricVector
    reward: float
    phase: str

    def row(self) -> list[str]:
        m = self.metrics
        return [
            str(self.iteration),
            self.arch,
            repr(m.accuracy),
            repr(m.error_rate),
            str(m.params),
            str(m.flops),
            repr(m.latency_s),
            repr(m.energy_j),
            repr(m.peak_power_w),
            str(m.memory_bytes),
            repr(self.reward),
            self.phase,
        ]


class SearchTrace:
    """Append-only log of every candidate an engine touched."""

    def __init__(self, metadata: dict | None = None):
        self.records: list[TraceRecord] = []
        self.metadata: dict = dict(metadata or {})
        self.checkpoint: dict | None = None

    def append(
        self, iteration: int, spec: ArchSpec, metrics: MetricVector, reward: float, phase: str
    ) -> None:
        if self.records and iteration < self.records[-1].iteration:
            raise ConfigError(
                f"iteration indices must be non-decreasing: {iteration} after {self.records[-1].iteration}"
            )
        arch = encode(spec)
        decode(arch)  # guarantees every stored encoding decodes
        self.records.append(TraceRecord(int(iteration), arch, metrics, float(reward), phase))

    def __len__(self) -> int:
        return len(self.records)

    def true_records(self) -> list[TraceRecord]:
        """Records backed by real evaluator calls (surrogate predictions excluded)."""
        return [r for r in self.records if r.phase != PREDICT_PHASE]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for record in self.records:
            writer.writerow(record.row())
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv_text())

    @classmethod
    def from_csv(cls, path: str | Path) -> "SearchTrace":
        trace = cls()
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(header[: len(TRACE_COLUMNS)]) != TRACE_COLUMNS:
                raise ConfigError(f"{path}: unexpected trace header {header}")
            for row in reader:
                metrics = MetricVector(
                    accuracy=float(row[2]),
                    params=int(row[4]),
                    flops=int(row[5]),
                    latency_s=float(row[6]),
                    energy_j=float(row[7]),
                    peak_power_w=float(row[8]),
                    memory_bytes=int(row[9]),
                )
                trace.append(int(row[0]), decode(row[1]), metrics, float(row[10]), row[11])
        return trace


@dataclass(frozen=True)
class Candidate:
    """A spec with its metrics; metric fields read through for objective lookups."""

    spec: ArchSpec
    metrics: MetricVector

    def __getattr__(self, name):
        return getattr(self.metrics, name)


@dataclass(frozen=True)
class Constraint:
    """A satisfiability predicate over metrics, for satisfaction-rate reporting."""

    kind: str  # "power" | "accuracy"
    value: float

    def __post_init__(self):
        if self.kind not in ("power", "accuracy"):
            raise ConfigError(f"constraint kind must be 'power' or 'accuracy', got {self.kind!r}")

    def satisfied(self, metrics: MetricVector) -> bool:
        if self.kind == "power":
            return metrics.peak_power_w <= self.value
        return metrics.accuracy >= self.value

    @classmethod
    def from_reward(cls, config: RewardConfig) -> "Constraint | None":
        if config.kind == "power_constraint":
            return cls("power", config.power_budget_w)
        if config.kind == "accuracy_constraint":
            return cls("accuracy", config.accuracy_threshold)
        return None


def satisfaction_rate(
    trace: SearchTrace, constraint: Constraint, window: int
) -> list[tuple[int, float]]:
    """Sliding-window fraction of sampled children satisfying the constraint.

    The window must fit inside the trace's truly-evaluated records.
    """
    records = trace.true_records()
    if window < 1:
        raise ConfigError("window must be >= 1")
    if window > len(records):
        raise ConfigError(
            f"window {window} larger than trace length {len(records)}; window must fit"
        )
    flags = [1 if constraint.satisfied(r.metrics) else 0 for r in records]
    prefix = [0]
    for f in flags:
        prefix.append(prefix[-1] + f)
    series = []
    for end in range(window, len(records) + 1):
        frac = (prefix[end] - prefix[end - window]) / window
        series.append((records[end - 1].iteration, frac))
    return series


def _parallel_accuracies(
    specs: list[ArchSpec], evaluator: AccuracyEvaluator, epochs: int | None, n_workers: int
) -> list[float]:
    """Evaluate a batch; results come back in input order no matter the workers."""
    if n_workers <= 1 or len(specs) <= 1:
        return [evaluator.evaluate(spec, epochs) for spec in specs]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(lambda s: evaluator.evaluate(s, epochs), specs))


def _measured(
    spec: ArchSpec,
    space,
    profile: DeviceProfile,
    input_shape: tuple[int, int, int],
    accuracy: float,
) -> MetricVector:
    return estimate_device_metrics(spec, space, profile, input_shape).with_accuracy(accuracy)


# ---------------------------------------------------------------------------
# MONAS-style RL search
# ---------------------------------------------------------------------------


@dataclass
class MonasConfig:
    space: MacroSpace
    reward: RewardConfig
    iterations: int
    seed: int = 0
    hidden_dim: int = 24
    learning_rate: float = 0.05
    momentum: float = 0.0
    baseline_decay: float = 0.9
    clip_norm: float = 5.0
    epochs: int | None = None
    initial_state: dict | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if not isinstance(self.space, MacroSpace):
            raise ConfigError("run_monas requires a macro space")


def run_monas(
    config: MonasConfig,
    evaluator: AccuracyEvaluator,
    profile: DeviceProfile,
    input_shape: tuple[int, int, int] = DEFAULT_INPUT_SHAPE,
    n_workers: int = 1,
) -> tuple[SearchTrace, ParetoFront]:
    """Sample-evaluate-update loop: one child network per controller iteration.

    The returned front maximizes accuracy and minimizes energy over every
    evaluated child.
    """
    del n_workers  # one child per iteration; the update loop is inherently serial
    rng = np.random.default_rng(config.seed)
    policy = PolicyNetwork(config.space.slot_cardinalities(), config.hidden_dim, rng)
    if config.initial_state is not None:
        policy.load_state(config.initial_state)
    optimizer = SgdOptimizer(config.learning_rate, config.momentum, config.clip_norm)
    baseline = RewardBaseline(decay=config.baseline_decay)
    trace = SearchTrace(
        metadata={
            "engine": "monas",
            "seed": config.seed,
            "profile": profile.name,
            "reward": config.reward.as_dict(),
        }
    )
    evaluated: list[tuple[ArchSpec, MetricVector]] = []
    for iteration in range(1, config.iterations + 1):
        cache = policy.sample(rng)
        spec = ArchSpec("macro", cache.tokens)
        accuracy = evaluator.evaluate(spec, config.epochs)
        metrics = _measured(spec, config.space, profile, input_shape, accuracy)
        reward_value = compute_reward(config.reward, metrics, profile)
        reinforce_update(policy, cache.tokens, reward_value, baseline, optimizer)
        trace.append(iteration, spec, metrics, reward_value, "search")
        evaluated.append((spec, metrics))
    objectives = ObjectiveSpec.of(("accuracy", "max"), ("energy_j", "min"))
    front = front_from_evaluations(evaluated, objectives)
    trace.checkpoint = {
        "format_version": 1,
        "engine": "monas",
        "iteration": config.iterations,
        "baseline": baseline.value,
        "model": policy.state_dict(),
    }
    logger.info("monas: %d iterations, front size %d", config.iterations, len(front))
    return trace, front


# ---------------------------------------------------------------------------
# DPP-Net-style progressive SMBO search
# ---------------------------------------------------------------------------


@dataclass
class SmboConfig:
    space: MicroSpace
    objectives: ObjectiveSpec
    k: int
    train_epochs: int
    seed: int = 0
    surrogate_hidden: int = 16
    surrogate_lr: float = 0.25
    surrogate_epochs: int = 150
    surrogate_momentum: float = 0.0
    initial_state: dict | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.train_epochs < 1:
            raise ConfigError("train_epochs must be >= 1")
        if not isinstance(self.space, MicroSpace):
            raise ConfigError("run_dppnet requires a micro space")


def run_dppnet(
    config: SmboConfig,
    evaluator: AccuracyEvaluator,
    profile: DeviceProfile,
    input_shape: tuple[int, int, int] = DEFAULT_INPUT_SHAPE,
    n_workers: int = 1,
) -> tuple[SearchTrace, ParetoFront]:
    """Progressive mutate / predict / select / refit loop.

    Generation 0 trains every 1-layer block to seed the surrogate. Each later
    generation extends the survivors by one layer, ranks all extensions with
    surrogate-predicted error plus exact cost objectives, true-evaluates the
    selected K, and refits the surrogate. The final front covers only
    true-evaluated candidates.
    """
    space = config.space
    rng = np.random.default_rng(config.seed)
    regressor = AccuracyRegressor.for_micro_space(space, config.surrogate_hidden, rng)
    if config.initial_state is not None:
        regressor.load_state(config.initial_state)
    trace = SearchTrace(
        metadata={
            "engine": "dppnet",
            "seed": config.seed,
            "profile": profile.name,
            "k": config.k,
            "train_epochs": config.train_epochs,
            "objectives": list(config.objectives.objectives),
        }
    )

    def true_candidates(specs: list[ArchSpec], generation: int, phase: str) -> list[Candidate]:
        accs = _parallel_accuracies(specs, evaluator, config.train_epochs, n_workers)
        out = []
        for spec, acc in zip(specs, accs):
            metrics = _measured(spec, space, profile, input_shape, acc)
            trace.append(generation, spec, metrics, acc, phase)
            out.append(Candidate(spec, metrics))
        return out

    init_specs = sorted(
        (ArchSpec("micro", (i,)) for i in range(len(space.norm_ops))), key=lambda s: s.tokens
    )
    evaluated = true_candidates(init_specs, 0, "init")
    dataset = [(c.spec.tokens, c.metrics.accuracy) for c in evaluated]
    fit_regressor(
        regressor,
        dataset,
        config.surrogate_epochs,
        config.surrogate_lr,
        rng,
        momentum=config.surrogate_momentum,
    )
    survivors = select_k(evaluated, config.objectives, config.k, rng)
    all_true = list(evaluated)

    generation = 0
    while survivors and survivors[0].spec.layer_count < space.max_layers:
        generation += 1
        extensions: list[ArchSpec] = []
        for parent in survivors:
            extensions.extend(enumerate_extensions(parent.spec, space))
        extensions.sort(key=lambda s: s.tokens)
        if not extensions:
            logger.info("dppnet: no valid extensions at generation %d, stopping", generation)
            break
        vocab_size = len(space.slot_vocab(survivors[0].spec.layer_count))
        assert len(extensions) == vocab_size * len(survivors)
        predicted: list[Candidate] = []
        for spec in extensions:
            pred = regressor.predict(spec.tokens)
            metrics = _measured(spec, space, profile, input_shape, pred)
            trace.append(generation, spec, metrics, pred, PREDICT_PHASE)
            predicted.append(Candidate(spec, metrics))
        selected = select_k(predicted, config.objectives, config.k, rng)
        survivors = true_candidates([c.spec for c in selected], generation, "evaluate")
        all_true.extend(survivors)
        dataset.extend((c.spec.tokens, c.metrics.accuracy) for c in survivors)
        fit_regressor(
            regressor,
            dataset,
            config.surrogate_epochs,
            config.surrogate_lr,
            rng,
            momentum=config.surrogate_momentum,
        )

    front = front_from_evaluations([(c.spec, c.metrics) for c in all_true], config.objectives)
    trace.checkpoint = {
        "format_version": 1,
        "engine": "dppnet",
        "generation": generation,
        "training_pairs": len(dataset),
        "model": regressor.state_dict(),
    }
    logger.info(
        "dppnet: %d generations, %d true evaluations, front size %d",
        generation,
        len(all_true),
        len(front),
    )
    return trace, front


# ---------------------------------------------------------------------------
# Baselines: random search and tournament-selection EA
# ---------------------------------------------------------------------------


def run_random(
    space,
    budget: int,
    evaluator: AccuracyEvaluator,
    profile: DeviceProfile,
    objectives: ObjectiveSpec,
    seed: int = 0,
    input_shape: tuple[int, int, int] = DEFAULT_INPUT_SHAPE,
    epochs: int | None = None,
    n_workers: int = 1,
) -> tuple[SearchTrace, ParetoFront]:
    """Uniform sampling under the evaluation budget."""
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    rng = np.random.default_rng(seed)
    specs = [sample_uniform(space, rng) for _ in range(budget)]
    accs = _parallel_accuracies(specs, evaluator, epochs, n_workers)
    trace = SearchTrace(metadata={"engine": "random", "seed": seed, "profile": profile.name})
    evaluated = []
    for i, (spec, acc) in enumerate(zip(specs, accs), start=1):
        metrics = _measured(spec, space, profile, input_shape, acc)
        trace.append(i, spec, metrics, acc, "random")
        evaluated.append((spec, metrics))
    return trace, front_from_evaluations(evaluated, objectives)


@dataclass
class EaConfig:
    space: object
    reward: RewardConfig
    budget: int
    population_size: int
    tournament_size: int
    mutation_rate: float = 1.0
    eviction: str = "worst"
    seed: int = 0
    epochs: int | None = None

    def __post_init__(self):
        if not self.population_size >= self.tournament_size >= 2:
            raise ConfigError("need population_size >= tournament_size >= 2")
        if self.budget < self.population_size:
            raise ConfigError("budget must cover at least the initial population")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must be in [0, 1]")
        if self.eviction not in ("worst", "oldest"):
            raise ConfigError("eviction must be 'worst' or 'oldest'")


@dataclass
class _Individual:
    spec: ArchSpec
    metrics: MetricVector
    fitness: float


def run_ea(
    config: EaConfig,
    evaluator: AccuracyEvaluator,
    profile: DeviceProfile,
    objectives: ObjectiveSpec,
    input_shape: tuple[int, int, int] = DEFAULT_INPUT_SHAPE,
    n_workers: int = 1,
) -> tuple[SearchTrace, ParetoFront]:
    """Tournament-selection EA over scalar fitness from the reward config.

    Each step samples a tournament, copies the winner, mutates one random
    slot with probability ``mutation_rate``, evaluates the child, and evicts
    the worst (or oldest) member.
    """
    space = config.space
    rng = np.random.default_rng(config.seed)
    trace = SearchTrace(
        metadata={
            "engine": "ea",
            "seed": config.seed,
            "profile": profile.name,
            "reward": config.reward.as_dict(),
        }
    )

    def fitness_of(metrics: MetricVector) -> float:
        return compute_reward(config.reward, metrics, profile)

    init_specs = [sample_uniform(space, rng) for _ in range(config.population_size)]
    init_accs = _parallel_accuracies(init_specs, evaluator, config.epochs, n_workers)
    population: list[_Individual] = []
    evaluated = []
    evaluations = 0
    for spec, acc in zip(init_specs, init_accs):
        metrics = _measured(spec, space, profile, input_shape, acc)
        individual = _Individual(spec, metrics, fitness_of(metrics))
        evaluations += 1
        trace.append(evaluations, spec, metrics, individual.fitness, "init")
        population.append(individual)
        evaluated.append((spec, metrics))

    cards = space.slot_cardinalities()
    while evaluations < config.budget:
        entrants = rng.choice(len(population), size=config.tournament_size, replace=False)
        winner = population[entrants[int(np.argmax([population[i].fitness for i in entrants]))]]
        tokens = list(winner.spec.tokens)
        if rng.random() < config.mutation_rate:
            slot = int(rng.integers(len(tokens)))
            tokens[slot] = int(rng.integers(cards[slot]))
        child_spec = ArchSpec(space.kind, tuple(tokens))
        acc = evaluator.evaluate(child_spec, config.epochs)
        metrics = _measured(child_spec, space, profile, input_shape, acc)
        child = _Individual(child_spec, metrics, fitness_of(metrics))
        evaluations += 1
        trace.append(evaluations, child_spec, metrics, child.fitness, "evolve")
        evaluated.append((child_spec, metrics))
        population.append(child)
        if config.eviction == "worst":
            victim = int(np.argmin([ind.fitness for ind in population]))
        else:
            victim = 0
        population.pop(victim)

    return trace, front_from_evaluations(evaluated, objectives)
