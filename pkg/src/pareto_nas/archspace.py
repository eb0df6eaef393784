"""Search space definitions and the canonical architecture encoding.

Two space families are supported:

* :class:`MacroSpace` describes a whole network as per-layer hyperparameter
  choices (kernel size and filter count per layer, plus optional skip flags
  per layer pair).
* :class:`MicroSpace` describes one repeatable cell whose layers alternate
  normalization and convolution ops, grown one layer at a time.

Specs are plain token tuples; the string encoding ``"kind:v0.v1..."`` is the
stable architecture key used across traces, benchmarks and surrogates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapacityError, ConfigError, EncodingError, SpecValidationError

MACRO = "macro"
MICRO = "micro"

NORM = "norm"
CONV = "conv"


@dataclass(frozen=True)
class OpDef:
    """A named cell operation with the static attributes the cost model needs.

    ``expansion`` widens the internal channel count of depthwise ops
    (expand with a pointwise conv, run depthwise, project back); it must be 1
    for non-depthwise ops.
    """

    name: str
    kind: str
    kernel_size: int = 1
    groups: int = 1
    depthwise: bool = False
    expansion: int = 1

    def __post_init__(self):
        if self.kind not in (NORM, CONV):
            raise ConfigError(f"op {self.name!r}: kind must be 'norm' or 'conv', got {self.kind!r}")
        if self.kernel_size < 1:
            raise ConfigError(f"op {self.name!r}: kernel_size must be positive")
        if self.groups < 1:
            raise ConfigError(f"op {self.name!r}: groups must be positive")
        if self.expansion < 1:
            raise ConfigError(f"op {self.name!r}: expansion must be positive")
        if self.expansion > 1 and not self.depthwise:
            raise ConfigError(f"op {self.name!r}: expansion > 1 is only supported for depthwise ops")


# Default vocabularies: batch-norm/identity plus conv ops drawn from the
# MobileNet/CondenseNet/ShuffleNet families, all with closed-form cost formulas.
DEFAULT_NORM_OPS: tuple[OpDef, ...] = (
    OpDef("batch_norm", NORM),
    OpDef("identity", NORM),
)

DEFAULT_CONV_OPS: tuple[OpDef, ...] = (
    OpDef("conv3x3", CONV, kernel_size=3),
    OpDef("conv1x1", CONV, kernel_size=1),
    OpDef("sep3x3", CONV, kernel_size=3, depthwise=True),
    OpDef("gconv1x1_g2", CONV, kernel_size=1, groups=2),
    OpDef("gconv3x3_g4", CONV, kernel_size=3, groups=4),
    OpDef("shuffle1x1_g8", CONV, kernel_size=1, groups=8),
)


@dataclass(frozen=True)
class MacroSpace:
    """Whole-network space: one (kernel, filters) choice pair per layer.

    When ``skip_connections`` is enabled, one boolean slot is added for every
    layer pair (i, j) with i < j, in lexicographic order after the per-layer
    slots. Skip flags shape the accuracy oracle's features but are
    cost-neutral in the cost model.
    """

    num_layers: int
    kernel_sizes: tuple[int, ...]
    filter_counts: tuple[int, ...]
    skip_connections: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kernel_sizes", tuple(self.kernel_sizes))
        object.__setattr__(self, "filter_counts", tuple(self.filter_counts))
        if self.num_layers < 1:
            raise ConfigError("num_layers must be >= 1")
        if not self.kernel_sizes:
            raise ConfigError("kernel_sizes must be non-empty")
        if not self.filter_counts:
            raise ConfigError("filter_counts must be non-empty")
        for k in self.kernel_sizes:
            if k < 1 or k % 2 == 0:
                raise ConfigError(f"kernel sizes must be positive odd integers, got {k}")
        for f in self.filter_counts:
            if f < 1:
                raise ConfigError(f"filter counts must be positive, got {f}")

    @property
    def kind(self) -> str:
        return MACRO

    def skip_pairs(self) -> list[tuple[int, int]]:
        if not self.skip_connections:
            return []
        return [(i, j) for i in range(self.num_layers) for j in range(i + 1, self.num_layers)]

    def slot_cardinalities(self) -> tuple[int, ...]:
        per_layer = (len(self.kernel_sizes), len(self.filter_counts)) * self.num_layers
        return per_layer + (2,) * len(self.skip_pairs())

    def slot_name(self, index: int) -> str:
        if index < 2 * self.num_layers:
            layer, which = divmod(index, 2)
            return f"layer{layer}.{'kernel' if which == 0 else 'filters'}"
        pair = self.skip_pairs()[index - 2 * self.num_layers]
        return f"skip{pair}"

    def num_slots(self) -> int:
        return len(self.slot_cardinalities())


@dataclass(frozen=True)
class MicroSpace:
    """Cell space grown layer by layer, alternating Norm and Conv ops.

    Even token positions index ``norm_ops``, odd positions ``conv_ops``. One
    cell's tokens are shared by all ``num_cells_stacked`` copies; spatial dims
    shrink by ``reduction_between_cells`` between consecutive cells.
    """

    norm_ops: tuple[OpDef, ...] = DEFAULT_NORM_OPS
    conv_ops: tuple[OpDef, ...] = DEFAULT_CONV_OPS
    max_layers: int = 4
    num_cells_stacked: int = 1
    reduction_between_cells: int = 1

    def __post_init__(self):
        object.__setattr__(self, "norm_ops", tuple(self.norm_ops))
        object.__setattr__(self, "conv_ops", tuple(self.conv_ops))
        if not self.norm_ops or not self.conv_ops:
            raise ConfigError("op vocabularies must be non-empty")
        for ops, kind in ((self.norm_ops, NORM), (self.conv_ops, CONV)):
            names = [op.name for op in ops]
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate op names in {kind} vocabulary: {names}")
            for op in ops:
                if op.kind != kind:
                    raise ConfigError(f"op {op.name!r} has kind {op.kind!r}, expected {kind!r}")
        if self.max_layers < 1:
            raise ConfigError("max_layers must be >= 1")
        if self.max_layers % 2 != 0:
            raise ConfigError("max_layers must be even so Norm-Conv alternation completes")
        if self.num_cells_stacked < 1:
            raise ConfigError("num_cells_stacked must be >= 1")
        if self.reduction_between_cells < 1:
            raise ConfigError("reduction_between_cells must be >= 1")

    @property
    def kind(self) -> str:
        return MICRO

    def slot_vocab(self, position: int) -> tuple[OpDef, ...]:
        return self.norm_ops if position % 2 == 0 else self.conv_ops

    def slot_kind(self, position: int) -> str:
        return NORM if position % 2 == 0 else CONV

    def slot_cardinalities(self) -> tuple[int, ...]:
        return tuple(len(self.slot_vocab(i)) for i in range(self.max_layers))

    def slot_name(self, index: int) -> str:
        return f"layer{index}.{self.slot_kind(index)}"

    def num_slots(self) -> int:
        return self.max_layers

    def ops_for(self, spec: "ArchSpec") -> list[OpDef]:
        """Resolve a spec's tokens to op definitions (one cell's layers)."""
        return [self.slot_vocab(i)[tok] for i, tok in enumerate(spec.tokens)]


SearchSpace = MacroSpace | MicroSpace


@dataclass(frozen=True)
class ArchSpec:
    """A candidate architecture: a token index per decided slot."""

    space_kind: str
    tokens: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(int(t) for t in self.tokens))
        if self.space_kind not in (MACRO, MICRO):
            raise ConfigError(f"space_kind must be 'macro' or 'micro', got {self.space_kind!r}")

    @property
    def layer_count(self) -> int:
        """Number of decided cell layers (micro); token count otherwise."""
        return len(self.tokens)


@dataclass(frozen=True)
class SpaceStats:
    """Cardinality summary of a search space at full depth."""

    total_candidates: int
    slot_cardinalities: tuple[int, ...] = field(default=())


def space_stats(space: SearchSpace) -> SpaceStats:
    cards = space.slot_cardinalities()
    return SpaceStats(total_candidates=math.prod(cards), slot_cardinalities=cards)


def encode(spec: ArchSpec, space: SearchSpace | None = None) -> str:
    """Canonical string form ``"kind:v0.v1..."``; injective and stable.

    If ``space`` is given the spec is validated first.
    """
    if space is not None:
        violations = validate(spec, space)
        if violations:
            raise SpecValidationError(violations)
    return f"{spec.space_kind}:" + ".".join(str(t) for t in spec.tokens)


def decode(text: str) -> ArchSpec:
    """Inverse of :func:`encode`."""
    kind, sep, body = text.partition(":")
    if not sep or kind not in (MACRO, MICRO):
        raise EncodingError(f"malformed architecture encoding: {text!r}")
    if body == "":
        return ArchSpec(kind, ())
    try:
        tokens = tuple(int(part) for part in body.split("."))
    except ValueError as exc:
        raise EncodingError(f"malformed architecture encoding: {text!r}") from exc
    if any(t < 0 for t in tokens):
        raise EncodingError(f"negative token index in encoding: {text!r}")
    return ArchSpec(kind, tokens)


def validate(spec: ArchSpec, space: SearchSpace) -> list[str]:
    """Report every violated invariant; an empty list means the spec is valid."""
    violations: list[str] = []
    if spec.space_kind != space.kind:
        violations.append(f"spec kind {spec.space_kind!r} does not match space kind {space.kind!r}")
        return violations

    cards = space.slot_cardinalities()
    if isinstance(space, MacroSpace):
        if len(spec.tokens) != len(cards):
            violations.append(f"macro spec must have {len(cards)} tokens, got {len(spec.tokens)}")
        for i, tok in enumerate(spec.tokens[: len(cards)]):
            if not 0 <= tok < cards[i]:
                violations.append(
                    f"slot {i} ({space.slot_name(i)}): token {tok} out of bounds [0, {cards[i]})"
                )
    else:
        if len(spec.tokens) > space.max_layers:
            violations.append(
                f"micro spec has {len(spec.tokens)} layers, exceeding max_layers={space.max_layers}"
            )
        for i, tok in enumerate(spec.tokens[: space.max_layers]):
            vocab = space.slot_vocab(i)
            if not 0 <= tok < len(vocab):
                msg = f"slot {i} must be {space.slot_kind(i).capitalize()}: token {tok} out of bounds [0, {len(vocab)})"
                other = space.conv_ops if space.slot_kind(i) == NORM else space.norm_ops
                if tok < len(other):
                    msg += f" (index only valid for {'conv' if space.slot_kind(i) == NORM else 'norm'} ops)"
                violations.append(msg)
    return violations


def sample_uniform(
    space: SearchSpace, rng: np.random.Generator, layer_count: int | None = None
) -> ArchSpec:
    """Draw each slot index independently and uniformly.

    For micro spaces ``layer_count`` selects the depth (default: full depth).
    """
    if isinstance(space, MacroSpace):
        if layer_count is not None:
            raise ConfigError("layer_count only applies to micro spaces")
        cards = space.slot_cardinalities()
    else:
        depth = space.max_layers if layer_count is None else layer_count
        if not 0 <= depth <= space.max_layers:
            raise ConfigError(f"layer_count must be in [0, {space.max_layers}], got {depth}")
        cards = space.slot_cardinalities()[:depth]
    tokens = tuple(int(rng.integers(c)) for c in cards)
    return ArchSpec(space.kind, tokens)


def enumerate_extensions(spec: ArchSpec, space: MicroSpace) -> list[ArchSpec]:
    """All one-layer extensions of a micro spec, in vocabulary order.

    Returns exactly ``|V|`` specs where V is the vocabulary of the next slot
    (norm ops after an even number of layers, conv ops otherwise).
    """
    if not isinstance(space, MicroSpace):
        raise ConfigError("enumerate_extensions requires a micro space")
    violations = validate(spec, space)
    if violations:
        raise SpecValidationError(violations)
    depth = spec.layer_count
    if depth >= space.max_layers:
        raise CapacityError(f"spec already at max_layers={space.max_layers}, cannot extend")
    vocab = space.slot_vocab(depth)
    return [ArchSpec(MICRO, spec.tokens + (i,)) for i in range(len(vocab))]


def enumerate_space(space: SearchSpace, layer_count: int | None = None) -> Iterator[ArchSpec]:
    """Yield every spec of the space, in lexicographic token order.

    Micro spaces enumerate at full depth unless ``layer_count`` is given.
    """
    if isinstance(space, MacroSpace):
        cards = space.slot_cardinalities()
    else:
        depth = space.max_layers if layer_count is None else layer_count
        cards = space.slot_cardinalities()[:depth]
    if not cards:
        yield ArchSpec(space.kind, ())
        return
    tokens = [0] * len(cards)
    while True:
        yield ArchSpec(space.kind, tuple(tokens))
        pos = len(cards) - 1
        while pos >= 0:
            tokens[pos] += 1
            if tokens[pos] < cards[pos]:
                break
            tokens[pos] = 0
            pos -= 1
        if pos < 0:
            return
