"""Analytical objective computation for candidate architectures.

Device-agnostic objectives (parameter and FLOP counts) are exact closed-form
sums over layers. Device-aware objectives (latency, energy, peak power,
memory) come from a small linear coefficient model per device; three presets
(WS, ES, M) are bundled as JSON files.

Conventions, also echoed in run metadata:

* FLOPs = 2 x multiply-accumulates.
* All convolutions run stride 1 with same padding; spatial dims only change
  by the configured reduction between stacked micro cells.
* Peak power is modeled as average inference power (energy / latency).
* Activations are 4 bytes per element before the profile's scaling factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .archspace import CONV, NORM, ArchSpec, MacroSpace, MicroSpace, OpDef, SearchSpace
from .errors import ConfigError

FLOPS_PER_MAC = 2
ACTIVATION_BYTES_PER_ELEMENT = 4

PRESET_NAMES = ("WS", "ES", "M")


@dataclass(frozen=True)
class DeviceProfile:
    """Coefficients turning static architecture counts into device estimates.

    ``energy_bounds`` fixes the normalization window for Energy* so rewards
    built on it stay stationary during a search.
    """

    name: str
    flops_per_second: float
    per_layer_overhead_s: float
    joules_per_gflop: float
    idle_power_w: float
    bytes_per_param: float
    activation_bytes_factor: float
    energy_bounds: tuple[float, float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "energy_bounds", tuple(float(b) for b in self.energy_bounds))
        checks = [
            ("flops_per_second", self.flops_per_second, True),
            ("per_layer_overhead_s", self.per_layer_overhead_s, False),
            ("joules_per_gflop", self.joules_per_gflop, True),
            ("idle_power_w", self.idle_power_w, False),
            ("bytes_per_param", self.bytes_per_param, True),
            ("activation_bytes_factor", self.activation_bytes_factor, True),
        ]
        for name, value, strictly_positive in checks:
            if not math.isfinite(value):
                raise ConfigError(f"profile {self.name!r}: {name} must be finite")
            if strictly_positive and value <= 0:
                raise ConfigError(f"profile {self.name!r}: {name} must be > 0")
            if not strictly_positive and value < 0:
                raise ConfigError(f"profile {self.name!r}: {name} must be >= 0")
        e_min, e_max = self.energy_bounds
        if not (math.isfinite(e_min) and math.isfinite(e_max)):
            raise ConfigError(f"profile {self.name!r}: energy_bounds must be finite")
        if not 0 < e_min < e_max:
            raise ConfigError(f"profile {self.name!r}: energy_bounds must satisfy 0 < E_min < E_max")


@dataclass(frozen=True)
class MetricVector:
    """Measured and estimated objectives of one candidate."""

    accuracy: float
    params: int
    flops: int
    latency_s: float
    energy_j: float
    peak_power_w: float
    memory_bytes: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ConfigError(f"accuracy must be in [0, 1], got {self.accuracy}")
        for name in ("params", "flops", "latency_s", "energy_j", "peak_power_w", "memory_bytes"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be finite and non-negative, got {value}")

    @property
    def error_rate(self) -> float:
        return 1.0 - self.accuracy

    def with_accuracy(self, accuracy: float) -> "MetricVector":
        return replace(self, accuracy=accuracy)

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "error_rate": self.error_rate,
            "params": self.params,
            "flops": self.flops,
            "latency_s": self.latency_s,
            "energy_j": self.energy_j,
            "peak_power_w": self.peak_power_w,
            "memory_bytes": self.memory_bytes,
        }


@dataclass(frozen=True)
class _Unit:
    """One primitive computation: a (possibly grouped) conv or a batch-norm."""

    kind: str  # "conv" | "bn" | "identity"
    kernel_size: int = 1
    groups: int = 1
    c_in: int = 0
    c_out: int = 0


def _conv_op_units(op: OpDef, channels: int) -> list[_Unit]:
    """Expand one conv-type op into primitive units at constant cell width."""
    if op.depthwise:
        hidden = channels * op.expansion
        units = []
        if op.expansion > 1:
            units.append(_Unit("conv", 1, 1, channels, hidden))
        # depthwise = grouped conv with groups == channels
        units.append(_Unit("conv", op.kernel_size, hidden, hidden, hidden))
        units.append(_Unit("conv", 1, 1, hidden, channels))
        return units
    return [_Unit("conv", op.kernel_size, op.groups, channels, channels)]


def _norm_op_units(op: OpDef, channels: int) -> list[_Unit]:
    if op.name == "identity":
        return [_Unit("identity", c_in=channels, c_out=channels)]
    return [_Unit("bn", c_in=channels, c_out=channels)]


def _layer_units(spec: ArchSpec, space: SearchSpace, in_channels: int) -> list[list[_Unit]]:
    """Primitive units per layer of ONE cell (micro) or the whole net (macro)."""
    layers: list[list[_Unit]] = []
    if isinstance(space, MacroSpace):
        channels = in_channels
        for layer in range(space.num_layers):
            k = space.kernel_sizes[spec.tokens[2 * layer]]
            c_out = space.filter_counts[spec.tokens[2 * layer + 1]]
            layers.append([_Unit("conv", k, 1, channels, c_out)])
            channels = c_out
        # skip-flag slots are cost-neutral connectivity metadata
        return layers
    for position, op in enumerate(space.ops_for(spec)):
        if op.kind == NORM:
            layers.append(_norm_op_units(op, in_channels))
        else:
            layers.append(_conv_op_units(op, in_channels))
        del position
    return layers


def _unit_params(unit: _Unit) -> int:
    if unit.kind == "identity":
        return 0
    if unit.kind == "bn":
        return 2 * unit.c_in
    if unit.c_in % unit.groups != 0:
        raise ConfigError(
            f"channel count {unit.c_in} not divisible by groups={unit.groups}"
        )
    if unit.c_out % unit.groups != 0:
        raise ConfigError(
            f"output channel count {unit.c_out} not divisible by groups={unit.groups}"
        )
    k = unit.kernel_size
    return (k * k * unit.c_in // unit.groups) * unit.c_out + unit.c_out


def _unit_macs(unit: _Unit, height: int, width: int) -> int:
    if unit.kind == "identity":
        return 0
    if unit.kind == "bn":
        # counted directly as FLOPs below; no MAC notion
        return 0
    k = unit.kernel_size
    return height * width * unit.c_out * (k * k * unit.c_in // unit.groups)


def _unit_flops(unit: _Unit, height: int, width: int) -> int:
    if unit.kind == "identity":
        return 0
    if unit.kind == "bn":
        return 2 * unit.c_in * height * width
    return FLOPS_PER_MAC * _unit_macs(unit, height, width)


def _check_shape(input_shape: tuple[int, int, int]) -> tuple[int, int, int]:
    if len(input_shape) != 3 or any(int(d) < 1 for d in input_shape):
        raise ConfigError(f"input_shape must be (channels, height, width) of positives, got {input_shape}")
    return tuple(int(d) for d in input_shape)


def _cell_shapes(space: SearchSpace, height: int, width: int) -> list[tuple[int, int]]:
    """Spatial dims seen by each stacked cell (macro: a single pass)."""
    if isinstance(space, MacroSpace):
        return [(height, width)]
    shapes = []
    h, w = height, width
    for _ in range(space.num_cells_stacked):
        shapes.append((h, w))
        r = space.reduction_between_cells
        h, w = max(1, h // r), max(1, w // r)
    return shapes


def count_params(spec: ArchSpec, space: SearchSpace, input_shape: tuple[int, int, int]) -> int:
    """Exact trainable-parameter count.

    Grouped conv: (k*k*C_in/g)*C_out + C_out bias. Batch-norm: 2*C.
    Depthwise-separable: depthwise (k*k*C_in + C_in) + pointwise
    (C_in*C_out + C_out). Stacked cells own separate weights.
    """
    c, _, _ = _check_shape(input_shape)
    layers = _layer_units(spec, space, c)
    per_cell = sum(_unit_params(u) for layer in layers for u in layer)
    stack = space.num_cells_stacked if isinstance(space, MicroSpace) else 1
    return per_cell * stack


def count_flops(spec: ArchSpec, space: SearchSpace, input_shape: tuple[int, int, int]) -> int:
    """Exact FLOP count under the 2xMAC convention, stride 1, same padding."""
    c, h, w = _check_shape(input_shape)
    layers = _layer_units(spec, space, c)
    total = 0
    for ch, cw in _cell_shapes(space, h, w):
        total += sum(_unit_flops(u, ch, cw) for layer in layers for u in layer)
    return total


def max_activation_bytes(
    spec: ArchSpec, space: SearchSpace, input_shape: tuple[int, int, int]
) -> int:
    """Largest single tensor (input or any unit output), 4 bytes per element."""
    c, h, w = _check_shape(input_shape)
    layers = _layer_units(spec, space, c)
    peak_elems = c * h * w
    for ch, cw in _cell_shapes(space, h, w):
        for layer in layers:
            for unit in layer:
                peak_elems = max(peak_elems, unit.c_out * ch * cw)
    return peak_elems * ACTIVATION_BYTES_PER_ELEMENT


def layer_count(spec: ArchSpec, space: SearchSpace) -> int:
    if isinstance(space, MacroSpace):
        return space.num_layers
    return spec.layer_count * space.num_cells_stacked


def estimate_device_metrics(
    spec: ArchSpec,
    space: SearchSpace,
    profile: DeviceProfile,
    input_shape: tuple[int, int, int],
) -> MetricVector:
    """Device-aware estimates for one candidate; accuracy is left at 0.

    latency = flops/throughput + layers*overhead;
    energy = GFLOPs*J/GFLOP + idle_power*latency;
    peak power = energy/latency (idle power for zero-latency specs);
    memory = params*bytes_per_param + activation_factor*max_activation_bytes.
    """
    flops = count_flops(spec, space, input_shape)
    params = count_params(spec, space, input_shape)
    n_layers = layer_count(spec, space)
    latency = flops / profile.flops_per_second + n_layers * profile.per_layer_overhead_s
    energy = (flops / 1e9) * profile.joules_per_gflop + profile.idle_power_w * latency
    peak_power = energy / latency if latency > 0 else profile.idle_power_w
    memory = params * profile.bytes_per_param + profile.activation_bytes_factor * max_activation_bytes(
        spec, space, input_shape
    )
    return MetricVector(
        accuracy=0.0,
        params=params,
        flops=flops,
        latency_s=latency,
        energy_j=energy,
        peak_power_w=peak_power,
        memory_bytes=int(memory),
    )


def normalize_energy(energy_j: float, profile: DeviceProfile) -> float:
    """Map energy into [0, 1] via the profile's fixed bounds, clipping outside."""
    e_min, e_max = profile.energy_bounds
    value = (energy_j - e_min) / (e_max - e_min)
    return min(1.0, max(0.0, value))


def profile_from_dict(data: dict) -> DeviceProfile:
    required = {
        "name",
        "flops_per_second",
        "per_layer_overhead_s",
        "joules_per_gflop",
        "idle_power_w",
        "bytes_per_param",
        "activation_bytes_factor",
        "energy_bounds",
    }
    missing = required - data.keys()
    if missing:
        raise ConfigError(f"device profile is missing fields: {sorted(missing)}")
    bounds = data["energy_bounds"]
    if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
        raise ConfigError("energy_bounds must be a [E_min, E_max] pair")
    return DeviceProfile(
        name=str(data["name"]),
        flops_per_second=float(data["flops_per_second"]),
        per_layer_overhead_s=float(data["per_layer_overhead_s"]),
        joules_per_gflop=float(data["joules_per_gflop"]),
        idle_power_w=float(data["idle_power_w"]),
        bytes_per_param=float(data["bytes_per_param"]),
        activation_bytes_factor=float(data["activation_bytes_factor"]),
        energy_bounds=(float(bounds[0]), float(bounds[1])),
        metadata=dict(data.get("metadata", {})),
    )


def load_profile(path: str | Path) -> DeviceProfile:
    """Load a device profile from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"device profile file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"device profile {path} is not valid JSON: {exc}") from exc
    return profile_from_dict(data)


def get_preset(name: str) -> DeviceProfile:
    """One of the bundled WS / ES / M presets."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown device preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("pareto_nas.profiles").joinpath(f"{name.lower()}.json").read_text()
    return profile_from_dict(json.loads(text))


def list_presets() -> list[DeviceProfile]:
    return [get_preset(name) for name in PRESET_NAMES]
