"""Exact counting formulas and the linear device model."""

import json

import numpy as np
import pytest

from pareto_nas.archspace import ArchSpec, MacroSpace, MicroSpace, OpDef, sample_uniform
from pareto_nas.costmodel import (
    DeviceProfile,
    MetricVector,
    count_flops,
    count_params,
    estimate_device_metrics,
    get_preset,
    list_presets,
    load_profile,
    max_activation_bytes,
    normalize_energy,
    profile_from_dict,
)
from pareto_nas.errors import ConfigError

BN = OpDef("batch_norm", "norm")
IDENTITY = OpDef("identity", "norm")
CONV3 = OpDef("conv3x3", "conv", kernel_size=3)
CONV1 = OpDef("conv1x1", "conv", kernel_size=1)
SEP3 = OpDef("sep3x3", "conv", kernel_size=3, depthwise=True)
SEP3_E2 = OpDef("sep3x3_e2", "conv", kernel_size=3, depthwise=True, expansion=2)
GCONV1_G2 = OpDef("gconv1x1_g2", "conv", kernel_size=1, groups=2)
GCONV3_G4 = OpDef("gconv3x3_g4", "conv", kernel_size=3, groups=4)
SHUF1_G8 = OpDef("shuffle1x1_g8", "conv", kernel_size=1, groups=8)


def macro_case(kernel_sizes, filter_tokens, input_shape):
    space = MacroSpace(
        num_layers=len(kernel_sizes), kernel_sizes=tuple(kernel_sizes), filter_counts=(8, 16, 32)
    )
    tokens = []
    for k, f in zip(range(len(kernel_sizes)), filter_tokens):
        tokens.extend([0, f])
    return space, ArchSpec("macro", tuple(tokens)), input_shape


def micro_case(norm, conv, tokens, input_shape, stacked=1, reduction=1):
    space = MicroSpace(
        norm_ops=norm,
        conv_ops=conv,
        max_layers=max(2, len(tokens) + len(tokens) % 2),
        num_cells_stacked=stacked,
        reduction_between_cells=reduction,
    )
    return space, ArchSpec("micro", tuple(tokens)), input_shape


class TestHandDerivedOracleTable:
    """Every row was counted by hand from the declared formulas."""

    def table(self):
        rows = []
        # 1. conv3x3 3->16 on 8x8: params 3*3*3*16+16=448, MACs 8*8*16*27=27648
        space = MacroSpace(num_layers=1, kernel_sizes=(3,), filter_counts=(16,))
        rows.append((space, ArchSpec("macro", (0, 0)), (3, 8, 8), 448, 55_296))
        # 2. identity norm op alone: zero everything
        rows.append(micro_case((IDENTITY,), (CONV1,), (0,), (8, 8, 8)) + (0, 0))
        # 3. batch-norm on C=16 8x8: params 2*16=32, flops 2*16*64=2048
        rows.append(micro_case((BN,), (CONV1,), (0,), (16, 8, 8)) + (32, 2048))
        # 4. conv1x1 8->8 on 8x8: params 72, MACs 64*8*8=4096
        rows.append(micro_case((BN,), (CONV1,), (0, 0), (8, 8, 8)) + (72 + 16, 8192 + 1024))
        # 5. grouped 1x1 g=2, 8->8: params (1*1*4)*8+8=40, MACs 64*8*4=2048
        rows.append(micro_case((IDENTITY,), (GCONV1_G2,), (0, 0), (8, 8, 8)) + (40, 4096))
        # 6. grouped 3x3 g=4, 16->16 on 4x4: params (9*4)*16+16=592, MACs 16*16*36=9216
        rows.append(micro_case((IDENTITY,), (GCONV3_G4,), (0, 0), (16, 4, 4)) + (592, 18_432))
        # 7. depthwise-separable 3x3, C=8 on 8x8: params 80+72=152, MACs 4608+4096=8704
        rows.append(micro_case((IDENTITY,), (SEP3,), (0, 0), (8, 8, 8)) + (152, 17_408))
        # 8. shuffled grouped 1x1 g=8, C=16 on 8x8: params (1*2)*16+16=48, MACs 64*16*2=2048
        rows.append(micro_case((IDENTITY,), (SHUF1_G8,), (0, 0), (16, 8, 8)) + (48, 4096))
        # 9. conv5x5 3->32 on 8x8: params 25*3*32+32=2432, MACs 64*32*75=153600
        space9 = MacroSpace(num_layers=1, kernel_sizes=(5,), filter_counts=(32,))
        rows.append((space9, ArchSpec("macro", (0, 0)), (3, 8, 8), 2432, 307_200))
        # 10. two macro layers 3->8->16, conv3x3 on 8x8:
        #     params 224+1168=1392, MACs 13824+73728=87552
        space10 = MacroSpace(num_layers=2, kernel_sizes=(3,), filter_counts=(8, 16))
        rows.append((space10, ArchSpec("macro", (0, 0, 0, 1)), (3, 8, 8), 1392, 175_104))
        # 11. cell [bn, conv3x3] C=8 8x8 stacked twice, no reduction:
        #     per cell params 16+584=600, flops 1024+73728=74752; x2 each
        rows.append(
            micro_case((BN,), (CONV3,), (0, 0), (8, 8, 8), stacked=2) + (1200, 149_504)
        )
        # 12. depthwise-separable with expansion 2, C=4 on 4x4:
        #     expand 4->8 (40 params, 512 MACs) + dw 3x3 on 8 (80, 1152) + project 8->4 (36, 512)
        rows.append(micro_case((IDENTITY,), (SEP3_E2,), (0, 0), (4, 4, 4)) + (156, 4352))
        # 13. same cell as row 11 but reduction 2 between cells:
        #     cell 2 runs on 4x4 -> flops 256+18432=18688; params unchanged per cell
        rows.append(
            micro_case((BN,), (CONV3,), (0, 0), (8, 8, 8), stacked=2, reduction=2)
            + (1200, 74_752 + 18_688)
        )
        return rows

    def test_params_and_flops_match_exactly(self):
        rows = self.table()
        assert len(rows) >= 10
        for space, spec, shape, want_params, want_flops in rows:
            assert count_params(spec, space, shape) == want_params
            assert count_flops(spec, space, shape) == want_flops


class TestDeviceModel:
    def test_latency_formula(self, test_profile):
        # 55296 flops at 1e6 flops/s, zero overhead
        space = MacroSpace(num_layers=1, kernel_sizes=(3,), filter_counts=(16,))
        spec = ArchSpec("macro", (0, 0))
        metrics = estimate_device_metrics(spec, space, test_profile, (3, 8, 8))
        assert metrics.latency_s == 55_296 / 1e6

    def test_zero_flop_spec(self, test_profile):
        space = MicroSpace(norm_ops=(IDENTITY,), conv_ops=(CONV1,), max_layers=2)
        metrics = estimate_device_metrics(ArchSpec("micro", (0,)), space, test_profile, (4, 4, 4))
        assert metrics.latency_s == 0.0
        assert metrics.energy_j == 0.0
        assert metrics.peak_power_w == test_profile.idle_power_w

    def test_doubling_flops_doubles_latency_and_energy(self, test_profile):
        space = MicroSpace(norm_ops=(IDENTITY,), conv_ops=(CONV3,), max_layers=4)
        one = estimate_device_metrics(ArchSpec("micro", (0, 0)), space, test_profile, (8, 8, 8))
        stacked = MicroSpace(
            norm_ops=(IDENTITY,), conv_ops=(CONV3,), max_layers=4, num_cells_stacked=2
        )
        two = estimate_device_metrics(ArchSpec("micro", (0, 0)), stacked, test_profile, (8, 8, 8))
        assert two.flops == 2 * one.flops
        assert two.latency_s == pytest.approx(2 * one.latency_s, rel=1e-12)
        assert two.energy_j == pytest.approx(2 * one.energy_j, rel=1e-12)

    def test_peak_power_is_energy_over_latency(self):
        profile = DeviceProfile(
            name="p",
            flops_per_second=1e6,
            per_layer_overhead_s=1e-3,
            joules_per_gflop=10.0,
            idle_power_w=2.0,
            bytes_per_param=4.0,
            activation_bytes_factor=1.0,
            energy_bounds=(0.1, 1.0),
        )
        space = MacroSpace(num_layers=1, kernel_sizes=(3,), filter_counts=(16,))
        metrics = estimate_device_metrics(ArchSpec("macro", (0, 0)), space, profile, (3, 8, 8))
        assert metrics.peak_power_w == pytest.approx(metrics.energy_j / metrics.latency_s, rel=1e-12)

    def test_memory_model(self, test_profile):
        space = MacroSpace(num_layers=1, kernel_sizes=(3,), filter_counts=(16,))
        spec = ArchSpec("macro", (0, 0))
        metrics = estimate_device_metrics(spec, space, test_profile, (3, 8, 8))
        # activations: max(input 3*8*8, output 16*8*8) * 4 bytes = 4096
        assert max_activation_bytes(spec, space, (3, 8, 8)) == 4096
        assert metrics.memory_bytes == int(448 * 4.0 + 2.0 * 4096)

    def test_grouped_conv_divisibility_error(self):
        space = MicroSpace(norm_ops=(IDENTITY,), conv_ops=(GCONV3_G4,), max_layers=2)
        with pytest.raises(ConfigError, match="divisible"):
            count_params(ArchSpec("micro", (0, 0)), space, (6, 4, 4))


class TestProperties:
    def test_monotone_under_extension(self, test_profile):
        from pareto_nas.archspace import enumerate_extensions

        space = MicroSpace(max_layers=6, num_cells_stacked=2)
        rng = np.random.default_rng(9)
        shape = (8, 8, 8)
        checked = 0
        while checked < 1000:
            depth = int(rng.integers(0, space.max_layers))
            spec = sample_uniform(space, rng, layer_count=depth)
            base = estimate_device_metrics(spec, space, test_profile, shape)
            for ext in enumerate_extensions(spec, space):
                is_identity = (
                    depth % 2 == 0 and space.norm_ops[ext.tokens[-1]].name == "identity"
                )
                grown = estimate_device_metrics(ext, space, test_profile, shape)
                assert grown.params >= base.params
                assert grown.flops >= base.flops
                assert grown.latency_s >= base.latency_s
                assert grown.memory_bytes >= base.memory_bytes
                if not is_identity:
                    assert grown.flops > base.flops or grown.params > base.params
                checked += 1

    def test_stacking_additivity(self, test_profile):
        rng = np.random.default_rng(2)
        base_space = MicroSpace(max_layers=4)
        for _ in range(200):
            spec = sample_uniform(base_space, rng)
            single = MicroSpace(max_layers=4, num_cells_stacked=1)
            triple = MicroSpace(max_layers=4, num_cells_stacked=3)
            shape = (8, 8, 8)
            assert count_params(spec, triple, shape) == 3 * count_params(spec, single, shape)
            assert count_flops(spec, triple, shape) == 3 * count_flops(spec, single, shape)

    def test_normalize_energy_bounds_and_monotonicity(self, test_profile):
        rng = np.random.default_rng(4)
        values = np.sort(rng.uniform(-1.0, 3.0, size=200))
        normalized = [normalize_energy(v, test_profile) for v in values]
        assert all(0.0 <= v <= 1.0 for v in normalized)
        assert all(b >= a for a, b in zip(normalized, normalized[1:]))

    def test_normalize_energy_examples(self):
        profile = profile_from_dict(
            {
                "name": "b",
                "flops_per_second": 1.0,
                "per_layer_overhead_s": 0.0,
                "joules_per_gflop": 1.0,
                "idle_power_w": 0.0,
                "bytes_per_param": 1.0,
                "activation_bytes_factor": 1.0,
                "energy_bounds": [1.0, 5.0],
            }
        )
        assert normalize_energy(1.0, profile) == 0.0
        assert normalize_energy(5.0, profile) == 1.0
        assert normalize_energy(2.0, profile) == 0.25
        assert normalize_energy(0.0, profile) == 0.0
        assert normalize_energy(9.0, profile) == 1.0


class TestMetricVector:
    def test_error_rate_complement(self):
        m = MetricVector(0.8, 1, 2, 0.1, 0.2, 2.0, 16)
        assert m.accuracy + m.error_rate == 1.0

    def test_rejects_invalid(self):
        with pytest.raises(ConfigError):
            MetricVector(1.5, 1, 2, 0.1, 0.2, 2.0, 16)
        with pytest.raises(ConfigError):
            MetricVector(0.5, 1, 2, -0.1, 0.2, 2.0, 16)


class TestProfiles:
    def test_presets_load_with_hardware_metadata(self):
        ws, es, m = get_preset("WS"), get_preset("ES"), get_preset("M")
        assert (ws.metadata["cores"], es.metadata["cores"], m.metadata["cores"]) == (4, 4, 8)
        assert (ws.metadata["ghz"], es.metadata["ghz"], m.metadata["ghz"]) == (3.5, 1.9, 2.0)
        assert (ws.metadata["memory_gb"], es.metadata["memory_gb"], m.metadata["memory_gb"]) == (
            64,
            4,
            3,
        )
        assert m.metadata["objectives"] == 5
        assert len(list_presets()) == 3

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            get_preset("XX")

    def test_json_roundtrip(self, tmp_path, test_profile):
        payload = {
            "name": test_profile.name,
            "flops_per_second": test_profile.flops_per_second,
            "per_layer_overhead_s": test_profile.per_layer_overhead_s,
            "joules_per_gflop": test_profile.joules_per_gflop,
            "idle_power_w": test_profile.idle_power_w,
            "bytes_per_param": test_profile.bytes_per_param,
            "activation_bytes_factor": test_profile.activation_bytes_factor,
            "energy_bounds": list(test_profile.energy_bounds),
        }
        path = tmp_path / "profile.json"
        path.write_text(json.dumps(payload))
        assert load_profile(path) == test_profile

    def test_invalid_profiles_rejected(self):
        base = {
            "name": "x",
            "flops_per_second": 1.0,
            "per_layer_overhead_s": 0.0,
            "joules_per_gflop": 1.0,
            "idle_power_w": 0.0,
            "bytes_per_param": 4.0,
            "activation_bytes_factor": 1.0,
            "energy_bounds": [0.1, 1.0],
        }
        for key, bad in (
            ("flops_per_second", 0.0),
            ("energy_bounds", [1.0, 0.5]),
            ("energy_bounds", [0.0, 1.0]),
            ("idle_power_w", -1.0),
        ):
            broken = dict(base)
            broken[key] = bad
            with pytest.raises(ConfigError):
                profile_from_dict(broken)
        with pytest.raises(ConfigError, match="missing"):
            profile_from_dict({"name": "x"})
