"""Synthetic oracle and tabular benchmark behavior."""

import json

import numpy as np
import pytest

from pareto_nas.archspace import ArchSpec, MacroSpace, MicroSpace, encode, enumerate_space, sample_uniform
from pareto_nas.costmodel import estimate_device_metrics
from pareto_nas.errors import BenchmarkMissError, ConfigError, SpaceTooLargeError
from pareto_nas.evaluator import (
    FidelityConfig,
    SyntheticOracle,
    TabularBenchmark,
    evaluate_all,
    true_front,
)
from pareto_nas.pareto import ObjectiveSpec


def zero_weight_oracle(space, **kwargs):
    weights = [np.zeros(c) for c in space.slot_cardinalities()]
    return SyntheticOracle(space, weights, **kwargs)


class TestSyntheticOracle:
    def test_zero_weights_give_half_sigmoid(self, tiny_macro):
        oracle = zero_weight_oracle(tiny_macro, max_accuracy=0.9)
        spec = ArchSpec("macro", (0, 0))
        assert oracle.evaluate(spec) == pytest.approx(0.45, abs=1e-12)

    def test_determinism_including_noise(self, small_macro):
        rng = np.random.default_rng(0)
        a = SyntheticOracle.from_seed(small_macro, seed=5, noise_std=0.05)
        b = SyntheticOracle.from_seed(small_macro, seed=5, noise_std=0.05)
        for _ in range(50):
            spec = sample_uniform(small_macro, rng)
            assert a.evaluate(spec) == b.evaluate(spec)

    def test_noise_depends_on_oracle_seed_not_call_order(self, small_macro):
        oracle = SyntheticOracle.from_seed(small_macro, seed=5, noise_std=0.05)
        rng = np.random.default_rng(1)
        specs = [sample_uniform(small_macro, rng) for _ in range(20)]
        forward = [oracle.evaluate(s) for s in specs]
        backward = [oracle.evaluate(s) for s in reversed(specs)]
        assert forward == backward[::-1]

    def test_linear_ramp(self, tiny_macro):
        fid = FidelityConfig(proxy_epochs=5, full_epochs=10)
        oracle = zero_weight_oracle(tiny_macro, max_accuracy=0.9, fidelity=fid)
        spec = ArchSpec("macro", (1, 1))
        assert oracle.evaluate(spec, 5) == pytest.approx(oracle.evaluate(spec, 10) / 2, rel=1e-12)

    def test_monotone_in_epochs(self, small_macro):
        fid = FidelityConfig(proxy_epochs=1, full_epochs=8)
        oracle = SyntheticOracle.from_seed(small_macro, seed=2, fidelity=fid)
        rng = np.random.default_rng(3)
        for _ in range(25):
            spec = sample_uniform(small_macro, rng)
            accs = [oracle.evaluate(spec, n) for n in range(1, 9)]
            assert all(b >= a for a, b in zip(accs, accs[1:]))

    def test_output_clipped_to_unit_interval(self, small_macro):
        oracle = SyntheticOracle.from_seed(small_macro, seed=9, noise_std=0.8, weight_scale=4.0)
        rng = np.random.default_rng(4)
        for _ in range(200):
            acc = oracle.evaluate(sample_uniform(small_macro, rng))
            assert 0.0 <= acc <= 1.0

    def test_quadratic_term_changes_scores(self, small_macro):
        plain = SyntheticOracle.from_seed(small_macro, seed=6)
        quad = SyntheticOracle.from_seed(small_macro, seed=6, quadratic_rank=2)
        rng = np.random.default_rng(5)
        specs = [sample_uniform(small_macro, rng) for _ in range(10)]
        assert any(plain.true_accuracy(s) != quad.true_accuracy(s) for s in specs)

    def test_weight_shape_validation(self, tiny_macro):
        with pytest.raises(ConfigError):
            SyntheticOracle(tiny_macro, [np.zeros(2)])
        with pytest.raises(ConfigError):
            SyntheticOracle(tiny_macro, [np.zeros(3), np.zeros(2)])

    def test_invalid_spec_rejected(self, small_micro):
        oracle = SyntheticOracle.from_seed(small_micro, seed=1)
        from pareto_nas.errors import SpecValidationError

        with pytest.raises(SpecValidationError):
            oracle.evaluate(ArchSpec("micro", (99,)))


class TestTabularBenchmark:
    def lines(self, space):
        rng = np.random.default_rng(0)
        rows = []
        for spec in enumerate_space(space):
            rows.append({"arch": encode(spec), "accuracy": float(rng.uniform(0.2, 0.9)), "extra": 1})
        return rows

    def test_lookup_verbatim(self, tiny_macro, tmp_path):
        rows = self.lines(tiny_macro)
        path = tmp_path / "bench.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        bench = TabularBenchmark.load_jsonl(path, space=tiny_macro)
        assert bench.coverage == 1.0
        for row in rows:
            spec = ArchSpec("macro", tuple(int(t) for t in row["arch"].split(":")[1].split(".")))
            assert bench.evaluate(spec) == row["accuracy"]
            assert bench.evaluate(spec, 3) == row["accuracy"]  # fidelity ignored

    def test_miss_carries_encoding(self, tiny_macro, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps({"arch": "macro:0.0", "accuracy": 0.5}) + "\n")
        bench = TabularBenchmark.load_jsonl(path)
        with pytest.raises(BenchmarkMissError) as err:
            bench.evaluate(ArchSpec("macro", (1, 1)))
        assert err.value.encoding == "macro:1.1"

    def test_duplicate_keys_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        line = json.dumps({"arch": "macro:0.0", "accuracy": 0.5})
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(ConfigError, match="duplicate"):
            TabularBenchmark.load_jsonl(path)

    def test_bad_accuracy_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps({"arch": "macro:0.0", "accuracy": 1.5}) + "\n")
        with pytest.raises(ConfigError):
            TabularBenchmark.load_jsonl(path)

    def test_invalid_encoding_against_space(self, tiny_macro, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps({"arch": "macro:9.9", "accuracy": 0.5}) + "\n")
        with pytest.raises(ConfigError, match="invalid encoding"):
            TabularBenchmark.load_jsonl(path, space=tiny_macro)


class TestTrueFront:
    def test_exhaustive_over_four_candidates(self, tiny_macro, test_profile):
        oracle = SyntheticOracle.from_seed(tiny_macro, seed=3)
        objectives = ObjectiveSpec.of(("error_rate", "min"), ("flops", "min"))
        entries = evaluate_all(tiny_macro, oracle, test_profile, (3, 8, 8))
        assert len(entries) == 4
        front = true_front(tiny_macro, oracle, test_profile, objectives, (3, 8, 8))
        # brute-force pairwise dominance over the four candidates
        points = [m for _, m in entries]

        def dominated(i):
            vi = (points[i].error_rate, points[i].flops)
            for j, other in enumerate(points):
                if j == i:
                    continue
                vj = (other.error_rate, other.flops)
                if all(a <= b for a, b in zip(vj, vi)) and any(a < b for a, b in zip(vj, vi)):
                    return True
            return False

        expected = {encode(s) for i, (s, _) in enumerate(entries) if not dominated(i)}
        assert {encode(s) for s, _ in front.entries} == expected

    def test_single_objective_is_argmax_set(self, small_macro, test_profile):
        oracle = SyntheticOracle.from_seed(small_macro, seed=8)
        objectives = ObjectiveSpec.of(("accuracy", "max"),)
        front = true_front(small_macro, oracle, test_profile, objectives, (3, 8, 8))
        entries = evaluate_all(small_macro, oracle, test_profile, (3, 8, 8))
        best = max(m.accuracy for _, m in entries)
        assert {encode(s) for s, _ in front.entries} == {
            encode(s) for s, m in entries if m.accuracy == best
        }

    def test_uses_full_fidelity_no_noise(self, tiny_macro, test_profile):
        fid = FidelityConfig(proxy_epochs=1, full_epochs=10)
        oracle = SyntheticOracle.from_seed(tiny_macro, seed=3, noise_std=0.2, fidelity=fid)
        for spec in enumerate_space(tiny_macro):
            truth = oracle.true_accuracy(spec)
            with_noise = oracle.evaluate(spec, 10)
            assert truth != with_noise or oracle.noise_std == 0

    def test_too_large_space_refused(self, test_profile):
        space = MacroSpace(num_layers=12, kernel_sizes=(1, 3, 5), filter_counts=(4, 8, 16))
        oracle = SyntheticOracle.from_seed(space, seed=1)
        objectives = ObjectiveSpec.of(("accuracy", "max"),)
        with pytest.raises(SpaceTooLargeError) as err:
            true_front(space, oracle, test_profile, objectives, (3, 8, 8))
        assert err.value.size == 9**12

    def test_fidelity_validation(self):
        with pytest.raises(ConfigError):
            FidelityConfig(proxy_epochs=5, full_epochs=3)
        with pytest.raises(ConfigError):
            FidelityConfig(proxy_epochs=0, full_epochs=3)
