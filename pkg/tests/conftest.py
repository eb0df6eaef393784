"""Shared fixtures and independent brute-force oracles used across the suite."""

import numpy as np
import pytest

from pareto_nas.archspace import MacroSpace, MicroSpace
from pareto_nas.costmodel import DeviceProfile


@pytest.fixture
def tiny_macro():
    return MacroSpace(num_layers=1, kernel_sizes=(1, 3), filter_counts=(4, 8))


@pytest.fixture
def small_macro():
    return MacroSpace(num_layers=2, kernel_sizes=(1, 3), filter_counts=(4, 8))


@pytest.fixture
def small_micro():
    return MicroSpace(max_layers=4)


@pytest.fixture
def test_profile():
    return DeviceProfile(
        name="test",
        flops_per_second=1e6,
        per_layer_overhead_s=0.0,
        joules_per_gflop=10.0,
        idle_power_w=0.0,
        bytes_per_param=4.0,
        activation_bytes_factor=2.0,
        energy_bounds=(0.001, 1.0),
    )


# --- Independent oracles (deliberately naive; no shared code with the package) ---


def brute_non_dominated_mask(values: np.ndarray) -> np.ndarray:
    """O(n^2) pairwise dominance scan over a minimization matrix."""
    n = values.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        others = values[keep_candidates(i, n)]
        if others.size:
            dominated = np.any(
                np.all(others <= values[i], axis=1) & np.any(others < values[i], axis=1)
            )
            keep[i] = not dominated
    return keep


def keep_candidates(i: int, n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[i] = False
    return mask


def brute_ranks(values: np.ndarray, max_rank: int | None = None) -> np.ndarray:
    """Non-dominated sorting by repeated brute-force peeling; -1 beyond max_rank."""
    n = values.shape[0]
    ranks = np.full(n, -1, dtype=int)
    remaining = np.arange(n)
    rank = 0
    while remaining.size and (max_rank is None or rank <= max_rank):
        mask = brute_non_dominated_mask(values[remaining])
        ranks[remaining[mask]] = rank
        remaining = remaining[~mask]
        rank += 1
    return ranks


def mc_hypervolume(
    values: np.ndarray, ref: np.ndarray, n_samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo hypervolume estimate and its standard error (minimization)."""
    lo = values.min(axis=0)
    box = float(np.prod(ref - lo))
    samples = rng.uniform(lo, ref, size=(n_samples, values.shape[1]))
    dominated = np.zeros(n_samples, dtype=bool)
    for point in values:
        dominated |= np.all(samples >= point, axis=1)
    frac = dominated.mean()
    se = box * float(np.sqrt(max(frac * (1 - frac), 1e-12) / n_samples))
    return frac * box, se
