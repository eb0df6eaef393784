"""Multi-objective machinery: dominance, fronts, rank selection, hypervolume.

Dominance uses the weak convention: a dominates b when a is at least as good
everywhere and strictly better somewhere, after normalizing every objective
to minimization. Duplicate points never dominate each other, so all copies
of a front point are retained.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MissingObjectiveError, ReferenceDominanceError

MINIMIZE = "min"
MAXIMIZE = "max"


@dataclass(frozen=True)
class ObjectiveSpec:
    """Ordered (name, direction) pairs naming fields of the points under study."""

    objectives: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(n), str(d)) for n, d in self.objectives)
        object.__setattr__(self, "objectives", pairs)
        if not pairs:
            raise ConfigError("objective list must be non-empty")
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise ConfigError(f"objective names must be unique: {names}")
        for name, direction in pairs:
            if direction not in (MINIMIZE, MAXIMIZE):
                raise ConfigError(f"objective {name!r}: direction must be 'min' or 'max'")

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "ObjectiveSpec":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.objectives)

    def __len__(self) -> int:
        return len(self.objectives)

    def raw_values(self, point) -> np.ndarray:
        """Objective values as stored on the point (attribute or mapping key)."""
        out = np.empty(len(self.objectives))
        for i, (name, _) in enumerate(self.objectives):
            if isinstance(point, Mapping):
                if name not in point:
                    raise MissingObjectiveError(name)
                out[i] = float(point[name])
            else:
                try:
                    out[i] = float(getattr(point, name))
                except AttributeError:
                    raise MissingObjectiveError(name) from None
        return out

    def min_values(self, point) -> np.ndarray:
        """Values flipped so that smaller is always better."""
        vals = self.raw_values(point)
        for i, (_, direction) in enumerate(self.objectives):
            if direction == MAXIMIZE:
                vals[i] = -vals[i]
        return vals

    def min_matrix(self, points: Sequence) -> np.ndarray:
        if len(points) == 0:
            return np.empty((0, len(self.objectives)))
        return np.stack([self.min_values(p) for p in points])


def dominates_values(a: np.ndarray, b: np.ndarray) -> bool:
    """Weak dominance of minimization vectors with strict improvement somewhere."""
    return bool(np.all(a <= b) and np.any(a < b))


def dominates(a, b, objectives: ObjectiveSpec) -> bool:
    """True iff a dominates b under the declared objectives."""
    return dominates_values(objectives.min_values(a), objectives.min_values(b))


def non_dominated_mask(values: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows of a minimization matrix.

    Scans points in lexicographic order; any dominator of a point sorts
    strictly earlier, so each point only needs checking against the current
    front. Duplicates survive (they never strictly improve on each other).
    """
    n = values.shape[0]
    mask = np.zeros(n, dtype=bool)
    if n == 0:
        return mask
    order = np.lexsort(values.T[::-1])  # primary key: column 0
    front_rows: list[np.ndarray] = []
    front_arr = np.empty((0, values.shape[1]))
    for idx in order:
        row = values[idx]
        if front_rows:
            if len(front_rows) != front_arr.shape[0]:
                front_arr = np.stack(front_rows)
            dominated = bool(
                np.any(np.all(front_arr <= row, axis=1) & np.any(front_arr < row, axis=1))
            )
        else:
            dominated = False
        if not dominated:
            front_rows.append(row)
            mask[idx] = True
    return mask


def extract_front(points: Sequence, objectives: ObjectiveSpec) -> list:
    """The non-dominated subset, in input order, duplicates retained."""
    values = objectives.min_matrix(points)
    mask = non_dominated_mask(values)
    return [p for p, keep in zip(points, mask) if keep]


def pareto_ranks(points: Sequence, objectives: ObjectiveSpec) -> list[int]:
    """0-based non-dominated-sorting rank of every point."""
    values = objectives.min_matrix(points)
    n = values.shape[0]
    ranks = np.full(n, -1, dtype=int)
    remaining = np.arange(n)
    rank = 0
    while remaining.size:
        mask = non_dominated_mask(values[remaining])
        ranks[remaining[mask]] = rank
        remaining = remaining[~mask]
        rank += 1
    return ranks.tolist()


def _crowding_order(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices sorted by decreasing normalized nearest-neighbor distance.

    Ties (including all-duplicate groups, distance 0) are broken by rng.
    """
    m = values.shape[0]
    if m == 1:
        return np.array([0])
    spans = values.max(axis=0) - values.min(axis=0)
    spans[spans == 0] = 1.0
    normed = (values - values.min(axis=0)) / spans
    diff = normed[:, None, :] - normed[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    nn = dist.min(axis=1)
    tiebreak = rng.permutation(m)
    return np.lexsort((tiebreak, -nn))


def select_k(candidates: Sequence, objectives: ObjectiveSpec, k: int, rng: np.random.Generator) -> list:
    """Pick exactly min(k, n) candidates by Pareto rank, crowding on the cut rank.

    Whole ranks are taken in order; the final partial rank is filled with its
    most isolated points (largest normalized nearest-neighbor distance),
    rng-tie-broken. The first front is always fully included when it fits.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    n = len(candidates)
    if n == 0:
        return []
    if k >= n:
        return list(candidates)
    values = objectives.min_matrix(candidates)
    ranks = np.asarray(pareto_ranks(candidates, objectives))
    selected: list[int] = []
    for rank in range(int(ranks.max()) + 1):
        members = np.flatnonzero(ranks == rank)
        if len(selected) + members.size <= k:
            selected.extend(members.tolist())
            if len(selected) == k:
                break
            continue
        need = k - len(selected)
        order = _crowding_order(values[members], rng)
        selected.extend(members[order[:need]].tolist())
        break
    selected.sort()  # keep input order for determinism of downstream iteration
    return [candidates[i] for i in selected]


def _hv2d(values: np.ndarray, ref: np.ndarray) -> float:
    """Sweep over the 2-D front, x ascending, accumulating disjoint slabs."""
    order = np.lexsort((values[:, 1], values[:, 0]))
    pts = values[order]
    total = 0.0
    best_y = np.inf
    xs = pts[:, 0]
    for i, (x, y) in enumerate(pts):
        if y >= best_y:
            continue  # dominated or duplicate in the sweep
        next_x = ref[0]
        for j in range(i + 1, len(pts)):
            if pts[j, 1] < y:
                next_x = xs[j]
                break
        total += (next_x - x) * (ref[1] - y)
        best_y = y
    return total


def _limit(values: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    return np.maximum(values, anchor)


def _hv_recursive(values: np.ndarray, ref: np.ndarray) -> float:
    """WFG-style exact hypervolume: sum of exclusive contributions."""
    if values.shape[0] == 0:
        return 0.0
    if values.shape[1] == 2:
        keep = non_dominated_mask(values)
        return _hv2d(values[keep], ref)
    order = np.lexsort(values.T[::-1])
    pts = values[order]
    total = 0.0
    for i in range(pts.shape[0]):
        box = float(np.prod(ref - pts[i]))
        rest = pts[i + 1 :]
        if rest.size:
            limited = _limit(rest, pts[i])
            limited = limited[non_dominated_mask(limited)]
            box -= _hv_recursive(limited, ref)
        total += box
    return total


def hypervolume(points: Sequence, reference_point, objectives: ObjectiveSpec) -> float:
    """Lebesgue measure of the region dominated by the front, up to the reference.

    The reference is given in raw objective units; every point must dominate
    it. Dimensions up to 5 are supported exactly.
    """
    if len(objectives) > 5:
        raise ConfigError("hypervolume supports at most 5 objectives")
    if len(points) == 0:
        return 0.0
    ref = objectives.min_values(reference_point)
    values = objectives.min_matrix(points)
    for point, vals in zip(points, values):
        if not dominates_values(vals, ref):
            raise ReferenceDominanceError(point)
    values = values[non_dominated_mask(values)]
    values = np.unique(values, axis=0)
    if values.shape[1] == 1:
        return float(ref[0] - values.min())
    if values.shape[1] == 2:
        return _hv2d(values, ref)
    return _hv_recursive(values, ref)


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated (spec, metrics) pairs under fixed objectives."""

    entries: tuple
    objectives: ObjectiveSpec

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def points(self) -> list:
        return [m for _, m in self.entries]

    def hypervolume(self, reference_point) -> float:
        return hypervolume(self.points(), reference_point, self.objectives)

    def to_json_entries(self) -> list[dict]:
        from .archspace import encode

        out = []
        for spec, metrics in self.entries:
            record = {"arch": encode(spec)}
            record.update(metrics.as_dict() if hasattr(metrics, "as_dict") else dict(metrics))
            out.append(record)
        return out


def front_from_evaluations(entries: Sequence, objectives: ObjectiveSpec) -> ParetoFront:
    """Build a ParetoFront from (spec, metrics) pairs, keeping non-dominated ones."""
    metrics = [m for _, m in entries]
    mask = non_dominated_mask(objectives.min_matrix(metrics))
    return ParetoFront(
        entries=tuple(e for e, keep in zip(entries, mask) if keep),
        objectives=objectives,
    )
