"""Exception types shared across the package."""


class ParetoNasError(Exception):
    """Base class for every error raised by pareto_nas."""


class ConfigError(ParetoNasError):
    """A configuration value or combination of values is invalid."""


class SpecValidationError(ParetoNasError):
    """An architecture spec violates the invariants of its search space."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EncodingError(ParetoNasError):
    """A token string cannot be parsed back into an architecture spec."""


class CapacityError(ParetoNasError):
    """A spec at maximum depth cannot be extended further."""


class BenchmarkMissError(ParetoNasError):
    """An architecture is not present in the tabular benchmark."""

    def __init__(self, encoding: str):
        self.encoding = encoding
        super().__init__(f"architecture not in benchmark: {encoding}")


class SpaceTooLargeError(ParetoNasError):
    """A search space is too large for exhaustive enumeration."""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"space has {size} candidates, exceeding the enumeration limit of {limit}")


class MissingObjectiveError(ParetoNasError):
    """A point lacks one of the declared objectives."""

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"point is missing objective field {field!r}")


class ReferenceDominanceError(ParetoNasError):
    """A front point does not dominate the hypervolume reference point."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"point {point!r} does not dominate the reference point")
