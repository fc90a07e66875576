"""Covering-number models N(H, tau) for the hypothesis class."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

SNAP_TOL = 1e-12


class CoveringError(Exception):
    """Raised when a covering model is invalid or cannot be evaluated."""
    pass


class CoveringKind(Enum):
    EXPLICIT_TABLE = "explicit-table"
    LINEAR_CLASS = "linear-class"


@dataclass(frozen=True)
class CoveringModel:
    """How N(H, tau) is evaluated.

    An explicit table is a step function: sorted (radius, count) pairs, where
    the count of the largest radius <= tau applies. The linear class is the
    l1-ball of radius R of linear predictors over features in [0, 1]^d.
    """
    kind: CoveringKind
    table: Tuple[Tuple[float, int], ...] = ()
    dimension: int = 0
    coefficient_bound: float = 0.0

    def __post_init__(self):
        if self.kind is CoveringKind.EXPLICIT_TABLE:
            table = tuple(sorted((float(r), int(n)) for r, n in self.table))
            if not table:
                raise CoveringError("explicit covering table is empty")
            counts = [n for _, n in table]
            if min(counts) < 1:
                raise CoveringError("covering counts must be at least 1")
            if any(a < b for a, b in zip(counts, counts[1:])):
                raise CoveringError("covering counts must not increase with the radius")
            object.__setattr__(self, "table", table)
        else:
            if self.dimension < 1:
                raise CoveringError("linear covering model needs dimension >= 1")
            if self.coefficient_bound < 0:
                raise CoveringError("coefficient bound must be non-negative")

    @classmethod
    def unit(cls) -> "CoveringModel":
        """N identically 1 (a singleton class)."""
        return cls(CoveringKind.EXPLICIT_TABLE, ((0.0, 1),))

    @classmethod
    def explicit(cls, table: Sequence[Tuple[float, int]]) -> "CoveringModel":
        return cls(CoveringKind.EXPLICIT_TABLE, tuple(table))

    @classmethod
    def linear(cls, dimension: int, coefficient_bound: float) -> "CoveringModel":
        return cls(CoveringKind.LINEAR_CLASS, dimension=dimension, coefficient_bound=coefficient_bound)

    @classmethod
    def parse(cls, text: str) -> "CoveringModel":
        """Parse ``one`` or ``linear:d,R``."""
        if text == "one":
            return cls.unit()
        if text.startswith("linear:"):
            try:
                d, r = text[len("linear:"):].split(",")
                return cls.linear(int(d), float(r))
            except ValueError:
                pass
        raise CoveringError(f"covering must be 'one' or 'linear:d,R', got {text!r}")

    def log_count(self, tau: float) -> float:
        """log N(H, tau)."""
        if tau <= 0:
            raise CoveringError(f"covering radius must be positive, got {tau}")
        if self.kind is CoveringKind.LINEAR_CLASS:
            return self.dimension * math.log(_per_axis(self.coefficient_bound, tau))
        count: Optional[int] = None
        for radius, n in self.table:
            if radius <= tau:
                count = n
        if count is None:
            raise CoveringError(f"covering table does not reach radius {tau}")
        return math.log(count)

    def count(self, tau: float) -> int:
        """N(H, tau) as an integer."""
        if self.kind is CoveringKind.LINEAR_CLASS:
            return covering_number_linear(self, tau)
        return round(math.exp(self.log_count(tau)))


def _per_axis(bound: float, tau: float) -> int:
    ratio = bound / tau
    # floor(1 + R/tau), snapping ratios that are integers up to rounding
    return int(math.floor(1.0 + ratio + SNAP_TOL))


def covering_number_linear(model: CoveringModel, tau: float) -> int:
    """Sup-norm covering count of the linear l1-ball class: floor(1 + R/tau)^d.

    One axis of [-R, R] is covered by floor(1 + R/tau) intervals of radius
    tau; the class count is the product over d axes. The count is 1 while
    R < tau and never increases with tau.

    Args:
        model: Linear-class covering model
        tau: Radius (> 0)

    Returns:
        Covering count (>= 1)
    """
    if model.kind is not CoveringKind.LINEAR_CLASS:
        raise CoveringError("covering_number_linear needs a linear-class model")
    if tau <= 0:
        raise CoveringError(f"covering radius must be positive, got {tau}")
    return _per_axis(model.coefficient_bound, tau) ** model.dimension
