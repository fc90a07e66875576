"""Bounded statistics xi(z) with exactly known moments.

Two forms are supported:

* ``affine``: xi = offset + <coefficients, x> + label_coefficient * y
* ``squared_loss``: xi = offset + scale * (<coefficients, x> - y)^2

Moments come from closed forms for affine statistics on linear-label
models, and from exact enumeration of a single example whenever the model
is fully discrete.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from .models import GenerativeModel, LabelKind, SimulationError

logger = logging.getLogger(__name__)


class StatisticError(SimulationError):
    """Raised when a statistic is malformed or its moments are unknown."""
    pass


@dataclass(frozen=True)
class StatisticMoments:
    """Mean mu, variance sigma^2 and range bound M with |xi - mu| <= M almost surely."""
    mean: float
    variance: float
    bound: float


@dataclass(frozen=True, eq=False)
class StatisticSpec:
    """A statistic from the small affine / squared-loss family."""
    kind: str
    coefficients: np.ndarray
    offset: float = 0.0
    label_coefficient: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("affine", "squared_loss"):
            raise StatisticError(f"unknown statistic kind '{self.kind}'")
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float).ravel())

    @classmethod
    def from_config(cls, data: Dict[str, Any]) -> "StatisticSpec":
        return cls(
            kind=data["kind"],
            coefficients=data["coefficients"],
            offset=float(data.get("offset", 0.0)),
            label_coefficient=float(data.get("label_coefficient", 0.0)),
            scale=float(data.get("scale", 1.0)),
        )

    def evaluate(self, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
        """xi for features (..., d) and labels (...)."""
        if features.shape[-1] != len(self.coefficients):
            raise StatisticError(
                f"statistic has {len(self.coefficients)} coefficients, features have {features.shape[-1]}"
            )
        linear = features @ self.coefficients
        if self.kind == "affine":
            return self.offset + linear + self.label_coefficient * labels
        return self.offset + self.scale * (linear - labels) ** 2

    def moments(self, model: GenerativeModel) -> StatisticMoments:
        """Exact (mu, sigma^2, M) of xi under one example drawn from the model.

        Raises:
            StatisticError: If neither the closed form nor enumeration applies
        """
        if len(self.coefficients) != model.dimension:
            raise StatisticError(
                f"statistic has {len(self.coefficients)} coefficients, model has dimension {model.dimension}"
            )
        if self.kind == "affine" and model.label.kind is LabelKind.LINEAR:
            return self._affine_moments(model)
        if model.is_discrete:
            return self._enumerated_moments(model)
        raise StatisticError(f"moments of a {self.kind} statistic are unknown for a model with continuous parts")

    def _affine_moments(self, model: GenerativeModel) -> StatisticMoments:
        c = self.label_coefficient
        effective = self.coefficients + c * model.label.coefficients
        mean, variance, low, high = self.offset, 0.0, self.offset, self.offset
        for dist, block in zip(model.partitions, model.block_slices()):
            part = dist.linear_moments(effective[block])
            mean += part.mean
            variance += part.variance
            low += part.low
            high += part.high
        noise = model.label.noise.moments()
        mean += c * noise.mean
        variance += c * c * noise.variance
        low += min(c * noise.low, c * noise.high)
        high += max(c * noise.low, c * noise.high)
        return StatisticMoments(mean, variance, max(high - mean, mean - low))

    def _enumerated_moments(self, model: GenerativeModel) -> StatisticMoments:
        values, probabilities = single_example_distribution(self, model)
        mean = float(probabilities @ values)
        variance = float(probabilities @ (values - mean) ** 2)
        bound = float(np.abs(values[probabilities > 0] - mean).max())
        return StatisticMoments(mean, variance, bound)


def single_example_distribution(statistic: StatisticSpec, model: GenerativeModel):
    """Exact finite distribution of xi(z) for one example of a fully discrete model.

    Returns:
        Tuple (values, probabilities) over all atom combinations and labels
    """
    if not model.is_discrete:
        raise StatisticError("exact enumeration needs a fully discrete model")
    values, probabilities = [], []
    ranges = [range(p.atom_count) for p in model.partitions]
    for key in itertools.product(*ranges):
        weight = 1.0
        blocks = []
        for dist, a in zip(model.partitions, key):
            weight *= dist.probabilities[a]
            blocks.append(dist.atoms[a])
        if weight == 0.0:
            continue
        x = np.concatenate(blocks)
        labels, label_p = model.label.conditional(x, key)
        xi = statistic.evaluate(np.broadcast_to(x, (len(labels), len(x))), labels)
        values.extend(xi)
        probabilities.extend(weight * label_p)
    return np.asarray(values), np.asarray(probabilities)
