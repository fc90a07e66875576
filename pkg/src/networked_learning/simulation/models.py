"""Generative models for networked examples and the samples they produce."""

import csv
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-9


class SimulationError(Exception):
    """Base exception for simulation operations."""
    pass


class ModelError(SimulationError):
    """Raised when a generative model specification is invalid."""
    pass


class DistributionKind(Enum):
    """Per-partition feature distributions."""
    UNIFORM = "uniform"
    DISCRETE = "discrete"


class NoiseKind(Enum):
    """Additive label noise."""
    NONE = "none"
    UNIFORM = "uniform"
    DISCRETE = "discrete"


class LabelKind(Enum):
    """Conditional label models."""
    LINEAR = "linear"
    TABLE = "table"


@dataclass(frozen=True)
class LinearMoments:
    """Mean, variance and support range of a scalar random variable."""
    mean: float
    variance: float
    low: float
    high: float


def _probabilities(values: Sequence[float], expected: int, what: str) -> np.ndarray:
    p = np.asarray(values, dtype=float)
    if p.shape != (expected,):
        raise ModelError(f"{what}: expected {expected} probabilities, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise ModelError(f"{what}: probabilities must be non-negative and sum to 1")
    return p


def _categorical(rng: np.random.Generator, p: np.ndarray, size) -> np.ndarray:
    """Draw category indices by inverse CDF (one uniform per draw)."""
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    u = rng.random(size)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)


@dataclass(frozen=True, eq=False)
class FeatureDistribution:
    """Feature distribution rho_i of one partition."""
    kind: DistributionKind
    dimension: int
    atoms: Optional[np.ndarray] = None
    probabilities: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ModelError("feature dimension must be positive")
        if self.kind is DistributionKind.DISCRETE:
            atoms = np.asarray(self.atoms, dtype=float).reshape(-1, self.dimension)
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(
                self, "probabilities", _probabilities(self.probabilities, len(atoms), "feature atoms")
            )

    @classmethod
    def uniform(cls, dimension: int) -> "FeatureDistribution":
        """Uniform distribution on [0, 1]^dimension."""
        return cls(DistributionKind.UNIFORM, dimension)

    @classmethod
    def discrete(cls, atoms: Sequence[Sequence[float]], probabilities: Sequence[float]) -> "FeatureDistribution":
        """Finite distribution over explicit atom vectors."""
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        return cls(DistributionKind.DISCRETE, atoms.shape[1], atoms, probabilities)

    @property
    def is_discrete(self) -> bool:
        return self.kind is DistributionKind.DISCRETE

    @property
    def atom_count(self) -> int:
        return len(self.atoms) if self.is_discrete else 0

    def sample(self, rng: np.random.Generator, size: Tuple[int, ...]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Draw features of shape size + (dimension,) and, if discrete, the atom indices."""
        if self.is_discrete:
            index = _categorical(rng, self.probabilities, size)
            return self.atoms[index], index
        return rng.random(tuple(size) + (self.dimension,)), None

    def linear_moments(self, coefficients: np.ndarray) -> LinearMoments:
        """Exact moments and range of <b, x> for x drawn from this distribution."""
        b = np.asarray(coefficients, dtype=float)
        if self.is_discrete:
            values = self.atoms @ b
            mean = float(self.probabilities @ values)
            variance = float(self.probabilities @ (values - mean) ** 2)
            support = values[self.probabilities > 0]
            return LinearMoments(mean, variance, float(support.min()), float(support.max()))
        return LinearMoments(
            float(b.sum() / 2.0),
            float((b ** 2).sum() / 12.0),
            float(np.minimum(b, 0.0).sum()),
            float(np.maximum(b, 0.0).sum()),
        )


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Bounded additive noise on linear labels."""
    kind: NoiseKind = NoiseKind.NONE
    half_width: float = 0.0
    atoms: Optional[np.ndarray] = None
    probabilities: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is NoiseKind.UNIFORM and self.half_width <= 0:
            raise ModelError("uniform noise needs a positive half_width")
        if self.kind is NoiseKind.DISCRETE:
            atoms = np.asarray(self.atoms, dtype=float).ravel()
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "probabilities", _probabilities(self.probabilities, len(atoms), "noise atoms"))

    @property
    def is_discrete(self) -> bool:
        return self.kind is not NoiseKind.UNIFORM

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """Atoms and probabilities of a discrete (or absent) noise."""
        if self.kind is NoiseKind.NONE:
            return np.zeros(1), np.ones(1)
        if self.kind is NoiseKind.DISCRETE:
            return self.atoms, self.probabilities
        raise ModelError("uniform noise has no finite support")

    def moments(self) -> LinearMoments:
        if self.kind is NoiseKind.UNIFORM:
            a = self.half_width
            return LinearMoments(0.0, a * a / 3.0, -a, a)
        values, p = self.support()
        mean = float(p @ values)
        support = values[p > 0]
        return LinearMoments(mean, float(p @ (values - mean) ** 2), float(support.min()), float(support.max()))

    def sample(self, rng: np.random.Generator, size: Tuple[int, ...]) -> np.ndarray:
        if self.kind is NoiseKind.NONE:
            return np.zeros(size)
        if self.kind is NoiseKind.UNIFORM:
            return rng.uniform(-self.half_width, self.half_width, size)
        return self.atoms[_categorical(rng, self.probabilities, size)]


@dataclass(frozen=True, eq=False)
class LabelModel:
    """Conditional label distribution rho_{y|x}.

    LINEAR: y = <coefficients, x> + noise. TABLE: y has an explicit finite
    distribution per combination of atom indices (one per partition), which
    requires every partition to be discrete.
    """
    kind: LabelKind
    coefficients: Optional[np.ndarray] = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    table: Optional[Dict[Tuple[int, ...], Tuple[np.ndarray, np.ndarray]]] = None

    def __post_init__(self):
        if self.kind is LabelKind.LINEAR:
            if self.coefficients is None:
                raise ModelError("linear label model needs coefficients")
            object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float).ravel())
        elif not self.table:
            raise ModelError("table label model needs a non-empty table")
        else:
            table = {}
            for key, (values, probs) in self.table.items():
                values = np.asarray(values, dtype=float).ravel()
                table[tuple(int(i) for i in key)] = (values, _probabilities(probs, len(values), f"labels {key}"))
            object.__setattr__(self, "table", table)

    @property
    def is_discrete(self) -> bool:
        return self.kind is LabelKind.TABLE or self.noise.is_discrete

    def conditional(self, x: np.ndarray, atom_key: Optional[Tuple[int, ...]]) -> Tuple[np.ndarray, np.ndarray]:
        """Finite label distribution given composed features (and atom indices for tables)."""
        if self.kind is LabelKind.TABLE:
            try:
                return self.table[atom_key]
            except KeyError:
                raise ModelError(f"label table has no entry for atoms {atom_key}")
        values, p = self.noise.support()
        return float(x @ self.coefficients) + values, p

    def sample(self, features: np.ndarray, atom_index: Optional[np.ndarray], rng: np.random.Generator) -> np.ndarray:
        """Draw one label per example; features (..., d), atom_index (..., k)."""
        shape = features.shape[:-1]
        if self.kind is LabelKind.LINEAR:
            return features @ self.coefficients + self.noise.sample(rng, shape)
        if atom_index is None:
            raise ModelError("table labels need discrete features")
        u = rng.random(shape)
        labels = np.empty(shape)
        for key, (values, p) in self.table.items():
            mask = np.all(atom_index == np.asarray(key), axis=-1)
            if np.any(mask):
                cdf = np.cumsum(p)
                cdf[-1] = 1.0
                picks = np.minimum(np.searchsorted(cdf, u[mask], side="right"), len(p) - 1)
                labels[mask] = values[picks]
        return labels


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    """Data distribution: one feature distribution per partition plus a label model."""
    partitions: Tuple[FeatureDistribution, ...]
    label: LabelModel
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        if not self.partitions:
            raise ModelError("model needs at least one partition")
        if self.label.kind is LabelKind.LINEAR and len(self.label.coefficients) != self.dimension:
            raise ModelError(
                f"label coefficients have length {len(self.label.coefficients)}, features have {self.dimension}"
            )
        if self.label.kind is LabelKind.TABLE:
            if not all(p.is_discrete for p in self.partitions):
                raise ModelError("table labels need every partition to be discrete")
            for key in self.label.table:
                if len(key) != self.k or any(not 0 <= a < p.atom_count for a, p in zip(key, self.partitions)):
                    raise ModelError(f"label table key {key} does not index the partition atoms")

    @property
    def k(self) -> int:
        return len(self.partitions)

    @property
    def dimension(self) -> int:
        return sum(p.dimension for p in self.partitions)

    def block_slices(self) -> List[slice]:
        """Column range of each partition's block in a composed feature vector."""
        slices, start = [], 0
        for p in self.partitions:
            slices.append(slice(start, start + p.dimension))
            start += p.dimension
        return slices

    @property
    def is_discrete(self) -> bool:
        return all(p.is_discrete for p in self.partitions) and self.label.is_discrete

    def label_bound(self) -> float:
        """sup |y| over the model's support."""
        if self.label.kind is LabelKind.TABLE:
            return max(float(np.abs(values).max()) for values, _ in self.label.table.values())
        low = high = 0.0
        for dist, block in zip(self.partitions, self.block_slices()):
            moments = dist.linear_moments(self.label.coefficients[block])
            low += moments.low
            high += moments.high
        noise = self.label.noise.moments()
        return max(abs(low + noise.low), abs(high + noise.high))

    def target_coefficients(self) -> np.ndarray:
        """Coefficients of the regression function f_rho (linear labels with zero-mean noise)."""
        if self.label.kind is not LabelKind.LINEAR:
            raise ModelError("regression function is linear only for linear label models")
        if abs(self.label.noise.moments().mean) > PROBABILITY_TOL:
            raise ModelError("noise must have zero mean for f_rho to be linear")
        return self.label.coefficients.copy()

    def sample_iid(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n independent examples, each with its own vertex features."""
        blocks, atoms = [], []
        for dist in self.partitions:
            values, index = dist.sample(rng, (n,))
            blocks.append(values)
            atoms.append(index)
        features = np.concatenate(blocks, axis=-1)
        atom_index = np.stack(atoms, axis=-1) if all(a is not None for a in atoms) else None
        return features, self.label.sample(features, atom_index, rng)

    @classmethod
    def from_config(cls, data: Dict[str, Any], seed: int = 0) -> "GenerativeModel":
        """Build a model from its experiment-config dictionary."""
        partitions = []
        for spec in data["partitions"]:
            if spec["kind"] == "uniform":
                partitions.append(FeatureDistribution.uniform(int(spec["dimension"])))
            else:
                partitions.append(FeatureDistribution.discrete(spec["atoms"], spec["probabilities"]))
        label_spec = data["label"]
        if label_spec["kind"] == "linear":
            noise_spec = label_spec.get("noise", {"kind": "none"})
            noise = NoiseModel(
                NoiseKind(noise_spec["kind"]),
                float(noise_spec.get("half_width", 0.0)),
                noise_spec.get("atoms"),
                noise_spec.get("probabilities"),
            )
            label = LabelModel(LabelKind.LINEAR, label_spec["coefficients"], noise)
        else:
            table = {tuple(row["atoms"]): (row["values"], row["probabilities"]) for row in label_spec["table"]}
            label = LabelModel(LabelKind.TABLE, table=table)
        return cls(tuple(partitions), label, seed)


@dataclass(frozen=True, eq=False)
class NetworkedSample:
    """A G-networked sample: composed edge features, labels and the vertex features behind them."""
    features: np.ndarray
    labels: np.ndarray
    vertex_features: Tuple[np.ndarray, ...] = ()
    seed: Optional[int] = None

    def __post_init__(self):
        features = np.array(self.features, dtype=float, ndmin=2)
        labels = np.array(self.labels, dtype=float).ravel()
        if features.shape[0] != labels.shape[0]:
            raise SimulationError(f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vertex_features", tuple(self.vertex_features))

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def to_csv(self) -> str:
        """Rows ``edge_index,x_1..x_d,y`` with full float precision."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["edge_index"] + [f"x_{j + 1}" for j in range(self.dimension)] + ["y"])
        for i in range(self.m):
            writer.writerow([i] + [repr(float(v)) for v in self.features[i]] + [repr(float(self.labels[i]))])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, m: Optional[int] = None) -> "NetworkedSample":
        """Parse ``edge_index,x_1..x_d,y`` rows (header optional, any row order).

        Raises:
            SimulationError: On malformed rows, inconsistent dimensions or
                edge indices that are not exactly 0..m-1
        """
        rows: Dict[int, List[float]] = {}
        width = None
        for number, row in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                index = int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError:
                if number == 1:
                    continue  # header
                raise SimulationError(f"line {number}: non-numeric sample row")
            if len(values) < 2:
                raise SimulationError(f"line {number}: need at least one feature and a label")
            if width is not None and len(values) != width:
                raise SimulationError(f"line {number}: expected {width - 1} features, got {len(values) - 1}")
            if index in rows:
                raise SimulationError(f"line {number}: duplicate edge index {index}")
            width = len(values)
            rows[index] = values
        expected = len(rows) if m is None else m
        if expected == 0:
            raise SimulationError("sample file has no rows")
        if sorted(rows) != list(range(expected)):
            raise SimulationError(f"sample rows must cover edge indices 0..{expected - 1} exactly once")
        data = np.array([rows[i] for i in range(expected)], dtype=float).reshape(expected, -1)
        return cls(data[:, :-1], data[:, -1])
