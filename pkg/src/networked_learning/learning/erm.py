"""Weighted empirical risk minimization over an l1-ball of linear predictors.

The loss is the squared loss and the weighted empirical risk of f is

    E_s(f) = (1 / normalizer) * sum_i w_i (f(x_i) - y_i)^2

Fitting takes the closed-form weighted least-squares solution whenever it
already lies in the ball, and otherwise runs projected gradient descent with
a fixed step 1/L, L being a power-iteration estimate of the largest
eigenvalue of the weighted Gram matrix.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..core.weighting import Weighting
from ..simulation.models import GenerativeModel, NetworkedSample
from ..simulation.rng import StreamFactory

logger = logging.getLogger(__name__)

NORM_TOL = 1e-9
STATIONARITY_TOL = 1e-8
MAX_ITERATIONS = 100_000
POWER_ITERATIONS = 50


class LearnerError(Exception):
    """Raised for invalid fitting or evaluation requests."""
    pass


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """Linear predictor x -> <beta, x> with ||beta||_1 <= norm_bound.

    Attributes:
        coefficients: beta
        norm_bound: R
        stationarity: Gradient-mapping norm of the weighted risk at beta
        iterations: Projected-gradient iterations used (0 for the closed form)
        path: "closed_form" or "projected_gradient"
    """
    coefficients: np.ndarray
    norm_bound: float
    stationarity: float = 0.0
    iterations: int = 0
    path: str = "closed_form"

    def __post_init__(self):
        beta = np.array(self.coefficients, dtype=float).ravel()
        if np.abs(beta).sum() > self.norm_bound + NORM_TOL:
            raise LearnerError(f"||beta||_1 = {np.abs(beta).sum():.12g} exceeds R = {self.norm_bound}")
        beta.flags.writeable = False
        object.__setattr__(self, "coefficients", beta)

    @property
    def dimension(self) -> int:
        return len(self.coefficients)

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.dimension:
            raise LearnerError(f"hypothesis has dimension {self.dimension}, features have {features.shape[-1]}")
        return features @ self.coefficients

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coefficients": [float(b) for b in self.coefficients],
            "norm_bound": self.norm_bound,
            "stationarity": self.stationarity,
            "iterations": self.iterations,
            "path": self.path,
        }


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo mean with its standard error."""
    estimate: float
    standard_error: float


@dataclass(frozen=True)
class RiskReport:
    """Weighted and unweighted empirical risk plus an optional expected-risk estimate."""
    empirical_weighted: float
    empirical_unweighted: float
    expected: Optional[RiskEstimate] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "empirical_weighted": self.empirical_weighted,
            "empirical_unweighted": self.empirical_unweighted,
            "expected_estimate": None if self.expected is None else self.expected.estimate,
            "expected_standard_error": None if self.expected is None else self.expected.standard_error,
        }


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {b : ||b||_1 <= radius} (sort-based, after Duchi et al.)."""
    if radius < 0:
        raise LearnerError(f"radius must be non-negative, got {radius}")
    if np.abs(v).sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    ranks = np.arange(1, len(u) + 1)
    rho = np.nonzero(u * ranks > css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def _check_inputs(sample: NetworkedSample, weighting: Weighting) -> np.ndarray:
    if weighting.m != sample.m:
        raise LearnerError(f"weighting has {weighting.m} entries, sample has {sample.m} examples")
    w = weighting.as_array()
    if not weighting.normalizer > 0 or not w.sum() > 0:
        raise LearnerError("total weight must be positive")
    if np.any(w < 0):
        raise LearnerError("weights must be non-negative")
    return w


class _WeightedLeastSquares:
    """Objective (1/N) sum_i w_i (<beta, x_i> - y_i)^2 and its gradient."""

    def __init__(self, features: np.ndarray, labels: np.ndarray, weights: np.ndarray, normalizer: float):
        self.X = features
        self.y = labels
        self.w = weights
        self.N = normalizer

    def value(self, beta: np.ndarray) -> float:
        r = self.X @ beta - self.y
        return float(self.w @ (r * r) / self.N)

    def gradient(self, beta: np.ndarray) -> np.ndarray:
        return 2.0 / self.N * (self.X.T @ (self.w * (self.X @ beta - self.y)))

    def lipschitz(self) -> float:
        """Power-iteration estimate of the largest eigenvalue of (2/N) X'WX."""
        gram = 2.0 / self.N * (self.X.T * self.w) @ self.X
        v = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
        estimate = 0.0
        for _ in range(POWER_ITERATIONS):
            u = gram @ v
            estimate = float(np.linalg.norm(u))
            if estimate == 0.0:
                return 0.0
            v = u / estimate
        return float(v @ gram @ v)

    def closed_form(self) -> np.ndarray:
        root = np.sqrt(self.w)
        beta, *_ = np.linalg.lstsq(self.X * root[:, None], self.y * root, rcond=None)
        return beta

    def stationarity(self, beta: np.ndarray, step_inverse: float, radius: float) -> float:
        """Norm of the gradient mapping L (beta - P(beta - grad / L))."""
        g = self.gradient(beta)
        if step_inverse <= 0:
            return float(np.linalg.norm(g))
        return float(step_inverse * np.linalg.norm(beta - project_l1_ball(beta - g / step_inverse, radius)))


def weighted_erm(sample: NetworkedSample, weighting: Weighting, R: float, method: str = "auto",
                 max_iter: int = MAX_ITERATIONS, tol: float = STATIONARITY_TOL) -> Hypothesis:
    """Minimize the weighted empirical risk over the l1-ball of radius R.

    Args:
        sample: Networked sample (features x_i, labels y_i)
        weighting: Per-edge weights and normalizer
        R: Norm bound of the hypothesis class
        method: "auto" (closed form when it lies in the ball, projected
            gradient otherwise), "closed_form" or "projected_gradient"
        max_iter: Projected-gradient iteration limit
        tol: Stationarity target

    Returns:
        Fitted Hypothesis

    Raises:
        LearnerError: On zero total weight, a length mismatch, or a
            closed-form request whose solution leaves the ball
    """
    if not R > 0:
        raise LearnerError(f"norm bound R must be positive, got {R}")
    if method not in ("auto", "closed_form", "projected_gradient"):
        raise LearnerError(f"unknown fitting method '{method}'")
    w = _check_inputs(sample, weighting)
    objective = _WeightedLeastSquares(sample.features, sample.labels, w, weighting.normalizer)
    L = objective.lipschitz()

    start = np.zeros(sample.dimension)
    if method != "projected_gradient":
        beta = objective.closed_form()
        if np.abs(beta).sum() <= R:
            stationarity = objective.stationarity(beta, L, R)
            if stationarity <= tol or method == "closed_form":
                logger.info(f"closed-form fit: ||beta||_1={np.abs(beta).sum():.6g}, stationarity={stationarity:.3g}")
                return Hypothesis(beta, R, stationarity, 0, "closed_form")
        elif method == "closed_form":
            raise LearnerError(
                f"closed-form solution has ||beta||_1 = {np.abs(beta).sum():.12g} > R = {R}"
            )
        start = project_l1_ball(beta, R)

    if L <= 0:
        # all weighted features vanish; every beta in the ball is optimal
        return Hypothesis(start, R, objective.stationarity(start, L, R), 0, "projected_gradient")

    beta = start
    stationarity = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        step = project_l1_ball(beta - objective.gradient(beta) / L, R)
        stationarity = L * float(np.linalg.norm(beta - step))
        if stationarity <= tol:
            break
        beta = step
    else:
        logger.warning(f"projected gradient stopped after {max_iter} iterations at stationarity {stationarity:.3g}")
    logger.info(f"projected-gradient fit: {iterations} iterations, stationarity={stationarity:.3g}")
    return Hypothesis(beta, R, stationarity, iterations, "projected_gradient")


def empirical_weighted_risk(f: Hypothesis, sample: NetworkedSample, weighting: Weighting) -> float:
    """(1/normalizer) sum_i w_i (f(x_i) - y_i)^2.

    Raises:
        LearnerError: On a zero normalizer or mismatched lengths
    """
    w = _check_inputs(sample, weighting)
    r = f.predict(sample.features) - sample.labels
    return float(w @ (r * r) / weighting.normalizer)


def empirical_risk(f: Hypothesis, sample: NetworkedSample) -> float:
    """Ordinary empirical risk (1/m) sum_i (f(x_i) - y_i)^2."""
    if sample.m == 0:
        raise LearnerError("empirical risk of an empty sample")
    r = f.predict(sample.features) - sample.labels
    return float(np.mean(r * r))


def _test_losses(hypotheses, model: GenerativeModel, n_test: int, seed: int):
    if n_test < 2:
        raise LearnerError(f"n_test must be at least 2, got {n_test}")
    features, labels = model.sample_iid(n_test, StreamFactory(seed).stream("test"))
    return [(h.predict(features) - labels) ** 2 for h in hypotheses]


def _mean_and_error(values: np.ndarray) -> RiskEstimate:
    return RiskEstimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values))))


def expected_risk_estimate(f: Hypothesis, model: GenerativeModel, n_test: int, seed: int) -> RiskEstimate:
    """Monte Carlo estimate of E(f) on n_test fresh i.i.d. examples (no shared vertices).

    Raises:
        LearnerError: If n_test < 2
    """
    (losses,) = _test_losses([f], model, n_test, seed)
    return _mean_and_error(losses)


def sample_error_estimate(f_hat: Hypothesis, f_reference: Hypothesis, model: GenerativeModel,
                          n_test: int, seed: int) -> RiskEstimate:
    """Estimate E(f_hat) - E(f_reference) on one shared test draw.

    Both risks are evaluated on the same examples, so the estimate is exactly
    zero when the two hypotheses coincide.
    """
    fitted, reference = _test_losses([f_hat, f_reference], model, n_test, seed)
    return _mean_and_error(fitted - reference)


def risk_report(f: Hypothesis, sample: NetworkedSample, weighting: Weighting,
                model: Optional[GenerativeModel] = None, n_test: int = 10_000, seed: int = 0) -> RiskReport:
    """Empirical risks of f, plus an expected-risk estimate when the data model is known."""
    expected = expected_risk_estimate(f, model, n_test, seed) if model is not None else None
    return RiskReport(
        empirical_weighted=empirical_weighted_risk(f, sample, weighting),
        empirical_unweighted=empirical_risk(f, sample),
        expected=expected,
    )
