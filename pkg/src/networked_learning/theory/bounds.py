"""Closed-form concentration and sample-error bounds.

Every evaluator works on the logarithm of the bound and exponentiates once
at the end, so large effective sample sizes underflow gracefully to 0.0
instead of producing overflow warnings in intermediate terms.

Tail bounds (probability that a centered average deviates by at least
epsilon):

* ``bernstein_tail``           i.i.d. examples, effective size m
* ``chromatic_tail``           equally weighted networked examples, m / chi*
* ``weighted_bernstein_tail``  optimally weighted examples, effective size s

Sample-error bounds (probability that E(f_Z) - E(f_H) exceeds epsilon) carry
a covering factor N(H, epsilon / (12 M)) in front of the exponential.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .covering import CoveringError, CoveringModel

logger = logging.getLogger(__name__)

S_TOL = 1e-9


class BoundError(Exception):
    """Raised when bound inputs violate their domain."""
    pass


class BoundUnavailableError(BoundError):
    """Raised when a bound needs a quantity that is not available (chi*, covering radius)."""
    pass


@dataclass(frozen=True)
class BoundInputs:
    """Shared inputs of the bound evaluators.

    Attributes:
        m: Sample size (number of hyperedges)
        s: s-value of the hypergraph (effective size under optimal weights)
        epsilon: Deviation level
        sigma2: Variance of the bounded statistic
        M: Range bound, |xi - mu| <= M almost surely
        chi_star: Fractional chromatic number of the dependency graph, if known
        covering: Covering-number model of the hypothesis class
    """
    m: int
    s: float
    epsilon: float
    sigma2: float
    M: float
    chi_star: Optional[float] = None
    covering: CoveringModel = field(default_factory=CoveringModel.unit)

    def __post_init__(self):
        if self.m < 1:
            raise BoundError(f"sample size m must be positive, got {self.m}")
        if not self.epsilon > 0:
            raise BoundError(f"epsilon must be positive, got {self.epsilon}")
        if not self.M > 0:
            raise BoundError(f"M must be positive, got {self.M}")
        if self.sigma2 < 0:
            raise BoundError(f"sigma2 must be non-negative, got {self.sigma2}")
        if self.sigma2 > self.M ** 2 * (1 + S_TOL):
            raise BoundError(f"sigma2={self.sigma2} exceeds M^2={self.M ** 2}")
        if not 0 < self.s <= self.m + S_TOL:
            raise BoundError(f"s must lie in (0, m={self.m}], got {self.s}")
        if self.chi_star is not None and self.chi_star < 1 - S_TOL:
            raise BoundError(f"chi_star must be at least 1, got {self.chi_star}")


def _bernstein_log(n: float, epsilon: float, sigma2: float, M: float) -> float:
    return -n * epsilon ** 2 / (2.0 * (sigma2 + M * epsilon / 3.0))


def _require_chi_star(inputs: BoundInputs) -> float:
    if inputs.chi_star is None:
        raise BoundUnavailableError("fractional chromatic number is not available for this instance")
    return inputs.chi_star


def _log_covering(inputs: BoundInputs) -> float:
    radius = inputs.epsilon / (12.0 * inputs.M)
    try:
        return inputs.covering.log_count(radius)
    except CoveringError as e:
        raise BoundUnavailableError(f"covering number unavailable at radius {radius:.6g}: {e}") from e


def bernstein_tail(inputs: BoundInputs) -> float:
    """exp(-m eps^2 / (2 (sigma^2 + M eps / 3))) for i.i.d. examples."""
    return math.exp(_bernstein_log(inputs.m, inputs.epsilon, inputs.sigma2, inputs.M))


def chromatic_tail(inputs: BoundInputs) -> float:
    """exp(-8 m eps^2 / (25 chi* (sigma^2 + M eps / 3))) for equally weighted networked examples.

    Raises:
        BoundUnavailableError: If chi* is not known
    """
    chi_star = _require_chi_star(inputs)
    exponent = -8.0 * inputs.m * inputs.epsilon ** 2 / (
        25.0 * chi_star * (inputs.sigma2 + inputs.M * inputs.epsilon / 3.0)
    )
    return math.exp(exponent)


def weighted_bernstein_tail(inputs: BoundInputs) -> float:
    """exp(-s eps^2 / (2 (sigma^2 + M eps / 3))); identical to bernstein_tail when s = m."""
    return math.exp(_bernstein_log(inputs.s, inputs.epsilon, inputs.sigma2, inputs.M))


def _check_sum_inputs(s: float, epsilon_sum: float, sigma2: float, M: float) -> None:
    if not s > 0:
        raise BoundError(f"s must be positive, got {s}")
    if epsilon_sum < 0:
        raise BoundError(f"epsilon must be non-negative, got {epsilon_sum}")
    if sigma2 < 0:
        raise BoundError(f"sigma2 must be non-negative, got {sigma2}")
    if not M > 0:
        raise BoundError(f"M must be positive, got {M}")


def weighted_bernstein_sum_tail(s: float, epsilon_sum: float, sigma2: float, M: float) -> float:
    """exp(-eps^2 / (2 (s sigma^2 + M eps / 3))) for the weighted SUM sum_i w_i xi_i.

    Args:
        s: Total weight of an optimal weighting
        epsilon_sum: Deviation of the weighted sum (not the average)
        sigma2: Variance of the statistic
        M: Range bound
    """
    _check_sum_inputs(s, epsilon_sum, sigma2, M)
    if epsilon_sum == 0:
        return 1.0
    return math.exp(-epsilon_sum ** 2 / (2.0 * (s * sigma2 + M * epsilon_sum / 3.0)))


def bennett_h(a: float) -> float:
    """h(a) = (1 + a) log(1 + a) - a."""
    return (1.0 + a) * math.log1p(a) - a


def weighted_bennett_tail(s: float, epsilon_sum: float, sigma2: float, M: float) -> float:
    """Bennett form exp(-(s sigma^2 / M^2) h(M eps / (s sigma^2))) for the weighted sum.

    With sigma^2 = 0 the statistic is almost surely constant: the bound is
    1 at eps = 0 and 0 for any eps > 0.

    Args:
        s: Total weight of an optimal weighting
        epsilon_sum: Deviation of the weighted sum
        sigma2: Variance of the statistic
        M: Range bound

    Returns:
        Probability bound in [0, 1]
    """
    _check_sum_inputs(s, epsilon_sum, sigma2, M)
    if epsilon_sum == 0:
        return 1.0
    if sigma2 == 0:
        return 0.0
    v = s * sigma2
    return math.exp(-(v / M ** 2) * bennett_h(M * epsilon_sum / v))


def bernstein_deviation(n_eff: float, delta: float, sigma2: float, M: float) -> float:
    """Smallest epsilon whose Bernstein-type tail with effective size n_eff equals delta.

    Solves n eps^2 = 2 L (sigma^2 + M eps / 3) for L = log(1 / delta).

    Args:
        n_eff: Effective sample size (m, matching size or s)
        delta: Confidence level in (0, 1]
        sigma2: Variance of the statistic
        M: Range bound

    Returns:
        Deviation epsilon >= 0
    """
    if not n_eff > 0:
        raise BoundError(f"effective size must be positive, got {n_eff}")
    if not 0 < delta <= 1:
        raise BoundError(f"delta must lie in (0, 1], got {delta}")
    if sigma2 < 0 or not M > 0:
        raise BoundError(f"need sigma2 >= 0 and M > 0, got sigma2={sigma2}, M={M}")
    log_inv = math.log(1.0 / delta)
    b = 2.0 * log_inv * M / 3.0
    return (b + math.sqrt(b * b + 8.0 * n_eff * log_inv * sigma2)) / (2.0 * n_eff)


def _sample_error(inputs: BoundInputs, rate: float) -> float:
    return math.exp(_log_covering(inputs) - rate * inputs.epsilon / (300.0 * inputs.M ** 4))


def sample_error_bound_iid(inputs: BoundInputs) -> float:
    """N(H, eps / (12 M)) exp(-m eps / (300 M^4))."""
    return _sample_error(inputs, inputs.m)


def sample_error_bound_eqw(inputs: BoundInputs) -> float:
    """N(H, eps / (12 M)) exp(-3 m eps / (1400 chi* M^4)).

    Raises:
        BoundUnavailableError: If chi* is unknown or the covering model fails
    """
    chi_star = _require_chi_star(inputs)
    log_bound = _log_covering(inputs) - 3.0 * inputs.m * inputs.epsilon / (1400.0 * chi_star * inputs.M ** 4)
    return math.exp(log_bound)


def sample_error_bound_ind(inputs: BoundInputs, matching_size: int) -> float:
    """The i.i.d. sample-error bound on an independent subset of `matching_size` examples."""
    if matching_size < 1:
        raise BoundError(f"matching size must be positive, got {matching_size}")
    return _sample_error(inputs, matching_size)


def sample_error_bound_weighted(inputs: BoundInputs) -> float:
    """N(H, eps / (12 M)) exp(-s eps / (300 M^4)); identical to the i.i.d. bound when s = m."""
    return _sample_error(inputs, inputs.s)


def defect_single_bound(s: float, epsilon: float, M: float) -> float:
    """exp(-s eps^2 / (2 M^4)): failure probability of the weighted defect for one M-bounded f."""
    if s < 0:
        raise BoundError(f"s must be non-negative, got {s}")
    if epsilon < 0:
        raise BoundError(f"epsilon must be non-negative, got {epsilon}")
    if not M > 0:
        raise BoundError(f"M must be positive, got {M}")
    return math.exp(-s * epsilon ** 2 / (2.0 * M ** 4))


@dataclass(frozen=True)
class BoundReport:
    """All bounds for one input tuple; None where a bound is unavailable."""
    bernstein: float
    weighted_bernstein: float
    sample_error_iid: float
    sample_error_weighted: float
    chromatic: Optional[float] = None
    ind_tail: Optional[float] = None
    sample_error_eqw: Optional[float] = None
    sample_error_ind: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bernstein": self.bernstein,
            "chromatic": self.chromatic,
            "weighted_bernstein": self.weighted_bernstein,
            "ind_tail": self.ind_tail,
            "sample_error_iid": self.sample_error_iid,
            "sample_error_eqw": self.sample_error_eqw,
            "sample_error_ind": self.sample_error_ind,
            "sample_error_weighted": self.sample_error_weighted,
        }


def evaluate_bounds(inputs: BoundInputs, matching_size: Optional[int] = None) -> BoundReport:
    """Evaluate every bound that the inputs support.

    Args:
        inputs: Bound inputs
        matching_size: Size of the independent subset used by IND, if any

    Returns:
        BoundReport with None for bounds needing chi* or a matching when absent
    """
    chromatic = eqw = ind_tail = ind = None
    if inputs.chi_star is not None:
        chromatic = chromatic_tail(inputs)
        eqw = sample_error_bound_eqw(inputs)
    else:
        logger.info("chi* unavailable; skipping chromatic and EQW bounds")
    if matching_size:
        ind_tail = math.exp(_bernstein_log(matching_size, inputs.epsilon, inputs.sigma2, inputs.M))
        ind = sample_error_bound_ind(inputs, matching_size)
    return BoundReport(
        bernstein=bernstein_tail(inputs),
        weighted_bernstein=weighted_bernstein_tail(inputs),
        sample_error_iid=sample_error_bound_iid(inputs),
        sample_error_weighted=sample_error_bound_weighted(inputs),
        chromatic=chromatic,
        ind_tail=ind_tail,
        sample_error_eqw=eqw,
        sample_error_ind=ind,
    )
