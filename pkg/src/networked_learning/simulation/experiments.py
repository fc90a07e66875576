"""Monte Carlo experiments: tail frequencies against concentration bounds, and
sample errors of weighted ERM against sample-error bounds."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .. import __version__
from ..core.generators import generate_hypergraph
from ..core.hypergraph import (
    KPartiteHypergraph,
    build_dependency_graph,
    dependency_summary,
    parse_hypergraph,
)
from ..core.weighting import Weighting, WeightingMethod, greedy_matching_weights, s_value, weighting_for
from ..learning.erm import Hypothesis, LearnerError, sample_error_estimate, weighted_erm
from ..theory.bounds import (
    BoundInputs,
    BoundUnavailableError,
    bernstein_tail,
    chromatic_tail,
    sample_error_bound_eqw,
    sample_error_bound_ind,
    sample_error_bound_weighted,
    weighted_bernstein_tail,
)
from ..theory.covering import CoveringModel
from ..utils.config import get_config
from .config_schema import ConfigError
from .models import GenerativeModel, ModelError, SimulationError
from .rng import StreamFactory
from .sampler import draw_batch, sample_networked
from .statistics import StatisticError, StatisticMoments, StatisticSpec

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]

CONCENTRATION_HEADER = ("epsilon", "method", "bound_kind", "empirical_tail", "standard_error", "bound")
ERM_HEADER = ("method", "seed", "normalizer", "sample_error", "standard_error", "bound")


@dataclass
class ExperimentResult:
    """CSV-ready rows (already in output order) plus sidecar metadata."""
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]
    metadata: Dict[str, Any] = field(default_factory=dict)


def load_hypergraph_source(spec: Dict[str, Any], base_dir: Optional[Path] = None) -> KPartiteHypergraph:
    """Build the hypergraph named by a config: a file path or a generator family.

    Raises:
        ConfigError: If the file cannot be read
    """
    if "path" in spec:
        path = Path(spec["path"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            return parse_hypergraph(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read hypergraph {path}: {e}")
    return generate_hypergraph(spec["family"], spec["k"], spec["m"], spec.get("n"), spec.get("seed", 0),
                              spec.get("density", 1.0))


def structure_metadata(graph: KPartiteHypergraph) -> Dict[str, Any]:
    """m, s, alpha, chi* (None when over the exact caps) and the greedy matching size."""
    summary = dependency_summary(build_dependency_graph(graph))
    return {
        "k": graph.k,
        "m": graph.m,
        "s": s_value(graph),
        "alpha": summary["alpha"],
        "chi_star": summary["chi_star"],
        "greedy": int(greedy_matching_weights(graph).normalizer),
    }


def _count_block(graph: KPartiteHypergraph, model: GenerativeModel, statistic: StatisticSpec,
                 weight_matrix: np.ndarray, normalizers: np.ndarray, mean: float,
                 epsilons: np.ndarray, streams: StreamFactory, block: int, size: int) -> np.ndarray:
    """Exceedance counts of shape (methods, epsilons) for one trial block."""
    batch = draw_batch(graph, model, streams.stream("block", block), size)
    xi = statistic.evaluate(batch.features, batch.labels)            # (size, m)
    deviations = xi @ weight_matrix.T / normalizers - mean            # (size, methods)
    return (deviations[:, :, None] >= epsilons[None, None, :]).sum(axis=0)


def concentration_experiment(graph: KPartiteHypergraph, model: GenerativeModel, statistic: StatisticSpec,
                             weighting: Union[Weighting, Sequence[Weighting]], epsilon_grid: Sequence[float],
                             trials: int, seed: int, workers: Optional[int] = None,
                             progress_callback: Optional[ProgressCallback] = None) -> ExperimentResult:
    """Empirical tail frequencies of the weighted average next to the matching bounds.

    Every trial redraws the whole networked sample. Trials run in blocks,
    each block on its own stream ("block", index), and blocks are counted
    independently, so the result does not depend on the worker count.

    Rows per epsilon and weighting:
        OPT: weighted_bernstein (effective size s)
        IND: bernstein_matching (effective size = matching size)
        EQW: bernstein_iid (pretending independence) and chromatic (if chi* is known)

    Args:
        graph: Hypergraph
        model: Generative model
        statistic: Statistic with exactly known moments under the model
        weighting: One weighting or several (evaluated on the same draws)
        epsilon_grid: Positive deviation levels
        trials: Number of networked samples
        seed: Experiment seed
        workers: Thread count (config ``workers`` by default)
        progress_callback: Called with (completed_trials, trials)

    Returns:
        ExperimentResult sorted by (epsilon, method, bound_kind)

    Raises:
        StatisticError: If the statistic's moments are unknown or degenerate
        SimulationError: On invalid trial counts or grids
    """
    weightings = [weighting] if isinstance(weighting, Weighting) else list(weighting)
    if not weightings:
        raise SimulationError("at least one weighting is required")
    if trials < 1:
        raise SimulationError(f"trials must be positive, got {trials}")
    epsilons = np.asarray(sorted(set(float(e) for e in epsilon_grid)))
    if len(epsilons) == 0 or np.any(epsilons <= 0):
        raise SimulationError("epsilon grid must be non-empty and positive")
    for w in weightings:
        if w.m != graph.m:
            raise SimulationError(f"weighting has {w.m} entries, hypergraph has {graph.m} edges")

    moments = statistic.moments(model)
    if moments.bound <= 0:
        raise StatisticError("statistic is almost surely constant")

    config = get_config()
    workers = workers or config.get("workers")
    block = config.get("trial_block")
    streams = StreamFactory(seed)
    weight_matrix = np.stack([w.as_array() for w in weightings])
    normalizers = np.asarray([w.normalizer for w in weightings])

    counts = np.zeros((len(weightings), len(epsilons)), dtype=np.int64)
    sizes = [min(block, trials - start) for start in range(0, trials, block)]
    done = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(_count_block, graph, model, statistic, weight_matrix, normalizers,
                            moments.mean, epsilons, streams, index, size): size
            for index, size in enumerate(sizes)
        }
        for future in as_completed(futures):
            counts += future.result()
            done += futures[future]
            logger.info(f"concentration trials: {done}/{trials}")
            if progress_callback:
                progress_callback(done, trials)

    summary = structure_metadata(graph)
    rows = []
    for w, w_counts in zip(weightings, counts):
        for eps, count in zip(epsilons, w_counts):
            tail = count / trials
            error = math.sqrt(tail * (1.0 - tail) / trials)
            for kind, bound in _tail_bounds(w, graph, moments, float(eps), summary["chi_star"]):
                rows.append((float(eps), w.method.value, kind, float(tail), error, bound))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    metadata = dict(summary)
    metadata.update({
        "experiment": "concentration",
        "statistic_mean": moments.mean,
        "statistic_variance": moments.variance,
        "statistic_bound": moments.bound,
        "normalizers": {w.method.value: w.normalizer for w in weightings},
        "trials": trials,
        "seed": seed,
        "version": __version__,
    })
    return ExperimentResult(CONCENTRATION_HEADER, rows, metadata)


def _tail_bounds(weighting: Weighting, graph: KPartiteHypergraph, moments: StatisticMoments,
                 epsilon: float, chi_star: Optional[float]) -> List[Tuple[str, Optional[float]]]:
    sigma2 = min(moments.variance, moments.bound ** 2)
    if weighting.method is WeightingMethod.EQW:
        inputs = BoundInputs(graph.m, graph.m, epsilon, sigma2, moments.bound, chi_star)
        chromatic = chromatic_tail(inputs) if chi_star is not None else None
        return [("bernstein_iid", bernstein_tail(inputs)), ("chromatic", chromatic)]
    inputs = BoundInputs(graph.m, weighting.normalizer, epsilon, sigma2, moments.bound, chi_star)
    kind = "weighted_bernstein" if weighting.method is WeightingMethod.OPT else "bernstein_matching"
    return [(kind, weighted_bernstein_tail(inputs))]


def hypothesis_range_bound(model: GenerativeModel, R: float) -> float:
    """M with |f(x) - y| <= M for every f in the l1-ball of radius R."""
    feature_bound = 0.0
    for dist in model.partitions:
        feature_bound = max(feature_bound, float(np.abs(dist.atoms).max()) if dist.is_discrete else 1.0)
    return R * feature_bound + model.label_bound()


def _sample_error_bound(method: str, inputs: BoundInputs, weighting: Weighting) -> Optional[float]:
    try:
        if method == "eqw":
            return sample_error_bound_eqw(inputs)
        if method in ("ind", "ind-exact"):
            return sample_error_bound_ind(inputs, int(weighting.normalizer))
        return sample_error_bound_weighted(inputs)
    except BoundUnavailableError as e:
        logger.warning(f"{method} bound unavailable: {e}")
        return None


def erm_comparison_experiment(config: Dict[str, Any], base_dir: Optional[Path] = None,
                              progress_callback: Optional[ProgressCallback] = None) -> ExperimentResult:
    """Fit weighted ERM per seed and method; compare sample errors with their bounds.

    The reference hypothesis f_H is the model's regression function, which
    must lie in the class (||beta*||_1 <= R). The bound of each method is
    evaluated at the observed sample error when that is positive.

    Args:
        config: Validated "erm" configuration
        base_dir: Directory that relative hypergraph paths resolve against
        progress_callback: Called with (completed_fits, total_fits)

    Returns:
        ExperimentResult: per-seed rows sorted by (method, seed), then one
        summary row per method with seed "all" holding mean and standard
        error across seeds

    Raises:
        ConfigError: If the regression function is not linear or not in H
    """
    graph = load_hypergraph_source(config["hypergraph"], base_dir)
    model = GenerativeModel.from_config(config["model"])
    R = float(config["R"])
    n_test = int(config.get("n_test", 10_000))
    try:
        reference = Hypothesis(model.target_coefficients(), R)
    except (ModelError, LearnerError) as e:
        raise ConfigError(f"regression function must be a linear predictor in H: {e}")
    M = hypothesis_range_bound(model, R)
    covering = CoveringModel.parse(config["covering"]) if "covering" in config else CoveringModel.linear(model.dimension, R)
    summary = structure_metadata(graph)
    methods = sorted(config["methods"])
    seeds = sorted(config["seeds"])
    weightings = {method: weighting_for(graph, method) for method in methods}

    per_method: Dict[str, List[Tuple[Any, ...]]] = {method: [] for method in methods}
    total = len(methods) * len(seeds)
    done = 0
    for seed in seeds:
        sample = sample_networked(graph, model, seed)
        test_seed = StreamFactory(seed).child_seed("test")
        for method in methods:
            weighting = weightings[method]
            fitted = weighted_erm(sample, weighting, R)
            error = sample_error_estimate(fitted, reference, model, n_test, test_seed)
            bound = None
            if error.estimate > 0:
                inputs = BoundInputs(graph.m, summary["s"], error.estimate, 0.0, M, summary["chi_star"], covering)
                bound = _sample_error_bound(method, inputs, weighting)
            per_method[method].append((method, seed, weighting.normalizer, error.estimate, error.standard_error, bound))
            done += 1
            if progress_callback:
                progress_callback(done, total)

    rows: List[Tuple[Any, ...]] = []
    for method in methods:
        rows.extend(per_method[method])
    for method in methods:
        errors = np.asarray([row[3] for row in per_method[method]])
        spread = float(errors.std(ddof=1) / math.sqrt(len(errors))) if len(errors) > 1 else None
        rows.append((method, "all", weightings[method].normalizer, float(errors.mean()), spread, None))

    metadata = dict(summary)
    metadata.update({
        "experiment": "erm",
        "R": R,
        "M": M,
        "n_test": n_test,
        "seeds": seeds,
        "methods": methods,
        "version": __version__,
    })
    return ExperimentResult(ERM_HEADER, rows, metadata)


def concentration_from_config(config: Dict[str, Any], base_dir: Optional[Path] = None,
                              progress_callback: Optional[ProgressCallback] = None) -> ExperimentResult:
    """Run concentration_experiment from a validated "concentration" configuration."""
    graph = load_hypergraph_source(config["hypergraph"], base_dir)
    model = GenerativeModel.from_config(config["model"], config.get("seed", 0))
    statistic = StatisticSpec.from_config(config["statistic"])
    weightings = [weighting_for(graph, method) for method in sorted(config["methods"])]
    return concentration_experiment(
        graph, model, statistic, weightings, config["epsilon"], config["trials"],
        config.get("seed", 0), progress_callback=progress_callback,
    )
