"""Main CLI entry point for networked-learning."""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import click
from rich.console import Console
from rich.table import Table

from networked_learning import __version__
from networked_learning.core.generators import FAMILIES, generate_hypergraph
from networked_learning.core.hypergraph import (
    HypergraphError,
    InstanceTooLargeError,
    KPartiteHypergraph,
    build_dependency_graph,
    dependency_summary,
    parse_hypergraph,
)
from networked_learning.core.simplex import SimplexError
from networked_learning.core.weighting import (
    FEASIBILITY_TOL,
    WeightingError,
    WeightingMethod,
    greedy_matching_weights,
    s_value,
    verify_feasible,
    weighting_for,
)
from networked_learning.learning.erm import LearnerError, risk_report, weighted_erm
from networked_learning.simulation.config_schema import validate_config
from networked_learning.simulation.models import GenerativeModel, NetworkedSample, SimulationError
from networked_learning.theory.bounds import (
    BoundError,
    BoundInputs,
    bernstein_tail,
    chromatic_tail,
    sample_error_bound_eqw,
    sample_error_bound_iid,
    sample_error_bound_ind,
    sample_error_bound_weighted,
    weighted_bernstein_tail,
)
from networked_learning.theory.covering import CoveringError, CoveringModel
from networked_learning.utils.config import Config, set_config
from networked_learning.utils.formatting import format_number, render_csv
from networked_learning.workflows.experiment import ExperimentWorkflow

# Configure logging
logging.basicConfig(level=logging.WARNING)
logger = logging.getLogger(__name__)

console = Console(stderr=True, soft_wrap=True)

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TOO_LARGE = 3

DATA_ERRORS = (
    HypergraphError,
    SimplexError,
    WeightingError,
    BoundError,
    CoveringError,
    LearnerError,
    SimulationError,
    OSError,
    ValueError,
)

METHOD_CHOICE = click.Choice(["eqw", "ind", "ind-exact", "opt"])


class NetworkedLearningGroup(click.Group):
    """Click group that reports usage errors with exit code 1."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


def handle_errors(func: Callable) -> Callable:
    """Map domain errors to exit codes: 3 for over-cap instances, 2 for data errors."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KeyboardInterrupt:
            console.print("\n[yellow]Operation cancelled by user.[/yellow]")
            sys.exit(EXIT_USAGE)
        except InstanceTooLargeError as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_TOO_LARGE)
        except DATA_ERRORS as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_DATA)

    return wrapper


def load_hypergraph(path: str) -> KPartiteHypergraph:
    """Read and parse a hypergraph file (line format or JSON)."""
    return parse_hypergraph(Path(path).read_text(encoding="utf-8"))


def emit(text: str, output: Optional[str]) -> None:
    """Write machine output to a file, or to stdout."""
    if output:
        Path(output).write_text(text, encoding="utf-8")
        console.print(f"[green]Saved to {output}[/green]")
    else:
        click.echo(text, nl=False)


def parse_grid(text: str) -> List[float]:
    """Comma-separated numbers, sorted and de-duplicated."""
    try:
        values = sorted({float(part) for part in text.split(",") if part.strip()})
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise click.BadParameter("grid is empty")
    return values


def parse_order(text: Optional[str]) -> Optional[List[int]]:
    """Edge permutation from a file, or inline as comma-separated indices."""
    if text is None:
        return None
    source = Path(text)
    if source.is_file():
        text = source.read_text(encoding="utf-8")
    try:
        return [int(part) for part in text.replace(",", " ").split()]
    except ValueError:
        raise click.BadParameter(f"expected edge indices, got {text!r}")


def matching_size(graph: KPartiteHypergraph, alpha: Optional[float]) -> int:
    """alpha when it is known exactly, the greedy matching size otherwise."""
    if alpha is not None:
        return int(alpha)
    return int(greedy_matching_weights(graph).normalizer)


@click.group(cls=NetworkedLearningGroup)
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON settings file (caps, workers)")
def main(verbose: bool, config_path: Optional[str]) -> None:
    """networked-learning - weighting, bounds and simulation for networked examples."""
    if verbose:
        console.print(f"[bold green]networked-learning v{__version__}[/bold green]")
        logging.getLogger().setLevel(logging.INFO)
    set_config(Config(Path(config_path)) if config_path else None)


@main.command("validate")
@click.option("--input", "input_path", required=True, help="Hypergraph file (line format or JSON)")
@handle_errors
def validate_command(input_path: str) -> None:
    """Parse a hypergraph file and report its structure."""
    graph = load_hypergraph(input_path)
    click.echo(f"OK, k={graph.k}, m={graph.m}, max degree {graph.max_degree()}")

    if graph.m == 0:
        console.print("[yellow]Warning: hypergraph has no edges (m=0)[/yellow]")
    for first, duplicate in graph.duplicate_edges():
        console.print(f"[yellow]Warning: edge {duplicate} duplicates edge {first}[/yellow]")

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Partition", justify="right")
    table.add_column("Vertices", justify="right")
    table.add_column("Active", justify="right")
    table.add_column("Min degree", justify="right")
    table.add_column("Mean degree", justify="right")
    table.add_column("Max degree", justify="right")
    active = graph.active_counts()
    for p in range(graph.k):
        degrees = graph.degrees(p)
        mean = sum(degrees) / len(degrees) if degrees else 0.0
        table.add_row(
            str(p), str(graph.partition_sizes[p]), str(active[p]),
            str(min(degrees, default=0)), f"{mean:.3g}", str(max(degrees, default=0)),
        )
    console.print(table)


@main.command("generate")
@click.argument("family", type=click.Choice(list(FAMILIES)))
@click.option("--k", "k", type=int, default=2, show_default=True, help="Number of partitions")
@click.option("--m", "m", type=int, required=True, help="Number of hyperedges")
@click.option("--n", "n", type=int, help="Shared vertices per partition (random family; default m)")
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed (random family)")
@click.option("--density", type=float, default=1.0, show_default=True,
              help="Probability that a component comes from the shared pool (random family)")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write the hypergraph to a file")
@handle_errors
def generate_command(family: str, k: int, m: int, n: Optional[int], seed: int, density: float, fmt: str,
                     output: Optional[str]) -> None:
    """Generate a hypergraph from a named family."""
    graph = generate_hypergraph(family, k, m, n, seed, density)
    emit(graph.to_text() if fmt == "text" else graph.to_json(), output)


@main.command("weights")
@click.option("--input", "input_path", required=True, help="Hypergraph file (line format or JSON)")
@click.option("--method", type=METHOD_CHOICE, default="opt", show_default=True)
@click.option("--order", help="Greedy scan order: a permutation file or inline, e.g. 2,0,1")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write CSV to a file")
@handle_errors
def weights_command(input_path: str, method: str, order: Optional[str], output: Optional[str]) -> None:
    """Compute per-edge weights (CSV: edge_index,weight)."""
    graph = load_hypergraph(input_path)
    weighting = weighting_for(graph, method, parse_order(order))
    # EQW ignores the vertex constraints; the other methods must satisfy them
    if weighting.method is not WeightingMethod.EQW:
        report = verify_feasible(graph, weighting.weights)
        if not report:
            raise WeightingError(f"computed weighting is infeasible: {report.describe()}")
    rows = list(enumerate(weighting.weights))
    emit(render_csv(["edge_index", "weight"], rows, [f"normalizer={format_number(weighting.normalizer)}"]), output)


@main.command("svalue")
@click.option("--input", "input_path", required=True, help="Hypergraph file (line format or JSON)")
@handle_errors
def svalue_command(input_path: str) -> None:
    """Print the s-value (fractional matching number) of a hypergraph."""
    graph = load_hypergraph(input_path)
    click.echo(format_number(s_value(graph)))


@main.command("bounds")
@click.option("--input", "input_path", required=True, help="Hypergraph file (line format or JSON)")
@click.option("--epsilon", "epsilon_grid", required=True, help="Comma-separated deviation grid")
@click.option("--sigma2", type=float, required=True, help="Variance of the bounded statistic")
@click.option("--M", "M", type=float, required=True, help="Range bound M")
@click.option("--covering", default="one", show_default=True, help="Covering model: one | linear:d,R")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write CSV to a file")
@handle_errors
def bounds_command(input_path: str, epsilon_grid: str, sigma2: float, M: float, covering: str,
                   output: Optional[str]) -> None:
    """Evaluate tail and sample-error bounds (CSV: epsilon,method,bound,sample_error)."""
    graph = load_hypergraph(input_path)
    grid = parse_grid(epsilon_grid)
    model = CoveringModel.parse(covering)
    summary = dependency_summary(build_dependency_graph(graph))
    chi_star = summary["chi_star"]
    size = matching_size(graph, summary["alpha"])
    s = s_value(graph)

    rows = []
    for eps in grid:
        inputs = BoundInputs(graph.m, s, eps, sigma2, M, chi_star, model)
        ind_inputs = BoundInputs(graph.m, size, eps, sigma2, M, chi_star, model)
        rows.append((eps, "eqw",
                     chromatic_tail(inputs) if chi_star is not None else None,
                     sample_error_bound_eqw(inputs) if chi_star is not None else None))
        rows.append((eps, "ind", weighted_bernstein_tail(ind_inputs), sample_error_bound_ind(inputs, size)))
        rows.append((eps, "iid", bernstein_tail(inputs), sample_error_bound_iid(inputs)))
        rows.append((eps, "weighted", weighted_bernstein_tail(inputs), sample_error_bound_weighted(inputs)))
    comments = [f"m={graph.m}", f"s={format_number(s)}", f"matching={size}", f"chi_star={format_number(chi_star)}"]
    emit(render_csv(["epsilon", "method", "bound", "sample_error"], rows, comments), output)


@main.command("fit")
@click.option("--input", "input_path", required=True, help="Hypergraph file (line format or JSON)")
@click.option("--data", "data_path", required=True, help="Sample CSV: edge_index,x_1..x_d,y")
@click.option("--method", type=METHOD_CHOICE, default="opt", show_default=True)
@click.option("--R", "R", type=float, required=True, help="l1 norm bound of the hypothesis class")
@click.option("--model", "model_path", help="JSON generative model, enables the expected-risk estimate")
@click.option("--n-test", type=int, default=10_000, show_default=True, help="Test draws for the expected risk")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the test draw")
@handle_errors
def fit_command(input_path: str, data_path: str, method: str, R: float, model_path: Optional[str],
                n_test: int, seed: int) -> None:
    """Fit weighted least squares over the l1-ball and report risks as JSON."""
    graph = load_hypergraph(input_path)
    sample = NetworkedSample.from_csv(Path(data_path).read_text(encoding="utf-8"), graph.m)
    weighting = weighting_for(graph, method)
    model = None
    if model_path:
        spec = json.loads(Path(model_path).read_text(encoding="utf-8"))
        validate_config(spec, "model")
        model = GenerativeModel.from_config(spec)
    hypothesis = weighted_erm(sample, weighting, R)
    report = risk_report(hypothesis, sample, weighting, model, n_test, seed)
    result = {
        "method": method,
        "normalizer": weighting.normalizer,
        "hypothesis": hypothesis.to_dict(),
        "risk": report.to_dict(),
    }
    click.echo(json.dumps(result, indent=2, sort_keys=True))


def _chain_holds(m: int, alpha: Optional[int], chi_star: Optional[float], s: float) -> bool:
    tol = FEASIBILITY_TOL
    ok = s <= m + tol
    if alpha is not None:
        ok = ok and alpha <= s + tol
    if alpha is not None and chi_star is not None:
        ok = ok and m / chi_star <= alpha + tol
    return ok


@main.command("compare")
@click.option("--input", "input_paths", required=True, multiple=True, help="Hypergraph file; repeat for several instances")
@click.option("--epsilon", type=float, default=0.5, show_default=True, help="Reference deviation")
@click.option("--M", "M", type=float, default=1.0, show_default=True, help="Reference range bound")
@click.option("--covering", default="one", show_default=True, help="Covering model: one | linear:d,R")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write CSV to a file")
@handle_errors
def compare_command(input_paths: Sequence[str], epsilon: float, M: float, covering: str,
                    output: Optional[str]) -> None:
    """Compare m, alpha, chi*, greedy matching and s across instances."""
    model = CoveringModel.parse(covering)
    rows = []
    for path in sorted(input_paths):
        graph = load_hypergraph(path)
        summary = dependency_summary(build_dependency_graph(graph))
        alpha, chi_star = summary["alpha"], summary["chi_star"]
        greedy = int(greedy_matching_weights(graph).normalizer)
        s = s_value(graph)
        if not _chain_holds(graph.m, alpha, chi_star, s):
            raise WeightingError(f"{path}: m/chi* <= alpha <= s <= m does not hold")
        inputs = BoundInputs(graph.m, s, epsilon, 0.0, M, chi_star, model)
        rows.append((
            path, graph.m, alpha, chi_star, greedy, s,
            sample_error_bound_eqw(inputs) if chi_star is not None else None,
            sample_error_bound_ind(inputs, matching_size(graph, alpha)),
            sample_error_bound_weighted(inputs),
        ))
    header = ["instance", "m", "alpha", "chi_star", "greedy", "s_value", "bound_eqw", "bound_ind", "bound_weighted"]
    emit(render_csv(header, rows), output)


def _run_experiment(kind: str, config_path: str, output: Optional[str]) -> None:
    workflow = ExperimentWorkflow(console)
    report = workflow.run(kind, Path(config_path), Path(output) if output else None)
    if not output:
        click.echo(report, nl=False)


@main.command("simulate-concentration")
@click.option("--config", "config_path", required=True, help="Experiment configuration (JSON or YAML)")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="CSV report; metadata goes to <output>.meta.json")
@handle_errors
def simulate_concentration_command(config_path: str, output: Optional[str]) -> None:
    """Monte Carlo tail frequencies against concentration bounds."""
    _run_experiment("concentration", config_path, output)


@main.command("simulate-erm")
@click.option("--config", "config_path", required=True, help="Experiment configuration (JSON or YAML)")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="CSV report; metadata goes to <output>.meta.json")
@handle_errors
def simulate_erm_command(config_path: str, output: Optional[str]) -> None:
    """Sample errors of weighted ERM against sample-error bounds."""
    _run_experiment("erm", config_path, output)


if __name__ == "__main__":
    main()
