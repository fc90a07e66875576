"""
ExperimentWorkflow orchestrates the simulate-* commands.

1. Load and validate the experiment configuration
2. Run the experiment with a Rich progress bar
3. Render the CSV report
4. Write the report and its JSON metadata sidecar
"""

import json
import logging
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from ..simulation.config_schema import load_experiment_config
from ..simulation.experiments import (
    ExperimentResult,
    concentration_from_config,
    erm_comparison_experiment,
)
from ..utils.formatting import render_csv

logger = logging.getLogger(__name__)

RUNNERS = {
    "concentration": concentration_from_config,
    "erm": erm_comparison_experiment,
}


def sidecar_path(output: Path) -> Path:
    """``<output>.meta.json`` next to the CSV report."""
    return output.with_name(output.name + ".meta.json")


class ExperimentWorkflow:
    """Runs one configured experiment and writes its outputs."""

    def __init__(self, console: Console):
        """Initialize the workflow.

        Args:
            console: Rich console for diagnostics (never used for the report itself)
        """
        self.console = console

    def run(self, kind: str, config_path: Path, output: Optional[Path] = None) -> str:
        """Run an experiment.

        Args:
            kind: "concentration" or "erm"
            config_path: JSON or YAML configuration file
            output: CSV destination; its sidecar is written next to it

        Returns:
            The CSV report text
        """
        config = load_experiment_config(config_path, kind)
        self.console.print(f"[bold blue]Running {kind} experiment[/bold blue] ({config_path})")

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            console=self.console,
            disable=not self.console.is_terminal,
        ) as progress:
            task = progress.add_task(kind, total=None)

            def advance(done: int, total: int) -> None:
                progress.update(task, completed=done, total=total)

            result = RUNNERS[kind](config.data, config.base_dir, progress_callback=advance)

        result.metadata["config_signature"] = config.signature
        report = render_csv(result.header, result.rows)
        if output is not None:
            self._write(result, report, Path(output))
        else:
            self.console.print("[dim]No --output given; metadata sidecar not written[/dim]")
        return report

    def _write(self, result: ExperimentResult, report: str, output: Path) -> None:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(report, encoding="utf-8")
        meta = sidecar_path(output)
        meta.write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"wrote {output} and {meta}")
        self.console.print(f"[green]✓[/green] Report: {output}")
        self.console.print(f"[green]✓[/green] Metadata: {meta}")
