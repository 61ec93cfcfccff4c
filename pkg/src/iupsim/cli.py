"""Command-line interface for iupsim."""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from iupsim import __version__
from iupsim.closed_form import PhaseConvention
from iupsim.config import default_config, load_config
from iupsim.errors import IupsimError
from iupsim.experiments.scenarios import SCENARIOS
from iupsim.runner import ScenarioRunner
from iupsim.selftest import run_selftest
from iupsim.utils.logger import setup_logger

EXIT_USAGE = 2
EXIT_SELFTEST = 6

app = typer.Typer(
    name="iupsim",
    help="Simulate a retro-reflected undetected-photon interferometer with polarization quantum erasure.",
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)


def version_callback(value: bool):
    """Show version and exit.

    Args:
        value: Flag value
    """
    if value:
        console.print(f"iupsim version: {__version__}")
        raise typer.Exit()


def _selftest(convention: PhaseConvention, nodes: int) -> None:
    with err_console.status("[bold blue]Running self-test...") as status:
        report = run_selftest(convention, nodes, progress=lambda name: status.update(f"Checking {name}"))

    table = Table(title="Self-test")
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Detail")
    table.add_column("Time", justify="right", style="grey50")
    for check in report.checks:
        verdict = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(check.name, verdict, check.detail, f"{check.seconds:.2f}s")
    console.print(table)

    if not report.passed:
        console.print(f"[red]Error:[/red] {len(report.failures)} of {len(report.checks)} checks failed")
        raise typer.Exit(code=EXIT_SELFTEST)
    console.print(Panel(f"[green]All {len(report.checks)} checks passed[/green]", title="Summary", border_style="green"))


@app.command()
def main(
    scenario: Optional[str] = typer.Option(
        None,
        "--scenario", "-s",
        help=f"Scenario to run: {', '.join(SCENARIOS)}",
        show_default=False,
    ),
    config: Optional[Path] = typer.Option(
        None,
        "--config", "-c",
        help="YAML run configuration",
        show_default=False,
    ),
    out: Optional[Path] = typer.Option(
        None,
        "--out", "-o",
        help="Output directory [default: results/<scenario>]",
        show_default=False,
    ),
    threads: Optional[int] = typer.Option(
        None,
        "--threads", "-t",
        help="Worker threads for parameter sweeps",
        show_default=False,
    ),
    output_format: Optional[str] = typer.Option(
        None,
        "--format", "-f",
        help="Output format: csv or structured-text",
        show_default=False,
    ),
    selftest: bool = typer.Option(
        False,
        "--selftest",
        help="Run the self-test checks and exit",
    ),
    convention: PhaseConvention = typer.Option(
        PhaseConvention.SUPPLEMENT,
        "--phase-convention",
        help="Idler phase convention of the closed form checked by --selftest",
        case_sensitive=False,
    ),
    nodes: int = typer.Option(
        128,
        "--nodes",
        help="Gauss-Hermite nodes used by --selftest",
        min=2,
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose", "-v",
        help="Enable debug logging",
    ),
    log_file: Optional[Path] = typer.Option(
        None,
        "--log-file",
        help="Also write the log to this file",
        show_default=False,
    ),
    version: bool = typer.Option(
        None,
        "--version",
        callback=version_callback,
        help="Show version and exit",
        is_eager=True,
    ),
) -> None:
    """Run a simulation scenario, or the self-test.

    Every run writes its data files and a manifest.yaml into the output
    directory; passing that manifest back through --config reproduces the
    run bit for bit.
    """
    setup_logger(verbose, str(log_file) if log_file else None)
    try:
        if selftest:
            _selftest(convention, nodes)
            raise typer.Exit(code=0)

        if config is None and scenario is None:
            err_console.print("[red]Error:[/red] Pass --scenario, --config or --selftest")
            raise typer.Exit(code=EXIT_USAGE)

        if config is not None:
            run_config = load_config(config, scenario)
        else:
            run_config = default_config(scenario, Path("results") / scenario)
        run_config = run_config.with_overrides(output_dir=out, threads=threads, output_format=output_format)

        if verbose:
            config_table = Table(title="Configuration")
            config_table.add_column("Setting", style="cyan")
            config_table.add_column("Value", style="green")
            config_table.add_row("Scenario", run_config.scenario)
            config_table.add_row("Config File", str(config) if config else "Default")
            config_table.add_row("Output Directory", str(run_config.output_dir))
            config_table.add_row("Format", run_config.output_format.value)
            config_table.add_row("Threads", str(run_config.threads))
            config_table.add_row("Quadrature", f"{run_config.quadrature.scheme.value}, {run_config.quadrature.node_count} nodes")
            err_console.print(config_table)

        files = ScenarioRunner(run_config, err_console).run()

        summary = Panel(
            f"[green]Scenario {run_config.scenario} completed[/green]\n"
            f"Files written: {len(files)}\n"
            f"Output directory: [cyan]{run_config.output_dir}[/cyan]",
            title="Summary",
            border_style="green",
        )
        console.print(summary)
        if verbose:
            for path in files:
                console.print(f"  ├─ [cyan]{path.name}[/cyan]")

    except typer.Exit:
        raise
    except IupsimError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        if verbose:
            err_console.print_exception()
        raise typer.Exit(code=e.exit_code)
    except Exception as e:
        err_console.print(f"[red]Error:[/red] {e}")
        if verbose:
            err_console.print_exception()
        raise typer.Exit(code=1)


if __name__ == "__main__":
    app()
