"""Scenario execution and report output."""
import asyncio
from pathlib import Path
from typing import Dict, List, Optional, Type

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from iupsim import __version__
from iupsim.analysis import METRICS_HEADER, SCAN_HEADER
from iupsim.config import RunConfig, manifest
from iupsim.experiments.base_scenario import BaseScenario, ScenarioReport
from iupsim.experiments.scenarios import SCENARIOS
from iupsim.utils.logger import get_logger
from iupsim.utils.report_writer import ReportWriter, write_yaml

MANIFEST_NAME = "manifest.yaml"


class ScenarioRunner:
    """Run a configured scenario and write its report."""

    def __init__(self, config: RunConfig, console: Optional[Console] = None):
        """Initialize the runner.

        Args:
            config: Resolved run configuration
            console: Console for the progress spinner
        """
        self.config = config
        self.console = console or Console(stderr=True)
        self.logger = get_logger("runner")
        self._scenarios: Dict[str, Type[BaseScenario]] = dict(SCENARIOS)

    def register_scenario(self, name: str, scenario_class: Type[BaseScenario]) -> None:
        """Register an additional scenario under ``name``.

        Raises:
            ValueError: If the class does not inherit from BaseScenario
        """
        if not (isinstance(scenario_class, type) and issubclass(scenario_class, BaseScenario)):
            raise ValueError(f"Scenario must inherit from BaseScenario: {scenario_class}")
        self._scenarios[name] = scenario_class

    def build_scenario(self) -> BaseScenario:
        config = self.config
        if config.scenario not in self._scenarios:
            raise ValueError(f"No scenario registered under: {config.scenario}")
        return self._scenarios[config.scenario](
            config.params, config.options, config.quadrature, config.stepper, config.threads
        )

    async def execute(self) -> List[Path]:
        """Run the scenario off the event loop and write every output file.

        Returns:
            List[Path]: Written files, manifest last
        """
        scenario = self.build_scenario()
        self.logger.info("running scenario %s (%s)", scenario.name or self.config.scenario, scenario.description)
        loop = asyncio.get_running_loop()
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        ) as progress:
            task = progress.add_task(f"Running {self.config.scenario}...", total=None)
            try:
                report = await loop.run_in_executor(None, scenario.run)
            except Exception as exc:
                progress.update(task, description=f"[red]Error: {exc}")
                raise
            progress.update(task, completed=True)
        return self.write_report(report)

    def write_report(self, report: ScenarioReport) -> List[Path]:
        """Write a report's tables, grids, scans, metrics, summary and the manifest in a fixed order."""
        writer = ReportWriter(self.config.output_dir, self.config.output_format)
        written = []
        for name, (header, rows) in report.tables.items():
            written.append(writer.write_table(name, header, rows))
        for name, grid in report.grids.items():
            written.append(writer.write_table(name, grid.header, grid.rows()))
        for name, scan in report.scans.items():
            written.append(writer.write_table(name, SCAN_HEADER, scan.rows()))
        if report.metrics:
            written.append(writer.write_table(
                "metrics", METRICS_HEADER, [m.as_row(label) for label, m in report.metrics.items()]
            ))
        summary = {"scenario": report.scenario, **report.summary}
        written.append(writer.write_mapping("summary", summary))
        written.append(write_yaml(Path(self.config.output_dir) / MANIFEST_NAME, manifest(self.config, __version__)))
        for path in written:
            self.logger.debug("wrote %s", path)
        self.logger.info("wrote %d file(s) to %s", len(written), self.config.output_dir)
        return written

    def run(self) -> List[Path]:
        """Synchronous wrapper for :meth:`execute`."""
        return asyncio.run(self.execute())
