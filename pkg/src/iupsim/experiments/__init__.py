"""Figure-level scenarios and the sweeps behind them."""
from iupsim.experiments.base_scenario import BaseScenario, OptionSpec, ScenarioReport
from iupsim.experiments.scenarios import SCENARIOS
from iupsim.experiments.sweeps import Metric, SweepGrid

__all__ = ["SCENARIOS", "BaseScenario", "Metric", "OptionSpec", "ScenarioReport", "SweepGrid"]
