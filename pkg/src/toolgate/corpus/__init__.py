"""Reproducible threat corpus: scripted servers, scenarios, detection matrix."""

from .host import GatewayHost, NaiveHost, Trace
from .runner import (
    DetectionMatrix,
    MatrixRow,
    ScenarioOutcome,
    run_all,
    run_benign_baseline,
    run_scenario,
)
from .scenarios import Scenario, ScenarioSetupError, all_kinds, benign_baseline, build_scenario
from .servers import CorpusEnv, Recorder, ScriptedServer, ToolFailure, ToolSpec, make_manifest

__all__ = [
    "CorpusEnv",
    "DetectionMatrix",
    "GatewayHost",
    "MatrixRow",
    "NaiveHost",
    "Recorder",
    "Scenario",
    "ScenarioOutcome",
    "ScenarioSetupError",
    "ScriptedServer",
    "ToolFailure",
    "ToolSpec",
    "Trace",
    "all_kinds",
    "benign_baseline",
    "build_scenario",
    "make_manifest",
    "run_all",
    "run_benign_baseline",
    "run_scenario",
]
