"""Detect and repair GUI data-loss issues in declarative Android-style app models."""

__version__ = "0.1.0"

from .appfile import dump_app_model, load_app_model, parse_app_model
from .analysis import build_atg, default_sink_table, identify_persistent_widgets
from .detector import P_BACK, P_KILL, P_ROTATE, STRATEGIES, DetectionReport, detect
from .engine import CriticalError, Scenario, dispatch_event, launch_app, snapshot_gui
from .explorer import ExplorationConfig, guided_explore, replay, state_id
from .patcher import PatchPlan, PatchType, classify_variables, emit_patch_text, evaluate_patch, synthesize_patch
from .validate import validate

__all__ = [
    "CriticalError",
    "DetectionReport",
    "ExplorationConfig",
    "P_BACK",
    "P_KILL",
    "P_ROTATE",
    "PatchPlan",
    "PatchType",
    "STRATEGIES",
    "Scenario",
    "build_atg",
    "classify_variables",
    "default_sink_table",
    "detect",
    "dispatch_event",
    "dump_app_model",
    "emit_patch_text",
    "evaluate_patch",
    "guided_explore",
    "identify_persistent_widgets",
    "launch_app",
    "load_app_model",
    "parse_app_model",
    "replay",
    "snapshot_gui",
    "state_id",
    "synthesize_patch",
    "validate",
]
