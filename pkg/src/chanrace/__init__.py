"""Dynamic data-race detection for a small channel-based concurrent calculus.

The package bundles a parser for ``.mini`` programs, a small-step
interpreter with pluggable detectors (happens-before sets and vector
clocks), an exhaustive schedule explorer with a trace-level
happens-before oracle, and JSON reporting.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .detectors import DetectorKind, make_detector
from .explorer import build_hb_order, classify_races, explore_all, find_manifest, independent
from .report import emit_report, snapshot
from .runtime import Outcome, RunResult, enabled_steps, initial_config, run, step
from .syntax import ParseError, Program, parse, pretty

__all__ = [
    "__version__",
    "DetectorKind",
    "make_detector",
    "parse",
    "pretty",
    "ParseError",
    "Program",
    "initial_config",
    "enabled_steps",
    "step",
    "run",
    "RunResult",
    "Outcome",
    "explore_all",
    "build_hb_order",
    "classify_races",
    "independent",
    "find_manifest",
    "snapshot",
    "emit_report",
]
