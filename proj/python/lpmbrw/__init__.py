"""Dict-friendly wrappers over the native core.

Every function accepts the same JSON-shaped config the CLI reads; see the
project README for the schema.
"""

import json as _json

from lpmbrw import _core
from lpmbrw._core import (
    BudgetError,
    ConfigError,
    DomainError,
    RegimeError,
    WindowError,
    tail_quantile,
    tail_survival,
)

__all__ = [
    "analyze",
    "simulate",
    "verify",
    "many2one",
    "config_hash",
    "canonical_config",
    "tail_survival",
    "tail_quantile",
    "ConfigError",
    "DomainError",
    "RegimeError",
    "WindowError",
    "BudgetError",
]


def _dump(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def config_hash(config) -> str:
    return _core.config_hash(_dump(config))


def canonical_config(config) -> dict:
    return _json.loads(_core.canonical_config(_dump(config)))


def analyze(config) -> dict:
    """Cumulant profile, critical tilt, speed, regime, and constants."""
    return _json.loads(_core.analyze_json(_dump(config)))


def simulate(config) -> dict:
    """Per-run tree summaries (martingale values, maxima, prune ledger)."""
    return _json.loads(_core.simulate_json(_dump(config)))


def verify(config) -> dict:
    """Run the configured verification suite and return its report payload."""
    return _json.loads(_core.verify_json(_dump(config)))


def many2one(config) -> dict:
    """Tilted-walk identity check over the configured seeds."""
    return _json.loads(_core.many2one_json(_dump(config)))
