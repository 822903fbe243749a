"""Python bindings for the base-station sleep-mode simulator."""

import json

from ._core import (
    ActionSpace,
    ActionSpaceTooLarge,
    ConfigError,
    ConstraintViolation,
    DiagnosticDisabled,
    DimensionError,
    EmptyCandidateError,
    Error,
    FormatError,
    GenerationError,
    GridPoint3D,
    InfeasibleError,
    MlpModel,
    NumericError,
    Scene,
    build_context,
    enumerate_candidates,
    generate_scene,
    gnb_power_w,
    init_weights,
    kmeans,
    model_from_json,
    moving_average,
    normalize_ee,
    path_loss_db,
    percentile_10,
    received_power_dbm,
)
from . import _core

__version__ = "0.1.0"


def default_config():
    """Default experiment configuration as a nested dict."""
    return json.loads(_core.default_config())


def load_config(path):
    """Read a config (or run manifest) file and return the validated dict."""
    return json.loads(_core.load_config(str(path)))


def run_experiment(config):
    """Run every configured policy; `config` is a dict in the config-file layout.

    Returns a dict with per-policy record lists under "runs" and the parsed
    summary under "summary".
    """
    result = _core.run_experiment(json.dumps(config))
    result["summary"] = json.loads(result["summary"])
    return result

