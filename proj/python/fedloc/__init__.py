"""Python bindings for the fedloc federated localization core."""

import json
from pathlib import Path

from ._fedloc import (
    DecodeError,
    DegenerateTrajectory,
    FedlocError,
    FrameGraph,
    Pose,
    RankEntry,
    StitchObservation,
    TransformEstimate,
    align_points,
    ate,
    canonicalize_message,
    chordal_mean,
    compose,
    estimate_transform,
    pairwise_transform,
    rank_services,
    rot_z,
    rotation_angle,
    translate,
    translation_distance,
)
from . import _fedloc


def run(config):
    """Run a scenario from a config path or dict; returns (cycles_csv, summary)."""
    out = _fedloc.run_scenario(_config_text(config))
    return out["cycles_csv"], json.loads(out["summary_json"])


def experiment(kind, config, trials, max_obs=10):
    """Run 'stitch', 'selector' or 'recognizer'; returns (csv, summary, extra_csv)."""
    out = _fedloc.experiment(kind, _config_text(config), trials, max_obs)
    return out["csv"], json.loads(out["summary_json"]), dict(out["extra_csv"])


def _config_text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    return Path(config).read_text()
