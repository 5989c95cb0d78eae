"""Partial-occlusion person localization and tracking from body joints."""

import json

from ._vjtrack import (
    AssociationResult,
    BoundingBox,
    CameraModel,
    ExpectedBox,
    GroundFrame,
    GroundPlane,
    JointKind,
    Match,
    PriorFit,
    PriorModel,
    TrackState,
    UkfParams,
    VjtError,
    construct_prior,
    distance,
    expected_box,
    ground_plane_from_tilt,
    localize_from_joint,
    match_gnn,
    observe,
    predict,
    project,
    ray_from_pixel,
    run_bench,
    update,
)
from . import _vjtrack

__all__ = [
    "AssociationResult",
    "BoundingBox",
    "CameraModel",
    "ExpectedBox",
    "GroundFrame",
    "GroundPlane",
    "JointKind",
    "Match",
    "PriorFit",
    "PriorModel",
    "Session",
    "TrackState",
    "UkfParams",
    "VjtError",
    "construct_prior",
    "distance",
    "evaluate",
    "expected_box",
    "ground_plane_from_tilt",
    "localize_from_joint",
    "match_gnn",
    "observe",
    "predict",
    "project",
    "ray_from_pixel",
    "run_bench",
    "simulate",
    "update",
]


class Session:
    """Tracking session over detection records given as dicts (same schema as the CLI streams)."""

    def __init__(self, camera: dict, config: dict | None = None):
        self._impl = _vjtrack.JsonSession(json.dumps(camera), json.dumps(config or {}))

    def process_frame(self, record: dict) -> dict:
        return json.loads(self._impl.process_frame(json.dumps(record)))


def simulate(scenario: dict) -> tuple[list[dict], list[dict]]:
    """Returns (detection records, truth records) for a scenario dict."""
    dets, truth = _vjtrack.simulate(json.dumps(scenario))
    return [json.loads(d) for d in dets], [json.loads(t) for t in truth]


def evaluate(estimates: list[dict], truth: list[dict], threshold_px: float = 50.0) -> dict:
    """Localization and tracking-accuracy report for a track log against a truth stream."""
    report = _vjtrack.evaluate([json.dumps(e) for e in estimates], [json.dumps(t) for t in truth], threshold_px)
    return json.loads(report)
