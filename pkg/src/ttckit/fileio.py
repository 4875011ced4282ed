"""File formats: track CSV, scenario JSON, result documents, grid CSV.

Formats are part of the CLI contract and deliberately boring:

* Tracks: CSV with header ``track_id,frame,u,v``, one row per
  observation. Frames must be uniform-step per track.
* Scenarios and ground truth: JSON, schema-versioned (``"schema": 1``).
* Collision maps and sensitivity tables: CSV grids.

All writers emit LF newlines, sorted JSON keys, and repr-shortest float
formatting, so identical inputs produce byte-identical files. Parse
failures raise InvalidInput with the offending line or field named.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .camera import CameraIntrinsics
from .errors import InvalidInput
from .simulate import CollisionMap, GroundTruth, SceneObject, Scenario
from .stereo import SensitivityTable
from .ttc import TrackObservation

__all__ = [
    "read_json",
    "read_scenario",
    "read_tracks_csv",
    "truth_document",
    "write_collision_map_csv",
    "write_json",
    "write_scenario",
    "write_sensitivity_csv",
    "write_tracks_csv",
]

TRACKS_HEADER = "track_id,frame,u,v"
_MAP_HEADER = "dv_lateral,dv_forward,min_ttc_frames,miss_distance_m,collision"
_SENSITIVITY_HEADER = (
    "z_m,stereo_depth_error_m,stereo_heading_error_deg,"
    "plane_heading_error_deg,ttc_error_frames,degenerate_trials"
)


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form; inf and nan spelled out."""
    return repr(float(x))


def jsonify(value: Any) -> Any:
    """Recursively convert numpy containers/scalars to JSON-ready types."""
    if isinstance(value, np.ndarray):
        return [jsonify(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {k: jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonify(v) for v in value]
    return value


def write_json(path, document: dict) -> None:
    """Write a JSON document with sorted keys and a trailing newline.

    Rejects NaN/Infinity: documents must encode missing values as null.
    """
    text = json.dumps(jsonify(document), indent=2, sort_keys=True, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------- tracks

def write_tracks_csv(path, tracks: list[TrackObservation], ids: list[str] | None = None) -> None:
    """Write tracks as CSV rows; None entries (too-short tracks) are skipped.

    Args:
        path: output file.
        tracks: observations; index label is their position unless ids
            is given.
        ids: optional per-track labels aligned with tracks.
    """
    if ids is not None and len(ids) != len(tracks):
        raise InvalidInput(f"{len(ids)} ids for {len(tracks)} tracks")
    lines = [TRACKS_HEADER]
    for i, track in enumerate(tracks):
        if track is None:
            continue
        label = ids[i] if ids is not None else str(i)
        if "," in label or "\n" in label:
            raise InvalidInput(f"track id {label!r} must not contain commas or newlines")
        for frame, (u, v) in zip(track.frames, track.positions):
            lines.append(f"{label},{int(frame)},{_fmt(u)},{_fmt(v)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_tracks_csv(path) -> tuple[list[str], list[TrackObservation]]:
    """Parse a track CSV.

    Returns:
        (ids, tracks) in first-appearance order of track_id.

    Raises:
        InvalidInput: malformed header/rows, named by 1-based line
            number; non-uniform frame steps surface from
            TrackObservation validation with the track id named.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != TRACKS_HEADER:
        raise InvalidInput(f"{path}: line 1: expected header {TRACKS_HEADER!r}")
    order: list[str] = []
    rows: dict[str, list[tuple[int, float, float]]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 4:
            raise InvalidInput(f"{path}: line {lineno}: expected 4 fields, got {len(parts)}")
        tid = parts[0].strip()
        try:
            frame = int(parts[1])
            u = float(parts[2])
            v = float(parts[3])
        except ValueError as exc:
            raise InvalidInput(f"{path}: line {lineno}: {exc}") from exc
        if not (np.isfinite(u) and np.isfinite(v)):
            raise InvalidInput(f"{path}: line {lineno}: coordinates must be finite")
        if tid not in rows:
            rows[tid] = []
            order.append(tid)
        rows[tid].append((frame, u, v))
    tracks = []
    for tid in order:
        entries = rows[tid]
        frames = np.array([e[0] for e in entries], dtype=np.int64)
        if np.any(np.diff(frames) <= 0):
            raise InvalidInput(f"{path}: track {tid!r}: frames must be strictly increasing")
        positions = np.array([[e[1], e[2]] for e in entries])
        try:
            tracks.append(TrackObservation(frames=frames, positions=positions))
        except InvalidInput as exc:
            raise InvalidInput(f"{path}: track {tid!r}: {exc}") from exc
    return order, tracks


# -------------------------------------------------------------- scenario

def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise InvalidInput(f"scenario: missing {where}{key}")
    return mapping[key]


def read_scenario(path) -> Scenario:
    """Parse and validate a scenario JSON file.

    Raises:
        InvalidInput: unreadable JSON or failed validation; messages
            point at the offending field.
    """
    try:
        doc = read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInput("scenario: top level must be an object")
    schema = doc.get("schema")
    if schema != 1:
        raise InvalidInput(f"scenario: unsupported schema {schema!r}, expected 1")
    intr_doc = _require(doc, "intrinsics", "")
    try:
        intrinsics = CameraIntrinsics(
            focal_px=_require(intr_doc, "focal_px", "intrinsics."),
            principal_point=tuple(_require(intr_doc, "principal_point", "intrinsics.")),
            image_size=(
                tuple(intr_doc["image_size"]) if intr_doc.get("image_size") is not None else None
            ),
            allow_off_center=bool(intr_doc.get("allow_off_center", False)),
        )
    except InvalidInput:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"scenario: intrinsics: {exc}") from exc
    objects = []
    for i, obj_doc in enumerate(_require(doc, "objects", "")):
        where = f"objects[{i}]."
        try:
            objects.append(
                SceneObject(
                    object_id=str(_require(obj_doc, "id", where)),
                    points=np.asarray(_require(obj_doc, "points", where), dtype=np.float64),
                    velocity=np.asarray(_require(obj_doc, "velocity", where), dtype=np.float64),
                )
            )
        except InvalidInput:
            raise
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"scenario: objects[{i}]: {exc}") from exc
    try:
        return Scenario(
            intrinsics=intrinsics,
            objects=tuple(objects),
            camera_velocity=np.asarray(doc.get("camera_velocity", [0.0, 0.0, 0.0]), dtype=np.float64),
            frame_count=_require(doc, "frame_count", ""),
            pixel_noise_sigma=float(doc.get("pixel_noise_sigma", 0.0)),
            rng_seed=int(doc.get("rng_seed", 0)),
        )
    except InvalidInput:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"scenario: {exc}") from exc


def write_scenario(path, scenario: Scenario) -> None:
    doc = {
        "schema": 1,
        "intrinsics": {
            "focal_px": scenario.intrinsics.focal_px,
            "principal_point": list(scenario.intrinsics.principal_point),
            "image_size": (
                list(scenario.intrinsics.image_size)
                if scenario.intrinsics.image_size is not None
                else None
            ),
            "allow_off_center": scenario.intrinsics.allow_off_center,
        },
        "camera_velocity": scenario.camera_velocity,
        "frame_count": scenario.frame_count,
        "pixel_noise_sigma": scenario.pixel_noise_sigma,
        "rng_seed": scenario.rng_seed,
        "objects": [
            {"id": obj.object_id, "velocity": obj.velocity, "points": obj.points}
            for obj in scenario.objects
        ],
    }
    write_json(path, doc)


# ----------------------------------------------------- derived documents

def truth_document(truth: GroundTruth, ids: list[str]) -> dict:
    """Ground truth as a JSON-ready document (schema 1)."""
    if len(ids) != len(truth.points):
        raise InvalidInput(f"{len(ids)} ids for {len(truth.points)} truth points")
    points = []
    for tid, pt in zip(ids, truth.points):
        points.append(
            {
                "track_id": tid,
                "object_id": pt.object_id,
                "cluster_id": pt.cluster_id,
                "v_g": pt.v_g,
                "speed": pt.speed,
                "epipole": pt.epipole,
                "k0": pt.k0,
                "H": pt.H,
                "label": pt.label.value,
                "valid_frames": pt.valid_frames,
            }
        )
    return {"schema": 1, "frame_count": truth.frame_count, "points": points}


def write_collision_map_csv(path, cmap: CollisionMap) -> None:
    """Collision map as CSV, forward-major row order."""
    lines = [_MAP_HEADER]
    for fi, dv_f in enumerate(cmap.forward_offsets):
        for li, dv_l in enumerate(cmap.lateral_offsets):
            lines.append(
                ",".join(
                    [
                        _fmt(dv_l),
                        _fmt(dv_f),
                        _fmt(cmap.min_ttc[fi, li]),
                        _fmt(cmap.miss_distance[fi, li]),
                        "1" if cmap.collision[fi, li] else "0",
                    ]
                )
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sensitivity_csv(path, table: SensitivityTable) -> None:
    lines = [_SENSITIVITY_HEADER]
    for row in table.rows:
        lines.append(
            ",".join(
                [
                    _fmt(row.z_m),
                    _fmt(row.stereo_depth_error_m),
                    _fmt(row.stereo_heading_error_deg),
                    _fmt(row.plane_heading_error_deg),
                    _fmt(row.ttc_error_frames),
                    str(row.degenerate_trials),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
