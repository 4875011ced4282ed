"""Command-line interface.

Subcommands:

* ``simulate``: scenario JSON in, track CSV and ground-truth JSON out.
* ``estimate``: track CSV in, per-track collision estimates out (JSON),
  with the epipole found per --mode (planar horizon intersection,
  three-frame offset, or one shared least-squares epipole).
* ``cluster``: track CSV in, motion clusters out (JSON).
* ``collision-map``: scenario JSON in, velocity-perturbation grid out
  (CSV).
* ``sensitivity``: stereo-vs-monocular error comparison table out (CSV).

Exit codes: 0 success, 2 usage or input validation failure, 1 internal
error. Per-track geometric degeneracies never abort a batch; they are
reported inside the result document. Every command is deterministic
under a fixed --seed (default: the COLLISION_PLANE_SEED environment
variable, else 0); rerunning writes byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .camera import CameraIntrinsics
from .clustering import ClusteringConfig, cluster_flows
from .epipole import (
    Epipole,
    FlowVector,
    HorizonLine,
    calibrate_horizon,
    epipole_least_squares,
    epipole_offset_three_frames,
    planar_epipole,
)
from .errors import (
    DegenerateFlow,
    InsufficientData,
    InvalidInput,
    StationaryPoint,
    TtcError,
)
from .fileio import (
    jsonify,
    read_scenario,
    read_tracks_csv,
    truth_document,
    write_collision_map_csv,
    write_json,
    write_sensitivity_csv,
    write_tracks_csv,
)
from .simulate import GridSpec, collision_map, simulate
from .stereo import (
    StereoErrorModel,
    focal_px_from_metric,
    orientation_error_sweep,
    preset_approach_45deg,
)
from .ttc import MotionClass, classify_motion, collision_estimate

__all__ = ["main"]

SEED_ENV_VAR = "COLLISION_PLANE_SEED"
PRESET_NAMES = ("approach-45deg",)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidInput(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _parse_floats(text: str, n: int | tuple[int, ...], what: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    allowed = (n,) if isinstance(n, int) else n
    if len(parts) not in allowed:
        raise InvalidInput(f"{what}: expected {' or '.join(map(str, allowed))} values, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise InvalidInput(f"{what}: {exc}") from exc


def _parse_intrinsics(text: str) -> CameraIntrinsics:
    vals = _parse_floats(text, (3, 5), "--intrinsics")
    size = (int(vals[3]), int(vals[4])) if len(vals) == 5 else None
    return CameraIntrinsics(
        focal_px=vals[0],
        principal_point=(vals[1], vals[2]),
        image_size=size,
        allow_off_center=size is None,
    )


def _epipole_doc(epipole: Epipole, track_id: str | None) -> dict:
    return {
        "track_id": track_id,
        "position": epipole.position,
        "method": epipole.method.value,
        "residual": epipole.residual,
    }


def _horizon_doc(horizon: HorizonLine) -> dict:
    return {
        "reference": horizon.reference,
        "direction": horizon.direction,
        "fit_residual": horizon.fit_residual,
    }


def _result_skeleton(command: str, seed: int, config: dict) -> dict:
    return {
        "schema": 1,
        "command": command,
        "seed": seed,
        "config": config,
        "epipoles": [],
        "clusters": [],
        "estimates": [],
        "residuals": {},
    }


def _emit_json(document: dict, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(
            json.dumps(jsonify(document), indent=2, sort_keys=True, allow_nan=False) + "\n"
        )
    else:
        write_json(out_path, document)


# ------------------------------------------------------------- simulate

def _cmd_simulate(args) -> int:
    scenario = read_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, rng_seed=args.seed)
    if args.noise_sigma is not None:
        scenario = dataclasses.replace(scenario, pixel_noise_sigma=args.noise_sigma)
    tracks, truth = simulate(scenario)
    ids = [f"{pt.object_id}-{i}" for i, pt in enumerate(truth.points)]
    write_tracks_csv(args.out_tracks, tracks, ids)
    write_json(args.out_truth, truth_document(truth, ids))
    return 0


# ------------------------------------------------------------- estimate

def _stationary_entry(track_id: str, message: str) -> dict:
    return {
        "track_id": track_id,
        "status": "stationary",
        "message": message,
        "k": None,
        "H": 0.0,
        "classification": MotionClass.CONSTANT_BEARING.value,
    }


def _degenerate_entry(track_id: str, exc: TtcError) -> dict:
    return {
        "track_id": track_id,
        "status": f"degenerate:{type(exc).__name__}",
        "message": str(exc),
        "k": None,
        "H": None,
        "classification": None,
    }


def _estimate_entry(track_id: str, track, epipole: Epipole, intrinsics) -> dict:
    est = collision_estimate(track, epipole, intrinsics)
    classification = classify_motion(track, epipole)
    return {
        "track_id": track_id,
        "status": "ok",
        "k": est.k,
        "H": est.H,
        "classification": classification.value,
        "v_g_dir": est.v_g_dir,
        "point": est.point,
    }


def _span_flow(track) -> FlowVector:
    """Flow along the track's full span: less noise, same epipolar line."""
    return FlowVector(track.pixel(0), track.pixel(len(track) - 1))


def _calibrate(tracks, ids, intrinsics, seed: int):
    """Cluster the moving tracks, fit the horizon through cluster epipoles."""
    flow_index: list[int] = []
    kept = []
    for i, track in enumerate(tracks):
        try:
            _span_flow(track)
        except DegenerateFlow:
            continue
        kept.append(track)
        flow_index.append(i)
    clusters, _ = cluster_flows(
        None, kept, config=ClusteringConfig(rng_seed=seed), intrinsics=intrinsics
    )
    if len(clusters) < 2:
        raise InsufficientData(
            f"horizon calibration needs >= 2 motion clusters, found {len(clusters)}"
        )
    horizon = calibrate_horizon([c.epipole for c in clusters])
    cluster_docs = [
        {
            "member_ids": [ids[flow_index[m]] for m in c.member_indices],
            "epipole": _epipole_doc(c.epipole, None),
            "mean_ttc": c.mean_ttc,
        }
        for c in clusters
    ]
    return horizon, cluster_docs


def _cmd_estimate(args) -> int:
    intrinsics = _parse_intrinsics(args.intrinsics)
    ids, tracks = read_tracks_csv(args.tracks)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.mode in ("planar", "three-frame") and not (args.horizon or args.calibrate):
        raise InvalidInput(f"--mode {args.mode} needs --horizon a,b or --calibrate")

    document = _result_skeleton(
        "estimate",
        seed,
        {
            "mode": args.mode,
            "intrinsics": args.intrinsics,
            "calibrated": bool(args.calibrate),
        },
    )
    horizon = None
    if args.calibrate:
        horizon, cluster_docs = _calibrate(tracks, ids, intrinsics, seed)
        document["clusters"] = cluster_docs
    elif args.horizon:
        a, b = _parse_floats(args.horizon, 2, "--horizon")
        horizon = HorizonLine.from_slope_intercept(a, b)
    if horizon is not None:
        document["horizon"] = _horizon_doc(horizon)

    shared_epipole = None
    if args.mode == "least-squares":
        flows = []
        for track in tracks:
            try:
                flows.append(_span_flow(track))
            except DegenerateFlow:
                continue
        # One epipole for the whole set: least squares assumes all
        # tracks share a single rigid relative motion.
        shared_epipole = epipole_least_squares(flows)
        document["epipoles"].append(_epipole_doc(shared_epipole, None))

    for track_id, track in zip(ids, tracks):
        try:
            if args.mode == "planar":
                epi = planar_epipole(_span_flow(track), horizon)
                entry = _estimate_entry(track_id, track, epi, intrinsics)
                document["epipoles"].append(_epipole_doc(epi, track_id))
            elif args.mode == "three-frame":
                x, epi = epipole_offset_three_frames(track, horizon, intrinsics)
                entry = _estimate_entry(track_id, track, epi, intrinsics)
                entry["offset_angle_rad"] = x
                document["epipoles"].append(_epipole_doc(epi, track_id))
            else:
                entry = _estimate_entry(track_id, track, shared_epipole, intrinsics)
        except (DegenerateFlow, StationaryPoint) as exc:
            entry = _stationary_entry(track_id, str(exc))
        except TtcError as exc:
            entry = _degenerate_entry(track_id, exc)
        document["estimates"].append(entry)

    residuals = [e["residual"] for e in document["epipoles"]]
    document["residuals"] = {
        "epipole_residual_mean": float(np.mean(residuals)) if residuals else None,
        "ok_tracks": sum(1 for e in document["estimates"] if e["status"] == "ok"),
        "total_tracks": len(tracks),
    }
    _emit_json(document, args.out)
    return 0


# -------------------------------------------------------------- cluster

def _cmd_cluster(args) -> int:
    intrinsics = _parse_intrinsics(args.intrinsics)
    ids, tracks = read_tracks_csv(args.tracks)
    seed = args.seed if args.seed is not None else _default_seed()
    kept = []
    flow_index = []
    stationary = []
    for i, track in enumerate(tracks):
        try:
            # full-span flow; zero net displacement means no motion line
            FlowVector(track.pixel(0), track.pixel(len(track) - 1))
        except DegenerateFlow:
            stationary.append(ids[i])
            continue
        kept.append(track)
        flow_index.append(i)
    config = ClusteringConfig(
        eps_dist=args.eps_dist,
        eps_ttc=args.eps_ttc,
        max_iterations=args.max_iterations,
        min_cluster_size=args.min_size,
        rng_seed=seed,
    )
    clusters, outliers = cluster_flows(None, kept, config=config, intrinsics=intrinsics)
    document = _result_skeleton(
        "cluster",
        seed,
        {
            "eps_dist": config.eps_dist,
            "eps_ttc": config.eps_ttc,
            "max_iterations": config.max_iterations,
            "min_cluster_size": config.min_cluster_size,
        },
    )
    for c in clusters:
        document["clusters"].append(
            {
                "member_ids": [ids[flow_index[m]] for m in c.member_indices],
                "epipole": _epipole_doc(c.epipole, None),
                "ttc_values": c.ttc_values,
                "mean_ttc": c.mean_ttc,
            }
        )
        document["epipoles"].append(_epipole_doc(c.epipole, None))
    document["outliers"] = [ids[flow_index[i]] for i in outliers]
    document["stationary"] = stationary
    document["residuals"] = {
        "clustered_tracks": int(sum(len(c.member_indices) for c in clusters)),
        "outlier_tracks": len(outliers),
    }
    _emit_json(document, args.out)
    return 0


# -------------------------------------------------------- collision map

def _cmd_collision_map(args) -> int:
    scenario = read_scenario(args.scenario)
    lat_ext, fwd_ext, lat_cells, fwd_cells = _parse_floats(args.grid, 4, "--grid")
    grid = GridSpec(
        lateral_extent=lat_ext,
        forward_extent=fwd_ext,
        lateral_cells=int(lat_cells),
        forward_cells=int(fwd_cells),
    )
    cmap = collision_map(scenario, grid, collision_radius=args.radius)
    write_collision_map_csv(args.out, cmap)
    return 0


# ---------------------------------------------------------- sensitivity

def _build_sweep_model(args) -> StereoErrorModel:
    if args.preset is not None:
        if args.pixel_pitch_um is None:
            raise InvalidInput("--preset uses a metric focal length; --pixel-pitch-um is required")
        return preset_approach_45deg(args.pixel_pitch_um)
    if (args.focal_px is None) == (args.focal_mm is None):
        raise InvalidInput("give exactly one of --focal-px or --focal-mm")
    if args.focal_mm is not None:
        if args.pixel_pitch_um is None:
            raise InvalidInput("--focal-mm needs --pixel-pitch-um to convert to pixels")
        focal_px = focal_px_from_metric(args.focal_mm, args.pixel_pitch_um)
    else:
        focal_px = args.focal_px
    return StereoErrorModel(
        baseline_m=args.baseline_m,
        focal_px=focal_px,
        detection_error_px=args.detection_error_px,
        speed_mps=args.speed_kmh / 3.6,
        heading_deg=args.heading_deg,
    )


def _cmd_sensitivity(args) -> int:
    model = _build_sweep_model(args)
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        z_values = [float(p) for p in args.z_values.split(",") if p.strip()]
    except ValueError as exc:
        raise InvalidInput(f"--z-values: {exc}") from exc
    if not z_values:
        raise InvalidInput("--z-values: need at least one depth")
    table = orientation_error_sweep(
        model,
        z_values,
        frame_dt=args.frame_dt,
        track_frames=args.track_frames,
        trials=args.trials,
        rng_seed=seed,
    )
    write_sensitivity_csv(args.out, table)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttckit",
        description=(
            "Monocular time-to-collision toolkit: simulate synthetic point "
            "tracks, estimate collision parameters and epipoles, cluster "
            "independent motions, and map collision outcomes over velocity "
            "changes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="render a scenario to tracks + ground truth")
    p_sim.add_argument("scenario", help="scenario JSON file")
    p_sim.add_argument("--out-tracks", required=True, help="output track CSV")
    p_sim.add_argument("--out-truth", required=True, help="output ground-truth JSON")
    p_sim.add_argument("--seed", type=int, default=None, help="override scenario rng_seed")
    p_sim.add_argument(
        "--noise-sigma", type=float, default=None, help="override scenario pixel noise"
    )
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="per-track collision estimates from a track CSV")
    p_est.add_argument("tracks", help="track CSV file")
    p_est.add_argument(
        "--intrinsics", required=True, help="f,u0,v0[,width,height] (focal in pixels)"
    )
    p_est.add_argument(
        "--mode",
        choices=("planar", "three-frame", "least-squares"),
        default="planar",
        help="epipole estimator (default: planar)",
    )
    group = p_est.add_mutually_exclusive_group()
    group.add_argument("--horizon", help="horizon line v = a*u + b, given as a,b")
    group.add_argument(
        "--calibrate",
        action="store_true",
        help="derive the horizon from clustered epipoles before estimating",
    )
    p_est.add_argument("--seed", type=int, default=None)
    p_est.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p_est.set_defaults(func=_cmd_estimate)

    p_clu = sub.add_parser("cluster", help="group tracks into independent motions")
    p_clu.add_argument("tracks", help="track CSV file")
    p_clu.add_argument(
        "--intrinsics", required=True, help="f,u0,v0[,width,height] (focal in pixels)"
    )
    p_clu.add_argument("--eps-dist", type=float, default=2.0, help="inlier line distance, px")
    p_clu.add_argument(
        "--eps-ttc",
        type=float,
        default=None,
        help="TTC agreement threshold, frames (default: adaptive)",
    )
    p_clu.add_argument("--min-size", type=int, default=3, help="smallest reportable cluster")
    p_clu.add_argument("--max-iterations", type=int, default=500)
    p_clu.add_argument("--seed", type=int, default=None)
    p_clu.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p_clu.set_defaults(func=_cmd_cluster)

    p_map = sub.add_parser("collision-map", help="collision state over velocity changes")
    p_map.add_argument("scenario", help="scenario JSON file")
    p_map.add_argument(
        "--grid",
        required=True,
        help="lat_extent,fwd_extent,lat_cells,fwd_cells (cells odd)",
    )
    p_map.add_argument("--radius", type=float, default=2.0, help="collision radius, meters")
    p_map.add_argument("--out", required=True, help="output CSV")
    p_map.set_defaults(func=_cmd_collision_map)

    p_sen = sub.add_parser("sensitivity", help="stereo vs collision-plane error table")
    p_sen.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p_sen.add_argument("--baseline-m", type=float, default=0.15)
    p_sen.add_argument("--focal-px", type=float, default=None)
    p_sen.add_argument("--focal-mm", type=float, default=None)
    p_sen.add_argument(
        "--pixel-pitch-um",
        type=float,
        default=None,
        help="sensor pixel pitch; required with a metric focal length",
    )
    p_sen.add_argument("--detection-error-px", type=float, default=0.2)
    p_sen.add_argument("--speed-kmh", type=float, default=50.0)
    p_sen.add_argument("--heading-deg", type=float, default=45.0)
    p_sen.add_argument(
        "--z-values", default="10,20,40,60,80,100", help="comma-separated depths in meters"
    )
    p_sen.add_argument("--trials", type=int, default=200)
    p_sen.add_argument("--track-frames", type=int, default=8)
    p_sen.add_argument("--frame-dt", type=float, default=1.0 / 12.0)
    p_sen.add_argument("--seed", type=int, default=None)
    p_sen.add_argument("--out", required=True, help="output CSV")
    p_sen.set_defaults(func=_cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InvalidInput, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TtcError as exc:
        print(f"error: degenerate input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
