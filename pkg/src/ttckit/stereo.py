"""Stereo depth error model and stereo-vs-monocular sensitivity sweep.

A stereo rig with baseline B and focal length f (pixels) sees an object
at depth Z with disparity d = B f / Z. A detection error of dp pixels on
the disparity propagates to a depth error of

    dZ = Z^2 dp / (B f)

to first order, growing quadratically in Z. Estimating an object's
heading from two triangulated stereo positions therefore degrades fast
with distance: the depth errors soon dwarf the true between-frame
displacement.

The monocular collision-plane alternative never triangulates. It fits
the image flow line of the tracked point and intersects it with the
horizon; the intersection is the epipole of the relative motion, whose
image offset from the principal point encodes the heading directly. Its
accuracy is set by the angular uncertainty of the flow segment, which
stays bounded as Z grows (and improves with segment length), not by Z
squared.

orientation_error_sweep runs both estimators on the same seeded
Monte-Carlo perturbations and tabulates the comparison per depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, line_angle_frame, project
from .errors import InvalidInput, TtcError
from .ttc import ttc_from_angles

__all__ = [
    "SensitivityRow",
    "SensitivityTable",
    "StereoErrorModel",
    "disparity_px",
    "focal_px_from_metric",
    "orientation_error_sweep",
    "preset_approach_45deg",
    "stereo_depth_error",
]

# Sweep preset: small automotive stereo rig, object crossing at 45
# degrees with 50 km/h. Pixel pitch stays caller-supplied; the metric
# focal length cannot become pixels without it.
PRESET_BASELINE_M = 0.15
PRESET_FOCAL_MM = 8.0
PRESET_DETECTION_ERROR_PX = 0.2
PRESET_SPEED_KMH = 50.0
PRESET_HEADING_DEG = 45.0


def focal_px_from_metric(focal_mm: float, pixel_pitch_um: float) -> float:
    """Convert a metric focal length to pixels via the sensor pixel pitch."""
    if focal_mm <= 0.0 or pixel_pitch_um <= 0.0:
        raise InvalidInput("focal_mm and pixel_pitch_um must be > 0")
    return float(focal_mm * 1000.0 / pixel_pitch_um)


@dataclass(frozen=True)
class StereoErrorModel:
    """Stereo rig and object-motion parameters for the sensitivity sweep.

    Attributes:
        baseline_m: stereo baseline B in meters, > 0.
        focal_px: focal length in pixels, > 0.
        detection_error_px: per-detection pixel error dp, >= 0.
        speed_mps: object speed relative to the camera, m/s, > 0.
        heading_deg: motion direction in the horizontal plane, degrees
            from the optical axis (0 = head-on).
    """

    baseline_m: float
    focal_px: float
    detection_error_px: float
    speed_mps: float
    heading_deg: float

    def __post_init__(self):
        if self.baseline_m <= 0.0:
            raise InvalidInput(f"baseline_m must be > 0, got {self.baseline_m}")
        if self.focal_px <= 0.0:
            raise InvalidInput(f"focal_px must be > 0, got {self.focal_px}")
        if self.detection_error_px < 0.0:
            raise InvalidInput(f"detection_error_px must be >= 0, got {self.detection_error_px}")
        if self.speed_mps <= 0.0:
            raise InvalidInput(f"speed_mps must be > 0, got {self.speed_mps}")


def preset_approach_45deg(pixel_pitch_um: float) -> StereoErrorModel:
    """The built-in sweep preset; pixel pitch must be supplied."""
    return StereoErrorModel(
        baseline_m=PRESET_BASELINE_M,
        focal_px=focal_px_from_metric(PRESET_FOCAL_MM, pixel_pitch_um),
        detection_error_px=PRESET_DETECTION_ERROR_PX,
        speed_mps=PRESET_SPEED_KMH / 3.6,
        heading_deg=PRESET_HEADING_DEG,
    )


def disparity_px(model: StereoErrorModel, z_m) -> np.ndarray | float:
    """Stereo disparity B f / Z in pixels."""
    z = np.asarray(z_m, dtype=np.float64)
    if np.any(z <= 0.0):
        raise InvalidInput("depth must be > 0")
    d = model.baseline_m * model.focal_px / z
    return float(d) if np.isscalar(z_m) else d


def stereo_depth_error(model: StereoErrorModel, z_m) -> np.ndarray | float:
    """First-order depth error dZ = Z^2 dp / (B f). Accepts scalars or arrays."""
    z = np.asarray(z_m, dtype=np.float64)
    if np.any(z <= 0.0):
        raise InvalidInput("depth must be > 0")
    dz = z**2 * model.detection_error_px / (model.baseline_m * model.focal_px)
    return float(dz) if np.isscalar(z_m) else dz


@dataclass(frozen=True)
class SensitivityRow:
    """One depth's comparison of stereo and collision-plane estimates.

    Heading errors are mean absolute errors in degrees over the valid
    Monte-Carlo trials; ttc_error_frames likewise in frames. Trials
    whose perturbed geometry turned degenerate (flow parallel to the
    horizon, non-positive disparity) are excluded from the means and
    counted in degenerate_trials; they are marked, not silently dropped.
    """

    z_m: float
    stereo_depth_error_m: float
    stereo_heading_error_deg: float
    plane_heading_error_deg: float
    ttc_error_frames: float
    degenerate_trials: int


@dataclass(frozen=True)
class SensitivityTable:
    """Sweep output plus the parameters that produced it."""

    rows: tuple[SensitivityRow, ...]
    model: StereoErrorModel
    frame_dt: float
    track_frames: int
    trials: int
    rng_seed: int


def _tls_line(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Total least squares line through points: (centroid, unit direction)."""
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    return centroid, vt[0]


def orientation_error_sweep(
    model: StereoErrorModel,
    z_values,
    *,
    frame_dt: float = 1.0 / 12.0,
    track_frames: int = 8,
    height_offset_m: float = 2.0,
    trials: int = 200,
    rng_seed: int = 0,
) -> SensitivityTable:
    """Monte-Carlo heading/TTC error comparison per object depth.

    For each depth Z the object starts at (0, height_offset_m, Z) and
    translates with model.speed_mps at model.heading_deg for
    track_frames frames of length frame_dt. Each trial perturbs every
    pixel detection with Gaussian noise of scale detection_error_px and
    estimates:

    * stereo heading: triangulate the first and last frames from noisy
      left/right detections, take the direction of the position change.
    * collision-plane heading: total-least-squares line through the
      noisy monocular track, intersected with the (known, level)
      horizon; the intersection is the epipole and arctan of its offset
      over the focal length is the heading.
    * TTC: first/last noisy pixels against that epipole.

    The object must stay in front of the camera for the whole segment;
    too-small Z raises InvalidInput.

    Args:
        model: rig and motion parameters.
        z_values: depths in meters.
        frame_dt: seconds per frame.
        track_frames: observations per segment, >= 2; heading accuracy
            of the monocular method scales with segment length.
        height_offset_m: tracked point's height offset below the camera
            axis; 0 would put every flow line on the horizon.
        trials: Monte-Carlo repetitions per depth.
        rng_seed: seed; identical calls reproduce identical tables.

    Returns:
        SensitivityTable with one row per depth.
    """
    if track_frames < 2:
        raise InvalidInput(f"track_frames must be >= 2, got {track_frames}")
    if trials < 1:
        raise InvalidInput(f"trials must be >= 1, got {trials}")
    if frame_dt <= 0.0:
        raise InvalidInput(f"frame_dt must be > 0, got {frame_dt}")
    if height_offset_m == 0.0:
        raise InvalidInput("height_offset_m = 0 makes every flow line the horizon")
    z_values = [float(z) for z in np.atleast_1d(np.asarray(z_values, dtype=np.float64))]

    intr = CameraIntrinsics(focal_px=model.focal_px, principal_point=(0.0, 0.0))
    f = model.focal_px
    theta = math.radians(model.heading_deg)
    v_g = model.speed_mps * np.array([-math.sin(theta), 0.0, -math.cos(theta)])
    step = v_g * frame_dt
    step_norm = float(np.linalg.norm(step))
    dp = model.detection_error_px
    b = model.baseline_m
    span = track_frames - 1

    rng = np.random.default_rng(rng_seed)
    rows = []
    for z in z_values:
        p_start = np.array([0.0, height_offset_m, z])
        idx = np.arange(track_frames, dtype=np.float64)
        positions = p_start[np.newaxis, :] + idx[:, np.newaxis] * step[np.newaxis, :]
        if positions[-1, 2] <= 0.1:
            raise InvalidInput(
                f"Z = {z} m leaves the segment behind the camera; "
                f"minimum usable depth is {0.1 - span * step[2]:.2f} m"
            )
        pixels_true = project(positions, intr)
        # True quantities for this depth.
        k_true = float(-(p_start @ step) / step_norm**2)
        heading_true_deg = model.heading_deg
        # Stereo image coordinates: left camera at the origin, right
        # camera baseline b to the +X side, so disparity = u_L - u_R.
        # Heading comes from two consecutive triangulated positions.
        u_left = pixels_true[[0, 1], 0]
        u_right = intr.u0 + f * (positions[[0, 1], 0] - b) / positions[[0, 1], 2]

        plane_err = []
        ttc_err = []
        stereo_err = []
        degenerate = 0
        for _ in range(trials):
            trial_degenerate = False
            # Monocular path: noisy track, TLS flow line, horizon cut.
            noisy = pixels_true + rng.normal(0.0, dp, size=pixels_true.shape)
            centroid, direction = _tls_line(noisy)
            if abs(direction[1]) < 1e-12:
                trial_degenerate = True
            else:
                s = (intr.v0 - centroid[1]) / direction[1]
                e_px = centroid + s * direction
                heading_est = math.degrees(math.atan2(e_px[0] - intr.u0, f))
                plane_err.append(abs(heading_est - heading_true_deg))
                frame = line_angle_frame(noisy[0], noisy[-1], intr)
                angle_e = frame.angle_of(e_px)
                alpha = frame.angle_of(noisy[0]) - angle_e
                beta = frame.angle_of(noisy[-1]) - angle_e
                try:
                    k_est = ttc_from_angles(alpha, beta) * span
                    ttc_err.append(abs(k_est - k_true))
                except TtcError:
                    trial_degenerate = True

            # Stereo path: noisy left/right detections, two triangulations.
            ul = u_left + rng.normal(0.0, dp, size=2)
            ur = u_right + rng.normal(0.0, dp, size=2)
            disp = ul - ur
            if np.any(disp <= 1e-9):
                trial_degenerate = True
            else:
                z_est = b * f / disp
                x_est = (ul - intr.u0) * z_est / f
                dx = x_est[1] - x_est[0]
                dz = z_est[1] - z_est[0]
                heading_st = math.degrees(math.atan2(-dx, -dz))
                err = abs(heading_st - heading_true_deg) % 360.0
                stereo_err.append(min(err, 360.0 - err))
            if trial_degenerate:
                degenerate += 1

        rows.append(
            SensitivityRow(
                z_m=z,
                stereo_depth_error_m=float(stereo_depth_error(model, z)),
                stereo_heading_error_deg=float(np.mean(stereo_err)) if stereo_err else float("nan"),
                plane_heading_error_deg=float(np.mean(plane_err)) if plane_err else float("nan"),
                ttc_error_frames=float(np.mean(ttc_err)) if ttc_err else float("nan"),
                degenerate_trials=degenerate,
            )
        )
    return SensitivityTable(
        rows=tuple(rows),
        model=model,
        frame_dt=frame_dt,
        track_frames=track_frames,
        trials=trials,
        rng_seed=rng_seed,
    )
