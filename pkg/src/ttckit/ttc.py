"""Time-to-collision and collision-plane decomposition for one tracked point.

Model: the camera is held at the origin and the tracked 3D point moves
with the constant per-frame relative displacement v_g (object velocity
minus camera velocity). The plane through the point with normal v_g is
the collision plane; it sweeps toward (or away from) the camera center as
the point moves. Two image observations of the point plus the epipole of
the relative motion determine, purely from angles:

* k, the real-valued number of frames until the collision plane passes
  the camera center, measured from the first frame of the observation
  pair. k > 1 means the sweep is ahead; negative k means it already
  happened |k| frames ago.
* H >= 0, the lateral miss distance of the point's motion line from the
  camera center, in units of per-frame displacement |v_g|.

Everything is computed inside the plane spanned by the camera center and
the image flow line, using :class:`ttckit.camera.LineAngleFrame`, so the
relations hold exactly for arbitrary (not axis-aligned) translation.

The angle identity used throughout: with angles measured from the
epipole along the flow line, the point observed at frames t and t+1
satisfies tan(angle(t)) = H / (k - t). The two-frame solution is
k = tan(beta) / (tan(beta) - tan(alpha)) and H = k * tan(alpha).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, as_pixel, line_angle_frame
from .errors import DegenerateGeometry, InsufficientData, InvalidInput, StationaryPoint

__all__ = [
    "CollisionEstimate",
    "MotionClass",
    "TrackObservation",
    "classify_motion",
    "collision_estimate",
    "ttc_batch",
    "ttc_from_angles",
    "ttc_three_frame_consistency",
]

# Pixel coincidence tolerance for "epipole on top of a track point".
_EPS_COINCIDENT = 1e-9


class MotionClass(enum.Enum):
    """Qualitative motion of a tracked point relative to the camera."""

    APPROACHING = "Approaching"
    RECEDING = "Receding"
    CONSTANT_BEARING = "ConstantBearing"


@dataclass(frozen=True)
class TrackObservation:
    """Pixel positions of one tracked point over consecutive frames.

    Args:
        frames: integer frame indices, length N >= 2, strictly
            increasing with step exactly 1 (stored as a tuple). The
            constant-velocity model needs uniform temporal sampling.
        positions: float pixel coordinates, shape (N, 2), finite.
    """

    frames: tuple
    positions: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.int64)
        positions = np.asarray(self.positions, dtype=np.float64)
        if frames.ndim != 1 or len(frames) < 2:
            raise InvalidInput("track needs at least 2 frames")
        if positions.shape != (len(frames), 2):
            raise InvalidInput(
                f"positions shape {positions.shape} does not match {len(frames)} frames"
            )
        if not np.all(np.isfinite(positions)):
            raise InvalidInput("track positions must be finite")
        steps = np.diff(frames)
        if np.any(steps != 1):
            raise InvalidInput(f"frame indices must increase by exactly 1, got steps {steps}")
        object.__setattr__(self, "frames", tuple(int(f) for f in frames))
        object.__setattr__(self, "positions", positions)

    @classmethod
    def from_positions(cls, positions, start_frame: int = 0) -> "TrackObservation":
        positions = np.asarray(positions, dtype=np.float64)
        frames = np.arange(start_frame, start_frame + len(positions), dtype=np.int64)
        return cls(frames=frames, positions=positions)

    def __len__(self) -> int:
        return len(self.frames)

    def pixel(self, i: int) -> np.ndarray:
        return self.positions[i]


@dataclass(frozen=True)
class CollisionEstimate:
    """Collision-plane decomposition of one observation pair.

    Attributes:
        k: frames until the collision plane sweeps the camera center,
            counted from the first frame of the pair used.
        H: lateral miss distance, >= 0, in units of per-frame relative
            displacement.
        v_g_dir: unit 3-vector of the viewing ray through the epipole.
            For an approaching point this is the direction the point
            comes from (the negated relative motion direction).
        v_H_dir: unit 3-vector of the lateral offset, orthogonal to
            v_g_dir, in the plane spanned by v_g_dir and the point's ray.
        point: reconstructed 3D position k * v_g_dir + H * v_H_dir, in
            per-frame displacement units. For an approaching point this
            equals the scene position at the first frame of the pair.
    """

    k: float
    H: float
    v_g_dir: np.ndarray
    v_H_dir: np.ndarray
    point: np.ndarray


def ttc_from_angles(alpha: float, beta: float, *, eps_tan: float = 1e-12) -> float:
    """Frames to collision-plane sweep from two epipole-relative angles.

    Args:
        alpha: signed ray angle of the point at the pair's first frame,
            measured from the epipole direction along the flow line.
            Obtuse values are legal; they mean the plane already swept
            past the camera before that observation.
        beta: same angle one frame later.
        eps_tan: degeneracy threshold on |tan(beta) - tan(alpha)|.

    Returns:
        k = tan(beta) / (tan(beta) - tan(alpha)). k > 1 for an
        approaching point observed before the sweep; 0 < k < 1 when the
        sweep happens between the two observations; k < 0 after it.

    Raises:
        StationaryPoint: angular motion below eps_tan (constant bearing;
            no finite TTC from one track).
        InvalidInput: angles outside (-pi, pi) or non-finite.
    """
    a = float(alpha)
    b = float(beta)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise InvalidInput("angles must be finite")
    if abs(a) >= np.pi or abs(b) >= np.pi:
        raise InvalidInput(f"angles must lie in (-pi, pi), got {a}, {b}")
    ta = np.tan(a)
    tb = np.tan(b)
    if abs(tb - ta) < eps_tan:
        raise StationaryPoint(f"angular motion {tb - ta:.3e} below threshold {eps_tan:.3e}")
    return float(tb / (tb - ta))


def _ray_angle(e: np.ndarray, p: np.ndarray, intrinsics: CameraIntrinsics) -> float:
    """True viewing-ray angle from the epipole ray to the point ray.

    Measured in the 1D frame of the image line joining the two, oriented
    epipole -> point, so the result lies in (0, pi). Values above pi/2
    mean the point's ray makes an obtuse angle with the epipole ray,
    which happens after the collision plane has swept past.
    """
    frame = line_angle_frame(e, p, intrinsics)
    return frame.angle_of(p) - frame.angle_of(e)


def _pair_angles(p0: np.ndarray, p1: np.ndarray, epipole, intrinsics: CameraIntrinsics):
    """Epipole-relative angles (alpha, beta) of an observation pair.

    Each angle is the exact ray angle between the epipole and that
    observation. For geometrically consistent input (epipole on the flow
    line) this matches the in-line construction exactly; for a wrong
    epipole hypothesis the angles shift in every displacement direction,
    which is what makes the three-frame consistency residual usable as
    an epipole validation signal.
    """
    e = as_pixel(epipole)
    # zero flow first: a point parked on the epipole is constant bearing,
    # not a geometric degeneracy
    if np.linalg.norm(p1 - p0) == 0.0:
        raise StationaryPoint("zero pixel displacement between frames")
    if np.linalg.norm(p0 - e) < _EPS_COINCIDENT or np.linalg.norm(p1 - e) < _EPS_COINCIDENT:
        raise DegenerateGeometry("epipole coincides with a track point")
    return _ray_angle(e, p0, intrinsics), _ray_angle(e, p1, intrinsics)


def collision_estimate(
    track: TrackObservation,
    epipole,
    intrinsics: CameraIntrinsics,
    *,
    pair_index: int = 0,
    eps_tan: float = 1e-12,
) -> CollisionEstimate:
    """Full collision-plane decomposition of one track against an epipole.

    Args:
        track: observations; the pair (pair_index, pair_index + 1) is used.
        epipole: epipole pixel position, or any object with a
            ``position`` attribute holding one.
        intrinsics: camera model.
        pair_index: which consecutive frame pair to decompose; k is
            counted from track.frames[pair_index].
        eps_tan: degeneracy threshold for the TTC denominator.

    Raises:
        StationaryPoint: constant-bearing track (zero or sub-threshold
            angular motion). Callers should report MotionClass
            CONSTANT_BEARING with H = 0 instead of failing.
        DegenerateGeometry: epipole coincides with a track point.
        InvalidInput: pair_index out of range.
    """
    if not 0 <= pair_index <= len(track) - 2:
        raise InvalidInput(f"pair_index {pair_index} out of range for {len(track)} frames")
    p0 = track.pixel(pair_index)
    p1 = track.pixel(pair_index + 1)
    alpha, beta = _pair_angles(p0, p1, epipole, intrinsics)
    k = ttc_from_angles(alpha, beta, eps_tan=eps_tan)
    h = k * np.tan(alpha)

    e = as_pixel(epipole)
    pp = intrinsics.pp
    v_g_dir = np.array([e[0] - pp[0], e[1] - pp[1], intrinsics.focal_px])
    v_g_dir /= np.linalg.norm(v_g_dir)
    ray0 = np.array([p0[0] - pp[0], p0[1] - pp[1], intrinsics.focal_px])
    # Lateral direction: component of the point's ray orthogonal to the
    # motion axis, via the double cross product. Antipode-invariant in
    # v_g_dir, so the epipole ray can stand in for the motion direction.
    lateral = np.cross(np.cross(v_g_dir, ray0), v_g_dir)
    lateral_norm = np.linalg.norm(lateral)
    if lateral_norm < 1e-15:
        # Point ray parallel to the motion axis: direct collision course.
        raise StationaryPoint("track lies on the epipole ray; lateral direction undefined")
    v_h_dir = lateral / lateral_norm
    point = k * v_g_dir + h * v_h_dir
    return CollisionEstimate(k=float(k), H=float(h), v_g_dir=v_g_dir, v_H_dir=v_h_dir, point=point)


def classify_motion(track: TrackObservation, epipole, *, eps_px: float = 0.05) -> MotionClass:
    """Approaching / receding / constant-bearing from epipole distances.

    Compares the pixel distance to the epipole at the last frame against
    the first. Changes smaller than eps_px count as constant bearing.
    """
    e = as_pixel(epipole)
    d_first = float(np.linalg.norm(track.pixel(0) - e))
    d_last = float(np.linalg.norm(track.pixel(len(track) - 1) - e))
    if d_last - d_first > eps_px:
        return MotionClass.APPROACHING
    if d_first - d_last > eps_px:
        return MotionClass.RECEDING
    return MotionClass.CONSTANT_BEARING


def ttc_three_frame_consistency(
    track: TrackObservation,
    epipole,
    intrinsics: CameraIntrinsics,
    *,
    start: int = 0,
    eps_tan: float = 1e-12,
) -> float:
    """k(start, start+1) - k(start+1, start+2), a residual for epipole checks.

    Equals exactly 1 for noise-free constant-velocity motion with the
    correct epipole: each elapsed frame brings the plane sweep one frame
    closer.

    Raises:
        InsufficientData: fewer than 3 frames from start.
        StationaryPoint: propagated from either pair.
    """
    if len(track) - start < 3:
        raise InsufficientData("three-frame consistency needs at least 3 frames")
    first = collision_estimate(track, epipole, intrinsics, pair_index=start, eps_tan=eps_tan)
    second = collision_estimate(track, epipole, intrinsics, pair_index=start + 1, eps_tan=eps_tan)
    return first.k - second.k


def ttc_batch(
    p0: np.ndarray,
    p1: np.ndarray,
    epipole,
    intrinsics: CameraIntrinsics,
    *,
    eps_tan: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (k, H) of many observation pairs against one epipole.

    Args:
        p0: first-frame pixels, shape (N, 2).
        p1: second-frame pixels, shape (N, 2).
        epipole: shared epipole pixel.
        intrinsics: camera model.
        eps_tan: degeneracy threshold, as in ttc_from_angles.

    Returns:
        (k, H) float arrays of shape (N,). Degenerate rows (zero flow,
        epipole on the flow's pixels, sub-threshold angular motion) are
        NaN rather than raised, so batch callers can mask them.

    The epipole-relative angle of each observation is the true angle
    between viewing rays, so tan(angle) = ||r_e x r_p|| / (r_e . r_p);
    a negative dot product marks the obtuse after-the-sweep regime.
    This matches collision_estimate row for row.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    if p0.ndim != 2 or p0.shape[1] != 2 or p0.shape != p1.shape:
        raise InvalidInput(f"expected matching (N, 2) arrays, got {p0.shape} and {p1.shape}")
    e = as_pixel(epipole)
    pp = intrinsics.pp
    f = intrinsics.focal_px

    ray_e = np.array([e[0] - pp[0], e[1] - pp[1], f])
    rays0 = np.column_stack([p0 - pp[np.newaxis, :], np.full(len(p0), f)])
    rays1 = np.column_stack([p1 - pp[np.newaxis, :], np.full(len(p1), f)])
    cross0 = np.cross(np.broadcast_to(ray_e, rays0.shape), rays0)
    cross1 = np.cross(np.broadcast_to(ray_e, rays1.shape), rays1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tan_a = np.linalg.norm(cross0, axis=1) / (rays0 @ ray_e)
        tan_b = np.linalg.norm(cross1, axis=1) / (rays1 @ ray_e)

    denom = tan_b - tan_a
    valid = np.isfinite(tan_a) & np.isfinite(tan_b)
    valid &= np.linalg.norm(p1 - p0, axis=1) > 0.0
    valid &= np.abs(denom) >= eps_tan
    valid &= np.linalg.norm(p0 - e, axis=1) >= _EPS_COINCIDENT
    valid &= np.linalg.norm(p1 - e, axis=1) >= _EPS_COINCIDENT

    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(valid, tan_b / np.where(denom == 0.0, 1.0, denom), np.nan)
    h = np.where(valid, k * tan_a, np.nan)
    return k, h
