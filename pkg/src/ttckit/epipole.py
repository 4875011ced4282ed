"""Epipole estimators and horizon calibration.

The epipole is the image point where a tracked point would project after
moving infinitely far along the negated relative motion direction; it is
the 2D signature of the relative translation. For pure translation every
flow line (the image line through one point's consecutive observations)
passes through the epipole exactly, which yields three estimators:

* planar_epipole: motion confined to a horizontal plane puts the epipole
  on the horizon line, so one flow line suffices: intersect it with the
  horizon.
* epipole_least_squares: several flow lines from one rigid translation
  meet in the epipole; solve the stacked point-on-line constraints.
* epipole_offset_three_frames: arbitrary translation observed over three
  frames. The horizon intersection is generally wrong by an in-line
  angular offset x; requiring the two frame-pair TTC values to differ by
  exactly one frame pins x in closed form.

calibrate_horizon inverts the planar construction: epipoles collected
from several planar motion episodes all lie on the horizon, so a total
least squares line fit through them recovers it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, as_pixel, line_angle_frame
from .errors import (
    DegenerateConfiguration,
    DegenerateFlow,
    InsufficientData,
    InvalidInput,
    ParallelToHorizon,
    SingularGeometry,
)
from .ttc import TrackObservation

__all__ = [
    "Epipole",
    "EpipoleMethod",
    "FlowVector",
    "HorizonLine",
    "calibrate_horizon",
    "epipole_least_squares",
    "epipole_offset_three_frames",
    "planar_epipole",
]

# Default angular tolerance below which two image lines count as parallel.
# Intersection error grows like 1 / sin(angle), so a floor is required.
EPS_PARALLEL_DEG = 0.5


class EpipoleMethod(enum.Enum):
    HORIZON_INTERSECTION = "HorizonIntersection"
    LEAST_SQUARES = "LeastSquares"
    THREE_FRAME_OFFSET = "ThreeFrameOffset"


@dataclass(frozen=True)
class Epipole:
    """Estimated epipole.

    Attributes:
        position: pixel location, finite.
        method: which estimator produced it.
        residual: method-specific fit quality in pixels, >= 0.
            Zero by construction for the planar intersection; RMS
            point-line distance for least squares; the three-frame
            TTC-consistency residual for the offset method.
    """

    position: np.ndarray
    method: EpipoleMethod
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_pixel(self.position))
        if not np.isfinite(self.residual) or self.residual < 0.0:
            raise InvalidInput(f"residual must be finite and >= 0, got {self.residual}")


@dataclass(frozen=True)
class HorizonLine:
    """Image line holding the epipoles of all ground-plane motions.

    Attributes:
        reference: any pixel on the line.
        direction: unit 2-vector along the line.
        fit_residual: RMS perpendicular distance when produced by
            calibrate_horizon; 0 for exactly constructed lines.
    """

    reference: np.ndarray
    direction: np.ndarray
    fit_residual: float = 0.0

    def __post_init__(self):
        ref = as_pixel(self.reference)
        d = np.asarray(self.direction, dtype=np.float64)
        if d.shape != (2,) or not np.all(np.isfinite(d)):
            raise InvalidInput(f"direction must be a finite 2-vector, got {d}")
        n = np.linalg.norm(d)
        if n == 0.0:
            raise InvalidInput("direction must be nonzero")
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "direction", d / n)

    @classmethod
    def level(cls, v0: float) -> "HorizonLine":
        """Horizontal horizon v = v0 of a level camera."""
        return cls(reference=np.array([0.0, float(v0)]), direction=np.array([1.0, 0.0]))

    @classmethod
    def from_slope_intercept(cls, a: float, b: float) -> "HorizonLine":
        """Line v = a * u + b."""
        return cls(reference=np.array([0.0, float(b)]), direction=np.array([1.0, float(a)]))

    def signed_distance(self, p) -> float:
        """Perpendicular distance of pixel p, signed by side."""
        rel = as_pixel(p) - self.reference
        return float(self.direction[0] * rel[1] - self.direction[1] * rel[0])


@dataclass(frozen=True)
class FlowVector:
    """One point's image displacement between two frames.

    Attributes:
        p: pixel at the first frame.
        p_prime: pixel at the second frame.

    Derived on construction: t = p_prime - p (displacement) and n, the
    unit normal of the flow line (t rotated a quarter turn and
    normalized). Zero displacement defines no line and is rejected.
    """

    p: np.ndarray
    p_prime: np.ndarray
    t: np.ndarray = field(init=False)
    n: np.ndarray = field(init=False)

    def __post_init__(self):
        p = as_pixel(self.p)
        q = as_pixel(self.p_prime)
        t = q - p
        norm = float(np.linalg.norm(t))
        if norm == 0.0:
            raise DegenerateFlow(f"zero displacement at pixel {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_prime", q)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "n", np.array([-t[1], t[0]]) / norm)

    @classmethod
    def from_track(cls, track: TrackObservation, pair_index: int = 0) -> "FlowVector":
        return cls(p=track.pixel(pair_index), p_prime=track.pixel(pair_index + 1))

    @property
    def direction(self) -> np.ndarray:
        """Unit displacement direction."""
        return self.t / np.linalg.norm(self.t)


def _lines_parallel(d1: np.ndarray, d2: np.ndarray, eps_parallel_deg: float) -> bool:
    # Orientation-free: |sin(angle between lines)| via the 2D cross product.
    sin_angle = abs(d1[0] * d2[1] - d1[1] * d2[0])
    return sin_angle < np.sin(np.deg2rad(eps_parallel_deg))


def planar_epipole(
    flow: FlowVector,
    horizon: HorizonLine,
    *,
    eps_parallel_deg: float = EPS_PARALLEL_DEG,
) -> Epipole:
    """Epipole of planar motion: flow line intersected with the horizon.

    Raises:
        ParallelToHorizon: flow line within eps_parallel_deg of the
            horizon direction; fall back to the least-squares or
            three-frame estimators.
    """
    d_flow = flow.direction
    d_hor = horizon.direction
    if _lines_parallel(d_flow, d_hor, eps_parallel_deg):
        raise ParallelToHorizon(
            f"flow direction {d_flow} within {eps_parallel_deg} deg of the horizon"
        )
    # Solve flow.p + s * d_flow = horizon.reference + u * d_hor.
    a = np.column_stack([d_flow, -d_hor])
    rhs = horizon.reference - flow.p
    s, _ = np.linalg.solve(a, rhs)
    position = flow.p + s * d_flow
    return Epipole(position=position, method=EpipoleMethod.HORIZON_INTERSECTION, residual=0.0)


def epipole_least_squares(
    flows: list[FlowVector],
    *,
    eps_parallel_deg: float = EPS_PARALLEL_DEG,
) -> Epipole:
    """Epipole as the least-squares meeting point of several flow lines.

    Stacks one point-on-line constraint n_i . e = n_i . p_i per flow and
    solves by orthogonal factorization (np.linalg.lstsq), which stays
    well conditioned for near-parallel bundles.

    Raises:
        InsufficientData: fewer than 2 flows.
        SingularGeometry: no two flow directions differ by more than
            eps_parallel_deg (the lines meet nowhere or everywhere).
    """
    if len(flows) < 2:
        raise InsufficientData(f"need at least 2 flows, got {len(flows)}")
    dirs = np.array([fl.direction for fl in flows])
    spread_ok = any(
        not _lines_parallel(dirs[i], dirs[j], eps_parallel_deg)
        for i in range(len(dirs))
        for j in range(i + 1, len(dirs))
    )
    if not spread_ok:
        raise SingularGeometry("all flow lines parallel; epipole unconstrained")
    normals = np.array([fl.n for fl in flows])
    offsets = np.einsum("ij,ij->i", normals, np.array([fl.p for fl in flows]))
    solution, *_ = np.linalg.lstsq(normals, offsets, rcond=None)
    distances = normals @ solution - offsets
    residual = float(np.sqrt(np.mean(distances**2)))
    return Epipole(position=solution, method=EpipoleMethod.LEAST_SQUARES, residual=residual)


def epipole_offset_three_frames(
    track: TrackObservation,
    horizon: HorizonLine,
    intrinsics: CameraIntrinsics,
    *,
    eps_tan: float = 1e-12,
    eps_parallel_deg: float = EPS_PARALLEL_DEG,
) -> tuple[float, Epipole]:
    """Angular offset and corrected epipole from three frames of one track.

    With angles a, b, c of the three observations measured from the
    flow-line / horizon intersection, demanding that the TTC of the
    first frame pair exceed the TTC of the second by exactly one frame
    has the closed-form solution

        x = arctan( (tan a tan b - 2 tan a tan c + tan b tan c)
                    / (tan a - 2 tan b + tan c) )

    and the true epipole sits on the flow line at in-line angle
    (angle of the intersection) - x. x = 0 exactly when the true epipole
    already lies on the horizon.

    Returns:
        (x, epipole): the offset angle in radians, wrapped to
        (-pi/2, pi/2), and the corrected epipole. The epipole's residual
        is |k01 - k12 - 1| re-evaluated after the correction.

    Raises:
        InsufficientData: fewer than 3 frames.
        DegenerateConfiguration: static track, vanishing offset
            denominator (uniformly spaced angles), or corrected epipole
            at infinity.
        ParallelToHorizon: the track's flow line never meets the horizon.
    """
    if len(track) < 3:
        raise InsufficientData(f"need at least 3 frames, got {len(track)}")
    p0, p1, p2 = track.pixel(0), track.pixel(1), track.pixel(2)
    try:
        flow = FlowVector(p=p0, p_prime=p1)
    except DegenerateFlow as exc:
        raise DegenerateConfiguration(f"static track: {exc}") from exc
    anchor = planar_epipole(flow, horizon, eps_parallel_deg=eps_parallel_deg)

    frame = line_angle_frame(p0, p1, intrinsics)
    angle_anchor = frame.angle_of(anchor.position)
    a = frame.angle_of(p0) - angle_anchor
    b = frame.angle_of(p1) - angle_anchor
    c = frame.angle_of(p2) - angle_anchor
    ta, tb, tc = np.tan(a), np.tan(b), np.tan(c)
    denominator = ta - 2.0 * tb + tc
    if abs(denominator) < eps_tan:
        raise DegenerateConfiguration(
            f"offset denominator {denominator:.3e} below {eps_tan:.3e}"
        )
    x = float(np.arctan((ta * tb - 2.0 * ta * tc + tb * tc) / denominator))
    corrected = frame.point_at(angle_anchor - x)

    # Residual: the frame-pair TTC difference must return to 1.
    angle_corr = frame.angle_of(corrected)
    tans = np.tan([ang + angle_anchor - angle_corr for ang in (a, b, c)])
    with np.errstate(divide="ignore", invalid="ignore"):
        k01 = tans[1] / (tans[1] - tans[0])
        k12 = tans[2] / (tans[2] - tans[1])
    residual = float(abs(k01 - k12 - 1.0))
    if not np.isfinite(residual):
        raise DegenerateConfiguration("corrected epipole leaves TTC undefined")
    epipole = Epipole(
        position=corrected, method=EpipoleMethod.THREE_FRAME_OFFSET, residual=residual
    )
    return x, epipole


def calibrate_horizon(epipoles: list[Epipole]) -> HorizonLine:
    """Total least squares horizon through epipoles of planar motions.

    Uses the perpendicular-residual line fit (SVD of the centered
    positions), since epipole errors have no preferred axis. The fit
    residual (RMS perpendicular distance) is stored on the returned
    line.

    Raises:
        InsufficientData: fewer than 2 epipoles.
        SingularGeometry: all positions coincident.
    """
    if len(epipoles) < 2:
        raise InsufficientData(f"need at least 2 epipoles, got {len(epipoles)}")
    pts = np.array([as_pixel(e) for e in epipoles])
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    if singular[0] < 1e-9:
        raise SingularGeometry("all epipoles coincident; horizon direction undefined")
    direction = vt[0]
    perp = centered @ np.array([-direction[1], direction[0]])
    residual = float(np.sqrt(np.mean(perp**2)))
    return HorizonLine(reference=centroid, direction=direction, fit_residual=residual)
