"""
Time-to-collision from a single tracked point
=============================================

A camera drives toward a point that will pass one meter to its left.
From nothing but the point's pixel track and the epipole, the toolkit
recovers how many frames remain until the point's collision plane
sweeps the camera, and by how much the point will miss.
"""

import numpy as np

from ttckit import (
    CameraIntrinsics,
    Scenario,
    SceneObject,
    collision_estimate,
    simulate,
)

# a hand-checkable setup: point at (1, 0, 10) meters, closing at 1 m per
# frame straight along the optical axis
intrinsics = CameraIntrinsics(
    focal_px=800.0, principal_point=(0.0, 0.0), allow_off_center=True
)
point = SceneObject(
    "point", np.array([[1.0, 0.0, 10.0]]), np.array([0.0, 0.0, -1.0])
)
scenario = Scenario(
    intrinsics=intrinsics,
    objects=(point,),
    camera_velocity=np.zeros(3),
    frame_count=6,
)
tracks, truth = simulate(scenario)
track = tracks[0]
pt = truth.points[0]

print("pixel track (u, v) per frame:")
for frame, (u, v) in zip(track.frames, track.positions):
    print(f"  frame {frame}: ({u:10.4f}, {v:7.4f})")

# head-on relative motion puts the epipole at the principal point
epipole = np.asarray(pt.epipole)
print(f"\nepipole: ({epipole[0]:.1f}, {epipole[1]:.1f})")
print(f"ground truth: k0 = {pt.k0:.3f} frames, H = {pt.H:.3f}, label = {pt.label.value}")

# estimate from each consecutive pair: the collision count k falls by
# exactly one per frame while the lateral miss H stays fixed
print("\npair   k (frames left)   H (per-frame units)")
for pair in range(len(track) - 1):
    est = collision_estimate(track, epipole, intrinsics, pair_index=pair)
    print(f"  {pair}        {est.k:8.4f}         {est.H:8.4f}")

est = collision_estimate(track, epipole, intrinsics)
print(f"\nreconstructed 3D point (per-frame units): {np.round(est.point, 6)}")
print("k counts planes swept, so the point passes abeam in k frames;")
print("H = 1.0 means the miss equals one frame of relative displacement.")
