"""
Why range the collision plane instead of stereo depth?
======================================================

Stereo depth error grows with the square of distance: at highway
ranges a short-baseline rig cannot tell where an oncoming car is
heading. The collision-plane decomposition never triangulates depth,
so its heading estimate stays usable as range grows. This demo builds
a 0.15 m baseline rig with an 8 mm lens (10 um pixels), a 0.2 px
detection error, and an object crossing at 50 km/h on a 45 degree
heading, then Monte-Carlos both estimators over range.
"""

import numpy as np

from ttckit import (
    disparity_px,
    orientation_error_sweep,
    preset_approach_45deg,
    stereo_depth_error,
)

model = preset_approach_45deg(pixel_pitch_um=10.0)
print(f"rig: baseline {model.baseline_m} m, focal {model.focal_px:.0f} px, "
      f"detection error {model.detection_error_px} px")
print(f"object: {model.speed_mps * 3.6:.0f} km/h at {model.heading_deg:.0f} deg heading\n")

print("stereo depth error law (quadratic in range):")
print("    Z [m]   disparity [px]   depth error [m]")
for z in (10.0, 20.0, 40.0, 80.0, 160.0):
    print(f"  {z:7.1f}   {disparity_px(model, z):10.2f}   {stereo_depth_error(model, z):12.2f}")

# 12 Hz camera, 8-frame tracks, 120 trials per range
table = orientation_error_sweep(
    model, (10.0, 20.0, 40.0, 80.0), frame_dt=1.0 / 12.0,
    track_frames=8, trials=120, rng_seed=3,
)

print("\nheading error, same pixel noise for both estimators:")
print("    Z [m]   stereo [deg]   collision plane [deg]   TTC error [frames]")
for row in table.rows:
    print(
        f"  {row.z_m:7.1f}   {row.stereo_heading_error_deg:10.2f}"
        f"   {row.plane_heading_error_deg:19.3f}   {row.ttc_error_frames:14.3f}"
    )

print("\nstereo heading collapses past ~20 m while the collision-plane")
print("heading stays within a few degrees: range it by when it arrives,")
print("not by where it is.")
