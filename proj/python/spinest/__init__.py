"""Table tennis ball spin estimation from trajectories and logo tracks.

Arrays follow the CSV layouts of the command-line tool: trajectories are
(n, 4) arrays of t, x, y, z and logo tracks are (n, 5) arrays of
t, visible, lx, ly, lz.
"""

from ._spinest import (
    PhysicalConstants,
    SpinestError,
    bat_pitch,
    bounce_benchmark,
    bounce_point,
    cluster_classify,
    estimate_spin,
    estimate_spin_logo,
    geodesic_matrix,
    geodesic_quat,
    make_settings,
    predict_bounce,
    segment_area,
    segment_centroid_offset,
    segment_half_angle,
    simulate_logo,
    simulate_trajectory,
)

# Errors carry (kind, message); kind is e.g. "insufficient-data".
SpinestError.kind = property(lambda self: self.args[0])

__all__ = [
    "PhysicalConstants",
    "SpinestError",
    "bat_pitch",
    "bounce_benchmark",
    "bounce_point",
    "cluster_classify",
    "estimate_spin",
    "estimate_spin_logo",
    "geodesic_matrix",
    "geodesic_quat",
    "make_settings",
    "predict_bounce",
    "segment_area",
    "segment_centroid_offset",
    "segment_half_angle",
    "simulate_logo",
    "simulate_trajectory",
]
