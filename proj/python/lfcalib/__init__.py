"""Multi-projection-center light-field camera model and calibration."""

from ._core import (  # noqa: F401
    Distortion,
    Intrinsics,
    LfcalibError,
    Ray,
    __version__,
    calibrate,
    decode,
    distort,
    encode,
    evaluate,
    intersect_two_rays,
    p_from_intrinsics,
    project,
    rodrigues,
    rodrigues_inv,
    simulate,
    triangulate,
    undistort,
)
