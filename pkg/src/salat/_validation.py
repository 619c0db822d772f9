"""Input validation helpers shared across estimators."""

import numpy as np

__all__ = ["check_points", "check_rotation", "as_float_array"]


def as_float_array(x, name="array"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_points(points, dim=None, name="trajectory"):
    """Validate a T x D point array and return it as float64."""
    pts = as_float_array(points, name)
    if pts.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {pts.shape}")
    if pts.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 points, got {pts.shape[0]}")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"{name} has dimension {pts.shape[1]}, expected {dim}")
    return pts


def check_rotation(matrix, dim=None, tol=1e-6):
    """Validate a proper rotation matrix (orthonormal, det +1)."""
    rot = as_float_array(matrix, "rotation")
    if rot.ndim != 2 or rot.shape[0] != rot.shape[1]:
        raise ValueError(f"rotation must be square, got shape {rot.shape}")
    if dim is not None and rot.shape[0] != dim:
        raise ValueError(f"rotation is {rot.shape[0]}x{rot.shape[0]}, expected {dim}x{dim}")
    err = np.linalg.norm(rot.T @ rot - np.eye(rot.shape[0]))
    if err > tol:
        raise ValueError(f"rotation is not orthonormal (||R^T R - I|| = {err:.3g})")
    det = np.linalg.det(rot)
    if abs(det - 1.0) > tol:
        raise ValueError(f"rotation determinant is {det:.9f}, expected +1")
    return rot
