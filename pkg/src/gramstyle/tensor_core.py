"""Spatial operators on activation volumes.

An activation volume is a numpy array of shape ``(K, X, Y)``: ``K`` channels
over an ``X`` by ``Y`` grid. Axis 1 is ``x`` and axis 2 is ``y``. Everything
here is a pure function returning a new array.
"""

import numpy as np


def as_volume(F, name="volume"):
    F = np.asarray(F)
    if F.ndim != 3:
        raise ValueError(f"{name} must have shape (channels, X, Y), got {F.shape}")
    if not np.issubdtype(F.dtype, np.floating):
        F = F.astype(np.float64)
    return F


def inner(A, B):
    """Frobenius inner product <A, B>."""
    return float(np.vdot(np.ravel(A), np.ravel(B)))


def matmul(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("matmul expects two matrices")
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"inner dimensions disagree: {A.shape} x {B.shape}")
    return A @ B


def flatten(F):
    """Linearize a (K, X, Y) volume into a K x (X*Y) matrix."""
    return F.reshape(F.shape[0], -1)


def _check_factors(fx, fy):
    if int(fx) != fx or int(fy) != fy or fx < 1 or fy < 1:
        raise ValueError(f"scale factors must be positive integers, got ({fx}, {fy})")
    return int(fx), int(fy)


def nearest_upsample(F, fx, fy):
    """Replicate every cell into an ``fx`` by ``fy`` block."""
    F = as_volume(F)
    fx, fy = _check_factors(fx, fy)
    if fx == 1 and fy == 1:
        return F.copy()
    return np.repeat(np.repeat(F, fx, axis=1), fy, axis=2)


def block_sum_downsample(F, fx, fy):
    """Sum over non-overlapping ``fx`` by ``fy`` blocks.

    This is the adjoint of :func:`nearest_upsample` with the same factors.
    """
    F = as_volume(F)
    fx, fy = _check_factors(fx, fy)
    K, X, Y = F.shape
    if X % fx or Y % fy:
        raise ValueError(f"grid {X}x{Y} is not divisible by factors ({fx}, {fy})")
    if fx == 1 and fy == 1:
        return F.copy()
    return F.reshape(K, X // fx, fx, Y // fy, fy).sum(axis=(2, 4))


def box_blur(F):
    """3x3 mean filter with zero padding (self-adjoint)."""
    F = as_volume(F)
    K, X, Y = F.shape
    P = np.zeros((K, X + 2, Y + 2), dtype=F.dtype)
    P[:, 1:-1, 1:-1] = F
    # separable: sum along x, then along y
    rows = P[:, :-2, :] + P[:, 1:-1, :] + P[:, 2:, :]
    out = rows[:, :, :-2] + rows[:, :, 1:-1] + rows[:, :, 2:]
    return out / 9.0


def blur_n(F, count):
    for _ in range(count):
        F = box_blur(F)
    return F


def spatial_shift(F, dx, dy):
    """out[k, x, y] = F[k, x + dx, y + dy], zero where that falls outside."""
    F = as_volume(F)
    K, X, Y = F.shape
    out = np.zeros_like(F)
    dx, dy = int(dx), int(dy)
    if abs(dx) >= X or abs(dy) >= Y:
        return out
    xs_out = slice(max(0, -dx), X - max(0, dx))
    xs_in = slice(max(0, dx), X - max(0, -dx))
    ys_out = slice(max(0, -dy), Y - max(0, dy))
    ys_in = slice(max(0, dy), Y - max(0, -dy))
    out[:, xs_out, ys_out] = F[:, xs_in, ys_in]
    return out


def scale_factors(big_shape, small_shape):
    """Integer factors mapping a small grid onto a big one."""
    X, Y = big_shape[-2:]
    x, y = small_shape[-2:]
    if x == 0 or y == 0 or X % x or Y % y:
        raise ValueError(f"grid {x}x{y} does not divide grid {X}x{Y}")
    return X // x, Y // y
