"""Style statistics and their vector-Jacobian products.

Every statistic is an unnormalized sum over grid positions. For each one there
is a forward function returning the value and a ``*_vjp`` function that, given
an upstream array ``U`` shaped like the value, returns the gradient of
``<U, value>`` with respect to each input volume.

Inputs are activation volumes of shape ``(K, X, Y)``. Where two volumes meet,
the second one (``Fk`` / ``Fc``) lives on a grid that divides the first one's
and is nearest-upsampled onto it.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .tensor_core import (
    as_volume,
    block_sum_downsample,
    blur_n,
    flatten,
    nearest_upsample,
    scale_factors,
    spatial_shift,
)


class Variant(str, Enum):
    PLAIN = "PlainGram"
    SHIFTED = "ShiftedGram"
    INTERLAYER = "InterLayer"
    ADJACENT = "AdjacentInterLayer"
    AMPLIFIED = "Amplified"
    CONTENT_AWARE = "ContentAware"
    CUBE = "GramCube"


# row index of the 3x3 block is dx + 1, column index is dy + 1
OFFSETS = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1))


@dataclass
class GramStatistic:
    variant: Variant
    layers: tuple
    value: np.ndarray
    blur_count: int = 0


def _check_upstream(U, shape):
    U = np.asarray(U)
    if U.shape != tuple(shape):
        raise ValueError(f"upstream has shape {U.shape}, expected {tuple(shape)}")
    return U


# -- same-layer Gram ---------------------------------------------------------

def shifted_gram(F, s=0.0):
    """(F + s)(F + s)^T with F linearized to K x (X*Y)."""
    A = flatten(as_volume(F)) + s
    return A @ A.T


def shifted_gram_vjp(F, s, U):
    F = as_volume(F)
    U = _check_upstream(U, (F.shape[0], F.shape[0]))
    A = flatten(F) + s
    return ((U + U.T) @ A).reshape(F.shape)


# -- inter-layer Gram --------------------------------------------------------

def _aligned(Fl, Fk, blur_count):
    fx, fy = scale_factors(Fl.shape, Fk.shape)
    return blur_n(nearest_upsample(Fk, fx, fy), blur_count), (fx, fy)


def interlayer_gram(Fl, Fk, blur_count=0):
    """Fl [blur^n(up(Fk))]^T, a K_l x K_k matrix."""
    Fl, Fk = as_volume(Fl, "Fl"), as_volume(Fk, "Fk")
    V, _ = _aligned(Fl, Fk, blur_count)
    return flatten(Fl) @ flatten(V).T


def interlayer_gram_vjp(Fl, Fk, blur_count, U):
    Fl, Fk = as_volume(Fl, "Fl"), as_volume(Fk, "Fk")
    U = _check_upstream(U, (Fl.shape[0], Fk.shape[0]))
    V, (fx, fy) = _aligned(Fl, Fk, blur_count)
    dFl = (U @ flatten(V)).reshape(Fl.shape)
    dV = (U.T @ flatten(Fl)).reshape(V.shape)
    # adjoint chain: blur is self-adjoint, block sum is the adjoint of up
    dFk = block_sum_downsample(blur_n(dV, blur_count), fx, fy)
    return dFl, dFk


# -- adjacent-offset inter-layer Gram ----------------------------------------

def adjacent_gram(Fl, Fk, blur_count=0):
    """3 x 3 x K_l x K_k block of Fl shift(V, dx, dy)^T over offsets in {-1,0,1}^2."""
    Fl, Fk = as_volume(Fl, "Fl"), as_volume(Fk, "Fk")
    V, _ = _aligned(Fl, Fk, blur_count)
    A = flatten(Fl)
    out = np.empty((3, 3, Fl.shape[0], Fk.shape[0]), dtype=np.result_type(Fl, Fk))
    for dx, dy in OFFSETS:
        out[dx + 1, dy + 1] = A @ flatten(spatial_shift(V, dx, dy)).T
    return out


def adjacent_gram_vjp(Fl, Fk, blur_count, U):
    Fl, Fk = as_volume(Fl, "Fl"), as_volume(Fk, "Fk")
    U = _check_upstream(U, (3, 3, Fl.shape[0], Fk.shape[0]))
    V, (fx, fy) = _aligned(Fl, Fk, blur_count)
    A = flatten(Fl)
    dA = np.zeros_like(A, dtype=np.result_type(A, U))
    dV = np.zeros(V.shape, dtype=dA.dtype)
    for dx, dy in OFFSETS:
        u = U[dx + 1, dy + 1]
        dA += u @ flatten(spatial_shift(V, dx, dy))
        dV += spatial_shift((u.T @ A).reshape(V.shape), -dx, -dy)
    dFk = block_sum_downsample(blur_n(dV, blur_count), fx, fy)
    return dA.reshape(Fl.shape), dFk


# -- amplified Gram ----------------------------------------------------------

def _power(F, p):
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    if float(p) != int(p) and np.any(F < 0):
        raise ValueError("non-integer exponent on negative activations")
    return np.power(F, p)


def amplified_gram(F, p):
    F = as_volume(F)
    A = flatten(_power(F, p))
    return A @ A.T


def amplified_gram_vjp(F, p, U):
    F = as_volume(F)
    U = _check_upstream(U, (F.shape[0], F.shape[0]))
    A = flatten(_power(F, p))
    dA = (U + U.T) @ A
    return (dA * (p * np.power(flatten(F), p - 1))).reshape(F.shape)


# -- content-aware Gram ------------------------------------------------------

def content_aware_gram(Fl, Fc):
    """value[k, i, j] = sum over positions of Fl_i * Fl_j * Fc_k.

    ``Fc`` must already sit on ``Fl``'s grid.
    """
    Fl, Fc = as_volume(Fl, "Fl"), as_volume(Fc, "Fc")
    if Fl.shape[1:] != Fc.shape[1:]:
        raise ValueError(f"content volume grid {Fc.shape[1:]} differs from style grid {Fl.shape[1:]}")
    A, C = flatten(Fl), flatten(Fc)
    out = np.empty((C.shape[0], A.shape[0], A.shape[0]), dtype=np.result_type(A, C))
    for k in range(C.shape[0]):
        out[k] = (A * C[k]) @ A.T
    return out


def content_aware_gram_vjp(Fl, Fc, U):
    Fl, Fc = as_volume(Fl, "Fl"), as_volume(Fc, "Fc")
    if Fl.shape[1:] != Fc.shape[1:]:
        raise ValueError(f"content volume grid {Fc.shape[1:]} differs from style grid {Fl.shape[1:]}")
    A, C = flatten(Fl), flatten(Fc)
    U = _check_upstream(U, (C.shape[0], A.shape[0], A.shape[0]))
    dA = np.zeros_like(A, dtype=np.result_type(A, U))
    dC = np.empty_like(C, dtype=dA.dtype)
    for k in range(C.shape[0]):
        Us = U[k] + U[k].T
        dA += (Us @ A) * C[k]
        dC[k] = ((U[k] @ A) * A).sum(axis=0)
    return dA.reshape(Fl.shape), dC.reshape(Fc.shape)


# -- Gram cube ---------------------------------------------------------------

def gram_cube(F):
    """value[k, i, j] = sum over positions of F_i * F_j * F_k."""
    F = as_volume(F)
    return content_aware_gram(F, F)


def gram_cube_vjp(F, U):
    dA, dC = content_aware_gram_vjp(F, F, U)
    return dA + dC


# -- dispatch ----------------------------------------------------------------

def compute_statistic(variant, inputs, layers=(), shift=0.0, blur_count=0, power=1.0):
    """Evaluate ``variant`` on ``inputs`` and wrap it as a :class:`GramStatistic`.

    ``inputs`` is ``(F,)`` for single-volume variants and ``(Fl, Fk)`` or
    ``(Fl, Fc)`` for two-volume ones. ``shift`` applies to ShiftedGram only;
    callers shift other variants' inputs themselves.
    """
    variant = Variant(variant)
    if variant is Variant.PLAIN:
        value = shifted_gram(inputs[0], 0.0)
    elif variant is Variant.SHIFTED:
        value = shifted_gram(inputs[0], shift)
    elif variant is Variant.INTERLAYER:
        value = interlayer_gram(inputs[0], inputs[1], blur_count)
    elif variant is Variant.ADJACENT:
        value = adjacent_gram(inputs[0], inputs[1], blur_count)
    elif variant is Variant.AMPLIFIED:
        value = amplified_gram(inputs[0], power)
    elif variant is Variant.CONTENT_AWARE:
        value = content_aware_gram(inputs[0], inputs[1])
    else:
        value = gram_cube(inputs[0])
    return GramStatistic(variant, tuple(layers), value, blur_count)


def statistic_vjp(variant, inputs, upstream, shift=0.0, blur_count=0, power=1.0):
    """Gradients of ``<upstream, value>`` w.r.t. each entry of ``inputs``.

    Always returns a tuple with one array per input volume.
    """
    variant = Variant(variant)
    if variant is Variant.PLAIN:
        return (shifted_gram_vjp(inputs[0], 0.0, upstream),)
    if variant is Variant.SHIFTED:
        return (shifted_gram_vjp(inputs[0], shift, upstream),)
    if variant is Variant.INTERLAYER:
        return interlayer_gram_vjp(inputs[0], inputs[1], blur_count, upstream)
    if variant is Variant.ADJACENT:
        return adjacent_gram_vjp(inputs[0], inputs[1], blur_count, upstream)
    if variant is Variant.AMPLIFIED:
        return (amplified_gram_vjp(inputs[0], power, upstream),)
    if variant is Variant.CONTENT_AWARE:
        return content_aware_gram_vjp(inputs[0], inputs[1], upstream)
    return (gram_cube_vjp(inputs[0], upstream),)
