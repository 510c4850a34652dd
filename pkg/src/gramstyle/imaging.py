"""Image I/O and conversion to and from network input volumes.

Pixel images are ``(H, W, 3)`` uint8 RGB arrays. Network volumes are float
``(3, H, W)`` arrays in the weight file's channel order with its mean pixel
subtracted.
"""

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .vgg import DEFAULT_CHANNEL_ORDER, DEFAULT_MEAN_PIXEL


def load_image(path):
    """Decode a PNG/JPEG into RGB; alpha is composited over white."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("RGBA", "LA") or (im.mode == "P" and "transparency" in im.info):
                im = im.convert("RGBA")
                bg = Image.new("RGBA", im.size, (255, 255, 255, 255))
                im = Image.alpha_composite(bg, im)
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (OSError, UnidentifiedImageError, SyntaxError) as e:
        raise OSError(f"cannot read image {os.fspath(path)}: {e}") from None


def save_image(img, path):
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def check_pixel_image(img, min_side=1):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if min(img.shape[:2]) < min_side:
        raise ValueError(f"image sides must be >= {min_side}, got {img.shape[:2]}")
    return img


def bilinear_resample(arr, width, height):
    """Bilinear resampling of an ``(H, W, ...)`` float array, edge clamped.

    Pixel centres are aligned (half-pixel convention).
    """
    if width < 1 or height < 1:
        raise ValueError("target size must be >= 1")
    arr = np.asarray(arr, dtype=np.float64)
    H, W = arr.shape[:2]

    def axis(n_out, n_in):
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0, n_in - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    y0, y1, wy = axis(height, H)
    x0, x1, wx = axis(width, W)
    extra = (None,) * (arr.ndim - 2)
    wy = wy[(slice(None), None) + extra]
    wx = wx[(None, slice(None)) + extra]
    top = arr[y0][:, x0] * (1 - wx) + arr[y0][:, x1] * wx
    bot = arr[y1][:, x0] * (1 - wx) + arr[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def resize_bilinear(img, width, height):
    img = check_pixel_image(img)
    if img.shape[:2] == (height, width):
        return img.copy()
    out = bilinear_resample(img, width, height)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _order(channel_order):
    if channel_order == "BGR":
        return [2, 1, 0]
    if channel_order == "RGB":
        return [0, 1, 2]
    raise ValueError(f"unknown channel order {channel_order!r}")


def preprocess(img, mean_pixel=DEFAULT_MEAN_PIXEL, channel_order=DEFAULT_CHANNEL_ORDER):
    """RGB ``(H, W, 3)`` pixels -> ``(3, H, W)`` mean-subtracted network input.

    ``mean_pixel`` is given in ``channel_order``.
    """
    img = check_pixel_image(img).astype(np.float64)
    vol = img[:, :, _order(channel_order)].transpose(2, 0, 1)
    return vol - np.asarray(mean_pixel, dtype=np.float64)[:, None, None]


def deprocess(volume, mean_pixel=DEFAULT_MEAN_PIXEL, channel_order=DEFAULT_CHANNEL_ORDER):
    """Inverse of :func:`preprocess`, clamped to [0, 255] and rounded."""
    vol = np.asarray(volume, dtype=np.float64)
    if vol.ndim != 3 or vol.shape[0] != 3:
        raise ValueError(f"expected a (3, H, W) volume, got {vol.shape}")
    vol = vol + np.asarray(mean_pixel, dtype=np.float64)[:, None, None]
    # BGR<->RGB is its own inverse
    img = vol[_order(channel_order)].transpose(1, 2, 0)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)
