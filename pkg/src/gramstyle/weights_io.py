"""Binary container for conv-trunk weights.

Layout::

    8 bytes   magic b"GSVGGW01"
    4 bytes   little-endian uint32, manifest length N
    N bytes   UTF-8 JSON manifest
    P bytes   raw little-endian payload
    4 bytes   little-endian uint32, CRC32 of the payload

The manifest is an object::

    {
      "architecture": "vgg19",
      "mean_pixel": [104.006, 116.669, 122.679],
      "channel_order": "BGR",
      "entries": [
        {"name": "conv1_1", "kind": "kernel", "shape": [64, 3, 3, 3],
         "dtype": "f32", "byte_offset": 0, "byte_length": 6912},
        ...
      ]
    }

``byte_offset`` is relative to the start of the payload. Kernels are stored
out x in x 3 x 3 for cross-correlation (no flip). Containers for other
architectures add a ``"layers"`` list of ``{name, in_channels, out_channels,
pool_after}`` objects; ``"vgg19"`` containers are always checked against the
fixed VGG-19 table.
"""

import io
import json
import os
import struct
import zlib

import numpy as np

from .vgg import VGG19_LAYERS, LayerSpec, NetworkWeights

MAGIC = b"GSVGGW01"
_DTYPES = {"f32": np.dtype("<f4")}


class WeightFormatError(ValueError):
    pass


def _read_source(source):
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source.read()
    raise TypeError(f"cannot read weights from {type(source).__name__}")


def load_weights(source, layers=None):
    """Parse a container (path, bytes or binary file object) into weights.

    Every layer in ``layers`` (by default the architecture the manifest
    declares) must be present with exactly the declared shape.
    """
    blob = _read_source(source)
    if len(blob) < len(MAGIC) + 8 or blob[:8] != MAGIC:
        raise WeightFormatError("bad magic: not a weight container")
    (mlen,) = struct.unpack_from("<I", blob, 8)
    start = 12 + mlen
    if start + 4 > len(blob):
        raise WeightFormatError("truncated container: manifest overruns file")
    try:
        manifest = json.loads(blob[12:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise WeightFormatError(f"unreadable manifest: {e}") from None
    payload = blob[start:-4]
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise WeightFormatError("payload checksum mismatch")

    if layers is None:
        layers = _manifest_layers(manifest)
    arrays = {}
    for entry in manifest.get("entries", []):
        name, kind = entry.get("name"), entry.get("kind")
        if kind not in ("kernel", "bias"):
            raise WeightFormatError(f"{name}: unknown entry kind {kind!r}")
        dtype = _DTYPES.get(entry.get("dtype"))
        if dtype is None:
            raise WeightFormatError(f"{name} {kind}: unsupported dtype {entry.get('dtype')!r}")
        shape = tuple(entry["shape"])
        off, length = entry["byte_offset"], entry["byte_length"]
        if length != int(np.prod(shape)) * dtype.itemsize or off < 0 or off + length > len(payload):
            raise WeightFormatError(f"{name} {kind}: byte range inconsistent with shape {shape}")
        arr = np.frombuffer(payload, dtype=dtype, count=int(np.prod(shape)), offset=off)
        arrays[(name, kind)] = arr.reshape(shape).astype(np.float32)

    kernels, biases = {}, {}
    for spec in layers:
        if (spec.name, "kernel") not in arrays:
            raise WeightFormatError(f"{spec.name} absent")
        if (spec.name, "bias") not in arrays:
            raise WeightFormatError(f"{spec.name} bias absent")
        k = arrays[(spec.name, "kernel")]
        b = arrays[(spec.name, "bias")]
        want = (spec.out_channels, spec.in_channels, 3, 3)
        if k.shape != want:
            raise WeightFormatError(f"{spec.name} kernel shape {k.shape}, expected {want}")
        if b.shape != (spec.out_channels,):
            raise WeightFormatError(f"{spec.name} bias shape {b.shape}, expected ({spec.out_channels},)")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(b))):
            raise WeightFormatError(f"{spec.name} contains non-finite values")
        kernels[spec.name] = k
        biases[spec.name] = b

    mean = tuple(float(v) for v in manifest.get("mean_pixel", (104.006, 116.669, 122.679)))
    order = manifest.get("channel_order", "BGR")
    return NetworkWeights(layers, kernels, biases, mean_pixel=mean, channel_order=order,
                          extra={"architecture": manifest.get("architecture")})


def _manifest_layers(manifest):
    arch = manifest.get("architecture", "vgg19")
    if arch == "vgg19":
        return VGG19_LAYERS
    table = manifest.get("layers")
    if not table:
        raise WeightFormatError(f"architecture {arch!r} needs a layer table")
    return tuple(LayerSpec(l["name"], i, l["in_channels"], l["out_channels"], bool(l.get("pool_after")))
                 for i, l in enumerate(table, start=1))


def dump_weights(weights, architecture="vgg19"):
    """Serialize ``weights`` into container bytes."""
    entries = []
    chunks = []
    offset = 0
    for spec in weights.layers:
        for kind, arr in (("kernel", weights.kernels[spec.name]), ("bias", weights.biases[spec.name])):
            raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
            entries.append({
                "name": spec.name,
                "kind": kind,
                "shape": list(arr.shape),
                "dtype": "f32",
                "byte_offset": offset,
                "byte_length": len(raw),
            })
            chunks.append(raw)
            offset += len(raw)
    manifest = {
        "architecture": architecture,
        "mean_pixel": list(weights.mean_pixel),
        "channel_order": weights.channel_order,
        "entries": entries,
    }
    if architecture != "vgg19":
        manifest["layers"] = [
            {"name": l.name, "in_channels": l.in_channels, "out_channels": l.out_channels,
             "pool_after": l.pool_after} for l in weights.layers
        ]
    mbytes = json.dumps(manifest).encode("utf-8")
    payload = b"".join(chunks)
    return b"".join([
        MAGIC,
        struct.pack("<I", len(mbytes)),
        mbytes,
        payload,
        struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF),
    ])


def save_weights(weights, path, architecture="vgg19"):
    data = dump_weights(weights, architecture)
    with open(path, "wb") as fh:
        fh.write(data)
