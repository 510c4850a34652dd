"""VGG-19 convolutional trunk in plain numpy.

Only the 16 conv layers (conv1_1 .. conv5_4) exist here. The forward pass
records every post-ReLU volume; the backward pass takes gradients injected at
any subset of those layers and pulls them back to the input pixels. Weights
are fixed, so no parameter gradients are ever formed.

Convolution uses the cross-correlation convention (no kernel flip), stride 1
and zero padding 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .tensor_core import as_volume


@dataclass(frozen=True)
class LayerSpec:
    name: str
    index: int
    in_channels: int
    out_channels: int
    pool_after: bool = False


def _vgg19_specs():
    blocks = [(64, 2), (128, 2), (256, 4), (512, 4), (512, 4)]
    specs = []
    in_ch = 3
    index = 1
    for b, (ch, n) in enumerate(blocks, start=1):
        for i in range(1, n + 1):
            # no pooling after conv5_4: nothing downstream consumes it
            pool = i == n and b < 5
            specs.append(LayerSpec(f"conv{b}_{i}", index, in_ch, ch, pool))
            in_ch = ch
            index += 1
    return tuple(specs)


VGG19_LAYERS = _vgg19_specs()
VGG19_LAYER_NAMES = tuple(s.name for s in VGG19_LAYERS)

# Normalized VGG-19 training mean in BGR order. Containers carry their own
# value; this is only the fallback.
DEFAULT_MEAN_PIXEL = (104.006, 116.669, 122.679)
DEFAULT_CHANNEL_ORDER = "BGR"


@dataclass
class NetworkWeights:
    """Kernels (out, in, 3, 3) and biases (out,) for an ordered list of layers."""

    layers: tuple
    kernels: dict
    biases: dict
    mean_pixel: tuple = DEFAULT_MEAN_PIXEL
    channel_order: str = DEFAULT_CHANNEL_ORDER
    pooling: str = "avg"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.layers = tuple(self.layers)
        if self.pooling not in ("avg", "max"):
            raise ValueError(f"pooling must be 'avg' or 'max', got {self.pooling!r}")
        for spec in self.layers:
            if spec.name not in self.kernels:
                raise ValueError(f"{spec.name} absent")
            k = self.kernels[spec.name]
            expected = (spec.out_channels, spec.in_channels, 3, 3)
            if k.shape != expected:
                raise ValueError(f"{spec.name} kernel has shape {k.shape}, expected {expected}")
            b = self.biases.get(spec.name)
            if b is None or b.shape != (spec.out_channels,):
                raise ValueError(f"{spec.name} bias missing or misshaped")
            if not (np.all(np.isfinite(k)) and np.all(np.isfinite(b))):
                raise ValueError(f"{spec.name} has non-finite weights")

    @property
    def layer_names(self):
        return tuple(s.name for s in self.layers)

    @property
    def dtype(self):
        return self.kernels[self.layers[0].name].dtype

    def spec(self, name):
        for s in self.layers:
            if s.name == name:
                return s
        raise KeyError(name)

    def astype(self, dtype):
        return NetworkWeights(
            self.layers,
            {k: v.astype(dtype) for k, v in self.kernels.items()},
            {k: v.astype(dtype) for k, v in self.biases.items()},
            self.mean_pixel,
            self.channel_order,
            self.pooling,
            dict(self.extra),
        )


def conv3x3_forward(F, kernel, bias):
    F = as_volume(F)
    kernel = np.asarray(kernel)
    bias = np.asarray(bias)
    C, X, Y = F.shape
    if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise ValueError(f"kernel must be (out, in, 3, 3), got {kernel.shape}")
    if kernel.shape[1] != C:
        raise ValueError(f"input has {C} channels, kernel expects {kernel.shape[1]}")
    O = kernel.shape[0]
    dtype = np.result_type(F.dtype, kernel.dtype)
    P = np.zeros((C, X + 2, Y + 2), dtype=dtype)
    P[:, 1:-1, 1:-1] = F
    out = np.empty((O, X * Y), dtype=dtype)
    out[:] = bias.astype(dtype)[:, None]
    for i in range(3):
        for j in range(3):
            out += kernel[:, :, i, j].astype(dtype) @ P[:, i:i + X, j:j + Y].reshape(C, -1)
    return out.reshape(O, X, Y)


def conv3x3_backward_input(G, kernel):
    """Gradient w.r.t. the conv input given gradient ``G`` w.r.t. its output."""
    O, X, Y = G.shape
    C = kernel.shape[1]
    P = np.zeros((O, X + 2, Y + 2), dtype=G.dtype)
    P[:, 1:-1, 1:-1] = G
    out = np.zeros((C, X * Y), dtype=G.dtype)
    for i in range(3):
        for j in range(3):
            # forward read input at offset (i-1, j-1); adjoint reads the
            # output gradient at the opposite offset
            out += kernel[:, :, i, j].T.astype(G.dtype) @ P[:, 2 - i:2 - i + X, 2 - j:2 - j + Y].reshape(O, -1)
    return out.reshape(C, X, Y)


def _pool_forward(F, mode):
    K, X, Y = F.shape
    blocks = F.reshape(K, X // 2, 2, Y // 2, 2)
    if mode == "avg":
        return blocks.mean(axis=(2, 4))
    return blocks.max(axis=(2, 4))


def _pool_backward(G, F, mode):
    """Route pooled-output gradient ``G`` back onto the pre-pool volume ``F``."""
    up = np.repeat(np.repeat(G, 2, axis=1), 2, axis=2)
    if mode == "avg":
        return up * 0.25
    K, X, Y = F.shape
    blocks = F.reshape(K, X // 2, 2, Y // 2, 2).transpose(0, 1, 3, 2, 4).reshape(K, X // 2, Y // 2, 4)
    # first maximal cell in each block takes the gradient
    winner = blocks.argmax(axis=-1)
    onehot = np.eye(4, dtype=G.dtype)[winner]
    onehot = onehot.reshape(K, X // 2, Y // 2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(K, X, Y)
    return up * onehot


def forward_record(image, weights, upto=None):
    """Run the trunk on a preprocessed ``(3, X, Y)`` image.

    Returns a dict mapping layer name to its post-ReLU activation volume. With
    ``upto`` set, the pass stops after that layer.
    """
    image = as_volume(image, "image")
    _, X, Y = image.shape
    n_pool = sum(s.pool_after for s in weights.layers)
    div = 2 ** n_pool
    if X % div or Y % div:
        raise ValueError(f"image size {X}x{Y} must be divisible by {div}")
    if upto is not None and upto not in weights.layer_names:
        raise ValueError(f"unknown layer {upto!r}")
    acts = {}
    h = image.astype(weights.dtype, copy=False)
    for spec in weights.layers:
        h = conv3x3_forward(h, weights.kernels[spec.name], weights.biases[spec.name])
        np.maximum(h, 0, out=h)
        acts[spec.name] = h
        if spec.name == upto:
            break
        if spec.pool_after:
            h = _pool_forward(h, weights.pooling)
    return acts


def backward_inject(acts, grads, weights):
    """Pull gradients injected at conv layers back to the input pixels.

    ``grads`` maps layer names to volumes shaped like the recorded
    activations. The result is the gradient of ``sum_l <grads[l], acts[l]>``
    with respect to the image, linearized at the recorded pass.
    """
    names = weights.layer_names
    for name, g in grads.items():
        if name not in acts:
            raise ValueError(f"gradient given for unrecorded layer {name!r}")
        if np.shape(g) != acts[name].shape:
            raise ValueError(f"gradient for {name} has shape {np.shape(g)}, expected {acts[name].shape}")
    deepest = max((names.index(n) for n in grads), default=-1)
    first = weights.layers[0]
    if deepest < 0:
        X, Y = acts[first.name].shape[1:]
        return np.zeros((first.in_channels, X, Y), dtype=acts[first.name].dtype)

    g_in = None
    for spec in reversed(weights.layers[:deepest + 1]):
        a = acts[spec.name]
        g = None
        if g_in is not None:
            g = _pool_backward(g_in, a, weights.pooling) if spec.pool_after else g_in
        if spec.name in grads:
            inj = np.asarray(grads[spec.name], dtype=a.dtype)
            g = inj.copy() if g is None else g + inj
        if g is None:
            g_in = None
            continue
        g = g * (a > 0)
        g_in = conv3x3_backward_input(g, weights.kernels[spec.name])
    return g_in


def toy_network(seed=0, channels=(3, 4, 2), pool_after=(False, True, False), pooling="avg", dtype=np.float64):
    """Small random trunk with VGG-style layer names for desk-scale checks.

    Kernels and biases are drawn uniformly from [-1, 1]. Layer ``i`` of block
    ``b`` is named ``conv{b}_{i}``; a new block starts after every pooling.
    """
    if not 2 <= len(channels) <= 3 or max(channels) > 4:
        raise ValueError("toy networks have 2-3 layers with at most 4 channels")
    rng = np.random.default_rng(seed)
    specs, kernels, biases = [], {}, {}
    block, pos, in_ch = 1, 1, 3
    for idx, (ch, pool) in enumerate(zip(channels, pool_after), start=1):
        name = f"conv{block}_{pos}"
        specs.append(LayerSpec(name, idx, in_ch, ch, pool))
        kernels[name] = rng.uniform(-1, 1, size=(ch, in_ch, 3, 3)).astype(dtype)
        biases[name] = rng.uniform(-1, 1, size=ch).astype(dtype)
        in_ch = ch
        if pool:
            block, pos = block + 1, 1
        else:
            pos += 1
    return NetworkWeights(tuple(specs), kernels, biases, mean_pixel=(0.0, 0.0, 0.0), pooling=pooling)
