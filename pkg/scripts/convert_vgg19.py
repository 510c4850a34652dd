"""Convert VGG-19 conv weights into a gramstyle weight container.

    python scripts/convert_vgg19.py vgg_conv.pth vgg19_normalized.gsw
    python scripts/convert_vgg19.py weights.npz vgg19.gsw --channel-order RGB --mean 123.68 116.779 103.939

Accepted inputs: ``.npz`` archives or torch state dicts (``.pth``/``.pt``,
needs torch) keyed either ``conv1_1.weight`` / ``conv1_1.bias`` or
torchvision's ``features.<i>.weight``. Kernels must be out x in x 3 x 3.
"""

import argparse
import sys

import numpy as np

from gramstyle.vgg import DEFAULT_MEAN_PIXEL, VGG19_LAYER_NAMES, VGG19_LAYERS, NetworkWeights
from gramstyle.weights_io import save_weights

# torchvision vgg19().features indices of the 16 conv layers
_FEATURE_INDEX = (0, 2, 5, 7, 10, 12, 14, 16, 19, 21, 23, 25, 28, 30, 32, 34)


def read_arrays(path):
    if str(path).endswith(".npz"):
        with np.load(path) as z:
            return {k: np.asarray(z[k]) for k in z.files}
    import torch

    state = torch.load(path, map_location="cpu")
    if hasattr(state, "state_dict"):
        state = state.state_dict()
    return {k: v.detach().cpu().numpy() for k, v in state.items()}


def to_weights(arrays, mean_pixel=DEFAULT_MEAN_PIXEL, channel_order="BGR"):
    if "features.0.weight" in arrays:
        arrays = {f"{n}.{kind}": arrays[f"features.{i}.{kind}"]
                  for n, i in zip(VGG19_LAYER_NAMES, _FEATURE_INDEX) for kind in ("weight", "bias")}
    kernels, biases = {}, {}
    for name in VGG19_LAYER_NAMES:
        for kind, dst in (("weight", kernels), ("bias", biases)):
            key = f"{name}.{kind}"
            if key not in arrays:
                raise KeyError(f"{key} absent from input")
            dst[name] = np.asarray(arrays[key], dtype=np.float32)
    return NetworkWeights(VGG19_LAYERS, kernels, biases, mean_pixel=tuple(mean_pixel), channel_order=channel_order)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--mean", type=float, nargs=3, default=DEFAULT_MEAN_PIXEL,
                   help="mean pixel in the input channel order")
    p.add_argument("--channel-order", choices=("BGR", "RGB"), default="BGR")
    args = p.parse_args(argv)
    weights = to_weights(read_arrays(args.src), args.mean, args.channel_order)
    save_weights(weights, args.dst)
    print(f"wrote {args.dst}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
