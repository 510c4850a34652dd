import importlib.util
from pathlib import Path

import numpy as np
import pytest

from gramstyle.weights_io import load_weights

SCRIPT = Path(__file__).resolve().parents[1] / "scripts" / "convert_vgg19.py"


@pytest.fixture(scope="module")
def convert():
    spec = importlib.util.spec_from_file_location("convert_vgg19", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def _arrays(random_vgg, torchvision_keys=False):
    out = {}
    for i, name in enumerate(random_vgg.layer_names):
        prefix = f"features.{(0, 2, 5, 7, 10, 12, 14, 16, 19, 21, 23, 25, 28, 30, 32, 34)[i]}" \
            if torchvision_keys else name
        out[f"{prefix}.weight"] = random_vgg.kernels[name]
        out[f"{prefix}.bias"] = random_vgg.biases[name]
    return out


@pytest.mark.parametrize("torchvision_keys", [False, True])
def test_npz_roundtrip(convert, random_vgg, tmp_path, torchvision_keys):
    src = tmp_path / "w.npz"
    np.savez(src, **_arrays(random_vgg, torchvision_keys))
    dst = tmp_path / "w.gsw"
    assert convert.main([str(src), str(dst), "--channel-order", "RGB", "--mean", "1", "2", "3"]) == 0
    w = load_weights(dst)
    assert w.channel_order == "RGB" and w.mean_pixel == (1.0, 2.0, 3.0)
    for name in random_vgg.layer_names:
        np.testing.assert_array_equal(w.kernels[name], random_vgg.kernels[name])
        np.testing.assert_array_equal(w.biases[name], random_vgg.biases[name])


def test_missing_layer(convert, random_vgg):
    arrays = _arrays(random_vgg)
    del arrays["conv3_2.bias"]
    with pytest.raises(KeyError, match="conv3_2.bias"):
        convert.to_weights(arrays)
