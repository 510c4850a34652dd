"""scikit-learn style front end.

>>> st = StyleTransfer(method="ChainBlurred", weights="vgg19.gsw")
>>> st.fit(style_pixels)               # captures the style statistics
>>> out = st.transform(content_pixels) # optimizes from the content image

Images are ``(H, W, 3)`` uint8 RGB arrays. ``fit_transform(X)`` uses ``X`` as
both style and content, which is the fixed point of the objective.
"""

import os

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import MethodConfig, build_method_config
from .imaging import check_pixel_image, deprocess, preprocess, resize_bilinear
from .loss import StyleObjective, content_target, style_target
from .optimize import gd_run, lbfgs_run
from .vgg import NetworkWeights
from .weights_io import load_weights


def _resolve_weights(weights, dtype):
    if weights is None:
        raise ValueError("no network weights given")
    if isinstance(weights, NetworkWeights):
        net = weights
    elif isinstance(weights, (str, os.PathLike)):
        if not os.path.exists(weights):
            raise FileNotFoundError(f"weight file not found: {os.fspath(weights)}")
        net = load_weights(weights)
    else:
        raise TypeError(f"cannot use {type(weights).__name__} as network weights")
    return net.astype(dtype) if net.dtype != np.dtype(dtype) else net


class StyleTransfer(TransformerMixin, BaseEstimator):
    """Gram-statistic style transfer.

    Parameters
    ----------
    method : str
        Preset name (see ``gramstyle.config.METHODS``). Ignored if ``config``
        is given.
    config : MethodConfig, dict or path, optional
        Full method configuration; JSON files follow the schema in
        ``gramstyle.config``.
    weights : NetworkWeights or path
        Conv trunk weights, or a weight container file.
    style_weight, shift, iterations, image_size : optional overrides
        Replace the matching config fields when not None.
    content_layer : str, optional
        Hub/content layer for networks without ``conv4_2``.
    memory : int
        L-BFGS history length.
    optimizer : {"auto", "lbfgs", "gd"}
        "auto" picks gradient descent for masked configs and L-BFGS otherwise.
    gd_step : float, optional
        Fixed descent step. Defaults to the step that moves the largest
        pixel gradient component by one unit on the first iteration.
    callback : callable, optional
        ``callback(iteration, parts, volume)`` after each accepted iterate,
        and once with iteration 0 before optimizing.
    dtype : str
        Precision of the network pass ("float32" or "float64").
    """

    def __init__(self, method="ChainBlurred", config=None, weights=None, style_weight=None,
                 shift=None, iterations=None, image_size=None, content_layer=None, memory=10,
                 optimizer="auto", gd_step=None, callback=None, dtype="float32"):
        self.method = method
        self.config = config
        self.weights = weights
        self.style_weight = style_weight
        self.shift = shift
        self.iterations = iterations
        self.image_size = image_size
        self.content_layer = content_layer
        self.memory = memory
        self.optimizer = optimizer
        self.gd_step = gd_step
        self.callback = callback
        self.dtype = dtype

    def _build_config(self, net):
        overrides = {"style_weight": self.style_weight, "shift": self.shift,
                     "iterations": self.iterations, "image_size": self.image_size}
        overrides = {k: v for k, v in overrides.items() if v is not None}
        cfg = self.config
        if cfg is None:
            return build_method_config(self.method, overrides, layers=net.layer_names,
                                       content_layer=self.content_layer)
        if isinstance(cfg, (str, os.PathLike)):
            with open(cfg) as fh:
                cfg = MethodConfig.from_json(fh.read(), net.layer_names)
        elif isinstance(cfg, dict):
            cfg = MethodConfig.from_dict(cfg, net.layer_names)
        elif not isinstance(cfg, MethodConfig):
            raise TypeError("config must be a MethodConfig, dict or JSON path")
        if overrides:
            d = cfg.to_dict()
            d.update(overrides)
            cfg = MethodConfig.from_dict(d, net.layer_names)
        return cfg

    def _prepare(self, X):
        X = check_array(X, allow_nd=True, ensure_2d=False, dtype=None)
        X = check_pixel_image(X)
        if X.dtype != np.uint8:
            X = np.clip(np.rint(X), 0, 255).astype(np.uint8)
        side = self.config_.image_size
        if X.shape[:2] != (side, side):
            X = resize_bilinear(X, side, side)
        return preprocess(X, self.network_.mean_pixel, self.network_.channel_order)

    def fit(self, X, y=None):
        """Capture the style representation of image ``X``."""
        self.network_ = _resolve_weights(self.weights, self.dtype)
        self.config_ = self._build_config(self.network_)
        style = self._prepare(X)
        self.style_representation_ = style_target(style, self.config_, self.network_)
        return self

    def objective(self, X):
        """The loss/gradient callable for content image ``X`` and its start point."""
        check_is_fitted(self, "style_representation_")
        content = self._prepare(X)
        targets = content_target(content, self.config_, self.network_)
        obj = StyleObjective(self.config_, self.network_, self.style_representation_, targets, content.shape)
        return obj, content

    def transform(self, X):
        """Stylize content image ``X``; returns an ``(S, S, 3)`` uint8 image."""
        obj, x0 = self.objective(X)
        cfg = self.config_
        shape = x0.shape
        cb = None
        if self.callback is not None:
            self.callback(0, obj.parts_at(x0), x0)

            def cb(state):
                vol = state.x.reshape(shape)
                self.callback(state.iteration, obj.parts_at(vol), vol)

        mode = self.optimizer
        if mode == "auto":
            mode = "gd" if cfg.uses_masking else "lbfgs"
        if mode == "lbfgs":
            state = lbfgs_run(obj, x0, cfg.iterations, self.memory, callback=cb)
        elif mode == "gd":
            step = self.gd_step
            if step is None:
                _, g0 = obj(x0)
                step = 1.0 / max(np.max(np.abs(g0)), 1e-300)
            state = gd_run(obj, x0, cfg.iterations, step, callback=cb)
        else:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

        self.result_volume_ = state.x.reshape(shape)
        self.loss_trace_ = list(state.losses)
        self.n_iter_ = state.iteration
        self.status_ = state.status
        return deprocess(self.result_volume_, self.network_.mean_pixel, self.network_.channel_order)
