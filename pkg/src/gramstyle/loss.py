"""Style/content objective over a conv trunk.

    loss = alpha * sum_t w_t * ||G_t(I) - G_t(S)||^2 / N_t
           + sum_l c_l * ||F_l(I) - F_l(C)||^2 / M_l

``N_t = 4 * (grid positions)^2 * (product of the statistic's channel
counts)`` and ``M_l = K_l * X_l * Y_l``. The grid is the one the statistic is
evaluated on (the larger of a pair).
"""

import math
from dataclasses import dataclass

import numpy as np

from .statistics import Variant, compute_statistic, statistic_vjp
from .tensor_core import block_sum_downsample, nearest_upsample, scale_factors
from .vgg import backward_inject, forward_record


@dataclass(frozen=True)
class LossParts:
    total: float
    style: float
    content: float


def gradient_mask(P, keep_fraction):
    """Binary mask keeping the ``round(keep_fraction * size)`` largest entries of P.

    Ties are broken in favour of the earlier entry in row-major order.
    """
    P = np.asarray(P)
    if P.size == 0:
        raise ValueError("cannot mask an empty volume")
    if not 0 < keep_fraction <= 1:
        raise ValueError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
    keep = int(math.floor(keep_fraction * P.size + 0.5))
    order = np.argsort(-P.ravel(), kind="stable")
    mask = np.zeros(P.size, dtype=P.dtype if np.issubdtype(P.dtype, np.floating) else np.float64)
    mask[order[:keep]] = 1
    return mask.reshape(P.shape)


# -- layer alignment ---------------------------------------------------------

def _align(F, grid):
    """Resample F onto ``grid`` (nearest up, or block mean down)."""
    X, Y = F.shape[1:]
    if (X, Y) == tuple(grid):
        return F
    if X <= grid[0]:
        return nearest_upsample(F, *scale_factors(grid, F.shape))
    fx, fy = scale_factors(F.shape, grid)
    return block_sum_downsample(F, fx, fy) / (fx * fy)


def _align_adjoint(G, shape):
    X, Y = shape[1:]
    if G.shape[1:] == (X, Y):
        return G
    if X >= G.shape[1]:
        fx, fy = scale_factors(shape, G.shape)
        return nearest_upsample(G, fx, fy) / (fx * fy)
    return block_sum_downsample(G, *scale_factors(G.shape, shape))


def _roles(term, acts):
    """Order a pair so the larger grid comes first; ties keep the listed order."""
    a, b = term.layers
    if acts[a].shape[1] * acts[a].shape[2] < acts[b].shape[1] * acts[b].shape[2]:
        return b, a
    return a, b


def _term_inputs(term, acts, shift):
    """Input volumes for a term plus the layer each input belongs to."""
    v = term.variant
    if v in (Variant.PLAIN, Variant.SHIFTED):
        return (acts[term.layers[0]],), term.layers
    if v in (Variant.INTERLAYER, Variant.ADJACENT):
        big, small = _roles(term, acts)
        return (acts[big] + shift, acts[small] + shift), (big, small)
    if v is Variant.CONTENT_AWARE:
        style, content = term.layers
        Fl = acts[style] + shift
        return (Fl, _align(acts[content], Fl.shape[1:])), (style, content)
    return (acts[term.layers[0]] + shift,), term.layers


def _normalizer(term, inputs):
    M = inputs[0].shape[1] * inputs[0].shape[2]
    K = inputs[0].shape[0]
    v = term.variant
    if v in (Variant.INTERLAYER, Variant.ADJACENT):
        channels = K * inputs[1].shape[0]
    elif v is Variant.CONTENT_AWARE:
        channels = inputs[1].shape[0] * K * K
    elif v is Variant.CUBE:
        channels = K ** 3
    else:
        channels = K * K
    return 4.0 * M * M * channels


def _evaluate_term(term, acts, config):
    inputs, owners = _term_inputs(term, acts, config.shift)
    stat = compute_statistic(term.variant, inputs, term.layers, shift=config.shift,
                             blur_count=term.blur_count, power=config.power)
    return stat, inputs, owners


def needed_layers(config):
    names = set(config.used_layers())
    if config.masking:
        names.update(config.masking)
    return sorted(names, key=config.layer_order.index)


def _deepest(config, weights):
    names = weights.layer_names
    return max(needed_layers(config), key=names.index)


def style_target(style_image, config, weights):
    """Target statistics of the style image, keyed by :class:`StyleTerm`."""
    acts = forward_record(style_image, weights, upto=_deepest(config, weights))
    return {term: _evaluate_term(term, acts, config)[0] for term in config.style_terms}


def content_target(content_image, config, weights):
    """Activations of the content image at every layer the objective reads."""
    acts = forward_record(content_image, weights, upto=_deepest(config, weights))
    return {n: acts[n] for n in needed_layers(config)}


class StyleObjective:
    """Callable ``x -> (loss, grad)`` over flat pixel vectors.

    The last few evaluations' :class:`LossParts` are kept so progress can be
    reported for accepted iterates without recomputation.
    """

    def __init__(self, config, weights, target_style, target_content, image_shape):
        self.config = config
        self.weights = weights
        self.target_style = target_style
        self.target_content = target_content
        self.image_shape = tuple(image_shape)
        if set(target_style) != set(config.style_terms):
            raise ValueError("style representation keys do not match the config's style terms")
        for name in config.content_layers:
            if name not in target_content:
                raise ValueError(f"content target lacks layer {name}")
        self.scheme = config.weights()
        self.masks = {}
        if config.masking:
            for name, frac in config.masking.items():
                if name not in target_content:
                    raise ValueError(f"content target lacks masked layer {name}")
                self.masks[name] = gradient_mask(target_content[name], frac)
        self.upto = _deepest(config, weights)
        self._recent = {}
        self.n_evals = 0

    def evaluate(self, image):
        cfg = self.config
        acts = forward_record(image, self.weights, upto=self.upto)
        style_grads = {}
        style_loss = 0.0
        for term in cfg.style_terms:
            stat, inputs, owners = _evaluate_term(term, acts, cfg)
            diff = stat.value - self.target_style[term].value
            scale = cfg.style_weight * cfg.term_weight(term, self.scheme) / _normalizer(term, inputs)
            style_loss += scale * float(np.vdot(diff, diff))
            if scale == 0:
                continue
            grads = statistic_vjp(term.variant, inputs, 2.0 * scale * diff, shift=cfg.shift,
                                  blur_count=term.blur_count, power=cfg.power)
            for owner, g in zip(owners, grads):
                g = _align_adjoint(g, acts[owner].shape)
                style_grads[owner] = style_grads[owner] + g if owner in style_grads else g
        for name, mask in self.masks.items():
            if name in style_grads:
                style_grads[name] = style_grads[name] * mask

        grads = dict(style_grads)
        content_loss = 0.0
        for name in cfg.content_layers:
            diff = acts[name] - self.target_content[name]
            scale = cfg.content_weight(name, self.scheme) / diff.size
            content_loss += scale * float(np.vdot(diff, diff))
            g = 2.0 * scale * diff
            grads[name] = grads[name] + g if name in grads else g

        grad = backward_inject(acts, grads, self.weights)
        parts = LossParts(style_loss + content_loss, style_loss, content_loss)
        return parts, grad

    def __call__(self, x):
        image = np.asarray(x, dtype=np.float64).reshape(self.image_shape)
        parts, grad = self.evaluate(image)
        self.n_evals += 1
        key = hash(image.tobytes())
        self._recent[key] = parts
        if len(self._recent) > 64:
            self._recent.pop(next(iter(self._recent)))
        return parts.total, np.asarray(grad, dtype=np.float64).ravel()

    def parts_at(self, x):
        image = np.asarray(x, dtype=np.float64).reshape(self.image_shape)
        parts = self._recent.get(hash(image.tobytes()))
        if parts is None:
            parts, _ = self.evaluate(image)
        return parts


def total_loss_grad(image, config, target_style, target_content, weights):
    """Loss and pixel gradient of ``image`` under ``config``."""
    image = np.asarray(image)
    obj = StyleObjective(config, weights, target_style, target_content, image.shape)
    parts, grad = obj.evaluate(image)
    return parts.total, grad
