"""Method presets, layer weighting and the JSON config schema.

JSON schema of a method config (all keys required unless noted)::

    {
      "name": "Chain",
      "content_layers": ["conv1_1", ...],
      "style_terms": [{"variant": "InterLayer", "layers": ["conv5_4", "conv5_3"],
                       "blur_count": 0}, ...],
      "weighting": "uniform" | "geometric",
      "shift": -1.0,
      "style_weight": 2e9,
      "iterations": 270,
      "image_size": 512,
      "power": 2.0,                       # optional, Amplified terms
      "masking": {"conv1_1": 1.0, ...}    # optional, null for none
    }
"""

import json
from dataclasses import dataclass, field, replace

from .statistics import Variant
from .vgg import VGG19_LAYER_NAMES

DEFAULT_STYLE_WEIGHT = 2e9
DEFAULT_ITERATIONS = 270
DEFAULT_IMAGE_SIZE = 512
DEFAULT_SHIFT = -1.0
DEFAULT_CONTENT_LAYER = "conv4_2"
DEFAULT_MASK_FRACTIONS = (1.0, 0.4, 0.2, 0.1, 0.1)
DEFAULT_POWER = 2.0

TABLE_METHODS = (
    "Classic", "ClassicShifted", "ClassicDense", "AllToContent", "Chain",
    "ChainUniform", "ChainUnshifted", "ChainBlurred", "ChainExtended",
)
EXPERIMENTAL_METHODS = ("Amplified", "ContentAware", "GramCube", "Masked")
METHODS = TABLE_METHODS + EXPERIMENTAL_METHODS


@dataclass
class WeightingScheme:
    kind: str
    style: dict
    content: dict


def geometric_weights(layer_indices):
    """Style weight 2**(D - d) and content weight 2**d per layer.

    ``layer_indices`` are network depths (1-based); ``d`` is a layer's rank
    among them and ``D`` their count. Weights are exact Python ints.
    """
    idx = list(layer_indices)
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate layer index in {idx}")
    D = len(idx)
    rank = {v: r for r, v in enumerate(sorted(idx), start=1)}
    return WeightingScheme(
        "geometric",
        {i: 2 ** (D - rank[i]) for i in idx},
        {i: 2 ** rank[i] for i in idx},
    )


def uniform_weights(layer_indices):
    idx = list(layer_indices)
    return WeightingScheme("uniform", {i: 1 for i in idx}, {i: 1 for i in idx})


@dataclass(frozen=True)
class StyleTerm:
    """One statistic in the style representation.

    ``layers`` holds one layer name, or two for pair variants. For
    ContentAware the second name is the content layer that weights the Gram.
    """

    variant: Variant
    layers: tuple
    blur_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "layers", tuple(self.layers))
        pair = self.variant in (Variant.INTERLAYER, Variant.ADJACENT, Variant.CONTENT_AWARE)
        if len(self.layers) != (2 if pair else 1):
            raise ValueError(f"{self.variant.value} term needs {2 if pair else 1} layer(s), got {self.layers}")
        if self.blur_count < 0:
            raise ValueError("blur_count must be >= 0")

    def to_dict(self):
        return {"variant": self.variant.value, "layers": list(self.layers), "blur_count": self.blur_count}


@dataclass
class MethodConfig:
    name: str
    content_layers: tuple
    style_terms: tuple
    weighting: str = "uniform"
    shift: float = 0.0
    style_weight: float = DEFAULT_STYLE_WEIGHT
    iterations: int = DEFAULT_ITERATIONS
    image_size: int = DEFAULT_IMAGE_SIZE
    power: float = DEFAULT_POWER
    masking: dict = None
    layer_order: tuple = field(default=VGG19_LAYER_NAMES, repr=False)

    def __post_init__(self):
        self.content_layers = tuple(self.content_layers)
        self.style_terms = tuple(t if isinstance(t, StyleTerm) else StyleTerm(**t) for t in self.style_terms)
        self.layer_order = tuple(self.layer_order)
        if self.weighting not in ("uniform", "geometric"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.image_size < 16 or self.image_size % 16:
            raise ValueError(f"image size must be a positive multiple of 16, got {self.image_size}")
        for name in self.used_layers():
            if name not in self.layer_order:
                raise ValueError(f"unknown layer {name!r}")
        if self.masking:
            for name, frac in self.masking.items():
                if not 0 < frac <= 1:
                    raise ValueError(f"keep fraction for {name} must lie in (0, 1], got {frac}")

    def used_layers(self):
        names = set(self.content_layers)
        for t in self.style_terms:
            names.update(t.layers)
        return sorted(names, key=self.layer_order.index)

    def depth(self, name):
        return self.layer_order.index(name) + 1

    def weights(self):
        """Per-layer weighting over every layer the config touches."""
        idx = [self.depth(n) for n in self.used_layers()]
        return geometric_weights(idx) if self.weighting == "geometric" else uniform_weights(idx)

    def term_weight(self, term, scheme=None):
        # pair terms take the weight of their shallower layer
        scheme = scheme or self.weights()
        return scheme.style[min(self.depth(n) for n in term.layers)]

    def content_weight(self, name, scheme=None):
        scheme = scheme or self.weights()
        return scheme.content[self.depth(name)]

    @property
    def uses_masking(self):
        return bool(self.masking)

    def to_dict(self):
        return {
            "name": self.name,
            "content_layers": list(self.content_layers),
            "style_terms": [t.to_dict() for t in self.style_terms],
            "weighting": self.weighting,
            "shift": self.shift,
            "style_weight": self.style_weight,
            "iterations": self.iterations,
            "image_size": self.image_size,
            "power": self.power,
            "masking": dict(self.masking) if self.masking else None,
        }

    @classmethod
    def from_dict(cls, d, layer_order=VGG19_LAYER_NAMES):
        d = dict(d)
        missing = {"name", "content_layers", "style_terms", "weighting", "shift"} - set(d)
        if missing:
            raise ValueError(f"config missing keys: {sorted(missing)}")
        unknown = set(d) - (set(cls.__dataclass_fields__) - {"layer_order"})
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(layer_order=layer_order, **d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text, layer_order=VGG19_LAYER_NAMES):
        return cls.from_dict(json.loads(text), layer_order)


def _classic_style_layers(layers):
    return [n for n in layers if n.endswith("_1")]


def build_method_config(name, overrides=None, layers=VGG19_LAYER_NAMES, content_layer=None):
    """Construct a named preset.

    ``layers`` is the ordered list of conv layer names of the target network;
    the defaults reproduce the VGG-19 table. ``content_layer`` picks the single
    content / hub layer (``conv4_2`` when the network has one).
    ``overrides`` is a dict of :class:`MethodConfig` fields to replace.
    """
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    layers = tuple(layers)
    if content_layer is None:
        if DEFAULT_CONTENT_LAYER not in layers:
            raise ValueError("network has no conv4_2; pass content_layer explicitly")
        content_layer = DEFAULT_CONTENT_LAYER
    classic = _classic_style_layers(layers)
    chain_pairs = [(layers[i], layers[i - 1]) for i in range(len(layers) - 1, 0, -1)]

    def grams(names):
        return [StyleTerm(Variant.SHIFTED, (n,)) for n in names]

    kw = dict(weighting="geometric", shift=DEFAULT_SHIFT, content_layers=layers)
    if name in ("Classic", "ClassicShifted", "Masked"):
        kw.update(content_layers=(content_layer,), style_terms=grams(classic), weighting="uniform",
                  shift=-1.0 if name == "ClassicShifted" else 0.0)
        if name == "Masked":
            kw["masking"] = dict(zip(classic, DEFAULT_MASK_FRACTIONS))
    elif name == "ClassicDense":
        kw.update(style_terms=grams(layers))
    elif name == "AllToContent":
        kw.update(style_terms=[StyleTerm(Variant.INTERLAYER, (content_layer, n)) for n in reversed(layers)])
    elif name.startswith("Chain"):
        variant = Variant.ADJACENT if name == "ChainExtended" else Variant.INTERLAYER
        terms = []
        for a, b in chain_pairs:
            blur = abs(layers.index(a) - layers.index(b)) if name == "ChainBlurred" else 0
            terms.append(StyleTerm(variant, (a, b), blur))
        kw.update(style_terms=terms)
        if name == "ChainUniform":
            kw["weighting"] = "uniform"
        if name == "ChainUnshifted":
            kw["shift"] = 0.0
    elif name == "Amplified":
        kw.update(content_layers=(content_layer,), weighting="uniform", shift=0.0,
                  style_terms=[StyleTerm(Variant.AMPLIFIED, (n,)) for n in classic])
    elif name == "ContentAware":
        cidx = layers.index(content_layer)
        style = [n for n in classic if layers.index(n) < cidx]
        kw.update(content_layers=(content_layer,), weighting="uniform",
                  style_terms=[StyleTerm(Variant.CONTENT_AWARE, (n, content_layer)) for n in style])
    elif name == "GramCube":
        kw.update(content_layers=(content_layer,), weighting="uniform", shift=0.0,
                  style_terms=[StyleTerm(Variant.CUBE, (n,)) for n in classic])

    cfg = MethodConfig(name=name, layer_order=layers, **kw)
    if overrides:
        overrides = {k: v for k, v in overrides.items() if v is not None}
        cfg = replace(cfg, **overrides)
    return cfg


def describe_methods(layers=VGG19_LAYER_NAMES):
    """Rows of (name, content, style, weighting, shift, blurred, adjacent, tag)."""
    rows = []
    for name in METHODS:
        cfg = build_method_config(name, layers=layers)
        content = _summarize(cfg.content_layers, layers)
        terms = cfg.style_terms
        if all(len(t.layers) == 1 for t in terms):
            style = _summarize([t.layers[0] for t in terms], layers)
        else:
            style = ", ".join("-".join(t.layers) for t in terms[:2]) + f", ... ({len(terms)} pairs)"
        if terms[0].variant not in (Variant.SHIFTED, Variant.INTERLAYER, Variant.ADJACENT):
            style = f"{terms[0].variant.value}: {style}"
        if cfg.uses_masking:
            style = f"{style} (masked gradient)"
        rows.append((
            name,
            content,
            style,
            cfg.weighting,
            f"{cfg.shift:g}",
            "yes" if any(t.blur_count for t in terms) else "no",
            "yes" if any(t.variant is Variant.ADJACENT for t in terms) else "no",
            "experimental" if name in EXPERIMENTAL_METHODS else "table",
        ))
    return rows


def _summarize(names, layers):
    if tuple(names) == tuple(layers):
        return "all convolutional"
    return ", ".join(names)
