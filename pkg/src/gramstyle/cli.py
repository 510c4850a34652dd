"""Command-line entry point: ``gramstyle --content c.jpg --style s.jpg --out out.png``."""

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .config import DEFAULT_IMAGE_SIZE, DEFAULT_ITERATIONS, DEFAULT_STYLE_WEIGHT, METHODS, describe_methods
from .estimator import StyleTransfer
from .imaging import load_image, save_image
from .optimize import OptimizationError
from .weights_io import load_weights

DEFAULT_WEIGHTS = os.environ.get("GRAMSTYLE_WEIGHTS", "vgg19_normalized.gsw")
DEFAULT_METHOD = "ChainBlurred"


@dataclass
class RunRequest:
    content: str
    style: str
    out: str
    method: str = DEFAULT_METHOD
    config: str = None
    iterations: int = None
    style_weight: float = None
    shift: float = None
    size: int = None
    checkpoint_every: int = 0
    weights: str = DEFAULT_WEIGHTS
    content_layer: str = None
    optimizer: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("--iters must be >= 1")
        if self.size is not None and (self.size < 16 or self.size % 16):
            raise ValueError("--size must be a positive multiple of 16")
        if self.checkpoint_every < 0:
            raise ValueError("--checkpoint-every must be >= 0")


def list_methods(file=None):
    file = file or sys.stdout
    rows = describe_methods()
    header = ("method", "content layers", "style terms", "weighting", "shift", "blurred", "adjacent", "")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip(), file=file)


def _checkpoint_path(out, n):
    p = Path(out)
    return p.with_name(f"{p.stem}_iter{n}.png")


def run(req, stdout=None, stderr=None):
    """Execute one transfer; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not os.path.exists(req.weights):
        print(f"error: weight file not found: {req.weights}", file=stderr)
        return 2
    try:
        weights = load_weights(req.weights)
        content = load_image(req.content)
        style = load_image(req.style)

        def progress(n, parts, volume):
            print(f"iter={n} total={parts.total:.9e} style={parts.style:.9e} content={parts.content:.9e}",
                  file=stdout, flush=True)
            if req.checkpoint_every and n and n % req.checkpoint_every == 0:
                from .imaging import deprocess
                save_image(deprocess(volume, weights.mean_pixel, weights.channel_order),
                           _checkpoint_path(req.out, n))

        est = StyleTransfer(method=req.method, config=req.config, weights=weights,
                            style_weight=req.style_weight, shift=req.shift, iterations=req.iterations,
                            image_size=req.size, content_layer=req.content_layer,
                            optimizer=req.optimizer, callback=progress)
        est.fit(style)
        result = est.transform(content)

        out = Path(req.out)
        fd, tmp = tempfile.mkstemp(suffix=".png", dir=out.parent if str(out.parent) else ".")
        os.close(fd)
        try:
            save_image(result, tmp)
            os.replace(tmp, out)
        finally:
            if os.path.exists(tmp):
                os.remove(tmp)
    except (OSError, ValueError, TypeError, OptimizationError) as e:
        print(f"error: {e}", file=stderr)
        return 1
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gramstyle", description="Gram-statistic neural style transfer.")
    p.add_argument("--content", help="content image (PNG/JPEG)")
    p.add_argument("--style", help="style image (PNG/JPEG)")
    p.add_argument("--method", default=DEFAULT_METHOD, choices=METHODS)
    p.add_argument("--config", help="JSON method config; overrides --method")
    p.add_argument("--out", help="output PNG path")
    p.add_argument("--iters", type=int, help=f"optimizer iterations (default {DEFAULT_ITERATIONS})")
    p.add_argument("--style-weight", type=float, help=f"style weight alpha (default {DEFAULT_STYLE_WEIGHT:g})")
    p.add_argument("--shift", type=float, help="activation shift override")
    p.add_argument("--size", type=int, help=f"square image side (default {DEFAULT_IMAGE_SIZE})")
    p.add_argument("--checkpoint-every", type=int, default=0, metavar="N",
                   help="write <out-stem>_iter<N>.png every N iterations")
    p.add_argument("--weights", default=DEFAULT_WEIGHTS, help="weight container (env GRAMSTYLE_WEIGHTS)")
    p.add_argument("--content-layer", help="content/hub layer for networks without conv4_2")
    p.add_argument("--optimizer", default="auto", choices=("auto", "lbfgs", "gd"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--list-methods", action="store_true", help="print the method presets and exit")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_methods:
        list_methods()
        return 0
    missing = [f"--{n}" for n in ("content", "style", "out") if getattr(args, n) is None]
    if missing:
        parser.error(f"missing required arguments: {', '.join(missing)}")
    try:
        req = RunRequest(content=args.content, style=args.style, out=args.out, method=args.method,
                         config=args.config, iterations=args.iters, style_weight=args.style_weight,
                         shift=args.shift, size=args.size, checkpoint_every=args.checkpoint_every,
                         weights=args.weights, content_layer=args.content_layer,
                         optimizer=args.optimizer, seed=args.seed)
    except ValueError as e:
        parser.error(str(e))
    return run(req)


if __name__ == "__main__":
    sys.exit(main())
