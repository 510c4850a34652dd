"""Central-difference oracle and gradient reports for every statistic.

Run ``python -m gramstyle.gradcheck --seed 42 [--json]`` for a report.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import statistics as st
from .statistics import Variant
from .vgg import toy_network

DEFAULT_EPS = 1e-5
TOLERANCE = 1e-6


def finite_difference_grad(f, x, eps=DEFAULT_EPS):
    """Central differences of scalar ``f`` at ``x``, one coordinate at a time."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = np.array(x, dtype=np.float64)
    flat = x.reshape(-1)
    grad = np.empty(flat.size)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(f"non-finite function value at coordinate {tuple(int(j) for j in np.unravel_index(i, x.shape))}")
        grad[i] = (fp - fm) / (2 * eps)
    return grad.reshape(x.shape)


def relative_error(analytic, numeric):
    """max |a - n| scaled by the larger of the two gradients' max-norms."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(n)), 1e-300)
    return float(np.max(np.abs(a - n)) / scale)


@dataclass
class VariantResult:
    variant: str
    max_rel_error: float
    passed: bool


@dataclass
class GradcheckReport:
    seed: int
    tolerance: float
    results: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def failures(self):
        return [r.variant for r in self.results if not r.passed]

    def to_text(self):
        lines = [f"gradient check, seed={self.seed}, tolerance={self.tolerance:g}"]
        for r in self.results:
            lines.append(f"  {r.variant:<20s} {r.max_rel_error:.3e}  {'PASS' if r.passed else 'FAIL'}")
        lines.append("all passed" if self.passed else f"FAILED: {', '.join(self.failures())}")
        return "\n".join(lines)

    def to_json(self):
        return json.dumps({"seed": self.seed, "tolerance": self.tolerance, "passed": self.passed,
                           "results": [asdict(r) for r in self.results]}, indent=2)


def _cases(rng):
    """Random inputs and parameters per variant."""
    pos = lambda *s: rng.uniform(0.2, 1.5, size=s)  # noqa: E731
    return {
        Variant.PLAIN: ((rng.normal(size=(3, 4, 4)),), {}),
        Variant.SHIFTED: ((rng.normal(size=(3, 4, 4)),), {"shift": -1.0}),
        Variant.INTERLAYER: ((rng.normal(size=(2, 4, 4)), rng.normal(size=(3, 2, 2))), {"blur_count": 1}),
        Variant.ADJACENT: ((rng.normal(size=(2, 4, 4)), rng.normal(size=(3, 2, 2))), {"blur_count": 1}),
        Variant.AMPLIFIED: ((pos(3, 4, 4),), {"power": 1.5}),
        Variant.CONTENT_AWARE: ((rng.normal(size=(3, 4, 4)), pos(2, 4, 4)), {}),
        Variant.CUBE: ((rng.normal(size=(3, 3, 3)),), {}),
    }


def _value_shape(variant, inputs, params):
    return st.compute_statistic(variant, inputs, **params).value.shape


def check_variant(variant, inputs, params, upstream, vjp=None, eps=DEFAULT_EPS):
    """Max relative error of the VJP against central differences over all inputs."""
    vjp = vjp or (lambda v, ins, U, **kw: st.statistic_vjp(v, ins, U, **kw))
    analytic = vjp(variant, inputs, upstream, **params)
    worst = 0.0
    for idx, F in enumerate(inputs):
        def f(Fx, idx=idx):
            ins = list(inputs)
            ins[idx] = Fx
            return float(np.vdot(upstream, st.compute_statistic(variant, ins, **params).value))
        worst = max(worst, relative_error(analytic[idx], finite_difference_grad(f, F, eps)))
    return worst


def check_all_statistics(seed=42, vjp_overrides=None, tolerance=TOLERANCE, eps=DEFAULT_EPS):
    """Compare every statistic's VJP with finite differences.

    ``vjp_overrides`` maps a variant to a replacement VJP callable (used to
    confirm the check actually catches broken gradients).
    """
    rng = np.random.default_rng(seed)
    overrides = vjp_overrides or {}
    results = []
    for variant, (inputs, params) in _cases(rng).items():
        upstream = rng.normal(size=_value_shape(variant, inputs, params))
        err = check_variant(variant, inputs, params, upstream, overrides.get(variant), eps)
        results.append(VariantResult(variant.value, err, err < tolerance))
    return GradcheckReport(seed, tolerance, results)


def toy_fixture(seed=0, size=8):
    """A ToyNetwork and three preprocessed images (content, style, init)."""
    net = toy_network(seed)
    rng = np.random.default_rng(seed + 1)
    content, style, init = (rng.normal(size=(3, size, size)) for _ in range(3))
    return net, content, style, init


def main(argv=None):
    parser = argparse.ArgumentParser(prog="python -m gramstyle.gradcheck")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    args = parser.parse_args(argv)
    report = check_all_statistics(args.seed)
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
