"""L-BFGS with a strong-Wolfe line search, plus fixed-step gradient descent.

Objectives are callables ``x -> (f, g)`` on flat float64 vectors.
"""

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class OptimizationError(RuntimeError):
    pass


@dataclass
class OptState:
    x: np.ndarray
    history: deque
    iteration: int = 0
    losses: list = field(default_factory=list)
    grad: np.ndarray = None
    status: str = "running"
    n_evals: int = 0
    wolfe_failures: int = 0


@dataclass
class LineSearchResult:
    step: float
    f: float
    g: np.ndarray
    n_evals: int
    armijo: bool
    curvature: bool

    @property
    def wolfe(self):
        return self.armijo and self.curvature


def _checked(objective, x, iteration):
    f, g = objective(x)
    f = float(f)
    g = np.asarray(g, dtype=np.float64)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError(f"non-finite loss or gradient at iteration {iteration}")
    return f, g


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic interpolating two points with slopes, or None."""
    d1 = da + db - 3 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(rad)
    denom = db - da + 2 * d2
    if denom == 0:
        return None
    t = b - (b - a) * (db + d2 - d1) / denom
    return t if np.isfinite(t) else None


def strong_wolfe_line_search(objective, x, direction, initial_step=1.0, f0=None, g0=None,
                             c1=1e-4, c2=0.9, max_evals=25, iteration=0):
    """Bracket-and-zoom search for a step satisfying the strong Wolfe conditions.

    If no such step is found within ``max_evals`` evaluations the best step
    meeting the sufficient-decrease condition is returned with
    ``curvature=False``; if none exists the returned step is 0.
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    if f0 is None or g0 is None:
        f0, g0 = _checked(objective, x, iteration)
    dphi0 = float(g0 @ d)
    if not dphi0 < 0:
        raise ValueError("line search direction is not a descent direction")
    if initial_step <= 0:
        raise ValueError("initial step must be positive")

    evals = 0
    best = None  # (f, t, g) with lowest f among Armijo-satisfying points

    def phi(t):
        nonlocal evals, best
        f, g = _checked(objective, x + t * d, iteration)
        evals += 1
        if f <= f0 + c1 * t * dphi0 and (best is None or f < best[0]):
            best = (f, t, g)
        return f, g, float(g @ d)

    def done(t, f, g):
        return LineSearchResult(t, f, g, evals, True, True)

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        while evals < max_evals:
            t = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
            width = abs(hi - lo)
            a, b = min(lo, hi), max(lo, hi)
            if t is None or not (a + 0.1 * width <= t <= b - 0.1 * width):
                t = 0.5 * (lo + hi)
            f, g, dphi = phi(t)
            if f > f0 + c1 * t * dphi0 or f >= f_lo:
                hi, f_hi, d_hi = t, f, dphi
            else:
                if abs(dphi) <= -c2 * dphi0:
                    return done(t, f, g)
                if dphi * (hi - lo) >= 0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = t, f, dphi
            if abs(hi - lo) * np.max(np.abs(d)) < 1e-16 * (1 + np.max(np.abs(x))):
                break
        return None

    t_prev, f_prev, d_prev = 0.0, f0, dphi0
    t = float(initial_step)
    result = None
    while evals < max_evals:
        f, g, dphi = phi(t)
        if f > f0 + c1 * t * dphi0 or (evals > 1 and f >= f_prev):
            result = zoom(t_prev, f_prev, d_prev, t, f, dphi)
            break
        if abs(dphi) <= -c2 * dphi0:
            result = done(t, f, g)
            break
        if dphi >= 0:
            result = zoom(t, f, dphi, t_prev, f_prev, d_prev)
            break
        t_prev, f_prev, d_prev = t, f, dphi
        t = 4.0 * t
    if result is not None:
        return result
    if best is not None:
        return LineSearchResult(best[1], best[0], best[2], evals, True, False)
    return LineSearchResult(0.0, f0, g0, evals, False, False)


def _two_loop(g, history):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def lbfgs_run(objective, x0, iterations=270, memory=10, gtol=1e-10, c1=1e-4, c2=0.9,
              curvature_eps=1e-10, callback=None):
    """Minimize ``objective`` from ``x0`` for at most ``iterations`` steps.

    Stops early when the gradient's max-norm drops to ``gtol`` or the line
    search cannot decrease the loss. ``callback(state)`` runs after every
    accepted step.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if memory < 1:
        raise ValueError("memory must be >= 1")
    shape = np.shape(x0)
    x = np.array(x0, dtype=np.float64).ravel()
    f, g = _checked(objective, x, 0)
    state = OptState(x=x, history=deque(maxlen=memory), losses=[f], grad=g, n_evals=1)

    for it in range(1, iterations + 1):
        state.iteration = it
        if np.max(np.abs(g)) <= gtol:
            state.status = "converged"
            break
        d = -_two_loop(g, state.history)
        if not (g @ d) < 0:
            state.history.clear()
            d = -g
        t0 = 1.0 if state.history else 1.0 / np.linalg.norm(g)
        ls = strong_wolfe_line_search(objective, x, d, t0, f, g, c1=c1, c2=c2, iteration=it)
        state.n_evals += ls.n_evals
        if ls.step == 0 or not ls.f < f:
            state.status = "no progress"
            break
        if not ls.curvature:
            state.wolfe_failures += 1
            log.warning("iteration %d: no strong-Wolfe step, taking best decrease", it)
        s = ls.step * d
        y = ls.g - g
        sy = float(s @ y)
        if sy > curvature_eps:
            state.history.append((s, y, 1.0 / sy))
        x = x + s
        f, g = ls.f, ls.g
        state.x, state.grad = x, g
        state.losses.append(f)
        if callback is not None:
            callback(state)
    else:
        state.status = "max iterations"
    state.x = x.reshape(shape)
    return state


def gd_run(objective, x0, iterations, step, callback=None):
    """Fixed-step gradient descent; no line search, no monotonicity guarantee."""
    if not step > 0:
        raise ValueError("step must be positive")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    shape = np.shape(x0)
    x = np.array(x0, dtype=np.float64).ravel()
    f, g = _checked(objective, x, 0)
    state = OptState(x=x, history=deque(maxlen=1), losses=[f], grad=g, n_evals=1)
    for it in range(1, iterations + 1):
        state.iteration = it
        x = x - step * g
        f, g = _checked(objective, x, it)
        state.n_evals += 1
        state.x, state.grad = x, g
        state.losses.append(f)
        if callback is not None:
            callback(state)
    state.status = "max iterations"
    state.x = x.reshape(shape)
    return state
