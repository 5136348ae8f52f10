"""Adaptive composite Gauss-Legendre quadrature on [0, omega_max].

Each panel is integrated twice, once with an ``n``-point Gauss rule and
once with the same rule on its two halves.  The difference is the local
error estimate, and the finer value is the one kept.  Panels are split
breadth-first until the summed error estimate meets the tolerance for
every component of the (vector-valued) integrand.

The integrand is called with a 1-d array of abscissae and must return an
array of shape ``(len(omega), m)`` or ``(len(omega),)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = ["QuadratureSpec", "QuadratureError", "QuadratureResult", "integrate",
           "initial_width", "thermal_breakpoints"]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    omega_max: float = 40.0
    max_panel_depth: int = 30
    order: int = 10

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        if self.order < 2 or self.max_panel_depth < 1:
            raise ValueError("order must be >= 2 and max_panel_depth >= 1")

    def halved(self) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol / 2, self.abs_tol / 2, self.omega_max,
                              self.max_panel_depth, self.order)


class QuadratureError(RuntimeError):
    """Adaptive refinement hit the depth limit before meeting the tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass
class QuadratureResult:
    value: np.ndarray
    error: np.ndarray
    # accepted panel edges, shape (k, 2), sorted
    panels: np.ndarray
    order: int

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Abscissae and weights of the refined rule on the accepted panels."""
        return _rule_on(self.panels, self.order, split=True)


@lru_cache(maxsize=None)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _rule_on(panels, n, split):
    """Nodes and weights of the n-point rule on each panel (or its halves)."""
    x, w = _legendre(n)
    a, b = panels[:, 0], panels[:, 1]
    if split:
        m = 0.5 * (a + b)
        a = np.stack([a, m], axis=1).ravel()
        b = np.stack([m, b], axis=1).ravel()
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def initial_width(t: float) -> float:
    """Starting panel width that resolves an oscillation of period 2*pi/t."""
    return min(1.0, math.pi / max(t, 1.0))


def thermal_breakpoints(beta: float, upper: float = 1.0) -> np.ndarray:
    """Geometric breakpoints ``2**k / beta`` below ``upper``.

    ``omega * coth(beta*omega/2)`` bends from ``2/beta`` to ``omega`` around
    ``omega ~ 1/beta``; panels wider than that scale hide the bend from
    both rules of the error estimate.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    n = int(math.floor(math.log2(upper * beta))) if upper * beta > 1 else -1
    return np.ldexp(1.0, np.arange(0, n + 1)) / beta


def _as_2d(values, k):
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != k:
        raise ValueError("integrand returned an array of the wrong length")
    return values


def integrate(func: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec,
              width: float = 1.0, lower: float = 0.0, breakpoints=()) -> QuadratureResult:
    """Adaptively integrate ``func`` over ``[lower, spec.omega_max]``."""
    upper = spec.omega_max
    n = spec.order
    npan = max(1, int(math.ceil((upper - lower) / width)))
    edges = np.linspace(lower, upper, npan + 1)
    if len(breakpoints):
        bp = np.asarray([b for b in breakpoints if lower < b < upper], dtype=float)
        edges = np.unique(np.concatenate([edges, bp]))
    pending = np.stack([edges[:-1], edges[1:]], axis=1)
    depth = np.zeros(len(pending), dtype=int)
    span = upper - lower

    acc_pan, acc_val, acc_err = [], [], []
    while True:
        k = len(pending)
        xc, wc = _rule_on(pending, n, split=False)
        xf, wf = _rule_on(pending, n, split=True)
        fc = _as_2d(func(xc), len(xc))
        ff = _as_2d(func(xf), len(xf))
        m = fc.shape[1]
        coarse = (wc[:, None] * fc).reshape(k, n, m).sum(axis=1)
        fine = (wf[:, None] * ff).reshape(k, 2 * n, m).sum(axis=1)
        err = np.abs(fine - coarse)

        total = fine.sum(axis=0) + sum(v.sum(axis=0) for v in acc_val)
        err_done = sum((e.sum(axis=0) for e in acc_err), np.zeros(m))
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(err_done + err.sum(axis=0) <= tol):
            acc_pan.append(pending)
            acc_val.append(fine)
            acc_err.append(err)
            break
        share = (pending[:, 1] - pending[:, 0])[:, None] / span * tol[None, :]
        bad = np.any(err > share, axis=1)
        if not bad.any():
            # every panel is within its share yet the sum is not: split the worst
            bad = np.zeros(k, dtype=bool)
            bad[np.argmax((err / tol).max(axis=1))] = True
        if np.any(depth[bad] >= spec.max_panel_depth):
            value = total
            raise QuadratureError(
                f"quadrature did not converge within depth {spec.max_panel_depth} "
                f"(error estimate {float(np.max(err_done + err.sum(axis=0))):.3g})",
                estimate=value, error=err_done + err.sum(axis=0))
        acc_pan.append(pending[~bad])
        acc_val.append(fine[~bad])
        acc_err.append(err[~bad])
        split = pending[bad]
        mid = 0.5 * (split[:, 0] + split[:, 1])
        pending = np.concatenate([np.stack([split[:, 0], mid], axis=1),
                                  np.stack([mid, split[:, 1]], axis=1)])
        depth = np.concatenate([depth[bad] + 1, depth[bad] + 1])

    panels = np.concatenate(acc_pan)
    order = np.argsort(panels[:, 0], kind="stable")
    vals = np.concatenate(acc_val)[order]
    errs = np.concatenate(acc_err)[order]
    # summed in panel order so the result does not depend on refinement history
    return QuadratureResult(vals.sum(axis=0), errs.sum(axis=0), panels[order], n)
