"""Scalar characteristic functions with a distributed delay.

``f(lam) = lam - a - integral_0^tau M(theta) exp(-lam theta) dtheta`` for a
complex kernel ``M`` on ``[0, tau]``.  The integral is evaluated by
composite Gauss-Legendre quadrature whose panel count starts proportional
to ``|lam| * tau`` (one panel per oscillation period, roughly) and doubles
until two successive values agree to a relative tolerance.

Kernels are arbitrary callables; tabulated kernels become piecewise-linear
interpolants.  ``M`` identically zero needs no special casing anywhere: the
integral is then zero at the first comparison and ``f`` degenerates to
``lam - a`` with its single root.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .rootfinder import AnalyticTarget

__all__ = [
    "DistributedSystem",
    "QuadratureConfig",
    "QuadratureConvergenceError",
    "tabulated_kernel",
    "kernel_transform",
    "evaluate_distributed",
    "derivative_distributed",
    "kernel_nonzero_check",
    "as_target",
]


class QuadratureConvergenceError(RuntimeError):
    """Panel doubling hit the budget before successive values agreed."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-12
    max_panels: int = 4096
    nodes_per_panel: int = 16

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_panels < 1 or self.nodes_per_panel < 2:
            raise ValueError("need at least one panel and two nodes per panel")


DEFAULT_QUADRATURE = QuadratureConfig()


def tabulated_kernel(thetas, values) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-linear kernel through ``(theta, value)`` samples.

    Outside the sampled range the end values extend flat; callers should
    sample the full horizon.  Values may be complex.
    """
    ts = np.asarray(thetas, np.float64)
    vs = np.asarray(values, np.complex128)
    if ts.ndim != 1 or ts.shape != vs.shape or ts.shape[0] < 2:
        raise ValueError("need matching 1-d theta and value arrays, length >= 2")
    if (np.diff(ts) <= 0).any():
        raise ValueError("kernel sample points must be strictly increasing")
    if not (np.isfinite(ts).all() and np.isfinite(vs.real).all() and np.isfinite(vs.imag).all()):
        raise ValueError("kernel samples must be finite")

    def kernel(theta: np.ndarray) -> np.ndarray:
        th = np.asarray(theta, np.float64)
        return np.interp(th, ts, vs.real) + 1j * np.interp(th, ts, vs.imag)

    return kernel


@dataclass(frozen=True, eq=False)
class DistributedSystem:
    """``x'(t) = a x(t) + integral_0^tau M(theta) x(t - theta) dtheta``."""

    a: complex
    tau: float
    kernel: Callable

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "tau", float(self.tau))
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError("the horizon tau must be positive and finite")
        if not callable(self.kernel):
            raise TypeError("kernel must be callable on theta arrays")

    @classmethod
    def from_table(cls, a, tau, thetas, values) -> "DistributedSystem":
        return cls(a, tau, tabulated_kernel(thetas, values))


def _sample_kernel(kernel, thetas: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(kernel(thetas), np.complex128)
        if vals.shape != thetas.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([complex(kernel(float(t))) for t in thetas], np.complex128)
    if not (np.isfinite(vals.real).all() and np.isfinite(vals.imag).all()):
        raise ValueError("kernel returned a non-finite value on [0, tau]")
    return vals


@functools.lru_cache(maxsize=16)
def _gauss_rule(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_nodes(panels: int, nodes_per_panel: int, tau: float):
    x, w = _gauss_rule(nodes_per_panel)
    edges = np.linspace(0.0, tau, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _transform(system: DistributedSystem, lam: complex, cfg: QuadratureConfig, moment: int) -> complex:
    """``integral_0^tau theta^moment M(theta) exp(-lam theta) dtheta``."""

    def quad(panels: int) -> complex:
        nodes, weights = _panel_nodes(panels, cfg.nodes_per_panel, system.tau)
        vals = _sample_kernel(system.kernel, nodes)
        if moment:
            vals = vals * nodes**moment
        # np.sum is pairwise over a fixed ordering, so results are stable.
        return complex(np.sum(weights * vals * np.exp(-lam * nodes)))

    panels = int(math.ceil(abs(lam) * system.tau / (2.0 * math.pi))) + 1
    prev = quad(panels)
    while True:
        if 2 * panels > cfg.max_panels:
            raise QuadratureConvergenceError(
                f"quadrature did not converge within {cfg.max_panels} panels"
                f" at lam = {lam}"
            )
        panels *= 2
        cur = quad(panels)
        if abs(cur - prev) <= cfg.rel_tol * (1.0 + abs(cur)):
            return cur
        prev = cur


def kernel_transform(
    system: DistributedSystem, lam: complex, cfg: Optional[QuadratureConfig] = None
) -> complex:
    """The integral term ``integral_0^tau M(theta) exp(-lam theta) dtheta``."""
    return _transform(system, complex(lam), cfg or DEFAULT_QUADRATURE, 0)


def evaluate_distributed(
    system: DistributedSystem, lam: complex, cfg: Optional[QuadratureConfig] = None
) -> complex:
    lam = complex(lam)
    return lam - system.a - _transform(system, lam, cfg or DEFAULT_QUADRATURE, 0)


def derivative_distributed(
    system: DistributedSystem, lam: complex, cfg: Optional[QuadratureConfig] = None
) -> complex:
    """Derivative in ``lam``: ``1 + integral theta M(theta) exp(-lam theta)``."""
    return 1.0 + _transform(system, complex(lam), cfg or DEFAULT_QUADRATURE, 1)


def kernel_nonzero_check(
    system: DistributedSystem, grid_points: int = 256, threshold_scale: float = 1e-12
) -> bool:
    """Sampled test that the kernel is not identically zero.

    Checks ``max |M|`` over a uniform grid on ``[0, tau]`` against a scaled
    floor.  A kernel supported between grid points can slip through; raise
    ``grid_points`` when the kernel is known to be narrow or oscillatory.
    """
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    grid = np.linspace(0.0, system.tau, grid_points)
    top = float(np.abs(_sample_kernel(system.kernel, grid)).max())
    return top > threshold_scale * (1.0 + top)


def as_target(
    system: DistributedSystem, cfg: Optional[QuadratureConfig] = None
) -> AnalyticTarget:
    """Root-counting target; magnitudes here never need rescaling."""
    c = cfg or DEFAULT_QUADRATURE

    def value_scaled(lams):
        v = np.array(
            [evaluate_distributed(system, complex(z), c) for z in lams], np.complex128
        )
        return v, np.zeros(v.shape[0])

    def deriv_scaled(lams):
        v = np.array(
            [derivative_distributed(system, complex(z), c) for z in lams], np.complex128
        )
        return v, np.zeros(v.shape[0])

    # The integral term rotates no faster than exp(-tau * lam) does.
    return AnalyticTarget(
        value_scaled, deriv_scaled, label="distributed system",
        rotation_hint=system.tau,
    )
