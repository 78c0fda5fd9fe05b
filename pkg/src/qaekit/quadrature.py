"""Riemann-rule grids, combinations and a-priori error bounds.

All rules discretize [0, y] with 2**n nodes. A rule's estimate is
y * mean(g(nodes)); trapezoid and Simpson are classical combinations of the
base rules, so they cost extra circuit runs rather than extra qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RULES = ("left", "right", "midpoint", "trapezoid", "simpson")
BASE_RULES = ("left", "right", "midpoint")

# which base-rule estimates each rule consumes
RULE_INPUTS = {
    "left": ("left",),
    "right": ("right",),
    "midpoint": ("midpoint",),
    "trapezoid": ("left", "right"),
    "simpson": ("left", "right", "midpoint"),
}


@dataclass(frozen=True)
class QuadratureSpec:
    n: int  # qubits per dimension -> 2**n nodes
    y: float  # interval end
    rule: str

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not self.y > 0:
            raise ValueError("interval end must be positive")


def make_grid(spec: QuadratureSpec) -> np.ndarray:
    """Nodes of a base rule; combination rules have no single grid."""
    m = 1 << spec.n
    i = np.arange(m, dtype=float)
    if spec.rule == "left":
        return spec.y * i / m
    if spec.rule == "right":
        return spec.y * (i + 1.0) / m
    if spec.rule == "midpoint":
        return spec.y * (i + 0.5) / m
    raise ValueError(f"{spec.rule} is a combination rule, not a grid rule")


def combine_estimates(rule: str, base: dict[str, float]) -> float:
    """Assemble a rule's integral estimate from base-rule integral estimates."""
    if rule in BASE_RULES:
        return base[rule]
    if rule == "trapezoid":
        return 0.5 * (base["left"] + base["right"])
    if rule == "simpson":
        trap = 0.5 * (base["left"] + base["right"])
        return (2.0 * base["midpoint"] + trap) / 3.0
    raise ValueError(f"unknown rule {rule!r}")


def classical_reference(g, spec: QuadratureSpec) -> float:
    """The rule's estimate computed classically (no circuits)."""
    if spec.rule in BASE_RULES:
        return spec.y * float(np.mean(g(make_grid(spec))))
    base = {
        r: spec.y * float(np.mean(g(make_grid(QuadratureSpec(spec.n, spec.y, r)))))
        for r in RULE_INPUTS[spec.rule]
    }
    return combine_estimates(spec.rule, base)


@dataclass(frozen=True)
class ErrorBound:
    rule: str
    n: int
    dims: int
    interval_end: float
    derivative_maxima: tuple[float, ...]
    bound: float


# (constant, derivative order, mesh order) for d = 1 on [0, 1]
_BOUND_SHAPE = {
    "left": (0.5, 1, 1),
    "right": (0.5, 1, 1),
    "midpoint": (1.0 / 24.0, 2, 2),
    "trapezoid": (1.0 / 12.0, 2, 2),
    "simpson": (1.0 / 2880.0, 4, 4),
}


def error_bound(rule: str, n: int, max_deriv, y: float = 1.0, d: int = 1) -> ErrorBound:
    """A-priori bound on |integral - rule estimate|.

    max_deriv is the max absolute value, over [0, y], of the derivative the
    rule's bound depends on (order 1 for left/right, 2 for midpoint and
    trapezoid, 4 for Simpson). Multivariate (d > 1) supports the midpoint
    rule only and takes one second-derivative maximum per dimension; the
    domain is then [0, y]**d.
    """
    if rule not in _BOUND_SHAPE:
        raise ValueError(f"no bound for rule {rule!r}")
    const, _, mesh_order = _BOUND_SHAPE[rule]
    if d == 1:
        dm = (float(max_deriv),) if np.isscalar(max_deriv) else tuple(float(v) for v in max_deriv)
        if len(dm) != 1:
            raise ValueError("one derivative maximum for d = 1")
        b = const * y ** (mesh_order + 1) * dm[0] / 2 ** (mesh_order * n)
        return ErrorBound(rule, n, 1, y, dm, float(b))
    if rule != "midpoint":
        raise ValueError("multivariate bounds are available for the midpoint rule only")
    dm = tuple(float(v) for v in np.atleast_1d(max_deriv))
    if len(dm) != d:
        raise ValueError("need one second-derivative maximum per dimension")
    b = y ** (d + 2) / 24.0 * sum(dm) / 4**n
    return ErrorBound(rule, n, d, y, dm, float(b))


def exact_sin2_integral(y: float) -> float:
    """Closed form of the integral of sin^2(pi x) over [0, y]."""
    return (2.0 * math.pi * y - math.sin(2.0 * math.pi * y)) / (4.0 * math.pi)


def convergence_slope(ns, errors) -> float:
    """Least-squares slope of log2(error) against n (mesh-halving exponent)."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errors, dtype=float)
    if np.any(errs <= 0):
        raise ValueError("errors must be positive to fit a slope")
    return float(np.polyfit(ns, np.log2(errs), 1)[0])
