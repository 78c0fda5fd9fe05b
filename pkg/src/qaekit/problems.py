"""The sin^2 integration benchmark used across the package.

The integrand sin^2(pi x) maps onto rotation angles directly: node x_i gets
angle 2*pi*x_i, since Ry(2 pi x)|0> puts amplitude sin(pi x) on |1>. On an
equidistant grid the multiplexed rotation therefore lowers to one plain
rotation plus one controlled rotation per state qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureSpec, exact_sin2_integral, make_grid
from .state_prep import FlaggedOperator, RotationOracle, from_rotation_oracle


def sin2(x):
    return np.sin(np.pi * np.asarray(x, dtype=float)) ** 2


@dataclass(frozen=True)
class IntegrationProblem:
    spec: QuadratureSpec
    grid: np.ndarray
    values: np.ndarray
    operator: FlaggedOperator
    exact_integral: float

    @property
    def flags(self):
        return self.operator.flags

    def integral_from_probability(self, p: float) -> float:
        """Scale a good-state probability back to an integral estimate."""
        return self.spec.y * p


def sin2_problem(n: int, y: float, rule: str) -> IntegrationProblem:
    """Preparation operator whose good-state probability is the rule's mean of sin^2(pi x)."""
    spec = QuadratureSpec(n, y, rule)
    grid = make_grid(spec)  # rejects combination rules
    values = sin2(grid)
    oracle = RotationOracle(tuple(range(n)), n, tuple(2.0 * math.pi * grid))
    op = from_rotation_oracle(oracle, "mean of sin^2(pi x_i) over the grid")
    return IntegrationProblem(spec, grid, values, op, exact_sin2_integral(y))


def sin2_derivative_bound(order: int, y: float) -> float:
    """Max of |d^order/dx^order sin^2(pi x)| over [0, y]."""
    if order == 1:  # pi |sin(2 pi x)|, peaks at odd multiples of 1/4
        if y >= 0.25:
            return math.pi
        return math.pi * math.sin(2.0 * math.pi * y)
    if order == 2:  # 2 pi^2 |cos(2 pi x)|, maximal at x = 0
        return 2.0 * math.pi**2
    if order == 4:  # 8 pi^4 |cos(2 pi x)|, maximal at x = 0
        return 8.0 * math.pi**4
    raise ValueError("bounds use derivative orders 1, 2 and 4")
