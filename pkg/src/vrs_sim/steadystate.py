"""Steady state of a Liouvillian by trace-bordered linear solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSteadyState, NoConvergence, NonPhysicalState
from .linalg import HilbertSpace, dagger, solve_linear
from .model import Liouvillian

TRACE_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
POSITIVITY_ATOL = 1e-8
RESIDUAL_RTOL = 1e-10
UNIQUENESS_RTOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    @property
    def trace_defect(self) -> float:
        return float(abs(np.trace(self.matrix) - 1.0))

    @property
    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - dagger(self.matrix)).max())

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + dagger(self.matrix))
        return float(np.linalg.eigvalsh(herm)[0])


def check_unique(liouvillian: Liouvillian) -> None:
    """Raise DegenerateSteadyState unless exactly one eigenvalue is (numerically) zero."""
    mags = np.sort(np.abs(np.linalg.eigvals(liouvillian.generator)))
    if mags[-1] == 0.0 or mags[1] <= UNIQUENESS_RTOL * mags[-1]:
        raise DegenerateSteadyState(
            f"second-smallest |eigenvalue| {mags[1]:.3e} is not above "
            f"{UNIQUENESS_RTOL:g} * {mags[-1]:.3e}"
        )


def population_rows(dim: int) -> np.ndarray:
    """Rows of the vectorized generator that belong to diagonal elements.

    Only these rows are linearly dependent (their sum weighted by the identity
    vanishes because L preserves the trace), so only one of them can be traded
    for the trace functional without making the system singular.
    """
    return np.arange(dim) * (dim + 1)


def default_trace_row(generator: np.ndarray) -> int:
    """Population row with the smallest infinity norm (first on ties)."""
    dim = int(round(np.sqrt(generator.shape[0])))
    rows = population_rows(dim)
    return int(rows[np.argmin(np.abs(generator[rows]).sum(axis=1))])


def solve_steady(liouvillian: Liouvillian, row: int | None = None) -> DensityMatrix:
    """Solve ``L rho = 0`` with ``trace(rho) = 1``.

    One row of the vectorized generator is replaced by the trace functional
    and the bordered system is solved directly. ``row`` overrides the
    replaced row and must be a population row (see :func:`population_rows`);
    by default the one with the smallest infinity norm is used.
    """
    check_unique(liouvillian)
    gen = liouvillian.generator
    d = liouvillian.dim
    if row is None:
        row = default_trace_row(gen)
    elif row not in population_rows(d):
        raise ValueError(f"row {row} is not a population row of a dim-{d} density matrix")

    bordered = np.array(gen)
    bordered[row, :] = np.eye(d).reshape(-1)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[row] = 1.0
    x = solve_linear(bordered, rhs)

    scale = np.linalg.norm(gen)
    residual = np.linalg.norm(gen @ x)
    if residual > RESIDUAL_RTOL * scale:
        # one round of iterative refinement before giving up
        x = x + solve_linear(bordered, rhs - bordered @ x)
        residual = np.linalg.norm(gen @ x)
        if residual > RESIDUAL_RTOL * scale:
            raise NoConvergence(
                f"steady-state residual {residual:.3e} exceeds {RESIDUAL_RTOL:g} * ||L|| = "
                f"{RESIDUAL_RTOL * scale:.3e}"
            )

    rho = DensityMatrix(x.reshape(d, d), liouvillian.space)
    if rho.trace_defect > TRACE_ATOL:
        raise NoConvergence(f"trace defect {rho.trace_defect:.3e}")
    if rho.hermiticity_defect > HERMITIAN_ATOL:
        raise NoConvergence(f"Hermiticity defect {rho.hermiticity_defect:.3e}")
    if rho.min_eigenvalue < -POSITIVITY_ATOL:
        raise NonPhysicalState(
            f"steady state has eigenvalue {rho.min_eigenvalue:.3e}; "
            "increase n_max or reduce the pump rates"
        )
    return rho
