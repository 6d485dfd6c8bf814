"""Levenberg-Marquardt least squares with central-difference Jacobians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FitDiverged


@dataclass(frozen=True)
class LeastSquaresResult:
    params: np.ndarray
    residuals: np.ndarray
    cost: float
    iterations: int

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(self.cost))


def numeric_jacobian(fun, p: np.ndarray, steps: np.ndarray) -> np.ndarray:
    cols = []
    for j, h in enumerate(steps):
        dp = np.zeros_like(p)
        dp[j] = h
        cols.append((fun(p + dp) - fun(p - dp)) / (2 * h))
    return np.stack(cols, axis=1)


def levenberg_marquardt(
    fun: Callable[[np.ndarray], np.ndarray],
    p0,
    scale=None,
    max_iter: int = 200,
    ftol: float = 1e-12,
    xtol: float = 1e-12,
    rel_step: float = 1e-6,
    damping: float = 1e-3,
) -> LeastSquaresResult:
    """Minimize ``sum(fun(p)**2)``.

    Marquardt scaling of the damping term; the damping starts at ``damping``
    and is divided by 10 after an accepted step, multiplied by 10 after a
    rejected one. Jacobian columns use central differences with step
    ``rel_step * scale``. Stops on a relative cost decrease below ``ftol``, a
    step below ``xtol`` or a cost at rounding level of the initial one.
    Raises FitDiverged when ``max_iter`` iterations pass without stopping.
    """
    p = np.array(p0, dtype=float)
    scale = np.maximum(np.abs(p), 1.0) if scale is None else np.asarray(scale, dtype=float)
    steps = rel_step * scale
    r = np.asarray(fun(p), dtype=float)
    cost = float(r @ r)
    if not np.isfinite(cost):
        raise FitDiverged("residuals are not finite at the initial guess")
    lam = damping
    cost_floor = np.finfo(float).eps ** 2 * cost  # a zero-residual fit at machine precision

    for it in range(1, max_iter + 1):
        jac = numeric_jacobian(fun, p, steps)
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.maximum(np.diag(jtj), 1e-12 * max(np.diag(jtj).max(), 1e-300))
        while True:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                p_new = p + step
                r_new = np.asarray(fun(p_new), dtype=float)
                cost_new = float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    break
            lam *= 10.0
            if lam > 1e16:
                # no downhill step exists at machine precision: a minimum
                return LeastSquaresResult(p, r, cost, it)
        lam /= 10.0
        decrease = cost - cost_new
        p, r, cost = p_new, r_new, cost_new
        if cost <= cost_floor or decrease <= ftol * cost or np.linalg.norm(step) <= xtol * (np.linalg.norm(p) + xtol):
            return LeastSquaresResult(p, r, cost, it)

    raise FitDiverged(f"no convergence within {max_iter} iterations (cost {cost:.3e})")
