"""Stationary two-time correlation spectra and instrument convolution.

For operators ``A`` (left) and ``B`` (right) the quantum regression theorem
gives ``<A(0) B(tau)> = tr(B exp(L tau)[rho_ss A])``. Spectra are one-sided
transforms normalized as

    F(w) = (1/pi) int_0^inf dtau exp(i w tau) <A(0) B(tau)>,

so ``Re F`` of a pure Lorentzian line has unit area when ``<A B> = 1``.

The elastic part ``<A><B>`` (a delta function at the frame origin) is left
out: the initial state of the regression is projected onto the traceless
subspace. Under incoherent pumping ``<a> = <sigma> = 0`` and nothing is lost.

Two independent routes are provided. :func:`correlation_spectra` solves the
resolvent ``(i w + L) X = -X0`` pointwise in frequency and is the production
path. :func:`correlation_spectrum_time_domain` integrates ``exp(L tau) X0``
with fixed-step RK4 and transforms the samples by quadrature; it exists to
cross-check the first.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.signal
from scipy.special import ndtr

from .errors import GridTooCoarse, NoConvergence, ResolventSingular, SingularMatrix
from .linalg import lu_factor
from .model import Liouvillian
from .steadystate import DensityMatrix


@dataclass(frozen=True)
class FrequencyGrid:
    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)) or self.stop <= self.start:
            raise ValueError(f"need finite start < stop, got {self.start!r}, {self.stop!r}")

    @classmethod
    def centered(cls, center: float, half_width: float = 250.0, n_points: int = 2001):
        return cls(center - half_width, center + half_width, n_points)

    @property
    def omega(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)


@dataclass(frozen=True)
class RawSpectrum:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.omega


def _rho_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _initial_state(rho: np.ndarray, op_left: np.ndarray) -> np.ndarray:
    """``vec(rho A)`` with its steady-state (elastic) component removed."""
    x0 = rho @ op_left
    return (x0 - np.trace(x0) * rho).reshape(-1)


def _trace_row(op_right: np.ndarray) -> np.ndarray:
    # tr(B Y) == vec(B^T) . vec(Y) for row-major vec
    return np.asarray(op_right).T.reshape(-1)


def correlation_spectra(
    liouvillian: Liouvillian,
    rho_ss,
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    grid: FrequencyGrid,
    workers: int = 1,
) -> list[np.ndarray]:
    """Complex one-sided spectra for several ``(op_left, op_right)`` pairs at once.

    Each frequency point is an independent LU solve, so splitting the grid
    across ``workers`` threads gives results bit-identical to a serial run.
    """
    rho = _rho_matrix(rho_ss)
    d = liouvillian.dim
    gen = liouvillian.generator
    # Rank-one border |rho_ss><<1| keeps the matrix invertible at w = 0 without
    # changing the solution on the traceless subspace.
    base = gen + np.outer(rho.reshape(-1), np.eye(d).reshape(-1))

    lefts: list[np.ndarray] = []
    left_index = []
    for op_left, _ in pairs:
        for i, known in enumerate(lefts):
            if known is op_left or np.array_equal(known, op_left):
                left_index.append(i)
                break
        else:
            left_index.append(len(lefts))
            lefts.append(op_left)
    rhs = np.stack([_initial_state(rho, op) for op in lefts], axis=1)
    rows = np.stack([_trace_row(op_right) for _, op_right in pairs])
    omega = grid.omega
    eye = np.eye(d * d)

    def solve_range(lo: int, hi: int) -> np.ndarray:
        out = np.empty((len(pairs), hi - lo), dtype=complex)
        for n in range(lo, hi):
            try:
                factors = lu_factor(base + 1j * omega[n] * eye)
            except SingularMatrix as exc:
                raise ResolventSingular(f"resolvent singular at omega = {omega[n]!r}: {exc}")
            y = scipy.linalg.lu_solve(factors, rhs, check_finite=False)
            for p in range(len(pairs)):
                out[p, n - lo] = -(rows[p] @ y[:, left_index[p]]) / np.pi
        return out

    n = grid.n_points
    if workers <= 1:
        result = solve_range(0, n)
    else:
        edges = np.linspace(0, n, min(workers * 4, n) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda e: solve_range(*e), zip(edges[:-1], edges[1:])))
        result = np.concatenate(parts, axis=1)
    return [result[p] for p in range(len(pairs))]


def correlation_spectrum(
    liouvillian: Liouvillian,
    rho_ss,
    op_left: np.ndarray,
    op_right: np.ndarray,
    grid: FrequencyGrid,
    workers: int = 1,
) -> np.ndarray:
    """Complex one-sided transform of ``<op_left(0) op_right(tau)>`` on ``grid``."""
    return correlation_spectra(liouvillian, rho_ss, [(op_left, op_right)], grid, workers)[0]


def emission_spectrum(
    liouvillian: Liouvillian, rho_ss, op: np.ndarray, grid: FrequencyGrid
) -> RawSpectrum:
    """Physical emission spectrum ``Re F`` of ``<op^+(0) op(tau)>``."""
    f = correlation_spectrum(liouvillian, rho_ss, op.conj().T, op, grid)
    return RawSpectrum(grid, f.real)


def rk4_propagator(generator: np.ndarray, t: float, max_substep: float) -> np.ndarray:
    """Matrix of ``n`` classical RK4 steps of ``dx/dt = G x`` covering time ``t``."""
    n = max(1, int(np.ceil(t / max_substep)))
    a = (t / n) * generator
    eye = np.eye(generator.shape[0], dtype=complex)
    a2 = a @ a
    step = eye + a + a2 / 2 + a2 @ a / 6 + a2 @ a2 / 24
    return np.linalg.matrix_power(step, n)


def correlation_spectrum_time_domain(
    liouvillian: Liouvillian,
    rho_ss,
    op_left: np.ndarray,
    op_right: np.ndarray,
    grid: FrequencyGrid,
    *,
    nodes: int = 16,
    substep_tol: float = 0.005,
    phase_per_interval: float = 12.0,
    tail_rtol: float = 1e-12,
    block: int = 256,
    max_intervals: int = 4_000_000,
) -> np.ndarray:
    """Same quantity as :func:`correlation_spectrum`, computed in the time domain.

    The regression state is propagated with fixed-step RK4 (step at most
    ``substep_tol / ||L||_inf``) and sampled at Gauss-Legendre nodes of
    uniform intervals. The one-sided transform is the composite quadrature
    sum, evaluated on the uniform frequency grid with a chirp-z transform.
    Integration stops once the regression state has decayed by ``tail_rtol``.
    """
    rho = _rho_matrix(rho_ss)
    gen = np.asarray(liouvillian.generator)
    x = _initial_state(rho, op_left)
    row = _trace_row(op_right)

    radius = np.abs(gen).sum(axis=1).max()
    omega = grid.omega
    w_max = np.abs(omega).max()
    h = phase_per_interval / (w_max + radius)
    max_substep = substep_tol / radius if radius > 0 else h

    t_nodes, w_nodes = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * h * (t_nodes + 1.0)
    w = 0.5 * h * w_nodes
    # sampling rows: C(k h + s_j) = row . P(s_j) x_k
    sample = np.stack([row @ rk4_propagator(gen, sj, max_substep) for sj in s])
    step = rk4_propagator(gen, h, max_substep)

    # powers of the interval propagator, so a whole block is one product
    powers = np.empty((block,) + step.shape, dtype=complex)
    powers[0] = np.eye(step.shape[0])
    for j in range(1, block):
        powers[j] = step @ powers[j - 1]
    sample_blocks = np.einsum("jd,bde->bje", sample, powers)  # (block, nodes, D)
    jump = step @ powers[-1]

    x0_norm = np.linalg.norm(x)
    chunks = []
    n_intervals = 0
    while True:
        chunks.append(sample_blocks @ x)  # (block, nodes)
        n_intervals += block
        x = jump @ x
        if x0_norm == 0.0 or np.linalg.norm(x) <= tail_rtol * x0_norm:
            break
        if n_intervals >= max_intervals:
            raise NoConvergence(
                f"regression state did not decay within {max_intervals} intervals"
            )
    samples = np.concatenate(chunks, axis=0).T  # (nodes, K)

    # sum_k C[j, k] exp(i w_n k h) with w_n = w_0 + n dw, as a chirp-z transform
    dw = grid.spacing
    ratio = np.exp(1j * dw * h)
    origin = np.exp(-1j * omega[0] * h)
    sums = scipy.signal.czt(samples, m=grid.n_points, w=ratio, a=origin, axis=-1)
    local = w[:, None] * np.exp(1j * np.outer(s, omega))  # (nodes, N)
    return (local * sums).sum(axis=0) / np.pi


def gaussian_kernel(fwhm: float, spacing: float) -> np.ndarray:
    """Unit-sum Gaussian kernel, each tap integrated over its grid cell."""
    if fwhm <= 0:
        return np.ones(1)
    sigma = fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    half = int(np.ceil(8.0 * sigma / spacing)) + 1
    # left half from lower-tail probabilities (no cancellation), then mirrored
    edges = (np.arange(-half, 1) - 0.5) * spacing / sigma
    cdf = ndtr(np.append(edges, 0.0))
    left = np.diff(cdf)
    left[-1] *= 2.0  # the central cell straddles zero
    kernel = np.concatenate([left, left[-2::-1]])
    return kernel / kernel.sum()


def convolve_instrument(
    s: RawSpectrum, fwhm: float, check_sampling: bool = True
) -> RawSpectrum:
    """Convolve with a unit-area Gaussian instrument response of width ``fwhm``.

    The grid must sample the response adequately (spacing <= fwhm / 6) unless
    ``check_sampling`` is off; as ``fwhm`` drops below the grid spacing the
    cell-integrated kernel tends to the identity. Signal near the grid edges
    spreads past the boundary and is lost.
    """
    if fwhm < 0:
        raise ValueError(f"fwhm must be >= 0, got {fwhm!r}")
    spacing = s.grid.spacing
    if fwhm == 0:
        return s
    if check_sampling and spacing > fwhm / 6.0:
        raise GridTooCoarse(
            f"grid spacing {spacing:g} ueV exceeds fwhm/6 = {fwhm / 6.0:g} ueV"
        )
    kernel = gaussian_kernel(fwhm, spacing)
    half = (len(kernel) - 1) // 2
    full = np.convolve(s.values, kernel, mode="full")
    return RawSpectrum(s.grid, full[half : half + s.grid.n_points])
