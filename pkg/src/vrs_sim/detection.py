"""Detected spectra behind a half-wave plate and polarizer.

The detected field is the projection

    E = cos(T) (E_x^cav + E_x^em) + sin(T) E_y^em

with emitter fields ``sqrt(A gamma) (cos(theta_a), sin(theta_a) e^{+-i phi_qd}) sigma``
and cavity field ``sqrt(B kappa) (-i e^{-i theta_c}) a``. Its spectrum splits
into four channels: pure cavity ``s_c``, pure emitter ``s_a``, and two
interference terms, ``s_i1`` (x-polarized emitter with the cavity) and
``s_i2`` (y-polarized emitter with the cavity, present only because the
polarizer projects both onto one axis). The emitter randomly picks the sign
of ``phi_qd``, so measured spectra are averages over both signs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .linalg import HilbertSpace, build_operators, dagger
from .model import Liouvillian, QedParams, build_liouvillian
from .spectra import FrequencyGrid, RawSpectrum, convolve_instrument, correlation_spectra
from .steadystate import DensityMatrix, solve_steady

AB_RATIO = 2.85
HWP_CAVITY_ALIGNED = 5.5  # HWP angle (deg) at which the cavity field passes the PBS


@dataclass(frozen=True)
class DetectionParams:
    theta_proj: float = 0.0
    amp_a: float = 1.0
    amp_b: float = 1.0 / AB_RATIO
    overlap_p: float = 1.0
    theta_c: float = 0.0
    instrument_fwhm: float = 13.5

    def __post_init__(self):
        if not 0.0 <= self.overlap_p <= 1.0:
            raise ValueError(f"overlap_p must lie in [0, 1], got {self.overlap_p!r}")
        if self.amp_a < 0 or self.amp_b < 0:
            raise ValueError("amp_a and amp_b must be >= 0")
        if self.instrument_fwhm < 0:
            raise ValueError("instrument_fwhm must be >= 0")
        for name in ("theta_proj", "theta_c", "amp_a", "amp_b", "instrument_fwhm"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def hwp_to_theta(alpha: float) -> float:
    """Projection angle (deg) for HWP angle ``alpha`` (deg), reduced to [0, 180)."""
    return float(np.mod(2.0 * (alpha - HWP_CAVITY_ALIGNED), 180.0))


@dataclass(frozen=True)
class ChannelWeights:
    """Prefactors of the four channels for one sign of ``phi_qd``.

    The interference weights are complex: ``s_i = Re[w F_sa + conj(w) F_as]``
    where ``F_sa`` and ``F_as`` are the transforms of ``<sigma^+ a>`` and
    ``<a^+ sigma>``.
    """

    c: float
    a: float
    i1: complex
    i2: complex


def channel_prefactors(qed: QedParams, det: DetectionParams, phi_sign: int) -> ChannelWeights:
    theta = np.deg2rad(det.theta_proj)
    th_a = np.deg2rad(qed.theta_a)
    phi = phi_sign * np.deg2rad(qed.phi_qd)
    psi = np.pi / 2 + np.deg2rad(det.theta_c)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    w_c = det.amp_b * qed.kappa * cos_t**2
    w_a = det.amp_a * qed.gamma * abs(np.cos(th_a) * cos_t + np.exp(1j * phi) * np.sin(th_a) * sin_t) ** 2
    cross = np.sqrt(det.amp_a * det.amp_b) * np.sqrt(qed.kappa * qed.gamma * det.overlap_p)
    w_i1 = cross * np.cos(th_a) * cos_t**2 * np.exp(-1j * psi)
    w_i2 = cross * np.sin(th_a) * sin_t * cos_t * np.exp(-1j * (psi + phi))
    return ChannelWeights(float(w_c), float(w_a), complex(w_i1), complex(w_i2))


@dataclass(frozen=True)
class ChannelSpectra:
    grid: FrequencyGrid
    s_c: np.ndarray
    s_a: np.ndarray
    s_i1: np.ndarray
    s_i2: np.ndarray
    total: np.ndarray
    convolved: "ChannelSpectra | None" = None

    CHANNELS = ("s_c", "s_a", "s_i1", "s_i2", "total")

    def __post_init__(self):
        for name in self.CHANNELS:
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (self.grid.n_points,):
                raise ValueError(f"{name} has shape {v.shape}, expected ({self.grid.n_points},)")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_channels(cls, grid, s_c, s_a, s_i1, s_i2) -> "ChannelSpectra":
        return cls(grid, s_c, s_a, s_i1, s_i2, s_c + s_a + s_i1 + s_i2)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.omega

    def spectrum(self, name: str = "total") -> RawSpectrum:
        if name not in self.CHANNELS:
            raise KeyError(name)
        return RawSpectrum(self.grid, getattr(self, name))

    def convolve(self, fwhm: float) -> "ChannelSpectra":
        parts = {n: convolve_instrument(self.spectrum(n), fwhm).values for n in self.CHANNELS}
        return ChannelSpectra(self.grid, **parts)

    def with_convolution(self, fwhm: float) -> "ChannelSpectra":
        return replace(self, convolved=self.convolve(fwhm))


def average_spectra(items: Sequence[ChannelSpectra]) -> ChannelSpectra:
    grid = items[0].grid
    parts = {n: sum(getattr(c, n) for c in items) / len(items) for n in ChannelSpectra.CHANNELS}
    return ChannelSpectra(grid, **parts)


@dataclass(frozen=True)
class Correlators:
    """Steady state and the four correlator spectra for one parameter set."""

    qed: QedParams
    liouvillian: Liouvillian
    rho: DensityMatrix
    cavity: np.ndarray  # <a^+(0) a(tau)>
    emitter: np.ndarray  # <sigma^+(0) sigma(tau)>
    emitter_cavity: np.ndarray  # <sigma^+(0) a(tau)>
    cavity_emitter: np.ndarray  # <a^+(0) sigma(tau)>


def compute_correlators(
    qed: QedParams, grid: FrequencyGrid, n_max: int = 3, workers: int = 1
) -> Correlators:
    space = HilbertSpace(n_max)
    a, s = build_operators(space)
    liou = build_liouvillian(qed, space)
    rho = solve_steady(liou)
    f_cc, f_ss, f_sc, f_cs = correlation_spectra(
        liou,
        rho,
        [(dagger(a), a), (dagger(s), s), (dagger(s), a), (dagger(a), s)],
        grid,
        workers=workers,
    )
    return Correlators(qed, liou, rho, f_cc, f_ss, f_sc, f_cs)


def compose_channels(corr: Correlators, det: DetectionParams, grid: FrequencyGrid) -> ChannelSpectra:
    """Weight one sign's correlators into channel spectra (no convolution)."""
    w = channel_prefactors(corr.qed, det, corr.qed.phi_sign)

    def interference(weight: complex) -> np.ndarray:
        return (weight * corr.emitter_cavity + np.conj(weight) * corr.cavity_emitter).real

    return ChannelSpectra.from_channels(
        grid,
        w.c * corr.cavity.real,
        w.a * corr.emitter.real,
        interference(w.i1),
        interference(w.i2),
    )


def _sign_correlators(qed, grid, n_max, workers):
    return [
        compute_correlators(replace(qed, phi_sign=sign), grid, n_max, workers) for sign in (1, -1)
    ]


def channel_spectra_for_sign(
    qed: QedParams,
    det: DetectionParams,
    grid: FrequencyGrid,
    phi_sign: int,
    n_max: int = 3,
) -> ChannelSpectra:
    corr = compute_correlators(replace(qed, phi_sign=phi_sign), grid, n_max)
    return compose_channels(corr, det, grid)


def detected_spectrum(
    qed: QedParams,
    det: DetectionParams,
    grid: FrequencyGrid,
    n_max: int = 3,
    workers: int = 1,
) -> ChannelSpectra:
    """Sign-averaged detected spectrum; ``.convolved`` holds the instrument-blurred copy.

    ``qed.phi_sign`` is ignored: both signs are always computed.
    """
    return projection_sweep(qed, det, [det.theta_proj], grid, n_max, workers)[0]


def projection_sweep(
    qed: QedParams,
    det: DetectionParams,
    thetas: Iterable[float],
    grid: FrequencyGrid,
    n_max: int = 3,
    workers: int = 1,
) -> list[ChannelSpectra]:
    """Detected spectra for several projection angles, sharing one set of correlators."""
    corrs = _sign_correlators(qed, grid, n_max, workers)
    out = []
    for theta in thetas:
        d = replace(det, theta_proj=float(theta))
        avg = average_spectra([compose_channels(c, d, grid) for c in corrs])
        out.append(avg.with_convolution(det.instrument_fwhm))
    return out


def hwp_sweep(
    qed: QedParams,
    det: DetectionParams,
    alphas: Iterable[float],
    grid: FrequencyGrid,
    n_max: int = 3,
    workers: int = 1,
) -> list[ChannelSpectra]:
    return projection_sweep(qed, det, [hwp_to_theta(a) for a in alphas], grid, n_max, workers)


def detuning_sweep(
    qed: QedParams,
    det: DetectionParams,
    detunings: Iterable[float],
    grid: FrequencyGrid,
    n_max: int = 3,
    workers: int = 1,
) -> list[ChannelSpectra]:
    """One detected spectrum per cavity detuning ``omega_c - omega_a`` (emitter held fixed)."""
    return [
        detected_spectrum(replace(qed, omega_c=qed.omega_a + float(d)), det, grid, n_max, workers)
        for d in detunings
    ]
