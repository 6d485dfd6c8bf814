"""Splitting formulas, peak extraction, lineshape fits and zero-delay g2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal
from scipy.special import voigt_profile

from .errors import BelowThreshold, ZeroPopulation
from .fitting import levenberg_marquardt
from .linalg import build_operators, dagger
from .model import Liouvillian
from .spectra import RawSpectrum
from .steadystate import DensityMatrix

FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


def cui_raymer_splittings(g: float, kappa: float, gamma: float) -> tuple[float, float]:
    """Doublet separations seen through the cavity and the emitter channels.

    Closed forms for a resonant, weakly driven system without pure dephasing:

        cavity  = 2 sqrt(g^2 - (kappa^2 + gamma^2) / 8)
        emitter = 2 sqrt(sqrt(g^4 + g^2 kappa (kappa + gamma) / 2) - kappa^2 / 4)
    """
    if min(g, kappa, gamma) < 0:
        raise ValueError("g, kappa and gamma must be >= 0")
    g2 = g * g
    cavity_rad = g2 - (kappa**2 + gamma**2) / 8.0
    emitter_rad = np.sqrt(g2 * g2 + 2.0 * g2 * kappa * (kappa + gamma) / 4.0) - kappa**2 / 4.0
    if cavity_rad < 0:
        raise BelowThreshold(f"no cavity-channel doublet: radicand {cavity_rad:.4g} < 0")
    if emitter_rad < 0:
        raise BelowThreshold(f"no emitter-channel doublet: radicand {emitter_rad:.4g} < 0")
    return 2.0 * np.sqrt(cavity_rad), 2.0 * float(np.sqrt(emitter_rad))


def find_peaks(s: RawSpectrum, prominence: float = 0.02) -> list[tuple[float, float]]:
    """Local maxima with prominence above ``prominence * max(s)``.

    Positions and heights are refined by a parabola through the three samples
    around each maximum. Returned in ascending energy.
    """
    y = s.values
    top = y.max()
    if top <= 0:
        return []
    idx, _ = scipy.signal.find_peaks(y, prominence=prominence * top)
    omega = s.omega
    h = s.grid.spacing
    peaks = []
    for i in idx:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        curv = ym - 2 * y0 + yp
        shift = 0.5 * (ym - yp) / curv if curv != 0 else 0.0
        peaks.append((float(omega[i] + shift * h), float(y0 - 0.25 * (ym - yp) * shift)))
    return peaks


def peak_separation(s: RawSpectrum, prominence: float = 0.02) -> float:
    """Distance between the two highest peaks; NaN if fewer than two."""
    peaks = find_peaks(s, prominence)
    if len(peaks) < 2:
        return float("nan")
    two = sorted(sorted(peaks, key=lambda p: p[1])[-2:])
    return two[1][0] - two[0][0]


def central_dip(s: RawSpectrum, prominence: float = 0.02) -> float:
    """Dip depth between the two highest peaks: ``1 - S(mid) / mean(peak heights)``."""
    peaks = find_peaks(s, prominence)
    if len(peaks) < 2:
        return 0.0
    (x1, y1), (x2, y2) = sorted(sorted(peaks, key=lambda p: p[1])[-2:])
    mid = np.interp(0.5 * (x1 + x2), s.omega, s.values)
    return float(1.0 - mid / (0.5 * (y1 + y2)))


def lorentzian_voigt(x, center, fwhm, area, instrument_fwhm):
    """Lorentzian of given FWHM and area, convolved with a Gaussian instrument response."""
    return area * voigt_profile(x - center, instrument_fwhm * FWHM_TO_SIGMA, 0.5 * fwhm)


@dataclass(frozen=True)
class DoubletFit:
    peak_energies: tuple[float, ...]
    linewidths: tuple[float, ...]
    areas: tuple[float, ...]
    residual_norm: float

    @property
    def n_peaks(self) -> int:
        return len(self.peak_energies)

    @property
    def splitting(self) -> float:
        if self.n_peaks < 2:
            return float("nan")
        return self.peak_energies[1] - self.peak_energies[0]

    @property
    def asymmetry(self) -> float:
        """``(I_high - I_low) / (I_high + I_low)`` of the fitted areas."""
        if self.n_peaks < 2:
            return 0.0
        low, high = self.areas
        return (high - low) / (high + low)


def _model(x, p, instrument_fwhm):
    out = np.zeros_like(x)
    for k in range(0, len(p), 3):
        out += lorentzian_voigt(x, p[k], np.exp(p[k + 1]), np.exp(p[k + 2]), instrument_fwhm)
    return out


def _fit(x, y, guess, instrument_fwhm):
    scale = np.array([max(abs(v), 1.0) if k % 3 == 0 else 1.0 for k, v in enumerate(guess)])
    return levenberg_marquardt(
        lambda p: _model(x, p, instrument_fwhm) - y, guess, scale=scale
    )


def _data_fwhm(x, y, i):
    widths = scipy.signal.peak_widths(y, [i], rel_height=0.5)[0]
    return float(widths[0] * (x[1] - x[0]))


def fit_doublet(
    s: RawSpectrum, instrument_fwhm: float, collapse_fraction: float = 0.5
) -> DoubletFit:
    """Fit two Lorentzians convolved with a fixed Gaussian instrument response.

    Falls back to a single Lorentzian when the two-peak fit collapses: centers
    closer than ``collapse_fraction`` times the mean fitted linewidth, or one
    area below 0.1 % of the other.
    """
    x = s.omega
    norm = s.values.max()
    if norm <= 0:
        raise ValueError("spectrum has no positive peak")
    y = s.values / norm
    peaks = find_peaks(RawSpectrum(s.grid, y))
    if not peaks:
        raise ValueError("spectrum has no peak to fit")
    i_top = int(np.argmax(y))
    width = max(_data_fwhm(x, y, i_top), 2 * s.grid.spacing)
    width = max(width - 0.5 * instrument_fwhm, 2 * s.grid.spacing)

    if len(peaks) >= 2:
        (x1, h1), (x2, h2) = sorted(sorted(peaks, key=lambda p: p[1])[-2:])
        w0 = max(min(width, 0.8 * (x2 - x1)), 2 * s.grid.spacing)
    else:
        x0, h0 = peaks[0]
        x1, x2, h1, h2 = x0 - width / 4, x0 + width / 4, h0, h0
        w0 = width / 2
    guess = [
        x1, np.log(w0), np.log(0.5 * np.pi * w0 * h1),
        x2, np.log(w0), np.log(0.5 * np.pi * w0 * h2),
    ]
    res = _fit(x, y, guess, instrument_fwhm)
    p = res.params
    centers = np.array([p[0], p[3]])
    widths = np.exp([p[1], p[4]])
    areas = np.exp([p[2], p[5]])
    collapsed = abs(centers[1] - centers[0]) < collapse_fraction * widths.mean() or (
        areas.min() < 1e-3 * areas.max()
    )
    if not collapsed:
        order = np.argsort(centers)
        return DoubletFit(
            tuple(float(c) for c in centers[order]),
            tuple(float(w) for w in widths[order]),
            tuple(float(a * norm) for a in areas[order]),
            res.residual_norm * norm,
        )

    x0 = float(x[i_top])
    single = _fit(x, y, [x0, np.log(width), np.log(0.5 * np.pi * width * y[i_top])], instrument_fwhm)
    q = single.params
    return DoubletFit(
        (float(q[0]),), (float(np.exp(q[1])),), (float(np.exp(q[2]) * norm),),
        single.residual_norm * norm,
    )


@dataclass(frozen=True)
class PolarizationFit:
    theta_a: float
    phi_qd: float
    amplitude: float
    residual_norm: float
    phi_identifiable: bool = True


def polarization_curve(alpha_deg, theta_a, phi_qd, amplitude=1.0, phi_sign=1):
    """Detected emitter intensity versus HWP angle ``alpha`` (deg)."""
    two_alpha = np.deg2rad(2.0 * np.asarray(alpha_deg, dtype=float))
    th, ph = np.deg2rad(theta_a), phi_sign * np.deg2rad(phi_qd)
    field = np.cos(th) * np.cos(two_alpha) + np.exp(1j * ph) * np.sin(th) * np.sin(two_alpha)
    return amplitude * np.abs(field) ** 2


def _fold_angles(theta_rad: float, phi_rad: float) -> tuple[float, float]:
    """Map fitted angles onto theta in [0, 90], phi in [0, 180] with the same curve."""
    c2 = np.cos(theta_rad) ** 2
    q = np.sin(2 * theta_rad) * np.cos(phi_rad)
    theta = np.arccos(np.sqrt(np.clip(c2, 0.0, 1.0)))
    s2 = np.sin(2 * theta)
    cos_phi = np.clip(q / s2, -1.0, 1.0) if s2 > 0 else 0.0
    return float(np.rad2deg(theta)), float(np.rad2deg(np.arccos(cos_phi)))


POLARIZATION_STARTS = (10.0, 35.0, 55.0, 80.0)


def fit_polarization(intensities) -> PolarizationFit:
    """Fit dipole mixing angle and ellipticity phase to intensity vs HWP angle.

    ``intensities`` is a sequence of ``(alpha_deg, counts)``. The amplitude is
    free; four starting values of ``theta_a`` are tried and the lowest
    residual wins (earliest start on ties).
    """
    data = np.asarray(intensities, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 6:
        raise ValueError("need at least 6 (alpha, counts) samples")
    alpha, counts = data[:, 0], data[:, 1]
    if np.ptp(2 * alpha) < 180.0:
        raise ValueError("samples must span at least 180 degrees of 2*alpha")
    norm = np.abs(counts).max()
    if norm == 0:
        raise ValueError("all counts are zero")
    y = counts / norm
    two_alpha = np.deg2rad(2.0 * alpha)
    c, s = np.cos(two_alpha), np.sin(two_alpha)

    def residuals(p):
        amp, th, ph = p
        model = (np.cos(th) * c) ** 2 + (np.sin(th) * s) ** 2
        model = model + 2 * np.cos(th) * np.sin(th) * np.cos(ph) * c * s
        return amp * model - y

    best = None
    for theta0 in POLARIZATION_STARTS:
        res = levenberg_marquardt(residuals, [y.max(), np.deg2rad(theta0), np.deg2rad(90.0)])
        if best is None or res.cost < best.cost:
            best = res
    amp, th, ph = best.params
    theta_a, phi_qd = _fold_angles(th, ph)
    identifiable = np.sin(np.deg2rad(2 * theta_a)) > 0.05
    return PolarizationFit(
        theta_a, phi_qd, float(amp * norm), best.residual_norm * norm, bool(identifiable)
    )


def g2_zero(liouvillian: Liouvillian, rho_ss, channel: str = "cavity") -> float:
    """Normalized zero-delay intensity correlation of the cavity or emitter field."""
    a, s = build_operators(liouvillian.space)
    try:
        op = {"cavity": a, "emitter": s}[channel]
    except KeyError:
        raise ValueError(f"channel must be 'cavity' or 'emitter', got {channel!r}") from None
    rho = rho_ss.matrix if isinstance(rho_ss, DensityMatrix) else np.asarray(rho_ss)
    opd = dagger(op)
    n = np.trace(rho @ opd @ op).real
    if n <= 1e-12:
        raise ZeroPopulation(f"<{channel} population> = {n:.3e}")
    return float(np.trace(rho @ opd @ opd @ op @ op).real / n**2)
