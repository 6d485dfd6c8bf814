"""Command line driver: ``vrs-sim <config.ini> [--svg] [--out DIR] [--grid-points N]``.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
``VRS_SIM_THREADS`` caps the worker threads of the resolvent sweep (0 = auto).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import central_dip, fit_doublet, fit_polarization, peak_separation
from .config import RunConfig, parse_config
from .detection import ChannelSpectra, detected_spectrum, detuning_sweep, hwp_sweep, projection_sweep
from .errors import ConfigError, NumericError, ValidationError
from .spectra import FrequencyGrid, RawSpectrum

SPECTRA_HEADER = ["omega_ueV", "s_c", "s_a", "s_i1", "s_i2", "total", "total_convolved"]
SUMMARY_HEADER = [
    "label", "sweep_value", "channel", "splitting_ueV", "peak_separation_ueV",
    "peak_low_ueV", "peak_high_ueV", "width_low_ueV", "width_high_ueV",
    "area_low", "area_high", "asymmetry", "central_dip", "n_peaks",
]
POLARIZATION_HEADER = ["label", "theta_a_deg", "phi_qd_deg", "amplitude", "residual_norm", "phi_identifiable"]
SPACING_RTOL = 1e-6


def _num(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _spectra_rows(spec: ChannelSpectra, sweep_value=None):
    conv = spec.convolved.total if spec.convolved is not None else spec.total
    cols = [spec.omega, spec.s_c, spec.s_a, spec.s_i1, spec.s_i2, spec.total, conv]
    lead = [] if sweep_value is None else [_num(sweep_value)]
    for k in range(spec.grid.n_points):
        yield lead + [_num(c[k]) for c in cols]


def _summary_row(label, sweep_value, channel, spec: ChannelSpectra, instrument_fwhm):
    s = spec.convolved.spectrum(channel) if spec.convolved is not None else spec.spectrum(channel)
    fit = fit_doublet(s, instrument_fwhm)
    pad = lambda t: list(t) + [float("nan")] * (2 - len(t))  # noqa: E731
    e, w, a = pad(fit.peak_energies), pad(fit.linewidths), pad(fit.areas)
    if fit.n_peaks == 1:
        e, w, a = [e[0], e[0]], [w[0], w[0]], [a[0], a[0]]
    return [
        label,
        "" if sweep_value is None else _num(sweep_value),
        channel,
        _num(fit.splitting),
        _num(peak_separation(s)),
        _num(e[0]), _num(e[1]), _num(w[0]), _num(w[1]), _num(a[0]), _num(a[1]),
        _num(fit.asymmetry),
        _num(central_dip(s)),
        str(fit.n_peaks),
    ]


def _svg(series, title: str) -> str:
    """Polyline plot of ``[(label, x, y), ...]``, each curve scaled to the common maximum."""
    width, height, margin = 640, 400, 50
    xs = np.concatenate([np.asarray(x) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y) for _, _, y in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = min(0.0, float(ys.min())), float(ys.max())
    if y1 <= y0:
        y1 = y0 + 1.0
    if x1 <= x0:
        x1 = x0 + 1.0

    def px(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{margin / 2:.1f}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">energy (ueV)</text>',
        f'<text x="{margin}" y="{height - margin + 15}" text-anchor="middle" font-size="10">{x0:.6g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 15}" text-anchor="middle" font-size="10">{x1:.6g}</text>',
    ]
    for k, (label, x, y) in enumerate(series):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = colors[k % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(
            f'<text x="{width - margin - 5}" y="{margin + 15 * (k + 1)}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _spectra_svg(specs, labels, title):
    series = []
    for spec, label in zip(specs, labels):
        conv = spec.convolved.total if spec.convolved is not None else spec.total
        series.append((label, spec.omega, conv))
    return _svg(series, title)


def _read_pairs(path: Path):
    """Two leading numeric columns of a CSV; a non-numeric first row is a header."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError("data", f"cannot read {path}: {exc.strerror}") from None
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip():
            continue
        try:
            rows.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            if rows or lineno > 1:
                raise ValidationError("data", f"{path}:{lineno}: expected two numbers") from None
    if not rows:
        raise ValidationError("data", f"{path} holds no samples")
    return np.array(rows)


def _spectrum_from_data(data: np.ndarray) -> RawSpectrum:
    x, y = data[:, 0], data[:, 1]
    if len(x) < 3:
        raise ValidationError("data", "need at least 3 spectrum samples")
    grid = FrequencyGrid(float(x[0]), float(x[-1]), len(x))
    if np.abs(x - grid.omega).max() > SPACING_RTOL * max(abs(grid.spacing), 1.0) * len(x):
        raise ValidationError("data", "spectrum energies must be ascending and uniformly spaced")
    return RawSpectrum(grid, y)


class Runner:
    def __init__(self, config: RunConfig, out_dir: Path, svg: bool, workers: int, base_dir: Path):
        self.config = config
        self.out_dir = out_dir
        self.svg = svg
        self.workers = workers
        self.base_dir = base_dir
        self.written: list[Path] = []

    def _write(self, name: str, text: str) -> None:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(path)

    def _write_svg(self, csv_name: str, text: str) -> None:
        if self.svg:
            self._write(str(Path(csv_name).with_suffix(".svg")), text)

    def run(self) -> list[Path]:
        getattr(self, "_" + self.config.mode.replace("-", "_"))()
        return self.written

    def _resonance(self):
        c = self.config
        spec = detected_spectrum(c.qed, c.det, c.grid, c.n_max, self.workers)
        self._write(c.spectra_csv, _csv_text(SPECTRA_HEADER, _spectra_rows(spec)))
        fwhm = c.det.instrument_fwhm
        rows = [_summary_row("resonance", None, ch, spec, fwhm) for ch in ("total", "s_c", "s_a")]
        self._write(c.summary_csv, _csv_text(SUMMARY_HEADER, rows))
        self._write_svg(c.spectra_csv, _spectra_svg([spec], [f"theta = {c.det.theta_proj:g} deg"], "resonance"))

    def _sweep(self, label, specs):
        c = self.config
        rows = []
        for value, spec in zip(c.sweep, specs):
            rows.extend(_spectra_rows(spec, value))
        self._write(c.spectra_csv, _csv_text(["sweep_value"] + SPECTRA_HEADER, rows))
        summary = [
            _summary_row(label, v, "total", s, c.det.instrument_fwhm) for v, s in zip(c.sweep, specs)
        ]
        self._write(c.summary_csv, _csv_text(SUMMARY_HEADER, summary))
        self._write_svg(c.spectra_csv, _spectra_svg(specs, [f"{v:g}" for v in c.sweep], label))

    def _detuning_sweep(self):
        c = self.config
        self._sweep("detuning", detuning_sweep(c.qed, c.det, c.sweep, c.grid, c.n_max, self.workers))

    def _hwp_sweep(self):
        c = self.config
        self._sweep("hwp", hwp_sweep(c.qed, c.det, c.sweep, c.grid, c.n_max, self.workers))

    def _complementarity(self):
        c = self.config
        drives = {
            "emitter_driven": c.qed,
            "cavity_driven": replace(c.qed, p_a=0.0, p_c=c.qed.p_a + c.qed.p_c),
        }
        stem = Path(c.spectra_csv)
        summary = []
        for label, qed in drives.items():
            specs = projection_sweep(qed, c.det, [0.0, 90.0], c.grid, c.n_max, self.workers)
            rows = []
            for theta, spec in zip((0.0, 90.0), specs):
                rows.extend(_spectra_rows(spec, theta))
            name = str(stem.with_name(f"{stem.stem}_{label}{stem.suffix or '.csv'}"))
            self._write(name, _csv_text(["sweep_value"] + SPECTRA_HEADER, rows))
            for theta, spec in zip((0.0, 90.0), specs):
                for ch in ("total", "s_a"):
                    summary.append(_summary_row(label, theta, ch, spec, c.det.instrument_fwhm))
            self._write_svg(name, _spectra_svg(specs, ["theta = 0 deg", "theta = 90 deg"], label))
        self._write(c.summary_csv, _csv_text(SUMMARY_HEADER, summary))

    def _fit(self):
        c = self.config
        path = Path(c.data)
        if not path.is_absolute():
            path = self.base_dir / path
        data = _read_pairs(path)
        if c.data_kind == "polarization":
            try:
                fit = fit_polarization(data)
            except ValueError as exc:
                raise ValidationError("data", str(exc)) from None
            row = [
                "polarization", _num(fit.theta_a), _num(fit.phi_qd), _num(fit.amplitude),
                _num(fit.residual_norm), str(fit.phi_identifiable).lower(),
            ]
            self._write(c.summary_csv, _csv_text(POLARIZATION_HEADER, [row]))
            return
        s = _spectrum_from_data(data)
        try:
            spec = ChannelSpectra.from_channels(s.grid, *(np.zeros_like(s.values),) * 3, s.values)
            row = _summary_row("fit", None, "total", spec, c.det.instrument_fwhm)
        except ValueError as exc:
            raise ValidationError("data", str(exc)) from None
        self._write(c.summary_csv, _csv_text(SUMMARY_HEADER, [row]))


def _workers() -> int:
    raw = os.environ.get("VRS_SIM_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError("VRS_SIM_THREADS", f"expected an integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError("VRS_SIM_THREADS", f"must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vrs-sim", description="Polarization-resolved cavity QED spectra.")
    p.add_argument("config", help="INI run configuration")
    p.add_argument("--svg", action="store_true", help="also write SVG line plots")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--grid-points", type=int, default=None, help="override the grid point count")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config_path = Path(args.config)
    try:
        try:
            text = config_path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"vrs-sim: cannot read {config_path}: {exc.strerror}", file=sys.stderr)
            return 2
        config = parse_config(text)
        if args.grid_points is not None:
            if args.grid_points < 2:
                raise ValidationError("--grid-points", f"must be >= 2, got {args.grid_points}")
            g = config.grid
            config = replace(config, grid=FrequencyGrid(g.start, g.stop, args.grid_points))
        runner = Runner(config, Path(args.out), args.svg, _workers(), config_path.parent)
        written = runner.run()
    except ConfigError as exc:
        print(f"vrs-sim: config error in {config_path}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"vrs-sim: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
