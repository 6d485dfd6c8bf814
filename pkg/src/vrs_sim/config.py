"""Run configuration: a flat INI file with [physics], [detection], [grid], [run].

Every physics and detection key is optional and defaults to the parameter set
of the resonant device (|g| = 41, kappa = 66, gamma = 0.28, gamma_ph = 3,
p_a = 0.065 ueV, theta_a = 42.6, phi_qd = 80.8, beta = -31, theta_c = 0 deg,
A/B = 2.85, instrument FWHM = 13.5 ueV). Unknown sections or keys are errors.

Example::

    [physics]
    kappa = 66
    omega_c = 10        ; cavity offset in ueV

    [detection]
    hwp_angle = 50.5    ; or theta_proj = 90

    [run]
    mode = resonance
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Callable

from .detection import DetectionParams, hwp_to_theta
from .errors import ParseError, ValidationError
from .model import QedParams, g_tilde_for
from .spectra import FrequencyGrid

MODES = ("resonance", "detuning-sweep", "hwp-sweep", "complementarity", "fit")
SWEEP_MODES = ("detuning-sweep", "hwp-sweep")
DATA_KINDS = ("spectrum", "polarization")

DEFAULT_G = 41.0
GRID_HALF_WIDTH = 250.0
GRID_POINTS = 2001


@dataclass(frozen=True)
class RunConfig:
    qed: QedParams = field(default_factory=QedParams)
    det: DetectionParams = field(default_factory=DetectionParams)
    grid: FrequencyGrid = field(default_factory=lambda: FrequencyGrid.centered(0.0))
    n_max: int = 3
    mode: str = "resonance"
    sweep: tuple[float, ...] = ()
    spectra_csv: str = "spectra.csv"
    summary_csv: str = "summary.csv"
    data: str | None = None
    data_kind: str = "spectrum"


def _float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(key, f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ValidationError(key, f"must be finite, got {text!r}")
    return value


def _nonneg(key, text):
    value = _float(key, text)
    if value < 0:
        raise ValidationError(key, f"must be >= 0, got {value!r}")
    return value


def _positive(key, text):
    value = _float(key, text)
    if value <= 0:
        raise ValidationError(key, f"must be > 0, got {value!r}")
    return value


def _between(lo, hi):
    def check(key, text):
        value = _float(key, text)
        if not lo <= value <= hi:
            raise ValidationError(key, f"must lie in [{lo:g}, {hi:g}], got {value!r}")
        return value

    return check


def _int_at_least(lo):
    def check(key, text):
        try:
            value = int(text)
        except ValueError:
            raise ValidationError(key, f"expected an integer, got {text!r}") from None
        if value < lo:
            raise ValidationError(key, f"must be >= {lo}, got {value}")
        return value

    return check


def _choice(options):
    def check(key, text):
        if text not in options:
            raise ValidationError(key, f"must be one of {', '.join(options)}; got {text!r}")
        return text

    return check


def _float_list(key, text):
    items = [t.strip() for t in text.split(",") if t.strip()]
    return tuple(_float(key, t) for t in items)


def _text(key, text):
    if not text:
        raise ValidationError(key, "must not be empty")
    return text


SCHEMA: dict[str, dict[str, Callable[[str, str], object]]] = {
    "physics": {
        "omega_a": _float,
        "omega_c": _float,
        "g": _nonneg,
        "g_tilde": _nonneg,
        "theta_a": _between(0.0, 90.0),
        "phi_qd": _between(0.0, 180.0),
        "beta": _float,
        "gamma": _nonneg,
        "kappa": _nonneg,
        "gamma_ph": _nonneg,
        "p_a": _nonneg,
        "p_c": _nonneg,
        "n_max": _int_at_least(1),
    },
    "detection": {
        "theta_proj": _float,
        "hwp_angle": _float,
        "amp_a": _nonneg,
        "amp_b": _nonneg,
        "ab_ratio": _positive,
        "overlap_p": _between(0.0, 1.0),
        "theta_c": _float,
        "instrument_fwhm": _nonneg,
    },
    "grid": {
        "start": _float,
        "stop": _float,
        "n_points": _int_at_least(2),
    },
    "run": {
        "mode": _choice(MODES),
        "sweep": _float_list,
        "spectra_csv": _text,
        "summary_csv": _text,
        "data": _text,
        "data_kind": _choice(DATA_KINDS),
    },
}

EXCLUSIVE = [("physics", "g", "g_tilde"), ("detection", "theta_proj", "hwp_angle"),
             ("detection", "amp_b", "ab_ratio")]


def _column(line_text: str) -> int:
    return len(line_text) - len(line_text.lstrip()) + 1


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        inline_comment_prefixes=("#", ";"),
        empty_lines_in_values=False,
        default_section="\x00defaults",
    )
    lines = text.splitlines()

    def line_at(n):
        return lines[n - 1] if 0 < n <= len(lines) else ""

    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key before any [section] header", exc.lineno, _column(line_at(exc.lineno)))
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno or 1)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r}", exc.lineno or 1)
    except configparser.ParsingError as exc:
        lineno, raw = exc.errors[0]
        raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, _column(line_at(lineno)))
    return cp


def parse_config(text: str) -> RunConfig:
    cp = _read(text)
    values: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ValidationError(f"[{section}]", "unknown section")
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ValidationError(key, f"unknown key in [{section}]")
            values[section][key] = SCHEMA[section][key](key, raw.strip())
    for section, k1, k2 in EXCLUSIVE:
        got = values.get(section, {})
        if k1 in got and k2 in got:
            raise ValidationError(k2, f"cannot be combined with {k1}")

    phys = dict(values.get("physics", {}))
    n_max = phys.pop("n_max", 3)
    g = phys.pop("g", DEFAULT_G)
    geometry = {k: phys[k] for k in ("theta_a", "phi_qd", "beta") if k in phys}
    probe = QedParams(g_tilde=0.0, **geometry)
    if "g_tilde" not in phys:
        try:
            phys["g_tilde"] = g_tilde_for(g, probe.theta_a, probe.phi_qd, probe.beta)
        except ValueError as exc:
            raise ValidationError("g", str(exc)) from None
    try:
        qed = QedParams(**phys)
    except ValueError as exc:
        raise ValidationError("physics", str(exc)) from None

    det_vals = dict(values.get("detection", {}))
    if "hwp_angle" in det_vals:
        det_vals["theta_proj"] = hwp_to_theta(det_vals.pop("hwp_angle"))
    if "ab_ratio" in det_vals:
        det_vals["amp_b"] = det_vals.get("amp_a", 1.0) / det_vals.pop("ab_ratio")
    try:
        det = DetectionParams(**det_vals)
    except ValueError as exc:
        raise ValidationError("detection", str(exc)) from None

    grid_vals = values.get("grid", {})
    center = 0.5 * (qed.omega_a + qed.omega_c)
    start = grid_vals.get("start", center - GRID_HALF_WIDTH)
    stop = grid_vals.get("stop", center + GRID_HALF_WIDTH)
    if stop <= start:
        raise ValidationError("stop", f"must exceed start ({start!r}), got {stop!r}")
    grid = FrequencyGrid(start, stop, grid_vals.get("n_points", GRID_POINTS))

    run = values.get("run", {})
    mode = run.get("mode", "resonance")
    sweep = run.get("sweep", ())
    if mode in SWEEP_MODES and not sweep:
        raise ValidationError("sweep", f"mode {mode} needs a nonempty comma-separated list")
    if mode == "fit" and "data" not in run:
        raise ValidationError("data", "mode fit needs a data file")
    return RunConfig(
        qed=qed,
        det=det,
        grid=grid,
        n_max=n_max,
        mode=mode,
        sweep=tuple(sweep),
        spectra_csv=run.get("spectra_csv", "spectra.csv"),
        summary_csv=run.get("summary_csv", "summary.csv"),
        data=run.get("data"),
        data_kind=run.get("data_kind", "spectrum"),
    )


def serialize_config(config: RunConfig) -> str:
    """INI text that parses back to an identical RunConfig."""
    q, d, g = config.qed, config.det, config.grid
    lines = ["[physics]"]
    for key in ("omega_a", "omega_c", "g_tilde", "theta_a", "phi_qd", "beta",
                "gamma", "kappa", "gamma_ph", "p_a", "p_c"):
        lines.append(f"{key} = {float(getattr(q, key))!r}")
    lines.append(f"n_max = {config.n_max}")
    lines += ["", "[detection]"]
    for key in ("theta_proj", "amp_a", "amp_b", "overlap_p", "theta_c", "instrument_fwhm"):
        lines.append(f"{key} = {float(getattr(d, key))!r}")
    lines += ["", "[grid]", f"start = {float(g.start)!r}", f"stop = {float(g.stop)!r}",
              f"n_points = {g.n_points}"]
    lines += ["", "[run]", f"mode = {config.mode}"]
    if config.sweep:
        lines.append("sweep = " + ", ".join(repr(float(v)) for v in config.sweep))
    lines.append(f"spectra_csv = {config.spectra_csv}")
    lines.append(f"summary_csv = {config.summary_csv}")
    if config.data is not None:
        lines.append(f"data = {config.data}")
    lines.append(f"data_kind = {config.data_kind}")
    return "\n".join(lines) + "\n"

