"""Synthetic optically detected spectra and coherent-control traces.

Spectra are sums of unit-peak lineshapes centered on transition
frequencies, weighted by |population difference| * moment^2; the ODMR
variant uses electron transitions, the ODNMR variant nuclear ones.
``splitting_extract`` recovers a doublet separation from a spectrum by
locating the two dominant peaks and refining each with a local parabola.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PeakExtractionError, ValidationError
from .system import StateLabel
from .transitions import TransitionTable

__all__ = [
    "lorentzian_peak",
    "gaussian_peak",
    "Spectrum",
    "odmr_spectrum",
    "odnmr_spectrum",
    "SplittingResult",
    "splitting_extract",
    "Trace",
    "rabi_trace",
    "ramsey_trace",
]


def lorentzian_peak(x, fwhm: float):
    """Unit-height Lorentzian, 1 / (1 + (2x/fwhm)^2)."""
    if fwhm <= 0:
        raise ValidationError(f"fwhm must be positive, got {fwhm}")
    x = np.asarray(x, dtype=float)
    return 1.0 / (1.0 + (2.0 * x / fwhm) ** 2)


def gaussian_peak(x, fwhm: float):
    """Unit-height Gaussian with the same full width at half maximum."""
    if fwhm <= 0:
        raise ValidationError(f"fwhm must be positive, got {fwhm}")
    x = np.asarray(x, dtype=float)
    return np.exp(-4.0 * math.log(2.0) * (x / fwhm) ** 2)


_SHAPES = {"lorentzian": lorentzian_peak, "gaussian": gaussian_peak}


@dataclass
class Spectrum:
    """Intensity sampled on a frequency grid (MHz)."""

    freq: np.ndarray
    intensity: np.ndarray
    kind: str = "odmr"
    fwhm: float = 0.3
    lineshape: str = "lorentzian"

    def to_csv(self, path: str | None = None) -> str:
        lines = ["freq_MHz,intensity"]
        for f, y in zip(self.freq, self.intensity):
            lines.append(f"{format(float(f), '.12g')},{format(float(y), '.12g')}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _population_of(populations, label: StateLabel) -> float:
    if isinstance(populations, dict):
        return float(populations.get(label, 0.0))
    raise ValidationError(
        "populations must map StateLabel -> occupation (use dict(zip(labels, p)))"
    )


def _spectrum(
    table: TransitionTable,
    kind: str,
    populations,
    grid,
    fwhm: float,
    lineshape: str,
) -> Spectrum:
    if lineshape not in _SHAPES:
        raise ValidationError(f"lineshape must be one of {sorted(_SHAPES)}, got {lineshape!r}")
    shape = _SHAPES[lineshape]
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValidationError("frequency grid must be a 1-D array with at least 2 points")
    intensity = np.zeros_like(grid)
    for t in table:
        if t.kind != kind:
            continue
        weight = abs(
            _population_of(populations, t.state_a) - _population_of(populations, t.state_b)
        ) * t.moment**2
        if weight == 0.0:
            continue
        intensity += weight * shape(grid - t.freq, fwhm)
    return Spectrum(freq=grid, intensity=intensity, kind=kind, fwhm=fwhm, lineshape=lineshape)


def odmr_spectrum(
    table: TransitionTable,
    populations,
    grid,
    fwhm: float = 0.3,
    lineshape: str = "lorentzian",
) -> Spectrum:
    """Electron-transition spectrum with weights |delta p| * moment^2.

    ``populations`` maps :class:`StateLabel` to occupation (unlisted
    states count as empty).
    """
    return _spectrum(table, "electron", populations, grid, fwhm, lineshape)


def odnmr_spectrum(
    table: TransitionTable,
    populations,
    grid,
    fwhm: float = 0.3,
    lineshape: str = "lorentzian",
) -> Spectrum:
    """Nuclear-transition spectrum; the enhancement enters through the
    squared transition moments."""
    return _spectrum(table, "nuclear", populations, grid, fwhm, lineshape)


@dataclass
class SplittingResult:
    """Doublet extraction result: refined peak positions and separation."""

    splitting: float
    peaks: tuple[float, float]
    heights: tuple[float, float]


def splitting_extract(spectrum: Spectrum) -> SplittingResult:
    """Extract a doublet splitting from a spectrum.

    Local maxima are accepted when they exceed three times the robust
    noise floor (median absolute deviation of the intensity); the two
    tallest are refined by a three-point parabola.  Fewer than two
    acceptable peaks, or two peaks closer than the lineshape FWHM
    (overlapping, hence not resolved), raise
    :class:`PeakExtractionError`.
    """
    y = np.asarray(spectrum.intensity, dtype=float)
    x = np.asarray(spectrum.freq, dtype=float)
    if y.size < 3:
        raise PeakExtractionError("spectrum too short for peak extraction")
    med = float(np.median(y))
    noise = 1.4826 * float(np.median(np.abs(y - med)))
    threshold = 3.0 * noise
    idx = [
        i
        for i in range(1, y.size - 1)
        if y[i] >= y[i - 1] and y[i] >= y[i + 1] and (y[i] > y[i - 1] or y[i] > y[i + 1])
        and y[i] > threshold
    ]
    if len(idx) < 2:
        raise PeakExtractionError(
            f"found {len(idx)} peak(s) above 3x the noise floor ({threshold:.3e}); "
            "need two to measure a splitting"
        )
    top = sorted(sorted(idx, key=lambda i: y[i], reverse=True)[:2])

    def refine(i: int) -> tuple[float, float]:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom == 0.0:
            return float(x[i]), float(y1)
        shift = 0.5 * (y0 - y2) / denom
        shift = float(np.clip(shift, -1.0, 1.0))
        step = float(x[i + 1] - x[i]) if shift >= 0 else float(x[i] - x[i - 1])
        return float(x[i]) + shift * step, float(y1 - 0.25 * (y0 - y2) * shift)

    (f1, h1), (f2, h2) = refine(top[0]), refine(top[1])
    sep = abs(f2 - f1)
    if sep < spectrum.fwhm:
        raise PeakExtractionError(
            f"peaks at {f1:.4f} and {f2:.4f} MHz are separated by {sep:.4f} MHz, "
            f"below the linewidth {spectrum.fwhm:g} MHz: doublet not resolved"
        )
    return SplittingResult(splitting=sep, peaks=(f1, f2), heights=(h1, h2))


@dataclass
class Trace:
    """Time-domain signal (times in us)."""

    times: np.ndarray
    signal: np.ndarray
    kind: str = "trace"

    def to_csv(self, path: str | None = None) -> str:
        lines = ["t_us,signal"]
        for t, s in zip(self.times, self.signal):
            lines.append(f"{format(float(t), '.12g')},{format(float(s), '.12g')}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def rabi_trace(
    omega: float,
    times,
    detuning: float = 0.0,
    decay: float | None = None,
) -> Trace:
    """Driven-oscillation population trace.

    signal(t) = (omega^2 / omega_eff^2) sin^2(pi omega_eff t) * exp(-t/decay)
    with omega_eff = sqrt(omega^2 + detuning^2); frequencies in MHz, times
    in us.  ``decay`` None means no damping.
    """
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if decay is not None and decay <= 0:
        raise ValidationError(f"decay time must be positive, got {decay}")
    omega_eff = math.hypot(omega, detuning)
    if omega_eff == 0.0:
        signal = np.zeros_like(ts)
    else:
        signal = (omega**2 / omega_eff**2) * np.sin(math.pi * omega_eff * ts) ** 2
        if decay is not None:
            signal = signal * np.exp(-ts / decay)
    return Trace(times=ts, signal=signal, kind="rabi")


def ramsey_trace(
    detuning: float,
    t2_star: float,
    times,
    envelope: str = "gaussian",
) -> Trace:
    """Free-precession fringe trace.

    signal(t) = (1 + cos(2 pi detuning t) * env(t)) / 2 with a Gaussian
    envelope exp(-(t/T2*)^2) by default or exponential exp(-t/T2*).
    """
    if t2_star <= 0:
        raise ValidationError(f"T2* must be positive, got {t2_star}")
    if envelope not in ("gaussian", "exponential"):
        raise ValidationError(
            f"envelope must be 'gaussian' or 'exponential', got {envelope!r}"
        )
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    env = (
        np.exp(-((ts / t2_star) ** 2))
        if envelope == "gaussian"
        else np.exp(-ts / t2_star)
    )
    signal = 0.5 * (1.0 + np.cos(2.0 * math.pi * detuning * ts) * env)
    return Trace(times=ts, signal=signal, kind="ramsey")
