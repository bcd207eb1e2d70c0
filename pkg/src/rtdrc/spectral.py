"""Harmonic analysis of a sinusoidally driven diode.

A single diode driven by a sine of amplitude A produces an output whose
spectrum carries harmonics of the drive frequency; the number of
significant harmonics grows with A as the drive reaches further into
the nonlinear parts of the current curve. Spectra are stored one-sided
in dB, normalized so a unit-amplitude sine centered on a bin reads 0 dB.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .device import DeviceParams, total_current

DB_FLOOR = -200.0
_LINEAR_FLOOR = 10.0 ** (DB_FLOOR / 20.0)

WINDOWS = ("rectangular", "hann")

DEFAULT_FREQ = 1.0          # Hz
DEFAULT_SAMPLE_RATE = 1000.0  # Hz
DEFAULT_DURATION = 10.0     # s
DEFAULT_THRESHOLD_DBC = -60.0


@dataclass
class Signal:
    """Uniformly sampled real signal; fundamental is tracked metadata."""

    samples: np.ndarray
    sample_rate: float
    fundamental: float | None = None

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be a 1-D array")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Spectrum:
    """One-sided magnitude spectrum in dB (floored at -200 dB)."""

    freqs: np.ndarray
    mags_db: np.ndarray
    fundamental: float | None = None

    def __post_init__(self) -> None:
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.mags_db = np.asarray(self.mags_db, dtype=np.float64)
        if self.freqs.shape != self.mags_db.shape or self.freqs.ndim != 1:
            raise ValueError("freqs and mags_db must be 1-D arrays of equal length")
        if len(self.freqs) and (np.any(np.diff(self.freqs) <= 0) or self.freqs[0] < 0):
            raise ValueError("freqs must be non-negative and strictly increasing")


def sine(freq: float = DEFAULT_FREQ, amplitude: float = 1.0,
         sample_rate: float = DEFAULT_SAMPLE_RATE,
         duration: float = DEFAULT_DURATION) -> Signal:
    """Sine drive signal spanning an integer number of periods.

    sample_rate must be at least 20*freq (headroom for the harmonics of
    interest) and duration*freq must be an integer so the rectangular
    window is leakage-free.
    """
    if not freq > 0:
        raise ValueError(f"freq must be positive, got {freq}")
    if sample_rate < 20.0 * freq:
        raise ValueError(f"sample_rate {sample_rate} below 20x the {freq} Hz fundamental")
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    periods = duration * freq
    if abs(periods - round(periods)) > 1e-9:
        raise ValueError(f"duration {duration} s is not an integer number of {freq} Hz periods")
    n = int(round(sample_rate * duration))
    t = np.arange(n) / sample_rate
    return Signal(amplitude * np.sin(2.0 * np.pi * freq * t), sample_rate, fundamental=freq)


def drive_device(sig: Signal, params: DeviceParams) -> Signal:
    """Pointwise diode response to a drive signal."""
    out = np.asarray(total_current(sig.samples, params))
    return Signal(out, sig.sample_rate, fundamental=sig.fundamental)


def magnitude_spectrum(sig: Signal, window: str = "rectangular") -> Spectrum:
    """One-sided amplitude spectrum of a signal in dB.

    A unit-amplitude sine centered on a bin reads 0 dB under both
    windows (the Hann coherent gain is divided out). With a rectangular
    window and known fundamental, the signal must span an integer number
    of periods so bins stay leakage-free.
    """
    if window not in WINDOWS:
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")
    n = len(sig.samples)
    if n == 0:
        raise ValueError("cannot take the spectrum of an empty signal")
    if window == "rectangular" and sig.fundamental:
        periods = sig.duration * sig.fundamental
        if abs(periods - round(periods)) > 1e-6:
            raise ValueError(
                f"rectangular window needs an integer number of {sig.fundamental} Hz periods"
            )
        win = np.ones(n)
    elif window == "rectangular":
        win = np.ones(n)
    else:
        # Periodic (DFT-even) Hann window.
        win = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    spectrum = np.fft.rfft(sig.samples * win)
    mags = np.abs(spectrum) * (2.0 / win.sum())
    mags[0] /= 2.0
    if n % 2 == 0:
        mags[-1] /= 2.0
    mags_db = 20.0 * np.log10(np.maximum(mags, _LINEAR_FLOOR))
    freqs = np.fft.rfftfreq(n, 1.0 / sig.sample_rate)
    return Spectrum(freqs, mags_db, fundamental=sig.fundamental)


def count_harmonics(spec: Spectrum, threshold_dbc: float = DEFAULT_THRESHOLD_DBC) -> int:
    """Number of harmonics (n >= 2) above threshold_dbc relative to the fundamental.

    Scans integer multiples of the fundamental up to the Nyquist edge of
    the spectrum. Raises if the spectrum has no fundamental metadata, if
    the fundamental bin sits at the dB floor, or if threshold_dbc is not
    negative.
    """
    if not threshold_dbc < 0:
        raise ValueError(f"threshold_dbc must be negative, got {threshold_dbc}")
    if not spec.fundamental or spec.fundamental <= 0:
        raise ValueError("spectrum carries no positive fundamental frequency")
    if len(spec.freqs) < 2:
        raise ValueError("spectrum too short for harmonic analysis")
    df = spec.freqs[1] - spec.freqs[0]
    fund_bin = int(round(spec.fundamental / df))
    if fund_bin <= 0 or fund_bin >= len(spec.freqs):
        raise ValueError(f"fundamental {spec.fundamental} Hz outside the spectrum range")
    fund_db = spec.mags_db[fund_bin]
    if fund_db <= DB_FLOOR:
        raise ValueError("fundamental bin sits at the noise floor")
    nyquist = spec.freqs[-1]
    count = 0
    harmonic = 2
    while harmonic * spec.fundamental <= nyquist:
        k = int(round(harmonic * spec.fundamental / df))
        if k < len(spec.mags_db) and spec.mags_db[k] > fund_db + threshold_dbc:
            count += 1
        harmonic += 1
    return count


def spectrum_to_csv(spec: Spectrum, path) -> None:
    """Write spectrum rows as CSV (freq_hz, mag_db)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["freq_hz", "mag_db"])
        for fr, db in zip(spec.freqs, spec.mags_db):
            writer.writerow([repr(float(fr)), repr(float(db))])


def spectrum_from_csv(path, fundamental: float | None = None) -> Spectrum:
    """Read back a spectrum written by spectrum_to_csv."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["freq_hz", "mag_db"]:
            raise ValueError(f"unexpected spectrum header in {path}")
        rows = [(float(fr), float(db)) for fr, db in reader]
    freqs, mags = zip(*rows) if rows else ((), ())
    return Spectrum(np.array(freqs), np.array(mags), fundamental=fundamental)
