"""State-to-sound mappings: pointwise, extrema, chunk, moment, and palette.

Four ways to turn a sampled quasi-probability field into sound control
data, plus the emission-histogram palette:

(a) ``map_pointwise``   -- every grid node (x, p, W) becomes one oscillator:
    x maps linearly to phase (one full cycle across the grid), p maps
    linearly onto [440, 1760] Hz, W maps directly to amplitude.  Nodes
    with W >= 0 become sine voices; negative nodes become triangle voices
    or sine voices gated by a 0.5 Hz pulse, with amplitude |W|.
(b) ``map_extrema``     -- the field minimum and maximum are sent through a
    quadratic frequency map anchored at 146.83 Hz (minimum), 466.16 Hz
    (zero), and 1318.5 Hz (maximum).
(c) ``map_chunks``      -- the value range is cut into four equal-height
    slabs; each slab reports its half-height level (mapped to frequency by
    the same quadratic) and its signed volume, graded into intensities
    -2..6 without 0; negative intensities mark negative volumes.
(d) ``map_moments``     -- mean and standard deviation of x map onto the
    equal-tempered piano-key axis (key 49 = 440 Hz), yielding the center
    frequency and spectral spread of a Gaussian-profile sound.

``rabi_palette`` converts an emission trajectory plus waiting-time
histogram into a sequence of timbres over a fundamental: each emission
raises one harmonic, whose number is the histogram bin of the new
interval, so the harmonic profile converges to the waiting-time density.

All quantized pitches keep their exact source frequency alongside
(``quantize_quarter_tone``), in 24 equal divisions of the octave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (BudgetExceeded, DegenerateAnchors, EmptyField, FlatField,
                     InvalidParam, NyquistExceeded)
from .qdynamics import EmissionTrajectory, WaitingTimeHistogram, intervals
from .wigner import WignerField, integrate, moments_x

FREQ_LO = 440.0           # Hz, lower anchor of the pointwise p -> frequency map
FREQ_HI = 1760.0          # Hz, upper anchor
QUAD_ANCHORS = (146.83, 466.16, 1318.5)   # Hz at (w_min, 0, w_max)
PULSE_RATE = 0.5          # Hz, gate rate for pulsed-sine negative nodes
POINT_BUDGET = 900        # simultaneous oscillator voices (soft limit)
AUDIBLE_LO, AUDIBLE_HI = 20.0, 20000.0
CONCERT_A = 440.0         # Hz, piano key 49 and 24-TET step 0
WAVEFORMS = ("sine", "triangle", "pulsed-sine")


@dataclass(frozen=True)
class Partial:
    """One synthesis voice: frequency, amplitude, phase (cycles), waveform."""

    frequency: float
    amplitude: float
    phase: float = 0.0
    waveform: str = "sine"
    pulse_rate: float = PULSE_RATE   # used by "pulsed-sine" only

    def __post_init__(self):
        if not AUDIBLE_LO < self.frequency < AUDIBLE_HI:
            raise InvalidParam(f"frequency {self.frequency} Hz outside audible range")
        if not 0.0 <= self.phase < 1.0:
            raise InvalidParam("phase must be a cycle fraction in [0, 1)")
        if self.waveform not in WAVEFORMS:
            raise InvalidParam(f"unknown waveform {self.waveform!r}")


@dataclass(frozen=True)
class QuadraticMap:
    """f(w) = a*w^2 + b*w + c through three frequency anchors."""

    a: float
    b: float
    c: float
    anchors: tuple = ()

    def __call__(self, w: float) -> float:
        return self.a * w * w + self.b * w + self.c


@dataclass(frozen=True)
class Chunk:
    """One of the four value slabs of a chunk analysis."""

    half_height_level: float
    frequency: float
    signed_volume: float
    intensity: int


@dataclass(frozen=True)
class ChunkAnalysis:
    """Four slabs ordered from the lowest value band (index 0) up."""

    chunks: tuple

    def __post_init__(self):
        if len(self.chunks) != 4:
            raise InvalidParam("chunk analysis must hold exactly 4 chunks")


@dataclass(frozen=True)
class GaussianSoundSpec:
    """Spectral envelope of a Gaussian-profile sound."""

    mean_frequency: float
    spread: float

    def __post_init__(self):
        if self.mean_frequency <= 0 or self.spread <= 0:
            raise InvalidParam("mean frequency and spread must be positive")


@dataclass(frozen=True)
class TimbreEvent:
    """A partial set active over [start, start + duration)."""

    start: float
    duration: float
    partials: tuple

    def __post_init__(self):
        if self.start < 0 or self.duration <= 0:
            raise InvalidParam("events need start >= 0 and duration > 0")


def linear_map(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    """Endpoint-exact linear map: lo -> out_lo and hi -> out_hi exactly."""
    if hi == lo:
        return out_lo
    t = (value - lo) / (hi - lo)
    return out_lo * (1.0 - t) + out_hi * t


def map_pointwise(fld: WignerField, negative_mode: str = "triangle",
                  allow_budget_overrun: bool = False) -> list:
    """Method (a): one Partial per grid node, x-major node order.

    Phase is the linear x map expressed as a cycle fraction with an
    end-exclusive wrap (x_max lands back on phase 0); frequency is the
    linear p map onto [440, 1760] Hz; amplitude is |W| with negativity
    encoded by the waveform (sine for W >= 0, ``negative_mode`` for W < 0).
    """
    if negative_mode not in ("triangle", "pulsed-sine"):
        raise InvalidParam("negative_mode must be 'triangle' or 'pulsed-sine'")
    if fld.n_nodes == 0:
        raise EmptyField("field holds no nodes")
    if fld.n_nodes > POINT_BUDGET and not allow_budget_overrun:
        raise BudgetExceeded(
            f"{fld.n_nodes} nodes exceed the {POINT_BUDGET}-voice budget")
    ax, ap = fld.grid.axis_x, fld.grid.axis_p
    x_lo, x_hi = float(ax[0]), float(ax[-1])
    p_lo, p_hi = float(ap[0]), float(ap[-1])
    partials = []
    for i, x in enumerate(ax):
        phase = linear_map(float(x), x_lo, x_hi, 0.0, 1.0) % 1.0
        for j, p in enumerate(ap):
            freq = linear_map(float(p), p_lo, p_hi, FREQ_LO, FREQ_HI)
            w = float(fld.values[i, j])
            waveform = "sine" if w >= 0 else negative_mode
            partials.append(Partial(freq, abs(w), phase, waveform))
    return partials


def fit_quadratic(w_min: float, w_max: float) -> QuadraticMap:
    """Unique parabola through (w_min, 146.83), (0, 466.16), (w_max, 1318.5)."""
    if not (w_min < 0 < w_max):
        raise DegenerateAnchors("anchors need w_min < 0 < w_max")
    f_min, f_zero, f_max = QUAD_ANCHORS
    c = f_zero
    y1 = (f_min - c) / w_min
    y2 = (f_max - c) / w_max
    a = (y1 - y2) / (w_min - w_max)
    b = y1 - a * w_min
    return QuadraticMap(a, b, c, anchors=((w_min, f_min), (0.0, f_zero),
                                          (w_max, f_max)))


def map_extrema(fld: WignerField, qmap: QuadraticMap):
    """Method (b): (f_min, f_max) = quadratic map of the field extrema."""
    if fld.n_nodes == 0:
        raise EmptyField("field holds no nodes")
    return qmap(float(fld.values.min())), qmap(float(fld.values.max()))


def _intensity(volume: float, neg_scale: float, pos_scale: float) -> int:
    """Interval grade: two negative grades on [0, neg_scale], six positive."""
    if volume < 0:
        grade = math.ceil(2.0 * abs(volume) / neg_scale)
        return -min(max(grade, 1), 2)
    if pos_scale <= 0:
        return 1
    grade = math.ceil(6.0 * volume / pos_scale)
    return min(max(grade, 1), 6)


def map_chunks(fld: WignerField, qmap: QuadraticMap) -> ChunkAnalysis:
    """Method (c): slice the value range into four equal slabs.

    Slab k spans value levels [W_min + k*D, W_min + (k+1)*D] with
    D = (W_max - W_min)/4.  Each cell contributes the part of its value
    column inside the slab (clipped to the slab, measured from the slab
    floor; cells below contribute nothing, cells above a full D).  The
    volume carries the sign of the slab's levels, read at half height, so
    slabs lying in negative-value territory report negative volumes.  The
    unsigned volumes tile the column from W_min up, hence
    sum_k |V_k| = integrate(field) - W_min * covered_area exactly.
    """
    if fld.n_nodes == 0:
        raise EmptyField("field holds no nodes")
    values = fld.values
    w_min, w_max = float(values.min()), float(values.max())
    if w_max == w_min:
        raise FlatField("field has no value range")
    delta = (w_max - w_min) / 4.0
    weights = fld.grid.cell_weights
    raw = []
    halves = []
    for k in range(4):
        lo = w_min + k * delta
        halves.append(w_min + (k + 0.5) * delta)
        raw.append(float(np.sum(weights * np.clip(values - lo, 0.0, delta))))
    neg_scale = max((r for r, h in zip(raw, halves) if h < 0), default=0.0)
    pos_scale = max((r for r, h in zip(raw, halves) if h >= 0), default=0.0)
    chunks = []
    for r, h in zip(raw, halves):
        signed = -r if h < 0 else r
        chunks.append(Chunk(h, qmap(h), signed,
                            _intensity(signed, neg_scale, pos_scale)))
    return ChunkAnalysis(tuple(chunks))


def piano_key_frequency(key: float) -> float:
    """Equal-tempered piano-key frequency; key 49 is 440 Hz."""
    return CONCERT_A * 2.0 ** ((key - 49.0) / 12.0)


def map_moments(fld: WignerField, key_window=(25, 73)) -> GaussianSoundSpec:
    """Method (d): x moments onto the piano-key axis.

    The mean of x maps linearly from [x_min, x_max] onto the key window;
    the standard deviation maps with the same keys-per-unit scale to a key
    spread s, converted to Hz as mean_frequency * (2^(s/12) - 1).
    """
    k_lo, k_hi = key_window
    if not 1 <= k_lo < k_hi <= 88:
        raise InvalidParam("key window must satisfy 1 <= lo < hi <= 88")
    mean, std = moments_x(fld)
    ax = fld.grid.axis_x
    x_lo, x_hi = float(ax[0]), float(ax[-1])
    key = linear_map(mean, x_lo, x_hi, float(k_lo), float(k_hi))
    mean_freq = piano_key_frequency(key)
    scale = (k_hi - k_lo) / (x_hi - x_lo) if x_hi > x_lo else 0.0
    key_spread = std * scale
    spread = mean_freq * (2.0 ** (key_spread / 12.0) - 1.0)
    return GaussianSoundSpec(mean_freq, max(spread, 1e-9))


def rabi_palette(hist: WaitingTimeHistogram, f0: float,
                 trajectory: EmissionTrajectory,
                 time_dilation: float | None = None) -> list:
    """Timbre sequence over a fundamental: one raised harmonic per emission.

    Event i spans the (dilated) gap between emissions i and i+1; its
    partials are the always-present fundamental f0 plus harmonics k*f0
    (k = 2 .. bins+1) whose amplitudes are the histogram counts of the
    first i intervals, normalized by the final maximum count so harmonic
    amplitudes grow monotonically toward the final histogram profile.

    ``time_dilation`` stretches emission time onto performance time; the
    default makes the mean event spacing 2 seconds.
    """
    n_bins = len(hist.counts)
    if f0 * (n_bins + 1) >= AUDIBLE_HI:
        raise NyquistExceeded(
            f"top harmonic {f0 * (n_bins + 1):.0f} Hz reaches the 20 kHz cap")
    if len(trajectory) == 0:
        raise InvalidParam("palette needs a non-empty trajectory")
    gaps = intervals(trajectory)
    if time_dilation is None:
        time_dilation = 2.0 / float(np.mean(gaps))
    edges = np.asarray(hist.bin_edges)
    pos = np.searchsorted(edges, gaps, side="right") - 1
    in_range = (pos >= 0) & (pos < n_bins) & (gaps < edges[-1])

    counts = np.zeros(n_bins, dtype=np.int64)
    per_event_counts = [counts.copy()]
    for gap_idx in range(gaps.size):
        if in_range[gap_idx]:
            counts[pos[gap_idx]] += 1
        per_event_counts.append(counts.copy())
    peak = float(counts.max()) if counts.max() > 0 else 1.0

    boundaries = [0.0, *trajectory.emission_times, trajectory.duration]
    events = []
    for i in range(len(boundaries) - 1):
        start = boundaries[i] * time_dilation
        duration = (boundaries[i + 1] - boundaries[i]) * time_dilation
        if duration <= 0:
            continue
        partials = [Partial(f0, 1.0)]
        for bin_idx, count in enumerate(per_event_counts[i]):
            if count > 0:
                partials.append(Partial((bin_idx + 2) * f0, count / peak))
        events.append(TimbreEvent(start, duration, tuple(partials)))
    return events


class QuarterTone(NamedTuple):
    step: int          # 24-TET steps from A4 (440 Hz)
    quantized: float   # Hz on the quarter-tone grid
    exact: float       # the unquantized input, carried unchanged


def quantize_quarter_tone(freq: float) -> QuarterTone:
    """Round to the nearest 24-TET step from A4, ties rounding upward."""
    if freq <= 0:
        raise InvalidParam("frequency must be positive")
    step = math.floor(24.0 * math.log2(freq / CONCERT_A) + 0.5)
    return QuarterTone(step, CONCERT_A * 2.0 ** (step / 24.0), freq)
