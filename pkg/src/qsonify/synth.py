"""Additive rendering of partial lists and timbre sequences to WAV audio.

Oscillators share one phase convention: a phase of phi cycles shifts the
waveform by phi periods, all waveforms start at zero and rise for phi = 0.

* sine          -- sin(2*pi*(f*t + phi))
* triangle      -- unit-amplitude triangle with that phase convention,
                   (2/pi) * asin(sin(2*pi*(f*t + phi)))
* pulsed-sine   -- the sine gated by a unipolar 50%-duty square wave at
                   ``pulse_rate`` Hz (gate open at t = 0)

Rendering is a plain oscillator sum, linear until the single final
peak-normalization to 0.891 (-1 dBFS).  Timbre events get a 10 ms
raised-cosine fade-in and a fade-out appended after their nominal end, so
back-to-back events render gapless and click-free.

WAV output is 16-bit signed PCM, mono, little-endian RIFF/WAVE with no
metadata chunks; samples are round(32767 * value).
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from .entropy import EntropySource
from .errors import InvalidParam, NyquistExceeded, TooManyPartials
from .mapping import GaussianSoundSpec, Partial, quantize_quarter_tone

DEFAULT_SAMPLE_RATE = 44100
PEAK_TARGET = 0.891        # -1 dBFS
MAX_PARTIALS = 4096
FADE_SECONDS = 0.010


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono sample block in [-1, 1]."""

    sample_rate: int
    samples: np.ndarray

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def _check_partials(partials, sample_rate: int) -> None:
    if len(partials) > MAX_PARTIALS:
        raise TooManyPartials(f"{len(partials)} partials exceed {MAX_PARTIALS}")
    for part in partials:
        if part.frequency >= sample_rate / 2:
            raise NyquistExceeded(
                f"{part.frequency} Hz at sample rate {sample_rate}")


def _oscillator_sum(partials, n_samples: int, sample_rate: int) -> np.ndarray:
    """Raw (un-normalized) sum of oscillators; linear in the partial list."""
    t = np.arange(n_samples) / sample_rate
    out = np.zeros(n_samples)
    for part in partials:
        cycles = part.frequency * t + part.phase
        if part.waveform == "sine":
            wave_vals = np.sin(2.0 * np.pi * cycles)
        elif part.waveform == "triangle":
            wave_vals = (2.0 / np.pi) * np.arcsin(np.sin(2.0 * np.pi * cycles))
        else:  # pulsed-sine
            gate = (part.pulse_rate * t) % 1.0 < 0.5
            wave_vals = np.sin(2.0 * np.pi * cycles) * gate
        out += part.amplitude * wave_vals
    return out


def _normalized(samples: np.ndarray) -> np.ndarray:
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak > 0.0:
        return samples * (PEAK_TARGET / peak)
    return samples


def render_partials(partials, duration: float,
                    sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioBuffer:
    """Render a stationary partial set, peak-normalized to -1 dBFS."""
    if duration <= 0:
        raise InvalidParam("duration must be > 0")
    _check_partials(partials, sample_rate)
    n = int(round(duration * sample_rate))
    return AudioBuffer(sample_rate, _normalized(_oscillator_sum(partials, n, sample_rate)))


def _event_envelope(n_sustain: int, n_fade: int) -> np.ndarray:
    """Raised-cosine rise over the event head, fall appended after its end."""
    rise_n = min(n_fade, n_sustain)
    env = np.ones(n_sustain + n_fade)
    if rise_n > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(rise_n) / rise_n))
        env[:rise_n] = ramp
    if n_fade > 0:
        fall = 0.5 * (1.0 + np.cos(np.pi * np.arange(n_fade) / n_fade))
        env[n_sustain:] = fall
    return env


def render_sequence(events, sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioBuffer:
    """Mix timbre events additively (overlaps allowed), normalize once.

    Each event is rendered over its duration plus a trailing 10 ms fade,
    so the total length is the last event end plus the fade.
    """
    if not events:
        return AudioBuffer(sample_rate, np.zeros(0))
    n_fade = int(round(FADE_SECONDS * sample_rate))
    spans = []
    for ev in events:
        _check_partials(ev.partials, sample_rate)
        start_n = int(round(ev.start * sample_rate))
        sustain_n = int(round(ev.duration * sample_rate))
        spans.append((start_n, sustain_n))
    total = max(s + d + n_fade for s, d in spans)
    mix = np.zeros(total)
    for ev, (start_n, sustain_n) in zip(events, spans):
        rendered = _oscillator_sum(ev.partials, sustain_n + n_fade, sample_rate)
        rendered *= _event_envelope(sustain_n, n_fade)
        mix[start_n:start_n + rendered.size] += rendered
    return AudioBuffer(sample_rate, _normalized(mix))


def render_gaussian_sound(spec: GaussianSoundSpec, duration: float,
                          sample_rate: int = DEFAULT_SAMPLE_RATE,
                          entropy: EntropySource | None = None) -> AudioBuffer:
    """Partials on the quarter-tone grid under a Gaussian spectral envelope.

    Partials sit on every 24-TET step within mean +- 3*spread (clipped to
    the audible band), with amplitudes exp(-(f - mean)^2 / (2*spread^2))
    and phases drawn from ``entropy``.  A spread too small to reach any
    step collapses to a single partial at the quantized mean.
    """
    if entropy is None:
        raise InvalidParam("gaussian sound needs an entropy source for phases")
    if spec.mean_frequency >= sample_rate / 2:
        raise NyquistExceeded(f"{spec.mean_frequency} Hz at rate {sample_rate}")
    f_lo = max(spec.mean_frequency - 3.0 * spec.spread, 20.5)
    f_hi = min(spec.mean_frequency + 3.0 * spec.spread, sample_rate / 2 - 1.0,
               19999.0)
    step_lo = int(np.ceil(24.0 * np.log2(f_lo / 440.0)))
    step_hi = int(np.floor(24.0 * np.log2(f_hi / 440.0)))
    if step_lo > step_hi:
        # envelope support misses the grid entirely: single partial at the
        # quantized mean, full weight
        quantized = quantize_quarter_tone(spec.mean_frequency).quantized
        partials = [Partial(quantized, 1.0, phase=entropy.next_uniform())]
    else:
        partials = []
        for step in range(step_lo, step_hi + 1):
            freq = 440.0 * 2.0 ** (step / 24.0)
            amp = float(np.exp(-((freq - spec.mean_frequency) ** 2)
                               / (2.0 * spec.spread ** 2)))
            partials.append(Partial(freq, amp, phase=entropy.next_uniform()))
    return render_partials(partials, duration, sample_rate)


def write_wav(buffer: AudioBuffer, path) -> None:
    """16-bit signed PCM, mono, little-endian RIFF/WAVE, no metadata chunks."""
    pcm = np.rint(32767.0 * np.clip(buffer.samples, -1.0, 1.0)).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(buffer.sample_rate)
        fh.writeframes(pcm.tobytes())
