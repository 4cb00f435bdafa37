"""Score generation for string quartet from mapping outputs.

Pitches live on the 24-step equal division of the octave (quarter tones),
counted from A4 = 440 Hz; every event also carries the exact frequency
the mapping produced, so performers can subdivide further.  Voice
assignment follows the mapping method:

* extrema scores (method b): the field maximum goes to the two violins
  (violin 2 doubles a quarter tone above violin 1), the minimum to viola
  with the cello an octave below; consecutive differing pitches in a
  voice are joined by glissando marks.
* chunk scores (method c): the four value slabs map top-to-bottom onto
  violin 1, violin 2, viola, cello.  Positive intensities 1..6 become the
  dynamics ladder ppp..ff; negative intensities (negative slab volumes, a
  nonclassicality marker) become playing techniques: -1 is p with sul
  ponticello, -2 is f with ricochet.  A tremolo mode swaps the dynamics
  ladder for tremolo-slow (|intensity| <= 2) / tremolo-fast.

Exports: a JSON schema mirroring the event fields verbatim, format-1 MIDI
with one track per voice (quarter tones realized as per-note pitch bends
against a declared +-2 semitone bend range), and a timed CSV cue list for
timbre-event sequences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from .errors import BadChunkCount, InvalidParam, RangeUnplayable
from .mapping import ChunkAnalysis, quantize_quarter_tone

DYNAMICS = ("ppp", "pp", "p", "mp", "mf", "f", "ff", "fff")
TECHNIQUES = ("sul-ponticello", "ricochet", "tremolo-slow", "tremolo-fast",
              "glissando")
VOICES = ("violin1", "violin2", "viola", "cello")

# Playable ranges in 24-TET steps from A4: violins down to G3, viola to C3,
# cello to C2, with generous upper bounds.
VOICE_RANGES = {
    "violin1": (-28, 68),
    "violin2": (-28, 68),
    "viola": (-42, 48),
    "cello": (-66, 36),
}

INTENSITY_DYNAMICS = {1: "ppp", 2: "pp", 3: "p", 4: "mf", 5: "f", 6: "ff"}

MIDI_DIVISION = 480          # ticks per beat
BEND_RANGE_SEMITONES = 2     # declared via RPN 0; quarter tone = 2048 raw
GM_PROGRAMS = {"violin1": 40, "violin2": 40, "viola": 41, "cello": 42}


@dataclass(frozen=True)
class Technique:
    """Playing-technique tag; glissando carries its target step."""

    name: str
    target_step: int | None = None

    def __post_init__(self):
        if self.name not in TECHNIQUES:
            raise InvalidParam(f"unknown technique {self.name!r}")
        if (self.name == "glissando") != (self.target_step is not None):
            raise InvalidParam("glissando (and only glissando) needs a target step")


@dataclass(frozen=True)
class ScoreEvent:
    """One notated event: voice, beat span, quarter-tone pitch, annotations."""

    voice: str
    start: float
    duration: float
    pitch_step: int
    exact_freq: float
    dynamic: str
    technique: Technique | None = None

    def __post_init__(self):
        if self.voice not in VOICES:
            raise InvalidParam(f"unknown voice {self.voice!r}")
        if self.duration <= 0 or self.exact_freq <= 0:
            raise InvalidParam("events need duration > 0 and exact_freq > 0")
        if self.dynamic not in DYNAMICS:
            raise InvalidParam(f"unknown dynamic {self.dynamic!r}")
        lo, hi = VOICE_RANGES[self.voice]
        if not lo <= self.pitch_step <= hi:
            raise InvalidParam(
                f"step {self.pitch_step} outside {self.voice} range [{lo}, {hi}]")

    @property
    def quantized_freq(self) -> float:
        return 440.0 * 2.0 ** (self.pitch_step / 24.0)


@dataclass
class Score:
    """Events sorted by (voice, start), non-overlapping within each voice."""

    events: list
    tempo: float = 60.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tempo <= 0:
            raise InvalidParam("tempo must be positive")
        self.events = sorted(self.events,
                             key=lambda e: (VOICES.index(e.voice), e.start))
        by_voice = {}
        for ev in self.events:
            last = by_voice.get(ev.voice)
            if last is not None and ev.start < last - 1e-9:
                raise InvalidParam(f"overlapping events in voice {ev.voice}")
            by_voice[ev.voice] = ev.start + ev.duration

    def voice_events(self, voice: str) -> list:
        return [e for e in self.events if e.voice == voice]


def clamp_to_range(voice: str, step: int, exact: float):
    """Shift by octaves until the step fits the voice range.

    Returns the adjusted (step, exact) pair; the exact frequency moves by
    the same octaves so the quantization error is preserved.
    """
    lo, hi = VOICE_RANGES[voice]
    for _ in range(16):
        if step < lo:
            step += 24
            exact *= 2.0
        elif step > hi:
            step -= 24
            exact /= 2.0
        else:
            return step, exact
    raise RangeUnplayable(f"no octave shift fits step {step} into {voice}")


def _with_glissandi(events: list) -> list:
    """Join consecutive differing pitches in one voice with glissando tags."""
    out = list(events)
    for i in range(len(out) - 1):
        nxt = out[i + 1]
        if out[i].pitch_step != nxt.pitch_step and out[i].technique is None:
            out[i] = ScoreEvent(out[i].voice, out[i].start, out[i].duration,
                                out[i].pitch_step, out[i].exact_freq,
                                out[i].dynamic,
                                Technique("glissando", nxt.pitch_step))
    return out


QUARTER_TONE_RATIO = 2.0 ** (1.0 / 24.0)


def score_method_b(freq_pairs, tempo: float = 60.0, metadata=None) -> Score:
    """Quartet score from a sweep of (f_min, f_max) frequency pairs.

    Per sweep step: f_max to violin 1, its quarter-tone upper neighbor to
    violin 2, f_min to viola, its lower octave to cello (range-clamped).
    One step per beat; pitch changes within a voice get glissando tags.
    """
    pairs = list(freq_pairs)
    if not pairs:
        raise InvalidParam("need at least one (f_min, f_max) pair")
    per_voice = {v: [] for v in VOICES}
    for beat, (f_min, f_max) in enumerate(pairs):
        hi = quantize_quarter_tone(f_max)
        lo = quantize_quarter_tone(f_min)
        assignments = (
            ("violin1", hi.step, f_max),
            ("violin2", hi.step + 1, f_max * QUARTER_TONE_RATIO),
            ("viola", lo.step, f_min),
            ("cello", lo.step - 24, f_min / 2.0),
        )
        for voice, step, exact in assignments:
            step, exact = clamp_to_range(voice, step, exact)
            per_voice[voice].append(
                ScoreEvent(voice, float(beat), 1.0, step, exact, "mf"))
    events = []
    for voice in VOICES:
        events.extend(_with_glissandi(per_voice[voice]))
    meta = dict(metadata or {})
    meta.setdefault("method", "extrema")
    return Score(events, tempo, meta)


def _chunk_event(voice, beat, chunk, tremolo_mode):
    quant = quantize_quarter_tone(chunk.frequency)
    step, exact = clamp_to_range(voice, quant.step, chunk.frequency)
    if tremolo_mode:
        dynamic = "mf"
        technique = Technique("tremolo-slow" if abs(chunk.intensity) <= 2
                              else "tremolo-fast")
    elif chunk.intensity == -1:
        dynamic, technique = "p", Technique("sul-ponticello")
    elif chunk.intensity == -2:
        dynamic, technique = "f", Technique("ricochet")
    else:
        dynamic, technique = INTENSITY_DYNAMICS[chunk.intensity], None
    return ScoreEvent(voice, float(beat), 1.0, step, exact, dynamic, technique)


def score_method_c(analyses, tempo: float = 60.0, tremolo_mode: bool = False,
                   metadata=None) -> Score:
    """Quartet score from chunk analyses, one per sweep step.

    The top value slab plays in violin 1 and the bottom slab in cello;
    intensities set dynamics (or tremolo type), negative intensities set
    the nonclassicality techniques.
    """
    analyses = list(analyses)
    if not analyses:
        raise InvalidParam("need at least one chunk analysis")
    slab_voice = ("cello", "viola", "violin2", "violin1")  # index 0 = lowest slab
    events = []
    for beat, analysis in enumerate(analyses):
        if not isinstance(analysis, ChunkAnalysis) or len(analysis.chunks) != 4:
            raise BadChunkCount("each step needs exactly 4 chunks")
        for k, chunk in enumerate(analysis.chunks):
            events.append(_chunk_event(slab_voice[k], beat, chunk, tremolo_mode))
    meta = dict(metadata or {})
    meta.setdefault("method", "chunks")
    meta.setdefault("tremolo_mode", tremolo_mode)
    return Score(events, tempo, meta)


# --- JSON -------------------------------------------------------------------

def export_score_json(score: Score, path) -> None:
    """Schema: {kind, tempo, metadata, events: [{voice, start, duration,
    pitch_step, exact_freq, dynamic, technique|null}]}."""
    doc = {
        "kind": "score",
        "tempo": score.tempo,
        "metadata": score.metadata,
        "events": [
            {
                "voice": ev.voice,
                "start": ev.start,
                "duration": ev.duration,
                "pitch_step": ev.pitch_step,
                "exact_freq": ev.exact_freq,
                "dynamic": ev.dynamic,
                "technique": None if ev.technique is None else {
                    "name": ev.technique.name,
                    "target_step": ev.technique.target_step,
                },
            }
            for ev in score.events
        ],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_score_json(path) -> Score:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "score":
        raise InvalidParam("not a score document")
    events = []
    for ev in doc["events"]:
        tech = ev.get("technique")
        technique = None if tech is None else Technique(tech["name"],
                                                        tech.get("target_step"))
        events.append(ScoreEvent(ev["voice"], ev["start"], ev["duration"],
                                 ev["pitch_step"], ev["exact_freq"],
                                 ev["dynamic"], technique))
    return Score(events, doc["tempo"], doc.get("metadata", {}))


# --- MIDI -------------------------------------------------------------------

def _vlq(value: int) -> bytes:
    """MIDI variable-length quantity."""
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _meta(kind: int, payload: bytes) -> bytes:
    return bytes([0xFF, kind]) + _vlq(len(payload)) + payload


def _track_chunk(messages) -> bytes:
    """Delta-encode (tick, order, payload) messages into an MTrk chunk."""
    body = bytearray()
    clock = 0
    for tick, _, payload in sorted(messages, key=lambda m: (m[0], m[1])):
        body += _vlq(tick - clock) + payload
        clock = tick
    body += _vlq(0) + _meta(0x2F, b"")
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def _note_and_bend(step: int):
    """Quarter-tone step -> (MIDI note, 14-bit bend).

    Even steps land on a semitone (bend centered at 8192); odd steps bend
    up half a semitone, 2048 raw units of the +-2 semitone range.
    """
    half_steps, remainder = divmod(step, 2)
    note = 69 + half_steps
    if not 0 <= note <= 127:
        raise RangeUnplayable(f"step {step} leaves the MIDI note range")
    return note, 8192 + remainder * 2048


def velocity_for(dynamic: str) -> int:
    """ppp..fff onto 16..127 in equal steps."""
    k = DYNAMICS.index(dynamic)
    return round(16 + 111 * k / 7)


def export_midi(score: Score, path) -> None:
    """Format-1 MIDI: a conductor track plus one track per voice.

    Each voice track declares a +-2 semitone pitch-bend range via RPN 0,
    then realizes quarter tones with a per-note bend.  Dynamics map to
    velocities (ppp=16 .. fff=127, equal steps); dynamics and techniques
    are also recorded as text meta-events at the note start.
    """
    tempo_us = round(60_000_000 / score.tempo)
    conductor = _track_chunk([
        (0, 0, _meta(0x51, tempo_us.to_bytes(3, "big"))),
    ])
    tracks = [conductor]
    for channel, voice in enumerate(VOICES):
        messages = [
            (0, 0, _meta(0x03, voice.encode("ascii"))),
            (0, 1, bytes([0xB0 | channel, 101, 0])),       # RPN 0 (bend range)
            (0, 2, bytes([0xB0 | channel, 100, 0])),
            (0, 3, bytes([0xB0 | channel, 6, BEND_RANGE_SEMITONES])),
            (0, 4, bytes([0xB0 | channel, 38, 0])),
            (0, 5, bytes([0xC0 | channel, GM_PROGRAMS[voice]])),
        ]
        for ev in score.voice_events(voice):
            tick_on = round(ev.start * MIDI_DIVISION)
            tick_off = tick_on + max(1, round(ev.duration * MIDI_DIVISION))
            note, bend = _note_and_bend(ev.pitch_step)
            text = ev.dynamic + ("" if ev.technique is None
                                 else f" {ev.technique.name}")
            messages.append((tick_on, 6, _meta(0x01, text.encode("ascii"))))
            messages.append((tick_on, 7, bytes([0xE0 | channel,
                                                bend & 0x7F, bend >> 7])))
            messages.append((tick_on, 8, bytes([0x90 | channel, note,
                                                velocity_for(ev.dynamic)])))
            messages.append((tick_off, 5, bytes([0x80 | channel, note, 64])))
        tracks.append(_track_chunk(messages))
    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(tracks), MIDI_DIVISION)
    with open(path, "wb") as fh:
        fh.write(header)
        for chunk in tracks:
            fh.write(chunk)


# --- timbre-event cue list ----------------------------------------------------

def export_timeline(events, path) -> None:
    """CSV cue list: start_s, duration_s, n_partials, added_harmonic_index.

    The added-harmonic column names the harmonic number (1 = fundamental)
    that appeared or rose at this event relative to the previous one; 0
    when nothing changed.  Events must be sorted by start.
    """
    events = list(events)
    if any(b.start < a.start for a, b in zip(events, events[1:])):
        raise InvalidParam("events must be sorted by start")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("start_s,duration_s,n_partials,added_harmonic_index\n")
        prev_amps = {}
        for ev in events:
            amps = {p.frequency: p.amplitude for p in ev.partials}
            added = 0
            if ev.partials:
                f0 = min(amps)
                best_rise = 0.0
                for freq, amp in amps.items():
                    rise = amp - prev_amps.get(freq, 0.0)
                    if rise > best_rise + 1e-12:
                        best_rise = rise
                        added = round(freq / f0)
            prev_amps = amps
            fh.write(f"{ev.start!r},{ev.duration!r},{len(ev.partials)},{added}\n")
