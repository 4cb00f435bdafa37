"""Command-line entry point wiring all pipelines together.

Subcommands: ``rabi-sim``, ``wigner``, ``map``, ``synth``, ``bh-sim``,
``score``, plus the composed ``demo-rabi``, ``demo-cat``, ``demo-bh``.
Stages communicate through documented CSV/JSON intermediates so every
step stays independently inspectable:

* field CSV         -- header ``x,p,w``, one row per grid node (x-major).
* histogram CSV     -- header ``bin_lo,bin_hi,count``.
* trajectory JSON   -- {"kind": "emission-trajectory", "duration", "emission_times"}.
* partials JSON     -- {"kind": "partials", "partials": [{frequency, amplitude,
                       phase, waveform, pulse_rate}]}.
* events JSON       -- {"kind": "timbre-events", "events": [{start, duration,
                       partials: [...]}]}.
* pairs JSON        -- {"kind": "freq-pairs", "pairs": [[f_min, f_max], ...]}.
* chunks JSON       -- {"kind": "chunk-analyses", "analyses": [{"chunks":
                       [{half_height_level, frequency, signed_volume,
                       intensity}] x4}]}.
* gaussian JSON     -- {"kind": "gaussian-sound", "mean_frequency", "spread"}.
* score JSON / MIDI -- see :mod:`qsonify.score`.

Every run writes ``manifest.json`` (full configuration, no timestamps)
into the output directory, so identical manifests reproduce byte-identical
artifacts.  Exactly one entropy mode is active per run: ``--seed``
(default 42) or ``--entropy-file`` with raw bytes from a true random
source.  Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys

import numpy as np

from . import bosehubbard, mapping, qdynamics, score, synth, wigner
from .entropy import EntropySource
from .errors import InvalidParam, QsonifyError

log = logging.getLogger("qsonify")


# --- wire formats -----------------------------------------------------------

def partial_to_dict(part: mapping.Partial) -> dict:
    return {"frequency": part.frequency, "amplitude": part.amplitude,
            "phase": part.phase, "waveform": part.waveform,
            "pulse_rate": part.pulse_rate}


def partial_from_dict(doc: dict) -> mapping.Partial:
    return mapping.Partial(doc["frequency"], doc["amplitude"],
                           doc.get("phase", 0.0), doc.get("waveform", "sine"),
                           doc.get("pulse_rate", mapping.PULSE_RATE))


def event_to_dict(ev: mapping.TimbreEvent) -> dict:
    return {"start": ev.start, "duration": ev.duration,
            "partials": [partial_to_dict(p) for p in ev.partials]}


def event_from_dict(doc: dict) -> mapping.TimbreEvent:
    return mapping.TimbreEvent(doc["start"], doc["duration"],
                               tuple(partial_from_dict(p) for p in doc["partials"]))


def write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def write_histogram_csv(hist: qdynamics.WaitingTimeHistogram, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        edges = hist.bin_edges
        for i, count in enumerate(hist.counts):
            fh.write(f"{edges[i]!r},{edges[i + 1]!r},{count}\n")


def read_histogram_csv(path) -> qdynamics.WaitingTimeHistogram:
    edges, counts = [], []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "bin_lo,bin_hi,count":
            raise InvalidParam(f"expected histogram header, got {header!r}")
        for line in fh:
            line = line.strip()
            if line:
                lo, hi, count = line.split(",")
                if not edges:
                    edges.append(float(lo))
                edges.append(float(hi))
                counts.append(int(count))
    return qdynamics.WaitingTimeHistogram(tuple(edges), tuple(counts),
                                          int(sum(counts)))


def write_trajectory_json(traj: qdynamics.EmissionTrajectory, path) -> None:
    write_json({"kind": "emission-trajectory", "duration": traj.duration,
                "emission_times": list(traj.emission_times)}, path)


def read_trajectory_json(path) -> qdynamics.EmissionTrajectory:
    doc = read_json(path)
    if doc.get("kind") != "emission-trajectory":
        raise InvalidParam("not an emission-trajectory document")
    return qdynamics.EmissionTrajectory(tuple(doc["emission_times"]),
                                        doc["duration"])


def parse_state_spec(text: str):
    """Parse ``fock:m=1`` or ``cat:alpha=0,dalpha=-1`` (complex values allowed)."""
    kind, _, body = text.partition(":")
    fields = {}
    for item in body.split(","):
        if item:
            key, _, value = item.partition("=")
            fields[key.strip()] = value.strip()
    if kind == "fock":
        return wigner.FockState(int(fields["m"]))
    if kind == "cat":
        alpha = complex(fields.get("alpha", "0").replace("i", "j"))
        dalpha = complex(fields["dalpha"].replace("i", "j"))
        return wigner.CatState(alpha, dalpha)
    raise InvalidParam(f"unknown state kind {kind!r} (use fock:... or cat:...)")


# --- shared plumbing ---------------------------------------------------------

def add_common_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int, default=42,
                       help="seed for the deterministic generator (default 42)")
    group.add_argument("--entropy-file", type=pathlib.Path, default=None,
                       help="raw byte file consumed as the randomness source")
    parser.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("."),
                        help="directory receiving all artifacts (default .)")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")


def entropy_from_args(args) -> EntropySource:
    if args.entropy_file is not None:
        return EntropySource.from_file(args.entropy_file)
    return EntropySource.from_seed(args.seed)


def artifact_path(args, name) -> pathlib.Path:
    """Resolve an artifact name inside the output directory."""
    path = args.out_dir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_manifest(args, command: str) -> None:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "command", "verbose"):
            continue
        config[key] = str(value) if isinstance(value, pathlib.Path) else value
    write_json({"command": command, "config": config},
               artifact_path(args, "manifest.json"))


# --- subcommands -------------------------------------------------------------

def cmd_rabi_sim(args) -> int:
    if args.trajectories < 1:
        raise InvalidParam("need at least one trajectory")
    params = qdynamics.RabiParams(args.omega, args.gamma, args.duration,
                                  args.model)
    src = entropy_from_args(args)
    trajectories = qdynamics.simulate_trajectories(params, src, args.trajectories)
    n_events = sum(len(t) for t in trajectories)
    log.info("simulated %d trajectories, %d emissions", len(trajectories), n_events)
    if args.bin_max is not None:
        bin_max = args.bin_max
    else:
        longest = max((float(qdynamics.intervals(t).max()) for t in trajectories
                       if len(t)), default=args.duration)
        bin_max = np.nextafter(longest, np.inf)  # keep the longest interval binned
    edges = np.linspace(0.0, bin_max, args.bins + 1)
    hist = qdynamics.accumulate_histogram(trajectories, edges)
    write_histogram_csv(hist, artifact_path(args, args.out_csv))
    if args.out_trajectory:
        write_trajectory_json(trajectories[0], artifact_path(args, args.out_trajectory))
    write_manifest(args, "rabi-sim")
    return 0


def cmd_wigner(args) -> int:
    state = parse_state_spec(args.state)
    scheme = {"regular": "regular", "gauss": "gaussian-intervals"}[args.scheme]
    entropy = entropy_from_args(args) if scheme == "gaussian-intervals" else None
    grid = wigner.build_grid(state, args.points, scheme, entropy,
                             coverage=args.coverage)
    fld = wigner.evaluate_field(state, grid)
    log.info("evaluated %s on %d nodes, integral %.6f", fld.source,
             fld.n_nodes, wigner.integrate(fld))
    if args.out_csv:
        wigner.write_field_csv(fld, artifact_path(args, args.out_csv))
    if args.out_pgm:
        wigner.write_field_pgm(fld, artifact_path(args, args.out_pgm))
    write_manifest(args, "wigner")
    return 0


def _qmap_for(args, fld) -> mapping.QuadraticMap:
    w_min = args.qmap_min if args.qmap_min is not None else float(fld.values.min())
    w_max = args.qmap_max if args.qmap_max is not None else float(fld.values.max())
    return mapping.fit_quadratic(w_min, w_max)


def cmd_map(args) -> int:
    if args.method == "palette":
        hist = read_histogram_csv(args.in_histogram)
        trajectory = read_trajectory_json(args.in_trajectory)
        events = mapping.rabi_palette(hist, args.f0, trajectory, args.dilation)
        write_json({"kind": "timbre-events",
                    "events": [event_to_dict(e) for e in events]},
                   artifact_path(args, args.out_json))
        write_manifest(args, "map")
        return 0
    fld = wigner.read_field_csv(args.in_csv)
    if args.method == "a":
        mode = "pulsed-sine" if args.negative_mode == "pulse" else "triangle"
        partials = mapping.map_pointwise(fld, mode,
                                         allow_budget_overrun=args.allow_budget)
        doc = {"kind": "partials",
               "partials": [partial_to_dict(p) for p in partials]}
    elif args.method == "b":
        qmap = _qmap_for(args, fld)
        f_min, f_max = mapping.map_extrema(fld, qmap)
        doc = {"kind": "freq-pairs", "pairs": [[f_min, f_max]],
               "qmap": {"a": qmap.a, "b": qmap.b, "c": qmap.c}}
    elif args.method == "c":
        qmap = _qmap_for(args, fld)
        analysis = mapping.map_chunks(fld, qmap)
        doc = {"kind": "chunk-analyses", "analyses": [{
            "chunks": [{"half_height_level": ch.half_height_level,
                        "frequency": ch.frequency,
                        "signed_volume": ch.signed_volume,
                        "intensity": ch.intensity} for ch in analysis.chunks]}]}
    elif args.method == "d":
        spec = mapping.map_moments(fld, (args.key_lo, args.key_hi))
        doc = {"kind": "gaussian-sound", "mean_frequency": spec.mean_frequency,
               "spread": spec.spread}
    else:
        raise InvalidParam(f"unknown mapping method {args.method!r}")
    write_json(doc, artifact_path(args, args.out_json))
    write_manifest(args, "map")
    return 0


def cmd_synth(args) -> int:
    doc = read_json(args.in_json)
    kind = doc.get("kind")
    if kind == "partials":
        partials = [partial_from_dict(p) for p in doc["partials"]]
        buffer = synth.render_partials(partials, args.duration, args.rate)
    elif kind == "timbre-events":
        events = [event_from_dict(e) for e in doc["events"]]
        buffer = synth.render_sequence(events, args.rate)
    elif kind == "gaussian-sound":
        spec = mapping.GaussianSoundSpec(doc["mean_frequency"], doc["spread"])
        buffer = synth.render_gaussian_sound(spec, args.duration, args.rate,
                                             entropy_from_args(args))
    else:
        raise InvalidParam(f"cannot render JSON of kind {kind!r}")
    synth.write_wav(buffer, artifact_path(args, args.out_wav))
    log.info("wrote %.2f s of audio", buffer.duration)
    write_manifest(args, "synth")
    return 0


def parse_dims(text: str) -> tuple:
    parts = text.lower().split("x")
    return tuple(int(p) for p in parts)


def _write_snapshot(args, snap, stem_csv, stem_pgm) -> None:
    if stem_csv:
        path = artifact_path(args, stem_csv)
        with open(path, "w", encoding="ascii") as fh:
            fh.write("site_x,site_y,mean,std\n")
            mean = np.atleast_2d(snap.mean_n.T).T
            std = np.atleast_2d(snap.std_n.T).T
            for ix in range(mean.shape[0]):
                for iy in range(mean.shape[1]):
                    fh.write(f"{ix},{iy},{float(mean[ix, iy])!r},"
                             f"{float(std[ix, iy])!r}\n")
    if stem_pgm:
        base = pathlib.Path(stem_pgm)
        for channel in ("mean", "std"):
            fld = bosehubbard.snapshot_to_field(snap, channel)
            name = base.with_name(f"{base.stem}_{channel}{base.suffix or '.pgm'}")
            wigner.write_field_pgm(fld, artifact_path(args, name))


def _indexed(name: str, index: int) -> str:
    path = pathlib.Path(name)
    return str(path.with_name(f"{path.stem}_{index:03d}{path.suffix}"))


def cmd_bh_sim(args) -> int:
    dims = parse_dims(args.dims)
    spec = bosehubbard.LatticeSpec(dims, args.tU, 1.0, args.muU, args.trap,
                                   args.nmax)
    if args.ramp:
        t0, t1, steps = args.ramp.split(":")
        schedule = [(t, args.muU) for t in
                    np.linspace(float(t0), float(t1), int(steps))]
        snapshots = bosehubbard.sweep(spec, schedule, tol=args.tol)
        for i, snap in enumerate(snapshots):
            log.info("point %d: t/U=%.4f, N=%.2f", i, snap.params[0],
                     snap.total_atoms)
            _write_snapshot(args, snap,
                            _indexed(args.out_csv, i) if args.out_csv else None,
                            _indexed(args.out_pgm, i) if args.out_pgm else None)
    else:
        state = bosehubbard.solve_gutzwiller(spec, tol=args.tol)
        snap = bosehubbard.occupation_stats(state)
        log.info("N=%.2f atoms", snap.total_atoms)
        _write_snapshot(args, snap, args.out_csv, args.out_pgm)
    write_manifest(args, "bh-sim")
    return 0


def cmd_score(args) -> int:
    if args.method == "timeline":
        doc = read_json(args.in_json)
        if doc.get("kind") != "timbre-events":
            raise InvalidParam("timeline needs a timbre-events document")
        events = [event_from_dict(e) for e in doc["events"]]
        score.export_timeline(events, artifact_path(args, args.out_csv))
        write_manifest(args, "score")
        return 0
    doc = read_json(args.in_json)
    if args.method == "b":
        if doc.get("kind") != "freq-pairs":
            raise InvalidParam("method b needs a freq-pairs document")
        built = score.score_method_b(doc["pairs"], tempo=args.tempo,
                                     metadata={"source": str(args.in_json)})
    elif args.method == "c":
        if doc.get("kind") != "chunk-analyses":
            raise InvalidParam("method c needs a chunk-analyses document")
        analyses = []
        for entry in doc["analyses"]:
            chunks = tuple(mapping.Chunk(ch["half_height_level"], ch["frequency"],
                                         ch["signed_volume"], ch["intensity"])
                           for ch in entry["chunks"])
            analyses.append(mapping.ChunkAnalysis(chunks))
        built = score.score_method_c(analyses, tempo=args.tempo,
                                     tremolo_mode=args.tremolo,
                                     metadata={"source": str(args.in_json)})
    else:
        raise InvalidParam(f"unknown score method {args.method!r}")
    if args.out_json:
        score.export_score_json(built, artifact_path(args, args.out_json))
    if args.out_midi:
        score.export_midi(built, artifact_path(args, args.out_midi))
    write_manifest(args, "score")
    return 0


# --- demos --------------------------------------------------------------------

def cmd_demo_rabi(args) -> int:
    """Emission trajectory -> histogram -> harmonic palette -> audio + cues."""
    omega = 2.0 * np.pi * 50.0
    params = qdynamics.RabiParams(omega, 0.1 * omega, 0.5)
    src = entropy_from_args(args)
    trajectory = qdynamics.simulate_trajectory(params, src)
    edges = np.linspace(0.0, 45.0 / omega, 13)   # 12 bins over the density bulk
    hist = qdynamics.accumulate_histogram([trajectory], edges)
    write_histogram_csv(hist, artifact_path(args, "histogram.csv"))
    write_trajectory_json(trajectory, artifact_path(args, "trajectory.json"))
    events = mapping.rabi_palette(hist, 110.0, trajectory)
    write_json({"kind": "timbre-events",
                "events": [event_to_dict(e) for e in events]},
               artifact_path(args, "events.json"))
    score.export_timeline(events, artifact_path(args, "timeline.csv"))
    synth.write_wav(synth.render_sequence(events),
                    artifact_path(args, "audio.wav"))
    write_manifest(args, "demo-rabi")
    return 0


def cmd_demo_cat(args) -> int:
    """Kitten-state shift sweep -> extrema frequencies -> quartet score + audio."""
    shifts = np.linspace(-3.0, -0.75, 10)        # includes -1.0
    fields = []
    for dalpha in shifts:
        state = wigner.CatState(0.0, complex(dalpha))
        grid = wigner.build_grid(state, 24, "regular")
        fields.append(wigner.evaluate_field(state, grid))
    wigner.write_field_csv(fields[list(shifts).index(-1.0)],
                           artifact_path(args, "field_dalpha_-1.00.csv"))
    w_min = min(float(f.values.min()) for f in fields)
    w_max = max(float(f.values.max()) for f in fields)
    qmap = mapping.fit_quadratic(w_min, w_max)
    pairs = [mapping.map_extrema(f, qmap) for f in fields]
    write_json({"kind": "freq-pairs", "pairs": [list(p) for p in pairs],
                "qmap": {"a": qmap.a, "b": qmap.b, "c": qmap.c}},
               artifact_path(args, "pairs.json"))
    built = score.score_method_b(pairs, metadata={
        "state": "cat(alpha=0)", "method": "extrema",
        "dalpha_sweep": [float(d) for d in shifts]})
    score.export_score_json(built, artifact_path(args, "score.json"))
    score.export_midi(built, artifact_path(args, "score.mid"))
    tones = [mapping.TimbreEvent(float(i), 1.0,
                                 (mapping.Partial(pair[0], 0.8),
                                  mapping.Partial(pair[1], 1.0)))
             for i, pair in enumerate(pairs)]
    synth.write_wav(synth.render_sequence(tones),
                    artifact_path(args, "audio.wav"))
    write_manifest(args, "demo-cat")
    return 0


def cmd_demo_bh(args) -> int:
    """Insulator-to-superfluid ramp -> site statistics -> pointwise audio."""
    spec = bosehubbard.LatticeSpec((12, 12), 0.01, 1.0, 0.5)
    schedule = [(0.01, 0.5), (0.03, 0.5), (0.06, 0.5)]
    snapshots = bosehubbard.sweep(spec, schedule)
    events = []
    for i, snap in enumerate(snapshots):
        _write_snapshot(args, snap, _indexed("snapshot.csv", i),
                        _indexed("snapshot.pgm", i))
        fld = bosehubbard.snapshot_to_field(snap, "mean")
        partials = mapping.map_pointwise(fld, "triangle")
        events.append(mapping.TimbreEvent(3.0 * i, 3.0, tuple(partials)))
    synth.write_wav(synth.render_sequence(events),
                    artifact_path(args, "audio.wav"))
    write_manifest(args, "demo-bh")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsonify",
        description="Sonify quantum data: emission trajectories, "
                    "quasi-probability fields, lattice sweeps.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("rabi-sim", help="simulate emission trajectories")
    p.add_argument("--omega", type=float, default=2.0 * np.pi * 1e6,
                   help="Rabi angular frequency, rad/s")
    p.add_argument("--gamma", type=float, default=2.0 * np.pi * 1e5,
                   help="decay rate, 1/s (default 0.1*omega)")
    p.add_argument("--duration", type=float, default=1e-4, help="window T, s")
    p.add_argument("--trajectories", type=int, default=1)
    p.add_argument("--bins", type=int, default=24)
    p.add_argument("--bin-max", type=float, default=None,
                   help="histogram upper edge, s (default: longest interval)")
    p.add_argument("--model", choices=("ideal", "damped"), default="ideal")
    p.add_argument("--out-csv", default="histogram.csv")
    p.add_argument("--out-trajectory", default=None,
                   help="write the first trajectory as JSON")
    add_common_flags(p)
    p.set_defaults(func=cmd_rabi_sim)

    p = sub.add_parser("wigner", help="evaluate a quasi-probability field")
    p.add_argument("--state", required=True,
                   help="fock:m=1 or cat:alpha=0,dalpha=-1")
    p.add_argument("--points", type=int, default=30, help="points per side")
    p.add_argument("--scheme", choices=("regular", "gauss"), default="regular")
    p.add_argument("--coverage", type=float, default=wigner.DEFAULT_COVERAGE,
                   help="|W| mass fraction the grid must contain")
    p.add_argument("--out-csv", default="field.csv")
    p.add_argument("--out-pgm", default=None)
    add_common_flags(p)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("map", help="map a field or trajectory to sound controls")
    p.add_argument("--method", choices=("a", "b", "c", "d", "palette"),
                   required=True)
    p.add_argument("--in-csv", type=pathlib.Path, default=None,
                   help="field CSV (methods a-d)")
    p.add_argument("--in-histogram", type=pathlib.Path, default=None,
                   help="histogram CSV (palette)")
    p.add_argument("--in-trajectory", type=pathlib.Path, default=None,
                   help="trajectory JSON (palette)")
    p.add_argument("--negative-mode", choices=("triangle", "pulse"),
                   default="triangle")
    p.add_argument("--allow-budget", action="store_true",
                   help="override the 900-voice budget")
    p.add_argument("--qmap-min", type=float, default=None,
                   help="anchor w_min (default: field minimum)")
    p.add_argument("--qmap-max", type=float, default=None,
                   help="anchor w_max (default: field maximum)")
    p.add_argument("--key-lo", type=int, default=25)
    p.add_argument("--key-hi", type=int, default=73)
    p.add_argument("--f0", type=float, default=110.0,
                   help="palette fundamental, Hz")
    p.add_argument("--dilation", type=float, default=None,
                   help="palette time dilation (default: 2 s mean spacing)")
    p.add_argument("--out-json", default="mapped.json")
    add_common_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("synth", help="render mapped JSON to a WAV file")
    p.add_argument("--in-json", type=pathlib.Path, required=True)
    p.add_argument("--duration", type=float, default=4.0,
                   help="seconds (partials / gaussian-sound inputs)")
    p.add_argument("--rate", type=int, default=synth.DEFAULT_SAMPLE_RATE)
    p.add_argument("--out-wav", default="audio.wav")
    add_common_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bh-sim", help="mean-field lattice simulation")
    p.add_argument("--dims", default="20x20", help="20x20 or 60")
    p.add_argument("--tU", type=float, default=0.01, help="hopping t/U")
    p.add_argument("--muU", type=float, default=0.5, help="chemical potential mu/U")
    p.add_argument("--trap", type=float, default=0.0, help="trap curvature V/U")
    p.add_argument("--ramp", default=None, help="t0:t1:steps ramp of t/U")
    p.add_argument("--nmax", type=int, default=bosehubbard.DEFAULT_N_MAX)
    p.add_argument("--tol", type=float, default=bosehubbard.DEFAULT_TOL)
    p.add_argument("--out-csv", default="snapshot.csv")
    p.add_argument("--out-pgm", default=None)
    add_common_flags(p)
    p.set_defaults(func=cmd_bh_sim)

    p = sub.add_parser("score", help="build score files from mapped JSON")
    p.add_argument("--method", choices=("b", "c", "timeline"), required=True)
    p.add_argument("--in-json", type=pathlib.Path, required=True)
    p.add_argument("--tempo", type=float, default=60.0)
    p.add_argument("--tremolo", action="store_true",
                   help="method c: tremolo types instead of dynamics")
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-midi", default=None)
    p.add_argument("--out-csv", default="timeline.csv",
                   help="cue list path (timeline method)")
    add_common_flags(p)
    p.set_defaults(func=cmd_score)

    for name, func, blurb in (
            ("demo-rabi", cmd_demo_rabi, "emission palette end to end"),
            ("demo-cat", cmd_demo_cat, "kitten-state sweep to score and audio"),
            ("demo-bh", cmd_demo_bh, "lattice ramp to audio")):
        p = sub.add_parser(name, help=blurb)
        add_common_flags(p)
        p.set_defaults(func=func)
    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args)
    except QsonifyError as exc:
        print(f"qsonify {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qsonify {args.command}: IoError: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
