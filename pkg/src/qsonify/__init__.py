"""qsonify: render quantum simulation data as sound, scores, and images.

Three data sources -- spontaneous-emission trajectories of a driven
two-level atom, phase-space quasi-probability fields of number and kitten
states, and mean-field lattice-boson sweeps through the insulator to
superfluid transition -- feed a common set of sound mappings, an additive
synthesizer with WAV output, and quarter-tone score exporters (JSON and
MIDI).  See the README for the pipeline layout and file formats.
"""

from .bosehubbard import (GutzwillerState, LatticeSnapshot, LatticeSpec,
                          occupation_stats, snapshot_to_field,
                          solve_gutzwiller, sweep, total_energy)
from .entropy import EntropySource
from .errors import (BadChunkCount, BudgetExceeded, DegenerateAnchors,
                     DegenerateField, EmptyField, EntropyExhausted, FlatField,
                     InvalidBins, InvalidParam, ModelDomain, NoConvergence,
                     NumericalInconsistency, NyquistExceeded, QsonifyError,
                     RangeUnplayable, TooManyPartials)
from .mapping import (Chunk, ChunkAnalysis, GaussianSoundSpec, Partial,
                      QuadraticMap, QuarterTone, TimbreEvent, fit_quadratic,
                      map_chunks, map_extrema, map_moments, map_pointwise,
                      quantize_quarter_tone, rabi_palette)
from .qdynamics import (EmissionTrajectory, RabiParams, WaitingTimeHistogram,
                        WaitingTimeSampler, accumulate_histogram,
                        excited_population, intervals, sample_waiting_time,
                        simulate_trajectories, simulate_trajectory,
                        waiting_time_cdf, waiting_time_density)
from .score import (Score, ScoreEvent, Technique, export_midi,
                    export_score_json, export_timeline, parse_score_json,
                    score_method_b, score_method_c)
from .synth import (AudioBuffer, render_gaussian_sound, render_partials,
                    render_sequence, write_wav)
from .wigner import (CatState, FockState, Grid, WignerField, auto_radius,
                     build_grid, evaluate_field, integrate, laguerre,
                     marginal, moments_x, read_field_csv, wigner_cat,
                     wigner_fock, write_field_csv, write_field_pgm)

__version__ = "0.1.0"
