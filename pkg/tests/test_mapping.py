import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsonify import (BudgetExceeded, CatState, DegenerateAnchors,
                     EmissionTrajectory, EntropySource, FlatField, FockState,
                     NyquistExceeded, RabiParams, WaitingTimeSampler,
                     accumulate_histogram, build_grid, evaluate_field,
                     fit_quadratic, integrate, map_chunks, map_extrema,
                     map_moments, map_pointwise, quantize_quarter_tone,
                     rabi_palette, simulate_trajectory, waiting_time_density)
from qsonify.mapping import (FREQ_HI, FREQ_LO, PULSE_RATE, QUAD_ANCHORS,
                             linear_map)
from qsonify.wigner import Grid, WignerField


def small_field(values, lo=-1.0, hi=1.0):
    values = np.asarray(values, dtype=float)
    grid = Grid(np.linspace(lo, hi, values.shape[0]),
                np.linspace(lo, hi, values.shape[1]), "regular")
    return WignerField(grid, values)


class TestLinearMap:
    def test_endpoints_exact(self):
        assert linear_map(-2.5, -2.5, 3.5, FREQ_LO, FREQ_HI) == FREQ_LO
        assert linear_map(3.5, -2.5, 3.5, FREQ_LO, FREQ_HI) == FREQ_HI

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
    def test_monotone_between_endpoints(self, lo, span, x):
        hi = lo + abs(span) + 1.0
        a = linear_map(min(x, hi), lo, hi, 10.0, 20.0)
        b = linear_map(min(x + 0.5, hi), lo, hi, 10.0, 20.0)
        assert a <= b + 1e-12


class TestPointwise:
    def test_corner_anchors(self):
        fld = small_field(np.full((5, 5), 0.25))
        partials = map_pointwise(fld)
        first = partials[0]               # node (x_min, p_min)
        assert first.phase == 0.0 and first.frequency == FREQ_LO
        assert first.waveform == "sine"
        last = partials[-1]               # node (x_max, p_max)
        assert last.phase == 0.0          # end-exclusive wrap of a full cycle
        assert last.frequency == FREQ_HI

    def test_all_zero_field_is_silent(self):
        partials = map_pointwise(small_field(np.zeros((4, 4))))
        assert all(p.amplitude == 0.0 for p in partials)

    def test_negative_modes(self):
        fld = small_field([[0.5, -0.5], [0.0, -0.1]])
        tri = map_pointwise(fld, "triangle")
        assert [p.waveform for p in tri] == ["sine", "triangle", "sine",
                                             "triangle"]
        assert tri[1].amplitude == 0.5    # magnitude of the negative value
        pulsed = map_pointwise(fld, "pulsed-sine")
        assert pulsed[1].waveform == "pulsed-sine"
        assert pulsed[1].pulse_rate == PULSE_RATE

    def test_budget(self):
        fld = small_field(np.zeros((31, 31)))
        with pytest.raises(BudgetExceeded):
            map_pointwise(fld)
        assert len(map_pointwise(fld, allow_budget_overrun=True)) == 961

    def test_phase_spans_one_cycle(self):
        fld = small_field(np.ones((9, 2)))
        partials = map_pointwise(fld)
        phases = sorted({p.phase for p in partials})
        assert phases == pytest.approx(np.arange(8) / 8.0)


class TestQuadraticMap:
    def test_anchor_exactness_100_random_pairs(self):
        rng = np.random.default_rng(1)
        f_at_min, f_at_zero, f_at_max = QUAD_ANCHORS
        for _ in range(100):
            w_min = -float(10.0 ** rng.uniform(-3, 2))
            w_max = float(10.0 ** rng.uniform(-3, 2))
            qmap = fit_quadratic(w_min, w_max)
            assert qmap(w_min) == pytest.approx(f_at_min, rel=1e-9)
            assert qmap(0.0) == f_at_zero
            assert qmap(w_max) == pytest.approx(f_at_max, rel=1e-9)

    def test_degenerate_anchors(self):
        with pytest.raises(DegenerateAnchors):
            fit_quadratic(0.5, 1.0)
        with pytest.raises(DegenerateAnchors):
            fit_quadratic(-1.0, -0.5)

    def test_symmetric_case_against_linear_solve_oracle(self):
        vandermonde = np.array([[1.0, -1.0, 1.0], [0.0, 0.0, 1.0],
                                [1.0, 1.0, 1.0]])
        a, b, c = np.linalg.solve(vandermonde, np.array(QUAD_ANCHORS))
        qmap = fit_quadratic(-1.0, 1.0)
        assert (qmap.a, qmap.b, qmap.c) == pytest.approx((a, b, c), rel=1e-12)
        assert qmap(0.5) == pytest.approx(a * 0.25 + b * 0.5 + c, rel=1e-12)

    def test_rescaling_leaves_zero_anchor_fixed(self):
        fld_values = np.array([[-0.2, 0.1], [0.4, 0.0]])
        for scale in (1.0, 7.5):
            fld = small_field(fld_values * scale)
            qmap = fit_quadratic(float(fld.values.min()), float(fld.values.max()))
            assert qmap(0.0) == QUAD_ANCHORS[1]


class TestExtrema:
    def test_fock1_minimum_at_origin(self):
        state = FockState(1)
        # odd point count puts a node exactly on the origin
        fld = evaluate_field(state, build_grid(state, 31, "regular"))
        qmap = fit_quadratic(-0.4, 0.2)
        f_min, f_max = map_extrema(fld, qmap)
        assert f_min == pytest.approx(qmap(-1.0 / np.pi), rel=1e-12)

    def test_constant_zero_field(self):
        qmap = fit_quadratic(-1.0, 1.0)
        f_min, f_max = map_extrema(small_field(np.zeros((3, 3))), qmap)
        assert f_min == f_max == QUAD_ANCHORS[1]

    def test_grid_scan_oracle(self):
        state = FockState(0)
        fld = evaluate_field(state, build_grid(state, 40, "regular"))
        qmap = fit_quadratic(-0.1, float(fld.values.max()))
        f_min, f_max = map_extrema(fld, qmap)
        scan_min = min(float(v) for row in fld.values for v in row)
        scan_max = max(float(v) for row in fld.values for v in row)
        assert f_min == pytest.approx(qmap(scan_min))
        assert f_max == pytest.approx(qmap(scan_max))


def brute_force_slabs(fld):
    """Slab-volume oracle: per-cell clipped contributions in plain loops."""
    w_min = min(float(v) for row in fld.values for v in row)
    w_max = max(float(v) for row in fld.values for v in row)
    delta = (w_max - w_min) / 4.0
    weights = fld.grid.cell_weights
    volumes = []
    for k in range(4):
        lo = w_min + k * delta
        total = 0.0
        for i in range(fld.values.shape[0]):
            for j in range(fld.values.shape[1]):
                part = min(max(float(fld.values[i, j]) - lo, 0.0), delta)
                total += float(weights[i, j]) * part
        half = w_min + (k + 0.5) * delta
        volumes.append(-total if half < 0 else total)
    return volumes


class TestChunks:
    def qmap(self):
        return fit_quadratic(-0.5, 0.5)

    def test_all_positive_field(self):
        state = FockState(0)
        fld = evaluate_field(state, build_grid(state, 20, "regular"))
        analysis = map_chunks(fld, self.qmap())
        assert all(ch.signed_volume >= 0 for ch in analysis.chunks)
        assert all(1 <= ch.intensity <= 6 for ch in analysis.chunks)

    def test_largest_positive_volume_gets_six(self):
        state = FockState(0)
        fld = evaluate_field(state, build_grid(state, 20, "regular"))
        analysis = map_chunks(fld, self.qmap())
        top = max(analysis.chunks, key=lambda ch: ch.signed_volume)
        assert top.intensity == 6

    def test_fock1_lowest_slab_negative(self):
        state = FockState(1)
        fld = evaluate_field(state, build_grid(state, 30, "regular"))
        analysis = map_chunks(fld, self.qmap())
        lowest = analysis.chunks[0]
        assert lowest.signed_volume < 0
        assert lowest.intensity in (-1, -2)

    @pytest.mark.parametrize("state", [FockState(0), FockState(1),
                                       CatState(0.0, -1.0)])
    def test_matches_brute_force_oracle(self, state):
        fld = evaluate_field(state, build_grid(state, 25, "regular"))
        analysis = map_chunks(fld, self.qmap())
        oracle = brute_force_slabs(fld)
        for chunk, expected in zip(analysis.chunks, oracle):
            assert chunk.signed_volume == pytest.approx(expected, rel=1e-12,
                                                        abs=1e-15)

    @pytest.mark.parametrize("state", [FockState(0), FockState(1),
                                       CatState(0.0, -1.0)])
    def test_volume_conservation(self, state):
        # the unsigned slab volumes tile the column above W_min exactly
        fld = evaluate_field(state, build_grid(state, 50, "regular"))
        analysis = map_chunks(fld, self.qmap())
        recombined = sum(abs(ch.signed_volume) for ch in analysis.chunks)
        expected = integrate(fld) - float(fld.values.min()) * fld.grid.covered_area
        assert recombined == pytest.approx(expected, rel=1e-9)

    def test_half_height_frequencies(self):
        fld = small_field([[0.0, 1.0], [0.25, 0.75]])
        qmap = self.qmap()
        analysis = map_chunks(fld, qmap)
        for k, chunk in enumerate(analysis.chunks):
            assert chunk.half_height_level == pytest.approx((k + 0.5) / 4.0)
            assert chunk.frequency == pytest.approx(qmap(chunk.half_height_level))

    def test_flat_field(self):
        with pytest.raises(FlatField):
            map_chunks(small_field(np.full((3, 3), 0.7)), self.qmap())

    def test_intensity_never_zero(self):
        fld = small_field([[-1.0, -0.5], [0.5, 1.0]])
        analysis = map_chunks(fld, self.qmap())
        assert all(ch.intensity != 0 for ch in analysis.chunks)
        negatives = [ch for ch in analysis.chunks if ch.signed_volume < 0]
        assert all(ch.intensity in (-1, -2) for ch in negatives)


class TestMoments:
    def test_key_49_is_concert_pitch(self):
        from qsonify.mapping import piano_key_frequency
        assert piano_key_frequency(49) == 440.0
        assert piano_key_frequency(61) == pytest.approx(880.0)

    def test_vacuum_maps_to_window_midpoint(self):
        state = FockState(0)
        fld = evaluate_field(state, build_grid(state, 121, "regular"))
        spec = map_moments(fld, key_window=(25, 73))
        assert spec.mean_frequency == pytest.approx(440.0, rel=1e-6)
        assert spec.spread > 0

    def test_key_window_validation(self):
        state = FockState(0)
        fld = evaluate_field(state, build_grid(state, 20, "regular"))
        with pytest.raises(Exception):
            map_moments(fld, key_window=(0, 73))


class TestPalette:
    def params(self):
        omega = 2.0 * np.pi
        return RabiParams(omega, 0.1 * omega, 400.0)

    def fixtures(self, seed=3):
        p = self.params()
        traj = simulate_trajectory(p, EntropySource.from_seed(seed))
        edges = np.linspace(0.0, 4.0 * np.pi / p.rabi_frequency, 25)
        hist = accumulate_histogram([traj], edges)
        return p, traj, hist

    def test_first_event_is_fundamental_only(self):
        _, traj, hist = self.fixtures()
        events = rabi_palette(hist, 110.0, traj)
        assert len(events[0].partials) == 1
        assert events[0].partials[0].frequency == 110.0
        assert events[0].start == 0.0

    def test_event_count_and_default_dilation(self):
        _, traj, hist = self.fixtures()
        events = rabi_palette(hist, 110.0, traj)
        assert len(events) == len(traj) + 1
        gaps = [e.duration for e in events[:-1]]
        assert np.mean(gaps) == pytest.approx(2.0, rel=0.15)

    def test_final_amplitudes_proportional_to_histogram(self):
        _, traj, hist = self.fixtures()
        events = rabi_palette(hist, 110.0, traj)
        final = {p.frequency: p.amplitude for p in events[-1].partials
                 if p.frequency != 110.0}
        peak = max(hist.counts)
        for bin_idx, count in enumerate(hist.counts):
            freq = (bin_idx + 2) * 110.0
            if count > 0:
                assert final[freq] == pytest.approx(count / peak)
            else:
                assert freq not in final

    def test_amplitudes_nondecreasing_per_harmonic(self):
        _, traj, hist = self.fixtures()
        events = rabi_palette(hist, 110.0, traj)
        previous = {}
        for event in events:
            amps = {p.frequency: p.amplitude for p in event.partials}
            for freq, amp in previous.items():
                assert amps.get(freq, 0.0) >= amp - 1e-15
            previous = amps

    def test_nyquist_guard(self):
        _, traj, hist = self.fixtures()
        with pytest.raises(NyquistExceeded):
            rabi_palette(hist, 1000.0, traj)

    def test_profile_correlates_with_density(self):
        # 1e4 events: final harmonic profile tracks the waiting-time density
        p = self.params()
        sampler = WaitingTimeSampler(p)
        gaps = sampler.sample_many(EntropySource.from_seed(42), 10 ** 4)
        times = np.cumsum(gaps)
        traj = EmissionTrajectory(tuple(times.tolist()), float(times[-1]))
        edges = np.linspace(0.0, 4.0 * np.pi / p.rabi_frequency, 25)
        hist = accumulate_histogram([traj], edges)
        events = rabi_palette(hist, 110.0, traj, time_dilation=1.0)
        final = {p_.frequency: p_.amplitude for p_ in events[-1].partials}
        profile = [final.get((k + 2) * 110.0, 0.0) for k in range(24)]
        density = waiting_time_density(p, hist.bin_centers)
        corr = np.corrcoef(profile, density)[0, 1]
        assert corr > 0.99


class TestQuantization:
    def test_concert_pitch(self):
        assert quantize_quarter_tone(440.0) == (0, 440.0, 440.0)

    def test_spec_anchor_frequency(self):
        step, quantized, exact = quantize_quarter_tone(466.16)
        assert step == 2
        assert quantized == pytest.approx(440.0 * 2 ** (2 / 24), rel=1e-12)
        assert exact == 466.16

    def test_quarter_above_concert(self):
        step, quantized, _ = quantize_quarter_tone(450.0)
        assert step == 1
        assert quantized == pytest.approx(440.0 * 2 ** (1 / 24), rel=1e-12)

    def test_tie_rounds_upward(self):
        boundary = 440.0 * 2 ** (1 / 48)   # exactly between steps 0 and 1
        assert quantize_quarter_tone(boundary).step == 1

    @settings(max_examples=200, deadline=None)
    @given(st.floats(20.0, 20000.0))
    def test_error_within_eighth_tone(self, freq):
        step, quantized, exact = quantize_quarter_tone(freq)
        assert abs(math.log2(exact / quantized)) <= 1.0 / 48.0 + 1e-12
