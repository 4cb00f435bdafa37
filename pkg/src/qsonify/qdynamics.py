"""Driven two-level atom: population dynamics and spontaneous-emission times.

A resonantly driven atom cycles between ground and excited state at angular
frequency ``omega`` (Rabi cycling); spontaneous decay at rate ``gamma``
interrupts the cycle at a random time, emits a photon, and restarts the
population dynamics from the ground state.  The waiting time between
consecutive emissions has density

    w(tau) = gamma * P_e(tau) * exp(-gamma * integral_0^tau P_e(s) ds)

which combines the oscillating excited-state population P_e with an
exponential decay envelope.  Two population models are supported:

* ``ideal``  -- undamped cycling, P_e(tau) = sin^2(omega*tau/2).
* ``damped`` -- resonant optical-Bloch solution
  P_e(tau) = (omega^2 / (2*omega^2 + gamma^2)) *
             [1 - exp(-3*gamma*tau/4) * (cos(w_r*tau)
              + (3*gamma/(4*w_r)) * sin(w_r*tau))],
  w_r = sqrt(omega^2 - gamma^2/16), valid for omega > gamma/4.

Both P_e and its running integral have closed forms, so the waiting-time
CDF is exact; sampling inverts it on a precomputed monotone table with
bisection refinement.  All internals work in the dimensionless variables
theta = omega*tau and g = gamma/omega, which makes trajectories exactly
invariant under power-of-two rescaling of (omega, gamma, 1/T).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .entropy import EntropySource
from .errors import InvalidBins, InvalidParam, ModelDomain

POPULATION_MODELS = ("ideal", "damped")


@dataclass(frozen=True)
class RabiParams:
    """Drive and decay parameters of one simulated atom run.

    Attributes
    ----------
    rabi_frequency : float
        Angular drive frequency omega in rad/s, > 0.
    decay_rate : float
        Spontaneous decay rate gamma in 1/s, >= 0.
    duration : float
        Total observation window T in seconds, > 0.
    population_model : str
        "ideal" (default) or "damped".
    """

    rabi_frequency: float
    decay_rate: float
    duration: float
    population_model: str = "ideal"

    def __post_init__(self):
        if not self.rabi_frequency > 0:
            raise InvalidParam("rabi_frequency must be > 0")
        if self.decay_rate < 0:
            raise InvalidParam("decay_rate must be >= 0")
        if not self.duration > 0:
            raise InvalidParam("duration must be > 0")
        if self.population_model not in POPULATION_MODELS:
            raise InvalidParam(f"unknown population model {self.population_model!r}")
        if self.population_model == "damped" and self.rabi_frequency <= self.decay_rate / 4:
            raise ModelDomain("damped model needs omega > gamma/4")

    @property
    def damping_ratio(self) -> float:
        """gamma/omega, the only parameter the dimensionless dynamics depend on."""
        return self.decay_rate / self.rabi_frequency


@dataclass(frozen=True)
class EmissionTrajectory:
    """Ordered spontaneous-emission times of one run, all in (0, duration]."""

    emission_times: tuple
    duration: float

    def __post_init__(self):
        times = np.asarray(self.emission_times, dtype=float)
        if times.size and (np.any(np.diff(times) <= 0) or times[0] <= 0
                           or times[-1] > self.duration):
            raise InvalidParam("emission times must be strictly increasing in (0, T]")

    def __len__(self) -> int:
        return len(self.emission_times)


@dataclass(frozen=True)
class WaitingTimeHistogram:
    """Binned inter-emission intervals.

    ``total`` counts every interval seen, including those outside the bin
    edges; intervals land in bins half-open on the right, [lo, hi).
    """

    bin_edges: tuple
    counts: tuple
    total: int

    def __post_init__(self):
        if len(self.counts) != len(self.bin_edges) - 1:
            raise InvalidBins("need exactly one count per bin")

    @property
    def bin_centers(self) -> np.ndarray:
        edges = np.asarray(self.bin_edges)
        return 0.5 * (edges[:-1] + edges[1:])


# --- dimensionless population models: theta = omega*tau, g = gamma/omega ---

def _pop_ideal(theta):
    return np.sin(0.5 * theta) ** 2


def _cum_ideal(theta):
    # integral of sin^2(theta/2): theta/2 - sin(theta)/2
    return 0.5 * theta - 0.5 * np.sin(theta)


def _damped_coeffs(g: float):
    amp = 1.0 / (2.0 + g * g)
    w_r = np.sqrt(1.0 - g * g / 16.0)
    b = 0.75 * g
    return amp, w_r, b


def _pop_damped(theta, g):
    amp, w_r, b = _damped_coeffs(g)
    decay = np.exp(-b * theta)
    return amp * (1.0 - decay * (np.cos(w_r * theta) + (b / w_r) * np.sin(w_r * theta)))


def _cum_damped(theta, g):
    amp, w_r, b = _damped_coeffs(g)
    denom = b * b + w_r * w_r
    decay = np.exp(-b * theta)
    cos_t, sin_t = np.cos(w_r * theta), np.sin(w_r * theta)
    int_cos = (b - decay * (b * cos_t - w_r * sin_t)) / denom
    int_sin = (w_r - decay * (b * sin_t + w_r * cos_t)) / denom
    return amp * (theta - int_cos - (b / w_r) * int_sin)


def _pop(theta, g, model):
    return _pop_ideal(theta) if model == "ideal" else _pop_damped(theta, g)


def _cum(theta, g, model):
    return _cum_ideal(theta) if model == "ideal" else _cum_damped(theta, g)


# --- public operations ---

def excited_population(params: RabiParams, tau):
    """Excited-state population P_e(tau) in [0, 1]; tau may be an array."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InvalidParam("tau must be >= 0")
    out = _pop(params.rabi_frequency * tau, params.damping_ratio,
               params.population_model)
    return float(out) if out.ndim == 0 else out


def waiting_time_density(params: RabiParams, tau):
    """Density w(tau) of the interval between consecutive emissions, 1/s."""
    if params.decay_rate <= 0:
        raise InvalidParam("waiting times undefined for gamma = 0")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InvalidParam("tau must be >= 0")
    g = params.damping_ratio
    theta = params.rabi_frequency * tau
    out = (params.decay_rate * _pop(theta, g, params.population_model)
           * np.exp(-g * _cum(theta, g, params.population_model)))
    return float(out) if out.ndim == 0 else out


def waiting_time_cdf(params: RabiParams, tau):
    """Closed-form CDF of the waiting time, 1 - exp(-gamma * int_0^tau P_e)."""
    if params.decay_rate <= 0:
        raise InvalidParam("waiting times undefined for gamma = 0")
    tau = np.asarray(tau, dtype=float)
    g = params.damping_ratio
    theta = params.rabi_frequency * tau
    out = 1.0 - np.exp(-g * _cum(theta, g, params.population_model))
    return float(out) if out.ndim == 0 else out


class WaitingTimeSampler:
    """Inverse-CDF sampler on a precomputed monotone table.

    The table holds the CDF at ``table_size`` theta nodes, log-spaced up to
    the point where the CDF exceeds 1 - 1e-9; a draw locates its cell by
    binary search and bisects the exact CDF inside the cell to relative
    tolerance 1e-9.  Exact-distribution sampling, no rejection step.
    """

    TAIL = 1e-9
    REL_TOL = 1e-9

    def __init__(self, params: RabiParams, table_size: int = 4096):
        if params.decay_rate <= 0:
            raise InvalidParam("sampling undefined for gamma = 0")
        self.params = params
        self._g = params.damping_ratio
        self._model = params.population_model
        theta_max = 8.0 * np.pi
        while self._cdf_theta(theta_max) < 1.0 - self.TAIL:
            theta_max *= 2.0
        self._theta_max = theta_max
        nodes = np.concatenate([[0.0], np.geomspace(1e-6, theta_max, table_size - 1)])
        self._nodes = nodes
        self._cdf_nodes = self._cdf_theta(nodes)

    def _cdf_theta(self, theta):
        return 1.0 - np.exp(-self._g * _cum(theta, self._g, self._model))

    def _cdf_theta_scalar(self, theta: float) -> float:
        # pure-float twin of _cdf_theta; keeps single draws cheap
        g = self._g
        if self._model == "ideal":
            cum = 0.5 * theta - 0.5 * math.sin(theta)
        else:
            amp = 1.0 / (2.0 + g * g)
            w_r = math.sqrt(1.0 - g * g / 16.0)
            b = 0.75 * g
            denom = b * b + w_r * w_r
            decay = math.exp(-b * theta)
            cos_t, sin_t = math.cos(w_r * theta), math.sin(w_r * theta)
            int_cos = (b - decay * (b * cos_t - w_r * sin_t)) / denom
            int_sin = (w_r - decay * (b * sin_t + w_r * cos_t)) / denom
            cum = amp * (theta - int_cos - (b / w_r) * int_sin)
        return 1.0 - math.exp(-g * cum)

    def sample_many(self, src: EntropySource, count: int) -> np.ndarray:
        """Draw ``count`` waiting times (seconds) from ``src``."""
        u = src.uniforms(count)
        idx = np.clip(np.searchsorted(self._cdf_nodes, u, side="right") - 1,
                      0, len(self._nodes) - 2)
        lo = self._nodes[idx].copy()
        hi = self._nodes[idx + 1].copy()
        hi[u > self._cdf_nodes[-1]] = 4.0 * self._theta_max
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self._cdf_theta(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= self.REL_TOL * np.maximum(lo, 1e-300)):
                break
        theta = 0.5 * (lo + hi)
        theta[u == 0.0] = 0.0  # CDF(0) = 0 boundary
        return theta / self.params.rabi_frequency

    def sample(self, src: EntropySource) -> float:
        u = src.next_uniform()
        if u == 0.0:
            return 0.0
        idx = int(np.searchsorted(self._cdf_nodes, u, side="right")) - 1
        idx = min(max(idx, 0), len(self._nodes) - 2)
        lo = float(self._nodes[idx])
        hi = float(self._nodes[idx + 1])
        if u > self._cdf_nodes[-1]:
            hi = 4.0 * self._theta_max
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self._cdf_theta_scalar(mid) < u:
                lo = mid
            else:
                hi = mid
            if hi - lo <= self.REL_TOL * max(lo, 1e-300):
                break
        return 0.5 * (lo + hi) / self.params.rabi_frequency


@functools.lru_cache(maxsize=16)
def _cached_sampler(params: RabiParams) -> WaitingTimeSampler:
    return WaitingTimeSampler(params)


def sample_waiting_time(params: RabiParams, src: EntropySource) -> float:
    """One waiting time distributed per ``waiting_time_density``."""
    return _cached_sampler(params).sample(src)


def simulate_trajectory(params: RabiParams, src: EntropySource) -> EmissionTrajectory:
    """One full emission record over [0, T].

    Waiting times accumulate into absolute emission times; each emission
    resets the population clock (the atom restarts from the ground state).
    The first sample whose absolute time exceeds T is discarded, which
    keeps the recorded intervals unbiased.
    """
    sampler = _cached_sampler(params)
    times = []
    clock = 0.0
    while True:
        clock += sampler.sample(src)
        if clock > params.duration:
            break
        times.append(clock)
    return EmissionTrajectory(tuple(times), params.duration)


def simulate_trajectories(params: RabiParams, src: EntropySource,
                          count: int) -> list:
    """``count`` consecutive trajectories drawn from one entropy stream."""
    return [simulate_trajectory(params, src) for _ in range(count)]


def intervals(trajectory: EmissionTrajectory) -> np.ndarray:
    """Inter-emission intervals, including the first interval from t = 0."""
    times = np.asarray(trajectory.emission_times, dtype=float)
    return np.diff(times, prepend=0.0)


def accumulate_histogram(trajectories, bin_edges) -> WaitingTimeHistogram:
    """Bin all inter-emission intervals of all trajectories.

    Bins are half-open [lo, hi); intervals outside the edges increment
    ``total`` but no bin.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidBins("bin edges must be strictly increasing")
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    total = 0
    for traj in trajectories:
        gaps = intervals(traj)
        total += gaps.size
        pos = np.searchsorted(edges, gaps, side="right") - 1
        in_range = (pos >= 0) & (pos < counts.size) & (gaps < edges[-1])
        np.add.at(counts, pos[in_range], 1)
    return WaitingTimeHistogram(tuple(edges.tolist()), tuple(counts.tolist()),
                                int(total))
