"""Site-factorized mean-field solver for lattice bosons in a trap.

Bosons on a 1D chain or 2D rectangular lattice hop with amplitude t,
repel pairwise on site with strength U, and fill according to a chemical
potential mu, locally reduced by a harmonic trap:
mu_i = mu - V * r_i^2 with r_i the Euclidean distance (in site units)
from the lattice center.  The variational state is a product of per-site
occupation amplitudes f_i(n), n = 0..n_max; site i couples to its
neighbors only through the order-parameter sum

    Phi_i = sum_{j in neighbors(i)} phi_j,    phi_j = <b>_j .

Self-consistency iterates red/black half-sweeps (the lattice is
bipartite, so all sites of one color update independently); each site is
set to the ground eigenvector of its local Hamiltonian

    h_i = -t * (Phi_i b^dag + conj(Phi_i) b) + (U/2) n(n-1) - mu_i n

with open (hard-wall) boundaries.  Updating a site to its local ground
state can only lower the total variational energy, so the iteration's
energy is non-increasing until the fixed point.

When hopping dominates the solution develops phase coherence (phi != 0)
and density fluctuations; when interactions dominate, sites lock to
integer filling with phi = 0 and vanishing number fluctuation.  A trap
interpolates spatially, producing concentric integer-filling plateaus
separated by thin coherent rings.  Because phi = 0 is always a fixed
point, a tiny symmetry-breaking admixture (order 1e-6) is injected into
number-state initializations and re-injected at every sweep point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .entropy import EntropySource
from .errors import InvalidParam, NoConvergence
from .wigner import Grid, WignerField

DEFAULT_N_MAX = 8
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
SYMMETRY_SEED = 1e-6
TOP_WEIGHT_WARN = 1e-8


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry and energies; ``dims`` is (L,) or (Lx, Ly)."""

    dims: tuple
    hopping: float
    interaction: float
    chemical_potential: float
    trap_curvature: float = 0.0
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) not in (1, 2) or any(d < 2 for d in dims):
            raise InvalidParam("dims must be (L,) or (Lx, Ly) with sides >= 2")
        if self.interaction <= 0:
            raise InvalidParam("interaction U must be > 0")
        if self.hopping < 0:
            raise InvalidParam("hopping t must be >= 0")
        if self.trap_curvature < 0:
            raise InvalidParam("trap curvature must be >= 0")
        if self.n_max < 3:
            raise InvalidParam("occupation cutoff n_max must be >= 3")

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    def site_radii_sq(self) -> np.ndarray:
        """Squared Euclidean distance of every site from the lattice center."""
        axes = [np.arange(d) - (d - 1) / 2.0 for d in self.dims]
        if len(axes) == 1:
            return axes[0] ** 2
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return gx ** 2 + gy ** 2

    def site_potentials(self) -> np.ndarray:
        """Local chemical potential mu_i, shaped like the lattice."""
        return self.chemical_potential - self.trap_curvature * self.site_radii_sq()

    def scaled(self, t_over_u: float, mu_over_u: float) -> "LatticeSpec":
        """Same lattice with hopping and chemical potential reset in U units."""
        return LatticeSpec(self.dims, t_over_u * self.interaction,
                           self.interaction, mu_over_u * self.interaction,
                           self.trap_curvature, self.n_max)


@dataclass(eq=False)
class GutzwillerState:
    """Per-site amplitude vectors f_i(n), unit-norm, shape (n_sites, n_max+1)."""

    spec: LatticeSpec
    amplitudes: np.ndarray

    @property
    def order_parameters(self) -> np.ndarray:
        """phi_i = <b>_i = sum_n sqrt(n+1) conj(f_i(n)) f_i(n+1), per site."""
        f = self.amplitudes
        root = np.sqrt(np.arange(1, f.shape[1]))
        return np.einsum("sn,sn->s", np.conj(f[:, :-1]), f[:, 1:] * root)

    @property
    def mean_occupation(self) -> np.ndarray:
        levels = np.arange(self.amplitudes.shape[1])
        return np.einsum("sn,n->s", np.abs(self.amplitudes) ** 2, levels).real

    @property
    def occupation_std(self) -> np.ndarray:
        levels = np.arange(self.amplitudes.shape[1], dtype=float)
        second = np.einsum("sn,n->s", np.abs(self.amplitudes) ** 2, levels ** 2).real
        return np.sqrt(np.maximum(second - self.mean_occupation ** 2, 0.0))

    def norm_drift(self) -> float:
        return float(np.max(np.abs(
            np.sum(np.abs(self.amplitudes) ** 2, axis=1) - 1.0)))


@dataclass(frozen=True, eq=False)
class LatticeSnapshot:
    """Mean and standard deviation of the site occupations at one sweep point."""

    dims: tuple
    mean_n: np.ndarray
    std_n: np.ndarray
    params: tuple      # (t/U, mu/U, V/U)
    total_atoms: float


def _neighbor_sum(values: np.ndarray, dims) -> np.ndarray:
    """Sum of nearest-neighbor values, open boundaries; flat in, flat out."""
    grid = values.reshape(dims)
    out = np.zeros_like(grid)
    out[1:] += grid[:-1]
    out[:-1] += grid[1:]
    if len(dims) == 2:
        out[:, 1:] += grid[:, :-1]
        out[:, :-1] += grid[:, 1:]
    return out.ravel()


def _color_masks(dims):
    axes = [np.arange(d) for d in dims]
    if len(dims) == 1:
        parity = axes[0] % 2
    else:
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        parity = (gx + gy) % 2
    parity = parity.ravel()
    return np.flatnonzero(parity == 0), np.flatnonzero(parity == 1)


def _fock_floor(mu_over_u: np.ndarray, n_max: int) -> np.ndarray:
    """Decoupled (t = 0) ground occupation: minimizes U/2 n(n-1) - mu n."""
    n0 = np.where(mu_over_u < 0, 0, np.floor(mu_over_u) + 1).astype(int)
    return np.clip(n0, 0, n_max)


def _initial_amplitudes(spec: LatticeSpec, init) -> np.ndarray:
    dim = spec.n_max + 1
    n_sites = spec.n_sites
    if init == "uniform-fock" or (isinstance(init, tuple) and init[0] == "uniform-fock"):
        if isinstance(init, tuple):
            n0 = np.full(n_sites, int(np.clip(init[1], 0, spec.n_max)))
        else:
            mu_over_u = (spec.site_potentials() / spec.interaction).ravel()
            n0 = _fock_floor(mu_over_u, spec.n_max)
        f = np.zeros((n_sites, dim), dtype=complex)
        f[np.arange(n_sites), n0] = 1.0
        f = _with_symmetry_seed(f, spec.n_max)
    elif isinstance(init, tuple) and init[0] == "random":
        src = EntropySource.from_seed(int(init[1]))
        flat = src.uniforms(2 * n_sites * dim) - 0.5
        f = (flat[:n_sites * dim] + 1j * flat[n_sites * dim:]).reshape(n_sites, dim)
        f /= np.linalg.norm(f, axis=1, keepdims=True)
    else:
        raise InvalidParam(
            "init must be 'uniform-fock', ('uniform-fock', n), or ('random', seed)")
    return f


def _with_symmetry_seed(amplitudes: np.ndarray, n_max: int) -> np.ndarray:
    """Admix a neighboring occupation level so phi starts at ~1e-6, not 0."""
    f = amplitudes.copy()
    top = np.argmax(np.abs(f), axis=1)
    partner = np.where(top < n_max, top + 1, top - 1)
    f[np.arange(f.shape[0]), partner] += SYMMETRY_SEED
    return f / np.linalg.norm(f, axis=1, keepdims=True)


def _run_sweeps(state: GutzwillerState, tol: float, max_iter: int) -> GutzwillerState:
    """Red/black self-consistency loop shared by cold and warm starts."""
    spec = state.spec
    dim = spec.n_max + 1
    levels = np.arange(dim)
    lower = np.zeros((dim, dim))
    lower[levels[:-1], levels[1:]] = np.sqrt(levels[1:])   # <n-1| b |n> = sqrt(n)
    raise_op = lower.T.copy()
    mu_site = spec.site_potentials().ravel()
    onsite = 0.5 * spec.interaction * levels * (levels - 1) - np.outer(mu_site, levels)
    reds, blacks = _color_masks(spec.dims)
    root = np.sqrt(levels[1:])

    f = state.amplitudes
    phi = state.order_parameters
    prev_phi, prev_n = phi.copy(), state.mean_occupation
    res_phi = res_n = np.inf
    for _ in range(max_iter):
        for group in (reds, blacks):
            coupling = _neighbor_sum(phi, spec.dims)[group]
            local = np.zeros((group.size, dim, dim), dtype=complex)
            local[:, levels, levels] = onsite[group]
            local += (-spec.hopping) * (coupling[:, None, None] * raise_op
                                        + np.conj(coupling)[:, None, None] * lower)
            _, vecs = np.linalg.eigh(local)
            f[group] = vecs[:, :, 0]
            phi = np.einsum("sn,sn->s", np.conj(f[:, :-1]), f[:, 1:] * root)
        mean_n = np.einsum("sn,n->s", np.abs(f) ** 2, levels).real
        res_phi = float(np.max(np.abs(phi - prev_phi)))
        res_n = float(np.max(np.abs(mean_n - prev_n)))
        prev_phi, prev_n = phi.copy(), mean_n
        if res_phi < tol and res_n < tol:
            top_weight = float(np.max(np.abs(f[:, -1]) ** 2))
            if top_weight > TOP_WEIGHT_WARN:
                warnings.warn(
                    f"occupation cutoff weight {top_weight:.2e} at "
                    f"n_max={spec.n_max}; consider raising n_max", stacklevel=3)
            return state
    raise NoConvergence(
        f"no fixed point after {max_iter} sweeps "
        f"(residual phi {res_phi:.2e}, mean_n {res_n:.2e})",
        state=state, residual_phi=res_phi, residual_n=res_n, iterations=max_iter)


def solve_gutzwiller(spec: LatticeSpec, init="uniform-fock",
                     tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER) -> GutzwillerState:
    """Self-consistent mean-field ground state of the lattice.

    ``init`` selects the starting point: ``"uniform-fock"`` (per-site
    decoupled ground occupation, the default), ``("uniform-fock", n)``, or
    ``("random", seed)``.  Converged when neither the order parameter nor
    the mean occupation of any site moved by more than ``tol`` over one
    full sweep.  Raises :class:`NoConvergence` (carrying the last iterate
    and residuals as diagnostics) after ``max_iter`` sweeps.
    """
    if tol <= 0:
        raise InvalidParam("tol must be > 0")
    return _run_sweeps(GutzwillerState(spec, _initial_amplitudes(spec, init)),
                       tol, max_iter)


def total_energy(state: GutzwillerState) -> float:
    """Variational energy of the product state (each bond counted once)."""
    spec = state.spec
    levels = np.arange(spec.n_max + 1)
    mu_site = spec.site_potentials().ravel()
    prob = np.abs(state.amplitudes) ** 2
    onsite = (0.5 * spec.interaction * np.sum(prob * (levels * (levels - 1)), axis=1)
              - mu_site * (prob @ levels))
    phi = state.order_parameters
    hop = -spec.hopping * np.sum(np.real(np.conj(phi) * _neighbor_sum(phi, spec.dims)))
    return float(np.sum(onsite) + hop)


def occupation_stats(state: GutzwillerState) -> LatticeSnapshot:
    """Per-site mean occupation and standard deviation as a snapshot."""
    spec = state.spec
    mean = state.mean_occupation.reshape(spec.dims)
    std = state.occupation_std.reshape(spec.dims)
    u = spec.interaction
    params = (spec.hopping / u, spec.chemical_potential / u,
              spec.trap_curvature / u)
    return LatticeSnapshot(spec.dims, mean, std, params, float(mean.sum()))


def sweep(spec: LatticeSpec, schedule, init="uniform-fock",
          tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> list:
    """Solve a (t/U, mu/U) schedule sequentially with warm starts.

    Each point starts from the previous solution (with the symmetry seed
    re-injected, since a converged phi = 0 state is a fixed point at any
    hopping); emits one snapshot per point.  A convergence failure is
    re-raised with the failing ``schedule_index`` attached.
    """
    schedule = list(schedule)
    if not schedule:
        raise InvalidParam("schedule must be non-empty")
    snapshots = []
    carry = None
    for index, (t_over_u, mu_over_u) in enumerate(schedule):
        point = spec.scaled(t_over_u, mu_over_u)
        try:
            if carry is None:
                state = solve_gutzwiller(point, init, tol, max_iter)
            else:
                warm = GutzwillerState(point, _with_symmetry_seed(carry, point.n_max))
                state = _run_sweeps(warm, tol, max_iter)
        except NoConvergence as err:
            err.schedule_index = index
            raise
        carry = state.amplitudes.copy()
        snapshots.append(occupation_stats(state))
    return snapshots


def snapshot_to_field(snap: LatticeSnapshot, channel: str = "mean") -> WignerField:
    """Re-label site indices as grid coordinates, occupations as field values.

    Enables every mapping method on lattice data.  Values are *not*
    normalized -- occupations are not quasi-probabilities.  1D snapshots
    map to a 1 x L grid (single p node); weights are unit cells.
    """
    if channel == "mean":
        values = snap.mean_n
    elif channel == "std":
        values = snap.std_n
    else:
        raise InvalidParam("channel must be 'mean' or 'std'")
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    axis_x = np.arange(values.shape[0], dtype=float)
    axis_p = np.arange(values.shape[1], dtype=float)
    grid = Grid(axis_x, axis_p, "lattice")
    return WignerField(grid, values, source=f"lattice-import({channel})")
