"""Phase-space quasi-probability fields for number states and kitten states.

The quasi-probability W(x, p) of the m-particle number state is

    W_m(x, p) = ((-1)^m / pi) * exp(-(x^2 + p^2)) * L_m(2 * (x^2 + p^2))

with L_m the m-th Laguerre polynomial, evaluated here by the three-term
recurrence.  The kitten state (superposition of two coherent states a
complex shift ``delta_alpha`` apart) is evaluated term by term from its
closed complex-exponential form; the arguments (x, p) are the real and
imaginary parts of beta - alpha.  Below ``|delta_alpha| = 1e-6`` the
expression is numerically 0/0 and the coherent-state limit
``(2/pi) * exp(-2*|x+ip|^2)`` takes over.

Fields are sampled on square grids [-R, R]^2 whose radius is auto-sized to
contain a requested fraction (default 99%) of the total |W| mass --
absolute mass, since W may be negative.  Grids come in two schemes:
``regular`` (equidistant nodes) and ``gaussian-intervals``, where node
spacings are drawn from Normal(mu_g, mu_g/2) with mu_g the regular
spacing, redrawn while non-positive and rescaled so the last node lands
exactly on R.  Quadrature weights are trapezoidal cell areas, valid on
non-uniform axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import EntropySource
from .errors import (DegenerateField, EmptyField, InvalidParam,
                     NumericalInconsistency)

COHERENT_THRESHOLD = 1e-6   # |delta_alpha| below this takes the coherent limit
IMAG_RESIDUE_TOL = 1e-10
DEFAULT_COVERAGE = 0.99


@dataclass(frozen=True)
class FockState:
    """Number state with exactly ``m`` particles."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise InvalidParam("particle number m must be a non-negative integer")

    def label(self) -> str:
        return f"fock(m={self.m})"


@dataclass(frozen=True)
class CatState:
    """Superposition of two coherent states separated by ``delta_alpha``."""

    alpha: complex
    delta_alpha: complex

    def label(self) -> str:
        return f"cat(alpha={self.alpha}, dalpha={self.delta_alpha})"


def laguerre(m: int, x):
    """L_m(x) by the recurrence (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}."""
    if int(m) != m or m < 0:
        raise InvalidParam("Laguerre order must be a non-negative integer")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if m == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 - x
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return float(cur) if cur.ndim == 0 else cur


def wigner_fock(state: FockState, x, p):
    """W_m at (x, p); accepts scalars or broadcastable arrays."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = x * x + p * p
    out = ((-1.0) ** state.m / np.pi) * np.exp(-r2) * laguerre(state.m, 2.0 * r2)
    return float(out) if np.ndim(out) == 0 else out


def _coherent_limit(z):
    return (2.0 / np.pi) * np.exp(-2.0 * np.abs(z) ** 2)


def wigner_cat(state: CatState, x, p):
    """Kitten-state W at (x, p), with (x, p) the components of beta - alpha.

    Evaluated term by term with complex exponentials; the real part is
    returned and the imaginary residue is asserted below 1e-10 relative.
    For |delta_alpha| below the degeneracy threshold the coherent limit
    is returned instead (the closed form is 0/0 at delta_alpha = 0).
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    z = x + 1j * p
    d = complex(state.delta_alpha)
    if abs(d) < COHERENT_THRESHOLD:
        out = _coherent_limit(z)
        return float(out) if np.ndim(out) == 0 else out
    d2 = abs(d) ** 2
    prefactor = 2.0 / (np.pi * (1.0 - math.exp(-d2)))
    term_shift = np.exp(-2.0 * np.abs(z - d) ** 2)
    term_center = math.exp(-d2) * np.exp(-2.0 * np.abs(z) ** 2)
    cross = np.exp(2.0 * z * np.conj(d)) + np.exp(2.0 * np.conj(z) * d)
    w = prefactor * (term_shift + term_center - term_center * cross)
    residue = float(np.max(np.abs(w.imag))) if np.size(w) else 0.0
    scale = max(float(np.max(np.abs(w.real))) if np.size(w) else 0.0, 1.0 / np.pi)
    if residue > IMAG_RESIDUE_TOL * scale:
        raise NumericalInconsistency(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:.0e} relative")
    out = w.real
    return float(out) if np.ndim(out) == 0 else out


def evaluate_state(state, x, p):
    """Dispatch to the right evaluator for ``state``."""
    if isinstance(state, FockState):
        return wigner_fock(state, x, p)
    if isinstance(state, CatState):
        return wigner_cat(state, x, p)
    raise InvalidParam(f"unknown state type {type(state).__name__}")


# --- grids -----------------------------------------------------------------

def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    """Trapezoidal 1-D weights; their sum equals the axis span exactly.

    A single-node axis gets weight 1 (unit cell), the convention used by
    lattice-imported fields.
    """
    axis = np.asarray(axis, dtype=float)
    if axis.size == 1:
        return np.ones(1)
    w = np.empty_like(axis)
    w[0] = 0.5 * (axis[1] - axis[0])
    w[-1] = 0.5 * (axis[-1] - axis[-2])
    w[1:-1] = 0.5 * (axis[2:] - axis[:-2])
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Phase-space sampling nodes with per-node quadrature weights.

    ``scheme`` is "regular", "gaussian-intervals", or "lattice" (unit-cell
    weights for imported site data).  For the first two, the weights on
    each axis sum to the axis span; for "lattice" they sum to the number
    of cells (each site owns a unit cell).
    """

    axis_x: np.ndarray
    axis_p: np.ndarray
    scheme: str
    weights_x: np.ndarray = field(default=None)
    weights_p: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("axis_x", "axis_p"):
            ax = np.asarray(getattr(self, name), dtype=float)
            if ax.ndim != 1 or ax.size < 1 or np.any(np.diff(ax) <= 0):
                raise InvalidParam(f"{name} must be strictly increasing")
            object.__setattr__(self, name, ax)
        for wname, aname in (("weights_x", "axis_x"), ("weights_p", "axis_p")):
            w = getattr(self, wname)
            if w is None:
                w = (np.ones_like(getattr(self, aname))
                     if self.scheme == "lattice"
                     else trapezoid_weights(getattr(self, aname)))
            w = np.asarray(w, dtype=float)
            if np.any(w <= 0):
                raise InvalidParam("quadrature weights must be positive")
            object.__setattr__(self, wname, w)

    @property
    def shape(self):
        return (self.axis_x.size, self.axis_p.size)

    @property
    def n_nodes(self) -> int:
        return self.axis_x.size * self.axis_p.size

    @property
    def cell_weights(self) -> np.ndarray:
        return np.outer(self.weights_x, self.weights_p)

    @property
    def covered_area(self) -> float:
        return float(self.weights_x.sum() * self.weights_p.sum())

    def meshes(self):
        return np.meshgrid(self.axis_x, self.axis_p, indexing="ij")


@dataclass(frozen=True, eq=False)
class WignerField:
    """W values sampled on a grid; ``values[i, j] = W(axis_x[i], axis_p[j])``."""

    grid: Grid
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise InvalidParam("values shape must match the grid")
        if not np.all(np.isfinite(vals)):
            raise InvalidParam("field values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n_nodes(self) -> int:
        return self.grid.n_nodes


def _support_radius(state) -> float:
    """Conservative radius beyond which |W| mass is negligible."""
    if isinstance(state, FockState):
        return math.sqrt(2 * state.m + 1) + 6.0
    if isinstance(state, CatState):
        return abs(complex(state.delta_alpha)) + 6.0
    raise InvalidParam(f"unknown state type {type(state).__name__}")


def auto_radius(state, coverage: float = DEFAULT_COVERAGE,
                ref_points: int = 1201) -> float:
    """Smallest square half-side containing ``coverage`` of the |W| mass.

    Searched on a fine regular reference lattice: nodes sorted by their
    Chebyshev radius max(|x|, |p|), |W|-mass accumulated until the target
    fraction of the total is reached.
    """
    if not 0 < coverage < 1:
        raise InvalidParam("coverage must be in (0, 1)")
    r_max = _support_radius(state)
    axis = np.linspace(-r_max, r_max, ref_points)
    xg, pg = np.meshgrid(axis, axis, indexing="ij")
    mass = np.abs(evaluate_state(state, xg, pg))
    w1 = trapezoid_weights(axis)
    mass *= np.outer(w1, w1)
    cheb = np.maximum(np.abs(xg), np.abs(pg)).ravel()
    order = np.argsort(cheb, kind="stable")
    cum = np.cumsum(mass.ravel()[order])
    idx = int(np.searchsorted(cum, coverage * cum[-1]))
    return float(cheb[order][min(idx, cheb.size - 1)])


def _draw_normal(src: EntropySource, mu: float, sigma: float) -> float:
    # Box-Muller from two uniforms; 1-u keeps the log argument in (0, 1].
    u1, u2 = src.uniforms(2)
    return mu + sigma * math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)


def _gaussian_axis(radius: float, n: int, src: EntropySource) -> np.ndarray:
    mu = 2.0 * radius / (n - 1)
    sigma = 0.5 * mu
    lengths = np.empty(n - 1)
    for i in range(n - 1):
        draw = _draw_normal(src, mu, sigma)
        while draw <= 0.0:
            draw = _draw_normal(src, mu, sigma)
        lengths[i] = draw
    nodes = np.concatenate([[0.0], np.cumsum(lengths)])
    nodes *= 2.0 * radius / nodes[-1]  # rescale so the span is exact
    nodes -= radius
    nodes[0], nodes[-1] = -radius, radius
    return nodes


def build_grid(state, points_per_side: int, scheme: str = "regular",
               entropy: EntropySource | None = None,
               coverage: float = DEFAULT_COVERAGE) -> Grid:
    """Square grid auto-sized to hold ``coverage`` of the |W| mass.

    ``regular`` grids are equidistant; ``gaussian-intervals`` grids draw
    successive spacings from Normal(mu_g, mu_g/2), mu_g being the regular
    spacing, and need an entropy source (x axis drawn first, then p).
    Both schemes span the same [-R, R]^2 support.
    """
    if points_per_side < 2:
        raise InvalidParam("points_per_side must be >= 2")
    radius = auto_radius(state, coverage)
    if scheme == "regular":
        axis = np.linspace(-radius, radius, points_per_side)
        return Grid(axis, axis.copy(), "regular")
    if scheme == "gaussian-intervals":
        if entropy is None:
            raise InvalidParam("gaussian-intervals scheme needs an entropy source")
        ax = _gaussian_axis(radius, points_per_side, entropy)
        ap = _gaussian_axis(radius, points_per_side, entropy)
        return Grid(ax, ap, "gaussian-intervals")
    raise InvalidParam(f"unknown grid scheme {scheme!r}")


def evaluate_field(state, grid: Grid) -> WignerField:
    """Evaluate ``state`` at every grid node; pure and node-order independent."""
    xg, pg = grid.meshes()
    return WignerField(grid, evaluate_state(state, xg, pg), source=state.label())


# --- integrals, marginals, moments -----------------------------------------

def integrate(fld: WignerField) -> float:
    """Weighted sum of W over the grid."""
    return float(np.einsum("i,j,ij->", fld.grid.weights_x, fld.grid.weights_p,
                           fld.values))


def marginal(fld: WignerField, axis: str = "x"):
    """Integrate out one argument; returns (nodes, density)."""
    if axis == "x":
        return fld.grid.axis_x, fld.values @ fld.grid.weights_p
    if axis == "p":
        return fld.grid.axis_p, fld.grid.weights_x @ fld.values
    raise InvalidParam("axis must be 'x' or 'p'")


def moments_x(fld: WignerField):
    """Mean and standard deviation of x under the x marginal."""
    total = integrate(fld)
    if abs(total) < 1e-6:
        raise DegenerateField("field integral below 1e-6; moments undefined")
    nodes, density = marginal(fld, "x")
    wx = fld.grid.weights_x
    mean = float(np.sum(nodes * density * wx) / total)
    var = float(np.sum(nodes ** 2 * density * wx) / total - mean ** 2)
    return mean, math.sqrt(max(var, 0.0))


# --- file formats -----------------------------------------------------------

def write_field_csv(fld: WignerField, path) -> None:
    """Rows ``x,p,w`` in x-major node order, full float precision."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,p,w\n")
        for i, x in enumerate(fld.grid.axis_x.tolist()):
            for j, p in enumerate(fld.grid.axis_p.tolist()):
                fh.write(f"{x!r},{p!r},{float(fld.values[i, j])!r}\n")


def read_field_csv(path) -> WignerField:
    """Rebuild a field from ``x,p,w`` rows forming a complete lattice."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "x,p,w":
            raise InvalidParam(f"expected header 'x,p,w', got {header!r}")
        for line in fh:
            line = line.strip()
            if line:
                x, p, w = line.split(",")
                rows.append((float(x), float(p), float(w)))
    if not rows:
        raise EmptyField("field CSV holds no nodes")
    xs = np.unique([r[0] for r in rows])
    ps = np.unique([r[1] for r in rows])
    if xs.size * ps.size != len(rows):
        raise InvalidParam("field CSV rows do not form a complete lattice")
    values = np.empty((xs.size, ps.size))
    xi = {v: i for i, v in enumerate(xs)}
    pi = {v: i for i, v in enumerate(ps)}
    for x, p, w in rows:
        values[xi[x], pi[p]] = w
    scheme = "lattice" if (xs.size == 1 or ps.size == 1) else "imported"
    grid = Grid(xs, ps, scheme)
    return WignerField(grid, values, source="csv-import")


def write_field_pgm(fld: WignerField, path) -> None:
    """8-bit grayscale heatmap, min -> 0 and max -> 255, binary PGM (P5).

    Row-major image rows run from the highest p down (image top = max p);
    columns follow ascending x.
    """
    vals = fld.values
    lo, hi = float(vals.min()), float(vals.max())
    if hi > lo:
        scaled = np.rint((vals - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        scaled = np.zeros_like(vals, dtype=np.uint8)
    image = scaled.T[::-1, :]  # rows over p (descending), columns over x
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
