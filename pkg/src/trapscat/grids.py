"""Uniform periodic grids, wavefunctions and the elementary unitaries.

Everything downstream is composed from five primitives: quadratic and linear
phase multiplication, spectral free flow, unitary rescaling (the dilation
generated by (p.x + x.p)/2) and translation.  The Fourier transform uses the
symmetric (2 pi)^(-n/2) normalization so that position- and momentum-space
inner products agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .backend import cis_mul
from .errors import DomainError, GridOverflowError, UsageError

POSITION = "position"
MOMENTUM = "momentum"


@dataclass(frozen=True)
class GridSpec:
    """n-dimensional uniform grid on [-L, L) per axis, 2L/points spacing."""

    n: int = 2
    points: int = 256
    half_width: float = 12.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"dimension must be >= 1, got {self.n}")
        if self.points < 8 or self.points % 2:
            raise DomainError(f"points must be even and >= 8, got {self.points}")
        if self.half_width <= 0:
            raise DomainError(f"half_width must be > 0, got {self.half_width}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def dp(self) -> float:
        return math.pi / self.half_width

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.n

    @property
    def momentum_max(self) -> float:
        return math.pi / self.dx

    def axis(self) -> np.ndarray:
        return _axis_coords(self)

    def momentum_axis(self) -> np.ndarray:
        return _axis_momenta(self)


@lru_cache(maxsize=32)
def _axis_coords(spec: GridSpec) -> np.ndarray:
    x = -spec.half_width + spec.dx * np.arange(spec.points)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=32)
def _axis_momenta(spec: GridSpec) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(spec.points, d=spec.dx)
    xi.flags.writeable = False
    return xi


@lru_cache(maxsize=32)
def _boundary_phase(spec: GridSpec) -> np.ndarray:
    """exp(i xi L) per axis: accounts for the grid starting at -L."""
    ph = np.exp(1j * _axis_momenta(spec) * spec.half_width)
    ph.flags.writeable = False
    return ph


def _axis_view(vec: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = vec.size
    return vec.reshape(shape)


@dataclass
class WaveFunction:
    """Complex samples on a GridSpec, tagged with the space they live in."""

    grid: GridSpec
    values: np.ndarray
    space: str = POSITION

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise UsageError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if self.space not in (POSITION, MOMENTUM):
            raise UsageError(f"unknown space tag {self.space!r}")

    @property
    def cell(self) -> float:
        return self.grid.dx ** self.grid.n if self.space == POSITION \
            else self.grid.dp ** self.grid.n

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.cell)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values.copy(), self.space)


def _require(wf: WaveFunction, space: str, op: str):
    if wf.space != space:
        raise UsageError(f"{op} requires a {space}-space state, got {wf.space}")


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """(a, b) = sum conj(a) b * cell: conjugate-linear in the first argument."""
    if a.grid != b.grid:
        raise UsageError("inner product requires matching grids")
    if a.space != b.space:
        raise UsageError("inner product requires matching space tags")
    return complex(np.vdot(a.values, b.values) * a.cell)


def fft_forward(wf: WaveFunction) -> WaveFunction:
    """Position -> momentum with the symmetric (2 pi)^(-n/2) normalization."""
    _require(wf, POSITION, "fft_forward")
    g = wf.grid
    out = np.fft.fftn(wf.values)
    out *= (g.dx / math.sqrt(2.0 * math.pi)) ** g.n
    ph = _boundary_phase(g)
    for ax in range(g.n):
        out *= _axis_view(ph, ax, g.n)
    return WaveFunction(g, out, MOMENTUM)


def fft_inverse(wf: WaveFunction) -> WaveFunction:
    """Momentum -> position, inverse of fft_forward."""
    _require(wf, MOMENTUM, "fft_inverse")
    g = wf.grid
    work = wf.values.copy()
    ph = np.conj(_boundary_phase(g))
    for ax in range(g.n):
        work *= _axis_view(ph, ax, g.n)
    out = np.fft.ifftn(work)
    out *= (math.sqrt(2.0 * math.pi) / g.dx) ** g.n
    return WaveFunction(g, out, POSITION)


def quadratic_phase(wf: WaveFunction, c: float) -> WaveFunction:
    """Multiply by exp(i c x^2 / 2); the phase factorizes across axes."""
    _require(wf, POSITION, "quadratic_phase")
    g = wf.grid
    out = wf.values.copy()
    if c != 0.0:
        axphase = np.exp((0.5j * c) * g.axis() ** 2)
        for ax in range(g.n):
            out *= _axis_view(axphase, ax, g.n)
    return WaveFunction(g, out, POSITION)


def linear_phase(wf: WaveFunction, v) -> WaveFunction:
    """Multiply by exp(i v . x): boosts the mean momentum by v."""
    _require(wf, POSITION, "linear_phase")
    g = wf.grid
    v = np.broadcast_to(np.asarray(v, dtype=float), (g.n,))
    out = wf.values.copy()
    for ax in range(g.n):
        if v[ax] != 0.0:
            out *= _axis_view(np.exp(1j * v[ax] * g.axis()), ax, g.n)
    return WaveFunction(g, out, POSITION)


def free_flow(wf: WaveFunction, tau: float) -> WaveFunction:
    """exp(-i tau p^2 / 2) applied spectrally; exact on band-limited data."""
    _require(wf, POSITION, "free_flow")
    g = wf.grid
    if tau == 0.0:
        return wf.copy()
    hat = fft_forward(wf)
    axphase = np.exp((-0.5j * tau) * g.momentum_axis() ** 2)
    for ax in range(g.n):
        hat.values *= _axis_view(axphase, ax, g.n)
    return fft_inverse(hat)


def translate(wf: WaveFunction, a) -> WaveFunction:
    """Shift: psi(x) -> psi(x - a), via the momentum phase exp(-i a . xi)."""
    _require(wf, POSITION, "translate")
    g = wf.grid
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.n,))
    if np.all(a == 0.0):
        return wf.copy()
    _check_shift_fits(wf, a)
    hat = fft_forward(wf)
    for ax in range(g.n):
        if a[ax] != 0.0:
            hat.values *= _axis_view(
                np.exp(-1j * a[ax] * g.momentum_axis()), ax, g.n)
    return fft_inverse(hat)


@lru_cache(maxsize=64)
def _bluestein_tables(N: int, s: float):
    """Chirp tables for X_k = sum_j h_j e^(i phi j k), phi = 2 pi s / N.

    The chirp angles phi j^2 / 2 grow like N^2 and must be reduced mod 2 pi in
    extended precision; computing them in float64 (as a generic chirp-z
    transform does) leaks ~N^2 eps of phase and spoils unitarity at the 1e-12
    level per application.
    """
    L = 1 << int(math.ceil(math.log2(2 * N - 1)))
    j = np.arange(N, dtype=np.int64)
    phi_half = np.longdouble(math.pi) * np.longdouble(s) / np.longdouble(N)
    ang = np.mod(phi_half * j.astype(np.longdouble) * j, 2 * np.longdouble(math.pi))
    chirp = (np.cos(ang) + 1j * np.sin(ang)).astype(np.complex128)
    vv = np.zeros(L, dtype=np.complex128)
    vv[:N] = np.conj(chirp)
    vv[L - N + 1:] = np.conj(chirp[1:][::-1])
    vhat = np.fft.fft(vv)
    chirp.flags.writeable = False
    vhat.flags.writeable = False
    return L, chirp, vhat


def _unit_czt(h: np.ndarray, s: float, axis: int) -> np.ndarray:
    """X_k = sum_j h_j e^(2 pi i s j k / N) along `axis` (Bluestein)."""
    N = h.shape[axis]
    L, chirp, vhat = _bluestein_tables(N, s)
    h = np.moveaxis(h, axis, -1)
    u = np.zeros(h.shape[:-1] + (L,), dtype=np.complex128)
    u[..., :N] = h * chirp
    conv = np.fft.ifft(np.fft.fft(u, axis=-1) * vhat, axis=-1)[..., :N]
    return np.moveaxis(conv * chirp, -1, axis)


def _resample_scaled(values: np.ndarray, s: float, grid: GridSpec) -> np.ndarray:
    """Evaluate the trigonometric interpolant of `values` at s * x_j, per axis.

    Exact band-limited rescaling via the chirp-z transform; the evaluation
    points wrap periodically if s * x leaves [-L, L).
    """
    N = grid.points
    L = grid.half_width
    out = np.ascontiguousarray(values, dtype=np.complex128)
    xik = _axis_momenta(grid)
    pre = np.exp(1j * xik * (1.0 - s) * L) / N
    post = np.exp(-1j * np.pi * s * np.arange(N))
    for ax in range(grid.n):
        work = np.fft.fft(out, axis=ax)
        work *= _axis_view(pre, ax, grid.n)
        work = np.fft.fftshift(work, axes=ax)
        work = _unit_czt(work, s, ax)
        work *= _axis_view(post, ax, grid.n)
        out = work
    return out


def dilation(wf: WaveFunction, theta: float) -> WaveFunction:
    """exp(-i theta A), A = (p.x + x.p)/2: psi(x) -> e^(-n theta/2) psi(e^-theta x).

    Unitary band-limited rescaling.  Positive theta stretches the packet in
    position space by e^theta (and shrinks its momentum content), matching the
    outward transport of the decaying trap.
    """
    _require(wf, POSITION, "dilation")
    if theta == 0.0:
        return wf.copy()
    g = wf.grid
    s = math.exp(-theta)
    _check_dilation_fits(wf, theta)
    out = _resample_scaled(wf.values, s, g)
    out *= math.exp(-0.5 * g.n * theta)
    return WaveFunction(g, out, POSITION)


# ---------------------------------------------------------------------------
# support monitors
# ---------------------------------------------------------------------------

def mass_outside_box(wf: WaveFunction, half_width: float) -> float:
    """Probability mass at points with any |x_d| > half_width."""
    _require(wf, POSITION, "mass_outside_box")
    g = wf.grid
    dens = np.abs(wf.values) ** 2
    outside = np.zeros(g.shape, dtype=bool)
    mask_ax = np.abs(g.axis()) > half_width
    for ax in range(g.n):
        outside |= _axis_view(mask_ax, ax, g.n)
    return float(np.sum(dens[outside]) * g.dx ** g.n)


def mass_near_boundary(wf: WaveFunction, cells: int = 8) -> float:
    """Mass within `cells` grid cells of the periodic boundary (either space)."""
    g = wf.grid
    dens = np.abs(wf.values) ** 2
    total = 0.0
    for ax in range(g.n):
        sl_lo = [slice(None)] * g.n
        sl_hi = [slice(None)] * g.n
        sl_lo[ax] = slice(0, cells)
        sl_hi[ax] = slice(g.points - cells, g.points)
        if wf.space == POSITION:
            total += float(np.sum(dens[tuple(sl_lo)]) + np.sum(dens[tuple(sl_hi)]))
        else:
            # in fft layout the extreme momenta sit in the middle of the array
            mid = g.points // 2
            sl_mid = [slice(None)] * g.n
            sl_mid[ax] = slice(mid - cells, mid + cells)
            total += float(np.sum(dens[tuple(sl_mid)]))
    return total * wf.cell


def check_boundary(wf: WaveFunction, tol: float = 1e-12, cells: int = 8,
                   context: str = "") -> None:
    """Abort rather than silently wrap: boundary-touching runs are invalid."""
    m = mass_near_boundary(wf, cells=cells)
    ref = wf.norm_sq()
    if ref > 0 and m > tol * ref:
        raise GridOverflowError(
            f"boundary mass {m:.3e} exceeds {tol:.1e} x norm^2"
            + (f" during {context}" if context else "")
            + "; enlarge half_width or shrink the run")


def _check_shift_fits(wf: WaveFunction, a: np.ndarray, tol: float = 1e-10):
    g = wf.grid
    margin = float(np.max(np.abs(a)))
    if margin >= 2 * g.half_width:
        raise GridOverflowError(
            f"shift {margin:g} exceeds the grid period",
            required_half_width=margin)
    m = mass_outside_box(wf, g.half_width - margin)
    if m > tol * max(wf.norm_sq(), 1e-300):
        raise GridOverflowError(
            f"translate by {margin:g} would wrap {m:.3e} of the mass",
            required_half_width=g.half_width + margin)


def _check_dilation_fits(wf: WaveFunction, theta: float, tol: float = 1e-10):
    g = wf.grid
    # contraction evaluates the interpolant outside [-L, L); expansion pushes
    # the output support outward.  Either way the packet must keep a factor
    # e^{|theta|} of headroom.
    safe = g.half_width * math.exp(-abs(theta))
    m = mass_outside_box(wf, safe)
    if m > tol * max(wf.norm_sq(), 1e-300):
        raise GridOverflowError(
            f"dilation theta={theta:g} needs content within |x| <= {safe:g} "
            f"but {m:.3e} of the mass lies outside",
            required_half_width=g.half_width * math.exp(abs(theta)))
