"""Exact closed-form transport of Gaussian packets through quadratic dynamics.

A packet is exp(i [a_w |x - xbar|^2 / 2 + pbar.(x - xbar) + gamma]) with a
complex isotropic width parameter a_w (Im a_w > 0) and a complex log-amplitude
gamma; e^(i gamma) carries both the global phase (Re gamma) and the
normalization (Im gamma).  Every quadratic unitary acts exactly: centers
follow the classical 2x2 map per axis, the width follows a Moebius update and
gamma follows the van Vleck amplitude with the principal branch, which is the
continuous branch for the elementary factors used here (single free flights,
rescalings, phase multiplications and bisected harmonic steps).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import grids
from .errors import CausticError, DomainError, GridOverflowError, ParameterError
from .model import DecayParams


@dataclass(frozen=True)
class SymplecticMap:
    """Per-axis linear map [[a, b], [c, d]] on (x, p), det = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or abs(det - 1.0) > 1e-9:
            raise ParameterError(f"map is not symplectic: det = {det!r}")

    @staticmethod
    def identity() -> "SymplecticMap":
        return SymplecticMap(1.0, 0.0, 0.0, 1.0)

    def compose(self, other: "SymplecticMap") -> "SymplecticMap":
        """self after other (matrix product self @ other)."""
        return SymplecticMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d)

    def inverse(self) -> "SymplecticMap":
        return SymplecticMap(self.d, -self.b, -self.c, self.a)

    def apply(self, x, p):
        return self.a * x + self.b * p, self.c * x + self.d * p

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c


def flow_harmonic(dt: float, omega: float) -> SymplecticMap:
    """Phase-space rotation of the harmonic plateau over a time step dt."""
    c, s = math.cos(omega * dt), math.sin(omega * dt)
    return SymplecticMap(c, s / omega, -omega * s, c)


def flow_free(tau: float) -> SymplecticMap:
    return SymplecticMap(1.0, tau, 0.0, 1.0)


def _fundamental(t: float, lam: float):
    """Fundamental matrix of xdd = -(sigma/t^2) x built from |t|^lam, |t|^(1-lam)."""
    m = abs(t)
    sgn = 1.0 if t > 0 else -1.0
    x1, dx1 = m ** lam, sgn * lam * m ** (lam - 1.0)
    x2, dx2 = m ** (1.0 - lam), sgn * (1.0 - lam) * m ** (-lam)
    return np.array([[x1, x2], [dx1, dx2]], dtype=float)


def flow_decay(t0: float, t1: float, params: DecayParams) -> SymplecticMap:
    """Exact flow of the decayed-trap Newton equation from t0 to t1.

    Both endpoints must sit on the same side of the plateau (t >= r0 or
    t <= -r0); callers split intervals at +-r0.
    """
    r0 = params.r0
    same_pos = t0 >= r0 and t1 >= r0
    same_neg = t0 <= -r0 and t1 <= -r0
    if not (same_pos or same_neg):
        raise DomainError(
            f"flow_decay needs t0, t1 >= r0 or <= -r0 (r0 = {r0}), got ({t0}, {t1})")
    lam = params.lam
    f1 = _fundamental(t1, lam)
    f0 = _fundamental(t0, lam)
    mat = f1 @ np.linalg.inv(f0)
    return SymplecticMap(*mat.ravel())


@dataclass(frozen=True)
class GaussianState:
    """Isotropic Gaussian packet in n dimensions (see module docstring)."""

    center: np.ndarray
    momentum: np.ndarray
    width_param: complex
    log_amp: complex = 0.0
    n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.broadcast_to(np.asarray(self.center, float), (self.n,)).copy())
        object.__setattr__(self, "momentum",
                           np.broadcast_to(np.asarray(self.momentum, float), (self.n,)).copy())
        if self.width_param.imag <= 0:
            raise ParameterError(
                f"Im(width_param) must be > 0 for normalizability, got {self.width_param}")

    @staticmethod
    def envelope(width: float, center=0.0, momentum=0.0, n: int = 2) -> "GaussianState":
        """Normalized packet (pi w^2)^(-n/4) exp(-|x-c|^2/(2 w^2)) exp(i p.(x-c))."""
        if width <= 0:
            raise ParameterError(f"width must be > 0, got {width}")
        g = GaussianState(center=np.broadcast_to(np.asarray(center, float), (n,)),
                          momentum=np.broadcast_to(np.asarray(momentum, float), (n,)),
                          width_param=1j / width ** 2, log_amp=0.0, n=n)
        return g.normalized()

    def norm_sq(self) -> float:
        im_a = self.width_param.imag
        return math.exp(-2.0 * self.log_amp.imag) * (math.pi / im_a) ** (self.n / 2.0)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def normalized(self) -> "GaussianState":
        im_gamma = (self.n / 4.0) * math.log(math.pi / self.width_param.imag)
        return replace(self, log_amp=complex(self.log_amp.real, im_gamma))

    def width(self) -> float:
        """Spatial scale w with |psi| ~ exp(-|x-c|^2/(2 w^2))."""
        return 1.0 / math.sqrt(self.width_param.imag)

    def radius(self, stds: float = 8.0) -> float:
        """Effective support radius: `stds` amplitude standard deviations."""
        return stds * self.width()

    def momentum_radius(self, stds: float = 8.0) -> float:
        """Effective momentum support radius around the mean momentum."""
        return stds * abs(self.width_param) / math.sqrt(self.width_param.imag)

    # -- exact elementary updates -----------------------------------------

    def apply_qphase(self, c: float) -> "GaussianState":
        """exp(i c x^2 / 2) psi."""
        xbar = self.center
        return replace(
            self,
            width_param=self.width_param + c,
            momentum=self.momentum + c * xbar,
            log_amp=self.log_amp + 0.5 * c * float(xbar @ xbar))

    def apply_linear(self, v) -> "GaussianState":
        """exp(i v . x) psi."""
        v = np.broadcast_to(np.asarray(v, float), (self.n,))
        return replace(self, momentum=self.momentum + v,
                       log_amp=self.log_amp + float(v @ self.center))

    def apply_translate(self, a) -> "GaussianState":
        a = np.broadcast_to(np.asarray(a, float), (self.n,))
        return replace(self, center=self.center + a)

    def apply_dilation(self, theta: float) -> "GaussianState":
        """exp(-i theta A) psi = e^(-n theta/2) psi(e^-theta x)."""
        s = math.exp(-theta)
        return replace(
            self,
            center=self.center / s,
            momentum=self.momentum * s,
            width_param=self.width_param * s * s,
            log_amp=self.log_amp + 1j * (self.n * theta / 2.0))

    def apply_free(self, tau: float) -> "GaussianState":
        """exp(-i tau p^2 / 2) psi, principal branch (continuous for any tau)."""
        if tau == 0.0:
            return self
        a = self.width_param
        den = 1.0 + tau * a
        gamma = self.log_amp + 0.5 * tau * float(self.momentum @ self.momentum) \
            + 0.5j * self.n * cmath.log(den)
        return replace(
            self,
            center=self.center + tau * self.momentum,
            width_param=a / den,
            log_amp=gamma)

    def apply_map(self, m: SymplecticMap) -> "GaussianState":
        """General metaplectic action; principal branch, caustic guarded."""
        a, b, c, d = m.a, m.b, m.c, m.d
        alpha = self.width_param
        if abs(b) < 1e-14:
            if a <= 0:
                raise CausticError(
                    f"map with b = 0, a = {a:g} <= 0 needs splitting")
            # x' = a x, p' = c x + p / a: rescale then quadratic phase
            return self.apply_dilation(math.log(a)).apply_qphase(c / a)
        den = a + b * alpha
        if abs(den) < 1e-8:
            raise CausticError(
                f"|a + b a_w| = {abs(den):.2e} < 1e-8: bisect the interval")
        xbar, pbar = self.center, self.momentum
        new_x = a * xbar + b * pbar
        new_p = c * xbar + d * pbar
        new_alpha = (c + d * alpha) / den
        # evaluate the transformed exponent at the new center to get gamma
        P = den / (2.0 * b)
        Q = -new_x / b + pbar - alpha * xbar
        R = (d / (2.0 * b)) * float(new_x @ new_x) + 0.5 * alpha * float(xbar @ xbar) \
            - float(pbar @ xbar) + self.log_amp
        gamma = R - complex(Q @ Q) / (4.0 * P) + 0.5j * self.n * cmath.log(den)
        if new_alpha.imag <= 0:
            raise CausticError("width parameter left the upper half plane")
        return replace(self, center=new_x, momentum=new_p,
                       width_param=new_alpha, log_amp=gamma)

    def apply_factor(self, kind: str, param) -> "GaussianState":
        """Dispatch used by the shared propagator plans."""
        if kind == "free":
            return self.apply_free(param)
        if kind == "dilate":
            return self.apply_dilation(param)
        if kind == "qphase":
            return self.apply_qphase(param)
        if kind == "linear":
            return self.apply_linear(param)
        if kind == "translate":
            return self.apply_translate(param)
        raise ParameterError(f"unknown factor kind {kind!r}")

    # -- sampling ----------------------------------------------------------

    def values_at(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., n)."""
        u = points - self.center
        r2 = np.sum(u * u, axis=-1)
        phase = 0.5 * self.width_param * r2 + u @ self.momentum + self.log_amp
        return np.exp(1j * phase)


def gaussian_apply(m: SymplecticMap, g: GaussianState) -> GaussianState:
    return g.apply_map(m)


def sample_to_grid(g: GaussianState, grid: grids.GridSpec,
                   fit_widths: float = 6.0) -> grids.WaveFunction:
    """Pointwise evaluation on the grid; requires the packet to fit."""
    if g.n != grid.n:
        raise DomainError(f"state dimension {g.n} != grid dimension {grid.n}")
    w = g.width()
    needed = float(np.max(np.abs(g.center))) + fit_widths * w
    if needed > grid.half_width:
        raise GridOverflowError(
            f"packet needs half_width >= {needed:g}, grid has {grid.half_width:g}",
            required_half_width=needed)
    if abs(g.momentum_radius()) > grid.momentum_max:
        raise GridOverflowError(
            f"packet momentum content {g.momentum_radius():g} exceeds the "
            f"grid Nyquist momentum {grid.momentum_max:g}")
    ax = grid.axis()
    # separable evaluation: exp(i[a r^2/2 + p.u + gamma]) factorizes per axis
    out = None
    for d in range(grid.n):
        u = ax - g.center[d]
        f = np.exp(1j * (0.5 * g.width_param * u * u + g.momentum[d] * u))
        out = f if out is None else np.multiply.outer(out, f)
    out = out * np.exp(1j * g.log_amp)
    return grids.WaveFunction(grid, out.reshape(grid.shape), grids.POSITION)


def overlap(g1: GaussianState, g2: GaussianState) -> complex:
    """Closed-form (g1, g2) = integral conj(g1) g2, conjugate-linear in g1."""
    if g1.n != g2.n:
        raise DomainError("overlap requires equal dimensions")
    A = g2.width_param - np.conj(g1.width_param)  # Im > 0
    out = 1.0 + 0.0j
    for d in range(g1.n):
        a1, x1, p1 = np.conj(g1.width_param), g1.center[d], g1.momentum[d]
        a2, x2, p2 = g2.width_param, g2.center[d], g2.momentum[d]
        # quadratic exponents i[a (x-xb)^2/2 + p(x-xb)] per axis
        A2 = 0.5j * (a2 - a1)
        B = 1j * ((p2 - a2 * x2) - (p1 - a1 * x1))
        C = 1j * ((0.5 * a2 * x2 * x2 - p2 * x2) - (0.5 * a1 * x1 * x1 - p1 * x1))
        out *= cmath.sqrt(math.pi / complex(-A2)) * cmath.exp(C - B * B / (4.0 * A2))
    return out * cmath.exp(1j * (g2.log_amp - np.conj(g1.log_amp)))
