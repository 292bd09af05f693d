"""Model constants, potential library and classical mechanics of the trap.

The free Hamiltonian is p^2/2 + k(t) x^2/2 with a harmonic plateau k = omega^2
for |t| < r0 that decays like sigma/t^2 beyond the switching time.  Outside the
plateau the trap can no longer hold a particle, so wavepackets escape like
t^(1-lambda) and scattering makes sense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError


def lambda_from_sigma(sigma: float) -> float:
    """Decay exponent (1 - sqrt(1 - 4 sigma))/2 of the escaping trajectories.

    sigma = 0 is admitted as a degenerate diagnostic mode (free flight outside
    the plateau); the scattering model proper uses 0 < sigma < 1/4.
    """
    if not 0.0 <= sigma < 0.25:
        raise ParameterError(f"sigma must satisfy 0 <= sigma < 1/4, got {sigma}")
    return (1.0 - math.sqrt(1.0 - 4.0 * sigma)) / 2.0


@dataclass(frozen=True)
class DecayParams:
    """Trap constants: frequency omega, decay strength sigma, switching time r0."""

    omega: float = 1.0
    sigma: float = 3.0 / 16.0
    r0: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ParameterError(f"omega must be > 0, got {self.omega}")
        if self.r0 <= 0:
            raise ParameterError(f"r0 must be > 0, got {self.r0}")
        lambda_from_sigma(self.sigma)  # range check

    @property
    def lam(self) -> float:
        """Derived exponent, never stored independently of sigma."""
        return lambda_from_sigma(self.sigma)

    @property
    def short_range_rho(self) -> float:
        """Decay-rate threshold 1/(1-lambda): tails must fall faster than this."""
        return 1.0 / (1.0 - self.lam)


def k_coeff(t: float, params: DecayParams) -> float:
    """Stiffness k(t): omega^2 on |t| < r0, sigma/t^2 on |t| >= r0.

    The two branches need not match at |t| = r0; no continuity is assumed.
    """
    if abs(t) < params.r0:
        return params.omega ** 2
    return params.sigma / t ** 2


def classical_trajectory(t: float, c1: float, c2: float, params: DecayParams) -> float:
    """General solution c1 t^(1-lambda) + c2 t^lambda of the decayed-trap Newton equation."""
    if t < params.r0:
        raise DomainError(f"closed form requires t >= r0 = {params.r0}, got t = {t}")
    lam = params.lam
    return c1 * t ** (1.0 - lam) + c2 * t ** lam


@dataclass
class ClassicalState:
    """Point particle state (position, velocity, time); x and v may be vectors."""

    x: np.ndarray
    v: np.ndarray
    t: float

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))):
            raise ParameterError("classical state entries must be finite")


def integrate_newton(state0: ClassicalState, t1: float, dt: float,
                     params: DecayParams) -> ClassicalState:
    """Integrate xdd = -k(t) x from state0.t to t1 with classical RK4.

    dt is the nominal step; the actual step is shortened so the interval
    divides evenly and so that no step straddles the kinks at |t| = r0.
    """
    if dt <= 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    t0 = float(state0.t)
    if t1 == t0:
        return ClassicalState(state0.x.copy(), state0.v.copy(), t0)

    # split at the stiffness kinks so each panel sees a smooth k(t)
    kinks = [s * params.r0 for s in (-1.0, 1.0)]
    lo, hi = min(t0, t1), max(t0, t1)
    cuts = sorted({lo, hi, *[c for c in kinks if lo < c < hi]})
    panels = list(zip(cuts[:-1], cuts[1:]))
    if t1 < t0:
        panels = [(b, a) for a, b in reversed(panels)]

    x, v = state0.x.copy(), state0.v.copy()
    for a, b in panels:
        nsteps = max(1, int(math.ceil(abs(b - a) / dt)))
        h = (b - a) / nsteps
        t = a
        for _ in range(nsteps):
            k1x, k1v = v, -k_coeff(t, params) * x
            k2x = v + 0.5 * h * k1v
            k2v = -k_coeff(t + 0.5 * h, params) * (x + 0.5 * h * k1x)
            k3x = v + 0.5 * h * k2v
            k3v = -k_coeff(t + 0.5 * h, params) * (x + 0.5 * h * k2x)
            k4x = v + h * k3v
            k4v = -k_coeff(t + h, params) * (x + h * k3x)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += h
    return ClassicalState(x, v, float(t1))


# ---------------------------------------------------------------------------
# potential library
# ---------------------------------------------------------------------------

def _as_center(center, n: int | None) -> np.ndarray:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if n is not None and c.size != n:
        raise ParameterError(f"center has dimension {c.size}, expected {n}")
    return c


def _radial2(x: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Squared distance to `center`; x has shape (..., n)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and center.size == x.size:
        return np.sum((x - center) ** 2)
    return np.sum((x - center) ** 2, axis=-1)


@dataclass(frozen=True)
class GaussianBump:
    """a * exp(-|x - c|^2 / w^2): smooth, effectively compact, short range."""

    amplitude: float
    center: tuple = (0.0, 0.0)
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ParameterError(f"width must be > 0, got {self.width}")

    def evaluate(self, x, clamp=None):
        c = _as_center(self.center, None)
        return self.amplitude * np.exp(-_radial2(x, c) / self.width ** 2)

    def support_radius(self, cutoff: float = 1e-12) -> float:
        """Radius beyond which |V| < cutoff * |amplitude|."""
        return self.width * math.sqrt(max(0.0, -math.log(cutoff)))

    @property
    def feature_size(self) -> float:
        return 2.0 * math.sqrt(math.log(2.0)) * self.width  # FWHM

    compact = False  # exact support is all of space


@dataclass(frozen=True)
class SmoothCompactBump:
    """C-infinity bump a * exp(1 - 1/(1 - |x-c|^2/R^2)) inside |x-c| < R, 0 outside."""

    amplitude: float
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterError(f"radius must be > 0, got {self.radius}")

    def evaluate(self, x, clamp=None):
        c = _as_center(self.center, None)
        u = _radial2(x, c) / self.radius ** 2
        out = np.zeros_like(np.asarray(u, dtype=float))
        inside = u < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.exp(1.0 - 1.0 / (1.0 - np.where(inside, u, 0.0)))
        out = np.where(inside, self.amplitude * vals, 0.0)
        return out if out.ndim else float(out)

    def support_radius(self, cutoff: float = 1e-12) -> float:
        return self.radius

    @property
    def feature_size(self) -> float:
        return self.radius

    compact = True


@dataclass(frozen=True)
class PowerTail:
    """a * (1 + |x|^2)^(-rho/2): the polynomially decaying (non-compact) part."""

    amplitude: float
    rho: float = 2.0

    def __post_init__(self):
        if self.rho <= 0:
            raise ParameterError(f"rho must be > 0, got {self.rho}")

    def evaluate(self, x, clamp=None):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x ** 2) if x.ndim == 1 else np.sum(x ** 2, axis=-1)
        return self.amplitude * (1.0 + r2) ** (-self.rho / 2.0)

    def support_radius(self, cutoff: float = 1e-12) -> float:
        return max(1.0, cutoff ** (-1.0 / self.rho))

    @property
    def feature_size(self) -> float:
        return 1.0

    compact = False


@dataclass(frozen=True)
class TruncatedSingular:
    """a * |x - c|^(-alpha) on 0 < |x - c| < R, zero outside.

    Lives in L^q near the singular point iff alpha * q < n.  Evaluation clamps
    |V| at the passed bound (grid sampling cannot represent the singularity
    below one cell anyway); unclamped evaluation uses inf at the center.
    """

    amplitude: float
    center: tuple = (0.0, 0.0)
    alpha: float = 0.5
    radius: float = 1.0
    q: float = 2.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.radius <= 0:
            raise ParameterError(f"radius must be > 0, got {self.radius}")
        if self.q <= 0:
            raise ParameterError(f"q must be > 0, got {self.q}")

    def evaluate(self, x, clamp=None):
        c = _as_center(self.center, None)
        r2 = np.asarray(_radial2(x, c), dtype=float)
        with np.errstate(divide="ignore"):
            mag = abs(self.amplitude) * np.where(r2 > 0, r2 ** (-self.alpha / 2.0), np.inf)
        if clamp is not None:
            mag = np.minimum(mag, clamp)
        vals = math.copysign(1.0, self.amplitude) * mag
        out = np.where(r2 < self.radius ** 2, vals, 0.0)
        return out if out.ndim else float(out)

    def support_radius(self, cutoff: float = 1e-12) -> float:
        return self.radius

    @property
    def feature_size(self) -> float:
        return self.radius

    compact = True


Component = GaussianBump | SmoothCompactBump | PowerTail | TruncatedSingular


@dataclass
class PotentialSpec:
    """Composite perturbation V = sum of components (sum decomposition only)."""

    components: list = field(default_factory=list)

    def evaluate(self, x, clamp: float | None = None):
        """Pointwise V(x); x has shape (..., n) or (n,).

        `clamp` bounds |V| of singular components; pass 1/dx for grid work.
        """
        if not self.components:
            x = np.asarray(x)
            shape = x.shape[:-1] if x.ndim > 1 else ()
            return np.zeros(shape) if shape else 0.0
        total = None
        for comp in self.components:
            v = comp.evaluate(x, clamp=clamp)
            total = v if total is None else total + v
        return total

    def evaluate_on_grid(self, axes, shift=None, clamp=None):
        """Evaluate on the tensor grid given by per-axis coordinate arrays.

        `shift` displaces the evaluation points: V(u + shift).  Returns an
        array of shape (len(axes[0]), ..., len(axes[-1])).  The all-Gaussian
        2-D case runs through the fused accumulation kernel.
        """
        n = len(axes)
        shift = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
        if n == 2 and self.components and \
                all(isinstance(c, GaussianBump) for c in self.components):
            from .backend import gauss2d_accum
            out = np.zeros((len(axes[0]), len(axes[1])))
            for comp in self.components:
                c = _as_center(comp.center, 2) - shift
                gauss2d_accum(out, np.asarray(axes[0], float),
                              np.asarray(axes[1], float), float(c[0]),
                              float(c[1]), comp.amplitude, 1.0 / comp.width ** 2)
            return out
        mesh = np.meshgrid(*[ax + s for ax, s in zip(axes, shift)], indexing="ij")
        pts = np.stack(mesh, axis=-1)
        out = self.evaluate(pts, clamp=clamp)
        return np.asarray(out, dtype=float)

    @property
    def is_zero(self) -> bool:
        return all(comp.amplitude == 0 for comp in self.components) or not self.components

    def support_radius(self, cutoff: float = 1e-12) -> float:
        """Radius of a ball at the origin containing every inflated support."""
        r = 0.0
        for comp in self.components:
            center = np.asarray(getattr(comp, "center", (0.0,)), dtype=float)
            r = max(r, float(np.linalg.norm(center)) + comp.support_radius(cutoff))
        return r

    def feature_size(self) -> float:
        sizes = [comp.feature_size for comp in self.components if comp.amplitude != 0]
        return min(sizes) if sizes else math.inf


@dataclass(frozen=True)
class AdmissibilityCheck:
    clause: str
    target: str
    passed: bool
    detail: str


@dataclass
class AdmissibilityReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        return [f"[{'PASS' if c.passed else 'FAIL'}] {c.clause} ({c.target}): {c.detail}"
                for c in self.checks]


def check_admissibility(spec: PotentialSpec, params: DecayParams,
                        n: int = 2) -> AdmissibilityReport:
    """Check every short-range/singular-integrability clause per component.

    Bounded parts must decay faster than the threshold rho > 1/(1 - lambda)
    (strict); singular parts must be compactly supported with alpha*q < n and
    the exponent rule q = 2 for n <= 3, q > n/2 for n >= 4.
    """
    thr = params.short_range_rho
    checks = []
    if params.sigma == 0.0:
        checks.append(AdmissibilityCheck(
            "0 < sigma < 1/4", "decay params", True,
            "sigma = 0 diagnostic mode (outside the scattering model; allowed for regression runs)"))
    for i, comp in enumerate(spec.components):
        tag = f"component[{i}] {type(comp).__name__}"
        if isinstance(comp, PowerTail):
            ok = comp.rho > thr
            checks.append(AdmissibilityCheck(
                "rho > 1/(1-lambda)", tag, ok,
                f"rho = {comp.rho:g}, threshold = {thr:g} (strict)"))
        elif isinstance(comp, (GaussianBump, SmoothCompactBump)):
            checks.append(AdmissibilityCheck(
                "rho > 1/(1-lambda)", tag, True,
                "decays faster than any power; short range for every lambda"))
        elif isinstance(comp, TruncatedSingular):
            ok_aq = comp.alpha * comp.q < n
            checks.append(AdmissibilityCheck(
                "alpha*q < n (L^q near the singularity)", tag, ok_aq,
                f"alpha*q = {comp.alpha * comp.q:g}, n = {n}"))
            if n <= 3:
                ok_q = comp.q == 2
                detail = f"q = {comp.q:g}, rule requires q = 2 for n <= 3"
            else:
                ok_q = math.isfinite(comp.q) and comp.q > n / 2
                detail = f"q = {comp.q:g}, rule requires n/2 < q < inf for n >= 4"
            checks.append(AdmissibilityCheck("q exponent rule", tag, ok_q, detail))
            checks.append(AdmissibilityCheck(
                "singular part compactly supported", tag, True,
                f"truncated at radius {comp.radius:g}"))
        else:
            checks.append(AdmissibilityCheck(
                "known component type", tag, False, "unrecognised component"))
    return AdmissibilityReport(checks)
