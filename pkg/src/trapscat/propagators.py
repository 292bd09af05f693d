"""Exact quadratic propagators of the trap, as ordered factor plans.

Every closed-form propagator here is a short product of the elementary
unitaries (free flow, dilation, quadratic phase).  Plans are built once and
can be executed either on grid wavefunctions or on Gaussian states, which is
what pins all sign and phase conventions to a single code path.

Inside the plateau |t| < r0 the evolution is the stationary-trap step
    exp(-i dt H0) = [qphase -w tan(w dt)] [dilate ln cos(w dt)] [free tan(w dt)/w]
(rightmost factor first), valid away from cos(w dt) = 0; long steps are
bisected.  Outside the plateau the factorized comparison propagator is
    Ut(t) = [qphase lam/t] [dilate lam ln|t|] [free +-|t|^(1-2 lam)/(1-2 lam)]
and the true propagator between same-sign outer times is Ut(t) Ut(s)^*.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import grids
from .errors import DomainError
from .gaussian import GaussianState
from .model import DecayParams

# bisect plateau steps so each stays this far from the cos(w dt) = 0 poles
MEHLER_POLE_MARGIN = 0.2
# stricter substep cap: each step spreads packets transiently by a factor
# ~tan(w dt) through its free-flow leg before the rescaling pulls them back,
# so small steps keep the intermediate support on the grid
MEHLER_SUBSTEP_CAP = 0.45


@dataclass
class QuadStepPlan:
    """Ordered list of (kind, parameter) factors; first entry acts first."""

    factors: list = field(default_factory=list)
    label: str = ""

    def extend(self, other: "QuadStepPlan") -> "QuadStepPlan":
        self.factors.extend(other.factors)
        return self

    def adjoint(self) -> "QuadStepPlan":
        inv = []
        for kind, param in reversed(self.factors):
            inv.append((kind, -param if np.isscalar(param) else -np.asarray(param)))
        return QuadStepPlan(inv, label=f"adj({self.label})")

    def describe(self) -> list:
        return [f"{kind}({param})" for kind, param in self.factors]


def apply_plan(wf: grids.WaveFunction, plan: QuadStepPlan,
               boundary_tol: float | None = 1e-12) -> grids.WaveFunction:
    """Run a plan on a grid state, watching the periodic boundary."""
    if not plan.factors:
        return wf.copy()
    out = wf
    for kind, param in plan.factors:
        if kind == "free":
            out = grids.free_flow(out, param)
        elif kind == "dilate":
            out = grids.dilation(out, param)
        elif kind == "qphase":
            out = grids.quadratic_phase(out, param)
        elif kind == "linear":
            out = grids.linear_phase(out, param)
        elif kind == "translate":
            out = grids.translate(out, param)
        else:
            raise DomainError(f"unknown factor kind {kind!r}")
        if boundary_tol is not None and kind in ("free", "dilate", "translate"):
            grids.check_boundary(out, tol=boundary_tol, context=plan.label or kind)
    return out


def apply_plan_gaussian(g: GaussianState, plan: QuadStepPlan) -> GaussianState:
    for kind, param in plan.factors:
        g = g.apply_factor(kind, param)
    return g


# ---------------------------------------------------------------------------
# plateau (Mehler) evolution
# ---------------------------------------------------------------------------

def _mehler_substeps(delta: float, omega: float) -> list:
    """Split delta so each substep clears the poles and stays short."""
    if delta == 0.0:
        return []
    cap = min(math.pi / 2.0 - MEHLER_POLE_MARGIN, MEHLER_SUBSTEP_CAP)
    m = max(1, math.ceil(abs(omega * delta) / cap))
    return [delta / m] * m


def plan_mehler(t0: float, t1: float, params: DecayParams,
                enforce_plateau: bool = True) -> QuadStepPlan:
    """Plan for exp(-i (t1 - t0) H0), H0 = p^2/2 + omega^2 x^2/2."""
    r0, omega = params.r0, params.omega
    if enforce_plateau and (abs(t0) > r0 or abs(t1) > r0):
        raise DomainError(
            f"plateau evolution needs |t| <= r0 = {r0}, got [{t0}, {t1}]")
    plan = QuadStepPlan(label=f"mehler[{t0},{t1}]")
    for delta in _mehler_substeps(t1 - t0, omega):
        wd = omega * delta
        plan.factors.append(("free", math.tan(wd) / omega))
        plan.factors.append(("dilate", math.log(math.cos(wd))))
        plan.factors.append(("qphase", -omega * math.tan(wd)))
    return plan


def mehler_evolve(wf: grids.WaveFunction, t0: float, t1: float,
                  params: DecayParams, boundary_tol: float = 1e-12) -> grids.WaveFunction:
    return apply_plan(wf, plan_mehler(t0, t1, params), boundary_tol)


# ---------------------------------------------------------------------------
# factorized outer propagator
# ---------------------------------------------------------------------------

def plan_u0_tilde(t: float, params: DecayParams, adjoint: bool = False) -> QuadStepPlan:
    """Comparison propagator Ut(t); plateau form for |t| < r0, factorized outside.

    At |t| = r0 exactly, the factorized (outer) form applies, matching the
    |t| >= r0 branch of the stiffness; the jump against exp(-i r0 H0) is part
    of the model, not an artifact.
    """
    r0, lam = params.r0, params.lam
    if abs(t) < r0:
        plan = plan_mehler(0.0, t, params)
        plan.label = f"u0_tilde[{t}]"
        return plan.adjoint() if adjoint else plan
    if t >= r0:
        tau = t ** (1.0 - 2.0 * lam) / (1.0 - 2.0 * lam)
        theta = lam * math.log(t)
    else:
        tau = -((-t) ** (1.0 - 2.0 * lam)) / (1.0 - 2.0 * lam)
        theta = lam * math.log(-t)
    plan = QuadStepPlan(
        [("free", tau), ("dilate", theta), ("qphase", lam / t)],
        label=f"u0_tilde[{t}]")
    return plan.adjoint() if adjoint else plan


def u0_tilde(wf: grids.WaveFunction, t: float, params: DecayParams,
             adjoint: bool = False, boundary_tol: float = 1e-12) -> grids.WaveFunction:
    return apply_plan(wf, plan_u0_tilde(t, params, adjoint), boundary_tol)


# ---------------------------------------------------------------------------
# composite free propagator across regions
# ---------------------------------------------------------------------------

def plan_u0_compose(t0: float, t1: float, params: DecayParams) -> QuadStepPlan:
    """Plan for the full free propagator U0(t1, t0), splitting at +-r0."""
    if t1 == t0:
        return QuadStepPlan(label=f"u0[{t0},{t1}]")
    if t1 < t0:
        return plan_u0_compose(t1, t0, params).adjoint()
    r0 = params.r0
    cuts = sorted({t0, t1, *[c for c in (-r0, r0) if t0 < c < t1]})
    plan = QuadStepPlan(label=f"u0[{t0},{t1}]")
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= -r0 or a >= r0:
            plan.extend(plan_u0_tilde(a, params, adjoint=True))
            plan.extend(plan_u0_tilde(b, params))
        else:
            plan.extend(plan_mehler(a, b, params))
    plan.label = f"u0[{t0},{t1}]"
    return plan


def u0_compose(wf: grids.WaveFunction, t0: float, t1: float,
               params: DecayParams, boundary_tol: float = 1e-12) -> grids.WaveFunction:
    return apply_plan(wf, plan_u0_compose(t0, t1, params), boundary_tol)
