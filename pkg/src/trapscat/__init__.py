"""trapscat: scattering off potentials in a time-decaying harmonic trap.

Forward machinery: exact quadratic propagators of the trap (plateau steps and
the factorized outer comparison evolution), Strang-split interacting
evolution, boosted Gaussian probes and their truncated scattering elements.
Inverse machinery: the high-velocity limit turns elements into smeared X-ray
data over (direction, offset), inverted by filtered backprojection.
"""
from .backend import BACKEND
from .errors import (CausticError, ConfigError, DomainError,
                     GridOverflowError, ParameterError, ScanHoleError,
                     TrapscatError, UsageError)
from .model import (ClassicalState, DecayParams, GaussianBump, PotentialSpec,
                    PowerTail, SmoothCompactBump, TruncatedSingular,
                    check_admissibility, classical_trajectory, integrate_newton,
                    k_coeff, lambda_from_sigma)
from .grids import (GridSpec, WaveFunction, dilation, fft_forward, fft_inverse,
                    free_flow, inner_product, linear_phase, quadratic_phase,
                    translate)
from .gaussian import (GaussianState, SymplecticMap, flow_decay, flow_free,
                       flow_harmonic, gaussian_apply, overlap, sample_to_grid)
from .propagators import (QuadStepPlan, apply_plan, apply_plan_gaussian,
                          mehler_evolve, plan_mehler, plan_u0_compose,
                          plan_u0_tilde, u0_compose, u0_tilde)
from .evolve import (EvolveConfig, WindowResult, dt_for_speed, evolve,
                     evolve_window_comoving, interaction_window, strang_step)
from .scattering import (ElementResult, ProbeSpec, ScanConfig, Sinogram,
                         build_probe, dressed_states, highv_extrapolate,
                         s_tilde_element, sinogram_scan)
from .recon import (ReconResult, compare_potentials, deconvolve_smear,
                    fbp_invert, sinogram_reference, sinogram_rms,
                    xray_reference)
from .config import RunConfig, load_config, parse_config, validate_run

__version__ = "0.1.0"
