"""Pure-numpy implementations of the hot kernels.

The compiled extension (_kernels) mirrors these signatures; either backend
may be selected at import time.  All functions mutate their first argument.
"""
import numpy as np


def cis_mul(psi: np.ndarray, phase: np.ndarray, scale: float) -> None:
    """psi *= exp(1j * scale * phase), elementwise; phase is real."""
    psi *= np.exp((1j * scale) * phase)


def gauss2d_accum(out: np.ndarray, x0: np.ndarray, x1: np.ndarray,
                  c0: float, c1: float, amp: float, inv_w2: float) -> None:
    """out += amp * exp(-((x0-c0)^2 + (x1-c1)^2) * inv_w2) on the tensor grid.

    x0, x1 are the per-axis coordinate vectors; out has shape (len(x0), len(x1)).
    """
    e0 = np.exp(-((x0 - c0) ** 2) * inv_w2)
    e1 = np.exp(-((x1 - c1) ** 2) * inv_w2)
    out += amp * np.outer(e0, e1)
