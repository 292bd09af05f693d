import numpy as np
import pytest

import trapscat as ts


@pytest.fixture(scope="session")
def params():
    return ts.DecayParams()  # omega=1, sigma=3/16 (lambda=1/4), r0=1


@pytest.fixture(scope="session")
def grid1():
    return ts.GridSpec(n=1, points=256, half_width=12.0)


@pytest.fixture(scope="session")
def grid2():
    return ts.GridSpec(n=2, points=256, half_width=12.0)


def random_packet(grid, rng, nterms=6, max_center=1.5, max_p=2.0,
                  width_range=(0.9, 1.5)):
    """Random smooth localized state: a superposition of Gaussian packets."""
    vals = np.zeros(grid.shape, dtype=np.complex128)
    for _ in range(nterms):
        w = rng.uniform(*width_range)
        c = rng.uniform(-max_center, max_center, grid.n)
        p = rng.uniform(-max_p, max_p, grid.n)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        g = ts.GaussianState.envelope(w, center=c, momentum=p, n=grid.n)
        vals += amp * ts.sample_to_grid(g, grid).values
    wf = ts.WaveFunction(grid, vals)
    wf.values /= wf.norm()
    return wf


def random_gaussian(rng, n=2, max_center=2.0, max_p=4.0):
    w = rng.uniform(0.6, 1.8)
    re = rng.uniform(-0.4, 0.4)
    g = ts.GaussianState(center=rng.uniform(-max_center, max_center, n),
                         momentum=rng.uniform(-max_p, max_p, n),
                         width_param=re + 1j / w ** 2, n=n)
    return g.normalized()


def l2_diff(a: ts.WaveFunction, b: ts.WaveFunction) -> float:
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.cell))
