import math

import numpy as np
import pytest

from ionmzi.hilbert import GROUND, M_MINUS, M_PLUS, PHOTON_SECTORS, BasisLabel, HybridState

R2 = 1 / math.sqrt(2)


SIGMA_PLUS_SECTORS = tuple(p for p in PHOTON_SECTORS if p is None or p.pol.value == "+")


def random_state(rng, n_ions, n_terms=6, photon=True, levels=(M_PLUS, M_MINUS, GROUND), sectors=PHOTON_SECTORS):
    """Normalized random state over unscattered ion labels."""
    sectors = sectors if photon else (None,)
    amps = {}
    for _ in range(n_terms):
        ions = tuple(levels[k] for k in rng.integers(len(levels), size=n_ions))
        lab = BasisLabel(ions, sectors[rng.integers(len(sectors))])
        amps[lab] = amps.get(lab, 0) + complex(rng.normal(), rng.normal())
    return HybridState(n_ions, amps).normalized()


def random_pair(rng, complex_phases=True):
    t = rng.uniform(0, math.pi / 2)
    x, y = math.cos(t), math.sin(t)
    if complex_phases:
        x *= np.exp(1j * rng.uniform(0, 2 * math.pi))
        y *= np.exp(1j * rng.uniform(0, 2 * math.pi))
    return complex(x), complex(y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
