import numpy as np
import pytest

import weightlab as wl


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_function(grid, rng, sparsity=0.6, signed=False):
    vals = rng.lognormal(size=grid.ncells) * (rng.random(grid.ncells) < sparsity)
    if signed:
        vals = vals * rng.choice([-1.0, 1.0], size=grid.ncells)
    return wl.GridFunction(grid, vals)
