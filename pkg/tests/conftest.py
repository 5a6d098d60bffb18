import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lmgc.tensor_io import GeneratorSpec, synth_gradients

# Frozen corpus for the directional acceptance checks: layered scales,
# mild sparsity, and half-precision-like mantissas as mixed-precision
# training exports produce.
ACCEPTANCE_SPEC = GeneratorSpec(
    layer_sizes=(300_000, 400_000, 200_000, 100_000, 50_000),
    scale_per_layer=(3e-4, 1e-3, 3e-3, 1e-2, 1e-4),
    distribution="gaussian",
    sparsity_fraction=0.05,
    mantissa_bits=11,
)
ACCEPTANCE_SEED = 42


@pytest.fixture(scope="session")
def acceptance_blob():
    return synth_gradients(ACCEPTANCE_SPEC, ACCEPTANCE_SEED)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
