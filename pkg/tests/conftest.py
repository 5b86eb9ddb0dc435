import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_state_array(rng, d):
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def complex_vectors(draw, min_d=2, max_d=8):
    d = draw(st.integers(min_d, max_d))
    parts = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
    re = draw(st.lists(parts, min_size=d, max_size=d))
    im = draw(st.lists(parts, min_size=d, max_size=d))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v[0] += 1.0
    return v


thetas = st.floats(1e-3, np.pi / 2, allow_nan=False)
