import numpy as np
import pytest

from abscatter.geometry import ObstacleSet, Torus


@pytest.fixture
def torus():
    return Torus([0.0, 0.0, 0.0], 1.0, 0.3)


@pytest.fixture
def K1(torus):
    return ObstacleSet((torus,), (), 3.0)


@pytest.fixture
def K2():
    t1 = Torus([0.0, 0.0, 0.0], 1.0, 0.3)
    t2 = Torus([3.5, 0.0, 0.0], 0.8, 0.2, [0.0, 1.0, 0.0])
    return ObstacleSet((t1, t2), (), 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def fd_jacobian(F, x, h):
    """Central-difference Jacobian ``J[n, i, k] = dF_i / dx_k``."""
    x = np.atleast_2d(x)
    J = np.zeros((len(x), 3, 3))
    for k in range(3):
        d = np.zeros(3)
        d[k] = h
        J[:, :, k] = (np.asarray(F(x + d)) - np.asarray(F(x - d))) / (2 * h)
    return J


def fd_curl(F, x, h):
    J = fd_jacobian(F, x, h)
    return np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=1)


def fd_div(F, x, h):
    J = fd_jacobian(F, x, h)
    return J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2]


def disc_crossing_sign(p_in, p_out, tor):
    """Signed crossings of the segment p_in -> p_out with the flat disc spanned by the core circle."""
    n = tor.axis
    f0 = (p_in - tor.center) @ n
    f1 = (p_out - tor.center) @ n
    if f0 == f1 or f0 * f1 > 0:
        return 0
    t = f0 / (f0 - f1)
    hit = p_in + t * (p_out - p_in)
    if np.linalg.norm(hit - tor.center) >= tor.major_radius:
        return 0
    return int(np.sign((p_out - p_in) @ n))


def random_unit(rng, n=None):
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
