import numpy as np
import pytest

from multisine_wpt import RectennaParams, build_grid, frequency_response, generate_channel

FAST_BAND = (19e3, 21e3)
FAST_DELAY = 1.5e-3


@pytest.fixture
def params():
    return RectennaParams()


@pytest.fixture
def toy_grid():
    return build_grid(19e3, 21e3, 4)


def fast_response(seed, n_tones=16):
    grid = build_grid(*FAST_BAND, n_tones)
    return frequency_response(generate_channel(seed, 18, 51.67, FAST_DELAY), grid)


def full_response(seed, n_tones=16):
    grid = build_grid(910e6, 920e6, n_tones)
    return frequency_response(generate_channel(seed, 18, 51.67, 0.3e-6), grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sample_cosines(grid, q):
    """cos(w_n t_q) at t_q = q T / Q, from exact integer phase counts."""
    k = grid.first_index + np.arange(grid.n_tones)
    idx = np.arange(q)
    return np.cos(2 * np.pi * (np.multiply.outer(k, idx) % q) / q)


def objective_oracle(resp, p, q, amps):
    """Sampled aligned-phase objective for each row of ``amps`` (shape M x N)."""
    c = np.sqrt(2 * p.r_s) / (p.eta * p.v_0)
    cos = sample_cosines(resp.grid, q)
    weights = c * np.atleast_2d(amps) * resp.magnitudes
    out = np.empty(weights.shape[0])
    step = max(1, 2_000_000 // q)
    for a in range(0, weights.shape[0], step):
        out[a:a + step] = np.exp(weights[a:a + step] @ cos).mean(axis=1)
    return out


def brute_force_arc(resp, p, q, p_t, n_points):
    """Best sampled objective over the N = 2 power arc."""
    theta = np.linspace(0, np.pi / 2, n_points)
    amps = np.sqrt(p_t) * np.column_stack([np.cos(theta), np.sin(theta)])
    vals = objective_oracle(resp, p, q, amps)
    return float(vals.max()), amps[int(vals.argmax())]


def brute_force_cube(resp, p, q, p_t, n_side):
    """Best sampled objective over an n_side^3 amplitude grid masked to the N = 3 ball."""
    c = np.sqrt(2 * p.r_s) / (p.eta * p.v_0)
    cos = sample_cosines(resp.grid, q)
    a = np.linspace(0, np.sqrt(p_t), n_side)
    # the exponential factorises over tones
    e = [np.exp(c * np.outer(a, resp.magnitudes[n] * cos[n])) for n in range(3)]
    e12 = (e[0][:, None, :] * e[1][None, :, :]).reshape(-1, q)
    vals = (e12 @ e[2].T / q).reshape(n_side, n_side, n_side)
    r2 = a[:, None, None] ** 2 + a[None, :, None] ** 2 + a[None, None, :] ** 2
    vals[r2 > p_t * (1 + 1e-12)] = -np.inf
    i = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[i]), np.array([a[i[0]], a[i[1]], a[i[2]]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
