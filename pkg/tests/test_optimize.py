import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisine_wpt import (ChannelResponse, MultisineWaveform, QuadratureSpec,
                           build_grid, harvested_power, rectifier_rhs)
from multisine_wpt.optimize import (METHODS, ScpConfig, align_phases, design, equal_power,
                                    frequency_mrt, qclp_step, scp_coefficients, scp_qclp,
                                    single_tone)

from conftest import brute_force_arc, fast_response, full_response, objective_oracle

TIGHT = ScpConfig(epsilon=1e-12, max_iters=500)


def resp_from(h, psi=None, f=(19e3, 21e3)):
    h = np.asarray(h, dtype=float)
    g = build_grid(f[0], f[1], h.size)
    return ChannelResponse(g, h, np.zeros(h.size) if psi is None else psi)


def test_align_phases_examples():
    np.testing.assert_array_equal(align_phases(resp_from([1, 1, 1])), 0.0)
    r = resp_from([1, 1], [np.pi / 3, np.pi / 3])
    np.testing.assert_allclose(align_phases(r), 5 * np.pi / 3, rtol=1e-15)


def test_aligned_phases_dominate_random(params):
    rng = np.random.default_rng(5)
    ch = fast_response(2)
    quad = QuadratureSpec.algorithm(ch.grid)
    s = rng.uniform(0, 1, ch.grid.n_tones)
    best = rectifier_rhs(MultisineWaveform(ch.grid, s, align_phases(ch)), ch, params, quad)
    for _ in range(100):
        phi = rng.uniform(0, 2 * np.pi, ch.grid.n_tones)
        assert rectifier_rhs(MultisineWaveform(ch.grid, s, phi), ch, params, quad) <= best


def test_single_tone_examples():
    w = single_tone(resp_from([1, 3, 2]), 4.0)
    np.testing.assert_array_equal(w.amplitudes, [0, 2, 0])
    w = single_tone(resp_from([0.5] * 4), 9.0)
    np.testing.assert_array_equal(w.amplitudes, [3, 0, 0, 0])
    with pytest.raises(ValueError):
        single_tone(resp_from([1.0]), -1.0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), k=st.floats(1e-6, 1e6))
def test_single_tone_argmax_invariant(seed, k):
    h = np.random.default_rng(seed).uniform(0, 1, 8)
    a = single_tone(resp_from(h), 1.0).amplitudes
    b = single_tone(resp_from(h * k), 1.0).amplitudes
    assert np.argmax(a) == np.argmax(b)


def test_mrt_examples():
    np.testing.assert_allclose(frequency_mrt(resp_from([7e-3] * 4), 1.0).amplitudes, 0.5, rtol=1e-15)
    np.testing.assert_array_equal(frequency_mrt(resp_from([1, 0]), 9.0).amplitudes, [3, 0])
    np.testing.assert_array_equal(frequency_mrt(resp_from([1, 2, 2]), 9.0).amplitudes, [1, 2, 2])
    with pytest.raises(ValueError, match="zero"):
        frequency_mrt(resp_from([0, 0]), 1.0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), e=st.integers(-20, 20), k=st.floats(1e-3, 1e3))
def test_mrt_scale_equivariant(seed, e, k):
    h = np.random.default_rng(seed).uniform(0, 1, 8)
    a = frequency_mrt(resp_from(h), 10.0).amplitudes
    # a power-of-two scale is exact in floating point
    np.testing.assert_array_equal(frequency_mrt(resp_from(h * 2.0 ** e), 10.0).amplitudes, a)
    np.testing.assert_allclose(frequency_mrt(resp_from(h * k), 10.0).amplitudes, a, rtol=1e-14)


def test_mrt_maximises_peak():
    rng = np.random.default_rng(9)
    h = rng.uniform(0, 1, 6)
    ch = resp_from(h)
    peak = np.dot(frequency_mrt(ch, 2.0).amplitudes, h)
    for _ in range(200):
        s = np.abs(rng.normal(size=6))
        s *= math.sqrt(2.0) / np.linalg.norm(s)
        assert np.dot(s, h) <= peak * (1 + 1e-12)


def test_single_tone_below_mrt_on_default_channel(params):
    ch = full_response(0)
    assert (harvested_power(single_tone(ch, 10.0), ch, params).p_out
            < harvested_power(frequency_mrt(ch, 10.0), ch, params).p_out)


def test_coefficients_at_zero(params):
    ch = full_response(0, 8)
    b0, b = scp_coefficients(np.zeros(8), ch, params, QuadratureSpec.algorithm(ch.grid))
    assert b0 == 1.0
    np.testing.assert_allclose(b, 0.0, atol=1e-12)


def test_beta0_equals_rhs(params):
    ch = fast_response(1)
    s = np.random.default_rng(0).uniform(0, 1, 16)
    quad = QuadratureSpec.algorithm(ch.grid)
    b0, _ = scp_coefficients(s, ch, params, quad)
    rhs = rectifier_rhs(MultisineWaveform(ch.grid, s, align_phases(ch)), ch, params, quad)
    assert b0 == pytest.approx(rhs, rel=1e-12)
    assert b0 == pytest.approx(objective_oracle(ch, params, quad.n_samples, s)[0], rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_coefficients_finite_difference(params, seed):
    rng = np.random.default_rng(seed)
    ch = full_response(seed)
    quad = QuadratureSpec.algorithm(ch.grid)
    s = rng.uniform(0, 1, 16)
    s *= rng.uniform(0.5, 3.5) / np.linalg.norm(s)
    _, betas = scp_coefficients(s, ch, params, quad)
    d = 1e-6
    for n in range(16):
        e = np.zeros(16)
        e[n] = d
        fd = (scp_coefficients(s + e, ch, params, quad)[0]
              - scp_coefficients(s - e, ch, params, quad)[0]) / (2 * d)
        assert abs(betas[n] - fd) <= 1e-5


def test_qclp_examples():
    np.testing.assert_array_equal(qclp_step([3, 4], 25.0), [3, 4])
    np.testing.assert_array_equal(qclp_step([1, 0, 0], 4.0), [2, 0, 0])
    np.testing.assert_array_equal(qclp_step([-1, 2], 4.0), [0, 2])
    with pytest.raises(ValueError):
        qclp_step([-1, 0], 1.0)
    with pytest.raises(ValueError):
        qclp_step([1, 1], -1.0)


@pytest.mark.parametrize("betas", [(3.0, 4.0), (1.0, 0.2), (0.7, -0.3), (-0.2, 5.0), (1.0, 1.0)])
def test_qclp_matches_grid_search(betas):
    p_t = 2.5
    a = np.linspace(0, math.sqrt(p_t), 2000)
    s1, s2 = np.meshgrid(a, a, indexing="ij")
    val = betas[0] * s1 + betas[1] * s2
    val[s1 ** 2 + s2 ** 2 > p_t] = -np.inf
    s = qclp_step(betas, p_t)
    assert np.dot(s, s) == pytest.approx(p_t, rel=1e-12)
    assert np.dot(betas, s) >= val.max() - 1e-12
    assert np.dot(betas, s) - val.max() <= 2e-3 * max(abs(val.max()), 1.0)


@pytest.mark.parametrize("n", [1, 2])
def test_scp_flat_channel_equal_amplitudes(params, n):
    trace = scp_qclp(resp_from([7e-3] * n), params, 10.0)
    assert trace.converged and trace.n_steps <= 3
    for it in trace.iterations:
        np.testing.assert_allclose(it.amplitudes, it.amplitudes[0], rtol=1e-9)
        np.testing.assert_allclose(it.betas, it.betas[0], rtol=1e-9)


@pytest.mark.parametrize("n, p_t", [(4, 1.0), (4, 10.0), (16, 10.0)])
def test_scp_flat_channel_favours_band_centre(params, n, p_t):
    # tones near the centre have more intermodulation partners, so equal
    # amplitudes are not stationary beyond two tones; the optimum is mirror
    # symmetric about the band centre instead
    trace = scp_qclp(resp_from([7e-3] * n), params, p_t)
    assert trace.converged and trace.n_steps <= 5
    s = trace.final.amplitudes
    np.testing.assert_allclose(s, s[::-1], rtol=2e-3)
    assert s[n // 2] > s[0]


def test_scp_trivial_cases(params):
    t = scp_qclp(fast_response(0), params, 0.0)
    assert t.converged and np.all(t.final_waveform.amplitudes == 0)
    t = scp_qclp(resp_from([0.0, 0.0]), params, 1.0)
    assert t.converged
    with pytest.raises(ValueError):
        scp_qclp(fast_response(0), params, -1.0)


@pytest.mark.parametrize("seed", range(20))
def test_scp_ascent_and_feasibility(params, seed):
    rng = np.random.default_rng(100 + seed)
    ch = fast_response(seed, n_tones=int(rng.choice([2, 4, 8, 16])))
    p_t = float(rng.choice([0.5, 2.0, 10.0, 20.0]))
    trace = scp_qclp(ch, params, p_t)
    assert trace.converged
    assert trace.iterations[0].m == 1
    b = [it.beta0 for it in trace.iterations]
    for prev, cur in zip(b, b[1:]):
        assert cur >= prev - 1e-9 * prev
    for it in trace.iterations[1:]:
        assert np.dot(it.amplitudes, it.amplitudes) == pytest.approx(p_t, rel=1e-12)
        assert np.all(it.amplitudes >= 0)
    assert trace.final.delta <= 1e-3
    assert trace.final_waveform.power == pytest.approx(p_t, rel=1e-12)
    np.testing.assert_allclose(trace.final_waveform.phases, align_phases(ch))


@pytest.mark.parametrize("seed, p_t", [(0, 10.0), (1, 10.0), (2, 10.0), (3, 10.0), (0, 0.5), (4, 1.0)])
def test_scp_kkt_stationary(params, seed, p_t):
    trace = scp_qclp(full_response(seed), params, p_t, TIGHT)
    assert trace.kkt_spread() <= 1e-3


def test_scp_low_power_reaches_vertex(params):
    # at low power the small-signal regime favours one tone; the others decay
    trace = scp_qclp(full_response(0), params, 0.5, TIGHT)
    s = trace.final.amplitudes
    assert np.sum(s >= 1e-3 * np.linalg.norm(s)) == 1
    assert np.argmax(s) == np.argmax(full_response(0).magnitudes)


def test_scp_matches_two_tone_brute_force(params):
    ch = fast_response(3, n_tones=2)
    q = ScpConfig().quadrature(ch.grid).n_samples
    best, _ = brute_force_arc(ch, params, q, 10.0, 100_000)
    got = scp_qclp(ch, params, 10.0, TIGHT).final.beta0
    assert abs(got - best) <= 1e-3 * best


def test_scp_beats_baselines_at_ten_watts(params):
    ch = full_response(0)
    p = {m: harvested_power(design(m, ch, params, 10.0)[0], ch, params).p_out
         for m in ("single_tone", "mrt", "scp_qclp")}
    assert p["scp_qclp"] >= p["mrt"] > p["single_tone"]


def test_max_iters_reported(params):
    trace = scp_qclp(full_response(0), params, 10.0, ScpConfig(epsilon=1e-15, max_iters=2))
    assert not trace.converged
    assert trace.n_steps == 2


def test_trace_serialisation(params):
    trace = scp_qclp(fast_response(0, 4), params, 5.0)
    d = json.loads(trace.to_json())
    assert d["converged"] is True
    assert len(d["iterations"]) == len(trace.iterations)
    assert d["iterations"][0]["delta"] is None
    lines = trace.to_csv().splitlines()
    assert lines[0] == "m,beta0,delta,s_1,s_2,s_3,s_4"
    assert len(lines) == len(trace.iterations) + 1
    assert float(lines[-1].split(",")[1]) == trace.final.beta0


def test_design_dispatch(params):
    ch = fast_response(0, 4)
    for m in METHODS:
        w, trace = design(m, ch, params, 2.0)
        assert (trace is not None) == (m == "scp_qclp")
        assert w.power == pytest.approx(2.0, rel=1e-12)
    np.testing.assert_allclose(equal_power(ch, 4.0).amplitudes, 1.0)
    with pytest.raises(ValueError):
        design("gp", ch, params, 1.0)
    with pytest.raises(ValueError):
        ScpConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        ScpConfig(max_iters=0)


@pytest.mark.parametrize("p_t", [0.5, 1.0, 2.0, 5.0, 20.0])
def test_scp_at_least_mrt_at_every_power(params, p_t):
    ch = full_response(0)
    scp = harvested_power(design("scp_qclp", ch, params, p_t)[0], ch, params).p_out
    assert scp >= harvested_power(frequency_mrt(ch, p_t), ch, params).p_out
