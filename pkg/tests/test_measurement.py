"""Collapse, outcome probabilities, joint tables, and sampling."""

import numpy as np
import pytest
from scipy.integrate import fixed_quad

from spatialzeno import (
    Bin,
    Interval,
    ZeroMassBinError,
    collapse,
    inner_product,
    jittered_grid,
    joint_distribution,
    make_density,
    make_state,
    prob_y1_given_bin,
    prob_y1_mixed,
    prob_y1_pure,
    sample_xy,
    superpose,
    tensor_product,
    uniform_grid,
)

CELL = lambda a, b: Bin((Interval(a, b),))


def test_collapse_uniform_half():
    psi = collapse(make_state("uniform"), CELL(0.0, 0.5))
    x = np.array([0.1, 0.3, 0.49])
    assert np.allclose(psi.evaluate(x), np.sqrt(2.0))
    assert np.allclose(psi.evaluate(np.array([0.6, 0.9])), 0.0)
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_collapse_sine_half():
    psi = collapse(make_state("sine_mode", k=1), CELL(0.0, 0.5))
    x = np.array([0.1, 0.25, 0.4])
    assert np.allclose(psi.evaluate(x), 2.0 * np.sin(np.pi * x))


def test_collapse_zero_mass():
    psi = make_state("indicator", a=0.0, b=0.5)
    with pytest.raises(ZeroMassBinError):
        collapse(psi, CELL(0.5, 1.0))


def test_prob_y1_given_bin_uniform():
    u = make_state("uniform")
    assert prob_y1_given_bin(u, u, CELL(0.0, 0.25)) == pytest.approx(0.25, abs=1e-14)


def test_prob_y1_given_bin_disjoint_support():
    psi = make_state("uniform")
    phi = make_state("indicator", a=0.5, b=1.0)
    assert prob_y1_given_bin(psi, phi, CELL(0.0, 0.5)) == pytest.approx(0.0, abs=1e-14)


def test_prob_y1_given_bin_self_projection():
    psi = make_state("sine_mode", k=1)
    cell = CELL(0.0, 0.5)
    phi = collapse(psi, cell)
    assert prob_y1_given_bin(psi, phi, cell) == pytest.approx(1.0, abs=1e-12)


def test_conditional_times_mass_equals_amplitude_chain():
    # law of total probability: the conditional route and the direct
    # amplitude route give the same P(Y=1)
    psi = make_state("sine_mode", k=2)
    phi = make_state("sine_mode", k=1)
    level = uniform_grid(8)
    from spatialzeno import bin_mass

    total = 0.0
    for b in level.bins():
        m = bin_mass(psi, b)
        total += prob_y1_given_bin(psi, phi, b) * m
    direct = prob_y1_pure(psi, phi, level).p_y1
    assert total == pytest.approx(direct, abs=1e-12)


def test_conditional_matches_collapsed_inner_product():
    psi = make_state("sine_mode", k=2)
    phi = make_state("sine_mode", k=1)
    for a, b in [(0.0, 0.25), (0.25, 0.5), (0.125, 0.7)]:
        cell = CELL(a, b)
        via_ratio = prob_y1_given_bin(psi, phi, cell)
        via_collapse = abs(inner_product(phi, collapse(psi, cell))) ** 2
        assert via_ratio == pytest.approx(via_collapse, abs=1e-12)


def test_prob_y1_pure_uniform_is_inverse_n():
    u = make_state("uniform")
    for n in (1, 2, 10, 64, 1024):
        r = prob_y1_pure(u, u, uniform_grid(n))
        assert r.p_y1 == pytest.approx(1.0 / n, abs=1e-13)


def test_prob_y1_pure_sine_n4():
    s = make_state("sine_mode", k=1)
    r = prob_y1_pure(s, s, uniform_grid(4))
    amps = np.sort(np.abs(r.per_bin_amplitude))
    assert amps[0] == pytest.approx(0.25 - 1.0 / (2.0 * np.pi), abs=1e-12)
    assert amps[-1] == pytest.approx(0.25 + 1.0 / (2.0 * np.pi), abs=1e-12)
    # 2 * [(1/4 - 1/2pi)^2 + (1/4 + 1/2pi)^2] = 1/4 + 1/pi^2
    assert r.p_y1 == pytest.approx(0.25 + np.pi ** -2, abs=1e-13)


def test_prob_y1_pure_orthogonal_single_bin():
    s1 = make_state("sine_mode", k=1)
    s2 = make_state("sine_mode", k=2)
    r = prob_y1_pure(s2, s1, uniform_grid(1))
    assert r.p_y1 == pytest.approx(0.0, abs=1e-14)


def test_prob_y1_pure_matches_per_bin_oracle():
    psi = make_state("sine_mode", k=2)
    phi = make_state("complex_exponential", k=1)
    level = jittered_grid(6, 1, C=2.0, seed=3)
    total = 0.0
    for b in level.bins():
        a, bb = b.edges[0].lo, b.edges[0].hi
        re = fixed_quad(lambda x: np.real(np.conj(phi.evaluate(x)) * psi.evaluate(x)),
                        a, bb, n=40)[0]
        im = fixed_quad(lambda x: np.imag(np.conj(phi.evaluate(x)) * psi.evaluate(x)),
                        a, bb, n=40)[0]
        total += re ** 2 + im ** 2
    r = prob_y1_pure(psi, phi, level)
    assert r.p_y1 == pytest.approx(total, abs=1e-12)


def test_symmetry_in_swapping_states():
    psi = make_state("sine_mode", k=2)
    phi = superpose([(0.6, make_state("sine_mode", k=1)),
                     (0.8j, make_state("complex_exponential", k=1))])
    level = uniform_grid(7)
    a = prob_y1_pure(psi, phi, level).p_y1
    b = prob_y1_pure(phi, psi, level).p_y1
    assert a == pytest.approx(b, abs=1e-12)


def test_global_phase_invariance():
    psi = make_state("sine_mode", k=1)
    phi = make_state("sine_mode", k=2)
    level = uniform_grid(5)
    base = prob_y1_pure(psi, phi, level).p_y1
    for theta in (0.3, 1.7, np.pi):
        psi_rot = superpose([(np.exp(1j * theta), psi)])
        phi_rot = superpose([(np.exp(-1j * theta / 3), phi)])
        assert prob_y1_pure(psi_rot, phi, level).p_y1 == pytest.approx(base, abs=1e-12)
        assert prob_y1_pure(psi, phi_rot, level).p_y1 == pytest.approx(base, abs=1e-12)


def test_mass_total_stable_under_refinement():
    psi = make_state("sine_mode", k=3)
    phi = make_state("uniform")
    for n in (2, 4, 8, 16, 64, 256):
        r = prob_y1_pure(psi, phi, uniform_grid(n))
        assert r.mass_total == pytest.approx(1.0, abs=1e-8)


def test_upper_bound_by_max_volume():
    psi = make_state("sine_mode", k=1)
    phi = make_state("sine_mode", k=2)
    from spatialzeno import bar_norm_squared

    for level in (uniform_grid(6), jittered_grid(6, 1, C=2.0, seed=5)):
        p = prob_y1_pure(psi, phi, level).p_y1
        bound = level.max_bin_volume * bar_norm_squared(psi, phi, level)
        assert p <= bound + 1e-12


def test_mixed_single_term_equals_pure():
    psi = make_state("sine_mode", k=1)
    phi = make_state("uniform")
    rho = make_density([(1.0, psi)])
    level = uniform_grid(9)
    assert prob_y1_mixed(rho, phi, level).p_y1 == pytest.approx(
        prob_y1_pure(psi, phi, level).p_y1, abs=1e-14)


def test_mixed_orthonormal_modes_single_bin():
    rho = make_density([(0.5, make_state("sine_mode", k=1)),
                        (0.5, make_state("sine_mode", k=2))])
    phi = make_state("sine_mode", k=1)
    r = prob_y1_mixed(rho, phi, uniform_grid(1))
    assert r.p_y1 == pytest.approx(0.5, abs=1e-13)


def test_mixed_linearity():
    s1 = make_state("sine_mode", k=1)
    s2 = make_state("sine_mode", k=2)
    phi = make_state("complex_exponential", k=1)
    level = jittered_grid(5, 1, C=2.0, seed=8)
    rho = make_density([(0.3, s1), (0.7, s2)])
    expected = 0.3 * prob_y1_pure(s1, phi, level).p_y1 \
        + 0.7 * prob_y1_pure(s2, phi, level).p_y1
    assert prob_y1_mixed(rho, phi, level).p_y1 == pytest.approx(expected, abs=1e-12)


def test_mixed_tail_enters_error_bound():
    rho = make_density([(0.8, make_state("sine_mode", k=1))])
    phi = make_state("uniform")
    r = prob_y1_mixed(rho, phi, uniform_grid(4))
    assert r.p_y1_error_bound >= 0.2


def test_joint_distribution_uniform_n2():
    u = make_state("uniform")
    jd = joint_distribution(u, u, uniform_grid(2))
    assert np.allclose(jd.p_y1_bins, 0.25)
    assert np.allclose(jd.p_y0_bins, 0.25)
    assert jd.p_y1 == pytest.approx(0.5)


def test_joint_marginals():
    psi = make_state("sine_mode", k=2)
    phi = make_state("sine_mode", k=1)
    level = uniform_grid(16)
    jd = joint_distribution(psi, phi, level)
    r = prob_y1_pure(psi, phi, level)
    assert np.allclose(jd.marginal_x, r.per_bin_mass, atol=1e-14)
    assert jd.p_y1 == pytest.approx(r.p_y1, abs=1e-14)
    assert jd.total == pytest.approx(1.0, abs=1e-10)
    assert np.all(jd.p_y0_bins >= 0.0)
    assert np.all(jd.p_y1_bins >= 0.0)


def test_joint_mixture_weighted():
    s1 = make_state("sine_mode", k=1)
    s2 = make_state("sine_mode", k=2)
    phi = make_state("uniform")
    level = uniform_grid(8)
    rho = make_density([(0.4, s1), (0.6, s2)])
    jd = joint_distribution(rho, phi, level)
    j1 = joint_distribution(s1, phi, level)
    j2 = joint_distribution(s2, phi, level)
    assert np.allclose(jd.p_y1_bins, 0.4 * j1.p_y1_bins + 0.6 * j2.p_y1_bins)


def test_sampler_reproducible_and_stream_split():
    psi = make_state("sine_mode", k=1)
    level = uniform_grid(8)
    a = sample_xy(psi, psi, level, count=500, seed=10)
    b = sample_xy(psi, psi, level, count=500, seed=10)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = sample_xy(psi, psi, level, count=500, seed=10, stream=1)
    assert not np.array_equal(a.x, c.x)


def test_sampler_zero_mass_bins_never_drawn():
    psi = make_state("indicator", a=0.0, b=0.5)
    phi = make_state("uniform")
    level = uniform_grid(4)
    batch = sample_xy(psi, phi, level, count=20_000, seed=3)
    assert batch.x.max() <= 1  # bins 2 and 3 carry no mass


def test_sampler_all_zero_when_phi_disjoint():
    psi = make_state("indicator", a=0.0, b=0.5)
    phi = make_state("indicator", a=0.5, b=1.0)
    batch = sample_xy(psi, phi, uniform_grid(2), count=5_000, seed=4)
    assert np.all(batch.y == 0)


def test_sampler_uniform_pair_clt_bound():
    u = make_state("uniform")
    batch = sample_xy(u, u, uniform_grid(2), count=100_000, seed=6)
    # exact joint table: each bin (0.25, 0.25), so P(Y=1) = 0.5
    assert abs(batch.y.mean() - 0.5) < 4 * np.sqrt(0.25 / 100_000)


def test_sampler_frequencies_match_joint_table():
    psi = make_state("sine_mode", k=1)
    level = uniform_grid(8)
    count = 100_000
    jd = joint_distribution(psi, psi, level)
    batch = sample_xy(psi, psi, level, count=count, seed=123)
    emp_y1 = batch.y.mean()
    sigma = np.sqrt(jd.p_y1 * (1 - jd.p_y1) / count)
    assert abs(emp_y1 - jd.p_y1) < 4 * sigma
    for j in range(level.num_bins):
        p = jd.marginal_x[j]
        emp = np.mean(batch.x == j)
        s = np.sqrt(p * (1 - p) / count)
        assert abs(emp - p) < 4 * s


def test_sampler_mixture_draws_spectral_terms():
    rho = make_density([(0.5, make_state("indicator", a=0.0, b=0.5)),
                        (0.5, make_state("indicator", a=0.5, b=1.0))])
    phi = make_state("uniform")
    level = uniform_grid(2)
    batch = sample_xy(rho, phi, level, count=50_000, seed=9)
    frac_low = np.mean(batch.x == 0)
    assert abs(frac_low - 0.5) < 4 * np.sqrt(0.25 / 50_000)


def test_product_state_2d_probability():
    psi = tensor_product([make_state("sine_mode", k=1), make_state("sine_mode", k=1)])
    level_1d = uniform_grid(4)
    s = make_state("sine_mode", k=1)
    p1 = prob_y1_pure(s, s, level_1d).p_y1
    level_2d = uniform_grid(4, 2)
    p2 = prob_y1_pure(psi, psi, level_2d).p_y1
    assert p2 == pytest.approx(p1 ** 2, abs=1e-13)


def test_per_bin_tables_dropped_for_large_grids():
    u2 = make_state("uniform", d=2)
    level = uniform_grid(1024, 2)  # 2^20 bins, above the guard
    r = prob_y1_pure(u2, u2, level)
    assert r.per_bin_amplitude is None
    assert r.p_y1 == pytest.approx(1024.0 ** -2, rel=1e-12)
