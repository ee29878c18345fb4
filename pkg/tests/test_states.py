"""Catalog states, exact bin integrals, and density-state validation."""

import numpy as np
import pytest
from scipy.integrate import quad

from spatialzeno import (
    Bin,
    Interval,
    NonOrthogonalTermsError,
    bin_inner_product,
    exact_bin_integral,
    inner_product,
    make_density,
    make_state,
    superpose,
    tensor_product,
)

CELL = lambda a, b: Bin((Interval(a, b),))


def test_uniform_is_constant_one():
    psi = make_state("uniform")
    x = np.linspace(0.0, 0.999, 7)
    assert np.allclose(psi.evaluate(x), 1.0)
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("catalog,params", [
    ("uniform", {}),
    ("sine_mode", {"k": 1}),
    ("sine_mode", {"k": 5}),
    ("complex_exponential", {"k": 2}),
    ("indicator", {"a": 0.2, "b": 0.7}),
    ("power_singular", {"alpha": 0.25}),
    ("power_singular", {"alpha": 0.49}),
    ("gaussian", {"mu": 0.5, "sigma": 2.0}),
    ("haar_like", {"seed": 11}),
    ("sine_product", {"ks": [1, 2]}),
])
def test_catalog_states_are_normalized(catalog, params):
    psi = make_state(catalog, **params)
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_power_singular_normalization_constant():
    # integral of x^(-1/2) over [0,1] is 2, so c^2 * 2 = 1
    psi = make_state("power_singular", alpha=0.25)
    coeff = psi.terms[0][1][0].coeff
    assert coeff == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-15)


def test_power_singular_invalid_alpha():
    with pytest.raises(ValueError):
        make_state("power_singular", alpha=0.5)
    with pytest.raises(ValueError):
        make_state("power_singular", alpha=-0.1)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        make_state("indicator", a=0.5, b=0.5)
    with pytest.raises(ValueError):
        make_state("sine_mode", k=0)
    with pytest.raises(ValueError):
        make_state("gaussian", mu=0.0, sigma=0.0)
    with pytest.raises(ValueError):
        make_state("unknown_entry")


def test_exact_bin_integral_uniform():
    u = make_state("uniform")
    assert exact_bin_integral(u, u, CELL(0.0, 0.25)) == pytest.approx(0.25)


def test_exact_bin_integral_sine_quarter():
    s = make_state("sine_mode", k=1)
    val = exact_bin_integral(s, s, CELL(0.0, 0.25))
    assert val == pytest.approx(0.25 - 1.0 / (2.0 * np.pi), abs=1e-14)
    assert val == pytest.approx(0.0908450569, abs=1e-9)


def test_exact_bin_integral_orthogonal_modes():
    s1 = make_state("sine_mode", k=1)
    s2 = make_state("sine_mode", k=2)
    assert exact_bin_integral(s2, s1, CELL(0.0, 1.0)) == pytest.approx(0.0, abs=1e-15)


def test_exact_matches_brute_force_quadrature():
    rng = np.random.default_rng(7)
    pairs = [
        (make_state("uniform"), make_state("sine_mode", k=2)),
        (make_state("sine_mode", k=1), make_state("sine_mode", k=3)),
        (make_state("complex_exponential", k=1), make_state("sine_mode", k=1)),
        (make_state("complex_exponential", k=2), make_state("complex_exponential", k=-1)),
        (make_state("power_singular", alpha=0.3), make_state("uniform")),
        (make_state("indicator", a=0.1, b=0.6), make_state("sine_mode", k=2)),
        (make_state("haar_like", seed=2), make_state("uniform")),
    ]
    for psi, phi in pairs:
        jumps = sorted({p for wf in (psi, phi) for _, factors in wf.terms
                        for p in factors[0].discontinuities()})
        for _ in range(15):
            a, b = np.sort(rng.random(2))
            if b - a < 1e-3:
                continue
            pts = [p for p in jumps if a < p < b] or None
            got = exact_bin_integral(psi, phi, CELL(a, b))
            ref_re = quad(lambda x: np.real(np.conj(phi.evaluate(x)) * psi.evaluate(x)),
                          a, b, limit=200, points=pts)[0]
            ref_im = quad(lambda x: np.imag(np.conj(phi.evaluate(x)) * psi.evaluate(x)),
                          a, b, limit=200, points=pts)[0]
            assert got.real == pytest.approx(ref_re, abs=2e-9)
            assert got.imag == pytest.approx(ref_im, abs=2e-9)


def test_exact_vs_numeric_agreement_on_supported_pairs():
    # same value through the closed form and through quadrature, 100 bins
    rng = np.random.default_rng(42)
    pairs = [
        (make_state("uniform"), make_state("uniform")),
        (make_state("sine_mode", k=1), make_state("sine_mode", k=2)),
        (make_state("complex_exponential", k=1), make_state("uniform")),
        (make_state("power_singular", alpha=0.25), make_state("uniform")),
        (make_state("haar_like", seed=5), make_state("sine_mode", k=1)),
    ]
    for psi, phi in pairs:
        done = 0
        while done < 20:
            a, b = np.sort(rng.random(2))
            if b - a < 1e-4:
                continue
            cell = CELL(a, b)
            exact = bin_inner_product(phi, psi, cell, method="exact").value
            numer = bin_inner_product(phi, psi, cell, method="numeric").value
            assert abs(exact - numer) < 1e-10
            done += 1


def test_gaussian_pair_integral_matches_erf_oracle():
    from scipy.special import erf

    g1 = make_state("gaussian", mu=0.0, sigma=1.0)
    g2 = make_state("gaussian", mu=0.0, sigma=1.0)
    # conj(g)*g is the standard normal density
    val = exact_bin_integral(g1, g2, CELL(-1.3, 0.4))
    ref = 0.5 * (erf(0.4 / np.sqrt(2)) - erf(-1.3 / np.sqrt(2)))
    assert val == pytest.approx(ref, abs=1e-14)

    g3 = make_state("gaussian", mu=1.0, sigma=0.5)
    got = exact_bin_integral(g3, g1, CELL(-2.0, 2.0))
    ref = quad(lambda x: np.real(np.conj(g1.evaluate(x)) * g3.evaluate(x)), -2, 2)[0]
    assert got.real == pytest.approx(ref, abs=1e-12)


def test_superposition_norm_two_ways():
    s1 = make_state("sine_mode", k=1)
    s2 = make_state("sine_mode", k=2)
    psi = superpose([(0.8, s1), (0.6j, s2)])
    # coefficient expansion: modes are orthonormal
    coeffs = np.array([t[0] for t in psi.terms])
    by_coeffs = float(np.sum(np.abs(coeffs) ** 2))
    by_quadrature = psi.norm_squared()
    assert by_coeffs == pytest.approx(1.0, abs=1e-9)
    assert by_quadrature == pytest.approx(by_coeffs, abs=1e-9)


def test_superpose_nested_and_phase():
    base = make_state("sine_mode", k=1)
    inner = superpose([(1.0, base), (0.5, make_state("uniform"))])
    outer = superpose([(1.0j, inner)])
    assert outer.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_tensor_product_dimension_and_norm():
    psi = tensor_product([make_state("sine_mode", k=1), make_state("uniform")])
    assert psi.d == 2
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-9)
    val = psi.evaluate(np.array([[0.25, 0.7]]))
    assert val[0] == pytest.approx(np.sqrt(2) * np.sin(np.pi * 0.25), abs=1e-12)


def test_density_pure_term():
    rho = make_density([(1.0, make_state("sine_mode", k=1))])
    assert rho.declared_trace == pytest.approx(1.0)
    assert rho.tail_mass == 0.0


def test_density_mixed_orthogonal():
    rho = make_density([(0.5, make_state("sine_mode", k=1)),
                        (0.5, make_state("sine_mode", k=2))])
    assert rho.declared_trace == pytest.approx(1.0)


def test_density_trace_excess_rejected_unless_renormalized():
    terms = [(0.6, make_state("sine_mode", k=1)), (0.5, make_state("sine_mode", k=2))]
    with pytest.raises(ValueError):
        make_density(terms, renormalize=False)
    rho = make_density(terms, renormalize=True)
    assert rho.declared_trace == pytest.approx(1.0, abs=1e-12)
    assert rho.terms[0][0] == pytest.approx(0.6 / 1.1)


def test_density_negative_weight():
    with pytest.raises(ValueError):
        make_density([(-0.1, make_state("uniform"))])


def test_density_non_orthogonal_terms():
    with pytest.raises(NonOrthogonalTermsError):
        make_density([(0.5, make_state("uniform")),
                      (0.5, make_state("sine_mode", k=1))])


def test_density_truncated_tail():
    rho = make_density([(0.7, make_state("sine_mode", k=1)),
                        (0.2, make_state("sine_mode", k=2))])
    assert rho.tail_mass == pytest.approx(0.1, abs=1e-12)


def test_inner_product_hermitian():
    a = make_state("sine_mode", k=1)
    b = superpose([(1.0, make_state("sine_mode", k=2)), (0.3j, a)])
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)), abs=1e-12)


def test_euclidean_reading_of_compact_state():
    psi = make_state("sine_mode", k=1).as_euclidean()
    assert psi.domain.kind == "euclidean"
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-9)
