import numpy as np
import pytest
from scipy.integrate import quad

from eulerstat.initial import (
    InitialMeasureSpec,
    PerturbationDraw,
    bspline_bump,
    fbm_sample,
    fbm_surface,
    flat_sheet_profile,
    flat_sheet_sample,
    generate_sample,
    perturbation,
    sample_rng,
    sinusoidal_sheet_sample,
    taylor_green_field,
)
from eulerstat.spectral import SpectralField, l2_norm, max_divergence, to_physical, vorticity


def test_perturbation_zero_amplitude():
    rng = sample_rng(0, 1)
    draw = PerturbationDraw.draw(rng, 10, 0.0)
    x = np.linspace(0, 1, 50)
    assert np.all(perturbation(draw, x) == 0.0)


def test_perturbation_single_mode_value():
    draw = PerturbationDraw(alphas=np.array([0.5]), betas=np.array([0.0]))
    assert abs(perturbation(draw, 0.25) - 0.5) < 1e-15


def test_perturbation_triangle_bound():
    for seed in range(20):
        rng = sample_rng(42, seed)
        draw = PerturbationDraw.draw(rng, 10, 0.03)
        x = np.linspace(0, 1, 257)
        assert np.abs(perturbation(draw, x)).max() <= draw.alphas.sum() + 1e-15
        assert draw.alphas.sum() <= 10 * 0.03
        assert np.all((draw.betas >= 0) & (draw.betas < 2 * np.pi))
        assert np.all((draw.alphas >= 0) & (draw.alphas <= 0.03))


def test_draw_deterministic():
    d1 = PerturbationDraw.draw(sample_rng(7, 3), 10, 0.05)
    d2 = PerturbationDraw.draw(sample_rng(7, 3), 10, 0.05)
    assert np.array_equal(d1.alphas, d2.alphas) and np.array_equal(d1.betas, d2.betas)


def test_flat_profile_smooth_center_and_shape():
    assert flat_sheet_profile(0.25, 0.1) == 0.0  # tanh(0) at the lower interface
    assert abs(flat_sheet_profile(0.5, 0.1) - np.tanh(2.5)) < 1e-15
    assert abs(flat_sheet_profile(0.75, 0.1)) < 1e-15


def test_flat_profile_discontinuous_values():
    x2 = np.array([0.0, 0.25, 0.2500001, 0.5, 0.75, 0.7500001, 1.0 - 1e-9])
    expect = np.array([-1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0])
    assert np.array_equal(flat_sheet_profile(x2, 0.0), expect)


def test_flat_sheet_sample_invariants_and_determinism():
    spec = InitialMeasureSpec(family="flat_sheet", N=24, rho=0.1, delta=0.025, base_seed=9)
    u1 = flat_sheet_sample(spec, 3)
    u2 = flat_sheet_sample(spec, 3)
    assert np.array_equal(u1.coeffs, u2.coeffs)
    assert max_divergence(u1) < 1e-12
    assert u1.coeff(0, 0, 0) == 0.0
    assert not np.array_equal(u1.coeffs, flat_sheet_sample(spec, 4).coeffs)


def test_flat_sheet_mirror_symmetry():
    # delta = 0, rho > 0: u1(x1, 1/2 + y) = u1(x1, 1/2 - y)
    spec = InitialMeasureSpec(family="flat_sheet", N=32, rho=0.1, delta=0.0, base_seed=1)
    g = to_physical(flat_sheet_sample(spec, 1), 96)  # x2 = 1/2 at index 48
    assert np.abs(g[:, 49:, 0] - g[:, 47:0:-1, 0]).max() < 1e-10


def test_flat_sheet_perturbation_vanishes_with_delta():
    base = InitialMeasureSpec(family="flat_sheet", N=32, rho=0.1, delta=0.0, base_seed=5)
    u0 = flat_sheet_sample(base, 1)
    dists = []
    for delta in (0.05, 0.025, 0.0125):
        spec = InitialMeasureSpec(family="flat_sheet", N=32, rho=0.1, delta=delta, base_seed=5)
        u = flat_sheet_sample(spec, 1)
        dists.append(l2_norm(SpectralField(32, u.coeffs - u0.coeffs)))
    assert dists[0] > dists[1] > dists[2]


def test_bspline_endpoint_and_support():
    # (r+1)^3 - 4(r+1/2)^3 + 6r^3 - 4(r-1/2)^3 + (r-1)^3 telescopes to 0 at r=1
    assert bspline_bump(1.0) == 0.0
    assert np.all(bspline_bump(np.linspace(1.0, 5.0, 40)) == 0.0)
    assert abs(bspline_bump(0.0) - 40.0 / (7.0 * np.pi)) < 1e-15
    r = np.linspace(0, 1, 200)
    assert np.all(bspline_bump(r) >= 0.0)


def test_bspline_unit_mass():
    mass = quad(lambda r: bspline_bump(r) * 2 * np.pi * r, 0, 1)[0]
    assert abs(mass - 1.0) < 1e-12


def test_sinusoidal_sheet_invariants():
    spec = InitialMeasureSpec(
        family="sinusoidal_sheet", N=24, rho=5 / 24, delta=0.003125, base_seed=2
    )
    u = sinusoidal_sheet_sample(spec, 1)
    assert max_divergence(u) < 1e-12
    assert abs(vorticity(u).mean_mode) < 1e-10
    assert np.array_equal(u.coeffs, sinusoidal_sheet_sample(spec, 1).coeffs)


def test_sinusoidal_requires_mollification():
    with pytest.raises(ValueError):
        InitialMeasureSpec(family="sinusoidal_sheet", N=16, rho=0.0)


def test_fbm_sample_invariants():
    spec = InitialMeasureSpec(family="fbm", N=16, hurst=0.5, base_seed=3)
    u = fbm_sample(spec, 2)
    assert np.array_equal(u.coeffs, fbm_sample(spec, 2).coeffs)
    assert max_divergence(u) < 1e-10 * l2_norm(u)
    assert not np.array_equal(u.coeffs, fbm_sample(spec, 3).coeffs)


def test_fbm_hurst_validation():
    with pytest.raises(ValueError):
        InitialMeasureSpec(family="fbm", N=16, hurst=1.5)


def test_fbm_surface_refinement_consistency():
    # deeper surfaces refine shallower ones on the shared coarse lattice
    rngs_a = [sample_rng(11, 0, 0, l) for l in range(6)]
    rngs_b = [sample_rng(11, 0, 0, l) for l in range(7)]
    a = fbm_surface(None, 5, 0.4, level_rngs=rngs_a)
    b = fbm_surface(None, 6, 0.4, level_rngs=rngs_b)
    assert np.array_equal(b[::2, ::2], a)


def test_fbm_increment_scaling_coarse():
    # quick version of the generator statistic (tight version in acceptance)
    lags = np.array([4, 8, 16, 32])
    acc = np.zeros(len(lags))
    nseeds = 8
    for s in range(nseeds):
        rngs = [sample_rng(123, s, 0, l) for l in range(10)]
        surf = fbm_surface(None, 9, 0.5, level_rngs=rngs)
        for j, h in enumerate(lags):
            d1 = surf[h:, :] - surf[:-h, :]
            d2 = surf[:, h:] - surf[:, :-h]
            acc[j] += 0.5 * (np.var(d1) + np.var(d2))
    slope = np.polyfit(np.log(lags), np.log(acc / nseeds), 1)[0]
    assert abs(slope - 1.0) < 0.2


def test_periodization_kills_ramps():
    P = 16
    x = np.arange(P + 1) / P
    ramp = 1.7 * x[:, None] + 0.3 * x[None, :] + 2.0 * x[:, None] * x[None, :]
    from eulerstat.initial import _periodize

    assert np.abs(_periodize(ramp)).max() < 1e-13


def test_taylor_green_field_values():
    N, M = 8, 24
    g = to_physical(taylor_green_field(N), M)
    x = 2 * np.pi * np.arange(M) / M
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    assert np.abs(g[:, :, 0] - np.sin(X1) * np.cos(X2)).max() < 1e-12
    assert np.abs(g[:, :, 1] + np.cos(X1) * np.sin(X2)).max() < 1e-12
    assert max_divergence(taylor_green_field(N)) < 1e-14


def test_generate_sample_dispatch():
    spec = InitialMeasureSpec(family="flat_sheet", N=16, rho=0.1, base_seed=0)
    assert np.array_equal(generate_sample(spec, 1).coeffs, flat_sheet_sample(spec, 1).coeffs)
    with pytest.raises(ValueError):
        InitialMeasureSpec(family="nope", N=16)
