"""Gel'fand transform, band projections, fiber expansions, and the resolvent."""

from __future__ import annotations

import numpy as np
import pytest

from hillspec import (
    ConfigError,
    NearSpectrumError,
    expand,
    fiber_expansion,
    gaussian_bump,
    gelfand_forward,
    gelfand_inverse,
    grid_for_cells,
    make_grid_function,
    preset,
    project,
    resolvent_apply,
    spectral_matrix,
)


def gelfand_norm(G, h):
    w_t = 2 * np.pi / G.t_grid.size
    return np.sqrt(w_t * h * np.sum(np.abs(G.values) ** 2) / (2 * np.pi))


def test_gelfand_transform_is_unitary_and_invertible():
    g = gaussian_bump(center=0.7, width=1.3, modulation=0.8, n_cells=4, points_per_cell=128)
    G = gelfand_forward(g)
    assert abs(gelfand_norm(G, g.spacing) - g.norm()) < 1e-10 * g.norm()
    back = gelfand_inverse(G)
    assert np.max(np.abs(back.values - g.values)) < 1e-10


def test_single_cell_data_is_quasi_momentum_independent():
    x1 = grid_for_cells(1, 64)
    v1 = np.where((x1 >= 0) & (x1 < np.pi), np.exp(-((x1 - 1.2) ** 2) * 4), 0)
    G1 = gelfand_forward(make_grid_function(x1, v1))
    col = G1.values[:, :1]
    assert np.max(np.abs(G1.values - col)) < 1e-13


def test_gelfand_roundtrip_on_random_data():
    rng = np.random.default_rng(12)
    x = grid_for_cells(4, 64)
    vals = np.zeros(x.size, dtype=complex)
    lo, hi = x.size // 4, 3 * x.size // 4
    vals[lo:hi] = rng.normal(size=hi - lo) + 1j * rng.normal(size=hi - lo)
    g = make_grid_function(x, vals)
    G = gelfand_forward(g)
    assert abs(gelfand_norm(G, g.spacing) - g.norm()) < 1e-10 * g.norm()
    back = gelfand_inverse(G)
    assert np.max(np.abs(back.values - g.values)) < 1e-10 * np.abs(vals).max()


def test_projection_is_linear(zero_pot, zero_portrait):
    arc1 = next(a for a in zero_portrait.arcs if a.band_index == 1)
    ga = gaussian_bump(center=0.5, width=1.5, n_cells=2, points_per_cell=64)
    gb = gaussian_bump(center=-1.0, width=1.0, modulation=1.1, n_cells=2, points_per_cell=64)
    comb = make_grid_function(ga.x_grid, 2.0 * ga.values - 1j * gb.values)
    lin = project(zero_pot, arc1, comb, panels=16).values - (
        2.0 * project(zero_pot, arc1, ga, panels=16).values
        - 1j * project(zero_pot, arc1, gb, panels=16).values
    )
    assert np.max(np.abs(lin)) < 1e-10


def test_expand_equals_band_partial_sum(zero_pot, zero_portrait):
    g = gaussian_bump(center=0.0, width=1.2, modulation=0.7, n_cells=2, points_per_cell=64)
    parts = np.zeros_like(g.values)
    for a in zero_portrait.arcs:
        if a.band_index <= 2:
            parts = parts + project(zero_pot, a, g).values
    e2 = expand(zero_pot, zero_portrait, g, 2, verdict="PASS")
    assert np.max(np.abs(e2.values - parts)) < 1e-12


def test_expand_refuses_a_failed_verdict(zero_pot, zero_portrait):
    g = gaussian_bump(n_cells=2, points_per_cell=32)
    with pytest.raises(ConfigError):
        expand(zero_pot, zero_portrait, g, 2, verdict="FAIL")
    forced = expand(zero_pot, zero_portrait, g, 1, verdict="FAIL", force=True)
    assert np.isfinite(forced.values).all()


def test_fiber_expansion_recovers_plane_wave_coefficients(zero_pot):
    ppc = 256
    xb = np.pi / ppc * np.arange(ppc)
    f = np.exp(0.5j * xb) * (1.0 + 0.4 * np.exp(2j * xb) - 0.2j * np.exp(-2j * xb))
    fe = fiber_expansion(zero_pot, np.pi / 2, f, 6)
    assert fe.residual < 1e-8
    want = {0.25: 1.0, 6.25: 0.4, 2.25: -0.2j}
    seen = {}
    for z, c in zip(fe.eigenvalues, fe.coefficients):
        key = round(z.real * 4) / 4
        if key in want:
            seen[key] = c
        else:
            assert abs(c) < 1e-9
    for key, val in want.items():
        assert abs(seen[key] - val) < 1e-8


def test_spectral_matrix_determinant_is_universal(zero_pot, mathieu_pot, gasymov_pot):
    S = spectral_matrix(zero_pot, 0.3, t=np.pi * np.sqrt(0.3))
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    assert abs(det - 1.0 / (4 * np.pi**2)) < 1e-10
    assert abs(S[0, 1]) < 1e-12
    for V, z in ((mathieu_pot, 2.3 + 0.0j), (gasymov_pot, 7.1 + 0.9j)):
        S = spectral_matrix(V, z)
        det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
        assert abs(det - 1.0 / (4 * np.pi**2)) < 1e-9
        assert S[0, 1] == S[1, 0]


def test_free_resolvent_matches_convolution_kernel(zero_pot):
    g = gaussian_bump(center=0.3, width=1.1, n_cells=4, points_per_cell=128)
    r = resolvent_apply(zero_pot, -1.0, g)
    x = g.x_grid
    K = 0.5 * np.exp(-np.abs(x[:, None] - x[None, :]))
    lo, hi = g.support
    oracle = g.spacing * (K[:, lo:hi] @ g.values[lo:hi])
    assert np.max(np.abs(r.values - oracle)) < 1e-6


def test_resolvent_commutes_with_band_projection(zero_pot, zero_portrait):
    g = gaussian_bump(center=0.0, width=1.4, modulation=0.6, n_cells=2, points_per_cell=64)
    arc1 = next(a for a in zero_portrait.arcs if a.band_index == 1)
    p1 = project(zero_pot, arc1, g)
    rp = resolvent_apply(zero_pot, -1.0, p1, portrait=zero_portrait)
    pr = project(zero_pot, arc1, resolvent_apply(zero_pot, -1.0, g, portrait=zero_portrait))
    comm = np.sqrt(np.sum(np.abs(rp.values - pr.values) ** 2) / np.sum(np.abs(g.values) ** 2))
    assert comm < 1e-3


def test_resolvent_refuses_points_on_the_spectrum(zero_pot, zero_portrait):
    g = gaussian_bump(n_cells=2, points_per_cell=32)
    with pytest.raises(NearSpectrumError):
        resolvent_apply(zero_pot, 2.0 + 1e-12j, g, portrait=zero_portrait)
