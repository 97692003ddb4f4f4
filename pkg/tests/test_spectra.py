"""Dirichlet, periodic, antiperiodic, critical, and fiber spectra."""

from __future__ import annotations

import numpy as np

from hillspec import (
    algebraic_vs_geometric,
    check_interlacing,
    critical_points,
    dirichlet_spectrum,
    fiber_spectrum,
    make_fourier,
    periodic_antiperiodic_spectrum,
    preset,
    spectra_catalog,
)
from oracles import (
    GASYMOV_UNIT_COEFFS,
    MATHIEU_HALF_COEFFS,
    dirichlet_matrix_spectrum,
    fiber_matrix_spectrum,
    flatten_roots,
)


def test_free_dirichlet_spectrum_is_squares():
    d = dirichlet_spectrum(preset("zero"), 5)
    assert len(d) == 5
    for k, (z, m) in enumerate(d, 1):
        assert m == 1
        assert abs(z - k * k) < 1e-9


def test_constant_potential_shifts_dirichlet_spectrum():
    c = 0.7 + 0.2j
    d = dirichlet_spectrum(preset("constant", c), 3)
    for k, (z, m) in enumerate(d, 1):
        assert m == 1
        assert abs(z - (k * k + c)) < 1e-8


def test_free_periodic_antiperiodic_multiplicities():
    per, anti = periodic_antiperiodic_spectrum(preset("zero"), 3)
    assert [(round(z.real, 8), m) for z, m in per] == [(0.0, 1), (4.0, 2), (16.0, 2)]
    assert [(round(z.real, 8), m) for z, m in anti] == [(1.0, 2), (9.0, 2)]
    # double roots are polished beyond the clustering tolerance
    assert abs(per[1][0] - 4) < 1e-11
    assert abs(per[2][0] - 16) < 1e-11


def test_gasymov_periodic_spectra_match_free():
    per_f, anti_f = periodic_antiperiodic_spectrum(preset("zero"), 3)
    per_g, anti_g = periodic_antiperiodic_spectrum(preset("gasymov", 1.0), 3)
    for (zg, mg), (zf, mf) in zip(per_g + anti_g, per_f + anti_f):
        assert mg == mf
        assert abs(zg - zf) < 1e-8


def test_free_critical_points_alternate():
    cr = critical_points(preset("zero"), 4)
    assert len(cr) == 4
    for k, (delta, gamma, order) in enumerate(cr, 1):
        assert order == 1
        assert abs(delta - k * k) < 1e-9
        assert abs(gamma - (-1.0) ** k) < 1e-9


def test_free_fiber_spectra():
    V = preset("zero")
    fs = fiber_spectrum(V, np.pi / 2, 3)
    want = [(0.25, 1), (2.25, 1), (6.25, 1), (12.25, 1), (20.25, 1)]
    assert len(fs) == 5
    for (z, m), (w, wm) in zip(fs, want):
        assert m == wm
        assert abs(z - w) < 1e-9
    fs0 = fiber_spectrum(V, 0.0, 3)
    assert [(round(z.real, 8), m) for z, m in fs0] == [(0.0, 1), (4.0, 2), (16.0, 2)]
    fspi = fiber_spectrum(V, np.pi, 3)
    assert [(round(z.real, 8), m) for z, m in fspi] == [(1.0, 2), (9.0, 2), (25.0, 2)]


def test_fiber_spectrum_matches_plane_wave_matrix():
    V = preset("mathieu", 0.5)
    roots = flatten_roots(fiber_spectrum(V, 1.0, 5))
    oracle = fiber_matrix_spectrum(MATHIEU_HALF_COEFFS, 1.0)[: roots.size]
    assert np.max(np.abs(roots - oracle)) < 1e-8


def test_dirichlet_spectrum_matches_sine_basis_matrix():
    V = preset("gasymov", 1.0)
    mu = np.array([z for z, _ in dirichlet_spectrum(V, 6)])
    oracle = dirichlet_matrix_spectrum(GASYMOV_UNIT_COEFFS)[: mu.size]
    assert np.max(np.abs(mu - oracle)) < 1e-7


def test_random_potential_spectra_match_matrix_oracles():
    rng = np.random.default_rng(21)
    coeffs = {}
    for d in (-2, -1, 1, 2):
        coeffs[d] = complex(*rng.normal(scale=0.2, size=2))
    V = make_fourier(coeffs)
    mu = np.array([z for z, _ in dirichlet_spectrum(V, 5)])
    mu_oracle = dirichlet_matrix_spectrum(coeffs)[: mu.size]
    assert np.max(np.abs(mu - mu_oracle)) < 1e-7
    roots = flatten_roots(fiber_spectrum(V, 1.3, 4))
    oracle = fiber_matrix_spectrum(coeffs, 1.3)[: roots.size]
    assert np.max(np.abs(roots - oracle)) < 1e-7


def test_defective_and_diagonalizable_double_points():
    assert algebraic_vs_geometric(preset("zero"), 0.0, 4.0) == (2, 2)
    assert algebraic_vs_geometric(preset("gasymov", 1.0), 0.0, 4.0) == (2, 1)
    V = preset("mathieu", 0.5)
    e1 = fiber_spectrum(V, np.pi / 2, 2)[1][0]
    assert algebraic_vs_geometric(V, np.pi / 2, e1) == (1, 1)


def test_mathieu_catalog_interlaces(mathieu_catalog):
    ok, viol = check_interlacing(mathieu_catalog)
    assert ok
    assert viol <= 1e-9


def test_mathieu_antiperiodic_gap_has_first_order_width(mathieu_catalog):
    # the first gap opens linearly in the leading Fourier coefficient (1/4 here)
    a1 = mathieu_catalog.antiperiodic[0][0].real
    a2 = mathieu_catalog.antiperiodic[1][0].real
    assert 0.8 < a2 - a1 < 1.2


def test_catalog_bundles_all_families(mathieu_catalog):
    assert mathieu_catalog.k_max == 8
    assert len(mathieu_catalog.dirichlet) == 8
    assert all(m == 1 for _, m in mathieu_catalog.dirichlet)
    assert sum(m for _, m in mathieu_catalog.periodic) >= 15
    assert sum(m for _, m in mathieu_catalog.antiperiodic) >= 14
    assert len(mathieu_catalog.critical) >= 8
