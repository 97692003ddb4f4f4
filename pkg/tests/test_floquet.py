"""Monodromy, discriminant jets, Floquet solutions, and the resolvent kernel."""

from __future__ import annotations

import numpy as np

from hillspec import (
    delta_dot_lagrange,
    floquet_solutions,
    fundamental_system,
    greens_function,
    greens_matrix,
    monodromy,
    monodromy_batch,
    preset,
)
from oracles import draw_disc, free_delta_plus, free_delta_plus_dot, free_phi_pi


def test_free_monodromy_closed_forms():
    V = preset("zero")
    z = 4.5
    md = monodromy(V, z)
    s = np.sqrt(z)
    assert abs(md.delta_plus - np.cos(np.pi * s)) < 1e-12
    assert abs(md.m12 - np.sin(np.pi * s) / s) < 1e-12
    assert abs(md.m21 + s * np.sin(np.pi * s)) < 1e-12
    assert abs(md.delta_minus) < 1e-12
    assert abs(md.delta_plus_dot + np.pi * np.sin(np.pi * s) / (2 * s)) < 1e-12
    # second derivative of cos(pi sqrt(z))
    d2 = -np.pi / 2 * (np.cos(np.pi * s) * np.pi / (2 * z) - np.sin(np.pi * s) / (2 * s**3))
    assert abs(md.delta_plus_ddot - d2) < 1e-10


def test_free_monodromy_at_zero_energy():
    md = monodromy(preset("zero"), 0.0)
    assert abs(md.m11 - 1.0) < 1e-12
    assert abs(md.m12 - np.pi) < 1e-12
    assert abs(md.m21) < 1e-12
    assert abs(md.delta_plus_dot + np.pi**2 / 2) < 1e-10


def test_monodromy_batch_agrees_with_scalar_calls():
    V = preset("mathieu", 0.5)
    rng = np.random.default_rng(5)
    z = draw_disc(rng, 12, radius=40.0)
    mb = monodromy_batch(V, z)
    for i, zz in enumerate(z):
        md = monodromy(V, complex(zz))
        scale = 1 + abs(md.m12) + abs(md.m21)
        assert abs(mb.m11[i] - md.m11) / scale < 1e-12
        assert abs(mb.m12[i] - md.m12) / scale < 1e-12
        assert abs(mb.m21[i] - md.m21) / scale < 1e-12
        assert abs(mb.delta_plus_dot[i] - md.delta_plus_dot) / (1 + abs(md.delta_plus_dot)) < 1e-11


def test_free_closed_forms_on_random_disc():
    V = preset("zero")
    rng = np.random.default_rng(2)
    z = draw_disc(rng, 60)
    mb = monodromy_batch(V, z)
    dp = free_delta_plus(z)
    ph = free_phi_pi(z)
    dd = free_delta_plus_dot(z)
    assert np.max(np.abs(mb.delta_plus - dp) / (1 + np.abs(dp))) < 1e-10
    assert np.max(np.abs(mb.m12 - ph) / (1 + np.abs(ph))) < 1e-10
    assert np.max(np.abs(mb.delta_plus_dot - dd) / (1 + np.abs(dd))) < 1e-10


def test_wronskian_is_one_along_fundamental_system():
    V = preset("mathieu", 0.3)
    xs = np.linspace(0, np.pi, 33)
    fd = fundamental_system(V, 1 + 0.5j, xs)
    w = fd.theta * fd.phi_prime - fd.theta_prime * fd.phi
    assert np.abs(w - 1).max() < 1e-10
    assert fd.theta[0] == 1.0 and fd.phi[0] == 0.0
    assert fd.theta_prime[0] == 0.0 and fd.phi_prime[0] == 1.0


def test_fundamental_system_z_derivatives_match_finite_differences():
    V = preset("mathieu", 0.4)
    z = 2.3 + 0.4j
    h = 1e-5
    xs = np.linspace(0, np.pi, 9)
    fd = fundamental_system(V, z, xs)
    fp = fundamental_system(V, z + h, xs)
    fm = fundamental_system(V, z - h, xs)
    assert np.abs((fp.theta - fm.theta) / (2 * h) - fd.dtheta_dz).max() < 1e-6
    assert np.abs((fp.phi - fm.phi) / (2 * h) - fd.dphi_dz).max() < 1e-6
    assert np.abs((fp.phi_prime - fm.phi_prime) / (2 * h) - fd.dphi_prime_dz).max() < 1e-6


def test_lagrange_derivative_matches_variational_derivative():
    # the quadrature route stays accurate while Im sqrt(z) is moderate
    assert abs(delta_dot_lagrange(preset("zero"), 4.5)
               - monodromy(preset("zero"), 4.5).delta_plus_dot) < 1e-12
    V = preset("mathieu", 0.3)
    md = monodromy(V, 2 + 1j)
    ld = delta_dot_lagrange(V, 2 + 1j)
    assert abs(ld - md.delta_plus_dot) / (1 + abs(md.delta_plus_dot)) < 1e-10


def test_gasymov_discriminant_is_free_but_not_the_antitrace():
    V = preset("gasymov", 1.0)
    for z in (0.7 + 0.3j, 5.0 + 0j, -3.0 + 1j):
        md = monodromy(V, z)
        assert abs(md.delta_plus - np.cos(np.pi * np.sqrt(complex(z)))) < 1e-10
        assert abs(md.delta_minus) < 1e-10
    # the potential is not zero: phi(pi) differs from the free one
    md1 = monodromy(V, 1.0)
    assert abs(md1.m12 - free_phi_pi(1.0)) > 0.5


def test_multiplier_branch_contracts_off_spectrum():
    V = preset("mathieu", 0.5)
    rng = np.random.default_rng(8)
    for _ in range(6):
        z = complex(rng.uniform(-10, 40), rng.choice([-1, 1]) * rng.uniform(1.0, 8.0))
        md = monodromy(V, z)
        assert abs(md.rho_plus * md.rho_minus - 1) < 1e-9 * (1 + abs(md.delta_plus) ** 2)
        assert abs(md.rho_plus) < 1.0
        assert abs(md.rho_plus) <= abs(md.rho_minus)


def test_free_floquet_solutions_are_plane_waves():
    V = preset("zero")
    z = -2.0 + 0.5j
    xg = np.linspace(-2 * np.pi, 2 * np.pi, 41)
    pp, pm, rp, rm = floquet_solutions(V, z, xg)
    rz = np.sqrt(complex(z))
    if (1j * rz * np.pi).real > 0:  # fix the decaying branch
        rz = -rz
    e_plus = np.exp(1j * rz * xg)
    e_minus = np.exp(-1j * rz * xg)
    assert np.abs(pp - e_plus).max() / np.abs(e_plus).max() < 1e-9
    assert np.abs(pm - e_minus).max() / np.abs(e_minus).max() < 1e-9
    assert abs(rp * rm - 1) < 1e-12


def test_floquet_solutions_quasi_periodicity():
    V = preset("mathieu", 0.3)
    z = -1.5 + 0.8j
    xg = np.linspace(0, 3 * np.pi, 61)
    pp, pm, rp, rm = floquet_solutions(V, z, xg)
    shift = 20  # xg[20] = pi
    assert np.abs(pp[shift:] - rp * pp[:-shift]).max() < 1e-8
    assert np.abs(pm[shift:] - rm * pm[:-shift]).max() / np.abs(pm).max() < 1e-8


def test_free_resolvent_kernel_closed_form():
    V = preset("zero")
    for x, y in ((0.3, 1.7), (-2.0, 5.5), (4.0, 4.0)):
        g = greens_function(V, -1.0, x, y)
        assert abs(g - np.exp(-abs(x - y)) / 2) < 1e-10


def test_resolvent_kernel_symmetry_and_matrix_consistency():
    V = preset("mathieu", 0.3)
    z = -2.0 + 0.3j
    assert abs(greens_function(V, z, 0.4, 2.9) - greens_function(V, z, 2.9, 0.4)) < 1e-10
    xg = np.linspace(-1.0, 2.0, 7)
    K = greens_matrix(V, z, xg)
    assert K.shape == (7, 7)
    for i in (0, 3, 6):
        for j in (1, 5):
            assert abs(K[i, j] - greens_function(V, z, float(xg[i]), float(xg[j]))) < 1e-10
