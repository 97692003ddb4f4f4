"""Reference values computed without the library's ODE and root machinery.

Everything here goes through closed forms, dense matrix eigensolvers, or
plain Fourier quadrature, so agreement with the package is meaningful.
"""

from __future__ import annotations

import numpy as np


def free_sqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


def free_delta_plus(z):
    """Half-trace of the zero-potential monodromy matrix."""
    return np.cos(np.pi * free_sqrt(z))


def free_phi_pi(z):
    """phi(z, pi) for the zero potential, with the removable point at 0."""
    w = free_sqrt(z)
    small = np.abs(w) < 1e-8
    safe = np.where(small, 1.0, w)
    out = np.sin(np.pi * safe) / safe
    return np.where(small, np.pi * (1.0 - (np.pi * w) ** 2 / 6.0), out)


def free_theta_prime_pi(z):
    w = free_sqrt(z)
    return -w * np.sin(np.pi * w)


def free_delta_plus_dot(z):
    """d/dz of cos(pi sqrt(z)), finite at z = 0."""
    w = free_sqrt(z)
    small = np.abs(w) < 1e-8
    safe = np.where(small, 1.0, w)
    out = -np.pi * np.sin(np.pi * safe) / (2.0 * safe)
    return np.where(small, -np.pi**2 / 2.0 + np.pi**4 * w**2 / 24.0, out)


def fiber_matrix_spectrum(coeffs, t, n_modes=64):
    """Eigenvalues of the quasi-periodic fiber in the plane-wave basis.

    The condition g(pi) = e^{it} g(0) is solved by e^{i(2m + t/pi)x}, so
    the operator is the dense matrix (2m + t/pi)^2 delta + c_{m'-m} built
    from the Fourier coefficients c_d of V. Sorted by real part.
    """
    ms = np.arange(-(n_modes // 2), n_modes - n_modes // 2)
    A = np.zeros((n_modes, n_modes), dtype=complex)
    A[np.arange(n_modes), np.arange(n_modes)] = (2.0 * ms + t / np.pi) ** 2
    for d, c in coeffs.items():
        for i in range(n_modes):
            j = i + d
            if 0 <= j < n_modes:
                A[j, i] += c
    return np.sort_complex(np.linalg.eigvals(A))


def dirichlet_matrix_spectrum(coeffs, n_modes=64):
    """Eigenvalues of the Dirichlet problem on [0, pi] in the sine basis."""
    ks = np.arange(1, n_modes + 1)
    A = np.zeros((n_modes, n_modes), dtype=complex)
    A[np.arange(n_modes), np.arange(n_modes)] = ks.astype(complex) ** 2

    def endpoint_integral(p):
        # integral over [0, pi] of e^{ipx} for integer p
        if p == 0:
            return np.pi
        if p % 2 == 0:
            return 0.0
        return 2j / p

    for d, c in coeffs.items():
        for a, k in enumerate(ks):
            for b, l in enumerate(ks):
                val = 0.25 * (
                    endpoint_integral(2 * d + k - l)
                    + endpoint_integral(2 * d - k + l)
                    - endpoint_integral(2 * d + k + l)
                    - endpoint_integral(2 * d - k - l)
                )
                A[a, b] += c * (2.0 / np.pi) * val
    return np.sort_complex(np.linalg.eigvals(A))


def free_bandpass(gf, s_lo, s_hi, pts=4001):
    """Sharp Fourier bandpass to |xi| in [s_lo, s_hi], by direct quadrature.

    For the zero potential the band-k projection is exactly the bandpass
    to sqrt(z) in [k-1, k], both signs.
    """
    x = gf.x_grid
    h = gf.spacing

    def piece(a, b):
        xi = np.linspace(a, b, pts)
        ghat = h * np.exp(-1j * np.outer(xi, x)) @ gf.values
        return np.trapezoid(ghat[:, None] * np.exp(1j * np.outer(xi, x)), xi, axis=0)

    if s_lo == 0.0:
        total = piece(-s_hi, s_hi)
    else:
        total = piece(s_lo, s_hi) + piece(-s_hi, -s_lo)
    return total / (2.0 * np.pi)


def flatten_roots(roots):
    """Expand (value, multiplicity) pairs into a sorted flat array."""
    out = []
    for value, mult in roots:
        out.extend([value] * mult)
    return np.sort_complex(np.array(out))


def hausdorff_distance(A, B):
    """Hausdorff distance between two polylines given by complex samples."""

    def one_sided(P, Q):
        w = Q[1:] - Q[:-1]
        d = np.empty(P.size)
        for i, p in enumerate(P):
            u = p - Q[:-1]
            dn = np.abs(w) ** 2
            s = np.clip((u * np.conj(w)).real / np.where(dn == 0, 1, dn), 0, 1)
            d[i] = np.abs(u - s * w).min()
        return d.max()

    return max(one_sided(A, B), one_sided(B, A))


MATHIEU_HALF_COEFFS = {1: 0.5, -1: 0.5}  # 2q cos(2x) with q = 1/2
GASYMOV_UNIT_COEFFS = {1: 1.0}  # e^{2ix}


def draw_disc(rng, n, radius=100.0):
    """Uniform complex samples from the disc |z| <= radius."""
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
