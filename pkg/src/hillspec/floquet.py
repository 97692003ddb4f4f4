"""Fundamental system, monodromy data, Floquet solutions, Green's function.

The fundamental system theta, phi of -y'' + V y = z y is normalized by

    theta(z, 0) = phi'(z, 0) = 1,   theta'(z, 0) = phi(z, 0) = 0,

so the transfer matrix from 0 to x is [[theta, phi], [theta', phi']].
The monodromy matrix is its value at x = pi; its half-trace is the
discriminant Delta_plus, the half-difference of the diagonal is
Delta_minus, and the Floquet multipliers are

    rho_pm = Delta_plus +- i sqrt(1 - Delta_plus^2),

with the square-root branch fixed by |rho_plus| <= 1 <= |rho_minus|.
On the spectrum both multipliers are unimodular; the canonical tie
break takes the principal square root (so rho_plus = exp(i t) with
t in [0, pi] on a band of a real potential).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_legendre

from .config import DEFAULT_CONFIG, RunConfig
from .errors import ConfigError, DirichletPointError, NearSpectrumError
from .potential import Potential
from .propagator import monodromy_jets, transfer_grid

__all__ = [
    "FundamentalData",
    "MonodromyData",
    "MonodromyBatch",
    "fundamental_system",
    "monodromy",
    "monodromy_batch",
    "branch_root",
    "delta_dot_lagrange",
    "floquet_solutions",
    "greens_function",
    "greens_matrix",
    "gl_panels",
]

_DIRICHLET_EPS = 1e-12


@dataclass(frozen=True)
class FundamentalData:
    """Fundamental system and its z-derivatives sampled on a grid.

    Arrays are aligned with x_grid. The z-derivative fields solve the
    variational system obtained by differentiating the equation in z.
    """

    z: complex
    x_grid: NDArray
    theta: NDArray
    phi: NDArray
    theta_prime: NDArray
    phi_prime: NDArray
    dtheta_dz: NDArray
    dphi_dz: NDArray
    dtheta_prime_dz: NDArray
    dphi_prime_dz: NDArray


@dataclass(frozen=True)
class MonodromyData:
    """Monodromy matrix entries and derived Floquet quantities at one z.

    m_plus and m_minus are the Floquet coefficients
    (-Delta_minus +- i sqrt(1 - Delta_plus^2)) / m12; they are NaN when
    m12 = 0 (a Dirichlet point coinciding with a periodic point).
    """

    z: complex
    m11: complex
    m12: complex
    m21: complex
    m22: complex
    delta_plus: complex
    delta_minus: complex
    delta_plus_dot: complex
    delta_plus_ddot: complex
    rho_plus: complex
    rho_minus: complex
    m_plus: complex
    m_minus: complex


@dataclass(frozen=True)
class MonodromyBatch:
    """Vectorized monodromy data over a batch of spectral points.

    The *_dz fields are z-derivatives of the matrix entries from the
    variational system (m12_dz drives Newton refinement of Dirichlet
    roots, the discriminant jets drive everything else).
    """

    z: NDArray
    m11: NDArray
    m12: NDArray
    m21: NDArray
    m22: NDArray
    delta_plus: NDArray
    delta_minus: NDArray
    delta_plus_dot: NDArray
    delta_plus_ddot: NDArray
    m11_dz: NDArray
    m12_dz: NDArray
    m21_dz: NDArray
    m22_dz: NDArray

    def at(self, i: int, config: RunConfig = DEFAULT_CONFIG) -> MonodromyData:
        """Scalar MonodromyData for batch index i."""
        return _assemble(
            complex(self.z[i]),
            complex(self.m11[i]),
            complex(self.m12[i]),
            complex(self.m21[i]),
            complex(self.m22[i]),
            complex(self.delta_plus_dot[i]),
            complex(self.delta_plus_ddot[i]),
        )


def branch_root(delta_plus, prefer=None, tie_tol: float = 1e-12):
    """Square root s of 1 - Delta_plus^2 with |Delta_plus + i s| <= 1.

    Ties (both candidates equally unimodular, i.e. z on the spectrum)
    are resolved toward ``prefer`` when given (path continuity for arc
    tracing), otherwise canonically by the principal square root.
    Vectorized over delta_plus.
    """
    dp = np.asarray(delta_plus, dtype=complex)
    s = np.sqrt(1.0 - dp * dp)
    r_plus = np.abs(dp + 1j * s)
    r_minus = np.abs(dp - 1j * s)
    tie = np.abs(r_plus - r_minus) <= tie_tol * (r_plus + r_minus + 1.0)
    flip = (r_plus > r_minus) & ~tie
    if prefer is not None:
        pref = np.broadcast_to(np.asarray(prefer, dtype=complex), s.shape)
        flip = flip | (tie & (np.abs(-s - pref) < np.abs(s - pref)))
    out = np.where(flip, -s, s)
    if np.isscalar(delta_plus) or out.ndim == 0:
        return complex(out)
    return out


def fundamental_system(
    V: Potential,
    z: complex,
    x_grid,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> FundamentalData:
    """Integrate the fundamental system and its z-derivatives on x_grid.

    x_grid must be increasing and contained in [0, pi]. The first grid
    point should be 0 for the normalization invariants to be visible in
    the output arrays.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size == 0:
        raise ConfigError("x_grid must be a non-empty 1-d array")
    if x_grid[0] < 0.0 or x_grid[-1] > np.pi + 1e-12:
        raise ConfigError("x_grid must lie in [0, pi]")
    M, Mz, _ = transfer_grid(V, complex(z), x_grid, tol=tol, config=config)
    M = M[:, 0]
    Mz = Mz[:, 0]
    return FundamentalData(
        z=complex(z),
        x_grid=x_grid,
        theta=M[:, 0, 0].copy(),
        phi=M[:, 0, 1].copy(),
        theta_prime=M[:, 1, 0].copy(),
        phi_prime=M[:, 1, 1].copy(),
        dtheta_dz=Mz[:, 0, 0].copy(),
        dphi_dz=Mz[:, 0, 1].copy(),
        dtheta_prime_dz=Mz[:, 1, 0].copy(),
        dphi_prime_dz=Mz[:, 1, 1].copy(),
    )


def _assemble(
    z: complex,
    m11: complex,
    m12: complex,
    m21: complex,
    m22: complex,
    dot: complex,
    ddot: complex,
    prefer: complex | None = None,
) -> MonodromyData:
    dp = (m11 + m22) / 2.0
    dm = (m11 - m22) / 2.0
    s = branch_root(dp, prefer=prefer)
    rho_plus = dp + 1j * s
    rho_minus = dp - 1j * s
    if m12 != 0:
        m_plus = (-dm + 1j * s) / m12
        m_minus = (-dm - 1j * s) / m12
    else:
        m_plus = m_minus = complex("nan")
    return MonodromyData(
        z=z,
        m11=m11,
        m12=m12,
        m21=m21,
        m22=m22,
        delta_plus=dp,
        delta_minus=dm,
        delta_plus_dot=dot,
        delta_plus_ddot=ddot,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        m_plus=m_plus,
        m_minus=m_minus,
    )


def monodromy(
    V: Potential,
    z: complex,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    prefer_root: complex | None = None,
) -> MonodromyData:
    """Monodromy matrix with discriminant jets and Floquet multipliers.

    prefer_root feeds the branch tie-break of sqrt(1 - Delta_plus^2)
    for continuity along a caller-declared path (used by arc tracing).
    """
    M, Mz, Mzz = monodromy_jets(V, complex(z), tol=tol, config=config)
    M, Mz, Mzz = M[0], Mz[0], Mzz[0]
    dot = (Mz[0, 0] + Mz[1, 1]) / 2.0
    ddot = (Mzz[0, 0] + Mzz[1, 1]) / 2.0
    return _assemble(
        complex(z), M[0, 0], M[0, 1], M[1, 0], M[1, 1], dot, ddot, prefer=prefer_root
    )


def monodromy_batch(
    V: Potential,
    z,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> MonodromyBatch:
    """Monodromy entries and discriminant jets for a batch of z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    M, Mz, Mzz = monodromy_jets(V, z, tol=tol, config=config)
    return MonodromyBatch(
        z=z,
        m11=M[:, 0, 0].copy(),
        m12=M[:, 0, 1].copy(),
        m21=M[:, 1, 0].copy(),
        m22=M[:, 1, 1].copy(),
        delta_plus=(M[:, 0, 0] + M[:, 1, 1]) / 2.0,
        delta_minus=(M[:, 0, 0] - M[:, 1, 1]) / 2.0,
        delta_plus_dot=(Mz[:, 0, 0] + Mz[:, 1, 1]) / 2.0,
        delta_plus_ddot=(Mzz[:, 0, 0] + Mzz[:, 1, 1]) / 2.0,
        m11_dz=Mz[:, 0, 0].copy(),
        m12_dz=Mz[:, 0, 1].copy(),
        m21_dz=Mz[:, 1, 0].copy(),
        m22_dz=Mz[:, 1, 1].copy(),
    )


def gl_panels(a: float, b: float, n_panels: int, order: int = 16) -> tuple[NDArray, NDArray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    xg, wg = roots_legendre(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _quadrature_panels(V: Potential, z: complex) -> int:
    kappa = np.sqrt(abs(z) + V.scale() + 1.0)
    return max(4, int(np.ceil(kappa)))


def delta_dot_lagrange(
    V: Potential,
    z: complex,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> complex:
    """Discriminant derivative via the Lagrange-identity quadrature.

    Evaluates -(1/2) * integral over one period of

        phi_pi theta^2 - 2 Delta_minus theta phi - theta'_pi phi^2,

    which equals Delta_plus_dot and is the quadrature image of the
    product of the two Floquet solutions (the Dirichlet denominators
    cancel once the product is cleared). Serves as an independent
    cross-check of the variational derivative.
    """
    z = complex(z)
    md = monodromy(V, z, tol=tol, config=config)
    if abs(md.m12) < _DIRICHLET_EPS:
        raise DirichletPointError(f"phi(z, pi) = {md.m12:.3e} at z = {z}")
    nodes, weights = gl_panels(0.0, np.pi, _quadrature_panels(V, z))
    M, _, _ = transfer_grid(V, z, nodes, tol=tol, config=config)
    theta = M[:, 0, 0, 0]
    phi = M[:, 0, 0, 1]
    integrand = (
        md.m12 * theta * theta
        - 2.0 * md.delta_minus * theta * phi
        - md.m21 * phi * phi
    )
    return complex(-0.5 * np.sum(weights * integrand))


def _reduce_cells(x) -> tuple[NDArray, NDArray]:
    """Split points into period-cell indices n and residues r in [0, pi)."""
    x = np.asarray(x, dtype=float)
    n = np.floor(x / np.pi).astype(int)
    r = x - n * np.pi
    # guard against r == pi from rounding at cell boundaries
    bump = r >= np.pi * (1.0 - 1e-15)
    n = np.where(bump, n + 1, n)
    r = np.where(bump, 0.0, r)
    return n, r


def _cell_values(
    V: Potential,
    z: complex,
    residues: NDArray,
    tol: float | None,
    config: RunConfig,
) -> tuple[NDArray, NDArray]:
    """theta and phi at the unique residues, mapped back to input order."""
    uniq, inv = np.unique(residues, return_inverse=True)
    grid = uniq
    if grid[0] > 0.0:
        grid = np.concatenate([[0.0], grid])
        offset = 1
    else:
        offset = 0
    M, _, _ = transfer_grid(V, z, grid, tol=tol, config=config)
    theta = M[offset:, 0, 0, 0][inv]
    phi = M[offset:, 0, 0, 1][inv]
    return theta, phi


def floquet_solutions(
    V: Potential,
    z: complex,
    x_grid,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> tuple[NDArray, NDArray, complex, complex]:
    """Floquet solutions psi_pm = theta + m_pm phi on an arbitrary grid.

    Points outside [0, pi) are reached through the quasi-periodicity
    psi_pm(x + pi) = rho_pm psi_pm(x), so the integration never leaves
    one period cell. Returns (psi_plus, psi_minus, m_plus, m_minus).
    """
    z = complex(z)
    x_grid = np.asarray(x_grid, dtype=float)
    md = monodromy(V, z, tol=tol, config=config)
    if abs(md.m12) < _DIRICHLET_EPS * (1.0 + abs(md.m11) + abs(md.m22)):
        raise DirichletPointError(f"phi(z, pi) = {md.m12:.3e} at z = {z}")
    cells, residues = _reduce_cells(x_grid)
    theta, phi = _cell_values(V, z, residues, tol, config)
    psi_plus_cell = theta + md.m_plus * phi
    psi_minus_cell = theta + md.m_minus * phi
    psi_plus = psi_plus_cell * md.rho_plus**cells
    psi_minus = psi_minus_cell * md.rho_minus**cells
    return psi_plus, psi_minus, md.m_plus, md.m_minus


def _greens_core(
    md: MonodromyData,
    s: complex,
    theta_a: NDArray,
    phi_a: NDArray,
    theta_b: NDArray,
    phi_b: NDArray,
) -> NDArray:
    """Cleared kernel phi_pi psi_minus(a) psi_plus(b) / (-2 i s).

    The product phi_pi psi_minus psi_plus expands into monodromy
    entries only, so Dirichlet-point singularities never appear.
    """
    n = (
        md.m12 * theta_a * theta_b
        + (-md.delta_minus - 1j * s) * phi_a * theta_b
        + (-md.delta_minus + 1j * s) * theta_a * phi_b
        - md.m21 * phi_a * phi_b
    )
    return -n / (2j * s)


def greens_function(
    V: Potential,
    z: complex,
    x: float,
    y: float,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> complex:
    """Resolvent kernel G(z, x, y) of H - z for z off the spectrum.

    Symmetric in (x, y); arguments are reduced by quasi-periodicity to
    one period cell, so |x|, |y| may be large. Raises NearSpectrumError
    when 1 - Delta_plus^2 is too close to 0 to fix the branch.
    """
    g = greens_matrix(V, z, np.array([x, y], dtype=float), tol=tol, config=config)
    return complex(g[0, 1])


def greens_matrix(
    V: Potential,
    z: complex,
    x_grid,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> NDArray:
    """Green's function evaluated on x_grid x x_grid.

    Returns the matrix G[i, j] = G(z, x_grid[i], x_grid[j]); the grid
    may be any real array (reduced per cell internally).
    """
    z = complex(z)
    x_grid = np.asarray(x_grid, dtype=float)
    md = monodromy(V, z, tol=tol, config=config)
    disc = 1.0 - md.delta_plus**2
    if abs(disc) < 1e-10 * (1.0 + abs(md.delta_plus)) ** 2:
        raise NearSpectrumError(
            f"1 - Delta_plus^2 = {disc:.3e} at z = {z}; branch undefined"
        )
    s = branch_root(md.delta_plus)
    cells, residues = _reduce_cells(x_grid)
    theta, phi = _cell_values(V, z, residues, tol, config)
    xi = x_grid[:, None]
    xj = x_grid[None, :]
    swap = xi > xj
    # indices of the smaller (a) and larger (b) argument in each pair
    ia = np.where(swap, np.arange(x_grid.size)[None, :], np.arange(x_grid.size)[:, None])
    ib = np.where(swap, np.arange(x_grid.size)[:, None], np.arange(x_grid.size)[None, :])
    core = _greens_core(md, s, theta[ia], phi[ia], theta[ib], phi[ib])
    k = cells[ib] - cells[ia]
    rho = md.rho_plus
    kmax = int(k.max()) if k.size else 0
    powers = np.concatenate([[1.0 + 0j], np.cumprod(np.full(max(kmax, 0), rho))])
    return core * powers[k]
