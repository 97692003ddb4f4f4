"""Spectral catalogs of a complex Hill operator.

Locates Dirichlet, periodic, antiperiodic and fiber spectra together
with the critical points of the discriminant, all with multiplicities
certified by boundary winding counts. Search rectangles come from the
semi-strip bound on the spectrum; strip separators come from the
square-root asymptotics of the eigenvalue branches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, RunConfig
from .errors import ConfigError, NonconvergenceError, NotAnEigenvalueError
from .floquet import monodromy, monodromy_batch
from .potential import Potential, semistrip_numbers, shift_to_zero_mean
from .rootfind import Evaluator, Rect, find_roots_in_rect, winding_number

__all__ = [
    "SpectraCatalog",
    "discriminant_evaluator",
    "dirichlet_evaluator",
    "critical_evaluator",
    "dirichlet_spectrum",
    "periodic_antiperiodic_spectrum",
    "critical_points",
    "fiber_spectrum",
    "algebraic_vs_geometric",
    "spectra_catalog",
    "check_interlacing",
]

Root = tuple[complex, int]


@dataclass(frozen=True)
class SpectraCatalog:
    """Joint window of the spectra attached to one potential.

    dirichlet: (mu_k, mult), periodic/antiperiodic: (lambda, mult) for
    discriminant values +1 / -1, critical: (delta_k, gamma_k, order)
    where gamma_k is the critical value. All lists are ordered by real
    part (ties by imaginary part) and live inside search_region.
    """

    dirichlet: tuple[Root, ...]
    periodic: tuple[Root, ...]
    antiperiodic: tuple[Root, ...]
    critical: tuple[tuple[complex, complex, int], ...]
    k_max: int
    search_region: Rect


def discriminant_evaluator(
    V: Potential,
    target: complex = 0.0,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> Evaluator:
    """Evaluator z -> (Delta_plus(z) - target, d/dz Delta_plus(z))."""

    def f(z):
        b = monodromy_batch(V, z, tol=tol, config=config)
        return b.delta_plus - target, b.delta_plus_dot

    return f


def dirichlet_evaluator(
    V: Potential,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> Evaluator:
    """Evaluator z -> (phi(z, pi), d/dz phi(z, pi)); zeros are the Dirichlet spectrum."""

    def f(z):
        b = monodromy_batch(V, z, tol=tol, config=config)
        return b.m12, b.m12_dz

    return f


def critical_evaluator(
    V: Potential,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> Evaluator:
    """Evaluator z -> (d/dz Delta_plus, d2/dz2 Delta_plus); zeros are critical points."""

    def f(z):
        b = monodromy_batch(V, z, tol=tol, config=config)
        return b.delta_plus_dot, b.delta_plus_ddot

    return f


def _region(V: Potential, re_hi: float, margin: float) -> Rect:
    m1, m2, m3 = semistrip_numbers(V)
    return (m3 - margin, re_hi, m1 - margin, m2 + margin)


def _collect(
    f: Evaluator,
    V: Potential,
    want: int,
    re_hi: float,
    cuts: list[float],
    shift: float,
    config: RunConfig,
    margin: float,
    label: str,
) -> tuple[list[Root], Rect]:
    """Roots of f in the family's semi-strip window, with >= want total mult.

    Undercounts widen the window (larger margins, real cap pushed one
    asymptotic group out) before giving up: the caps are asymptotic
    predictions and low-index branches of a strongly coupled potential
    can drift past them.
    """
    for attempt in range(3):
        rect = _region(V, re_hi, margin * (1.0 + attempt))
        inner = [c for c in cuts if rect[0] < c < rect[1]]
        found = find_roots_in_rect(f, rect, config=config, initial_cuts=inner)
        if sum(m for _, m in found) >= want:
            return found, rect
        re_hi = (np.sqrt(max(re_hi - shift, 1.0)) + 2.0) ** 2 + shift
    raise NonconvergenceError(
        f"{label}: found fewer than {want} roots in the widened window up to Re z = {re_hi:g}"
    )


def _truncate(found: list[Root], want: int) -> list[Root]:
    # never split a root: the last kept entry may overshoot the target count
    out: list[Root] = []
    acc = 0
    for z, m in found:
        if acc >= want:
            break
        out.append((z, m))
        acc += m
    return out


def dirichlet_spectrum(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> list[Root]:
    """First k_max Dirichlet eigenvalues (mu_k, mult), ordered by real part.

    Strip separators sit at (j + 1/2)^2 + Re<V>, the asymptotic midpoints
    between consecutive eigenvalue groups mu_j ~ j^2 + <V>.
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    shift = V.mean.real
    f = dirichlet_evaluator(V, tol=tol, config=config)
    re_hi = (k_max + 0.5) ** 2 + shift
    cuts = [(j + 0.5) ** 2 + shift for j in range(1, k_max + 8)]
    found, _ = _collect(f, V, k_max, re_hi, cuts, shift, config, 1.0, "dirichlet_spectrum")
    return _truncate(found, k_max)


def _polish_pairs(
    V: Potential,
    roots: list[Root],
    target: float,
    tol: float | None,
    config: RunConfig,
) -> list[Root]:
    """Re-polish multiplicity-2 roots on the discriminant derivative.

    A double periodic/antiperiodic point is a critical point of the
    discriminant, so Newton on Delta_plus_dot (derivative Delta_plus_ddot)
    recovers the digits that even-multiplicity refinement on the
    discriminant itself loses to the sqrt(eps) floor.
    """
    idx = [i for i, (_, m) in enumerate(roots) if m == 2]
    if not idx:
        return roots
    orig = np.array([roots[i][0] for i in idx], dtype=complex)
    zz = orig.copy()
    for _ in range(8):
        b = monodromy_batch(V, zz, tol=tol, config=config)
        small = np.abs(b.delta_plus_ddot) < 1e-8
        step = np.where(small, 0.0, b.delta_plus_dot / np.where(small, 1.0, b.delta_plus_ddot))
        zz = zz - step
        if np.all(np.abs(step) <= 1e-13 * (1.0 + np.abs(zz))):
            break
    b = monodromy_batch(V, zz, tol=tol, config=config)
    still_root = np.abs(b.delta_plus - target) <= 1e-7 * (1.0 + abs(target))
    nearby = np.abs(zz - orig) <= 1e-5 * (1.0 + np.abs(orig))
    out = list(roots)
    for j, i in enumerate(idx):
        if still_root[j] and nearby[j]:
            out[i] = (complex(zz[j]), 2)
    return out


def periodic_antiperiodic_spectrum(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> tuple[list[Root], list[Root]]:
    """Periodic and antiperiodic eigenvalues of a zero-mean potential.

    Returns the lowest 2*k_max - 1 periodic eigenvalues (lambda_0 plus
    the pair groups near (2j)^2) and the lowest 2*k_max - 2 antiperiodic
    ones (pair groups near (2j-1)^2), both counted with multiplicity.
    The mean must be removed by the caller: the window seeds and strip
    separators assume the k^2 asymptotics of the shifted problem.
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    if abs(V.mean) > 1e-12 * (1.0 + V.scale()):
        raise ConfigError("periodic_antiperiodic_spectrum requires a zero-mean potential")

    f_per = discriminant_evaluator(V, 1.0, tol=tol, config=config)
    want_per = 2 * k_max - 1
    re_hi = float((2 * k_max - 1) ** 2)
    # odd squares separate lambda_0 | lambda_2 pair | lambda_4 pair | ...
    cuts = [float((2 * j - 1) ** 2) for j in range(1, k_max + 8)]
    found, _ = _collect(f_per, V, want_per, re_hi, cuts, 0.0, config, 1.0, "periodic spectrum")
    periodic = _truncate(found, want_per)
    periodic = _polish_pairs(V, periodic, 1.0, tol, config)

    antiperiodic: list[Root] = []
    if k_max >= 2:
        f_anti = discriminant_evaluator(V, -1.0, tol=tol, config=config)
        want_anti = 2 * k_max - 2
        re_hi = float((2 * k_max - 2) ** 2)
        # even squares separate the lambda_1 pair | lambda_3 pair | ...
        cuts = [float((2 * j) ** 2) for j in range(1, k_max + 8)]
        found, _ = _collect(
            f_anti, V, want_anti, re_hi, cuts, 0.0, config, 1.0, "antiperiodic spectrum"
        )
        antiperiodic = _truncate(found, want_anti)
        antiperiodic = _polish_pairs(V, antiperiodic, -1.0, tol, config)

    return periodic, antiperiodic


def critical_points(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> list[tuple[complex, complex, int]]:
    """First k_max critical points (delta_k, gamma_k, order) of the discriminant.

    order is the multiplicity of delta_k as a zero of Delta_plus_dot; a
    zero of order m signals m + 1 coalescing fiber eigenvalues at the
    critical value gamma_k = Delta_plus(delta_k).
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    shift = V.mean.real
    f = critical_evaluator(V, tol=tol, config=config)
    re_hi = (k_max + 0.5) ** 2 + shift
    cuts = [(j + 0.5) ** 2 + shift for j in range(1, k_max + 8)]
    # critical points are not eigenvalues: the numerical-range bound does
    # not pin them to the semi-strip, so the imaginary margin is doubled
    found, _ = _collect(f, V, k_max, re_hi, cuts, shift, config, 2.0, "critical_points")
    found = _truncate(found, k_max)
    if not found:
        return []
    b = monodromy_batch(V, np.array([z for z, _ in found]), tol=tol, config=config)
    return [(z, complex(g), m) for (z, m), g in zip(found, b.delta_plus)]


def fiber_spectrum(
    V: Potential,
    t: float,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> list[Root]:
    """Lowest eigenvalues of the fiber operator H(t): roots of Delta_plus = cos t.

    Returns the first 2*k_max - 1 roots counted with multiplicity,
    never splitting a root: at t = 0 or pi a full closing pair at the
    truncation edge is kept, so the total can reach 2*k_max.
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    t = float(t)
    if not -1e-12 <= t <= 2.0 * np.pi + 1e-12:
        raise ConfigError("t must lie in [0, 2*pi]")
    shift = V.mean.real
    ct = float(np.cos(t))
    f = discriminant_evaluator(V, ct, tol=tol, config=config)
    want = 2 * k_max - 1
    re_hi = (2 * k_max - 1) ** 2 + 2.0 * k_max + shift
    # integer squares separate the branches (2n +- t/pi)^2, but only
    # where the discriminant value (-1)^j at j^2 stays away from cos t
    cuts = [
        float(j * j) + shift
        for j in range(1, 2 * k_max + 8)
        if abs(ct - (-1.0) ** j) > 0.3
    ]
    found, _ = _collect(f, V, want, re_hi, cuts, shift, config, 1.0, "fiber_spectrum")
    roots = _truncate(found, want)
    if abs(abs(ct) - 1.0) < 1e-12:
        roots = _polish_pairs(V, roots, ct, tol, config)
    return roots


def algebraic_vs_geometric(
    V: Potential,
    t: float,
    E: complex,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> tuple[int, int]:
    """Algebraic and geometric multiplicity of the fiber eigenvalue E of H(t).

    Algebraic = order of E as a zero of Delta_plus - cos t (from the
    discriminant jets, falling back to a winding count for order >= 3).
    Geometric = 2 - rank(M(E) - e^{it} I), with singular values below
    1e-8 of the matrix scale counted as zero; the absolute floor keeps
    roundoff in an exactly scalar M(E) - e^{it} I from reading as rank 1.
    """
    E = complex(E)
    md = monodromy(V, E, tol=tol, config=config)
    ct = complex(np.cos(t))
    if abs(md.delta_plus - ct) > 1e-6 * (1.0 + abs(md.delta_plus)):
        raise NotAnEigenvalueError(
            f"Delta_plus({E}) = {md.delta_plus}, expected cos t = {ct}"
        )
    if abs(md.delta_plus_dot) > 1e-6:
        alg = 1
    elif abs(md.delta_plus_ddot) > 1e-6:
        alg = 2
    else:
        f = discriminant_evaluator(V, ct, tol=tol, config=config)
        r = 1e-3 * (1.0 + abs(E))
        alg = winding_number(f, (E.real - r, E.real + r, E.imag - r, E.imag + r), config)

    rho = complex(np.exp(1j * t))
    A = np.array([[md.m11 - rho, md.m12], [md.m21, md.m22 - rho]], dtype=complex)
    s = np.linalg.svd(A, compute_uv=False)
    m_scale = max(
        1.0, abs(md.m11), abs(md.m12), abs(md.m21), abs(md.m22), abs(rho)
    )
    floor = 1e4 * (config.ode_tol if tol is None else tol) * m_scale
    rank = int(np.sum(s > 1e-8 * s[0] + floor))
    return alg, 2 - rank


def spectra_catalog(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> SpectraCatalog:
    """Assemble the Dirichlet/periodic/antiperiodic/critical window for V.

    The periodic and antiperiodic families are computed on the zero-mean
    shift of V and translated back by the mean, which is exact for the
    discriminant.
    """
    dirichlet = dirichlet_spectrum(V, k_max, tol=tol, config=config)
    V0, mean = shift_to_zero_mean(V)
    per0, anti0 = periodic_antiperiodic_spectrum(V0, k_max, tol=tol, config=config)
    periodic = [(z + mean, m) for z, m in per0]
    antiperiodic = [(z + mean, m) for z, m in anti0]
    critical = critical_points(V, k_max, tol=tol, config=config)

    m1, m2, m3 = semistrip_numbers(V)
    re_hi = max(
        (k_max + 2) ** 2 + V.mean.real,
        (2 * k_max - 1) ** 2 + 2.0 * k_max + V.mean.real,
    )
    region = (m3 - 2.0, re_hi, m1 - 2.0, m2 + 2.0)
    return SpectraCatalog(
        dirichlet=tuple(dirichlet),
        periodic=tuple(periodic),
        antiperiodic=tuple(antiperiodic),
        critical=tuple(critical),
        k_max=k_max,
        search_region=region,
    )


def check_interlacing(catalog: SpectraCatalog, tol: float = 1e-9) -> tuple[bool, float]:
    """Verify the real-potential interlacing chain on a catalog.

    Checks lambda_0 <= lambda_1^- <= mu_1 <= lambda_1^+ <= lambda_2^- <=
    mu_2 <= lambda_2^+ <= ... over the window where all three families
    are present, and that every point is real. Returns (ok, max
    violation), where the violation folds in any imaginary part.
    """

    def expand(entries) -> tuple[list[float], float]:
        reals: list[float] = []
        imag = 0.0
        for entry in entries:
            z, m = entry[0], entry[1]
            reals.extend([z.real] * m)
            imag = max(imag, abs(z.imag))
        return sorted(reals), imag

    per, im_p = expand(catalog.periodic)
    anti, im_a = expand(catalog.antiperiodic)
    mu, im_m = expand(catalog.dirichlet)
    violation = max(im_p, im_a, im_m)
    if not per:
        return violation <= tol, violation

    chain = [per[0]]
    ip, ia = 1, 0
    for k in range(1, len(mu) + 1):
        if k % 2 == 1:
            if ia + 2 > len(anti):
                break
            lo, hi = anti[ia], anti[ia + 1]
            ia += 2
        else:
            if ip + 2 > len(per):
                break
            lo, hi = per[ip], per[ip + 1]
            ip += 2
        chain.extend([lo, mu[k - 1], hi])
    for a, b in zip(chain[:-1], chain[1:]):
        violation = max(violation, a - b)
    return violation <= tol, violation
