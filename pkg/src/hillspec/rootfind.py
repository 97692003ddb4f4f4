"""Root localization for entire functions on rectangles.

The count of roots inside a rectangle is obtained from the winding
number of f along the boundary, computed by adaptive phase tracking
(samples are refined until consecutive argument increments stay below
pi/2, which makes the accumulated increment an exact multiple of 2 pi).
Root positions are seeded from the first two boundary moments

    S_k = (1/2 pi i) oint z^k f'(z)/f(z) dz  (k = 1, 2),

which equal the power sums of the enclosed roots, and polished by
Newton (Schroeder for multiple roots). Rectangles whose boundary comes
too close to a root are perturbed by up to one percent before the
search gives up.

The evaluator protocol is f(z_array) -> (values, derivatives), both
complex arrays of the input shape.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .config import DEFAULT_CONFIG, RunConfig
from .errors import BoundaryRootError, NonconvergenceError

__all__ = ["find_roots_in_rect", "winding_number", "Rect"]

# rectangle as (re_lo, re_hi, im_lo, im_hi)
Rect = tuple[float, float, float, float]

Evaluator = Callable[[NDArray], tuple[NDArray, NDArray]]

_MAX_PHASE = 0.45 * np.pi
_MAX_REFINE_ROUNDS = 26


class _IllConditioned(Exception):
    """Internal: boundary winding cannot be resolved (root on/near edge)."""


def _corners(rect: Rect) -> NDArray:
    x0, x1, y0, y1 = rect
    return np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])


def _initial_loop(rect: Rect) -> NDArray:
    """Boundary sample points, density matched to the sqrt-type phase rate."""
    cs = _corners(rect)
    pts = []
    for a, b in zip(cs, np.roll(cs, -1)):
        span = abs(np.sqrt(abs(b) + 1.0) - np.sqrt(abs(a) + 1.0)) + 0.02 * abs(b - a)
        n = max(8, int(np.ceil(5.0 * span)))
        pts.append(a + (b - a) * np.arange(n) / n)
    return np.concatenate(pts)


def _refine_loop(f: Evaluator, rect: Rect) -> tuple[NDArray, NDArray]:
    """Phase-resolved boundary samples (closed loop) and their f values.

    A segment is refined when its wrapped phase increment exceeds the
    cap or when h * |f'/f| at either endpoint does: the latter bounds
    the unwrapped variation of log f, so a near-boundary zero cannot
    alias a full phase turn into an innocuous wrapped increment.
    """
    z = _initial_loop(rect)
    vals, ders = f(z)
    vals = np.asarray(vals, dtype=complex)
    ders = np.asarray(ders, dtype=complex)
    for _ in range(_MAX_REFINE_ROUNDS):
        scale = np.abs(vals).max()
        if scale == 0.0 or not np.isfinite(scale):
            raise _IllConditioned("zero or non-finite f on boundary")
        if np.abs(vals).min() < 1e-13 * scale:
            raise _IllConditioned("f vanishes on the boundary")
        nxt = np.roll(vals, -1)
        dphi = np.angle(nxt / vals)
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = np.abs(ders / vals)
        logd = np.where(np.isfinite(logd), logd, np.inf)
        h = np.abs(np.roll(z, -1) - z)
        swing = h * np.maximum(logd, np.roll(logd, -1))
        bad = (np.abs(dphi) > _MAX_PHASE) | (swing > 2.0)
        if not bad.any():
            return z, vals
        mids = (z[bad] + np.roll(z, -1)[bad]) / 2.0
        mvals, mders = f(mids)
        # interleave midpoints after their left neighbours
        idx = np.flatnonzero(bad)
        z = np.insert(z, idx + 1, mids)
        vals = np.insert(vals, idx + 1, np.asarray(mvals, dtype=complex))
        ders = np.insert(ders, idx + 1, np.asarray(mders, dtype=complex))
    raise _IllConditioned("phase refinement did not settle (root near boundary)")


def _winding_from_loop(vals: NDArray) -> int:
    dphi = np.angle(np.roll(vals, -1) / vals)
    total = dphi.sum() / (2.0 * np.pi)
    n = int(np.rint(total))
    if abs(total - n) > 0.25:
        raise _IllConditioned(f"non-integer winding {total:.3f}")
    return n


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def _boundary_power_sums(f: Evaluator, z: NDArray) -> tuple[complex, complex]:
    """Power sums S1, S2 of the enclosed roots from boundary quadrature."""
    a = z
    b = np.roll(z, -1)
    mid = (a[:, None] + b[:, None]) / 2.0
    half = (b[:, None] - a[:, None]) / 2.0
    nodes = (mid + half * _GL4_X[None, :]).ravel()
    vals, ders = f(nodes)
    logd = np.asarray(ders, dtype=complex) / np.asarray(vals, dtype=complex)
    w = (half * _GL4_W[None, :]).ravel()
    s1 = np.sum(w * nodes * logd) / (2j * np.pi)
    s2 = np.sum(w * nodes * nodes * logd) / (2j * np.pi)
    return complex(s1), complex(s2)


def winding_number(f: Evaluator, rect: Rect, config: RunConfig = DEFAULT_CONFIG) -> int:
    """Number of roots of f in rect (with multiplicity), by phase tracking."""
    n, _, _ = _winding_perturbed(f, rect, config)
    return n


def _winding_perturbed(
    f: Evaluator, rect: Rect, config: RunConfig
) -> tuple[int, NDArray, Rect]:
    """Winding number with up-to-1% rectangle perturbation on ill condition."""
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0
    last: _IllConditioned | None = None
    for attempt in range(6):
        # deterministic outward nudges, at most 1% of the side lengths
        d = 0.002 * attempt
        r = (x0 - d * w * 1.13, x1 + d * w * 0.87, y0 - d * h * 1.07, y1 + d * h * 0.93)
        try:
            z, vals = _refine_loop(f, r)
            return _winding_from_loop(vals), z, r
        except _IllConditioned as exc:
            last = exc
    raise BoundaryRootError(f"winding on {rect} ill-conditioned after 5 perturbations: {last}")


def _polish(
    f: Evaluator,
    seeds: NDArray,
    mults: NDArray,
    tol: float,
    config: RunConfig,
) -> NDArray:
    """Newton (Schroeder for multiplicity > 1) refinement of a seed batch."""
    z = np.asarray(seeds, dtype=complex).copy()
    m = np.asarray(mults, dtype=float)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(config.newton_maxit):
        if not active.any():
            break
        vals, ders = f(z[active])
        vals = np.asarray(vals, dtype=complex)
        ders = np.asarray(ders, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = m[active] * vals / ders
        step = np.where(np.isfinite(step), step, 0.0)
        z[active] = z[active] - step
        done = np.abs(step) <= tol * (1.0 + np.abs(z[active]))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    if active.any():
        raise NonconvergenceError(
            f"Newton refinement stalled at {z[active][:3]} (multiplicity {mults[np.flatnonzero(active)[:3]]})"
        )
    return z


def _in_rect(z: complex, rect: Rect, slack: float = 0.02) -> bool:
    x0, x1, y0, y1 = rect
    dx, dy = slack * (x1 - x0), slack * (y1 - y0)
    return (x0 - dx <= z.real <= x1 + dx) and (y0 - dy <= z.imag <= y1 + dy)


def _try_cluster(
    f: Evaluator,
    seed: complex,
    n: int,
    r_eff: Rect,
    tol: float,
    config: RunConfig,
) -> tuple[complex, int] | None:
    """Polish seed as an n-fold root and verify the count in a small box."""
    try:
        z = complex(_polish(f, np.array([seed]), np.array([n]), tol, config)[0])
    except NonconvergenceError:
        try:
            z = complex(_polish(f, np.array([seed]), np.array([1]), tol, config)[0])
        except NonconvergenceError:
            return None
    if not _in_rect(z, r_eff):
        return None
    r = 1.5 * config.cluster_tol * (1.0 + abs(z))
    box = (z.real - r, z.real + r, z.imag - r, z.imag + r)
    try:
        m, _, _ = _winding_perturbed(f, box, config)
    except BoundaryRootError:
        return None
    if m == n:
        return (z, n)
    return None


def _split(rect: Rect) -> tuple[Rect, Rect]:
    x0, x1, y0, y1 = rect
    if (x1 - x0) >= (y1 - y0):
        # slightly off-center cut reduces the chance of slicing a root
        xm = x0 + (x1 - x0) * 0.53174
        return (x0, xm, y0, y1), (xm, x1, y0, y1)
    ym = y0 + (y1 - y0) * 0.53174
    return (x0, x1, y0, ym), (x0, x1, ym, y1)


def find_roots_in_rect(
    f: Evaluator,
    rect: Rect,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    initial_cuts: Sequence[float] | None = None,
) -> list[tuple[complex, int]]:
    """All roots of f in rect with multiplicities, sorted by real part.

    The sum of returned multiplicities equals the boundary winding
    number of the rectangle. initial_cuts (real abscissas known to stay
    clear of roots, e.g. asymptotic mid-gap points) pre-partition the
    rectangle into vertical strips before the generic subdivision.
    """
    tol = config.root_tol if tol is None else tol
    x0, x1, y0, y1 = rect
    work: list[Rect] = []
    if initial_cuts:
        cuts = [x0] + [c for c in sorted(initial_cuts) if x0 < c < x1] + [x1]
        for a, b in zip(cuts[:-1], cuts[1:]):
            work.append((a, b, y0, y1))
    else:
        work.append(rect)

    found: list[tuple[complex, int]] = []
    guard = 0
    while work:
        guard += 1
        if guard > 4000:
            raise NonconvergenceError("rectangle subdivision budget exhausted")
        r = work.pop()
        n, loop, r_eff = _winding_perturbed(f, r, config)
        if n == 0:
            continue
        diam = np.hypot(r[1] - r[0], r[3] - r[2])
        scale = 1.0 + max(abs(r[0]), abs(r[1]), abs(r[2]), abs(r[3]))
        if diam <= config.cluster_tol * scale:
            # unresolvable cluster: report as one root of multiplicity n
            center = complex((r[0] + r[1]) / 2.0, (r[2] + r[3]) / 2.0)
            try:
                z = _polish(f, np.array([center]), np.array([n]), tol, config)[0]
            except NonconvergenceError:
                # a knot of distinct roots tighter than cluster_tol: any
                # member stands in for the cluster position
                z = _polish(f, np.array([center]), np.array([1]), tol, config)[0]
            found.append((complex(z), n))
            continue
        s1, s2 = _boundary_power_sums(f, loop)
        if n == 1:
            z = _polish(f, np.array([s1]), np.array([1]), tol, config)[0]
            if _in_rect(z, r_eff):
                found.append((complex(z), 1))
                continue
        elif n == 2:
            # roots of w^2 - s1 w + e2 with e2 from Newton's identity
            e2 = (s1 * s1 - s2) / 2.0
            disc = np.sqrt(s1 * s1 - 4.0 * e2)
            za, zb = (s1 + disc) / 2.0, (s1 - disc) / 2.0
            if abs(za - zb) > config.cluster_tol * (1.0 + abs(s1)):
                try:
                    zz = _polish(f, np.array([za, zb]), np.array([1, 1]), tol, config)
                except NonconvergenceError:
                    zz = None
                if (
                    zz is not None
                    and all(_in_rect(complex(w), r_eff) for w in zz)
                    and abs(zz[0] - zz[1]) > config.cluster_tol * (1.0 + abs(zz[0]))
                ):
                    found.append((complex(zz[0]), 1))
                    found.append((complex(zz[1]), 1))
                    continue
        if n >= 2:
            # try a single multiplicity-n cluster before subdividing: the
            # centroid seed is exact for a true n-fold root, and a small
            # verification box confirms the count
            cluster = _try_cluster(f, s1 / n, n, r_eff, tol, config)
            if cluster is not None:
                found.append(cluster)
                continue
        ra, rb = _split(r)
        work.append(ra)
        work.append(rb)

    # merge near-coincident finds from adjacent (perturbed) strips
    found.sort(key=lambda p: (p[0].real, p[0].imag))
    merged: list[tuple[complex, int]] = []
    for z, m in found:
        if merged and abs(z - merged[-1][0]) <= 10.0 * max(tol, 1e-12) * (1.0 + abs(z)):
            zprev, mprev = merged[-1]
            merged[-1] = (zprev, max(mprev, m))
        else:
            merged.append((z, m))
    return merged
