"""Spectral arcs and the spectrum portrait.

The spectrum of the operator is the union over t in [0, pi] of the
fiber spectra, swept out by arcs lambda(t) solving the defining
equation Delta_plus(lambda(t)) = cos t. Arcs are traced by an Euler
predictor / Newton corrector continuation in t with geometric step
shrinking near critical points of the discriminant, then densified by
a chord-deviation refinement so the stored polyline follows the true
curve to a few 1e-9, independent of step-size choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .config import DEFAULT_CONFIG, RunConfig
from .errors import (
    ConfigError,
    CorrectorDivergenceError,
    NonconvergenceError,
    WindowError,
)
from .floquet import monodromy, monodromy_batch
from .potential import Potential, semistrip_numbers
from .spectra import periodic_antiperiodic_spectrum

__all__ = [
    "StepControl",
    "SpectralArc",
    "SingularPoint",
    "SpectrumPortrait",
    "trace_arc",
    "spectrum_portrait",
    "distance_to_spectrum",
]

_CORR_TOL = 1e-11
_NOISE_FLOOR = 3e-10
_GEO_TOL = 2e-9


@dataclass(frozen=True)
class StepControl:
    """Continuation step policy for trace_arc."""

    h_init: float = 0.05
    h_min: float = 1e-7
    min_samples: int = 64
    max_steps: int = 200000


@dataclass(frozen=True, eq=False)
class SpectralArc:
    """One traced branch of the defining equation Delta_plus = cos t.

    t_samples increase inside [0, pi]; lambda_samples solve the
    defining equation at each t to corrector tolerance. regular means
    the derivative of the discriminant stayed above the singularity
    threshold on every sample, so the arc is simple and analytic.
    orientation follows the convention that odd bands traverse the
    spectrum upward as t grows; for genuinely complex arcs this is the
    continuous-branch interpretation at the band midpoint, the sign
    convention of the real-potential limit.
    """

    band_index: int
    t_samples: NDArray
    lambda_samples: NDArray
    dlambda_dt: NDArray
    delta_dot_samples: NDArray
    regular: bool
    endpoints: tuple[complex, complex]
    orientation: int


@dataclass(frozen=True)
class SingularPoint:
    """A point where arcs meet with vanishing discriminant derivative.

    The contact is harmless exactly when Delta_plus^2 - 1, Delta_minus
    and phi(., pi) all vanish there (the monodromy is then a scalar
    +-identity and the Riesz projection stays bounded); otherwise the
    point is a spectral singularity.
    """

    lambda0: complex
    delta_plus: complex
    delta_minus: complex
    phi_pi: complex
    spectral_singularity: bool
    classification: str


@dataclass(frozen=True, eq=False)
class SpectrumPortrait:
    """Arcs, singular points and the semistrip bound for one potential."""

    arcs: tuple[SpectralArc, ...]
    singular_points: tuple[SingularPoint, ...]
    semistrip: tuple[float, float, float]
    k_max: int


def _sing_eps(lam: complex, config: RunConfig) -> float:
    return config.sing_eps_abs * (1.0 + abs(lam))


def _batch_correct(
    V: Potential,
    t_arr: NDArray,
    seeds: NDArray,
    tol: float | None,
    config: RunConfig,
    max_iter: int = 14,
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Newton-correct seeds onto Delta_plus(lam) = cos t, vectorized.

    Returns (lam, delta_dot, delta_ddot, converged). A point counts as
    converged when the residual is below the corrector tolerance or has
    stopped improving at the propagator noise floor.
    """
    lam = np.asarray(seeds, dtype=complex).copy()
    t_arr = np.asarray(t_arr, dtype=float)
    target = np.cos(t_arr)
    n = lam.size
    ok = np.zeros(n, dtype=bool)
    dot = np.zeros(n, dtype=complex)
    ddot = np.zeros(n, dtype=complex)
    g_prev = np.full(n, np.inf)
    active = np.arange(n)
    for _ in range(max_iter):
        b = monodromy_batch(V, lam[active], tol=tol, config=config)
        g = b.delta_plus - target[active]
        dot[active] = b.delta_plus_dot
        ddot[active] = b.delta_plus_ddot
        ag = np.abs(g)
        # the Newton-step bound keeps lambda accurate even where the
        # derivative is small and a pure residual test would stop early;
        # the stall test accepts the propagator noise floor instead of
        # looping (a genuinely double root quarters g per step, so the
        # 0.7 ratio does not trip on slow linear convergence)
        step_sz = ag / np.maximum(np.abs(b.delta_plus_dot), 1e-300)
        conv = (ag <= _CORR_TOL) & (step_sz <= 1e-11 * (1.0 + np.abs(lam[active])))
        conv |= (ag >= 0.7 * g_prev[active]) & (ag <= _NOISE_FLOOR)
        ok[active[conv]] = True
        g_prev[active] = ag
        step_ok = ~conv & (np.abs(b.delta_plus_dot) > 1e-300)
        upd = active[step_ok]
        lam[upd] = lam[upd] - g[step_ok] / b.delta_plus_dot[step_ok]
        active = upd
        if active.size == 0:
            break
    return lam, dot, ddot, ok


def _correct(
    V: Potential,
    t: float,
    seed: complex,
    tol: float | None,
    config: RunConfig,
) -> tuple[complex, complex, complex, bool]:
    lam, dot, ddot, ok = _batch_correct(
        V, np.array([t]), np.array([seed], dtype=complex), tol, config
    )
    return complex(lam[0]), complex(dot[0]), complex(ddot[0]), bool(ok[0])


def _velocities(ts: NDArray, lams: NDArray, dots: NDArray, ddots: NDArray) -> NDArray:
    """dlambda/dt = -sin t / Delta_plus_dot, de l'Hopital at 0/0 samples.

    At a closed-gap endpoint both sin t and the derivative vanish while
    the velocity stays finite: there lambda'^2 * Delta_plus_ddot =
    -cos t, and the square-root sign is matched to the neighboring
    finite difference.
    """
    sin_t = np.sin(ts)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -sin_t / dots
    special = (np.abs(sin_t) < 1e-8) & (np.abs(dots) < 1e-8)
    for i in np.flatnonzero(special):
        if ddots[i] == 0:
            v[i] = 0.0
            continue
        val = np.sqrt(-np.cos(ts[i]) / ddots[i])
        j = i + 1 if i + 1 < ts.size else i - 1
        if j < 0 or j == i or ts[j] == ts[i]:
            v[i] = val
            continue
        fd = (lams[j] - lams[i]) / (ts[j] - ts[i])
        v[i] = val if abs(val - fd) <= abs(-val - fd) else -val
    return np.where(np.isfinite(v), v, 0.0)


def _refine_geometry(
    V: Potential,
    ts: NDArray,
    lams: NDArray,
    dots: NDArray,
    ddots: NDArray,
    tol: float | None,
    config: RunConfig,
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Insert midpoints wherever the polyline misses the true curve.

    Works on a queue of intervals per depth: the chord-midpoint seed is
    Newton-corrected and kept when it deviates from the chord by more
    than the geometric tolerance, and only the two children of a kept
    midpoint are examined further. Real-axis arcs converge in one
    round; curved arcs densify until the polyline is within a few 1e-9
    of the analytic arc, making re-traces agree independently of step
    policy.
    """
    samples = [ts, lams, dots, ddots]
    tL, lamL, dotL = ts[:-1], lams[:-1], dots[:-1]
    tR, lamR, dotR = ts[1:], lams[1:], dots[1:]
    new_t, new_lam, new_dot, new_ddot = [], [], [], []
    added = 0
    for _ in range(12):
        # only refine where the corrector can actually beat the geometric
        # tolerance: transverse accuracy degrades like noise/|Delta_dot|,
        # and the step shrinking already packs samples near encounters
        floor = np.maximum(
            3.0 * config.sing_eps_abs * (1.0 + np.abs(lamL)),
            2e-3 / (1.0 + np.abs(lamL)),
        )
        wide = (tR - tL) > 1e-9
        safe = (np.abs(dotL) > floor) & (np.abs(dotR) > floor) & wide
        if not safe.any() or added > 20000:
            break
        tm = 0.5 * (tL[safe] + tR[safe])
        seed = 0.5 * (lamL[safe] + lamR[safe])
        lam_m, dot_m, ddot_m, ok = _batch_correct(V, tm, seed, tol, config)
        jump = np.abs(lam_m - seed)
        sane = jump <= 0.75 * np.abs(lamR[safe] - lamL[safe]) + 1e-3 * (1.0 + np.abs(seed))
        # transverse distance to the chord segment: a real-axis arc has
        # zero even though the t-parametrization is curved
        w = lamR[safe] - lamL[safe]
        u = lam_m - lamL[safe]
        dn = np.abs(w) ** 2
        s = np.clip((u * np.conj(w)).real / np.where(dn == 0, 1.0, dn), 0.0, 1.0)
        dev = np.abs(u - s * w)
        keep = ok & sane & (dev > _GEO_TOL * (1.0 + np.abs(lam_m)))
        if not keep.any():
            break
        added += int(keep.sum())
        new_t.append(tm[keep])
        new_lam.append(lam_m[keep])
        new_dot.append(dot_m[keep])
        new_ddot.append(ddot_m[keep])
        # children of the kept midpoints form the next depth's queue
        kl_t, kl_lam, kl_dot = tL[safe][keep], lamL[safe][keep], dotL[safe][keep]
        kr_t, kr_lam, kr_dot = tR[safe][keep], lamR[safe][keep], dotR[safe][keep]
        km_t, km_lam, km_dot = tm[keep], lam_m[keep], dot_m[keep]
        tL = np.concatenate([kl_t, km_t])
        lamL = np.concatenate([kl_lam, km_lam])
        dotL = np.concatenate([kl_dot, km_dot])
        tR = np.concatenate([km_t, kr_t])
        lamR = np.concatenate([km_lam, kr_lam])
        dotR = np.concatenate([km_dot, kr_dot])
    if not new_t:
        return ts, lams, dots, ddots
    ts = np.concatenate([samples[0]] + new_t)
    lams = np.concatenate([samples[1]] + new_lam)
    dots = np.concatenate([samples[2]] + new_dot)
    ddots = np.concatenate([samples[3]] + new_ddot)
    order = np.argsort(ts, kind="stable")
    return ts[order], lams[order], dots[order], ddots[order]


def _make_arc(
    band_index: int,
    ts: list[float],
    lams: list[complex],
    dots: list[complex],
    ddots: list[complex],
    regular: bool,
    V: Potential,
    tol: float | None,
    config: RunConfig,
) -> SpectralArc:
    t_arr = np.asarray(ts, dtype=float)
    lam_arr = np.asarray(lams, dtype=complex)
    dot_arr = np.asarray(dots, dtype=complex)
    ddot_arr = np.asarray(ddots, dtype=complex)
    if t_arr.size > 1 and t_arr[0] > t_arr[-1]:
        t_arr, lam_arr = t_arr[::-1], lam_arr[::-1]
        dot_arr, ddot_arr = dot_arr[::-1], ddot_arr[::-1]
    t_arr, lam_arr, dot_arr, ddot_arr = _refine_geometry(
        V, t_arr, lam_arr, dot_arr, ddot_arr, tol, config
    )
    vel = _velocities(t_arr, lam_arr, dot_arr, ddot_arr)
    return SpectralArc(
        band_index=band_index,
        t_samples=t_arr,
        lambda_samples=lam_arr,
        dlambda_dt=vel,
        delta_dot_samples=dot_arr,
        regular=regular,
        endpoints=(complex(lam_arr[0]), complex(lam_arr[-1])),
        orientation=1 if band_index % 2 == 1 else -1,
    )


def trace_arc(
    V: Potential,
    lambda_start: complex,
    t_start: float,
    t_end: float,
    step_ctrl: StepControl | None = None,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    band_index: int = 0,
) -> SpectralArc:
    """Continue the defining equation from (lambda_start, t_start) to t_end.

    Euler predictor lambda + h * (-sin t) / Delta_plus_dot, Newton
    corrector at the new t; a failing corrector halves the step up to
    three times before CorrectorDivergenceError. The trace halts early
    with regular=False when |Delta_plus_dot| falls below the
    singularity threshold; the last stored sample is the approach
    point. Steps also shrink geometrically as the derivative decays so
    the halt lands close to the critical point.
    """
    sc = step_ctrl or StepControl(h_init=config.arc_step_init, h_min=config.arc_step_min)
    span = abs(t_end - t_start)
    if span <= 0:
        raise ConfigError("trace_arc needs t_start != t_end")
    sgn = 1.0 if t_end > t_start else -1.0
    lam, dot, ddot, ok = _correct(V, t_start, complex(lambda_start), tol, config)
    if not ok or abs(lam - complex(lambda_start)) > 1e-3 * (1.0 + abs(lam)):
        raise ConfigError(
            f"lambda_start = {lambda_start} does not satisfy the defining equation at t = {t_start}"
        )
    if abs(dot) < _sing_eps(lam, config):
        raise ConfigError(
            f"lambda_start = {lambda_start} is a critical point; start the trace off the encounter"
        )
    ts = [float(t_start)]
    lams = [lam]
    dots = [dot]
    ddots = [ddot]
    h_cap = min(sc.h_init, span / sc.min_samples)
    h = h_cap
    t = float(t_start)
    regular = True
    for step_count in range(sc.max_steps):
        if abs(t - t_end) <= 1e-13:
            break
        if abs(dot) < _sing_eps(lam, config):
            regular = False
            break
        # keep the per-step change of the derivative below ~30%
        h_sing = 0.3 * abs(dot) ** 2 / (abs(ddot) * abs(np.sin(t)) + 1e-30)
        h_eff = min(h, h_sing, abs(t_end - t))
        h_eff = max(h_eff, min(sc.h_min, abs(t_end - t)))
        accepted = False
        for _ in range(4):
            t_new = t + sgn * h_eff
            vel = -np.sin(t) / dot
            pred = lam + sgn * h_eff * vel
            lam_new, dot_new, ddot_new, ok = _correct(V, t_new, pred, tol, config)
            jump = abs(lam_new - pred)
            if ok and jump <= 2.0 * abs(h_eff * vel) + 1e-3 * (1.0 + abs(pred)):
                accepted = True
                break
            h_eff /= 2.0
        if not accepted:
            raise CorrectorDivergenceError(
                f"corrector diverged near t = {t + sgn * h_eff:.8f} on band {band_index}"
            )
        t, lam, dot, ddot = t_new, lam_new, dot_new, ddot_new
        ts.append(t)
        lams.append(lam)
        dots.append(dot)
        ddots.append(ddot)
        h = min(h_cap, 1.5 * h_eff)
    else:
        raise NonconvergenceError(
            f"trace on band {band_index} exceeded {sc.max_steps} steps"
        )
    return _make_arc(band_index, ts, lams, dots, ddots, regular, V, tol, config)


def _expand(entries) -> list[complex]:
    out: list[complex] = []
    for z, m in entries:
        out.extend([z] * m)
    out.sort(key=lambda w: (w.real, w.imag))
    return out


def _register_singular(
    registry: dict,
    V: Potential,
    lam: complex,
    tol: float | None,
    config: RunConfig,
) -> None:
    key = (round(lam.real, 7), round(lam.imag, 7))
    if key in registry:
        return
    md = monodromy(V, lam, tol=tol, config=config)
    e = _sing_eps(lam, config)
    benign = (
        abs(md.delta_plus * md.delta_plus - 1.0) <= e
        and abs(md.delta_minus) <= e
        and abs(md.m12) <= e
    )
    registry[key] = SingularPoint(
        lambda0=lam,
        delta_plus=md.delta_plus,
        delta_minus=md.delta_minus,
        phi_pi=md.m12,
        spectral_singularity=not benign,
        classification="diagonalizable-contact" if benign else "spectral-singularity",
    )


def _hop_past(
    V: Potential,
    lam_halt: complex,
    t_halt: float,
    approach: complex,
    tol: float | None,
    config: RunConfig,
    registry: dict,
) -> tuple[float, complex] | None:
    """Reseed the trace on the far side of a mid-arc singular encounter.

    Locates the critical point by Newton on the discriminant derivative,
    records it, then solves the local quadratic model of the defining
    equation a short t-hop past the encounter. Branch pairing through a
    crossing is not attempted; the candidate continuing the approach
    direction is taken.
    """
    d = lam_halt
    for _ in range(12):
        md = monodromy(V, d, tol=tol, config=config)
        if abs(md.delta_plus_ddot) < 1e-10:
            return None
        step = md.delta_plus_dot / md.delta_plus_ddot
        d = d - step
        if abs(step) <= 1e-12 * (1.0 + abs(d)):
            break
    md = monodromy(V, d, tol=tol, config=config)
    _register_singular(registry, V, d, tol, config)
    gamma = md.delta_plus
    t_gamma = float(np.arccos(np.clip(gamma.real, -1.0, 1.0)))
    hop = max(2.0 * abs(t_gamma - t_halt), 1e-3)
    t2 = t_halt + hop
    if t2 >= np.pi - 1e-9:
        return None
    disc = 2.0 * (np.cos(t2) - gamma) / md.delta_plus_ddot
    w = np.sqrt(complex(disc))
    cand = [d + w, d - w]
    cand.sort(key=lambda c: -((c - d) * np.conj(approach)).real)
    for c in cand:
        lam2, dot2, _, ok = _correct(V, t2, c, tol, config)
        if ok and abs(dot2) >= _sing_eps(lam2, config):
            return t2, lam2
    return None


def spectrum_portrait(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
) -> SpectrumPortrait:
    """Trace the first k_max bands of a zero-mean potential.

    Each band runs t: 0 -> pi from its periodic endpoint to its
    antiperiodic endpoint, both taken from the root catalog; closed-gap
    endpoints (critical points of the discriminant) are entered and
    left through the local quadratic model, and the exact endpoint
    sample is stitched in from the catalog rather than extrapolated.
    Arcs that meet a singular point mid-band are split there and both
    halves retained.
    """
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    if abs(V.mean) > 1e-12 * (1.0 + V.scale()):
        raise ConfigError("spectrum_portrait requires a zero-mean potential")
    k_spec = k_max // 2 + 2
    per, anti = periodic_antiperiodic_spectrum(V, k_spec, tol=tol, config=config)
    per_flat = _expand(per)
    anti_flat = _expand(anti)
    if len(per_flat) < k_max or len(anti_flat) < k_max:
        raise NonconvergenceError("periodic/antiperiodic catalog too short for the window")

    registry: dict = {}
    arcs: list[SpectralArc] = []
    for n in range(1, k_max + 1):
        arcs.extend(
            _trace_band(V, n, per_flat[n - 1], anti_flat[n - 1], tol, config, registry)
        )
    sing = sorted(registry.values(), key=lambda s: (s.lambda0.real, s.lambda0.imag))
    return SpectrumPortrait(
        arcs=tuple(arcs),
        singular_points=tuple(sing),
        semistrip=semistrip_numbers(V),
        k_max=k_max,
    )


def _endpoint_jets(
    V: Potential, lam: complex, tol: float | None, config: RunConfig
) -> tuple[complex, complex]:
    md = monodromy(V, lam, tol=tol, config=config)
    return md.delta_plus_dot, md.delta_plus_ddot


def _trace_band(
    V: Potential,
    n: int,
    lam0: complex,
    lam_pi: complex,
    tol: float | None,
    config: RunConfig,
    registry: dict,
) -> list[SpectralArc]:
    dot0, ddot0 = _endpoint_jets(V, lam0, tol, config)
    prefix: tuple | None = None
    if abs(dot0) >= _sing_eps(lam0, config):
        t_cur, lam_cur = 0.0, lam0
    else:
        # closed gap at t = 0: leave the double point on the local
        # quadratic model, in the direction of the band's far endpoint
        _register_singular(registry, V, lam0, tol, config)
        if ddot0 == 0:
            raise NonconvergenceError(f"degenerate start of band {n} at {lam0}")
        # small enough that the unrefined stub keeps chord error under 1e-8,
        # large enough that Newton separates the branch from its twin and
        # the entry point clears the singular floor (|dot| ~ t*sqrt|ddot|
        # decays with the band while the floor grows with |lambda|)
        t_cur = max(
            3e-4,
            4.0 * _sing_eps(lam0, config) / math.sqrt(abs(ddot0)),
        )
        dlam = t_cur * np.sqrt(-1.0 / ddot0)
        if ((lam_pi - lam0) * np.conj(dlam)).real < 0:
            dlam = -dlam
        lam_cur, _, _, ok = _correct(V, t_cur, lam0 + dlam, tol, config)
        if not ok:
            raise NonconvergenceError(f"failed to enter band {n} from {lam0}")
        prefix = (0.0, lam0, dot0, ddot0)

    out: list[SpectralArc] = []
    for _ in range(6):
        arc = trace_arc(
            V, lam_cur, t_cur, float(np.pi), tol=tol, config=config, band_index=n
        )
        ts = list(arc.t_samples)
        lams = list(arc.lambda_samples)
        dots = list(arc.delta_dot_samples)
        # second-derivative values only matter at stitched 0/0 endpoints
        ddots = [0j] * len(ts)
        if prefix is not None:
            t0, l0, d0, dd0 = prefix
            ts.insert(0, t0)
            lams.insert(0, l0)
            dots.insert(0, d0)
            ddots.insert(0, dd0)
            prefix = None
        t_last = ts[-1]
        if arc.regular or t_last >= np.pi - 2e-3:
            if not arc.regular:
                # closed gap at t = pi: stitch the catalog endpoint in
                dpi, ddpi = _endpoint_jets(V, lam_pi, tol, config)
                _register_singular(registry, V, lam_pi, tol, config)
                ts.append(float(np.pi))
                lams.append(lam_pi)
                dots.append(dpi)
                ddots.append(ddpi)
            out.append(
                _rebuild_arc(arc, n, ts, lams, dots, ddots, V, tol, config)
            )
            return out
        # mid-band singular encounter: keep the half-arc, hop, continue
        out.append(_rebuild_arc(arc, n, ts, lams, dots, ddots, V, tol, config))
        approach = lams[-1] - lams[-2] if len(lams) > 1 else 1.0 + 0j
        hop = _hop_past(V, lams[-1], t_last, approach, tol, config, registry)
        if hop is None:
            return out
        t_cur, lam_cur = hop
    return out


def _rebuild_arc(
    arc: SpectralArc,
    n: int,
    ts: list[float],
    lams: list[complex],
    dots: list[complex],
    ddots: list[complex],
    V: Potential,
    tol: float | None,
    config: RunConfig,
) -> SpectralArc:
    t_arr = np.asarray(ts, dtype=float)
    lam_arr = np.asarray(lams, dtype=complex)
    dot_arr = np.asarray(dots, dtype=complex)
    ddot_arr = np.asarray(ddots, dtype=complex)
    vel = _velocities(t_arr, lam_arr, dot_arr, ddot_arr)
    return SpectralArc(
        band_index=n,
        t_samples=t_arr,
        lambda_samples=lam_arr,
        dlambda_dt=vel,
        delta_dot_samples=dot_arr,
        regular=arc.regular,
        endpoints=(complex(lam_arr[0]), complex(lam_arr[-1])),
        orientation=1 if n % 2 == 1 else -1,
    )


def distance_to_spectrum(point: complex, portrait: SpectrumPortrait) -> float:
    """Distance from point to the union of arcs, by segment interpolation."""
    point = complex(point)
    if not portrait.arcs:
        raise WindowError("portrait holds no arcs")
    lo = min(a.lambda_samples.real.min() for a in portrait.arcs)
    hi = max(a.lambda_samples.real.max() for a in portrait.arcs)
    if not (lo - 1e-9 <= point.real <= hi + 1e-9):
        raise WindowError(
            f"Re(point) = {point.real:g} outside the portrait window [{lo:g}, {hi:g}]"
        )
    best = np.inf
    for arc in portrait.arcs:
        lam = arc.lambda_samples
        if lam.size == 1:
            best = min(best, abs(point - lam[0]))
            continue
        w = lam[1:] - lam[:-1]
        u = point - lam[:-1]
        denom = np.abs(w) ** 2
        denom = np.where(denom == 0, 1.0, denom)
        s = np.clip((u * np.conj(w)).real / denom, 0.0, 1.0)
        best = min(best, float(np.abs(u - s * w).min()))
    return float(best)
