"""Scalar-spectrality decision for a complex Hill operator.

Whether H = -d^2/dx^2 + V generates a bounded, countably additive
resolution of the identity is decided here through three equivalent,
numerically rendered criteria:

* an analyticity test at critical points of the discriminant that lie
  on the spectrum (the double-contact pattern plus a two-circle
  removability probe of the cleared ratio),
* boundedness diagnostics for the three kernel ratios along all arcs,
  with a window-growth trend standing in for the unverifiable global
  supremum,
* a multiplicity test tying multiple periodic/antiperiodic points to
  the Dirichlet spectrum, algebraic to geometric fiber multiplicities,
  and gap sizes to critical-point distances.

A FAIL verdict always carries a concrete finite witness; PASS means
every finite check holds and the ratio suprema do not grow across the
last octaves of computed bands; anything else is INCONCLUSIVE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .arcs import SpectrumPortrait, distance_to_spectrum, spectrum_portrait
from .config import DEFAULT_CONFIG, RunConfig
from .errors import ConfigError, WindowError
from .floquet import fundamental_system, monodromy_batch
from .potential import Potential, shift_to_zero_mean
from .spectra import (
    SpectraCatalog,
    algebraic_vs_geometric,
    dirichlet_spectrum,
    fiber_spectrum,
    spectra_catalog,
)

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CriterionThresholds:
    """Every tolerance the verdict logic consumes, in one place.

    on_spectrum_rel     distance below which a critical point counts as
                        lying on the spectrum, scaled by (1 + |delta|).
    contact_tol_rel     tolerance of the double-contact pattern tests
                        |trace^2 - 1|, |antitrace|, |phi(., pi)| at a
                        critical point, scaled by (1 + |delta|).
    curvature_min       nondegeneracy floor for |second derivative| of
                        the discriminant at a critical point.
    removability_radius_rel
                        outer circle radius for the removability probe,
                        scaled by (1 + |delta|); the inner circle is
                        half of it.
    pole_mean_ratio     inner/outer circle mean ratio above which the
                        cleared ratio is declared non-removable (a
                        simple pole doubles the mean when the radius
                        halves).
    dirichlet_match_rel multiple periodic/antiperiodic points must sit
                        within this distance of a Dirichlet eigenvalue,
                        scaled by (1 + |lambda|).
    fiber_t_points      number of quasi-momentum samples for the
                        fiber multiplicity sweep (>= 16 plus endpoints).
    octave_growth_max   growth factor of a supremum between consecutive
                        band octaves that constitutes a FAIL witness.
    trend_slack         growth factor still accepted as "non-increasing"
                        for the PASS trend over the final octaves.
    trend_noise_floor   octave suprema below this are indistinguishable
                        from roundoff (a ratio whose numerator vanishes
                        identically still carries ~1e-12 of noise, and
                        dividing two such values fakes any growth factor);
                        trend quotients are floored here.
    distance_ratio_floor
                        gap-distance ratios below this cannot witness
                        unboundedness (honest bounded ratios sit at O(1),
                        exact Dirichlet/endpoint coincidences leave pure
                        noise); octave growth is ignored while the larger
                        supremum is under the floor.
    fit_window_lo_rel / fit_window_hi_rel
                        radial window (scaled by 1 + |lambda0|) of arc
                        samples used in the log-log blowup exponent fit.
    frame_test_count    random test functions for the interior-t frame
                        bound estimate.
    frame_grid_points   quadrature grid size on [0, pi] for the same.
    """

    on_spectrum_rel: float = 1e-6
    contact_tol_rel: float = 1e-6
    curvature_min: float = 1e-6
    removability_radius_rel: float = 1e-3
    pole_mean_ratio: float = 1.4
    dirichlet_match_rel: float = 1e-6
    fiber_t_points: int = 17
    octave_growth_max: float = 10.0
    trend_slack: float = 1.10
    trend_noise_floor: float = 1e-9
    distance_ratio_floor: float = 0.1
    fit_window_lo_rel: float = 1e-5
    fit_window_hi_rel: float = 5e-2
    frame_test_count: int = 50
    frame_grid_points: int = 513


DEFAULT_THRESHOLDS = CriterionThresholds()


# ---------------------------------------------------------------------------
# ratio diagnostics


@dataclass(frozen=True, eq=False)
class ArcRatioData:
    """The three kernel ratios along one traced arc."""

    arc_index: int
    band_index: int
    lam: NDArray
    delta_dot: NDArray
    r1: NDArray
    r2: NDArray
    r3: NDArray
    included: NDArray  # False where |Delta_+^dot| is below the singular floor


@dataclass(frozen=True, eq=False)
class RatioDiagnostics:
    """Suprema of the kernel ratios |phi/dot|, |theta'/((|l|+1)dot)|,
    |antitrace/((sqrt|l|+1)dot)| over regular arc samples."""

    arc_data: tuple[ArcRatioData, ...]
    band_sups: tuple[tuple[int, float, float, float], ...]
    window_table: tuple[tuple[int, float, float, float], ...]
    sups: tuple[float, float, float]
    argmax_bands: tuple[int, int, int]
    excluded_samples: int


def ratio_diagnostics(
    V: Potential,
    portrait: SpectrumPortrait,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
) -> RatioDiagnostics:
    """Evaluate the three kernel ratios at every regular arc sample.

    Samples with |Delta_+^dot| below the singular floor are excluded
    from the suprema; they belong to the singular-point analysis. The
    window table reports suprema restricted to bands <= m so growth in
    the band index is visible.
    """
    if not portrait.arcs:
        raise WindowError("portrait holds no arcs")
    arc_rows: list[ArcRatioData] = []
    excluded = 0
    for idx, arc in enumerate(portrait.arcs):
        lam = np.asarray(arc.lambda_samples, dtype=complex)
        mb = monodromy_batch(V, lam, tol, config)
        adot = np.abs(mb.delta_plus_dot)
        scale = 1.0 + np.abs(lam)
        included = adot >= config.sing_eps_abs * scale
        excluded += int(np.sum(~included))
        safe = np.where(adot > 0.0, adot, 1.0)
        r1 = np.abs(mb.m12) / safe
        r2 = np.abs(mb.m21) / ((np.abs(lam) + 1.0) * safe)
        r3 = np.abs(mb.delta_minus) / ((np.sqrt(np.abs(lam)) + 1.0) * safe)
        arc_rows.append(
            ArcRatioData(
                arc_index=idx,
                band_index=arc.band_index,
                lam=lam,
                delta_dot=mb.delta_plus_dot,
                r1=r1,
                r2=r2,
                r3=r3,
                included=included,
            )
        )

    bands = sorted({row.band_index for row in arc_rows})
    band_sups: list[tuple[int, float, float, float]] = []
    for b in bands:
        s = [0.0, 0.0, 0.0]
        for row in arc_rows:
            if row.band_index != b or not np.any(row.included):
                continue
            for j, r in enumerate((row.r1, row.r2, row.r3)):
                s[j] = max(s[j], float(np.max(r[row.included])))
        band_sups.append((b, s[0], s[1], s[2]))

    window_table: list[tuple[int, float, float, float]] = []
    run = [0.0, 0.0, 0.0]
    for b, s1, s2, s3 in band_sups:
        run = [max(run[0], s1), max(run[1], s2), max(run[2], s3)]
        window_table.append((b, run[0], run[1], run[2]))

    sups = []
    argmax = []
    for j in range(3):
        best_val = 0.0
        best_band = bands[0] if bands else 0
        for b, *svals in band_sups:
            if svals[j] > best_val:
                best_val = svals[j]
                best_band = b
        sups.append(best_val)
        argmax.append(best_band)

    return RatioDiagnostics(
        arc_data=tuple(arc_rows),
        band_sups=tuple(band_sups),
        window_table=tuple(window_table),
        sups=(sups[0], sups[1], sups[2]),
        argmax_bands=(argmax[0], argmax[1], argmax[2]),
        excluded_samples=excluded,
    )


# ---------------------------------------------------------------------------
# window trend over band octaves


@dataclass(frozen=True)
class WindowTrend:
    """Ratio suprema grouped into octaves of the band index.

    transitions holds, per consecutive octave pair in the examined
    tail, the worst growth factor over the three ratios. decided is
    False when fewer than three octaves exist.
    """

    k_max: int
    octave_sups: tuple[tuple[int, int, float, float, float], ...]
    transitions: tuple[float, ...]
    growth_witness: bool
    trend_ok: bool
    decided: bool


def _octave_ranges(max_band: int) -> list[tuple[int, int]]:
    out = []
    lo = 1
    while lo <= max_band:
        hi = min(2 * lo - 1, max_band)
        out.append((lo, hi))
        lo = 2 * lo
    return out


def _window_trend(
    band_sups: tuple[tuple[int, float, float, float], ...],
    k_max: int,
    thresholds: CriterionThresholds,
    use_ratios: tuple[int, ...] = (0, 1, 2),
) -> WindowTrend:
    ranges = _octave_ranges(max((b for b, *_ in band_sups), default=0))
    octs: list[tuple[int, int, float, float, float]] = []
    for lo, hi in ranges:
        s = [0.0, 0.0, 0.0]
        seen = False
        for b, s1, s2, s3 in band_sups:
            if lo <= b <= hi:
                seen = True
                s = [max(s[0], s1), max(s[1], s2), max(s[2], s3)]
        if seen:
            octs.append((lo, hi, s[0], s[1], s[2]))
    tail = octs[-3:]
    floor = thresholds.trend_noise_floor
    transitions: list[float] = []
    for prev, cur in zip(tail, tail[1:]):
        worst = 0.0
        for j in use_ratios:
            a, b = prev[2 + j], cur[2 + j]
            # quotients of roundoff-level suprema carry no information
            g = 1.0 if b <= floor else b / max(a, floor)
            worst = max(worst, g)
        transitions.append(worst)
    growth_witness = any(g > thresholds.octave_growth_max for g in transitions)
    decided = len(octs) >= 3
    trend_ok = decided and all(g <= thresholds.trend_slack for g in transitions)
    return WindowTrend(
        k_max=k_max,
        octave_sups=tuple(octs),
        transitions=tuple(transitions),
        growth_witness=growth_witness,
        trend_ok=trend_ok,
        decided=decided,
    )


# ---------------------------------------------------------------------------
# spectral singularities


@dataclass(frozen=True)
class SingularityEstimate:
    """A confirmed blowup point with its fitted rate.

    exponent is the slope p of |phi/dot| ~ C / |lambda - lambda0|^p
    along approaching arc samples (log-log fit); ratio_peak is the
    largest ratio observed inside the fit window.
    """

    lambda0: complex
    exponent: float
    ratio_peak: float
    samples_used: int


def _fit_exponent(
    ratios: RatioDiagnostics,
    lambda0: complex,
    thresholds: CriterionThresholds,
) -> tuple[float, float, int]:
    scale = 1.0 + abs(lambda0)
    lo = thresholds.fit_window_lo_rel * scale
    hi = thresholds.fit_window_hi_rel * scale
    for _ in range(4):
        ds: list[float] = []
        rs: list[float] = []
        for row in ratios.arc_data:
            d = np.abs(row.lam - lambda0)
            keep = (d >= lo) & (d <= hi) & (row.r1 > 0.0)
            ds.extend(d[keep].tolist())
            rs.extend(row.r1[keep].tolist())
        if len(ds) >= 6:
            slope = np.polyfit(np.log(np.asarray(ds)), np.log(np.asarray(rs)), 1)[0]
            return float(max(-slope, 0.0)), float(max(rs)), len(ds)
        hi *= 2.0
    if ds:
        return 0.0, float(max(rs)), len(ds)
    return 0.0, 0.0, 0


def detect_spectral_singularities(
    V: Potential,
    portrait: SpectrumPortrait,
    catalog: SpectraCatalog | None = None,
    ratios: RatioDiagnostics | None = None,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
) -> tuple[SingularityEstimate, ...]:
    """Locate spectrum points where the projection kernel blows up.

    Candidates are the critical points encountered on the arcs; those
    failing the double-contact pattern are singularities. For each one
    the blowup exponent of the first kernel ratio is fitted along the
    approaching samples. Real-valued potentials produce an empty list.
    """
    if ratios is None:
        ratios = ratio_diagnostics(V, portrait, tol, config, thresholds)
    found: list[SingularityEstimate] = []
    seen: set[tuple[float, float]] = set()
    for sp in portrait.singular_points:
        key = (round(sp.lambda0.real, 7), round(sp.lambda0.imag, 7))
        seen.add(key)
        if not sp.spectral_singularity:
            continue
        exponent, peak, used = _fit_exponent(ratios, sp.lambda0, thresholds)
        found.append(
            SingularityEstimate(
                lambda0=sp.lambda0,
                exponent=exponent,
                ratio_peak=peak,
                samples_used=used,
            )
        )
    if catalog is not None:
        # catalog critical points the tracer never met (off-band windows)
        for delta, _gamma, _order in catalog.critical:
            key = (round(delta.real, 7), round(delta.imag, 7))
            if key in seen:
                continue
            try:
                dist = distance_to_spectrum(delta, portrait)
            except WindowError:
                continue
            if dist > thresholds.on_spectrum_rel * (1.0 + abs(delta)):
                continue
            mb = monodromy_batch(V, np.array([delta]), tol, config)
            e = thresholds.contact_tol_rel * (1.0 + abs(delta))
            benign = (
                abs(mb.delta_plus[0] ** 2 - 1.0) <= e
                and abs(mb.delta_minus[0]) <= e
                and abs(mb.m12[0]) <= e
            )
            if benign:
                continue
            exponent, peak, used = _fit_exponent(ratios, complex(delta), thresholds)
            found.append(
                SingularityEstimate(
                    lambda0=complex(delta),
                    exponent=exponent,
                    ratio_peak=peak,
                    samples_used=used,
                )
            )
    found.sort(key=lambda s: (s.lambda0.real, s.lambda0.imag))
    return tuple(found)


# ---------------------------------------------------------------------------
# analyticity criterion at critical points


@dataclass(frozen=True)
class CriticalPointCheck:
    """Double-contact pattern and removability probe at one critical point."""

    delta: complex
    order: int
    dist_to_spectrum: float
    on_spectrum: bool
    trace_defect: float  # |Delta_+^2 - 1|
    antitrace: float  # |Delta_-|
    dirichlet_value: float  # |phi(delta, pi)|
    curvature: float  # |Delta_+^dotdot|
    contact_ok: bool | None
    mean_outer: float | None
    mean_inner: float | None
    circle_ratio: float | None
    removable: bool | None

    @property
    def ok(self) -> bool:
        if not self.on_spectrum:
            return True
        return bool(self.contact_ok) and bool(self.removable)


@dataclass(frozen=True)
class AnalyticityCheck:
    """Verdict of the critical-point analyticity criterion."""

    verdict: str
    points: tuple[CriticalPointCheck, ...]
    witnesses: tuple[str, ...]
    trend: WindowTrend


def _circle_means(
    V: Potential,
    delta: complex,
    radius: float,
    tol: float | None,
    config: RunConfig,
    n_points: int = 16,
) -> float:
    ang = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    z = delta + radius * ang
    mb = monodromy_batch(V, z, tol, config)
    # cleared form of the analyticity-test ratio: theta'(z,pi) / Delta_+^dot(z)
    h = np.abs(mb.m21) / np.abs(mb.delta_plus_dot)
    return float(np.mean(h))


def check_theorem_43(
    V: Potential,
    portrait: SpectrumPortrait,
    catalog: SpectraCatalog,
    ratios: RatioDiagnostics | None = None,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
) -> AnalyticityCheck:
    """Analyticity criterion: every critical point on the spectrum must
    carry the double-contact pattern, and the cleared ratio must have a
    removable singularity there.

    The pattern is |trace^2 - 1| = |antitrace| = |phi(., pi)| = 0 with
    nonvanishing second derivative of the discriminant. Removability is
    probed by comparing circle means of the cleared ratio at two radii:
    a pole doubles the mean when the radius halves, a removable point
    leaves it unchanged to first order. Boundedness along the arcs is
    folded in through the shared window trend of ratios one and three.
    """
    if ratios is None:
        ratios = ratio_diagnostics(V, portrait, tol, config, thresholds)
    rows: list[CriticalPointCheck] = []
    witnesses: list[str] = []
    for delta, _gamma, order in catalog.critical:
        try:
            dist = distance_to_spectrum(delta, portrait)
        except WindowError:
            continue
        scale = 1.0 + abs(delta)
        on_spec = dist <= thresholds.on_spectrum_rel * scale
        mb = monodromy_batch(V, np.array([delta]), tol, config)
        trace_defect = abs(mb.delta_plus[0] ** 2 - 1.0)
        antitrace = abs(mb.delta_minus[0])
        dir_val = abs(mb.m12[0])
        curvature = abs(mb.delta_plus_ddot[0])
        contact_ok: bool | None = None
        mean_outer = mean_inner = circle_ratio = None
        removable: bool | None = None
        if on_spec:
            e = thresholds.contact_tol_rel * scale
            contact_ok = (
                trace_defect <= e
                and antitrace <= e
                and dir_val <= e
                and curvature >= thresholds.curvature_min
            )
            r = thresholds.removability_radius_rel * scale
            mean_outer = _circle_means(V, delta, r, tol, config)
            mean_inner = _circle_means(V, delta, r / 2.0, tol, config)
            floor = 1e-12 * scale
            if mean_outer < floor and mean_inner < floor:
                circle_ratio = 1.0
            else:
                circle_ratio = mean_inner / max(mean_outer, floor)
            removable = circle_ratio <= thresholds.pole_mean_ratio
            if not contact_ok:
                witnesses.append(
                    f"critical point {delta:.9g} on the spectrum violates the "
                    f"double-contact pattern (|phi| = {dir_val:.3e}, "
                    f"|antitrace| = {antitrace:.3e}, |trace^2-1| = {trace_defect:.3e})"
                )
            if not removable:
                witnesses.append(
                    f"cleared ratio has a non-removable singularity at "
                    f"{delta:.9g} (circle-mean ratio {circle_ratio:.3f})"
                )
        rows.append(
            CriticalPointCheck(
                delta=complex(delta),
                order=order,
                dist_to_spectrum=dist,
                on_spectrum=on_spec,
                trace_defect=trace_defect,
                antitrace=antitrace,
                dirichlet_value=dir_val,
                curvature=curvature,
                contact_ok=contact_ok,
                mean_outer=mean_outer,
                mean_inner=mean_inner,
                circle_ratio=circle_ratio,
                removable=removable,
            )
        )
    trend = _window_trend(
        ratios.band_sups, portrait.k_max, thresholds, use_ratios=(0, 2)
    )
    if witnesses or trend.growth_witness:
        if trend.growth_witness:
            witnesses.append("ratio supremum grows past the octave threshold")
        verdict = FAIL
    elif trend.trend_ok:
        verdict = PASS
    else:
        verdict = INCONCLUSIVE
    return AnalyticityCheck(
        verdict=verdict,
        points=tuple(rows),
        witnesses=tuple(witnesses),
        trend=trend,
    )


# ---------------------------------------------------------------------------
# multiplicity criterion


@dataclass(frozen=True)
class MultiplePointCheck:
    lam: complex
    mult: int
    family: str  # "periodic" or "antiperiodic"
    nearest_dirichlet: complex
    dist: float
    ok: bool


@dataclass(frozen=True)
class FiberMultiplicityCheck:
    t: float
    energy: complex
    algebraic: int
    geometric: int

    @property
    def ok(self) -> bool:
        return self.algebraic == self.geometric


@dataclass(frozen=True)
class GapDistanceRow:
    """Distances of the k-th gap data to the k-th critical point.

    in_q is True when the critical point keeps a positive distance to
    the spectrum; only such rows enter the suprema.
    """

    k: int
    lam_minus: complex
    lam_plus: complex
    mu: complex
    delta: complex
    dist: float
    in_q: bool
    r_gap: float
    r_minus: float
    r_plus: float


@dataclass(frozen=True)
class MultiplicityCheck:
    """Verdict of the multiplicity/distance criterion."""

    verdict: str
    multiple_points: tuple[MultiplePointCheck, ...]
    fiber_checks: tuple[FiberMultiplicityCheck, ...]
    distance_rows: tuple[GapDistanceRow, ...]
    distance_sups: tuple[float, float, float]
    witnesses: tuple[str, ...]


def _flatten(roots) -> list[complex]:
    out: list[complex] = []
    for z, m in roots:
        out.extend([complex(z)] * int(m))
    out.sort(key=lambda w: (w.real, w.imag))
    return out


def check_theorem_45(
    V: Potential,
    catalog: SpectraCatalog,
    portrait: SpectrumPortrait,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
) -> MultiplicityCheck:
    """Multiplicity criterion with three subconditions.

    (i) every multiple periodic/antiperiodic point must be a Dirichlet
    eigenvalue; (ii) algebraic and geometric multiplicities must agree
    at fiber eigenvalues over a quasi-momentum sweep and at the multiple
    points themselves; (iii) for critical points off the spectrum, gap
    width and Dirichlet offsets divided by the critical distance stay
    bounded, rendered as no >10x growth across octaves of k.
    """
    witnesses: list[str] = []

    # extended Dirichlet window: multiple points reach about (2 k_max)^2
    mu_ext = _flatten(dirichlet_spectrum(V, 2 * catalog.k_max, tol, config))

    multiple_rows: list[MultiplePointCheck] = []
    for family, roots in (
        ("periodic", catalog.periodic),
        ("antiperiodic", catalog.antiperiodic),
    ):
        for z, m in roots:
            if m < 2:
                continue
            dists = [abs(z - mu) for mu in mu_ext]
            j = int(np.argmin(dists)) if dists else 0
            nearest = mu_ext[j] if dists else complex("nan")
            dist = dists[j] if dists else math.inf
            ok = dist <= thresholds.dirichlet_match_rel * (1.0 + abs(z))
            if not ok:
                witnesses.append(
                    f"multiple {family} point {z:.9g} (multiplicity {m}) is not a "
                    f"Dirichlet eigenvalue (nearest at distance {dist:.3e})"
                )
            multiple_rows.append(
                MultiplePointCheck(
                    lam=complex(z),
                    mult=int(m),
                    family=family,
                    nearest_dirichlet=complex(nearest),
                    dist=float(dist),
                    ok=ok,
                )
            )

    # fiber sweep: algebraic vs geometric multiplicity
    fiber_rows: list[FiberMultiplicityCheck] = []
    k_fiber = max(3, catalog.k_max // 2)
    t_grid = np.linspace(0.0, np.pi, thresholds.fiber_t_points)
    for t in t_grid:
        for z, _m in fiber_spectrum(V, float(t), k_fiber, tol, config):
            alg, geom = algebraic_vs_geometric(V, float(t), z, tol, config)
            row = FiberMultiplicityCheck(
                t=float(t), energy=complex(z), algebraic=alg, geometric=geom
            )
            fiber_rows.append(row)
            if not row.ok:
                witnesses.append(
                    f"fiber eigenvalue {z:.9g} at t = {t:.6f} has algebraic "
                    f"multiplicity {alg} but geometric multiplicity {geom}"
                )

    # gap distances against critical points
    per_flat = _flatten(catalog.periodic)
    anti_flat = _flatten(catalog.antiperiodic)
    crit = [c[0] for c in catalog.critical]
    rows: list[GapDistanceRow] = []
    k = 1
    while True:
        if k % 2 == 1:
            j = k - 1  # antiperiodic pair
            if j + 1 >= len(anti_flat):
                break
            lm, lp = anti_flat[j], anti_flat[j + 1]
        else:
            j = k - 1  # periodic pair, skipping the lowest simple point
            if j + 1 >= len(per_flat):
                break
            lm, lp = per_flat[j], per_flat[j + 1]
        if k - 1 >= len(crit) or k - 1 >= len(mu_ext):
            break
        mu = mu_ext[k - 1]
        delta = crit[k - 1]
        try:
            dist = distance_to_spectrum(delta, portrait)
        except WindowError:
            dist = math.nan
        in_q = math.isfinite(dist) and dist > thresholds.on_spectrum_rel * (
            1.0 + abs(delta)
        )
        if in_q:
            r_gap = abs(lp - lm) / dist
            r_minus = abs(mu - lm) / dist
            r_plus = abs(mu - lp) / dist
        else:
            r_gap = r_minus = r_plus = 0.0
        rows.append(
            GapDistanceRow(
                k=k,
                lam_minus=lm,
                lam_plus=lp,
                mu=mu,
                delta=delta,
                dist=dist if math.isfinite(dist) else -1.0,
                in_q=in_q,
                r_gap=r_gap,
                r_minus=r_minus,
                r_plus=r_plus,
            )
        )
        k += 1

    sups = [0.0, 0.0, 0.0]
    for row in rows:
        if row.in_q:
            sups = [
                max(sups[0], row.r_gap),
                max(sups[1], row.r_minus),
                max(sups[2], row.r_plus),
            ]

    # octave growth of the distance ratios over k
    oct_sups: list[tuple[float, float, float]] = []
    for lo, hi in _octave_ranges(rows[-1].k if rows else 0):
        s = [0.0, 0.0, 0.0]
        seen = False
        for row in rows:
            if lo <= row.k <= hi and row.in_q:
                seen = True
                s = [max(s[0], row.r_gap), max(s[1], row.r_minus), max(s[2], row.r_plus)]
        if seen:
            oct_sups.append((s[0], s[1], s[2]))
    floor = thresholds.distance_ratio_floor
    for prev, cur in zip(oct_sups, oct_sups[1:]):
        for j in range(3):
            # a supremum under the floor is either noise (exact endpoint
            # coincidences) or trivially bounded, so it cannot witness growth
            if cur[j] > floor and cur[j] / max(prev[j], floor) > thresholds.octave_growth_max:
                witnesses.append(
                    "gap-distance ratio grows past the octave threshold "
                    f"({prev[j]:.3e} -> {cur[j]:.3e})"
                )

    verdict = FAIL if witnesses else PASS
    return MultiplicityCheck(
        verdict=verdict,
        multiple_points=tuple(multiple_rows),
        fiber_checks=tuple(fiber_rows),
        distance_rows=tuple(rows),
        distance_sups=(sups[0], sups[1], sups[2]),
        witnesses=tuple(witnesses),
    )


# ---------------------------------------------------------------------------
# ratio-boundedness criterion (the third equivalent formulation)


def check_ratio_bounds(
    ratios: RatioDiagnostics,
    singularities: tuple[SingularityEstimate, ...],
    k_max: int,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
) -> tuple[str, tuple[str, ...], WindowTrend]:
    """Verdict from the kernel-ratio suprema alone.

    FAIL witnesses are a detected blowup point (the ratio diverges at a
    finite spectrum point) or octave growth of a supremum; PASS needs a
    decided, non-increasing trend across the final band octaves.
    """
    witnesses: list[str] = []
    for s in singularities:
        witnesses.append(
            f"kernel ratio blows up at {s.lambda0:.9g} "
            f"(fitted exponent {s.exponent:.2f}, peak {s.ratio_peak:.3e})"
        )
    trend = _window_trend(ratios.band_sups, k_max, thresholds)
    if trend.growth_witness:
        witnesses.append("ratio supremum grows past the octave threshold")
    if witnesses:
        return FAIL, tuple(witnesses), trend
    if trend.trend_ok:
        return PASS, (), trend
    return INCONCLUSIVE, (), trend


# ---------------------------------------------------------------------------
# fiber basis diagnostic


@dataclass(frozen=True, eq=False)
class RieszDiagnostic:
    """Frame-bound estimate for the fiber eigensystem at one t.

    Interior t: bound is the worst two-sided frame quotient over random
    band-limited test functions. At t = 0 mod pi the eigensystem can
    degenerate; bound is then the largest per-pair kernel-ratio sum,
    evaluated by a limiting formula at honest double points and by a
    floored quotient at defective ones.
    """

    t: float
    k_max: int
    mode: str  # "interior" or "pair"
    curve: tuple[tuple[int, complex, float], ...]
    frame_low: float
    frame_high: float
    bound: float


def _trapezoid(values: NDArray, dx: float) -> complex:
    return complex(dx * (np.sum(values) - 0.5 * values[0] - 0.5 * values[-1]))


def riesz_basis_diagnostic(
    V: Potential,
    t: float,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
    seed: int | None = None,
) -> RieszDiagnostic:
    """Estimate how far the fiber eigensystem is from an orthonormal one.

    For quasi-momentum away from 0 mod pi, the eigenvalues are simple
    and separated; the estimate is the two-sided frame quotient
    sum_k |<f, psi_k>|^2 / ||f||^2 over random test functions built
    from low periodic modes, with the eigenfunctions normalized in
    L2(0, pi). Near 0 mod pi the per-pair bound values are returned
    instead; they diverge exactly at defective double points.
    """
    if not 0.0 <= t <= 2.0 * np.pi + 1e-12:
        raise ConfigError("t must lie in [0, 2 pi]")
    t_eff = t % (2.0 * np.pi)
    interior = min(t_eff, abs(t_eff - np.pi), abs(t_eff - 2.0 * np.pi)) > 1e-9

    if interior:
        roots = fiber_spectrum(V, t_eff, k_max, tol, config)
        energies = [z for z, m in roots for _ in range(m)]
        n = thresholds.frame_grid_points
        x = np.linspace(0.0, np.pi, n)
        dx = x[1] - x[0]
        rho = np.exp(1j * t_eff)
        hatpsi = []
        for z in energies:
            fd = fundamental_system(V, z, x, tol, config)
            m11, m12 = fd.theta[-1], fd.phi[-1]
            m21, m22 = fd.theta_prime[-1], fd.phi_prime[-1]
            v1 = np.array([m12, rho - m11])
            v2 = np.array([rho - m22, m21])
            v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
            psi = v[0] * fd.theta + v[1] * fd.phi
            nrm = math.sqrt(abs(_trapezoid(np.abs(psi) ** 2, dx)))
            hatpsi.append(psi / nrm)
        rng = np.random.default_rng(config.seed if seed is None else seed)
        n_modes = max(1, k_max // 2 - 1)
        modes = np.exp(2j * np.outer(np.arange(-n_modes, n_modes + 1), x))
        q_lo, q_hi = math.inf, 0.0
        for _ in range(thresholds.frame_test_count):
            c = rng.standard_normal(modes.shape[0]) + 1j * rng.standard_normal(
                modes.shape[0]
            )
            f = c @ modes
            nf = abs(_trapezoid(np.abs(f) ** 2, dx))
            total = 0.0
            for psi in hatpsi:
                total += abs(_trapezoid(f * np.conj(psi), dx)) ** 2
            q = total / nf
            q_lo = min(q_lo, q)
            q_hi = max(q_hi, q)
        bound = max(q_hi, 1.0 / q_lo if q_lo > 0.0 else math.inf)
        curve = tuple(
            (k, complex(z), 0.0) for k, z in enumerate(energies)
        )
        return RieszDiagnostic(
            t=t_eff,
            k_max=k_max,
            mode="interior",
            curve=curve,
            frame_low=q_lo,
            frame_high=q_hi,
            bound=bound,
        )

    # t = 0 mod pi: per-pair bound values
    target = 1.0 if abs(t_eff) < 1e-9 or abs(t_eff - 2.0 * np.pi) < 1e-9 else -1.0
    roots = fiber_spectrum(V, 0.0 if target == 1.0 else np.pi, k_max, tol, config)
    curve_rows: list[tuple[int, complex, float]] = []
    floor = tol if tol is not None else config.ode_tol
    for k, (z, mult) in enumerate(roots):
        mb = monodromy_batch(V, np.array([z]), tol, config)
        lam_scale = 1.0 + abs(z)
        adot = abs(mb.delta_plus_dot[0])
        num1 = abs(mb.m12[0])
        num2 = abs(mb.m21[0]) / (abs(z) + 1.0)
        num3 = abs(mb.delta_minus[0]) / (math.sqrt(abs(z)) + 1.0)
        if adot >= config.sing_eps_abs * lam_scale:
            bound_k = (num1 + num2 + num3) / adot
        else:
            e = thresholds.contact_tol_rel * lam_scale
            addot = abs(mb.delta_plus_ddot[0])
            if num1 <= e and abs(mb.m21[0]) <= e and abs(mb.delta_minus[0]) <= e:
                # all numerators vanish with the denominator; limiting values
                dm_dz = (mb.m11_dz[0] - mb.m22_dz[0]) / 2.0
                bound_k = (
                    abs(mb.m12_dz[0])
                    + abs(mb.m21_dz[0]) / (abs(z) + 1.0)
                    + abs(dm_dz) / (math.sqrt(abs(z)) + 1.0)
                ) / max(addot, 1e-12)
            else:
                # defective double point: the quotient has no finite limit
                bound_k = (num1 + num2 + num3) / max(adot, floor)
        curve_rows.append((k, complex(z), float(bound_k)))
    bound = max((b for _, _, b in curve_rows), default=0.0)
    return RieszDiagnostic(
        t=t_eff,
        k_max=k_max,
        mode="pair",
        curve=tuple(curve_rows),
        frame_low=0.0,
        frame_high=0.0,
        bound=bound,
    )


# ---------------------------------------------------------------------------
# large-energy asymptotics of the parametrizing functions


@dataclass(frozen=True, eq=False)
class AsymptoticsCheck:
    """Residuals of the large-energy normal forms on the real axis.

    phi(z, pi) must match sin(pi zeta)/zeta to O(1/zeta^2), the trace
    half must match cos(pi zeta) to O(1/zeta^2), and the antitrace must
    decay like 1/zeta, all for z = zeta^2 on the computed window.
    """

    zeta: NDArray
    phi_residual: NDArray
    trace_residual: NDArray
    antitrace_residual: NDArray
    max_phi: float
    max_trace: float
    max_antitrace: float
    octave_maxes: tuple[tuple[float, float, float, float], ...]


def validate_parametrization_asymptotics(
    V: Potential,
    k_max: int,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    points_per_unit: int = 6,
) -> AsymptoticsCheck:
    """Check the square-root normal forms of the parametrizing functions.

    Requires a zero-mean potential; the residual curves are reported
    over zeta in [1, 2 k_max] (off the half-integers nothing special
    happens, so a uniform grid is used).
    """
    if abs(V.mean) > 1e-12 * (1.0 + V.scale()):
        raise ConfigError("asymptotics check requires a zero-mean potential")
    hi = max(2.0 * k_max, 2.0)
    n = int((hi - 1.0) * points_per_unit) + 1
    zeta = np.linspace(1.0, hi, n)
    mb = monodromy_batch(V, (zeta**2).astype(complex), tol, config)
    r_phi = zeta**2 * np.abs(mb.m12 - np.sin(np.pi * zeta) / zeta)
    r_trace = zeta**2 * np.abs(mb.delta_plus - np.cos(np.pi * zeta))
    r_anti = zeta * np.abs(mb.delta_minus)
    octs: list[tuple[float, float, float, float]] = []
    lo = 1.0
    while lo < hi:
        up = min(2.0 * lo, hi)
        mask = (zeta >= lo) & (zeta <= up)
        if np.any(mask):
            octs.append(
                (
                    lo,
                    float(np.max(r_phi[mask])),
                    float(np.max(r_trace[mask])),
                    float(np.max(r_anti[mask])),
                )
            )
        lo = up
    return AsymptoticsCheck(
        zeta=zeta,
        phi_residual=r_phi,
        trace_residual=r_trace,
        antitrace_residual=r_anti,
        max_phi=float(np.max(r_phi)),
        max_trace=float(np.max(r_trace)),
        max_antitrace=float(np.max(r_anti)),
        octave_maxes=tuple(octs),
    )


# ---------------------------------------------------------------------------
# report assembly


@dataclass(frozen=True, eq=False)
class CriterionReport:
    """Full scalar-spectrality report for one potential.

    verdict combines three equivalent criteria; they are required to
    agree, and their individual verdicts are kept for inspection.
    ratio_sups are the suprema of the three kernel ratios over regular
    arc samples. All spectral locations are reported in the original
    coordinates (the computation itself runs on the zero-mean shift,
    recorded in mean).
    """

    verdict: str
    ratio_sups: tuple[float, float, float]
    thm43_analyticity: AnalyticityCheck
    thm45: MultiplicityCheck
    singularities: tuple[SingularityEstimate, ...]
    window: WindowTrend
    ratios: RatioDiagnostics
    check_verdicts: tuple[str, str, str]
    witnesses: tuple[str, ...]
    mean: complex
    k_max: int


def evaluate_criterion(
    V: Potential,
    k_max: int = 8,
    tol: float | None = None,
    config: RunConfig = DEFAULT_CONFIG,
    thresholds: CriterionThresholds = DEFAULT_THRESHOLDS,
    catalog: SpectraCatalog | None = None,
    portrait: SpectrumPortrait | None = None,
) -> CriterionReport:
    """Run all three criteria on the first k_max bands and combine them.

    FAIL requires a concrete witness from at least one criterion; PASS
    requires every criterion to pass including the non-increasing trend
    of the ratio suprema across the final band octaves; everything else
    is INCONCLUSIVE. The three criteria are mathematically equivalent,
    so a mixed PASS/FAIL combination indicates a defect and raises.
    """
    if k_max < 1:
        raise ConfigError("k_max must be at least 1")
    V0, mean = shift_to_zero_mean(V)
    if catalog is None:
        catalog = spectra_catalog(V0, k_max, tol, config)
    if portrait is None:
        portrait = spectrum_portrait(V0, k_max, tol, config)

    ratios = ratio_diagnostics(V0, portrait, tol, config, thresholds)
    singularities = detect_spectral_singularities(
        V0, portrait, catalog=catalog, ratios=ratios, tol=tol, config=config,
        thresholds=thresholds,
    )
    t43 = check_theorem_43(
        V0, portrait, catalog, ratios=ratios, tol=tol, config=config,
        thresholds=thresholds,
    )
    t45 = check_theorem_45(V0, catalog, portrait, tol, config, thresholds)
    v44, w44, trend = check_ratio_bounds(ratios, singularities, k_max, thresholds)

    check_verdicts = (t43.verdict, v44, t45.verdict)
    if FAIL in check_verdicts and PASS in check_verdicts:
        raise AssertionError(
            f"equivalent criteria disagree: {check_verdicts}; this is a bug"
        )
    if FAIL in check_verdicts:
        verdict = FAIL
    elif all(v == PASS for v in check_verdicts):
        verdict = PASS
    else:
        verdict = INCONCLUSIVE

    shifted = tuple(
        SingularityEstimate(
            lambda0=s.lambda0 + mean,
            exponent=s.exponent,
            ratio_peak=s.ratio_peak,
            samples_used=s.samples_used,
        )
        for s in singularities
    )
    witnesses = t43.witnesses + w44 + t45.witnesses
    return CriterionReport(
        verdict=verdict,
        ratio_sups=ratios.sups,
        thm43_analyticity=t43,
        thm45=t45,
        singularities=shifted,
        window=trend,
        ratios=ratios,
        check_verdicts=check_verdicts,
        witnesses=witnesses,
        mean=mean,
        k_max=k_max,
    )
