"""Command-line interface for the Hill-operator spectral toolkit.

Subcommands
-----------
spectra    Dirichlet / periodic / antiperiodic / critical-point window
portrait   traced spectral arcs (CSV) plus gap and singularity summary (JSON)
criterion  scalar-spectrality verdict with quantitative witnesses
project    Riesz projection of a grid function onto one spectral band
expand     truncated band expansion with per-band contribution norms
greens     resolvent kernel on a grid, as CSV
validate   invariant suite with a pass/fail table

The potential is chosen with ``--preset name[:parameter]`` (zero,
constant, mathieu, gasymov; the parameter is a Python complex literal,
e.g. ``mathieu:0.5`` or ``constant:0.7+0.3j``) or with
``--potential-file`` pointing at a JSON document matching
``schemas/potential.schema.json``.

Every JSON artifact is checked against its bundled schema before it is
written.  With a fixed potential, flags and seed, reruns are
byte-identical.

Exit codes: 0 success (for ``criterion``: verdict PASS), 1 criterion
FAIL, 2 criterion INCONCLUSIVE, 64 bad usage or configuration, 65
numerical failure.  ``validate`` exits 65 when any invariant fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .arcs import SpectrumPortrait, spectrum_portrait
from .config import DEFAULT_CONFIG, RunConfig
from .criterion import CriterionReport, evaluate_criterion
from .errors import ConfigError, HillError
from .floquet import branch_root, fundamental_system, greens_matrix, monodromy_batch
from .potential import (
    Potential,
    load_potential,
    preset,
    semistrip_numbers,
    shift_to_zero_mean,
)
from .projection import (
    GridFunction,
    gaussian_bump,
    gelfand_forward,
    gelfand_inverse,
    make_grid_function,
    project,
    spectral_matrix,
)
from .schemas import load_schema, validate_json
from .spectra import fiber_spectrum, spectra_catalog

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 64
EXIT_NUMERICAL = 65

_VERDICT_EXIT = {"PASS": EXIT_OK, "FAIL": EXIT_FAIL, "INCONCLUSIVE": EXIT_INCONCLUSIVE}


# ---------------------------------------------------------------------------
# serialization helpers


def _c(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _roots(roots) -> list[dict]:
    return [{"value": _c(z), "multiplicity": int(m)} for z, m in roots]


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form, deterministic across runs."""
    return repr(float(x))


def _write_json(path: str, doc: dict, schema_name: str) -> None:
    validate_json(doc, load_schema(schema_name))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# input resolution


def _parse_complex(text: str) -> complex:
    text = text.strip()
    try:
        if "," in text:
            re_s, im_s = text.split(",", 1)
            return complex(float(re_s), float(im_s))
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number from {text!r}") from exc


def _resolve_potential(args) -> Potential:
    if args.preset and args.potential_file:
        raise ConfigError("give either --preset or --potential-file, not both")
    if args.potential_file:
        return load_potential(args.potential_file)
    if args.preset:
        name, _, par = args.preset.partition(":")
        parameter = _parse_complex(par) if par else None
        return preset(name, parameter)
    raise ConfigError("no potential given; use --preset or --potential-file")


def _label(V: Potential) -> str:
    return V.label or "custom"


def _read_grid_csv(path: str) -> GridFunction:
    xs: list[float] = []
    vs: list[complex] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                parts = line.strip().split(",")
                if len(parts) < 2:
                    continue
                try:
                    nums = [float(p) for p in parts[:3]]
                except ValueError:
                    continue  # header or comment line
                xs.append(nums[0])
                vs.append(complex(nums[1], nums[2] if len(nums) > 2 else 0.0))
    except OSError as exc:
        raise ConfigError(f"cannot read grid CSV {path}: {exc}") from exc
    if not xs:
        raise ConfigError(f"no numeric rows found in {path}")
    return make_grid_function(np.asarray(xs), np.asarray(vs))


def _input_function(args) -> GridFunction:
    if args.input_csv:
        return _read_grid_csv(args.input_csv)
    return gaussian_bump(
        center=args.center,
        width=args.width,
        modulation=args.modulation,
        n_cells=args.cells,
        points_per_cell=args.points_per_cell,
    )


def _grid_doc(g: GridFunction) -> dict:
    return {
        "n_cells": int(g.n_cells),
        "points_per_cell": int(g.points_per_cell),
        "x_lo": float(g.x_grid[0]),
        "x_hi": float(g.x_grid[-1] + g.spacing),
        "spacing": float(g.spacing),
    }


def _grid_rows(g: GridFunction):
    for x, v in zip(g.x_grid, g.values):
        yield (_fmt(x), _fmt(v.real), _fmt(v.imag))


# ---------------------------------------------------------------------------
# spectra


def _cmd_spectra(args) -> int:
    V = _resolve_potential(args)
    cat = spectra_catalog(V, k_max=args.kmax, tol=args.tol)
    doc = {
        "kind": "spectra",
        "label": _label(V),
        "k_max": int(cat.k_max),
        "search_region": [float(v) for v in cat.search_region],
        "dirichlet": _roots(cat.dirichlet),
        "periodic": _roots(cat.periodic),
        "antiperiodic": _roots(cat.antiperiodic),
        "critical": [
            {"location": _c(d), "value": _c(g), "order": int(p)}
            for d, g, p in cat.critical
        ],
    }
    fmt = args.format or "json"
    if fmt == "json":
        path = _out_path(args, "spectra.json")
        _write_json(path, doc, "spectra")
    else:
        path = _out_path(args, "spectra.csv")
        rows = []
        for family in ("dirichlet", "periodic", "antiperiodic"):
            for i, entry in enumerate(doc[family], start=1):
                re_s, im_s = entry["value"]
                rows.append(
                    (family, str(i), _fmt(re_s), _fmt(im_s), str(entry["multiplicity"]))
                )
        for i, entry in enumerate(doc["critical"], start=1):
            rows.append(
                ("critical", str(i), _fmt(entry["location"][0]),
                 _fmt(entry["location"][1]), str(entry["order"]))
            )
        _write_csv(path, "family,index,re,im,count", rows)
    print(
        f"spectra[{_label(V)}]: {len(cat.dirichlet)} dirichlet, "
        f"{len(cat.periodic)} periodic, {len(cat.antiperiodic)} antiperiodic, "
        f"{len(cat.critical)} critical -> {path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# portrait


def _gap_rows(portrait: SpectrumPortrait, mean: complex) -> list[dict]:
    by_band: dict[int, list[complex]] = {}
    for arc in portrait.arcs:
        lams = [complex(w) + mean for w in np.asarray(arc.lambda_samples)]
        by_band.setdefault(int(arc.band_index), []).extend(lams)
    gaps = []
    for k in sorted(by_band):
        if k + 1 not in by_band:
            continue
        lower = max(by_band[k], key=lambda w: w.real)
        upper = min(by_band[k + 1], key=lambda w: w.real)
        width = abs(upper - lower)
        gaps.append(
            {
                "k": k,
                "lower": _c(lower),
                "upper": _c(upper),
                "width": float(width),
                "open": bool(width > 1e-8 * (1.0 + abs(lower))),
            }
        )
    return gaps


def _cmd_portrait(args) -> int:
    V = _resolve_potential(args)
    V0, mean = shift_to_zero_mean(V)
    portrait = spectrum_portrait(V0, k_max=args.kmax, tol=args.tol)

    csv_path = _out_path(args, "portrait_arcs.csv")
    rows = []
    for ai, arc in enumerate(portrait.arcs):
        lam = np.asarray(arc.lambda_samples) + mean
        dlam = np.asarray(arc.dlambda_dt)
        ddot = np.asarray(arc.delta_dot_samples)
        for j, t in enumerate(np.asarray(arc.t_samples)):
            rows.append(
                (str(ai), str(int(arc.band_index)), _fmt(t),
                 _fmt(lam[j].real), _fmt(lam[j].imag),
                 _fmt(dlam[j].real), _fmt(dlam[j].imag),
                 _fmt(ddot[j].real), _fmt(ddot[j].imag))
            )
    _write_csv(
        csv_path,
        "arc,band,t,lambda_re,lambda_im,dlambda_dt_re,dlambda_dt_im,"
        "delta_plus_dot_re,delta_plus_dot_im",
        rows,
    )

    gaps = _gap_rows(portrait, mean)
    arc_docs = []
    for ai, arc in enumerate(portrait.arcs):
        ts = np.asarray(arc.t_samples)
        lam = np.asarray(arc.lambda_samples) + mean
        arc_docs.append(
            {
                "arc": ai,
                "band": int(arc.band_index),
                "regular": bool(arc.regular),
                "samples": int(ts.size),
                "t_lo": float(ts[0]),
                "t_hi": float(ts[-1]),
                "lambda_start": _c(lam[0]),
                "lambda_end": _c(lam[-1]),
            }
        )
    doc = {
        "kind": "portrait",
        "label": _label(V),
        "k_max": int(portrait.k_max),
        "mean": _c(mean),
        "semistrip": [float(v) for v in semistrip_numbers(V)],
        "arcs": arc_docs,
        "gaps": gaps,
        "open_gaps": sum(1 for gap in gaps if gap["open"]),
        "singular_points": [
            {
                "lambda0": _c(complex(sp.lambda0) + mean),
                "delta_plus": _c(sp.delta_plus),
                "delta_minus": _c(sp.delta_minus),
                "phi_pi": _c(sp.phi_pi),
                "spectral_singularity": bool(sp.spectral_singularity),
                "classification": str(sp.classification),
            }
            for sp in portrait.singular_points
        ],
    }
    json_path = _out_path(args, "portrait_summary.json")
    _write_json(json_path, doc, "portrait_summary")
    bands = {int(a.band_index) for a in portrait.arcs}
    print(
        f"portrait[{_label(V)}]: {len(portrait.arcs)} arcs over {len(bands)} bands, "
        f"{doc['open_gaps']} open gaps, {len(portrait.singular_points)} singular "
        f"points -> {csv_path}, {json_path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# criterion


_RATIO_NAMES = (
    "|phi(.,pi)| / |Delta_plus_dot|",
    "|theta'(.,pi)| / ((1+|z|) |Delta_plus_dot|)",
    "|Delta_minus| / |Delta_plus_dot|",
)


def _criterion_summary(rep: CriterionReport, label: str) -> str:
    lines = [f"scalar-type criterion for {label} (k_max = {rep.k_max})"]
    lines.append(f"verdict: {rep.verdict}")
    for name, v in zip(("analyticity", "ratio-boundedness", "multiplicity"),
                       rep.check_verdicts):
        lines.append(f"  {name:<18} {v}")
    for name, sup, band in zip(_RATIO_NAMES, rep.ratio_sups, rep.ratios.argmax_bands):
        lines.append(f"  sup {name:<44} = {sup:.6e}  (band {band})")
    trans = ", ".join(f"{t:.4f}" for t in rep.window.transitions)
    lines.append(f"  octave transitions of the suprema: [{trans}]")
    d1, d2, d3 = rep.thm45.distance_sups
    lines.append(
        f"  gap-distance suprema: r_gap = {d1:.6e}, r_minus = {d2:.6e}, "
        f"r_plus = {d3:.6e}"
    )
    if rep.singularities:
        lines.append("  suspected spectral singularities:")
        for s in rep.singularities:
            lines.append(
                f"    lambda0 = {s.lambda0.real:.8f}{s.lambda0.imag:+.2e}j, "
                f"blow-up exponent {s.exponent:.3f}, peak ratio {s.ratio_peak:.3e}"
            )
    else:
        lines.append("  suspected spectral singularities: none")
    if rep.witnesses:
        lines.append("  witnesses:")
        for w in rep.witnesses:
            lines.append(f"    - {w}")
    else:
        lines.append("  witnesses: none")
    return "\n".join(lines)


def _window_doc(trend) -> dict:
    return {
        "k_max": int(trend.k_max),
        "octave_sups": [[float(v) for v in row] for row in trend.octave_sups],
        "transitions": [float(t) for t in trend.transitions],
        "growth_witness": bool(trend.growth_witness),
        "trend_ok": bool(trend.trend_ok),
        "decided": bool(trend.decided),
    }


def _criterion_doc(rep: CriterionReport, label: str, summary: str) -> dict:
    an = rep.thm43_analyticity
    mu = rep.thm45
    rd = rep.ratios
    arc_rows = []
    for a in rd.arc_data:
        inc = np.asarray(a.included, dtype=bool)

        def _mx(arr):
            vals = np.asarray(arr, dtype=float)[inc]
            return float(vals.max()) if vals.size else 0.0

        arc_rows.append(
            {
                "arc": int(a.arc_index),
                "band": int(a.band_index),
                "samples": int(inc.size),
                "included": int(inc.sum()),
                "r1_max": _mx(a.r1),
                "r2_max": _mx(a.r2),
                "r3_max": _mx(a.r3),
            }
        )
    return {
        "kind": "criterion",
        "label": label,
        "k_max": int(rep.k_max),
        "mean": _c(rep.mean),
        "verdict": rep.verdict,
        "check_verdicts": list(rep.check_verdicts),
        "ratio_sups": [float(v) for v in rep.ratio_sups],
        "witnesses": list(rep.witnesses),
        "summary": summary,
        "analyticity": {
            "verdict": an.verdict,
            "witnesses": list(an.witnesses),
            "points": [
                {
                    "delta": _c(p.delta),
                    "order": int(p.order),
                    "dist_to_spectrum": float(p.dist_to_spectrum),
                    "on_spectrum": bool(p.on_spectrum),
                    "trace_defect": float(p.trace_defect),
                    "antitrace": float(p.antitrace),
                    "dirichlet_value": float(p.dirichlet_value),
                    "curvature": float(p.curvature),
                    "contact_ok": None if p.contact_ok is None else bool(p.contact_ok),
                    "mean_outer": None if p.mean_outer is None else float(p.mean_outer),
                    "mean_inner": None if p.mean_inner is None else float(p.mean_inner),
                    "circle_ratio": (
                        None if p.circle_ratio is None else float(p.circle_ratio)
                    ),
                    "removable": None if p.removable is None else bool(p.removable),
                }
                for p in an.points
            ],
            "trend": _window_doc(an.trend),
        },
        "multiplicity": {
            "verdict": mu.verdict,
            "witnesses": list(mu.witnesses),
            "multiple_points": [
                {
                    "lambda": _c(p.lam),
                    "multiplicity": int(p.mult),
                    "family": p.family,
                    "nearest_dirichlet": _c(p.nearest_dirichlet),
                    "dist": float(p.dist),
                    "ok": bool(p.ok),
                }
                for p in mu.multiple_points
            ],
            "fiber_checks": [
                {
                    "t": float(f.t),
                    "energy": _c(f.energy),
                    "algebraic": int(f.algebraic),
                    "geometric": int(f.geometric),
                    "ok": bool(f.ok),
                }
                for f in mu.fiber_checks
            ],
            "distance_rows": [
                {
                    "k": int(r.k),
                    "lambda_minus": _c(r.lam_minus),
                    "lambda_plus": _c(r.lam_plus),
                    "mu": _c(r.mu),
                    "delta": _c(r.delta),
                    "dist": float(r.dist),
                    "in_q": bool(r.in_q),
                    "r_gap": float(r.r_gap),
                    "r_minus": float(r.r_minus),
                    "r_plus": float(r.r_plus),
                }
                for r in mu.distance_rows
            ],
            "distance_sups": [float(v) for v in mu.distance_sups],
        },
        "singularities": [
            {
                "lambda0": _c(s.lambda0),
                "exponent": float(s.exponent),
                "ratio_peak": float(s.ratio_peak),
                "samples_used": int(s.samples_used),
            }
            for s in rep.singularities
        ],
        "window": _window_doc(rep.window),
        "ratios": {
            "arcs": arc_rows,
            "band_sups": [[float(v) for v in row] for row in rd.band_sups],
            "window_table": [[float(v) for v in row] for row in rd.window_table],
            "sups": [float(v) for v in rd.sups],
            "argmax_bands": [int(b) for b in rd.argmax_bands],
            "excluded_samples": int(rd.excluded_samples),
        },
    }


def _cmd_criterion(args) -> int:
    V = _resolve_potential(args)
    rep = evaluate_criterion(V, k_max=args.kmax, tol=args.tol)
    summary = _criterion_summary(rep, _label(V))
    doc = _criterion_doc(rep, _label(V), summary)
    path = _out_path(args, "criterion_report.json")
    _write_json(path, doc, "criterion_report")
    print(summary)
    print(f"report -> {path}")
    return _VERDICT_EXIT[rep.verdict]


# ---------------------------------------------------------------------------
# project / expand


def _band_projection(
    V0: Potential,
    portrait: SpectrumPortrait,
    band: int,
    g: GridFunction,
    tol: float | None,
) -> tuple[np.ndarray, int]:
    arcs = [a for a in portrait.arcs if int(a.band_index) == band]
    if not arcs:
        raise ConfigError(f"band {band} is not covered by the portrait")
    total = np.zeros_like(g.values)
    for arc in arcs:
        total = total + project(V0, arc, g, tol=tol).values
    return total, len(arcs)


def _cmd_project(args) -> int:
    V = _resolve_potential(args)
    V0, mean = shift_to_zero_mean(V)
    if args.band < 1 or args.band > args.kmax:
        raise ConfigError(f"--band must lie in 1..kmax (= {args.kmax})")
    g = _input_function(args)
    portrait = spectrum_portrait(V0, k_max=args.kmax, tol=args.tol)
    values, n_arcs = _band_projection(V0, portrait, args.band, g, args.tol)
    pg = make_grid_function(g.x_grid, values)

    csv_path = _out_path(args, "project_result.csv")
    _write_csv(csv_path, "x,re,im", _grid_rows(pg))
    doc = {
        "kind": "project",
        "label": _label(V),
        "band": int(args.band),
        "mean": _c(mean),
        "arcs_used": int(n_arcs),
        "panels": int(DEFAULT_CONFIG.quad_points_per_band),
        "nodes_per_panel": 4,
        "norm_input": g.norm(),
        "norm_output": pg.norm(),
        "grid": _grid_doc(g),
    }
    json_path = _out_path(args, "project_diagnostics.json")
    _write_json(json_path, doc, "project_diagnostics")
    print(
        f"project[{_label(V)}]: band {args.band}, |g| = {g.norm():.6e}, "
        f"|P g| = {pg.norm():.6e} -> {csv_path}, {json_path}"
    )
    return EXIT_OK


def _cmd_expand(args) -> int:
    V = _resolve_potential(args)
    V0, mean = shift_to_zero_mean(V)
    if args.band_max < 1 or args.band_max > args.kmax:
        raise ConfigError(f"--band-max must lie in 1..kmax (= {args.kmax})")
    g = _input_function(args)
    rep = evaluate_criterion(V, k_max=args.kmax, tol=args.tol)
    if rep.verdict == "FAIL" and not args.force:
        raise ConfigError(
            "expansion refused: the potential has spectral singularities "
            "(criterion verdict FAIL); pass --force to override"
        )
    portrait = spectrum_portrait(V0, k_max=args.kmax, tol=args.tol)
    total = np.zeros_like(g.values)
    per_band = []
    for band in range(1, args.band_max + 1):
        values, _ = _band_projection(V0, portrait, band, g, args.tol)
        total = total + values
        norm_k = float(np.sqrt(g.spacing * np.sum(np.abs(values) ** 2)))
        per_band.append({"band": band, "norm": norm_k})
    eg = make_grid_function(g.x_grid, total)
    residual = float(
        np.sqrt(g.spacing * np.sum(np.abs(g.values - total) ** 2))
        / max(g.norm(), 1e-300)
    )

    csv_path = _out_path(args, "expand_result.csv")
    _write_csv(csv_path, "x,re,im", _grid_rows(eg))
    doc = {
        "kind": "expand",
        "label": _label(V),
        "band_max": int(args.band_max),
        "mean": _c(mean),
        "verdict": rep.verdict,
        "forced": bool(args.force),
        "norm_input": g.norm(),
        "norm_output": eg.norm(),
        "residual": residual,
        "per_band": per_band,
        "grid": _grid_doc(g),
    }
    json_path = _out_path(args, "expand_diagnostics.json")
    _write_json(json_path, doc, "expand_diagnostics")
    print(f"expand[{_label(V)}]: bands 1..{args.band_max}, verdict {rep.verdict}")
    for row in per_band:
        print(f"  band {row['band']}: |P g| = {row['norm']:.6e}")
    print(f"  residual |g - sum| / |g| = {residual:.6e} -> {csv_path}, {json_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# greens


def _cmd_greens(args) -> int:
    V = _resolve_potential(args)
    z = _parse_complex(args.z)
    from .projection import grid_for_cells

    x = grid_for_cells(args.cells, args.points_per_cell)
    kernel = greens_matrix(V, z, x, tol=args.tol)
    csv_path = _out_path(args, "greens_kernel.csv")

    def rows():
        for i, xi in enumerate(x):
            for j, yj in enumerate(x):
                yield (_fmt(xi), _fmt(yj),
                       _fmt(kernel[i, j].real), _fmt(kernel[i, j].imag))

    _write_csv(csv_path, "x,y,re,im", rows())
    print(
        f"greens[{_label(V)}]: z = {z}, {x.size}x{x.size} kernel, "
        f"sup |K| = {float(np.abs(kernel).max()):.6e} -> {csv_path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def _draw_z(rng: np.random.Generator, n: int, box=(-20.0, 60.0, -20.0, 20.0)):
    re = rng.uniform(box[0], box[1], size=n)
    im = rng.uniform(box[2], box[3], size=n)
    return re + 1j * im


def _validate_checks(V: Potential, k_max: int, seed: int, tol: float | None):
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, samples, err, budget):
        rows.append(
            {
                "check": name,
                "samples": int(samples),
                "max_error": float(err),
                "tolerance": float(budget),
                "status": "PASS" if err <= budget else "FAIL",
            }
        )

    # structural identities of the monodromy matrix; every identity is
    # scaled by the entry magnitudes, since the raw residuals inherit
    # |M|^2 cancellation noise wherever the discriminant is large
    z = _draw_z(rng, 40)
    mb = monodromy_batch(V, z, tol=tol)
    det = mb.m11 * mb.m22 - mb.m12 * mb.m21
    det_scale = 1.0 + np.abs(mb.m11 * mb.m22) + np.abs(mb.m12 * mb.m21)
    add("monodromy-determinant", z.size, (np.abs(det - 1.0) / det_scale).max(), 1e-12)
    lhs = mb.delta_plus**2 - 1.0 - mb.delta_minus**2
    rhs = mb.m12 * mb.m21
    scale = 1.0 + np.abs(mb.delta_plus) ** 2 + np.abs(mb.delta_minus) ** 2
    add("discriminant-identity", z.size, (np.abs(lhs - rhs) / scale).max(), 1e-11)
    s = branch_root(mb.delta_plus)
    rho = (mb.delta_plus + 1j * s) * (mb.delta_plus - 1j * s)
    rho_scale = 1.0 + np.abs(mb.delta_plus) ** 2
    add("multiplier-product", z.size, (np.abs(rho - 1.0) / rho_scale).max(), 1e-12)

    # Weyl coefficients, away from Dirichlet points
    keep = np.abs(mb.m12) > 1e-2
    mp = (-mb.delta_minus + 1j * s) / mb.m12
    mm = (-mb.delta_minus - 1j * s) / mb.m12
    e_sum = np.abs(mp + mm + 2.0 * mb.delta_minus / mb.m12) / (
        1.0 + np.abs(mp) + np.abs(mm)
    )
    e_prod = np.abs(mp * mm + mb.m21 / mb.m12) / (1.0 + np.abs(mp * mm))
    add("weyl-sum-identity", int(keep.sum()), e_sum[keep].max(), 1e-10)
    add("weyl-product-identity", int(keep.sum()), e_prod[keep].max(), 1e-10)

    # variational z-derivative against a central difference
    zv = _draw_z(rng, 12, box=(-15.0, 30.0, -8.0, 8.0))
    h = 1e-4 * (1.0 + np.abs(zv))
    mb_v = monodromy_batch(V, zv, tol=tol)
    mb_p = monodromy_batch(V, zv + h, tol=tol)
    mb_m = monodromy_batch(V, zv - h, tol=tol)
    fd = (mb_p.delta_plus - mb_m.delta_plus) / (2.0 * h)
    e_var = np.abs(fd - mb_v.delta_plus_dot) / (1.0 + np.abs(mb_v.delta_plus_dot))
    add("variational-derivative", zv.size, e_var.max(), 1e-6)

    # propagator accuracy: loose against tight tolerance
    zt = _draw_z(rng, 10, box=(-10.0, 25.0, -6.0, 6.0))
    d_loose = monodromy_batch(V, zt, tol=3e-7).delta_plus
    d_tight = monodromy_batch(V, zt, tol=1e-12).delta_plus
    e_tol = np.abs(d_loose - d_tight) / (1.0 + np.abs(d_tight))
    add("tolerance-consistency", zt.size, e_tol.max(), 1e-6)

    # direct-integral transform: round trip and Parseval
    ppc = 64
    vals = rng.standard_normal(8 * ppc) + 1j * rng.standard_normal(8 * ppc)
    from .projection import grid_for_cells

    g = make_grid_function(grid_for_cells(4, ppc), vals)
    G = gelfand_forward(g)
    gg = gelfand_inverse(G)
    e_round = float(
        np.sqrt(np.sum(np.abs(gg.values - g.values) ** 2)
                / np.sum(np.abs(g.values) ** 2))
    )
    nt = G.values.shape[1]
    energy_g = float(np.sum(np.abs(g.values) ** 2))
    energy_G = float(np.sum(np.abs(G.values) ** 2) / nt)
    e_pars = abs(energy_G - energy_g) / energy_g
    add("gelfand-roundtrip", g.values.size, e_round, 1e-12)
    add("gelfand-parseval", g.values.size, e_pars, 1e-12)

    # cleared biorthogonality of the fiber eigenbasis at an interior t
    t = 1.0
    roots = [complex(E) for E, m in fiber_spectrum(V, t, k_max=5, tol=tol) if m == 1]
    xs = np.arange(512) * (np.pi / 512.0)
    hx = np.pi / 512.0
    st = np.sin(t)
    psi_p, psi_m, diag_ref = [], [], []
    for E in roots:
        fd_sys = fundamental_system(V, E, np.append(xs, np.pi), tol=tol)
        m12 = fd_sys.phi[-1]
        dm = 0.5 * (fd_sys.theta[-1] - fd_sys.phi_prime[-1])
        dz = 0.5 * (fd_sys.dtheta_dz[-1] + fd_sys.dphi_prime_dz[-1])
        th, ph = fd_sys.theta[:-1], fd_sys.phi[:-1]
        psi_p.append(m12 * th + (-dm + 1j * st) * ph)
        psi_m.append(m12 * th + (-dm - 1j * st) * ph)
        diag_ref.append(-2.0 * m12 * dz)
    n_r = len(roots)
    B = np.zeros((n_r, n_r), dtype=complex)
    for i in range(n_r):
        for j in range(n_r):
            B[i, j] = hx * np.sum(psi_m[i] * psi_p[j])
    dscale = np.sqrt(np.abs(np.diag(B)))
    off = np.abs(B) / np.outer(dscale, dscale)
    np.fill_diagonal(off, 0.0)
    add("fiber-biorthogonality", n_r * n_r, float(off.max()), 1e-8)
    e_diag = max(
        abs(B[i, i] - diag_ref[i]) / abs(diag_ref[i]) for i in range(n_r)
    )
    add("fiber-pairing-diagonal", n_r, float(e_diag), 1e-8)

    # spectral density matrix determinant on the spectrum
    worst_det = 0.0
    n_det = 0
    for t_probe in (0.8, 1.7, 2.4):
        for E, m in fiber_spectrum(V, t_probe, k_max=3, tol=tol):
            if m != 1:
                continue
            S = spectral_matrix(V, complex(E), t=t_probe, tol=tol)
            worst_det = max(
                worst_det,
                abs(np.linalg.det(S) - 1.0 / (4.0 * np.pi**2)) * 4.0 * np.pi**2,
            )
            n_det += 1
    add("spectral-matrix-determinant", n_det, worst_det, 1e-8)

    # defining equations at the computed spectra
    cat = spectra_catalog(V, k_max=min(k_max, 3), tol=tol)
    worst_cat = 0.0
    n_cat = 0
    for z0, _ in cat.dirichlet:
        md = monodromy_batch(V, [z0], tol=tol)
        worst_cat = max(worst_cat, float(np.abs(md.m12[0]) / (1.0 + abs(z0))))
        n_cat += 1
    for family, target in ((cat.periodic, 1.0), (cat.antiperiodic, -1.0)):
        for z0, _ in family:
            md = monodromy_batch(V, [z0], tol=tol)
            worst_cat = max(
                worst_cat, float(np.abs(md.delta_plus[0] - target) / (1.0 + abs(z0)))
            )
            n_cat += 1
    add("catalog-defining-equations", n_cat, worst_cat, 1e-7)

    return rows


def _cmd_validate(args) -> int:
    V = _resolve_potential(args)
    rows = _validate_checks(V, args.kmax, args.seed, args.tol)
    status = "PASS" if all(r["status"] == "PASS" for r in rows) else "FAIL"
    doc = {
        "kind": "validate",
        "label": _label(V),
        "k_max": int(args.kmax),
        "seed": int(args.seed),
        "status": status,
        "checks": rows,
    }
    path = _out_path(args, "validate_table.json")
    _write_json(path, doc, "validate_table")

    print(f"invariant suite for {_label(V)} (k_max = {args.kmax}, seed = {args.seed})")
    print(f"  {'check':<30} {'samples':>7} {'max error':>12} {'tolerance':>12} status")
    for r in rows:
        print(
            f"  {r['check']:<30} {r['samples']:>7d} {r['max_error']:>12.4e} "
            f"{r['tolerance']:>12.4e} {r['status']}"
        )
    print(f"overall: {status} -> {path}")
    return EXIT_OK if status == "PASS" else EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want 64
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser, kmax_default: int) -> None:
    p.add_argument("--preset", help="named potential, e.g. zero, mathieu:0.5, gasymov:1")
    p.add_argument("--potential-file", help="JSON potential description")
    p.add_argument("--kmax", type=int, default=kmax_default,
                   help=f"number of bands in the window (default {kmax_default})")
    p.add_argument("--tol", type=float, default=None,
                   help="ODE/root tolerance override")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized checks (default 0)")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="artifact format where a choice exists")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input-csv", default=None,
                   help="grid function as CSV rows x,re,im on a cell-aligned grid")
    p.add_argument("--center", type=float, default=0.0,
                   help="bump center (default 0)")
    p.add_argument("--width", type=float, default=2.0, help="bump width (default 2)")
    p.add_argument("--modulation", type=float, default=0.0,
                   help="bump carrier frequency (default 0)")
    p.add_argument("--cells", type=int, default=4,
                   help="window half-width in period cells (default 4)")
    p.add_argument("--points-per-cell", type=int, default=128,
                   help="grid resolution per cell (default 128)")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hillspec",
        description="Floquet spectra, band projections and the scalar-type "
        "criterion for complex Hill operators -d^2/dx^2 + V(x).",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectra",
                       help="Dirichlet/periodic/antiperiodic/critical window")
    _add_common(p, kmax_default=8)
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("portrait",
                       help="traced spectral arcs with gap summary")
    _add_common(p, kmax_default=8)
    p.set_defaults(func=_cmd_portrait)

    p = sub.add_parser("criterion",
                       help="scalar-spectrality verdict (exit 0/1/2)")
    _add_common(p, kmax_default=8)
    p.set_defaults(func=_cmd_criterion)

    p = sub.add_parser("project",
                       help="Riesz projection onto one band")
    _add_common(p, kmax_default=4)
    _add_grid_flags(p)
    p.add_argument("--band", type=int, required=True, help="band index, 1-based")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("expand",
                       help="truncated band expansion")
    _add_common(p, kmax_default=8)
    _add_grid_flags(p)
    p.add_argument("--band-max", type=int, default=4,
                   help="highest band in the sum (default 4)")
    p.add_argument("--force", action="store_true",
                   help="expand even when the criterion verdict is FAIL")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("greens",
                       help="resolvent kernel on a grid")
    _add_common(p, kmax_default=4)
    p.add_argument("--z", required=True,
                   help="spectral parameter, e.g. -1 or 2.5+1j or '2.5,1'")
    p.add_argument("--cells", type=int, default=1,
                   help="window half-width in period cells (default 1)")
    p.add_argument("--points-per-cell", type=int, default=64,
                   help="grid resolution per cell (default 64)")
    p.set_defaults(func=_cmd_greens)

    p = sub.add_parser("validate",
                       help="invariant suite with pass/fail table")
    _add_common(p, kmax_default=4)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HillError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
