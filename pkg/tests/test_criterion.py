"""Scalar-type criterion: verdicts, witnesses, and diagnostics."""

from __future__ import annotations

import numpy as np

from hillspec import (
    check_theorem_43,
    check_theorem_45,
    detect_spectral_singularities,
    evaluate_criterion,
    preset,
    riesz_basis_diagnostic,
    validate_parametrization_asymptotics,
)


def test_free_operator_passes_with_constant_ratio(zero_report):
    rep = zero_report
    assert rep.verdict == "PASS"
    assert rep.check_verdicts == ("PASS", "PASS", "PASS")
    assert abs(rep.ratio_sups[0] - 2 / np.pi) <= 1e-6
    assert rep.ratio_sups[2] <= 1e-9
    assert rep.singularities == ()
    # every on-spectrum critical point is a removable double contact
    ons = [p for p in rep.thm43_analyticity.points if p.on_spectrum]
    assert len(ons) >= 6
    assert all(p.removable for p in ons)
    assert all(p.ok for p in rep.thm43_analyticity.points)
    # all double points are honest Dirichlet-adjacent pairs
    assert len(rep.thm45.multiple_points) >= 6
    assert all(r.ok for r in rep.thm45.multiple_points)
    assert all(f.ok for f in rep.thm45.fiber_checks)
    assert not any(r.in_q for r in rep.thm45.distance_rows)


def test_mathieu_passes_with_gap_distance_rows(mathieu_report):
    rep = mathieu_report
    assert rep.verdict == "PASS"
    assert rep.check_verdicts == ("PASS", "PASS", "PASS")
    assert rep.singularities == ()
    q_rows = [r for r in rep.thm45.distance_rows if r.in_q]
    assert q_rows
    assert 1.0 <= max(r.r_gap for r in q_rows) <= 4.0


def test_gasymov_fails_with_located_singularity(gasymov_report):
    rep = gasymov_report
    assert rep.verdict == "FAIL"
    assert rep.check_verdicts == ("FAIL", "FAIL", "FAIL")
    assert rep.singularities
    s0 = min(rep.singularities, key=lambda s: abs(s.lambda0))
    assert abs(s0.lambda0 - 1.0) <= 1e-6
    assert 0.8 <= s0.exponent <= 1.2
    # defective fiber witness at the first closed gap
    bad_fiber = [f for f in rep.thm45.fiber_checks if not f.ok]
    assert any(
        abs(f.energy - 4.0) < 1e-6 and abs(f.t) < 1e-9 and f.algebraic == 2 and f.geometric == 1
        for f in bad_fiber
    )
    bad_mult = [r for r in rep.thm45.multiple_points if not r.ok]
    assert bad_mult
    # double-contact violations witness the analyticity failure as well
    bad43 = [p for p in rep.thm43_analyticity.points if p.on_spectrum and not p.ok]
    assert bad43
    assert any(abs(p.delta - 1.0) < 1e-6 for p in bad43)
    assert rep.witnesses


def test_short_window_is_inconclusive_not_a_verdict():
    rep = evaluate_criterion(preset("constant", 0.7 + 0.3j), k_max=4)
    assert rep.verdict == "INCONCLUSIVE"
    assert rep.check_verdicts == ("PASS", "INCONCLUSIVE", "PASS")
    assert abs(rep.mean - (0.7 + 0.3j)) < 1e-12
    assert abs(rep.ratio_sups[0] - 2 / np.pi) <= 1e-6


def test_theorem_checks_run_standalone(mathieu_pot, mathieu_catalog, mathieu_portrait):
    a = check_theorem_43(mathieu_pot, mathieu_portrait, mathieu_catalog)
    assert a.verdict == "PASS"
    m = check_theorem_45(mathieu_pot, mathieu_catalog, mathieu_portrait)
    assert m.verdict == "PASS"
    sings = detect_spectral_singularities(mathieu_pot, mathieu_portrait, mathieu_catalog)
    assert sings == ()


def test_singularity_detector_localizes_gasymov(gasymov_pot, gasymov_portrait, gasymov_catalog):
    sings = detect_spectral_singularities(gasymov_pot, gasymov_portrait, gasymov_catalog)
    assert sings
    assert min(abs(s.lambda0 - 1.0) for s in sings) <= 1e-6


def test_riesz_diagnostic_interior_frame_bounds(mathieu_pot):
    d = riesz_basis_diagnostic(mathieu_pot, 1.0, 4, seed=11)
    assert d.mode == "interior"
    assert 0.0 < d.frame_low <= d.frame_high
    assert d.bound < 10.0


def test_riesz_diagnostic_diverges_at_defective_point(gasymov_pot):
    d = riesz_basis_diagnostic(gasymov_pot, 0.0, 3, seed=11)
    assert d.mode == "pair"
    assert d.bound > 1e3


def test_parametrization_asymptotics_decay(mathieu_pot):
    chk = validate_parametrization_asymptotics(mathieu_pot, 8)
    assert chk.max_phi < 1.0
    assert chk.max_trace < 2.0
    # a real even potential has vanishing antitrace
    assert chk.max_antitrace < 1e-10
    # scaled residuals shrink octave by octave
    phi_maxes = [row[1] for row in chk.octave_maxes]
    trace_maxes = [row[2] for row in chk.octave_maxes]
    assert all(b <= a for a, b in zip(phi_maxes, phi_maxes[1:]))
    assert all(b <= a for a, b in zip(trace_maxes, trace_maxes[1:]))
