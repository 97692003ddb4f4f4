"""Arc tracing, spectrum portraits, and distance queries."""

from __future__ import annotations

import numpy as np
import pytest

from hillspec import (
    StepControl,
    WindowError,
    critical_points,
    distance_to_spectrum,
    monodromy_batch,
    preset,
    spectrum_portrait,
    trace_arc,
)
from oracles import hausdorff_distance


def defining_residuals(V, arc):
    b = monodromy_batch(V, arc.lambda_samples)
    return np.abs(b.delta_plus - np.cos(arc.t_samples))


def test_free_first_band_is_a_parabola_in_t():
    V = preset("zero")
    arc = trace_arc(V, 0.0, 0.0, np.pi, band_index=1)
    err = np.abs(arc.lambda_samples - (arc.t_samples / np.pi) ** 2)
    assert err.max() <= 1e-8
    assert defining_residuals(V, arc).max() <= 1e-9
    # the trace halts at the band edge where the derivative degenerates
    assert not arc.regular
    assert arc.t_samples[-1] > np.pi - 1e-2
    assert abs(arc.lambda_samples[-1] - 1.0) < 1e-4


def test_differentiated_defining_equation_along_the_arc():
    V = preset("zero")
    arc = trace_arc(V, 0.0, 0.0, np.pi, band_index=1)
    mask = (arc.t_samples > 0.01) & (arc.t_samples < np.pi - 0.01)
    lhs = arc.dlambda_dt[mask] * arc.delta_dot_samples[mask]
    assert np.abs(lhs + np.sin(arc.t_samples[mask])).max() <= 1e-9


def test_free_portrait_structure():
    V = preset("zero")
    port = spectrum_portrait(V, 3)
    assert len(port.arcs) == 3
    for a in port.arcs:
        assert defining_residuals(V, a).max() <= 1e-9
        assert np.abs(a.lambda_samples.imag).max() <= 1e-9
    ends = sorted(
        [a.endpoints[0].real for a in port.arcs] + [a.endpoints[1].real for a in port.arcs]
    )
    assert np.allclose(ends, [0, 1, 1, 4, 4, 9], atol=1e-7)
    # all closed-gap contact points are benign for the free operator
    assert not any(sp.spectral_singularity for sp in port.singular_points)
    assert {round(sp.lambda0.real) for sp in port.singular_points} == {1, 4, 9}


def test_arc_samples_are_monotone_along_orientation():
    port = spectrum_portrait(preset("zero"), 3)
    for a in port.arcs:
        d = np.diff(a.lambda_samples.real)
        if a.orientation == 1:
            assert (d >= -1e-9).all()
        else:
            assert (d <= 1e-9).all()


def test_distance_to_spectrum_free():
    port = spectrum_portrait(preset("zero"), 3)
    assert distance_to_spectrum(4.0, port) <= 1e-7
    assert abs(distance_to_spectrum(4.0 + 1.0j, port) - 1.0) < 1e-6
    assert abs(distance_to_spectrum(-1.0 + 0j, port) - 1.0) < 1e-6
    with pytest.raises(WindowError):
        distance_to_spectrum(100.0, port)


def test_gasymov_portrait_flags_the_singularity(gasymov_portrait, zero_portrait):
    flagged = [sp for sp in gasymov_portrait.singular_points if sp.spectral_singularity]
    assert flagged
    assert min(abs(sp.lambda0 - 1.0) for sp in flagged) < 1e-6
    # arcs coincide with the free ones even though the potential does not vanish
    for band in (1, 2, 3):
        a_g = next(a for a in gasymov_portrait.arcs if a.band_index == band)
        a_f = next(a for a in zero_portrait.arcs if a.band_index == band)
        assert abs(a_g.endpoints[0] - a_f.endpoints[0]) < 1e-6
        assert abs(a_g.endpoints[1] - a_f.endpoints[1]) < 1e-6


def test_mathieu_portrait_has_disjoint_real_bands(mathieu_portrait, mathieu_pot):
    bands = sorted(
        tuple(sorted((a.endpoints[0].real, a.endpoints[1].real))) for a in mathieu_portrait.arcs
    )
    assert len(bands) == 8
    for a in mathieu_portrait.arcs:
        assert np.abs(a.lambda_samples.imag).max() <= 1e-9
        assert a.regular
        assert defining_residuals(mathieu_pot, a).max() <= 1e-9
    for (_, b1), (a2, _) in zip(bands[:-1], bands[1:]):
        assert b1 < a2
    assert len(mathieu_portrait.singular_points) == 0


def test_mathieu_first_critical_point_sits_in_a_gap(mathieu_portrait, mathieu_pot):
    d1 = critical_points(mathieu_pot, 1)[0][0]
    assert distance_to_spectrum(d1, mathieu_portrait) > 0.01


def test_complex_potential_produces_complex_arcs_and_stable_retrace():
    V = preset("mathieu", 0.3 + 0.1j)
    port = spectrum_portrait(V, 2)
    a1 = next(a for a in port.arcs if a.band_index == 1)
    assert np.abs(a1.lambda_samples.imag).max() > 1e-4
    assert defining_residuals(V, a1).max() <= 1e-9
    start = a1.lambda_samples[0]
    arc_a = trace_arc(V, start, 0.0, np.pi, band_index=1)
    arc_b = trace_arc(
        V,
        start,
        0.0,
        np.pi,
        step_ctrl=StepControl(h_init=0.025, h_min=1e-7, min_samples=128),
        band_index=1,
    )
    h = hausdorff_distance(arc_a.lambda_samples, arc_b.lambda_samples)
    assert h <= 1e-8
