"""Shared fixtures.

Catalogs, portraits, criterion reports, and 2048-point band projections
are expensive, so they are computed once per session and shared between
the module tests and the acceptance suite.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from hillspec import (
    evaluate_criterion,
    gaussian_bump,
    preset,
    project,
    spectra_catalog,
    spectrum_portrait,
)


@pytest.fixture(scope="session")
def zero_pot():
    return preset("zero")


@pytest.fixture(scope="session")
def mathieu_pot():
    return preset("mathieu", 0.5)


@pytest.fixture(scope="session")
def gasymov_pot():
    return preset("gasymov", 1.0)


@pytest.fixture(scope="session")
def constant_pot():
    return preset("constant", 0.7 + 0.3j)


@pytest.fixture(scope="session")
def zero_catalog(zero_pot):
    return spectra_catalog(zero_pot, 8)


@pytest.fixture(scope="session")
def mathieu_catalog(mathieu_pot):
    return spectra_catalog(mathieu_pot, 8)


@pytest.fixture(scope="session")
def gasymov_catalog(gasymov_pot):
    return spectra_catalog(gasymov_pot, 8)


@pytest.fixture(scope="session")
def zero_portrait(zero_pot):
    return spectrum_portrait(zero_pot, 8)


@pytest.fixture(scope="session")
def mathieu_portrait(mathieu_pot):
    return spectrum_portrait(mathieu_pot, 8)


@pytest.fixture(scope="session")
def gasymov_portrait(gasymov_pot):
    return spectrum_portrait(gasymov_pot, 8)


@pytest.fixture(scope="session")
def zero_report(zero_pot, zero_catalog, zero_portrait):
    return evaluate_criterion(zero_pot, 8, catalog=zero_catalog, portrait=zero_portrait)


@pytest.fixture(scope="session")
def mathieu_report(mathieu_pot, mathieu_catalog, mathieu_portrait):
    return evaluate_criterion(mathieu_pot, 8, catalog=mathieu_catalog, portrait=mathieu_portrait)


@pytest.fixture(scope="session")
def gasymov_report(gasymov_pot, gasymov_catalog, gasymov_portrait):
    return evaluate_criterion(gasymov_pot, 8, catalog=gasymov_catalog, portrait=gasymov_portrait)


@pytest.fixture(scope="session")
def bump_wide():
    """Generic smooth bump on the 2048-point grid."""
    return gaussian_bump(0.0, 6.5, 0.45, 8, 128)


@pytest.fixture(scope="session")
def bump_bandlimited():
    """Bump modulated to concentrate its transform well inside 8 bands."""
    return gaussian_bump(0.0, 2.5, 3.0, 8, 128)


def band_projection(V, portrait, band, g):
    """Sum of arc projections for one band, as a raw value array."""
    vals = np.zeros_like(g.values)
    for a in portrait.arcs:
        if a.band_index == band:
            vals = vals + project(V, a, g).values
    return vals


def timed_band_projections(V, portrait, g, bands):
    """Per-band projection values plus wall-clock seconds for each."""
    parts, seconds = {}, {}
    for k in bands:
        start = time.perf_counter()
        parts[k] = band_projection(V, portrait, k, g)
        seconds[k] = time.perf_counter() - start
    return parts, seconds


@pytest.fixture(scope="session")
def zero_band_parts(zero_pot, zero_portrait, bump_bandlimited):
    return timed_band_projections(zero_pot, zero_portrait, bump_bandlimited, range(1, 9))


@pytest.fixture(scope="session")
def mathieu_band_parts(mathieu_pot, mathieu_portrait, bump_bandlimited):
    return timed_band_projections(mathieu_pot, mathieu_portrait, bump_bandlimited, range(1, 9))
