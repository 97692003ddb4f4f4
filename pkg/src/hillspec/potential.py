"""Complex pi-periodic potentials.

A potential is stored as a finite Fourier series

    V(x) = sum_n c_n exp(2 i n x),

which is exactly pi-periodic. Sampled data on a uniform grid over
[0, pi) is converted to this form by FFT (trigonometric interpolation),
so there is a single internal representation. The mean value <V> is the
zeroth coefficient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError

__all__ = [
    "Potential",
    "make_fourier",
    "make_sampled",
    "evaluate",
    "shift_to_zero_mean",
    "semistrip_numbers",
    "preset",
    "load_potential",
    "potential_to_json",
]


@dataclass(frozen=True)
class Potential:
    """Finite Fourier representation of a complex pi-periodic potential.

    Attributes
    ----------
    indices:
        Integer harmonics n, sorted ascending.
    coeffs:
        Complex coefficients c_n of exp(2 i n x), aligned with indices.
    mean:
        Cached mean value, equal to the n = 0 coefficient.
    label:
        Optional human-readable tag ("zero", "mathieu(0.5)", ...).
    """

    indices: tuple[int, ...]
    coeffs: tuple[complex, ...]
    mean: complex
    label: str = field(default="", compare=False)

    @property
    def max_harmonic(self) -> int:
        """Largest |n| carrying a coefficient (0 for the zero potential)."""
        if not self.indices:
            return 0
        return max(abs(n) for n in self.indices)

    def scale(self) -> float:
        """Crude magnitude estimate sum |c_n|, used for step-size control."""
        return float(sum(abs(c) for c in self.coeffs))

    def __call__(self, x: NDArray[np.floating] | float) -> NDArray[np.complexfloating] | complex:
        return evaluate(self, x)


def make_fourier(coeffs: Mapping[int, complex], label: str = "") -> Potential:
    """Build a potential from a map {n: c_n} of coefficients of exp(2inx).

    Zero coefficients are dropped. An empty map gives the zero potential.
    """
    items = sorted((int(n), complex(c)) for n, c in coeffs.items() if complex(c) != 0)
    indices = tuple(n for n, _ in items)
    values = tuple(c for _, c in items)
    mean = dict(items).get(0, 0j)
    return Potential(indices=indices, coeffs=values, mean=mean, label=label)


def make_sampled(samples: Iterable[complex], label: str = "") -> Potential:
    """Build a potential from uniform samples of V on [0, pi).

    The samples are trigonometrically interpolated: an FFT yields the
    coefficients of exp(2inx) with n covering the usual aliased range
    for the given grid size. Power-of-two grids are recommended.
    """
    arr = np.asarray(list(samples), dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("samples must be a non-empty 1-d sequence")
    m = arr.size
    c = np.fft.fft(arr) / m
    ns = np.fft.fftfreq(m, d=1.0 / m).astype(int)  # 0, 1, ..., -1 ordering
    coeffs = {int(n): complex(v) for n, v in zip(ns, c) if abs(v) > 1e-15 * (1 + np.abs(arr).max())}
    return make_fourier(coeffs, label=label or "sampled")


def evaluate(V: Potential, x: NDArray[np.floating] | float):
    """Evaluate V at x (scalar or array). Exactly pi-periodic."""
    xs = np.asarray(x, dtype=float)
    out = np.zeros(xs.shape, dtype=complex)
    for n, c in zip(V.indices, V.coeffs):
        out += c * np.exp(2j * n * xs)
    if np.isscalar(x) or xs.ndim == 0:
        return complex(out)
    return out


def shift_to_zero_mean(V: Potential) -> tuple[Potential, complex]:
    """Split V into (V - <V>, <V>).

    Asymptotic seeds for high-index spectra assume a zero-mean
    potential; spectra of the original operator are recovered by adding
    the returned mean back to every eigenvalue.
    """
    if V.mean == 0:
        return V, 0j
    coeffs = {n: c for n, c in zip(V.indices, V.coeffs) if n != 0}
    shifted = make_fourier(coeffs, label=V.label + "-centered" if V.label else "")
    return shifted, V.mean


def semistrip_numbers(V: Potential, samples: int = 4096) -> tuple[float, float, float]:
    """Return (M1, M2, M3) = (inf Im V, sup Im V, inf Re V) over a period.

    Computed on a dense uniform grid; exact for constants, spectrally
    accurate otherwise. These numbers bound the semistrip that encloses
    the spectrum.
    """
    xs = np.linspace(0.0, np.pi, samples, endpoint=False)
    vals = np.asarray(evaluate(V, xs), dtype=complex)
    if vals.size == 0:
        return 0.0, 0.0, 0.0
    return float(vals.imag.min()), float(vals.imag.max()), float(vals.real.min())


def preset(name: str, parameter: complex | None = None) -> Potential:
    """Return a named preset potential.

    Supported: "zero"; "constant" (value = parameter, default 0);
    "mathieu" with V = 2 c cos(2x) (c = parameter, default 1);
    "gasymov" with V = g exp(2ix) (g = parameter, default 1).
    """
    key = name.strip().lower()
    if key == "zero":
        return make_fourier({}, label="zero")
    if key == "constant":
        c = 0j if parameter is None else complex(parameter)
        return make_fourier({0: c}, label=f"constant({_fmt(c)})")
    if key == "mathieu":
        c = 1.0 + 0j if parameter is None else complex(parameter)
        return make_fourier({1: c, -1: c}, label=f"mathieu({_fmt(c)})")
    if key == "gasymov":
        g = 1.0 + 0j if parameter is None else complex(parameter)
        return make_fourier({1: g}, label=f"gasymov({_fmt(g)})")
    raise ConfigError(f"unknown potential preset: {name!r}")


def _fmt(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    return f"{c.real:g}{c.imag:+g}j"


def load_potential(path: str) -> Potential:
    """Load a potential from a JSON file.

    Accepted shapes:
      {"fourier": {"n": [re, im], ...}}
      {"samples": [[re, im], ...]}
      {"preset": "mathieu", "parameter": [re, im]}
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read potential file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("potential file must contain a JSON object")
    if "fourier" in data:
        raw = data["fourier"]
        if not isinstance(raw, dict):
            raise ConfigError('"fourier" must map harmonic index to [re, im]')
        coeffs: dict[int, complex] = {}
        for k, v in raw.items():
            try:
                n = int(k)
                re, im = float(v[0]), float(v[1])
            except (ValueError, TypeError, IndexError) as exc:
                raise ConfigError(f"bad fourier entry {k!r}: {v!r}") from exc
            coeffs[n] = complex(re, im)
        return make_fourier(coeffs, label=f"file:{path}")
    if "samples" in data:
        raw = data["samples"]
        try:
            samples = [complex(float(p[0]), float(p[1])) for p in raw]
        except (ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"bad samples array: {exc}") from exc
        return make_sampled(samples, label=f"file:{path}")
    if "preset" in data:
        par = data.get("parameter")
        if par is not None:
            par = complex(float(par[0]), float(par[1])) if isinstance(par, (list, tuple)) else complex(par)
        return preset(str(data["preset"]), par)
    raise ConfigError('potential file needs one of "fourier", "samples", "preset"')


def potential_to_json(V: Potential) -> dict:
    """Serializable dict round-trippable through load_potential."""
    return {"fourier": {str(n): [c.real, c.imag] for n, c in zip(V.indices, V.coeffs)}}
