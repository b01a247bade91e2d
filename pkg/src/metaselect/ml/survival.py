"""Kaplan-Meier estimation and runtime risk scores derived from it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput

EXPECTED_RUNTIME = "expected_runtime"
EXPECTED_PAR10 = "expected_par10"

# Above this many distinct event times the product is taken in floating point.
EXACT_LIMIT = 512


@dataclass(frozen=True, eq=False)
class KaplanMeierCurve:
    """Right-continuous step function: 1 before the first breakpoint, then
    ``values[j]`` on ``[breakpoints[j], breakpoints[j+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.concatenate([[1.0], self.values])
        out = padded[j]
        return float(out) if out.ndim == 0 else out


def km_estimate(times, censored) -> KaplanMeierCurve:
    """Product-limit estimator; censored observations only shrink the risk set."""
    t = np.asarray(times, dtype=float)
    c = np.asarray(censored, dtype=bool)
    if t.ndim != 1 or t.shape[0] == 0 or c.shape != t.shape:
        raise DegenerateInput("km_estimate needs equally long, nonempty times and flags")
    if np.any(~(t > 0)):
        raise DegenerateInput("survival times must be positive")
    event_times, deaths = np.unique(t[~c], return_counts=True)
    if event_times.size == 0:
        return KaplanMeierCurve(np.empty(0), np.empty(0))
    at_risk = t.shape[0] - np.searchsorted(np.sort(t), event_times, side="left")
    if event_times.size <= EXACT_LIMIT:
        # Integer products with one correctly rounded division per step, so
        # values such as 2/3 come out as the nearest float.
        num = den = 1
        values = []
        for n_j, d_j in zip(at_risk.tolist(), deaths.tolist()):
            num *= n_j - d_j
            den *= n_j
            values.append(num / den)
        return KaplanMeierCurve(event_times, np.array(values))
    return KaplanMeierCurve(event_times, np.cumprod((at_risk - deaths) / at_risk))


def curve_risk(curve: KaplanMeierCurve, cutoff: float, mode: str = EXPECTED_PAR10) -> float:
    """Expected runtime ``E[min(T, C)]`` or expected PAR10 under ``curve``.

    Integrals are exact on the step function:
    ``E[min(T, C)] = int_0^C S(t) dt`` and
    ``E[PAR10] = int_0^C S(t) dt + 9 C S(C)``.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    b, v = curve.breakpoints, curve.values
    inside = b < cutoff
    edges = np.concatenate([[0.0], b[inside], [cutoff]])
    levels = np.concatenate([[1.0], v[inside]])
    area = float(np.dot(np.diff(edges), levels))
    if mode == EXPECTED_RUNTIME:
        return area
    if mode == EXPECTED_PAR10:
        surv = curve(cutoff)
        if surv == 1.0:
            # No event up to C: area is exactly C, so this is the timeout penalty.
            return 10.0 * cutoff
        return area + 9.0 * cutoff * surv
    raise ValueError(f"unknown risk mode {mode!r}")
