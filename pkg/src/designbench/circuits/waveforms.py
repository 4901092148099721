"""Scalar measures of a load-voltage waveform."""
from __future__ import annotations

import numpy as np

from designbench.core import DesignBenchError


class WaveformError(DesignBenchError, ValueError):
    pass


def _arrays(times, values):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise WaveformError("times and values must be 1-D arrays of equal length")
    if t.size < 2 or t[-1] <= t[0]:
        raise WaveformError("waveform window has zero length")
    return t, v


def time_average(times, values) -> float:
    """Trapezoidal mean ``(1/T) sum (v_i + v_{i+1})/2 (t_{i+1} - t_i)``."""
    t, v = _arrays(times, values)
    return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(t)) / (t[-1] - t[0]))


def load_waveform(result) -> tuple[np.ndarray, np.ndarray]:
    """``(times, v_load)`` from a transient result or a ``(times, values)`` pair."""
    if hasattr(result, "v_load"):
        return result.times, result.v_load
    times, values = result
    return _arrays(times, values)


def dc_gain(result, v_source: float) -> float:
    if v_source == 0:
        raise WaveformError("source voltage must be non-zero")
    return time_average(*load_waveform(result)) / v_source


def voltage_ripple(result) -> float:
    """Peak-to-peak over the magnitude of the time average."""
    t, v = _arrays(*load_waveform(result))
    mean = time_average(t, v)
    if abs(mean) < 1e-12:
        raise WaveformError(f"mean load voltage {mean:.3g} is ~0; ripple undefined")
    return float((v.max() - v.min()) / abs(mean))
