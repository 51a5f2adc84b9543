"""Float kernels for batch norm evaluation.

Every kernel exists twice: a numba ``@njit`` loop and a vectorised numpy
version.  The numba path is used when numba imports cleanly and the
environment variable ``QBFS_DISABLE_NUMBA`` is unset (or ``0``).  Both
paths take the same arguments and must agree to rounding error; the test
suite checks that, and ``benchmarks/bench_kernels.py`` times them.

Layout conventions:

* a *profile* is a pair ``(lo, width, values)`` describing a non-increasing
  step function on ``(0, inf)``: value ``values[j]`` on
  ``[lo[j], lo[j] + width[j])``;
* a *batch* is a 2-D array ``V`` of non-negative values, one candidate per
  row, over cells with measures ``mu`` (shared by all rows).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "lp_power_sum",
    "lorentz_power_sum",
    "lp_norms_batch",
    "lorentz_norms_batch",
    "linf_norms_batch",
    "profile_eval",
]


# -- numpy implementations ---------------------------------------------------


def _np_lp_power_sum(values, widths, p):
    if values.size == 0:
        return 0.0
    return float(np.sum(np.power(values, p) * widths))


def _np_lorentz_power_sum(lo, width, values, p, q):
    if values.size == 0:
        return 0.0
    r = q / p
    out = np.empty_like(values)
    zero = lo == 0.0
    # t1^r - t0^r = t0^r * expm1(r * log1p(w / t0)); avoids cancellation
    out[zero] = np.power(width[zero], r)
    nz = ~zero
    out[nz] = np.power(lo[nz], r) * np.expm1(r * np.log1p(width[nz] / lo[nz]))
    return float(np.sum(np.power(values, q) * out) * (p / q))


def _np_lp_norms_batch(V, mu, p):
    s = np.power(V, p) @ mu
    return np.power(s, 1.0 / p)


def _np_lorentz_norms_batch(V, mu, p, q):
    order = np.argsort(-V, axis=1, kind="stable")
    vals = np.take_along_axis(V, order, axis=1)
    widths = mu[order]
    hi = np.cumsum(widths, axis=1)
    r = q / p
    seg = np.power(hi, r) - np.power(hi - widths, r)
    s = np.sum(np.power(vals, q) * seg, axis=1) * (p / q)
    return np.power(s, 1.0 / q)


def _np_linf_norms_batch(V, mu):
    if V.shape[1] == 0:
        return np.zeros(V.shape[0])
    masked = np.where(mu[None, :] > 0, V, 0.0)
    return masked.max(axis=1)


def _np_profile_eval(breaks, values, ts):
    idx = np.searchsorted(breaks, ts, side="right")
    padded = np.concatenate(([0.0], values, [0.0]))
    idx = np.where(ts < 0, 0, idx)
    return padded[idx]


# -- numba implementations ---------------------------------------------------


def _build_numba():
    from numba import njit

    @njit(cache=False)
    def lp_power_sum(values, widths, p):
        s = 0.0
        for j in range(values.shape[0]):
            s += values[j] ** p * widths[j]
        return s

    @njit(cache=False)
    def lorentz_power_sum(lo, width, values, p, q):
        r = q / p
        s = 0.0
        for j in range(values.shape[0]):
            if lo[j] == 0.0:
                seg = width[j] ** r
            else:
                seg = lo[j] ** r * np.expm1(r * np.log1p(width[j] / lo[j]))
            s += values[j] ** q * seg
        return s * (p / q)

    @njit(cache=False)
    def lp_norms_batch(V, mu, p):
        k, m = V.shape
        out = np.empty(k)
        for i in range(k):
            s = 0.0
            for j in range(m):
                if V[i, j] != 0.0:
                    s += V[i, j] ** p * mu[j]
            out[i] = s ** (1.0 / p)
        return out

    @njit(cache=False)
    def lorentz_norms_batch(V, mu, p, q):
        k, m = V.shape
        out = np.empty(k)
        r = q / p
        for i in range(k):
            order = np.argsort(-V[i], kind="mergesort")
            acc = 0.0
            acc_r = 0.0
            s = 0.0
            for jj in range(m):
                j = order[jj]
                v = V[i, j]
                if v <= 0.0:
                    break
                acc += mu[j]
                nxt_r = acc ** r
                s += v ** q * (nxt_r - acc_r)
                acc_r = nxt_r
            out[i] = (s * (p / q)) ** (1.0 / q)
        return out

    @njit(cache=False)
    def linf_norms_batch(V, mu):
        k, m = V.shape
        out = np.zeros(k)
        for i in range(k):
            best = 0.0
            for j in range(m):
                if mu[j] > 0.0 and V[i, j] > best:
                    best = V[i, j]
            out[i] = best
        return out

    @njit(cache=False)
    def profile_eval(breaks, values, ts):
        out = np.zeros(ts.shape[0])
        m = values.shape[0]
        for i in range(ts.shape[0]):
            t = ts[i]
            if t < 0.0:
                continue
            j = np.searchsorted(breaks, t, side="right")
            if 1 <= j <= m:
                out[i] = values[j - 1]
        return out

    return {
        "lp_power_sum": lp_power_sum,
        "lorentz_power_sum": lorentz_power_sum,
        "lp_norms_batch": lp_norms_batch,
        "lorentz_norms_batch": lorentz_norms_batch,
        "linf_norms_batch": linf_norms_batch,
        "profile_eval": profile_eval,
    }


NUMPY_KERNELS = {
    "lp_power_sum": _np_lp_power_sum,
    "lorentz_power_sum": _np_lorentz_power_sum,
    "lp_norms_batch": _np_lp_norms_batch,
    "lorentz_norms_batch": _np_lorentz_norms_batch,
    "linf_norms_batch": _np_linf_norms_batch,
    "profile_eval": _np_profile_eval,
}


def _numba_requested() -> bool:
    return os.environ.get("QBFS_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


NUMBA_KERNELS: dict | None
try:
    NUMBA_KERNELS = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_KERNELS = None

if NUMBA_KERNELS is not None and _numba_requested():
    BACKEND = "numba"
    _active = NUMBA_KERNELS
else:
    BACKEND = "numpy"
    _active = NUMPY_KERNELS


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def lp_power_sum(values, widths, p: float) -> float:
    """Return ``sum(values**p * widths)``."""
    return float(_active["lp_power_sum"](_f64(values), _f64(widths), float(p)))


def lorentz_power_sum(lo, width, values, p: float, q: float) -> float:
    """Return ``int_0^inf t^(q/p - 1) g(t)^q dt`` for a step profile ``g``."""
    return float(_active["lorentz_power_sum"](_f64(lo), _f64(width), _f64(values), float(p), float(q)))


def lp_norms_batch(V, mu, p: float) -> np.ndarray:
    return _active["lp_norms_batch"](_f64(np.atleast_2d(V)), _f64(mu), float(p))


def lorentz_norms_batch(V, mu, p: float, q: float) -> np.ndarray:
    return _active["lorentz_norms_batch"](_f64(np.atleast_2d(V)), _f64(mu), float(p), float(q))


def linf_norms_batch(V, mu) -> np.ndarray:
    return _active["linf_norms_batch"](_f64(np.atleast_2d(V)), _f64(mu))


def profile_eval(breaks, values, ts) -> np.ndarray:
    """Evaluate the right-continuous step profile at many points."""
    return _active["profile_eval"](_f64(breaks), _f64(values), _f64(ts))
