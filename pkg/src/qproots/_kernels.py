"""Batch evaluation kernels with a numba fast path and a numpy fallback.

Quasi-polynomials are packed into flat arrays before evaluation:

    coeffs : complex128[T, D+1]   ascending coefficients, zero padded
    degs   : int64[T]             actual degree of each row
    sigmas : complex128[T]        exponent coefficients

``eval_many`` computes ``sum_t p_t(lam) * exp(-sigma_t * lam)`` directly and
may overflow for large arguments.  ``eval_scaled_many`` returns the pair
``(s, m)`` with ``f(lam) = s * exp(m)``, ``m`` real, chosen so that ``|s|``
stays in a safe range; it is the variant used on contours and large circles.

The backend is chosen once at import time from the environment variable
``QPROOTS_BACKEND``: ``numba``, ``numpy``, or ``auto`` (default, numba when
importable).  Both implementations follow the same operation order, so they
agree to rounding error.
"""

from __future__ import annotations

import math
import os
import types

import numpy as np

LOG_TINY = math.log(1e-300)

_ENV_VAR = "QPROOTS_BACKEND"


def _eval_many_numpy(coeffs, degs, sigmas, lams):
    out = np.zeros(lams.shape[0], np.complex128)
    for t in range(degs.shape[0]):
        d = int(degs[t])
        v = np.full(lams.shape[0], coeffs[t, d])
        for k in range(d - 1, -1, -1):
            v = v * lams + coeffs[t, k]
        out += v * np.exp(-sigmas[t] * lams)
    return out


def _eval_scaled_many_numpy(coeffs, degs, sigmas, lams):
    n = lams.shape[0]
    T = degs.shape[0]
    if T == 0:
        return np.zeros(n, np.complex128), np.zeros(n, np.float64)
    pv = np.empty((T, n), np.complex128)
    lm = np.empty((T, n), np.float64)
    for t in range(T):
        d = int(degs[t])
        v = np.full(n, coeffs[t, d])
        for k in range(d - 1, -1, -1):
            v = v * lams + coeffs[t, k]
        pv[t] = v
        a = np.abs(v)
        good = a > 0.0
        lt = np.full(n, -np.inf)
        lt[good] = np.log(a[good]) - (sigmas[t] * lams[good]).real
        lm[t] = lt
    m = lm.max(axis=0)
    s = np.zeros(n, np.complex128)
    finite = m > -np.inf
    for t in range(T):
        w = lm[t] - m
        use = finite & (w > -746.0)
        if not use.any():
            continue
        a = np.abs(pv[t, use])
        ph = -(sigmas[t] * lams[use]).imag
        s[use] += (pv[t, use] / a) * np.exp(w[use] + 1j * ph)
    m = np.where(finite, m, 0.0)
    return s, m


def _make_numba_kernels():
    from numba import njit

    @njit(cache=True, nogil=True)
    def eval_many(coeffs, degs, sigmas, lams):  # pragma: no cover - jit
        n = lams.shape[0]
        T = degs.shape[0]
        out = np.empty(n, np.complex128)
        for i in range(n):
            lam = lams[i]
            acc = 0.0 + 0.0j
            for t in range(T):
                d = degs[t]
                v = coeffs[t, d]
                for k in range(d - 1, -1, -1):
                    v = v * lam + coeffs[t, k]
                acc = acc + v * np.exp(-sigmas[t] * lam)
            out[i] = acc
        return out

    @njit(cache=True, nogil=True)
    def eval_scaled_many(coeffs, degs, sigmas, lams):  # pragma: no cover - jit
        n = lams.shape[0]
        T = degs.shape[0]
        s_out = np.empty(n, np.complex128)
        m_out = np.empty(n, np.float64)
        pv = np.empty(T, np.complex128)
        lm = np.empty(T, np.float64)
        for i in range(n):
            lam = lams[i]
            m = -np.inf
            for t in range(T):
                d = degs[t]
                v = coeffs[t, d]
                for k in range(d - 1, -1, -1):
                    v = v * lam + coeffs[t, k]
                pv[t] = v
                a = abs(v)
                if a > 0.0:
                    lt = math.log(a) - (sigmas[t] * lam).real
                else:
                    lt = -np.inf
                lm[t] = lt
                if lt > m:
                    m = lt
            if m == -np.inf:
                s_out[i] = 0.0 + 0.0j
                m_out[i] = 0.0
            else:
                s = 0.0 + 0.0j
                for t in range(T):
                    w = lm[t] - m
                    if w > -746.0:
                        a = abs(pv[t])
                        ph = -(sigmas[t] * lam).imag
                        s = s + (pv[t] / a) * np.exp(complex(w, ph))
                s_out[i] = s
                m_out[i] = m
        return s_out, m_out

    return types.SimpleNamespace(
        name="numba", eval_many=eval_many, eval_scaled_many=eval_scaled_many
    )


_NUMPY_BACKEND = types.SimpleNamespace(
    name="numpy",
    eval_many=_eval_many_numpy,
    eval_scaled_many=_eval_scaled_many_numpy,
)

BACKENDS = {"numpy": _NUMPY_BACKEND}


def _select():
    flag = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if flag not in ("auto", "numba", "numpy"):
        raise RuntimeError(
            f"{_ENV_VAR} must be one of auto, numba, numpy (got {flag!r})"
        )
    if flag == "numpy":
        return _NUMPY_BACKEND
    try:
        backend = _make_numba_kernels()
    except ImportError:
        if flag == "numba":
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        return _NUMPY_BACKEND
    BACKENDS["numba"] = backend
    return backend


_ACTIVE = _select()

eval_many = _ACTIVE.eval_many
eval_scaled_many = _ACTIVE.eval_scaled_many


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return _ACTIVE.name


def get_backend(name: str):
    """Fetch a specific backend namespace, building the numba one on demand."""
    if name == "numba" and name not in BACKENDS:
        BACKENDS["numba"] = _make_numba_kernels()
    return BACKENDS[name]
