"""Pure-numpy implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable, or when
SCHRODER_LAB_BACKEND=python.  Semantics match schroeder_lab.kernels._core;
bit-level agreement between the two backends is not promised, per-backend
determinism is.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_BIG = 1e100
_INF = complex(np.inf, 0.0)


def series_eval(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = np.full(w.shape, coeffs[-1], dtype=np.complex128)
    for a in coeffs[-2::-1]:
        out = out * w + a
    return out


def _horner(c: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.full(t.shape, c[-1], dtype=np.complex128)
    for a in c[-2::-1]:
        out = out * t + a
    return out


def rat_iterate(ph, pr, qh, qr, Z: np.ndarray, W: np.ndarray, steps: int) -> None:
    """Apply the homogeneous map `steps` times, in place, renormalizing the
    pair after every application.  The common factor base^d of numerator and
    denominator is dropped since it cancels in the normalization."""
    for _ in range(steps):
        az = np.abs(Z)
        aw = np.abs(W)
        low = az <= aw
        denom = np.where(low, np.where(W == 0, 1.0, W), np.where(Z == 0, 1.0, Z))
        t = np.where(low, Z, W) / denom
        F = np.where(low, _horner(ph, t), _horner(pr, t))
        G = np.where(low, _horner(qh, t), _horner(qr, t))
        m = np.maximum(np.abs(F), np.abs(G))
        bad = m == 0.0
        m = np.where(bad, 1.0, m)
        Z[...] = np.where(bad, 1.0, F / m)
        W[...] = np.where(bad, 0.0, G / m)


def _depths(w: np.ndarray, lam: complex, r_safe: float) -> np.ndarray:
    aw = np.abs(w)
    k = np.ceil(np.log(np.maximum(aw, 1e-300) / r_safe) / np.log(abs(lam)))
    return np.maximum(k, 0.0).astype(np.int64)


def pullback_eval(coeffs, lam, r_safe, ph, pr, qh, qr, p, w) -> np.ndarray:
    """h(w) for an array of w: series at lam^-k w, then k*p map applications.
    Returns complex values with inf standing for the point at infinity."""
    w = np.asarray(w, dtype=np.complex128)
    k = _depths(w, lam, r_safe)
    u = w * lam ** (-k.astype(np.float64))
    Z = series_eval(np.asarray(coeffs, dtype=np.complex128), u)
    W = np.ones_like(Z)

    steps = k * p
    order = np.argsort(steps, kind="stable")
    Zs, Ws, ss = Z[order], W[order], steps[order]
    done = 0
    for s in range(int(ss[-1]) if len(ss) else 0):
        done = np.searchsorted(ss, s, side="right")
        if done >= len(ss):
            break
        sub_Z = Zs[done:]
        sub_W = Ws[done:]
        rat_iterate(ph, pr, qh, qr, sub_Z, sub_W, 1)
        Zs[done:] = sub_Z
        Ws[done:] = sub_W
    out_sorted = np.where(
        np.abs(Ws) * 1e280 <= np.abs(Zs),
        _INF,
        np.divide(Zs, np.where(Ws == 0, 1.0, Ws)),
    )
    out = np.empty_like(out_sorted)
    out[order] = out_sorted
    return out


def pullback_log_abs(coeffs, lam, r_safe, fc, p, w) -> np.ndarray:
    """log|h(w)| for polynomial maps, switching to log-space once |z| > 1e100
    so that circles of radius up to ~1e6 stay representable."""
    w = np.asarray(w, dtype=np.complex128)
    fc = np.asarray(fc, dtype=np.complex128)
    d = len(fc) - 1
    llead = float(np.log(np.abs(fc[-1])))
    k = _depths(w, lam, r_safe)
    u = w * lam ** (-k.astype(np.float64))
    z = series_eval(np.asarray(coeffs, dtype=np.complex128), u)
    L = np.full(w.shape, np.nan)
    inlog = np.zeros(w.shape, dtype=bool)
    steps = k * p
    for s in range(int(steps.max()) if steps.size else 0):
        active = steps > s
        if not active.any():
            break
        was = inlog.copy()
        direct = active & ~was
        if direct.any():
            z[direct] = _horner(fc, z[direct])
            crossed = direct & (np.abs(z) > _BIG)
            if crossed.any():
                L[crossed] = np.log(np.abs(z[crossed]))
                inlog |= crossed
        logged = active & was
        if logged.any():
            L[logged] = d * L[logged] + llead
    out = np.where(inlog, L, np.log(np.maximum(np.abs(z), 1e-300)))
    return out


def escape_time(fc, z0, max_iter, radius) -> np.ndarray:
    """Iterations until |z| > radius under the polynomial; 0 when the input
    already exceeds the radius (or is non-finite), -1 when it never escapes."""
    fc = np.asarray(fc, dtype=np.complex128)
    z = np.array(z0, dtype=np.complex128)
    n = z.shape
    out = np.full(n, -1, dtype=np.int32)
    az = np.abs(z)
    gone = ~np.isfinite(az) | (az > radius)
    out[gone] = 0
    alive = ~gone
    for k in range(1, max_iter + 1):
        if not alive.any():
            break
        z[alive] = _horner(fc, z[alive])
        az = np.abs(z)
        esc = alive & (~np.isfinite(az) | (az > radius))
        out[esc] = k
        alive &= ~esc
    return out


def power_escape(d, cs, max_iter, radius) -> np.ndarray:
    """Escape step of the orbit 0, c, c^d + c, ... of z^d + c, per cell."""
    c = np.asarray(cs, dtype=np.complex128)
    z = np.zeros_like(c)
    out = np.full(c.shape, -1, dtype=np.int32)
    alive = np.ones(c.shape, dtype=bool)
    for k in range(1, max_iter + 1):
        if not alive.any():
            break
        zz = z[alive]
        acc = zz
        for _ in range(d - 1):
            acc = acc * zz
        z[alive] = acc + c[alive]
        az = np.abs(z)
        esc = alive & (~np.isfinite(az) | (az > radius))
        out[esc] = k
        alive &= ~esc
    return out


def _silenced(fn):
    def inner(*args, **kwargs):
        with np.errstate(all="ignore"):
            return fn(*args, **kwargs)
    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


rat_iterate = _silenced(rat_iterate)
pullback_eval = _silenced(pullback_eval)
pullback_log_abs = _silenced(pullback_log_abs)
escape_time = _silenced(escape_time)
power_escape = _silenced(power_escape)
