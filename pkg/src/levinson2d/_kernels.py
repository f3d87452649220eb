"""
Inner loop of the radial solver.

With x = log(r) and R(r) = sqrt(r) w(x), the radial equation becomes

    w''(x) = g(x) w(x),    g = nu^2 + lam * P(x) - E * Q(x),

where P = r^2 U(r) (smooth at the origin) and Q = r^2. Each step of the grid
is advanced with classical RK4 using g at the left end, midpoint and right
end of the step. Besides (w, w') at the last node the kernel returns the
number of strict sign changes of w, the ratio |R(end)| / max|R| used for
pole detection, and int R^2 dr / R(end)^2.

Two interchangeable implementations are provided:

* ``integrate_numba``: scalar loops compiled with ``numba.njit``;
* ``integrate_numpy``: the same recursion vectorised over the batch.

``integrate`` is whichever is active. Set LEVINSON2D_NUMBA=0 to force the
numpy path (it is also used when numba is not importable).
"""

from __future__ import annotations

import os

import numpy as np

RESCALE = 1e150

_WANT_NUMBA = os.environ.get("LEVINSON2D_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False


def integrate_numpy(h, Pa, Pm, Pb, Qa, Qm, Qb, nu2, E, lam, w0, v0):
    E = np.asarray(E, dtype=float)
    lam = np.asarray(lam, dtype=float)
    w = np.array(w0, dtype=float)
    v = np.array(v0, dtype=float)
    nodes = np.zeros(E.shape, dtype=np.int64)
    sign = np.sign(w)
    maxR = np.abs(w) * Qa[0] ** 0.25
    S = np.zeros(E.shape)
    for i in range(h.shape[0]):
        hi = h[i]
        ga = nu2 + lam * Pa[i] - E * Qa[i]
        gm = nu2 + lam * Pm[i] - E * Qm[i]
        gb = nu2 + lam * Pb[i] - E * Qb[i]
        k1w = v
        k1v = ga * w
        k2w = v + 0.5 * hi * k1v
        k2v = gm * (w + 0.5 * hi * k1w)
        k3w = v + 0.5 * hi * k2v
        k3v = gm * (w + 0.5 * hi * k2w)
        k4w = v + hi * k3v
        k4v = gb * (w + hi * k3w)
        wn = w + hi / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        vn = v + hi / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        wmid = 0.5 * (w + wn) + 0.125 * hi * (v - vn)
        S += hi / 6.0 * (Qa[i] * w * w + 4.0 * Qm[i] * wmid * wmid + Qb[i] * wn * wn)
        s_new = np.sign(wn)
        flip = (s_new != 0) & (sign != 0) & (s_new != sign)
        nodes += flip
        sign = np.where(s_new != 0, s_new, sign)
        maxR = np.maximum(maxR, np.abs(wn) * Qb[i] ** 0.25)
        w, v = wn, vn
        big = np.maximum(np.abs(w), np.abs(v))
        over = big > RESCALE
        if np.any(over):
            scale = np.where(over, 1.0 / np.where(over, big, 1.0), 1.0)
            w = w * scale
            v = v * scale
            S = S * scale * scale
            maxR = maxR * scale
    Rend2 = w * w * np.sqrt(Qb[-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        pole_ratio = np.abs(w) * Qb[-1] ** 0.25 / maxR
        norm_ratio = S / Rend2
    return w, v, nodes, pole_ratio, norm_ratio


def _integrate_scalar_loops(h, Pa, Pm, Pb, Qa, Qm, Qb, nu2, E, lam, w0, v0):
    nb = E.shape[0]
    n = h.shape[0]
    w_out = np.empty(nb)
    v_out = np.empty(nb)
    nodes_out = np.zeros(nb, dtype=np.int64)
    pole_out = np.empty(nb)
    norm_out = np.empty(nb)
    for j in range(nb):
        e = E[j]
        lm = lam[j]
        w = w0[j]
        v = v0[j]
        sign = 1.0 if w > 0 else (-1.0 if w < 0 else 0.0)
        maxR = abs(w) * Qa[0] ** 0.25
        S = 0.0
        nodes = 0
        for i in range(n):
            hi = h[i]
            ga = nu2 + lm * Pa[i] - e * Qa[i]
            gm = nu2 + lm * Pm[i] - e * Qm[i]
            gb = nu2 + lm * Pb[i] - e * Qb[i]
            k1w = v
            k1v = ga * w
            k2w = v + 0.5 * hi * k1v
            k2v = gm * (w + 0.5 * hi * k1w)
            k3w = v + 0.5 * hi * k2v
            k3v = gm * (w + 0.5 * hi * k2w)
            k4w = v + hi * k3v
            k4v = gb * (w + hi * k3w)
            wn = w + hi / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            vn = v + hi / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            wmid = 0.5 * (w + wn) + 0.125 * hi * (v - vn)
            S += hi / 6.0 * (Qa[i] * w * w + 4.0 * Qm[i] * wmid * wmid + Qb[i] * wn * wn)
            if wn != 0.0:
                s_new = 1.0 if wn > 0 else -1.0
                if sign != 0.0 and s_new != sign:
                    nodes += 1
                sign = s_new
            aR = abs(wn) * Qb[i] ** 0.25
            if aR > maxR:
                maxR = aR
            w = wn
            v = vn
            big = max(abs(w), abs(v))
            if big > RESCALE:
                sc = 1.0 / big
                w *= sc
                v *= sc
                S *= sc * sc
                maxR *= sc
        w_out[j] = w
        v_out[j] = v
        nodes_out[j] = nodes
        qe = Qb[n - 1]
        pole_out[j] = abs(w) * qe ** 0.25 / maxR if maxR > 0 else np.inf
        rend2 = w * w * np.sqrt(qe)
        norm_out[j] = S / rend2 if rend2 > 0 else np.inf
    return w_out, v_out, nodes_out, pole_out, norm_out


if HAVE_NUMBA:
    integrate_numba = numba.njit(cache=True, nogil=True)(_integrate_scalar_loops)
else:  # pragma: no cover
    integrate_numba = None

USE_NUMBA = HAVE_NUMBA and _WANT_NUMBA
BACKEND = "numba" if USE_NUMBA else "numpy"


def integrate(h, Pa, Pm, Pb, Qa, Qm, Qb, nu2, E, lam, w0, v0):
    if USE_NUMBA:
        return integrate_numba(
            h, Pa, Pm, Pb, Qa, Qm, Qb, float(nu2),
            np.ascontiguousarray(E, dtype=np.float64),
            np.ascontiguousarray(lam, dtype=np.float64),
            np.ascontiguousarray(w0, dtype=np.float64),
            np.ascontiguousarray(v0, dtype=np.float64),
        )
    return integrate_numpy(h, Pa, Pm, Pb, Qa, Qm, Qb, nu2, E, lam, w0, v0)
