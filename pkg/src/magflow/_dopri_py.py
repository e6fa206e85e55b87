"""Pure-Python (numpy) Dormand-Prince 5(4) kernel.

Mirrors ``_dopri_ext.pyx`` step for step; used when the compiled extension is
unavailable or ``MAGFLOW_PURE_PYTHON`` is set.
"""

import math

import numpy as np

AMBIENT, SPHERE, PENDULUM = 0, 1, 2
OK, STEP_FAILURE, MAX_STEPS = 0, 1, 2

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def make_rhs(kind, kappa, s, m, b):
    n = kappa.shape[0]
    sk = (s / m) * kappa
    inv_m = 1.0 / m

    if kind == AMBIENT:
        def rhs(y):
            p = y[n:]
            return np.concatenate([p * inv_m, sk @ p])
    elif kind == SPHERE:
        def rhs(y):
            g, p = y[:n], y[n:]
            kp = sk @ p
            # mu = (s <p, kappa g> - <p, p>) / m ; <p, kappa g> = -<kappa p, g>
            mu = -(kp @ g) - (p @ p) * inv_m
            return np.concatenate([p * inv_m, kp + mu * g])
    elif kind == PENDULUM:
        bv = np.asarray(b, dtype=float)

        def rhs(y):
            g, p = y[:3], y[3:]
            lam = p @ p + bv @ g
            return np.concatenate([p, s * np.cross(g, p) + bv - lam * g])
    else:
        raise ValueError(f"unknown flow kind {kind}")
    return rhs


def _project(y, n):
    g = y[:n] / math.sqrt(y[:n] @ y[:n])
    p = y[n:] - (y[n:] @ g) * g
    y[:n] = g
    y[n:] = p


def _initial_step(rhs, y, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(y + direction * h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def dopri5(kind, y0, t0, t1, rtol, atol, kappa, s, m, b, project, max_steps=10_000_000, h_min=1e-14):
    """Integrate from t0 to t1; returns (times, states, status, nfev)."""
    y = np.array(y0, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    n = y.shape[0] // 2
    rhs = make_rhs(kind, kappa, s, m, b)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    ts = [t0]
    ys = [y.copy()]
    if span == 0:
        return np.array(ts), np.array(ys), OK, 0

    k1 = rhs(y)
    nfev = 1
    h = _initial_step(rhs, y, k1, direction, rtol, atol)
    nfev += 1
    t = t0
    done = 0.0
    status = OK
    steps = 0
    while done < span:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if h < h_min:
            status = STEP_FAILURE
            break
        last = done + h >= span
        hh = span - done if last else h
        hs = direction * hh
        k2 = rhs(y + hs * (A21 * k1))
        k3 = rhs(y + hs * (A31 * k1 + A32 * k2))
        k4 = rhs(y + hs * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = rhs(y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = rhs(y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        ynew = y + hs * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = rhs(ynew)
        nfev += 6
        err_vec = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        # max norm: every component, hence every integral, is controlled
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            steps += 1
            done = span if last else done + hh
            t = t0 + direction * done
            y = ynew
            if project:
                _project(y, n)
                k1 = rhs(y)
                nfev += 1
            else:
                k1 = k7
            ts.append(t)
            ys.append(y.copy())
            fac = 10.0 if err == 0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
            h = hh * fac if not last else h
        else:
            h = hh * max(0.2, 0.9 * err ** -0.2)
    return np.array(ts), np.array(ys), status, nfev
