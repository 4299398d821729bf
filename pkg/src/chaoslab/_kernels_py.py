"""Pure-Python implementation of the numerical kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension; :mod:`chaoslab.kernels` picks one at import time.
The scalar loops are written to perform the same floating point operations
in the same order as the compiled version, so both backends agree to
rounding on short runs.

Parameter vectors are the eight coefficients ``a1..a8`` as a float64 array.
Status codes returned by the path kernels: 0 completed, 1 escaped,
2 step underflow.
"""

import math

import numpy as np

COMPLETED = 0
ESCAPED = 1
UNDERFLOW = 2

LABEL_UNDECIDED = 0
LABEL_CHAOTIC_1 = 1
LABEL_CHAOTIC_2 = 2
LABEL_FIXED_1 = 3
LABEL_FIXED_2 = 4
LABEL_ESCAPED = 5

# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


def _field(p, x, y, z):
    return (-p[0] * x + p[1] * x * z + p[2] * y * z,
            p[3] * y - p[4] * x * z,
            -p[5] * z + p[6] * x * y + p[7] * z * z)


def _rk4_step(p, x, y, z, h):
    hh = 0.5 * h
    k1x, k1y, k1z = _field(p, x, y, z)
    k2x, k2y, k2z = _field(p, x + hh * k1x, y + hh * k1y, z + hh * k1z)
    k3x, k3y, k3z = _field(p, x + hh * k2x, y + hh * k2y, z + hh * k2z)
    k4x, k4y, k4z = _field(p, x + h * k3x, y + h * k3y, z + h * k3z)
    h6 = h / 6.0
    return (x + h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            z + h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z))


def _escaped(x, y, z, radius):
    n2 = x * x + y * y + z * z
    return not (n2 <= radius * radius)


def rk4_path(p, s0, h, n_steps, stride, escape_radius):
    """Classical RK4 on the system; keeps every ``stride``-th state.

    The last successfully computed state is always kept, so an escaped run
    ends on its final bounded state.
    """
    p = [float(v) for v in p]
    x, y, z = (float(v) for v in s0)
    n_steps = int(n_steps)
    stride = max(int(stride), 1)
    times = [0.0]
    rows = [(x, y, z)]
    status = COMPLETED
    last = 0
    for i in range(1, n_steps + 1):
        nx, ny, nz = _rk4_step(p, x, y, z, h)
        if _escaped(nx, ny, nz, escape_radius):
            status = ESCAPED
            break
        x, y, z = nx, ny, nz
        last = i
        if i % stride == 0:
            times.append(i * h)
            rows.append((x, y, z))
    if last % stride != 0:
        times.append(last * h)
        rows.append((x, y, z))
    return np.array(times), np.array(rows, dtype=float).reshape(-1, 3), status


def _dopri_trial(p, x, y, z, k1, h):
    k1x, k1y, k1z = k1
    k2x, k2y, k2z = _field(p, x + h * (A21 * k1x), y + h * (A21 * k1y), z + h * (A21 * k1z))
    k3x, k3y, k3z = _field(p,
                           x + h * (A31 * k1x + A32 * k2x),
                           y + h * (A31 * k1y + A32 * k2y),
                           z + h * (A31 * k1z + A32 * k2z))
    k4x, k4y, k4z = _field(p,
                           x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
                           y + h * (A41 * k1y + A42 * k2y + A43 * k3y),
                           z + h * (A41 * k1z + A42 * k2z + A43 * k3z))
    k5x, k5y, k5z = _field(p,
                           x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
                           y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
                           z + h * (A51 * k1z + A52 * k2z + A53 * k3z + A54 * k4z))
    k6x, k6y, k6z = _field(p,
                           x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                           y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
                           z + h * (A61 * k1z + A62 * k2z + A63 * k3z + A64 * k4z + A65 * k5z))
    nx = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    ny = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    nz = z + h * (B1 * k1z + B3 * k3z + B4 * k4z + B5 * k5z + B6 * k6z)
    k7 = _field(p, nx, ny, nz)
    ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7[0])
    ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7[1])
    ez = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z + E7 * k7[2])
    return nx, ny, nz, k7, ex, ey, ez


def _error_ratio(x, y, z, nx, ny, nz, ex, ey, ez, rtol, atol):
    # max-norm of the error scaled by atol + rtol*|state|
    rx = abs(ex) / (atol + rtol * max(abs(x), abs(nx)))
    ry = abs(ey) / (atol + rtol * max(abs(y), abs(ny)))
    rz = abs(ez) / (atol + rtol * max(abs(z), abs(nz)))
    err = max(rx, ry, rz)
    if err != err:
        return math.inf
    return err


def _next_step(h, err):
    if err == 0.0:
        return h * FAC_MAX
    if math.isinf(err):
        return h * FAC_MIN
    return h * min(FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))


def dopri_path(p, s0, t_end, h0, max_step, rtol, atol, escape_radius, min_step):
    """Adaptive Dormand-Prince 5(4) on the system; keeps every accepted step."""
    p = [float(v) for v in p]
    x, y, z = (float(v) for v in s0)
    t = 0.0
    h = min(float(h0), float(max_step))
    times = [t]
    rows = [(x, y, z)]
    status = COMPLETED
    k1 = _field(p, x, y, z)
    while t < t_end:
        if t + h >= t_end:
            h = t_end - t
            last = True
        else:
            last = False
        nx, ny, nz, k7, ex, ey, ez = _dopri_trial(p, x, y, z, k1, h)
        err = _error_ratio(x, y, z, nx, ny, nz, ex, ey, ez, rtol, atol)
        if err <= 1.0:
            if _escaped(nx, ny, nz, escape_radius):
                status = ESCAPED
                break
            t = t_end if last else t + h
            x, y, z = nx, ny, nz
            k1 = k7
            times.append(t)
            rows.append((x, y, z))
            h = min(_next_step(h, err), max_step)
        else:
            h = _next_step(h, err)
            if h < min_step:
                status = UNDERFLOW
                break
    return np.array(times), np.array(rows, dtype=float).reshape(-1, 3), status


def _mgs(q):
    """Modified Gram-Schmidt on the columns of a 3x3 nested list, in place.

    Returns the three column norms taken during orthogonalization.
    """
    norms = [0.0, 0.0, 0.0]
    for j in range(3):
        for k in range(j):
            dot = q[0][k] * q[0][j] + q[1][k] * q[1][j] + q[2][k] * q[2][j]
            q[0][j] -= dot * q[0][k]
            q[1][j] -= dot * q[1][k]
            q[2][j] -= dot * q[2][k]
        nrm = math.sqrt(q[0][j] * q[0][j] + q[1][j] * q[1][j] + q[2][j] * q[2][j])
        norms[j] = nrm
        q[0][j] /= nrm
        q[1][j] /= nrm
        q[2][j] /= nrm
    return norms


def _tangent(p, x, y, z, q):
    # J(s) @ Q, column by column
    j00 = p[1] * z - p[0]
    j01 = p[2] * z
    j02 = p[1] * x + p[2] * y
    j10 = -p[4] * z
    j11 = p[3]
    j12 = -p[4] * x
    j20 = p[6] * y
    j21 = p[6] * x
    j22 = 2.0 * p[7] * z - p[5]
    out = [[0.0] * 3 for _ in range(3)]
    for c in range(3):
        a, b, d = q[0][c], q[1][c], q[2][c]
        out[0][c] = j00 * a + j01 * b + j02 * d
        out[1][c] = j10 * a + j11 * b + j12 * d
        out[2][c] = j20 * a + j21 * b + j22 * d
    return out


def _axpy(q, h, k):
    return [[q[r][c] + h * k[r][c] for c in range(3)] for r in range(3)]


def lyapunov_rk4(p, s0, h, n_transient, n_iter, renorm, trace_stride, escape_radius):
    """Lyapunov spectrum from RK4 integration of the variational equations.

    Returns ``(sums, trace, status, final_state, div_mean, steps_done)``.
    ``sums`` are the accumulated log stretchings (divide by the elapsed time
    for exponents), ``trace`` rows are ``(t, L1, L2, L3)`` in Gram-Schmidt
    order, ``div_mean`` is the trapezoid time-average of the divergence.
    """
    p = [float(v) for v in p]
    x, y, z = (float(v) for v in s0)
    status = COMPLETED
    for _ in range(int(n_transient)):
        x, y, z = _rk4_step(p, x, y, z, h)
        if _escaped(x, y, z, escape_radius):
            return np.zeros(3), np.zeros((0, 4)), ESCAPED, np.array([x, y, z]), math.nan, 0
    q = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    sums = [0.0, 0.0, 0.0]
    trace = []
    dconst = -(p[0] - p[3] + p[5])
    dslope = p[1] + 2.0 * p[7]
    div_acc = 0.0
    div_prev = dslope * z + dconst
    hh = 0.5 * h
    h6 = h / 6.0
    renorm = max(int(renorm), 1)
    trace_stride = max(int(trace_stride), 1)
    done = 0
    for i in range(1, int(n_iter) + 1):
        k1 = _field(p, x, y, z)
        t1 = _tangent(p, x, y, z, q)
        x2, y2, z2 = x + hh * k1[0], y + hh * k1[1], z + hh * k1[2]
        k2 = _field(p, x2, y2, z2)
        t2 = _tangent(p, x2, y2, z2, _axpy(q, hh, t1))
        x3, y3, z3 = x + hh * k2[0], y + hh * k2[1], z + hh * k2[2]
        k3 = _field(p, x3, y3, z3)
        t3 = _tangent(p, x3, y3, z3, _axpy(q, hh, t2))
        x4, y4, z4 = x + h * k3[0], y + h * k3[1], z + h * k3[2]
        k4 = _field(p, x4, y4, z4)
        t4 = _tangent(p, x4, y4, z4, _axpy(q, h, t3))
        x = x + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y = y + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        z = z + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        q = [[q[r][c] + h6 * (t1[r][c] + 2.0 * t2[r][c] + 2.0 * t3[r][c] + t4[r][c])
              for c in range(3)] for r in range(3)]
        if _escaped(x, y, z, escape_radius):
            status = ESCAPED
            break
        div_now = dslope * z + dconst
        div_acc += 0.5 * (div_prev + div_now)
        div_prev = div_now
        done = i
        if i % renorm == 0 or i == n_iter:
            norms = _mgs(q)
            for j in range(3):
                sums[j] += math.log(norms[j])
            if i % trace_stride == 0 or i == n_iter:
                elapsed = i * h
                trace.append((elapsed, sums[0] / elapsed, sums[1] / elapsed, sums[2] / elapsed))
    div_mean = div_acc / done if done else math.nan
    return (np.array(sums), np.array(trace, dtype=float).reshape(-1, 4), status,
            np.array([x, y, z]), div_mean, done)


def classify_batch(p, ics, t_max, h0, max_step, rtol, atol, level, fixed_points,
                   fp_radius, fp_dwell, n_crossings, escape_radii, min_step, transient=0.0,
                   exclusion_radius=0.0, n_threads=0):
    """Label each initial condition by the attractor it settles on.

    Adaptive Dormand-Prince integration, vectorized over the batch: every
    active row advances with its own step size. Labels use the module-level
    ``LABEL_*`` codes. ``fixed_points`` is a (k, 3) array; fixed point ``i``
    maps to label ``LABEL_FIXED_1 + i``. A row is labelled chaotic once it
    makes ``n_crossings`` consecutive downward crossings of ``z = level``
    with the same sign of x. Crossings before ``transient`` or within
    ``exclusion_radius`` of a fixed point are ignored, since the section
    plane may pass through the fixed points themselves.
    """
    pv = np.asarray(p, dtype=float)
    ics = np.asarray(ics, dtype=float).reshape(-1, 3)
    n = ics.shape[0]
    fps = np.asarray(fixed_points, dtype=float).reshape(-1, 3)
    esc = np.broadcast_to(np.asarray(escape_radii, dtype=float), (n,)).copy()
    labels = np.zeros(n, dtype=np.int8)
    s = ics.copy()
    t = np.zeros(n)
    h = np.full(n, min(h0, max_step))
    dwell = np.zeros((n, fps.shape[0]))
    run_sign = np.zeros(n)
    run_len = np.zeros(n, dtype=np.int64)
    fp_r2 = fp_radius * fp_radius

    def f(u):
        x, y, z = u[:, 0], u[:, 1], u[:, 2]
        return np.stack((-pv[0] * x + pv[1] * x * z + pv[2] * y * z,
                         pv[3] * y - pv[4] * x * z,
                         -pv[5] * z + pv[6] * x * y + pv[7] * z * z), axis=1)

    bad = ~np.all(np.isfinite(s), axis=1) | (np.sum(s * s, axis=1) > esc * esc)
    labels[bad] = LABEL_ESCAPED
    active = np.flatnonzero(labels == LABEL_UNDECIDED)
    with np.errstate(all="ignore"):
        k1 = np.zeros_like(s)
        k1[active] = f(s[active])
        while active.size:
            u = s[active]
            hh = np.minimum(h[active], t_max - t[active])[:, None]
            a = k1[active]
            b = f(u + hh * (A21 * a))
            c = f(u + hh * (A31 * a + A32 * b))
            d = f(u + hh * (A41 * a + A42 * b + A43 * c))
            e = f(u + hh * (A51 * a + A52 * b + A53 * c + A54 * d))
            g = f(u + hh * (A61 * a + A62 * b + A63 * c + A64 * d + A65 * e))
            un = u + hh * (B1 * a + B3 * c + B4 * d + B5 * e + B6 * g)
            k7 = f(un)
            er = hh * (E1 * a + E3 * c + E4 * d + E5 * e + E6 * g + E7 * k7)
            scale = atol + rtol * np.maximum(np.abs(u), np.abs(un))
            err = np.max(np.abs(er) / scale, axis=1)
            err[~np.isfinite(err)] = np.inf
            fac = np.where(err == 0.0, FAC_MAX,
                           np.clip(SAFETY * err ** -0.2, FAC_MIN, FAC_MAX))
            fac[np.isinf(err)] = FAC_MIN
            ok = err <= 1.0
            hnew = hh[:, 0] * fac

            rej = active[~ok]
            h[rej] = hnew[~ok]
            under = rej[h[rej] < min_step]
            labels[under] = LABEL_ESCAPED

            acc = active[ok]
            uo, un, k7 = u[ok], un[ok], k7[ok]
            dt = hh[ok, 0]
            n2 = np.sum(un * un, axis=1)
            blown = ~(n2 <= esc[acc] * esc[acc])
            labels[acc[blown]] = LABEL_ESCAPED
            keep = ~blown
            acc, uo, un, k7, dt = acc[keep], uo[keep], un[keep], k7[keep], dt[keep]
            s[acc] = un
            k1[acc] = k7
            t[acc] += dt
            h[acc] = np.minimum(hnew[ok][keep], max_step)

            # downward crossings of the section plane
            za, zb = uo[:, 2] - level, un[:, 2] - level
            cross = (za > 0.0) & (zb <= 0.0) & (t[acc] > transient)
            if np.any(cross):
                frac = za[cross] / (za[cross] - zb[cross])
                pc = uo[cross] + frac[:, None] * (un[cross] - uo[cross])
                far = np.ones(frac.size, dtype=bool)
                for k in range(fps.shape[0]):
                    dk = pc - fps[k]
                    far &= np.sum(dk * dk, axis=1) > exclusion_radius * exclusion_radius
                cross[cross] = far
                frac = frac[far]
                ci = acc[cross]
                xc = uo[cross, 0] + frac * (un[cross, 0] - uo[cross, 0])
                sg = np.sign(xc)
                same = sg == run_sign[ci]
                run_len[ci] = np.where(same, run_len[ci] + 1, 1)
                run_sign[ci] = sg
                done = run_len[ci] >= n_crossings
                hit = ci[done]
                labels[hit] = np.where(run_sign[hit] < 0, LABEL_CHAOTIC_1, LABEL_CHAOTIC_2)

            for k in range(fps.shape[0]):
                diff = un - fps[k]
                near = np.sum(diff * diff, axis=1) <= fp_r2
                dwell[acc, k] = np.where(near, dwell[acc, k] + dt, 0.0)
                settled = acc[near & (dwell[acc, k] >= fp_dwell)]
                settled = settled[labels[settled] == LABEL_UNDECIDED]
                labels[settled] = LABEL_FIXED_1 + k

            active = active[(labels[active] == LABEL_UNDECIDED) & (t[active] < t_max)]
    return labels


def robot_rk4_path(p, d, xmax, s0, h, n_steps, stride, bounds):
    """RK4 on the chaos-driven unicycle; ``bounds`` is (xlo, xhi, ylo, yhi) or None.

    With bounds, a step whose position would leave the rectangle keeps the
    old position while heading and chaotic states advance.
    """
    p = [float(v) for v in p]
    x, y, z, X, Y, th = (float(v) for v in s0)
    stride = max(int(stride), 1)
    times = [0.0]
    rows = [(x, y, z, X, Y, th)]
    hh = 0.5 * h
    h6 = h / 6.0
    for i in range(1, int(n_steps) + 1):
        k1x, k1y, k1z = _field(p, x, y, z)
        v1 = math.fmod(abs(x + y), xmax) / 2.0
        m1 = (x - y) / d
        a1 = th
        x2, y2, z2 = x + hh * k1x, y + hh * k1y, z + hh * k1z
        k2x, k2y, k2z = _field(p, x2, y2, z2)
        v2 = math.fmod(abs(x2 + y2), xmax) / 2.0
        m2 = (x2 - y2) / d
        a2 = th + hh * m1
        x3, y3, z3 = x + hh * k2x, y + hh * k2y, z + hh * k2z
        k3x, k3y, k3z = _field(p, x3, y3, z3)
        v3 = math.fmod(abs(x3 + y3), xmax) / 2.0
        m3 = (x3 - y3) / d
        a3 = th + hh * m2
        x4, y4, z4 = x + h * k3x, y + h * k3y, z + h * k3z
        k4x, k4y, k4z = _field(p, x4, y4, z4)
        v4 = math.fmod(abs(x4 + y4), xmax) / 2.0
        m4 = (x4 - y4) / d
        a4 = th + h * m3
        nX = X + h6 * (v1 * math.cos(a1) + 2.0 * v2 * math.cos(a2)
                       + 2.0 * v3 * math.cos(a3) + v4 * math.cos(a4))
        nY = Y + h6 * (v1 * math.sin(a1) + 2.0 * v2 * math.sin(a2)
                       + 2.0 * v3 * math.sin(a3) + v4 * math.sin(a4))
        th = th + h6 * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
        x = x + h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z = z + h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if bounds is None or (bounds[0] <= nX <= bounds[1] and bounds[2] <= nY <= bounds[3]):
            X, Y = nX, nY
        if i % stride == 0 or i == n_steps:
            times.append(i * h)
            rows.append((x, y, z, X, Y, th))
    return np.array(times), np.array(rows, dtype=float).reshape(-1, 6), COMPLETED
