# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels; mirror of ``_kernels_py`` operation for operation."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, fabs, fmod, log, pow, cos, sin, INFINITY, NAN

cnp.import_array()

cdef enum:
    C_COMPLETED = 0
    C_ESCAPED = 1
    C_UNDERFLOW = 2
    C_UNDECIDED = 0
    C_CHAOTIC_1 = 1
    C_CHAOTIC_2 = 2
    C_FIXED_1 = 3
    C_FIXED_2 = 4
    C_LESCAPED = 5

COMPLETED = C_COMPLETED
ESCAPED = C_ESCAPED
UNDERFLOW = C_UNDERFLOW

LABEL_UNDECIDED = C_UNDECIDED
LABEL_CHAOTIC_1 = C_CHAOTIC_1
LABEL_CHAOTIC_2 = C_CHAOTIC_2
LABEL_FIXED_1 = C_FIXED_1
LABEL_FIXED_2 = C_FIXED_2
LABEL_ESCAPED = C_LESCAPED

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 5.0


cdef inline void field(const double* p, double x, double y, double z, double* out) noexcept nogil:
    out[0] = -p[0] * x + p[1] * x * z + p[2] * y * z
    out[1] = p[3] * y - p[4] * x * z
    out[2] = -p[5] * z + p[6] * x * y + p[7] * z * z


cdef inline void rk4_step(const double* p, double* s, double h) noexcept nogil:
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double hh = 0.5 * h
    cdef double h6
    field(p, s[0], s[1], s[2], k1)
    field(p, s[0] + hh * k1[0], s[1] + hh * k1[1], s[2] + hh * k1[2], k2)
    field(p, s[0] + hh * k2[0], s[1] + hh * k2[1], s[2] + hh * k2[2], k3)
    field(p, s[0] + h * k3[0], s[1] + h * k3[1], s[2] + h * k3[2], k4)
    h6 = h / 6.0
    s[0] = s[0] + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    s[1] = s[1] + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    s[2] = s[2] + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])


cdef inline bint escaped(double x, double y, double z, double radius) noexcept nogil:
    cdef double n2 = x * x + y * y + z * z
    return not (n2 <= radius * radius)


cdef inline double dopri_trial(const double* p, const double* s, const double* k1, double h,
                               double* sn, double* k7, double rtol, double atol) noexcept nogil:
    """One Dormand-Prince trial step; returns the scaled max-norm error."""
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double e, r, err = 0.0
    cdef int c
    field(p, s[0] + h * (A21 * k1[0]), s[1] + h * (A21 * k1[1]), s[2] + h * (A21 * k1[2]), k2)
    field(p,
          s[0] + h * (A31 * k1[0] + A32 * k2[0]),
          s[1] + h * (A31 * k1[1] + A32 * k2[1]),
          s[2] + h * (A31 * k1[2] + A32 * k2[2]), k3)
    field(p,
          s[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
          s[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
          s[2] + h * (A41 * k1[2] + A42 * k2[2] + A43 * k3[2]), k4)
    field(p,
          s[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
          s[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
          s[2] + h * (A51 * k1[2] + A52 * k2[2] + A53 * k3[2] + A54 * k4[2]), k5)
    field(p,
          s[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
          s[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
          s[2] + h * (A61 * k1[2] + A62 * k2[2] + A63 * k3[2] + A64 * k4[2] + A65 * k5[2]), k6)
    for c in range(3):
        sn[c] = s[c] + h * (B1 * k1[c] + B3 * k3[c] + B4 * k4[c] + B5 * k5[c] + B6 * k6[c])
    field(p, sn[0], sn[1], sn[2], k7)
    for c in range(3):
        e = h * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c])
        r = fabs(e) / (atol + rtol * max(fabs(s[c]), fabs(sn[c])))
        if not (r <= err):
            err = r
    if err != err:
        return INFINITY
    return err


cdef inline double next_step(double h, double err) noexcept nogil:
    if err == 0.0:
        return h * FAC_MAX
    if err == INFINITY:
        return h * FAC_MIN
    return h * min(FAC_MAX, max(FAC_MIN, SAFETY * pow(err, -0.2)))


def rk4_path(p, s0, double h, long n_steps, long stride, double escape_radius):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double s[3]
    cdef double sn[3]
    cdef long i, last = 0, m = 0
    cdef int status = C_COMPLETED
    if stride < 1:
        stride = 1
    cdef long cap = n_steps // stride + 2
    out_t = np.empty(cap)
    out_s = np.empty((cap, 3))
    cdef double[::1] tv = out_t
    cdef double[:, ::1] sv = out_s
    s[0], s[1], s[2] = s0[0], s0[1], s0[2]
    tv[0] = 0.0
    sv[0, 0], sv[0, 1], sv[0, 2] = s[0], s[1], s[2]
    m = 1
    with nogil:
        for i in range(1, n_steps + 1):
            sn[0], sn[1], sn[2] = s[0], s[1], s[2]
            rk4_step(&pv[0], sn, h)
            if escaped(sn[0], sn[1], sn[2], escape_radius):
                status = C_ESCAPED
                break
            s[0], s[1], s[2] = sn[0], sn[1], sn[2]
            last = i
            if i % stride == 0:
                tv[m] = i * h
                sv[m, 0], sv[m, 1], sv[m, 2] = s[0], s[1], s[2]
                m += 1
        if last % stride != 0:
            tv[m] = last * h
            sv[m, 0], sv[m, 1], sv[m, 2] = s[0], s[1], s[2]
            m += 1
    return out_t[:m].copy(), out_s[:m].copy(), status


def dopri_path(p, s0, double t_end, double h0, double max_step, double rtol, double atol,
               double escape_radius, double min_step):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double s[3]
    cdef double sn[3]
    cdef double k1[3]
    cdef double k7[3]
    cdef double t = 0.0, h, err
    cdef bint last
    cdef int status = C_COMPLETED
    cdef long m = 1, cap = 4096
    out_t = np.empty(cap)
    out_s = np.empty((cap, 3))
    cdef double[::1] tv = out_t
    cdef double[:, ::1] sv = out_s
    h = min(h0, max_step)
    s[0], s[1], s[2] = s0[0], s0[1], s0[2]
    tv[0] = 0.0
    sv[0, 0], sv[0, 1], sv[0, 2] = s[0], s[1], s[2]
    field(&pv[0], s[0], s[1], s[2], k1)
    while t < t_end:
        if t + h >= t_end:
            h = t_end - t
            last = True
        else:
            last = False
        err = dopri_trial(&pv[0], s, k1, h, sn, k7, rtol, atol)
        if err <= 1.0:
            if escaped(sn[0], sn[1], sn[2], escape_radius):
                status = C_ESCAPED
                break
            t = t_end if last else t + h
            s[0], s[1], s[2] = sn[0], sn[1], sn[2]
            k1[0], k1[1], k1[2] = k7[0], k7[1], k7[2]
            if m == cap:
                cap *= 2
                out_t = np.resize(out_t, cap)
                out_s = np.resize(out_s, (cap, 3))
                tv = out_t
                sv = out_s
            tv[m] = t
            sv[m, 0], sv[m, 1], sv[m, 2] = s[0], s[1], s[2]
            m += 1
            h = min(next_step(h, err), max_step)
        else:
            h = next_step(h, err)
            if h < min_step:
                status = C_UNDERFLOW
                break
    return out_t[:m].copy(), out_s[:m].copy(), status


cdef inline void tangent(const double* p, double x, double y, double z,
                         const double* q, double* out) noexcept nogil:
    # q and out are row-major 3x3; columns are tangent vectors
    cdef double j00 = p[1] * z - p[0]
    cdef double j01 = p[2] * z
    cdef double j02 = p[1] * x + p[2] * y
    cdef double j10 = -p[4] * z
    cdef double j11 = p[3]
    cdef double j12 = -p[4] * x
    cdef double j20 = p[6] * y
    cdef double j21 = p[6] * x
    cdef double j22 = 2.0 * p[7] * z - p[5]
    cdef int c
    cdef double a, b, d
    for c in range(3):
        a = q[c]
        b = q[3 + c]
        d = q[6 + c]
        out[c] = j00 * a + j01 * b + j02 * d
        out[3 + c] = j10 * a + j11 * b + j12 * d
        out[6 + c] = j20 * a + j21 * b + j22 * d


cdef inline void mgs(double* q, double* norms) noexcept nogil:
    cdef int j, k
    cdef double dot, nrm
    for j in range(3):
        for k in range(j):
            dot = q[k] * q[j] + q[3 + k] * q[3 + j] + q[6 + k] * q[6 + j]
            q[j] -= dot * q[k]
            q[3 + j] -= dot * q[3 + k]
            q[6 + j] -= dot * q[6 + k]
        nrm = sqrt(q[j] * q[j] + q[3 + j] * q[3 + j] + q[6 + j] * q[6 + j])
        norms[j] = nrm
        q[j] /= nrm
        q[3 + j] /= nrm
        q[6 + j] /= nrm


def lyapunov_rk4(p, s0, double h, long n_transient, long n_iter, long renorm,
                 long trace_stride, double escape_radius):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double* pp = &pv[0]
    cdef double s[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double q[9]
    cdef double qa[9]
    cdef double t1[9]
    cdef double t2[9]
    cdef double t3[9]
    cdef double t4[9]
    cdef double norms[3]
    cdef double sums[3]
    cdef double x2, y2, z2, x3, y3, z3, x4, y4, z4
    cdef double hh = 0.5 * h
    cdef double h6 = h / 6.0
    cdef double dconst, dslope, div_acc = 0.0, div_prev, div_now, elapsed
    cdef long i, done = 0, m = 0
    cdef int j, status = C_COMPLETED
    if renorm < 1:
        renorm = 1
    if trace_stride < 1:
        trace_stride = 1
    s[0], s[1], s[2] = s0[0], s0[1], s0[2]
    with nogil:
        for i in range(n_transient):
            rk4_step(pp, s, h)
            if escaped(s[0], s[1], s[2], escape_radius):
                status = C_ESCAPED
                break
    if status == C_ESCAPED:
        return np.zeros(3), np.zeros((0, 4)), C_ESCAPED, np.array([s[0], s[1], s[2]]), NAN, 0
    cap = n_iter // (renorm * trace_stride) + n_iter // trace_stride + 4
    out = np.empty((min(cap, n_iter + 4), 4))
    cdef double[:, ::1] tr = out
    for j in range(9):
        q[j] = 0.0
    q[0] = 1.0
    q[4] = 1.0
    q[8] = 1.0
    sums[0] = sums[1] = sums[2] = 0.0
    dconst = -(pp[0] - pp[3] + pp[5])
    dslope = pp[1] + 2.0 * pp[7]
    div_prev = dslope * s[2] + dconst
    with nogil:
        for i in range(1, n_iter + 1):
            field(pp, s[0], s[1], s[2], k1)
            tangent(pp, s[0], s[1], s[2], q, t1)
            x2 = s[0] + hh * k1[0]
            y2 = s[1] + hh * k1[1]
            z2 = s[2] + hh * k1[2]
            field(pp, x2, y2, z2, k2)
            for j in range(9):
                qa[j] = q[j] + hh * t1[j]
            tangent(pp, x2, y2, z2, qa, t2)
            x3 = s[0] + hh * k2[0]
            y3 = s[1] + hh * k2[1]
            z3 = s[2] + hh * k2[2]
            field(pp, x3, y3, z3, k3)
            for j in range(9):
                qa[j] = q[j] + hh * t2[j]
            tangent(pp, x3, y3, z3, qa, t3)
            x4 = s[0] + h * k3[0]
            y4 = s[1] + h * k3[1]
            z4 = s[2] + h * k3[2]
            field(pp, x4, y4, z4, k4)
            for j in range(9):
                qa[j] = q[j] + h * t3[j]
            tangent(pp, x4, y4, z4, qa, t4)
            for j in range(3):
                s[j] = s[j] + h6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            for j in range(9):
                q[j] = q[j] + h6 * (t1[j] + 2.0 * t2[j] + 2.0 * t3[j] + t4[j])
            if escaped(s[0], s[1], s[2], escape_radius):
                status = C_ESCAPED
                break
            div_now = dslope * s[2] + dconst
            div_acc += 0.5 * (div_prev + div_now)
            div_prev = div_now
            done = i
            if i % renorm == 0 or i == n_iter:
                mgs(q, norms)
                for j in range(3):
                    sums[j] += log(norms[j])
                if (i % trace_stride == 0 or i == n_iter) and m < tr.shape[0]:
                    elapsed = i * h
                    tr[m, 0] = elapsed
                    tr[m, 1] = sums[0] / elapsed
                    tr[m, 2] = sums[1] / elapsed
                    tr[m, 3] = sums[2] / elapsed
                    m += 1
    div_mean = div_acc / done if done else NAN
    return (np.array([sums[0], sums[1], sums[2]]), out[:m].copy(), status,
            np.array([s[0], s[1], s[2]]), div_mean, done)


cdef inline bint near_fixed(const double* s, const double* sn, double frac, const double* fps,
                            int nfp, double excl_r2) noexcept nogil:
    # crossing point within the exclusion ball of any fixed point
    cdef int k, c
    cdef double d, r2
    for k in range(nfp):
        r2 = 0.0
        for c in range(3):
            d = s[c] + frac * (sn[c] - s[c]) - fps[3 * k + c]
            r2 += d * d
        if r2 <= excl_r2:
            return True
    return False


cdef int classify_one(const double* p, double* s, double t_max, double h0, double max_step,
                      double rtol, double atol, double level, const double* fps, int nfp,
                      double fp_r2, double fp_dwell, long n_crossings, double esc,
                      double min_step, double transient, double excl_r2) noexcept nogil:
    cdef double k1[3]
    cdef double k7[3]
    cdef double sn[3]
    cdef double dwell[8]
    cdef double t = 0.0, h = min(h0, max_step), hh, err, fac, za, zb, xc, sg, run_sign = 0.0
    cdef double dx, dy, dz
    cdef long run_len = 0
    cdef int k
    if nfp > 8:
        nfp = 8
    for k in range(nfp):
        dwell[k] = 0.0
    if not (s[0] == s[0] and s[1] == s[1] and s[2] == s[2]) or escaped(s[0], s[1], s[2], esc):
        return C_LESCAPED
    field(p, s[0], s[1], s[2], k1)
    while t < t_max:
        hh = min(h, t_max - t)
        err = dopri_trial(p, s, k1, hh, sn, k7, rtol, atol)
        if err == 0.0:
            fac = FAC_MAX
        elif err == INFINITY:
            fac = FAC_MIN
        else:
            fac = min(FAC_MAX, max(FAC_MIN, SAFETY * pow(err, -0.2)))
        if not (err <= 1.0):
            h = hh * fac
            if h < min_step:
                return C_LESCAPED
            continue
        if escaped(sn[0], sn[1], sn[2], esc):
            return C_LESCAPED
        za = s[2] - level
        zb = sn[2] - level
        if za > 0.0 and zb <= 0.0 and t + hh > transient and not near_fixed(
                s, sn, za / (za - zb), fps, nfp, excl_r2):
            xc = s[0] + (za / (za - zb)) * (sn[0] - s[0])
            sg = 1.0 if xc > 0.0 else (-1.0 if xc < 0.0 else 0.0)
            if sg == run_sign:
                run_len += 1
            else:
                run_len = 1
            run_sign = sg
            if run_len >= n_crossings:
                return C_CHAOTIC_1 if run_sign < 0 else C_CHAOTIC_2
        for k in range(nfp):
            dx = sn[0] - fps[3 * k]
            dy = sn[1] - fps[3 * k + 1]
            dz = sn[2] - fps[3 * k + 2]
            if dx * dx + dy * dy + dz * dz <= fp_r2:
                dwell[k] += hh
                if dwell[k] >= fp_dwell:
                    return C_FIXED_1 + k
            else:
                dwell[k] = 0.0
        s[0], s[1], s[2] = sn[0], sn[1], sn[2]
        k1[0], k1[1], k1[2] = k7[0], k7[1], k7[2]
        t += hh
        h = min(hh * fac, max_step)
    return C_UNDECIDED


def classify_batch(p, ics, double t_max, double h0, double max_step, double rtol, double atol,
                   double level, fixed_points, double fp_radius, double fp_dwell,
                   long n_crossings, escape_radii, double min_step, double transient=0.0,
                   double exclusion_radius=0.0, int n_threads=0):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[:, ::1] iv = np.ascontiguousarray(np.asarray(ics, dtype=np.float64).reshape(-1, 3))
    cdef long n = iv.shape[0]
    fp_arr = np.ascontiguousarray(np.asarray(fixed_points, dtype=np.float64).reshape(-1))
    if fp_arr.size == 0:
        fp_arr = np.zeros(3)
        nfp_py = 0
    else:
        nfp_py = fp_arr.size // 3
    cdef double[::1] fv = fp_arr
    cdef int nfp = nfp_py
    cdef double[::1] ev = np.array(
        np.broadcast_to(np.asarray(escape_radii, dtype=np.float64), (n,)), copy=True)
    labels = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] lv = labels
    cdef double fp_r2 = fp_radius * fp_radius
    cdef double excl_r2 = exclusion_radius * exclusion_radius
    cdef long i
    cdef int nt = n_threads if n_threads > 0 else 1
    if n == 0:
        return labels
    for i in prange(n, nogil=True, num_threads=nt, schedule="dynamic"):
        lv[i] = _classify_row(&pv[0], &iv[i, 0], t_max, h0, max_step, rtol, atol, level,
                              &fv[0], nfp, fp_r2, fp_dwell, n_crossings, ev[i], min_step,
                              transient, excl_r2)
    return labels


cdef int _classify_row(const double* p, const double* ic, double t_max, double h0,
                       double max_step, double rtol, double atol, double level,
                       const double* fps, int nfp, double fp_r2, double fp_dwell,
                       long n_crossings, double esc, double min_step, double transient,
                       double excl_r2) noexcept nogil:
    cdef double s[3]
    s[0] = ic[0]
    s[1] = ic[1]
    s[2] = ic[2]
    return classify_one(p, s, t_max, h0, max_step, rtol, atol, level, fps, nfp, fp_r2,
                        fp_dwell, n_crossings, esc, min_step, transient, excl_r2)


def robot_rk4_path(p, double d, double xmax, s0, double h, long n_steps, long stride, bounds):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double* pp = &pv[0]
    cdef double x, y, z, X, Y, th, nX, nY
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double x2, y2, z2, x3, y3, z3, x4, y4, z4
    cdef double v1, v2, v3, v4, m1, m2, m3, m4, a1, a2, a3, a4
    cdef double hh = 0.5 * h
    cdef double h6 = h / 6.0
    cdef bint bounded = bounds is not None
    cdef double bx0 = 0.0, bx1 = 0.0, by0 = 0.0, by1 = 0.0
    cdef long i, m
    if stride < 1:
        stride = 1
    if bounded:
        bx0, bx1, by0, by1 = bounds
    x, y, z, X, Y, th = [float(v) for v in s0]
    cap = n_steps // stride + 2
    out_t = np.empty(cap)
    out_s = np.empty((cap, 6))
    cdef double[::1] tv = out_t
    cdef double[:, ::1] sv = out_s
    tv[0] = 0.0
    sv[0, 0], sv[0, 1], sv[0, 2], sv[0, 3], sv[0, 4], sv[0, 5] = x, y, z, X, Y, th
    m = 1
    with nogil:
        for i in range(1, n_steps + 1):
            field(pp, x, y, z, k1)
            v1 = fmod(fabs(x + y), xmax) / 2.0
            m1 = (x - y) / d
            a1 = th
            x2 = x + hh * k1[0]
            y2 = y + hh * k1[1]
            z2 = z + hh * k1[2]
            field(pp, x2, y2, z2, k2)
            v2 = fmod(fabs(x2 + y2), xmax) / 2.0
            m2 = (x2 - y2) / d
            a2 = th + hh * m1
            x3 = x + hh * k2[0]
            y3 = y + hh * k2[1]
            z3 = z + hh * k2[2]
            field(pp, x3, y3, z3, k3)
            v3 = fmod(fabs(x3 + y3), xmax) / 2.0
            m3 = (x3 - y3) / d
            a3 = th + hh * m2
            x4 = x + h * k3[0]
            y4 = y + h * k3[1]
            z4 = z + h * k3[2]
            field(pp, x4, y4, z4, k4)
            v4 = fmod(fabs(x4 + y4), xmax) / 2.0
            m4 = (x4 - y4) / d
            a4 = th + h * m3
            nX = X + h6 * (v1 * cos(a1) + 2.0 * v2 * cos(a2) + 2.0 * v3 * cos(a3) + v4 * cos(a4))
            nY = Y + h6 * (v1 * sin(a1) + 2.0 * v2 * sin(a2) + 2.0 * v3 * sin(a3) + v4 * sin(a4))
            th = th + h6 * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
            x = x + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            y = y + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            z = z + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            if not bounded or (bx0 <= nX <= bx1 and by0 <= nY <= by1):
                X = nX
                Y = nY
            if i % stride == 0 or i == n_steps:
                tv[m] = i * h
                sv[m, 0] = x
                sv[m, 1] = y
                sv[m, 2] = z
                sv[m, 3] = X
                sv[m, 4] = Y
                sv[m, 5] = th
                m += 1
    return out_t[:m].copy(), out_s[:m].copy(), C_COMPLETED
