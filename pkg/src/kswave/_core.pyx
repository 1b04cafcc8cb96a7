# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: traveling-wave shooting and the method-of-lines RHS.

``run_ks`` is the Dormand-Prince loop of ``integrate.py`` specialised to the
3D/4D wave systems with the shooting guards hard-wired; ``_fallback.py`` is
the pure-Python twin.  Both must return the same tuple layout.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, fmin, fmax, pow, isfinite, INFINITY
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

DEF NSTAGE = 7
DEF NGUARD = 9

cdef double C_[7]
cdef double A_[7][6]
cdef double B_[7]
cdef double E_[7]
cdef double P_[7][4]

C_[:] = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
A_[0][:] = [0, 0, 0, 0, 0, 0]
A_[1][:] = [1.0 / 5, 0, 0, 0, 0, 0]
A_[2][:] = [3.0 / 40, 9.0 / 40, 0, 0, 0, 0]
A_[3][:] = [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0]
A_[4][:] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0]
A_[5][:] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0]
A_[6][:] = [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
E_[:] = [71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40]
P_[0][:] = [1, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432]
P_[1][:] = [0, 0, 0, 0]
P_[2][:] = [0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799]
P_[3][:] = [0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072]
P_[4][:] = [0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632]
P_[5][:] = [0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844]
P_[6][:] = [0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423]

DEF SAFE = 0.9
DEF BETA_PI = 0.04
DEF FAC_MIN = 0.2
DEF FAC_MAX = 10.0
DEF EVENT_XTOL = 1e-12
DEF MAX_BISECT = 200


cdef struct Model:
    int dim
    double mu, beta, diff, c
    int chi_kind
    double chi_a, chi_b, v_max
    double *tv
    double *tf
    int nt
    double conv_radius, exit_tol, face_tol, rho
    int check_faces
    int tail


cdef inline double chi_at(Model *m, double v) nogil:
    cdef int lo, hi, mid
    if v < 0.0:
        v = 0.0
    elif v > m.v_max:
        v = m.v_max
    if m.chi_kind == 0:
        return m.chi_a
    if m.chi_kind == 1:
        return m.chi_a + m.chi_b * v
    if v <= m.tv[0]:
        return m.tf[0]
    if v >= m.tv[m.nt - 1]:
        return m.tf[m.nt - 1]
    lo = 0
    hi = m.nt - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if m.tv[mid] <= v:
            lo = mid
        else:
            hi = mid
    return m.tf[lo] + (m.tf[hi] - m.tf[lo]) * (v - m.tv[lo]) / (m.tv[hi] - m.tv[lo])


cdef inline void rhs(Model *m, double *s, double *out) nogil:
    cdef double u = s[0], v = s[1], w, y, gap
    if m.dim == 3:
        w = s[2]
        gap = u - m.beta * v
        out[0] = -m.c * u + u * chi_at(m, v) * gap / m.c + w
        out[1] = gap / m.c
        out[2] = m.mu * u * (u - 1.0)
    else:
        y = s[2]
        w = s[3]
        out[0] = -m.c * u + u * chi_at(m, v) * y + w
        out[1] = y
        out[2] = -m.c * y / m.diff + (u - m.beta * v) / m.diff
        out[3] = m.mu * u * (u - 1.0)


cdef inline double maxnorm(double *s, int n) nogil:
    cdef double r = 0.0
    cdef int i
    for i in range(n):
        if fabs(s[i]) > r:
            r = fabs(s[i])
    return r


cdef inline double guard(Model *m, int k, double *s) nogil:
    """Shooting guards; every one is 'down' and terminal.

    Thresholds shrink with the state so that sign changes stay visible deep
    in the tail: U, W guards scale with max(|U|, |W|), the rest with the
    full max-norm, both capped at 1.
    """
    cdef double nrm = maxnorm(s, m.dim)
    cdef double sa = fmin(1.0, nrm)
    cdef double u = s[0], v = s[1], y = 0.0, w, su
    if m.dim == 3:
        w = s[2]
    else:
        y = s[2]
        w = s[3]
    su = fmin(1.0, fmax(fabs(u), fabs(w)))
    if k == 0:
        if m.tail:
            # U, W decay far faster than V in some regimes; stop before they underflow
            return fmax(fabs(u), fabs(w)) - m.conv_radius
        return nrm - m.conv_radius
    if k == 1:
        return u + m.exit_tol * su
    if k == 2:
        return v + m.exit_tol * sa
    if k == 3:
        return w + m.exit_tol * su
    if not m.check_faces:
        return 1.0
    if k == 4:
        return (m.beta * v - u) + m.face_tol * sa
    if k == 5:
        return (1.0 - m.beta * v) + m.face_tol * sa
    if k == 6:
        # W lives on the scale c, so the tolerance follows |W| rather than capping at 1
        return (m.c * u - w) + m.face_tol * fmax(m.c * fabs(u), fabs(w))
    if m.dim == 3:
        return 1.0
    if k == 7:
        return -y + m.face_tol * sa
    if k == 8:
        if not isfinite(m.rho):
            return 1.0
        return (y - m.rho * (u - m.beta * v)) + m.face_tol * sa
    return 1.0


cdef inline double rms(double *x, int n) nogil:
    cdef double acc = 0.0
    cdef int i
    for i in range(n):
        acc += x[i] * x[i]
    return sqrt(acc / n)


cdef inline void dense_eval(int n, double t, double h, double *y, double *q, double tq, double *out) nogil:
    cdef double th = (tq - t) / h
    cdef double th2 = th * th
    cdef double th3 = th2 * th
    cdef double th4 = th3 * th
    cdef int i
    for i in range(n):
        out[i] = y[i] + h * (q[4 * i] * th + q[4 * i + 1] * th2 + q[4 * i + 2] * th3 + q[4 * i + 3] * th4)


cdef class _Buffer:
    cdef double *data
    cdef Py_ssize_t size, cap

    def __cinit__(self, Py_ssize_t cap):
        self.cap = cap
        self.size = 0
        self.data = <double *> malloc(cap * sizeof(double))
        if self.data == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.data)

    cdef int push(self, double *vals, int n) except -1:
        cdef Py_ssize_t newcap
        cdef double *p
        cdef int i
        if self.size + n > self.cap:
            newcap = 2 * self.cap + n
            p = <double *> realloc(self.data, newcap * sizeof(double))
            if p == NULL:
                raise MemoryError()
            self.data = p
            self.cap = newcap
        for i in range(n):
            self.data[self.size + i] = vals[i]
        self.size += n
        return 0

    cdef object to_array(self):
        cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(self.size, dtype=np.float64)
        cdef Py_ssize_t i
        for i in range(self.size):
            out[i] = self.data[i]
        return out


def run_ks(int dim, double mu, double beta, double diff, double c,
           int chi_kind, double chi_a, double chi_b, double[::1] chi_v, double[::1] chi_f,
           double[::1] y0, double t0, double t1,
           double rtol, double atol, double max_step, long max_steps, double first_step,
           double conv_radius, double exit_tol, double face_tol, double rho, int check_faces, int tail=0):
    """Shoot one orbit.

    Returns ``(times, states, seg_h, seg_q, status, event_index, t_end, attempts)``
    with status 0 = time limit, 1 = event, 2 = step limit, 3 = non-finite.
    """
    cdef Model m
    cdef int n = dim
    cdef int i, j, s, k, ev, it
    cdef double t, h, h_next, t_new, err, fac, fac11, facold, lo, hi, mid, te, best_t, gm
    cdef double y[4]
    cdef double ynew[4]
    cdef double ytmp[4]
    cdef double ye[4]
    cdef double errv[4]
    cdef double K[7][4]
    cdef double q[16]
    cdef double gprev[NGUARD]
    cdef double gnew[NGUARD]
    cdef double d0, d1, d2, h0, h1, dm
    cdef double sc[4]
    cdef double f1[4]
    cdef int rejected = 0, last, status = -1, best_k, finite
    cdef double acc
    cdef Py_ssize_t npts
    cdef long attempts = 0
    cdef double tv_store[1]

    m.dim = dim
    m.mu = mu
    m.beta = beta
    m.diff = diff
    m.c = c
    m.chi_kind = chi_kind
    m.chi_a = chi_a
    m.chi_b = chi_b
    m.v_max = 1.0 / beta
    m.nt = chi_v.shape[0]
    m.tv = &chi_v[0] if m.nt > 0 else &tv_store[0]
    m.tf = &chi_f[0] if m.nt > 0 else &tv_store[0]
    m.conv_radius = conv_radius
    m.exit_tol = exit_tol
    m.face_tol = face_tol
    m.rho = rho
    m.check_faces = check_faces
    m.tail = tail

    times = _Buffer(1024)
    states = _Buffer(1024 * n)
    segh = _Buffer(1024)
    segq = _Buffer(1024 * n * 4)

    t = t0
    for i in range(n):
        y[i] = y0[i]
    rhs(&m, y, K[0])
    times.push(&t, 1)
    states.push(y, n)

    if first_step > 0:
        h = fmin(fmin(first_step, max_step), t1 - t0)
    else:
        for i in range(n):
            sc[i] = atol + rtol * fabs(y[i])
            ytmp[i] = y[i] / sc[i]
            errv[i] = K[0][i] / sc[i]
        d0 = rms(ytmp, n)
        d1 = rms(errv, n)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        h0 = fmin(h0, t1 - t0)
        for i in range(n):
            ytmp[i] = y[i] + h0 * K[0][i]
        rhs(&m, ytmp, f1)
        for i in range(n):
            errv[i] = (f1[i] - K[0][i]) / sc[i]
        d2 = rms(errv, n) / h0
        dm = fmax(d1, d2)
        if dm <= 1e-15:
            h1 = fmax(1e-6, h0 * 1e-3)
        else:
            h1 = pow(0.01 / dm, 0.2)
        h = fmin(fmin(fmin(100 * h0, h1), max_step), t1 - t0)

    for k in range(NGUARD):
        gprev[k] = guard(&m, k, y)

    facold = 1e-4
    best_k = -1
    best_t = t
    while True:
        if attempts >= max_steps:
            status = 2
            break
        attempts += 1
        h = fmin(h, max_step)
        last = t + h >= t1
        if last:
            h = t1 - t
        for s in range(1, 6):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    acc += A_[s][j] * K[j][i]
                ytmp[i] = y[i] + h * acc
            rhs(&m, ytmp, K[s])
        for i in range(n):
            acc = 0.0
            for j in range(6):
                acc += A_[6][j] * K[j][i]
            ynew[i] = y[i] + h * acc
        t_new = t1 if last else t + h
        rhs(&m, ynew, K[6])
        for i in range(n):
            acc = 0.0
            for j in range(NSTAGE):
                acc += E_[j] * K[j][i]
            errv[i] = h * acc / (atol + rtol * fmax(fabs(y[i]), fabs(ynew[i])))
        err = rms(errv, n)

        finite = isfinite(err)
        for i in range(n):
            if not isfinite(ynew[i]):
                finite = 0
        if not finite:
            h *= 0.1
            rejected = 1
            if h <= 16 * 2.220446049250313e-16 * fmax(fabs(t), 1.0):
                status = 3
                break
            continue

        if err <= 1.0:
            fac11 = pow(err, 0.2 - BETA_PI * 0.75)
            fac = fac11 / pow(facold, BETA_PI)
            fac = fmax(1.0 / FAC_MAX, fmin(1.0 / FAC_MIN, fac / SAFE))
            h_next = h / fac
            if rejected:
                h_next = fmin(h_next, h)
            facold = fmax(err, 1e-4)
            rejected = 0

            for i in range(n):
                for j in range(4):
                    acc = 0.0
                    for s in range(NSTAGE):
                        acc += K[s][i] * P_[s][j]
                    q[4 * i + j] = acc

            best_k = -1
            best_t = INFINITY
            for k in range(NGUARD):
                gnew[k] = guard(&m, k, ynew)
                if gprev[k] > 0 and gnew[k] <= 0:
                    lo = t
                    hi = t_new
                    for it in range(MAX_BISECT):
                        if hi - lo <= EVENT_XTOL:
                            break
                        mid = 0.5 * (lo + hi)
                        if mid <= lo or mid >= hi:
                            break
                        dense_eval(n, t, h, y, q, mid, ytmp)
                        gm = guard(&m, k, ytmp)
                        if gm <= 0:
                            hi = mid
                        else:
                            lo = mid
                    if hi < best_t:
                        best_t = hi
                        best_k = k
            segh.push(&h, 1)
            segq.push(q, 4 * n)
            if best_k >= 0:
                dense_eval(n, t, h, y, q, best_t, ye)
                times.push(&best_t, 1)
                states.push(ye, n)
                t = best_t
                status = 1
                break
            times.push(&t_new, 1)
            states.push(ynew, n)
            t = t_new
            for i in range(n):
                y[i] = ynew[i]
                K[0][i] = K[6][i]
            for k in range(NGUARD):
                gprev[k] = gnew[k]
            if last:
                status = 0
                break
            h = h_next
        else:
            fac11 = pow(err, 0.2 - BETA_PI * 0.75)
            h = h / fmin(1.0 / FAC_MIN, fac11 / SAFE)
            rejected = 1

    npts = times.size
    return (times.to_array(), states.to_array().reshape(npts, n), segh.to_array(),
            segq.to_array().reshape(npts - 1, n, 4), status, best_k, t, attempts)


# ---------------------------------------------------------------------------
# method of lines
# ---------------------------------------------------------------------------

cdef inline double ghost(double[::1] a, Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return a[-i - 1]
    if i >= n:
        return a[2 * n - i - 1]
    return a[i]


cdef void _pde_rhs(double[::1] u, double[::1] v, double[::1] du, double[::1] dv,
                   Model *m, double dx, double frame_c, int adv_order,
                   int reaction, int chemotaxis) nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double inv_dx2 = 1.0 / (dx * dx)
    cdef double f_left = 0.0, f_right, vel, up
    for i in range(n):
        du[i] = (ghost(u, i + 1, n) - 2.0 * u[i] + ghost(u, i - 1, n)) * inv_dx2
        dv[i] = 0.0
        if m.diff != 0.0:
            dv[i] = m.diff * (ghost(v, i + 1, n) - 2.0 * v[i] + ghost(v, i - 1, n)) * inv_dx2
    if chemotaxis:
        f_left = 0.0
        for i in range(n):
            if i < n - 1:
                vel = chi_at(m, 0.5 * (v[i] + v[i + 1])) * (v[i + 1] - v[i]) / dx
                up = u[i] if vel > 0 else u[i + 1]
                f_right = up * vel
            else:
                f_right = 0.0
            du[i] -= (f_right - f_left) / dx
            f_left = f_right
    if reaction:
        for i in range(n):
            du[i] += m.mu * u[i] * (1.0 - u[i])
            dv[i] += m.beta * v[i] - u[i]
    if frame_c != 0.0:
        for i in range(n):
            if adv_order == 1:
                du[i] += frame_c * (ghost(u, i + 1, n) - u[i]) / dx
                dv[i] += frame_c * (ghost(v, i + 1, n) - v[i]) / dx
            else:
                du[i] += frame_c * (-3.0 * u[i] + 4.0 * ghost(u, i + 1, n) - ghost(u, i + 2, n)) / (2.0 * dx)
                dv[i] += frame_c * (-3.0 * v[i] + 4.0 * ghost(v, i + 1, n) - ghost(v, i + 2, n)) / (2.0 * dx)


cdef Model _pde_model(double mu, double beta, double diff, int chi_kind, double chi_a, double chi_b,
                      double[::1] chi_v, double[::1] chi_f):
    cdef Model m
    m.dim = 0
    m.mu = mu
    m.beta = beta
    m.diff = diff
    m.c = 0.0
    m.chi_kind = chi_kind
    m.chi_a = chi_a
    m.chi_b = chi_b
    m.v_max = 1.0 / beta
    m.nt = chi_v.shape[0]
    m.tv = &chi_v[0] if m.nt > 0 else NULL
    m.tf = &chi_f[0] if m.nt > 0 else NULL
    return m


def pde_rhs(double[::1] u, double[::1] v, double mu, double beta, double diff,
            int chi_kind, double chi_a, double chi_b, double[::1] chi_v, double[::1] chi_f,
            double dx, double frame_c=0.0, int adv_order=2, int reaction=1, int chemotaxis=1):
    cdef Model m = _pde_model(mu, beta, diff, chi_kind, chi_a, chi_b, chi_v, chi_f)
    du = np.empty(u.shape[0])
    dv = np.empty(u.shape[0])
    cdef double[::1] du_ = du, dv_ = dv
    _pde_rhs(u, v, du_, dv_, &m, dx, frame_c, adv_order, reaction, chemotaxis)
    return du, dv


def heun_steps(double[::1] u, double[::1] v, long nsteps, double dt,
               double mu, double beta, double diff,
               int chi_kind, double chi_a, double chi_b, double[::1] chi_v, double[::1] chi_f,
               double dx, double frame_c, int adv_order, int reaction, int chemotaxis,
               double[:, ::1] monitors):
    """Advance ``(u, v)`` in place by ``nsteps`` Heun steps.

    Row ``k`` of ``monitors`` receives (min u, min v, max(u - beta v), max u)
    after step ``k``.  Returns the number of completed steps; fewer than
    ``nsteps`` means a non-finite value appeared.
    """
    cdef Model m = _pde_model(mu, beta, diff, chi_kind, chi_a, chi_b, chi_v, chi_f)
    cdef Py_ssize_t n = u.shape[0], i
    cdef long k
    cdef double[::1] k1u = np.empty(n), k1v = np.empty(n), k2u = np.empty(n), k2v = np.empty(n)
    cdef double[::1] tu = np.empty(n), tv = np.empty(n)
    cdef double mnu, mnv, mxg, mxu
    for k in range(nsteps):
        _pde_rhs(u, v, k1u, k1v, &m, dx, frame_c, adv_order, reaction, chemotaxis)
        for i in range(n):
            tu[i] = u[i] + dt * k1u[i]
            tv[i] = v[i] + dt * k1v[i]
        _pde_rhs(tu, tv, k2u, k2v, &m, dx, frame_c, adv_order, reaction, chemotaxis)
        mnu = INFINITY
        mnv = INFINITY
        mxg = -INFINITY
        mxu = -INFINITY
        for i in range(n):
            u[i] = u[i] + 0.5 * dt * (k1u[i] + k2u[i])
            v[i] = v[i] + 0.5 * dt * (k1v[i] + k2v[i])
            if not (isfinite(u[i]) and isfinite(v[i])):
                return k
            mnu = fmin(mnu, u[i])
            mnv = fmin(mnv, v[i])
            mxg = fmax(mxg, u[i] - beta * v[i])
            mxu = fmax(mxu, u[i])
        monitors[k, 0] = mnu
        monitors[k, 1] = mnv
        monitors[k, 2] = mxg
        monitors[k, 3] = mxu
    return nsteps
