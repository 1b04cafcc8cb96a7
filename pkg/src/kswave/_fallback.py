"""Pure-Python twins of the compiled kernels in ``_core.pyx``.

Same signatures, same return layouts.  Shooting goes through the generic
:func:`kswave.integrate.integrate`; the method-of-lines pieces are numpy.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonFiniteState, StepLimitExceeded
from .integrate import EventSpec, IntegratorConfig, integrate

_STATUS = {"TimeLimit": 0, "Event": 1, "StepLimit": 2, "NonFinite": 3}


def _chi_fn(kind, a, b, tv, tf, v_max):
    if kind == 0:
        return lambda v: a
    if kind == 1:
        return lambda v: a + b * min(max(v, 0.0), v_max)
    tv = np.asarray(tv)
    tf = np.asarray(tf)
    return lambda v: float(np.interp(min(max(v, 0.0), v_max), tv, tf))


def _chi_array(kind, a, b, tv, tf, v_max):
    def f(v):
        vc = np.clip(v, 0.0, v_max)
        if kind == 0:
            return np.full_like(vc, a)
        if kind == 1:
            return a + b * vc
        return np.interp(vc, tv, tf)
    return f


def run_ks(dim, mu, beta, diff, c, chi_kind, chi_a, chi_b, chi_v, chi_f, y0, t0, t1,
           rtol, atol, max_step, max_steps, first_step,
           conv_radius, exit_tol, face_tol, rho, check_faces, tail=0):
    chi = _chi_fn(chi_kind, chi_a, chi_b, chi_v, chi_f, 1.0 / beta)

    if dim == 3:
        def rhs(t, s):
            u, v, w = s
            gap = u - beta * v
            return np.array([-c * u + u * chi(v) * gap / c + w, gap / c, mu * u * (u - 1.0)])
    else:
        def rhs(t, s):
            u, v, y, w = s
            return np.array([-c * u + u * chi(v) * y + w, y,
                             -c * y / diff + (u - beta * v) / diff, mu * u * (u - 1.0)])

    wi = dim - 1

    def sa(s):
        return min(1.0, float(np.max(np.abs(s))))

    def su(s):
        return min(1.0, max(abs(s[0]), abs(s[wi])))

    guards = [
        (lambda t, s: max(abs(s[0]), abs(s[wi])) - conv_radius) if tail else
        (lambda t, s: float(np.max(np.abs(s))) - conv_radius),
        lambda t, s: s[0] + exit_tol * su(s),
        lambda t, s: s[1] + exit_tol * sa(s),
        lambda t, s: s[wi] + exit_tol * su(s),
    ]
    if check_faces:
        guards += [
            lambda t, s: (beta * s[1] - s[0]) + face_tol * sa(s),
            lambda t, s: (1.0 - beta * s[1]) + face_tol * sa(s),
            lambda t, s: (c * s[0] - s[wi]) + face_tol * max(c * abs(s[0]), abs(s[wi])),
        ]
        if dim == 4:
            guards.append(lambda t, s: -s[2] + face_tol * sa(s))
            if math.isfinite(rho):
                guards.append(lambda t, s: (s[2] - rho * (s[0] - beta * s[1])) + face_tol * sa(s))
    events = [EventSpec(g, "down", True) for g in guards]
    cfg = IntegratorConfig(rel_tol=rtol, abs_tol=atol, max_step=max_step, max_steps=int(max_steps),
                           first_step=first_step if first_step > 0 else None)
    try:
        traj = integrate(rhs, y0, (t0, t1), cfg, events)
    except (StepLimitExceeded, NonFiniteState) as exc:
        traj = exc.trajectory
    term = traj.termination
    index = term.index if term.index is not None else -1
    return (traj.times, traj.states, traj.seg_h, traj.seg_q, _STATUS[term.kind], index,
            float(traj.times[-1]), len(traj.times))


def _shift(a, k):
    """a[i + k] with mirror ghost cells at both ends."""
    n = a.size
    idx = np.arange(n) + k
    idx = np.where(idx < 0, -idx - 1, idx)
    idx = np.where(idx >= n, 2 * n - idx - 1, idx)
    return a[idx]


def pde_rhs(u, v, mu, beta, diff, chi_kind, chi_a, chi_b, chi_v, chi_f,
            dx, frame_c=0.0, adv_order=2, reaction=1, chemotaxis=1):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    up1, um1 = _shift(u, 1), _shift(u, -1)
    du = (up1 - 2.0 * u + um1) / (dx * dx)
    if diff != 0.0:
        dv = diff * (_shift(v, 1) - 2.0 * v + _shift(v, -1)) / (dx * dx)
    else:
        dv = np.zeros_like(v)
    if chemotaxis:
        chi = _chi_array(chi_kind, chi_a, chi_b, chi_v, chi_f, 1.0 / beta)
        vel = chi(0.5 * (v[:-1] + v[1:])) * (v[1:] - v[:-1]) / dx
        flux = np.where(vel > 0, u[:-1], u[1:]) * vel
        flux = np.concatenate([[0.0], flux, [0.0]])
        du = du - (flux[1:] - flux[:-1]) / dx
    if reaction:
        du = du + mu * u * (1.0 - u)
        dv = dv + beta * v - u
    if frame_c != 0.0:
        if adv_order == 1:
            du = du + frame_c * (up1 - u) / dx
            dv = dv + frame_c * (_shift(v, 1) - v) / dx
        else:
            du = du + frame_c * (-3.0 * u + 4.0 * up1 - _shift(u, 2)) / (2.0 * dx)
            dv = dv + frame_c * (-3.0 * v + 4.0 * _shift(v, 1) - _shift(v, 2)) / (2.0 * dx)
    return du, dv


def heun_steps(u, v, nsteps, dt, mu, beta, diff, chi_kind, chi_a, chi_b, chi_v, chi_f,
               dx, frame_c, adv_order, reaction, chemotaxis, monitors):
    args = (mu, beta, diff, chi_kind, chi_a, chi_b, chi_v, chi_f, dx, frame_c, adv_order,
            reaction, chemotaxis)
    for k in range(nsteps):
        k1u, k1v = pde_rhs(u, v, *args)
        k2u, k2v = pde_rhs(u + dt * k1u, v + dt * k1v, *args)
        u += 0.5 * dt * (k1u + k2u)
        v += 0.5 * dt * (k1v + k2v)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            return k
        monitors[k, 0] = u.min()
        monitors[k, 1] = v.min()
        monitors[k, 2] = np.max(u - beta * v)
        monitors[k, 3] = u.max()
    return nsteps
