"""Explicit adaptive Runge-Kutta integration with dense output and events.

The scheme is the Dormand-Prince 5(4) pair with Hairer's PI step-size
controller and the standard 4th-order continuous extension.  Events are found
by a sign change of the guard across an accepted step and then bisected on the
dense interpolant.

The compiled shooting kernel in ``_core.pyx`` repeats this loop verbatim for
the traveling-wave systems; keep the two in step when editing either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, NonFiniteState, StepLimitExceeded

# Dormand-Prince 5(4) tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension: y(t + th*h) = y + h * (K.T @ P) @ [th, th^2, th^3, th^4]
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# PI controller constants (DOPRI5 defaults)
SAFE = 0.9
BETA_PI = 0.04
EXPO1 = 0.2 - BETA_PI * 0.75
FAC_MIN = 0.2   # step may shrink at most 5x
FAC_MAX = 10.0  # and grow at most 10x

EVENT_XTOL = 1e-12
_MAX_BISECT = 200

DIRECTIONS = ("any", "up", "down")


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    max_steps: int = 10_000_000
    first_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be positive")
        if not self.max_steps > 0:
            raise ConfigError("max_steps must be positive")
        if not self.max_step > 0:
            raise ConfigError("max_step must be positive")


@dataclass(frozen=True)
class EventSpec:
    """``guard(t, y)`` changes sign at the event.

    ``direction='down'`` fires on a transition from ``g > 0`` to ``g <= 0``,
    ``'up'`` from ``g < 0`` to ``g >= 0``.
    """

    guard: Callable[[float, np.ndarray], float]
    direction: str = "any"
    terminal: bool = False

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"event direction must be one of {DIRECTIONS}")


class Termination(NamedTuple):
    kind: str  # TimeLimit | Event | StepLimit | NonFinite
    index: int | None = None
    xi: float | None = None


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    termination: Termination
    seg_h: np.ndarray
    seg_q: np.ndarray
    events: list = field(default_factory=list)

    @property
    def final_state(self):
        return self.states[-1]

    def sol(self, t):
        """Dense-output evaluation at ``t`` (scalar or array) inside the span."""
        t = np.asarray(t, dtype=float)
        if len(self.times) == 1:
            return np.broadcast_to(self.states[0], t.shape + self.states.shape[1:]).copy()
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.seg_h) - 1)
        h = self.seg_h[idx]
        th = (t - self.times[idx]) / h
        powers = np.stack([th, th ** 2, th ** 3, th ** 4], axis=-1)
        q = self.seg_q[idx]
        return self.states[idx] + h[..., None] * np.einsum("...ij,...j->...i", q, powers)


def rms_norm(x):
    return math.sqrt(float(np.dot(x, x)) / len(x))


def initial_step(rhs, t0, y0, f0, direction_span, rtol, atol, max_step):
    sc = atol + rtol * np.abs(y0)
    d0 = rms_norm(y0 / sc)
    d1 = rms_norm(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(t0 + h0, y1), dtype=float)
    d2 = rms_norm((f1 - f0) / sc) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, max_step, direction_span)


def _crossed(direction, g_prev, g_new):
    if direction == "down":
        return g_prev > 0 and g_new <= 0
    if direction == "up":
        return g_prev < 0 and g_new >= 0
    return (g_prev > 0 and g_new <= 0) or (g_prev < 0 and g_new >= 0)


def _locate(ev, t, h, y, q, t_lo, t_hi, g_prev):
    lo, hi = t_lo, t_hi
    for _ in range(_MAX_BISECT):
        if hi - lo <= EVENT_XTOL:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        th = (mid - t) / h
        ym = y + h * (q @ np.array([th, th * th, th ** 3, th ** 4]))
        if _crossed(ev.direction, g_prev, ev.guard(mid, ym)):
            hi = mid
        else:
            lo = mid
    return hi


def integrate(rhs: Callable, y0: Sequence[float], span: Sequence[float],
              cfg: IntegratorConfig | None = None,
              events: Sequence[EventSpec] = ()) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``span[0]`` to ``span[1]``.

    Returns a :class:`Trajectory` of accepted steps.  A terminal event stops
    the run at the located event point.  Raises :class:`StepLimitExceeded` or
    :class:`NonFiniteState` (each carrying the partial trajectory) when the
    run cannot complete.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise ConfigError("span must be increasing")
    y = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ConfigError("initial state must be finite")
    n = y.size
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    events = list(events)

    t = t0
    f = np.asarray(rhs(t, y), dtype=float)
    if cfg.first_step is not None:
        h = min(cfg.first_step, cfg.max_step, t1 - t0)
    else:
        h = initial_step(rhs, t, y, f, t1 - t0, rtol, atol, cfg.max_step)
    g_prev = [ev.guard(t, y) for ev in events]

    times, states, seg_h, seg_q, found = [t], [y.copy()], [], [], []
    K = np.empty((7, n))
    facold = 1e-4
    rejected = False
    attempts = 0
    termination = None

    def build(term):
        return Trajectory(np.array(times), np.array(states).reshape(len(states), n), term,
                          np.array(seg_h), np.array(seg_q).reshape(len(seg_q), n, 4), found)

    while termination is None:
        if attempts >= cfg.max_steps:
            traj = build(Termination("StepLimit", None, t))
            raise StepLimitExceeded(f"step limit {cfg.max_steps} reached at t={t:.6g}", traj)
        attempts += 1
        h = min(h, cfg.max_step)
        last = t + h >= t1
        if last:
            h = t1 - t
        K[0] = f
        t_new = t1 if last else t + h
        # overflow is caught below by the finiteness check
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 6):
                K[s] = rhs(t + C[s] * h, y + h * (A[s, :s] @ K[:s]))
            y_new = y + h * (A[6, :6] @ K[:6])
            K[6] = rhs(t_new, y_new)
            err_vec = h * (E @ K)
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = rms_norm(err_vec / sc)

        if not (np.all(np.isfinite(y_new)) and math.isfinite(err)):
            h *= 0.1
            rejected = True
            if h <= 16 * np.spacing(max(abs(t), 1.0)):
                traj = build(Termination("NonFinite", None, t))
                raise NonFiniteState(f"state became non-finite near t={t:.6g}", traj,
                                     last_finite=y.copy(), t=t)
            continue

        if err <= 1.0:
            fac11 = err ** EXPO1
            fac = fac11 / facold ** BETA_PI
            fac = max(1 / FAC_MAX, min(1 / FAC_MIN, fac / SAFE))
            h_next = h / fac
            if rejected:
                h_next = min(h_next, h)
            facold = max(err, 1e-4)
            rejected = False

            q = K.T @ P
            g_new = [ev.guard(t_new, y_new) for ev in events]
            hits = []
            for i, ev in enumerate(events):
                if _crossed(ev.direction, g_prev[i], g_new[i]):
                    hits.append((_locate(ev, t, h, y, q, t, t_new, g_prev[i]), i))
            hits.sort()
            stop = None
            for te, i in hits:
                th = (te - t) / h
                ye = y + h * (q @ np.array([th, th * th, th ** 3, th ** 4]))
                found.append((i, te, ye))
                if events[i].terminal:
                    stop = (te, i, ye)
                    break
            seg_h.append(h)
            seg_q.append(q)
            if stop is not None:
                te, i, ye = stop
                times.append(te)
                states.append(ye)
                termination = Termination("Event", i, te)
                break
            times.append(t_new)
            states.append(y_new.copy())
            t, y, f = t_new, y_new, K[6].copy()
            g_prev = g_new
            if last:
                termination = Termination("TimeLimit", None, t)
            h = h_next
        else:
            fac11 = err ** EXPO1
            h = h / min(1 / FAC_MIN, fac11 / SAFE)
            rejected = True

    return build(termination)
