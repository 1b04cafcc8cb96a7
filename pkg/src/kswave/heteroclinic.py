"""Heteroclinic orbits of the wave systems by shooting.

An orbit starts a distance ``eps`` from the invading state along its
unstable direction and is integrated forward in the wave coordinate until it
reaches the origin, turns negative, leaves the trap region, or runs past the
horizon.

Close to the minimum speed the spiral that makes an orbit negative is tiny:
at ``c = c*(1 - d)`` the first negative excursion appears only after the
orbit has decayed by roughly ``exp(-pi / sqrt(2 d))``.  Reaching a 1e-8 ball
therefore does not settle the outcome, and the shooter follows the orbit
further (the tail watch) with purely relative error control, down to
``tail_radius``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (BracketInvalid, ConfigError, NonFiniteState, NormalizationFailed,
                     NotConverged, StepLimitExceeded)
from .integrate import EventSpec, IntegratorConfig, Termination, Trajectory, integrate
from .model import ModelParams, equilibria, validate_params
from .regions import contains, region_for
from .spectra import origin_spectrum, rho_or_none, unstable_direction

CONVERGED = "ConvergedToOrigin"
EXITED = "ExitedRegion"
NEGATIVE = "NegativityDetected"
STALLED = "Stalled"
OUTCOME_KINDS = (CONVERGED, EXITED, NEGATIVE, STALLED)

# guard index -> (outcome kind, label); index 0 is convergence
_GUARDS = {
    1: (NEGATIVE, "U"),
    2: (NEGATIVE, "V"),
    3: (NEGATIVE, "W"),
    4: (EXITED, "UeqBetaV"),
    5: (EXITED, "Vtop"),
    6: (EXITED, "WeqCU"),
    7: (EXITED, "Y0"),
    8: (EXITED, "Yslant"),
}

PROFILE_POINTS = 2048
ORDERING_TOL = 1e-8
MONOTONICITY_TOL = 1e-8
PROFILE_TAIL_TOL = 1e-6
RICHARDSON_TOL = 1e-5
FACE_TOL_PER_RTOL = 10.0


@dataclass(frozen=True)
class ShootConfig:
    eps: float = 1e-6
    conv_radius: float = 1e-8
    exit_tol: float = 1e-9
    face_tol: float = 1e-9
    xi_max: float | None = None  # None means 1e4 / c
    rel_tol: float = 1e-9
    # purely relative control: U can sit 10 decades below V on the way in
    abs_tol: float = 1e-300
    max_steps: int = 2_000_000
    check_faces: bool = True
    tail: bool = True
    tail_radius: float = 1e-200
    tail_abs_tol: float = 1e-300
    backend: str | None = None

    def horizon(self, c, lam_u=None, decay=None):
        """Integration window for phase one.

        The default is 1e4 / c, raised when needed to four times the time the
        linearization takes to leave the saddle and to reach the convergence
        ball; both grow like c / mu at large c.
        """
        if self.xi_max is not None:
            return self.xi_max
        h = 1e4 / c
        if lam_u and decay:
            h = max(h, 4.0 * (math.log(1.0 / self.eps) / lam_u
                              + math.log(1.0 / self.conv_radius) / decay))
        return h

    def tail_window(self, decay=None):
        """Extra window for the tail phase beyond the phase-one horizon."""
        if self.xi_max is not None or not decay:
            return 0.0
        return 4.0 * math.log(self.conv_radius / self.tail_radius) / decay

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.pop("backend")
        return d


@dataclass
class OrbitOutcome:
    """Result of one shot.

    ``face`` is set for ``ExitedRegion``, ``component`` for
    ``NegativityDetected``.  ``xi`` is where the run ended; ``xi_converged``
    where the orbit first entered the convergence ball (if it did).
    ``flagged`` marks a converged orbit whose tail watch hit the horizon.
    """

    kind: str
    trajectory: Trajectory
    c: float
    params: ModelParams
    xi: float
    face: str | None = None
    component: str | None = None
    xi_converged: float | None = None
    flagged: bool = False
    config: ShootConfig = field(default_factory=ShootConfig)

    @property
    def converged(self):
        return self.kind == CONVERGED

    def summary(self):
        return {"kind": self.kind, "c": self.c, "xi": self.xi, "face": self.face,
                "component": self.component, "xi_converged": self.xi_converged,
                "flagged": self.flagged, "steps": int(len(self.trajectory.times) - 1)}


def _run(kern, p, c, y0, t0, t1, rtol, atol, conv_radius, cfg, rho, tail=False):
    kind, a, b, tv, tf = p.chi.kernel_spec()
    # a face crossing smaller than what the integrator resolves is not an exit
    face_tol = max(cfg.face_tol, FACE_TOL_PER_RTOL * rtol)
    return kern.run_ks(p.dim, p.mu, p.beta, p.diff, c, kind, a, b,
                       np.ascontiguousarray(tv, dtype=float), np.ascontiguousarray(tf, dtype=float),
                       np.ascontiguousarray(y0, dtype=float), t0, t1, rtol, atol, math.inf,
                       cfg.max_steps, 0.0, conv_radius, cfg.exit_tol, face_tol, rho,
                       int(cfg.check_faces and not tail), int(tail))


_KIND = {0: "TimeLimit", 1: "Event", 2: "StepLimit", 3: "NonFinite"}


def _trajectory(out, drop_first=False):
    times, states, seg_h, seg_q, status, index, t_end, _ = out
    times, states = np.asarray(times), np.asarray(states)
    if drop_first:
        times, states = times[1:], states[1:]
    term = Termination(_KIND[status], index if index >= 0 else None, t_end)
    return Trajectory(times, states, term, np.asarray(seg_h), np.asarray(seg_q))


def _join(a: Trajectory, b: Trajectory) -> Trajectory:
    return Trajectory(np.concatenate([a.times, b.times]), np.concatenate([a.states, b.states]),
                      b.termination, np.concatenate([a.seg_h, b.seg_h]),
                      np.concatenate([a.seg_q, b.seg_q]))


def _classify(status, index):
    if status == 1:
        return (CONVERGED, None) if index == 0 else _GUARDS[index]
    return STALLED, None


def _raise_on_failure(out, traj):
    status = out[4]
    if status == 2:
        raise StepLimitExceeded(f"step limit reached at xi={out[6]:.6g}", traj)
    if status == 3:
        raise NonFiniteState(f"non-finite state near xi={out[6]:.6g}", traj,
                             traj.states[-1], out[6])


def shoot(p: ModelParams, c: float, cfg: ShootConfig | None = None) -> OrbitOutcome:
    """Shoot along the unstable manifold of the invading state at speed ``c``."""
    cfg = cfg or ShootConfig()
    validate_params(p)
    if not c > 0:
        raise ConfigError("c must be positive")
    kern = _kernels.get(cfg.backend)
    base = np.array(equilibria(p, c).invading, dtype=float)
    ud = unstable_direction(p, c, cfg.eps)
    y0 = base + cfg.eps * ud.direction
    rho = rho_or_none(p, c)
    rho = math.nan if rho is None else rho
    decay = min(-z.real for z in origin_spectrum(p, c).eigenvalues)
    horizon = cfg.horizon(c, ud.lambda_u, decay)

    out = _run(kern, p, c, y0, 0.0, horizon, cfg.rel_tol, cfg.abs_tol, cfg.conv_radius, cfg, rho)
    traj = _trajectory(out)
    _raise_on_failure(out, traj)
    kind, label = _classify(out[4], out[5])
    xi_conv = out[6] if kind == CONVERGED else None
    flagged = False
    if kind == CONVERGED and cfg.tail and out[6] < horizon:
        tail = _run(kern, p, c, traj.states[-1], out[6], horizon + cfg.tail_window(decay),
                    cfg.rel_tol, cfg.tail_abs_tol,
                    cfg.tail_radius, cfg, rho, tail=True)
        ttraj = _trajectory(tail, drop_first=True)
        _raise_on_failure(tail, _join(traj, ttraj))
        traj = _join(traj, ttraj)
        tkind, tlabel = _classify(tail[4], tail[5])
        if tkind in (NEGATIVE, EXITED):
            kind, label = tkind, tlabel
        elif tkind == STALLED:
            flagged = True
        out = tail
    return OrbitOutcome(kind, traj, float(c), p, float(out[6]),
                        face=label if kind == EXITED else None,
                        component=label if kind == NEGATIVE else None,
                        xi_converged=xi_conv, flagged=flagged, config=cfg)


def shoot_fkpp(mu: float, c: float, cfg: ShootConfig | None = None) -> OrbitOutcome:
    """Shoot the planar Fisher-KPP wave system U' = -cU + W, W' = mu U (U - 1).

    This is the chi = 0 reduction of the (U, W) part of the wave system and
    serves as an independent reference built on the generic integrator.
    """
    cfg = cfg or ShootConfig()
    jac = np.array([[-c, 1.0], [mu, 0.0]])
    w, vecs = np.linalg.eig(jac)
    k = int(np.argmax(w.real))
    d = np.real(vecs[:, k])
    d /= np.linalg.norm(d)
    if d[0] > 0:
        d = -d
    y0 = np.array([1.0, c]) + cfg.eps * d

    def rhs(t, s):
        return np.array([-c * s[0] + s[1], mu * s[0] * (s[0] - 1.0)])

    def scale(s):
        return min(1.0, max(abs(s[0]), abs(s[1])))

    def events(radius):
        return [
            EventSpec(lambda t, s: max(abs(s[0]), abs(s[1])) - radius, "down", True),
            EventSpec(lambda t, s: s[0] + cfg.exit_tol * scale(s), "down", True),
            EventSpec(lambda t, s: s[1] + cfg.exit_tol * scale(s), "down", True),
        ]

    horizon = cfg.horizon(c)
    icfg = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, max_steps=cfg.max_steps)
    traj = integrate(rhs, y0, (0.0, horizon), icfg, events(cfg.conv_radius))
    term = traj.termination
    if term.kind != "Event":
        return OrbitOutcome(STALLED, traj, c, ModelParams(mu, 1.0, 0.0), term.xi, config=cfg)
    if term.index != 0:
        comp = "U" if term.index == 1 else "W"
        return OrbitOutcome(NEGATIVE, traj, c, ModelParams(mu, 1.0, 0.0), term.xi,
                            component=comp, config=cfg)
    return OrbitOutcome(CONVERGED, traj, c, ModelParams(mu, 1.0, 0.0), term.xi,
                        xi_converged=term.xi, config=cfg)


# ---------------------------------------------------------------------------
# minimum speed by bisection
# ---------------------------------------------------------------------------

@dataclass
class MinSpeedSearch:
    c_star: float
    bracket: tuple
    history: list  # (c, outcome kind, flagged) in evaluation order

    def outcome_counts(self):
        counts = {k: 0 for k in OUTCOME_KINDS}
        for _, kind, _ in self.history:
            counts[kind] += 1
        return counts


def search_min_speed(p: ModelParams, bracket: Sequence[float], tol: float = 1e-3,
                     cfg: ShootConfig | None = None) -> MinSpeedSearch:
    """Bisect on "the shot converges to the origin" down to a bracket of width ``tol``."""
    cfg = cfg or ShootConfig()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 < lo < hi) or not tol > 0:
        raise BracketInvalid(f"need 0 < c_lo < c_hi and tol > 0, got [{lo}, {hi}], tol={tol}")
    history = []

    def converges(c):
        o = shoot(p, c, cfg)
        history.append((c, o.kind, o.flagged))
        return o.converged

    if converges(lo):
        raise BracketInvalid(f"the shot at c_lo={lo:g} already converges")
    if not converges(hi):
        raise BracketInvalid(f"the shot at c_hi={hi:g} does not converge")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if converges(mid):
            hi = mid
        else:
            lo = mid
    return MinSpeedSearch(0.5 * (lo + hi), (lo, hi), history)


def find_min_speed_empirical(p: ModelParams, bracket: Sequence[float], tol: float = 1e-3,
                             cfg: ShootConfig | None = None) -> float:
    return search_min_speed(p, bracket, tol, cfg).c_star


def wave_existence_table(p: ModelParams, speeds: Sequence[float],
                         cfg: ShootConfig | None = None):
    """One row per speed, ordered by speed: ``(c, outcome kind or None, error or None)``."""
    rows = []
    for c in sorted(float(s) for s in speeds):
        try:
            rows.append((c, shoot(p, c, cfg).kind, None))
        except Exception as exc:  # recorded per row
            rows.append((c, None, f"{type(exc).__name__}: {exc}"))
    return rows


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass
class TravelingWaveProfile:
    xi: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Y: np.ndarray | None
    W: np.ndarray
    speed: float
    params: ModelParams
    shift: float  # original xi of the U = 1/2 crossing
    violations: dict
    trajectory: Trajectory = field(repr=False, default=None)
    config: ShootConfig = field(repr=False, default_factory=ShootConfig)

    def at(self, xi):
        """Dense-output state at normalized ``xi`` (inside the sampled span)."""
        return self.trajectory.sol(np.asarray(xi, dtype=float) + self.shift)

    @property
    def ok(self):
        return all(v == 0 for k, v in self.violations.items() if k.endswith("_violations"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["xi", "U", "V", "Y", "W"])
        for i in range(self.xi.size):
            y = "" if self.Y is None else repr(float(self.Y[i]))
            wr.writerow([repr(float(self.xi[i])), repr(float(self.U[i])), repr(float(self.V[i])),
                         y, repr(float(self.W[i]))])
        return buf.getvalue()

    def metadata(self):
        return {"params": self.params.to_dict(), "speed": self.speed,
                "normalization_shift": self.shift, "points": int(self.xi.size),
                "tolerances": self.config.to_dict(), "violations": self.violations}

    def to_json(self) -> str:
        return json.dumps(self.metadata(), sort_keys=True, indent=2)


def _half_crossing(traj, t_lo, t_hi):
    """xi where U = 1/2 between two samples bracketing the crossing."""
    lo, hi = t_lo, t_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if traj.sol(mid)[0] > 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def extract_profile(outcome: OrbitOutcome, beta: float | None = None,
                    n_points: int = PROFILE_POINTS) -> TravelingWaveProfile:
    """Resample a converged orbit on a uniform grid normalized so that U(0) = 1/2.

    The grid runs from the start of the shot to the first entry into the
    convergence ball.  The U = 1/2 crossing is located on the dense output.
    """
    if outcome.kind != CONVERGED:
        raise NotConverged(f"cannot extract a profile from a {outcome.kind} outcome")
    p = outcome.params
    beta = p.beta if beta is None else beta
    traj = outcome.trajectory
    xi0, xi1 = float(traj.times[0]), float(outcome.xi_converged)
    grid = np.linspace(xi0, xi1, n_points)
    states = traj.sol(grid)
    u = states[:, 0]
    below = np.nonzero(u <= 0.5)[0]
    if below.size == 0 or below[0] == 0:
        raise NormalizationFailed("U never crosses 1/2")
    i = int(below[0])
    shift = _half_crossing(traj, grid[i - 1], grid[i])
    dim = states.shape[1]
    v = states[:, 1]
    y = states[:, 2] if dim == 4 else None
    w = states[:, -1]
    t = beta * v
    viol = {
        "ordering_violations": int(np.sum((u < -ORDERING_TOL) | (u - t > ORDERING_TOL)
                                          | (t - 1.0 > ORDERING_TOL))),
        "monotonicity_violations": int(np.sum(np.diff(u) > MONOTONICITY_TOL)
                                       + np.sum(np.diff(v) > MONOTONICITY_TOL)),
        "left_tail_error": float(max(abs(u[0] - 1.0), abs(t[0] - 1.0))),
        "right_tail_error": float(max(abs(u[-1]), abs(v[-1]))),
    }
    viol["tail_violations"] = int(viol["left_tail_error"] > PROFILE_TAIL_TOL
                                  or viol["right_tail_error"] > PROFILE_TAIL_TOL)
    return TravelingWaveProfile(grid - shift, u, v, y, w, outcome.c, p, float(shift), viol,
                                trajectory=traj, config=outcome.config)


def profile_distance(a: TravelingWaveProfile, b: TravelingWaveProfile,
                     components=(0, 1), n: int = 4001) -> float:
    """Sup-norm gap between two normalized profiles over their common span."""
    lo = max(a.xi[0], b.xi[0])
    hi = min(a.xi[-1], b.xi[-1])
    xs = np.linspace(lo, hi, n)
    sa, sb = a.at(xs), b.at(xs)
    return float(max(np.max(np.abs(sa[:, i] - sb[:, i])) for i in components))


def richardson_check(p: ModelParams, c: float, cfg: ShootConfig | None = None):
    """Re-shoot with half the manifold offset; returns ``(gap, passed)``."""
    cfg = cfg or ShootConfig()
    a = extract_profile(shoot(p, c, cfg))
    b = extract_profile(shoot(p, c, replace(cfg, eps=0.5 * cfg.eps)))
    gap = profile_distance(a, b)
    return gap, gap <= RICHARDSON_TOL


def orbit_region_violation(outcome: OrbitOutcome) -> float:
    """Largest violation of 0 <= U <= beta V <= 1, 0 <= W <= c U over accepted steps."""
    p, c = outcome.params, outcome.c
    s = outcome.trajectory.states
    u, v, w = s[:, 0], s[:, 1], s[:, -1]
    t = p.beta * v
    worst = np.max(np.stack([-u, u - t, t - 1.0, -w, w - c * u]), axis=0)
    return float(max(0.0, worst.max()))


def final_state_inside(outcome: OrbitOutcome) -> bool:
    region = region_for(outcome.params, outcome.c)
    return contains(region, outcome.trajectory.states[-1], tol=1e-12).inside
