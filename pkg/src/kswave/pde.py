"""Method-of-lines simulation of the Keller-Segel system on a bounded interval.

Cell-centred grid, zero-flux (mirror) boundaries, central diffusion, an
upwinded conservative chemotaxis flux, and Heun (explicit trapezoidal) time
stepping.  Negative values are never clipped; the monitors record them.
A co-moving frame ``xi = x - c t`` adds ``+c d/dxi`` with an upwind stencil.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import (ConfigError, GridTooCoarse, InsufficientSamples, NoCrossing,
                     NonFiniteState)
from .model import ModelParams, validate_params

DIFFUSIVE_SAFETY = 0.4
CFL_SAFETY = 0.8
TRIM = 5
MIN_RESIDUAL_POINTS = 64
MIN_SPEED_SAMPLES = 10


@dataclass(frozen=True)
class Grid1D:
    length: float
    n: int

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigError("grid length must be positive and finite")
        if int(self.n) != self.n or self.n < 16:
            raise ConfigError("grid needs n >= 16 cells")

    @property
    def dx(self):
        return self.length / self.n

    @property
    def x(self):
        """Cell centres."""
        return (np.arange(self.n) + 0.5) * self.dx

    def to_dict(self):
        return {"L": self.length, "n": self.n, "dx": self.dx}


@dataclass
class FieldPair:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float)
        self.v = np.array(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ConfigError("u and v must be 1D arrays of equal length")

    def copy(self):
        return FieldPair(self.u.copy(), self.v.copy())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


@dataclass(frozen=True)
class SimConfig:
    """Time stepping and recording options.

    ``dt=None`` picks :func:`stable_dt`, then shrinks the step so that
    ``t_end`` is hit exactly.
    """

    dt: float | None = None
    snapshot_every: float | None = None  # None: initial and final only
    front_every: float = 0.1
    front_level: float = 0.5
    frame_c: float = 0.0
    adv_order: int = 2
    reaction: bool = True
    chemotaxis: bool = True
    backend: str | None = None

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.pop("backend")
        return d


@dataclass
class SpaceTimeSolution:
    grid: Grid1D
    params: ModelParams
    dt: float
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    front_series: list = field(default_factory=list)
    monitors: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    @property
    def final(self):
        return self.snapshots[-1]

    def monitor_summary(self):
        m = self.monitors
        if m.shape[0] == 0:
            return {}
        return {"min_u": float(m[:, 0].min()), "min_v": float(m[:, 1].min()),
                "max_u_minus_beta_v": float(m[:, 2].max()), "max_u": float(m[:, 3].max())}

    def manifest(self, cfg: SimConfig | None = None):
        return {
            "params": self.params.to_dict(), "grid": self.grid.to_dict(), "dt": self.dt,
            "dt_policy": {"diffusive_safety": DIFFUSIVE_SAFETY, "cfl_safety": CFL_SAFETY},
            "config": cfg.to_dict() if cfg is not None else None,
            "times": list(self.times), "front_series": [list(r) for r in self.front_series],
            "monitors": self.monitor_summary(),
        }

    def snapshot_csv(self, k: int) -> str:
        f = self.snapshots[k]
        lines = ["x,u,v"]
        lines += [f"{x!r},{a!r},{b!r}" for x, a, b in
                  zip(self.grid.x.tolist(), f.u.tolist(), f.v.tolist())]
        return "\n".join(lines) + "\n"


def _chi_args(p):
    kind, a, b, tv, tf = p.chi.kernel_spec()
    return (kind, a, b, np.ascontiguousarray(tv, dtype=float), np.ascontiguousarray(tf, dtype=float))


def pde_rhs(f: FieldPair, p: ModelParams, g: Grid1D, frame_c: float = 0.0, adv_order: int = 2,
            reaction: bool = True, chemotaxis: bool = True, backend: str | None = None) -> FieldPair:
    """Semi-discrete time derivative of ``(u, v)``."""
    if f.u.size != g.n:
        raise ConfigError(f"field has {f.u.size} cells, grid has {g.n}")
    kern = _kernels.get(backend)
    du, dv = kern.pde_rhs(np.ascontiguousarray(f.u), np.ascontiguousarray(f.v), p.mu, p.beta,
                          p.diff, *_chi_args(p), g.dx, frame_c, adv_order, int(reaction),
                          int(chemotaxis))
    return FieldPair(np.asarray(du), np.asarray(dv))


def stable_dt(p: ModelParams, g: Grid1D, frame_c: float = 0.0) -> float:
    """Largest Heun step kept inside the stability region.

    In a moving frame the upwind stencil's damping adds to the diffusive
    eigenvalue, hence the ``c dx`` term next to ``max(1, D)``.
    """
    a = abs(frame_c)
    dt = DIFFUSIVE_SAFETY * g.dx ** 2 / (max(1.0, p.diff) + a * g.dx)
    if a > 0.0:
        dt = min(dt, CFL_SAFETY * g.dx / a)
    return dt


def simulate(p: ModelParams, g: Grid1D, init: FieldPair, t_end: float,
             cfg: SimConfig | None = None) -> SpaceTimeSolution:
    """Integrate from ``init`` to ``t_end``, recording snapshots, fronts and monitors."""
    cfg = cfg or SimConfig()
    validate_params(p)
    if init.u.size != g.n:
        raise ConfigError(f"initial data has {init.u.size} cells, grid has {g.n}")
    if not init.is_finite():
        raise ConfigError("initial data must be finite")
    if not t_end >= 0:
        raise ConfigError("t_end must be nonnegative")
    dt_max = cfg.dt if cfg.dt is not None else stable_dt(p, g, cfg.frame_c)
    nsteps = max(1, int(math.ceil(t_end / dt_max - 1e-12))) if t_end > 0 else 0
    dt = t_end / nsteps if nsteps else dt_max
    kern = _kernels.get(cfg.backend)
    chi = _chi_args(p)

    # fronts on a fixed stride, snapshots at the steps nearest to multiples of snapshot_every
    front_stride = max(1, int(round(cfg.front_every / dt)))
    snap_steps = {nsteps}
    if cfg.snapshot_every:
        k = 1
        while k * cfg.snapshot_every < t_end * (1 + 1e-12):
            snap_steps.add(max(1, min(nsteps, int(round(k * cfg.snapshot_every / dt)))))
            k += 1
    snap_queue = sorted(snap_steps)

    u = np.ascontiguousarray(init.u.copy())
    v = np.ascontiguousarray(init.v.copy())
    sol = SpaceTimeSolution(g, p, dt)
    monitors = np.zeros((nsteps, 4))
    sol.times.append(0.0)
    sol.snapshots.append(FieldPair(u.copy(), v.copy()))
    _record_front(sol, 0.0, u, g, cfg.front_level)

    done = 0
    while done < nsteps:
        while snap_queue and snap_queue[0] <= done:
            snap_queue.pop(0)
        nxt = min(nsteps, (done // front_stride + 1) * front_stride, *snap_queue[:1])
        chunk = nxt - done
        got = kern.heun_steps(u, v, chunk, dt, p.mu, p.beta, p.diff, *chi, g.dx, cfg.frame_c,
                              cfg.adv_order, int(cfg.reaction), int(cfg.chemotaxis),
                              monitors[done:nxt])
        if got < chunk:
            t_bad = (done + got + 1) * dt
            sol.monitors = monitors[:done + got]
            raise NonFiniteState(f"non-finite field at t={t_bad:.6g}", sol,
                                 sol.snapshots[-1], t_bad)
        done = nxt
        t = done * dt
        if done % front_stride == 0 or done == nsteps:
            _record_front(sol, t, u, g, cfg.front_level)
        if done in snap_steps:
            if sol.times[-1] != t:
                sol.times.append(t)
                sol.snapshots.append(FieldPair(u.copy(), v.copy()))
    sol.monitors = monitors
    return sol


def _record_front(sol, t, u, g, level):
    try:
        x = front_position(FieldPair(u, u), g, level)
    except NoCrossing:
        return
    if not sol.front_series or sol.front_series[-1][0] != t:
        sol.front_series.append((t, x))


def front_position(f: FieldPair, g: Grid1D, level: float = 0.5) -> float:
    """Rightmost crossing of ``u = level``, linearly interpolated between cell centres."""
    d = f.u - level
    hit = np.nonzero((d[:-1] >= 0) & (d[1:] < 0) | (d[:-1] < 0) & (d[1:] >= 0))[0]
    if hit.size == 0:
        raise NoCrossing(f"u never crosses {level:g}")
    i = int(hit[-1])
    x = g.x
    return float(x[i] + (level - f.u[i]) / (f.u[i + 1] - f.u[i]) * g.dx)


def estimate_speed(front_series, window) -> tuple:
    """Least-squares slope of front position against time, with its standard error."""
    arr = np.asarray(front_series, dtype=float).reshape(-1, 2)
    ta, tb = window
    sel = arr[(arr[:, 0] >= ta) & (arr[:, 0] <= tb)]
    if sel.shape[0] < MIN_SPEED_SAMPLES:
        raise InsufficientSamples(f"{sel.shape[0]} samples in [{ta}, {tb}], need {MIN_SPEED_SAMPLES}")
    t, x = sel[:, 0], sel[:, 1]
    tm = t - t.mean()
    sxx = float(np.dot(tm, tm))
    slope = float(np.dot(tm, x - x.mean()) / sxx)
    resid = x - x.mean() - slope * tm
    stderr = math.sqrt(float(np.dot(resid, resid)) / (t.size - 2) / sxx)
    return slope, stderr


# ---------------------------------------------------------------------------
# traveling profiles on the grid
# ---------------------------------------------------------------------------

def _d1(f, h):
    out = np.full_like(f, np.nan)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    return out


def _d2(f, h):
    out = np.full_like(f, np.nan)
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    return out


def comoving_residuals(profile, p: ModelParams):
    """Pointwise residuals of the two steady wave equations on the profile grid.

    ``U'' + cU' - (U chi(V) V')' + mu U (1 - U)`` and
    ``D V'' + cV' + beta V - U``, with 4th-order differences and the
    chemotaxis term expanded by the product rule.  The first and last
    ``TRIM`` points are dropped.
    """
    xi = np.asarray(profile.xi, dtype=float)
    if xi.size < MIN_RESIDUAL_POINTS:
        raise GridTooCoarse(f"{xi.size} points, need at least {MIN_RESIDUAL_POINTS}")
    h = (xi[-1] - xi[0]) / (xi.size - 1)
    if not np.allclose(np.diff(xi), h, rtol=1e-9, atol=0.0):
        raise ConfigError("profile grid must be uniform")
    c = profile.speed
    u = np.asarray(profile.U, dtype=float)
    v = np.asarray(profile.V, dtype=float)
    u1, u2, v1, v2 = _d1(u, h), _d2(u, h), _d1(v, h), _d2(v, h)
    chi = p.chi_at(v)
    dchi = p.chi.derivative(np.clip(v, 0.0, p.v_max))
    taxis = u1 * chi * v1 + u * dchi * v1 * v1 + u * chi * v2
    r1 = u2 + c * u1 - taxis + p.mu * u * (1.0 - u)
    r2 = p.diff * v2 + c * v1 + p.beta * v - u
    sl = slice(TRIM, xi.size - TRIM)
    return r1[sl], r2[sl]


def comoving_residual(profile, p: ModelParams) -> float:
    r1, r2 = comoving_residuals(profile, p)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


@dataclass
class ConstantProfile:
    """Flat profile on a uniform grid; the homogeneous states are exact waves."""

    xi: np.ndarray
    U: np.ndarray
    V: np.ndarray
    speed: float


def constant_profile(u0: float, v0: float, c: float = 1.0, n: int = 2048, span=(-50.0, 50.0)):
    xi = np.linspace(span[0], span[1], n)
    return ConstantProfile(xi, np.full(n, float(u0)), np.full(n, float(v0)), float(c))


def sample_profile(profile, g: Grid1D, x0: float) -> FieldPair:
    """Place a normalized profile on the grid with its U = 1/2 point at ``x0``.

    Outside the computed span the profile continues with its end states.
    """
    xi = g.x - x0
    inside = (xi >= profile.xi[0]) & (xi <= profile.xi[-1])
    u = np.where(xi < profile.xi[0], profile.U[0], 0.0)
    v = np.where(xi < profile.xi[0], profile.V[0], 0.0)
    if np.any(inside):
        s = profile.at(xi[inside])
        u[inside] = s[:, 0]
        v[inside] = s[:, 1]
    right = xi > profile.xi[-1]
    u[right] = profile.U[-1]
    v[right] = profile.V[-1]
    return FieldPair(u, v)


def step_initial(g: Grid1D, p: ModelParams, x_step: float) -> FieldPair:
    """u = 1 left of ``x_step`` and 0 right of it, with beta v = u."""
    u = np.where(g.x < x_step, 1.0, 0.0)
    return FieldPair(u, u / p.beta)


def bump_initial(g: Grid1D, p: ModelParams, centre: float, width: float) -> FieldPair:
    """Smooth compactly supported bump (cos^2) of height 1, with beta v = u."""
    r = np.abs(g.x - centre) / width
    u = np.where(r < 1.0, np.cos(0.5 * np.pi * np.minimum(r, 1.0)) ** 2, 0.0)
    return FieldPair(u, u / p.beta)


def comoving_drift(p: ModelParams, profile, g: Grid1D, x0: float, t_end: float,
                   cfg: SimConfig | None = None):
    """Sup-norm change of a seeded profile after ``t_end`` in its own moving frame.

    Returns ``(drift_u, drift_v, solution)``.
    """
    cfg = cfg or SimConfig()
    if cfg.frame_c != profile.speed:
        cfg = replace(cfg, frame_c=profile.speed)
    init = sample_profile(profile, g, x0)
    sol = simulate(p, g, init, t_end, cfg)
    f = sol.final
    return float(np.max(np.abs(f.u - init.u))), float(np.max(np.abs(f.v - init.v))), sol


def write_manifest_json(sol: SpaceTimeSolution, cfg: SimConfig | None = None) -> str:
    return json.dumps(sol.manifest(cfg), sort_keys=True, indent=2)
