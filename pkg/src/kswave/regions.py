"""Trap regions of the wave systems and grid certification of their faces.

For ``D == 0`` the region is::

    R3 = {0 <= U <= beta V <= 1, 0 <= W <= c U}

and for ``D > 0`` it gains the slab ``rho (U - beta V) <= Y <= 0``.  Faces
are sampled in unit coordinates (``t = beta V`` as a fraction of ``[U, 1]``,
``W / (c U)``, ``Y / (rho (U - t))``) so that no division by ``U`` or
``U - t`` ever occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, InvalidFace, PointOutsideRegion
from .model import ModelParams
from .spectra import rho_or_none

NONNEG_TOL = 1e-12

FACES_3D = ("U0", "Vtop", "UeqBetaV", "WeqCU", "W0")
FACES_4D = FACES_3D + ("Y0", "Yslant")


@dataclass(frozen=True)
class TrapRegion:
    kind: str  # "R3" or "S4"
    c: float
    beta: float
    rho: float | None = None

    @property
    def dim(self):
        return 3 if self.kind == "R3" else 4

    @property
    def faces(self):
        return FACES_3D if self.kind == "R3" else FACES_4D


@dataclass(frozen=True)
class Membership:
    inside: bool
    slacks: dict

    def __bool__(self):
        return self.inside


@dataclass(frozen=True)
class FluxReport:
    face: str
    samples: int
    worst_margin: float
    worst_point: tuple

    @property
    def ok(self):
        return self.worst_margin >= -NONNEG_TOL

    def to_dict(self):
        return {"face": self.face, "samples": self.samples, "worst_margin": self.worst_margin,
                "worst_point": list(self.worst_point)}


@dataclass(frozen=True)
class SurfaceCheck:
    holds: bool
    worst_value: float
    worst_point: tuple
    eta: float
    condition2: bool
    condition3: bool
    samples: int

    def to_dict(self):
        return {"holds": self.holds, "worst_value": self.worst_value,
                "worst_point": list(self.worst_point), "eta": self.eta,
                "condition2": self.condition2, "condition3": self.condition3,
                "samples": self.samples}


def region_for(p: ModelParams, c: float) -> TrapRegion:
    """Trap region at speed ``c``.  Below 2 sqrt(D beta) the slanted face is dropped."""
    if p.diff == 0:
        return TrapRegion("R3", c, p.beta)
    return TrapRegion("S4", c, p.beta, rho_or_none(p, c))


def slacks(region: TrapRegion, s) -> dict:
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != region.dim:
        raise DimensionMismatch(f"{region.kind} expects {region.dim} components, got {s.shape[-1]}")
    u, v = s[..., 0], s[..., 1]
    w = s[..., -1]
    t = region.beta * v
    out = {
        "U0": u,
        "UeqBetaV": t - u,
        "Vtop": 1.0 - t,
        "W0": w,
        "WeqCU": region.c * u - w,
    }
    if region.kind == "S4":
        y = s[..., 2]
        out["Y0"] = -y
        if region.rho is not None:
            out["Yslant"] = y - region.rho * (u - t)
    return out


def contains(region: TrapRegion, s, tol: float = NONNEG_TOL, strict: bool = False) -> Membership:
    """Membership test returning per-inequality slacks (nonnegative inside)."""
    sl = slacks(region, s)
    if strict:
        inside = all(bool(np.all(x > tol)) for x in sl.values())
    else:
        inside = all(bool(np.all(x >= -tol)) for x in sl.values())
    return Membership(inside, {k: float(v) if np.ndim(v) == 0 else v for k, v in sl.items()})


# ---------------------------------------------------------------------------
# vectorized vector fields
# ---------------------------------------------------------------------------

def field_3d(p: ModelParams, c: float):
    def f(u, v, w):
        gap = u - p.beta * v
        return (-c * u + u * p.chi_at(v) * gap / c + w, gap / c, p.mu * u * (u - 1.0))
    return f


def field_4d(p: ModelParams, c: float):
    d = p.diff

    def f(u, v, y, w):
        return (-c * u + u * p.chi_at(v) * y + w, y,
                -c * y / d + (u - p.beta * v) / d, p.mu * u * (u - 1.0))
    return f


def _axis(k):
    return np.linspace(0.0, 1.0, k)


def _free_dims(region, face):
    if region.kind == "R3":
        return 2
    # on U = beta V the slab pins Y to 0
    return 2 if face == "UeqBetaV" else 3


def _check_face(region, face):
    if face not in region.faces:
        raise InvalidFace(f"face {face!r} is not a face of {region.kind}")
    if face == "Yslant" and region.rho is None:
        raise InvalidFace("Yslant needs c >= 2 sqrt(D beta)")


def face_map(region: TrapRegion, face: str, a, b, r=None):
    """Map unit face coordinates (a, b[, r]) in [0, 1] to states on ``face``."""
    c, beta = region.c, region.beta
    four = region.kind == "S4"
    rho = region.rho if region.rho is not None else 0.0
    if face == "U0":
        u, t = np.zeros_like(a), a
        w = b * c  # W >= 0 is all this face's flux needs
    elif face == "Vtop":
        u, t = a, np.ones_like(a)
        w = b * c * u
    elif face == "UeqBetaV":
        u = a
        t = u.copy()
        w = b * c * u
    elif face == "WeqCU":
        u = a
        t = u + b * (1.0 - u)
        w = c * u
    elif face == "W0":
        u = a
        t = u + b * (1.0 - u)
        w = np.zeros_like(a)
    else:  # Y0, Yslant: third coordinate positions W
        u = a
        t = u + b * (1.0 - u)
        w = r * c * u
    v = t / beta
    if not four:
        return u, v, w
    if face in ("UeqBetaV", "Y0"):
        y = np.zeros_like(u)
    elif face == "Yslant":
        y = rho * (u - t)
    else:
        y = r * rho * (u - t)
    return u, v, y, w


def _param_grid(free, k, lo=None, hi=None):
    lo = np.zeros(free) if lo is None else lo
    hi = np.ones(free) if hi is None else hi
    axes = [np.linspace(lo[i], hi[i], k) for i in range(free)]
    g = np.meshgrid(*axes, indexing="ij")
    return [x.ravel() for x in g] + [None] * (3 - free)


def face_points(region: TrapRegion, face: str, n_samples: int):
    """Sample ``face`` on a uniform product grid of at least ``n_samples`` points."""
    _check_face(region, face)
    free = _free_dims(region, face)
    k = max(2, int(math.ceil(n_samples ** (1.0 / free) - 1e-9)))
    a, b, r = _param_grid(free, k)
    return face_map(region, face, a, b, r), (a, b, r), k


def inward_flux(region: TrapRegion, face: str, pts, rates):
    c, beta = region.c, region.beta
    du, dv = rates[0], rates[1]
    dw = rates[-1]
    if face == "U0":
        return du
    if face == "Vtop":
        return -dv
    if face == "UeqBetaV":
        return -(du - beta * dv)
    if face == "WeqCU":
        return -(dw - c * du)
    if face == "W0":
        return dw
    dy = rates[2]
    if face == "Y0":
        return -dy
    if face == "Yslant":
        return dy - region.rho * (du - beta * dv)
    raise InvalidFace(face)


def face_flux_check(p: ModelParams, c: float, face: str, n_samples: int = 10_000,
                    field: Callable | None = None, refine: bool = True) -> FluxReport:
    """Minimum inward flux across ``face`` over a sampled grid.

    ``field`` overrides the model vector field (vectorized, taking the state
    components and returning their rates); used to check the certifier
    against a field with a known leak.
    """
    region = region_for(p, c)
    pts, params, k = face_points(region, face, n_samples)
    f = field or (field_3d(p, c) if region.kind == "R3" else field_4d(p, c))
    flux = inward_flux(region, face, pts, f(*pts))
    i = int(np.argmin(flux))
    worst = float(flux[i])
    point = tuple(float(x[i]) for x in pts)
    if refine:
        # one pass of local resampling around the worst grid cell
        free = _free_dims(region, face)
        centre = np.array([params[j][i] for j in range(free)])
        h = 1.0 / (k - 1)
        lo, hi = np.clip(centre - h, 0, 1), np.clip(centre + h, 0, 1)
        a, b, r = _param_grid(free, 11, lo, hi)
        sub = face_map(region, face, a, b, r)
        fl = inward_flux(region, face, sub, f(*sub))
        j = int(np.argmin(fl))
        if fl[j] < worst:
            worst, point = float(fl[j]), tuple(float(x[j]) for x in sub)
    return FluxReport(face, int(flux.size), worst, point)


def face_flux_report(p: ModelParams, c: float, n_samples: int = 10_000):
    region = region_for(p, c)
    faces = [f for f in region.faces if not (f == "Yslant" and region.rho is None)]
    return [face_flux_check(p, c, face, n_samples) for face in faces]


# ---------------------------------------------------------------------------
# lower surface W = eta U
# ---------------------------------------------------------------------------

def _region_grid(p, c, density, y_density):
    ax = _axis(density)
    a, b = np.meshgrid(ax, ax, indexing="ij")
    u = a.ravel()
    t = u + b.ravel() * (1.0 - u)
    if p.diff == 0:
        return u, t / p.beta, None
    r_ = rho_or_none(p, c)
    if r_ is None:
        raise PointOutsideRegion("the D > 0 surface check needs c >= 2 sqrt(D beta)")
    ry = _axis(y_density)
    u3 = np.repeat(u, ry.size)
    t3 = np.repeat(t, ry.size)
    y3 = np.tile(ry, u.size) * r_ * (u3 - t3)
    return u3, t3 / p.beta, y3


def surface_values(p: ModelParams, c: float, eta: float, u, v, y=None):
    if y is None:
        b = (u - p.beta * v) * p.chi_at(v) / c - c
    else:
        b = p.chi_at(v) * y - c
    return eta * eta + b * eta + p.mu * (1.0 - u)


def verify_surface(p: ModelParams, c: float, eta, grid_density: int = 200, y_density: int = 50):
    """Check that W = eta U cannot be crossed downward inside the region.

    The crossing condition is the quadratic inequality
    ``eta^2 + b(U, V[, Y]) eta + mu (1 - U) <= 0`` at every region point.
    """
    eta = float(getattr(eta, "eta", eta))
    u, v, y = _region_grid(p, c, grid_density, y_density)
    vals = surface_values(p, c, eta, u, v, y)
    i = int(np.argmax(vals))
    worst = float(vals[i])
    point = (float(u[i]), float(v[i])) + ((float(y[i]),) if y is not None else ())
    cond2 = 0.0 <= eta <= c
    return SurfaceCheck(worst <= NONNEG_TOL and cond2, worst, point, eta, cond2, True, int(vals.size))


def discriminant_margin(point, p: ModelParams, c: float) -> float:
    u, v = float(point[0]), float(point[1])
    t = p.beta * v
    if not (-NONNEG_TOL <= u <= t + NONNEG_TOL and t <= 1 + NONNEG_TOL):
        raise PointOutsideRegion(f"need 0 <= U <= beta V <= 1, got U={u}, beta V={t}")
    return ((u - t) * p.chi_at(v) / c - c) ** 2 - 4.0 * p.mu * (1.0 - u)


def min_discriminant_margin(p: ModelParams, c: float, density: int = 200):
    """Smallest discriminant over a density x density grid of 0 <= U <= beta V <= 1."""
    ax = _axis(density)
    a, b = np.meshgrid(ax, ax, indexing="ij")
    u = a.ravel()
    v = (u + b.ravel() * (1.0 - u)) / p.beta
    vals = ((u - p.beta * v) * p.chi_at(v) / c - c) ** 2 - 4.0 * p.mu * (1.0 - u)
    i = int(np.argmin(vals))
    return float(vals[i]), (float(u[i]), float(v[i]))
