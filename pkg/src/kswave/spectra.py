"""Linear analysis of the wave systems and the exact minimum speed.

Eigenvalues always come from the assembled Jacobian via a dense eigensolver;
the closed-form quadratic roots live in the tests as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, InteriorStepFailed, MultipleUnstableEigenvalues,
                     NegativeDiscriminant, NoUnstableEigenvalue, PointOutsideRegion,
                     ZeroDiffusion)
from .model import ModelParams, equilibria, jacobian

REAL_TOL = 1e-10
# A defective double root comes back from LAPACK as a conjugate pair split by
# ~sqrt(eps).  Pairs this close to the real axis are treated as real.
DEFECTIVE_SNAP = 1e-7
TIE_RTOL = 1e-12
INTERIOR_EPS = 1e-6

ALL_REAL_NEGATIVE = "AllRealNegative"
COMPLEX_PRESENT = "ComplexPresent"


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple
    classification: str
    dimension: int

    def to_dict(self):
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "classification": self.classification,
            "dimension": self.dimension,
        }


@dataclass(frozen=True)
class MinSpeedResult:
    c_star: float
    binding: str  # Logistic | Chemical | Tie

    def to_dict(self):
        return {"c_star": self.c_star, "binding": self.binding}


@dataclass(frozen=True)
class UnstableDirection:
    lambda_u: float
    direction: np.ndarray
    below_min_speed: bool = False


@dataclass(frozen=True)
class SurfaceParam:
    eta: float


@dataclass(frozen=True)
class EtaInterval:
    """Closed root interval of the eta-quadratic, clipped to eta > 0."""

    lower: float
    upper: float
    eta_crit: float
    lower_open: bool = False

    def __contains__(self, eta):
        if self.lower_open:
            return self.lower < eta <= self.upper
        return self.lower <= eta <= self.upper


def _sorted(eigs):
    return tuple(sorted((complex(z) for z in eigs), key=lambda z: (z.real, z.imag)))


def snap_real(eigs):
    out = []
    for z in eigs:
        if z.imag != 0.0 and abs(z.imag) <= DEFECTIVE_SNAP * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(z)
    return out


def classify(eigs):
    if all(abs(z.imag) <= REAL_TOL and z.real < 0 for z in eigs):
        return ALL_REAL_NEGATIVE
    return COMPLEX_PRESENT


def min_wave_speed(p: ModelParams) -> MinSpeedResult:
    logistic = math.sqrt(p.mu)
    if p.diff == 0:
        return MinSpeedResult(2.0 * logistic, "Logistic")
    chemical = math.sqrt(p.diff * p.beta)
    big = max(logistic, chemical)
    if abs(logistic - chemical) <= TIE_RTOL * big:
        binding = "Tie"
    else:
        binding = "Logistic" if logistic > chemical else "Chemical"
    return MinSpeedResult(2.0 * big, binding)


def literature_bounds(p: ModelParams, n_samples: int = 1001):
    """Earlier (non-sharp) bounds on the minimum speed, valid for D = 0."""
    if p.diff != 0:
        raise ConfigError("literature bounds are stated for D = 0 only")
    lower = 2.0 * math.sqrt(p.mu)
    v = np.concatenate([np.linspace(0.0, p.v_max, n_samples),
                        np.asarray(p.chi.critical_points(p.v_max), dtype=float)])
    chem = np.sqrt(np.maximum(p.beta * p.chi.values(v) / p.mu, 0.0))
    return lower, float(max(lower, chem.max()))


def origin_spectrum(p: ModelParams, c: float) -> SpectrumReport:
    if not c > 0:
        raise ConfigError("c must be positive")
    eq = equilibria(p, c)
    J = jacobian(eq.invaded, p, c)
    # (U, W) rows do not see (V, Y) at the origin, so the spectrum is the union of
    # the two diagonal blocks; solving them apart keeps coincident double roots
    # in different blocks from being split into spurious complex pairs
    uw = [0, p.dim - 1]
    vy = list(range(1, p.dim - 1))
    if np.all(J[np.ix_(uw, vy)] == 0.0):
        eigs = np.concatenate([np.linalg.eigvals(J[np.ix_(uw, uw)]),
                               np.linalg.eigvals(J[np.ix_(vy, vy)])])
    else:
        eigs = np.linalg.eigvals(J)
    eigs = snap_real(eigs)
    return SpectrumReport(_sorted(eigs), classify(eigs), p.dim)


def rho(p: ModelParams, c: float) -> float:
    """Slope of the slanted Y-face, the smaller root of D beta r^2 - c r + 1 = 0."""
    if p.diff == 0:
        raise ZeroDiffusion("rho is only defined for D > 0")
    db = p.diff * p.beta
    disc = c * c - 4.0 * db
    if disc < 0:
        # c computed as 2 sqrt(D beta) can land a few ulps below
        if disc < -1e-14 * c * c:
            raise NegativeDiscriminant(f"c = {c:g} is below 2 sqrt(D beta) = {2 * math.sqrt(db):g}")
        disc = 0.0
    r = 2.0 / (c + math.sqrt(disc))  # = (c - sqrt(disc)) / (2 D beta) without cancellation
    assert r <= 2.0 / c * (1 + 1e-15), "rho <= 2/c must hold for c >= 2 sqrt(D beta)"
    return r


def rho_or_none(p: ModelParams, c: float):
    if p.diff == 0:
        return None
    try:
        return rho(p, c)
    except NegativeDiscriminant:
        return None


def unstable_direction(p: ModelParams, c: float, eps: float = INTERIOR_EPS) -> UnstableDirection:
    """Unit tangent of the 1D unstable manifold of the invading state.

    The sign is fixed so that a step of ``eps`` lands strictly inside the
    trap region.
    """
    from .regions import region_for, contains

    eq = equilibria(p, c)
    base = np.array(eq.invading, dtype=float)
    w, vecs = np.linalg.eig(jacobian(base, p, c))
    unstable = [i for i in range(len(w)) if w[i].real > 0]
    if not unstable:
        raise NoUnstableEigenvalue(f"no eigenvalue with positive real part at c={c:g}")
    if len(unstable) > 1:
        raise MultipleUnstableEigenvalues(f"{len(unstable)} unstable eigenvalues at c={c:g}")
    k = unstable[0]
    if abs(w[k].imag) > REAL_TOL * max(1.0, abs(w[k])):
        raise NoUnstableEigenvalue(f"unstable eigenvalue {w[k]} is not real")
    d = np.real(vecs[:, k])
    d /= np.linalg.norm(d)
    region = region_for(p, c)
    for sign in (1.0, -1.0):
        probe = base + eps * sign * d
        if contains(region, probe, tol=0.0, strict=True).inside:
            below = c < min_wave_speed(p).c_star * (1 - TIE_RTOL)
            return UnstableDirection(float(w[k].real), sign * d, below)
    raise InteriorStepFailed(f"neither orientation of the unstable direction enters the region at c={c:g}")


def eta_quadratic_coeffs(point, p: ModelParams, c: float):
    """(b, k) with the surface condition reading eta^2 + b eta + k <= 0."""
    if p.diff == 0:
        u, v = point[0], point[1]
        b = (u - p.beta * v) * p.chi_at(v) / c - c
    else:
        u, v, y = point[0], point[1], point[2]
        b = p.chi_at(v) * y - c
    return b, p.mu * (1.0 - u)


def surface_value(point, p: ModelParams, c: float, eta: float) -> float:
    b, k = eta_quadratic_coeffs(point, p, c)
    return eta * eta + b * eta + k


def _check_point(point, p, c, tol=1e-12):
    u, v = point[0], point[1]
    t = p.beta * v
    if not (-tol <= u <= t + tol and t <= 1 + tol):
        raise PointOutsideRegion(f"need 0 <= U <= beta V <= 1, got U={u}, beta V={t}")
    if p.diff > 0:
        if len(point) < 3:
            raise PointOutsideRegion("D > 0 needs a (U, V, Y) point")
        r = rho_or_none(p, c)
        lo = r * (u - t) if r is not None else -math.inf
        if not (lo - tol <= point[2] <= tol):
            raise PointOutsideRegion(f"need rho(U - beta V) <= Y <= 0, got Y={point[2]}")


def eta_feasible_interval(point, p: ModelParams, c: float):
    """Admissible slopes eta > 0 at ``point``; ``None`` if the discriminant is negative."""
    _check_point(point, p, c)
    b, k = eta_quadratic_coeffs(point, p, c)
    disc = b * b - 4.0 * k
    if disc < 0:
        return None
    s = math.sqrt(disc)
    lo, hi = (-b - s) / 2.0, (-b + s) / 2.0
    crit = -b / 2.0
    if hi <= 0:
        return None
    if lo <= 0:
        return EtaInterval(0.0, hi, crit, lower_open=True)
    return EtaInterval(lo, hi, crit)


def default_eta(c: float) -> SurfaceParam:
    """Slope c/2: the vertex of the eta-quadratic at the origin when c = c*."""
    if not c > 0:
        raise ConfigError("c must be positive")
    return SurfaceParam(0.5 * c)


def eta_five_eighths(c: float) -> SurfaceParam:
    """Slope 5c/8.  Fails the surface inequality at the origin when c = c*."""
    return SurfaceParam(0.625 * c)
