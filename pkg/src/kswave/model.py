"""Logistic Keller-Segel model: parameters, sensitivity functions, and the
traveling-wave right-hand sides.

The PDE is::

    u_t = u_xx - (u chi(v) v_x)_x + mu u (1 - u)
    v_t = D v_xx + beta v - u

and a wave ``(U, V)(x - c t)`` turns it into a 3D first-order system when
``D == 0`` (state ``(U, V, W)``) or a 4D one when ``D > 0`` (state
``(U, V, Y, W)`` with ``Y = V'``).  ``W = cU + U' - U chi(V) V'`` is the
modified flux variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ChiOutOfRange, ConfigError, NegativeDiffusion, NonPositiveRate

# kernel codes shared with the compiled core
CHI_CONSTANT, CHI_AFFINE, CHI_TABULATED = 0, 1, 2

N_VALIDATION_SAMPLES = 1001


# ---------------------------------------------------------------------------
# chemotactic sensitivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantChi:
    kappa: float

    def values(self, v):
        return np.full(np.shape(v), float(self.kappa))

    def derivative(self, v):
        return np.zeros(np.shape(v))

    def critical_points(self, v_max):
        return [0.0, v_max]

    def kernel_spec(self):
        return CHI_CONSTANT, float(self.kappa), 0.0, _EMPTY, _EMPTY

    def to_dict(self):
        return {"type": "constant", "kappa": float(self.kappa)}

    def label(self):
        return f"const:{self.kappa:g}"


@dataclass(frozen=True)
class AffineChi:
    """chi(v) = a + b v."""

    a: float
    b: float

    def values(self, v):
        return self.a + self.b * np.asarray(v, dtype=float)

    def derivative(self, v):
        return np.full(np.shape(v), float(self.b))

    def critical_points(self, v_max):
        return [0.0, v_max]

    def kernel_spec(self):
        return CHI_AFFINE, float(self.a), float(self.b), _EMPTY, _EMPTY

    def to_dict(self):
        return {"type": "affine", "a": float(self.a), "b": float(self.b)}

    def label(self):
        return f"affine:{self.a:g},{self.b:g}"


@dataclass(frozen=True)
class TabulatedChi:
    """Piecewise-linear chi through ``nodes = ((v0, f0), (v1, f1), ...)``."""

    nodes: tuple
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _f: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple((float(a), float(b)) for a, b in self.nodes)
        if len(nodes) < 2:
            raise ConfigError("tabulated chi needs at least two nodes")
        v = np.array([n[0] for n in nodes])
        f = np.array([n[1] for n in nodes])
        if np.any(np.diff(v) <= 0):
            raise ConfigError("tabulated chi nodes must be strictly increasing in v")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(f))):
            raise ConfigError("tabulated chi nodes must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_f", f)

    @classmethod
    def from_function(cls, fn, v_max, n):
        v = np.linspace(0.0, v_max, n)
        return cls(tuple(zip(v.tolist(), np.asarray(fn(v), dtype=float).tolist())))

    def values(self, v):
        return np.interp(v, self._v, self._f)

    def derivative(self, v):
        v = np.asarray(v, dtype=float)
        slopes = np.diff(self._f) / np.diff(self._v)
        idx = np.clip(np.searchsorted(self._v, v, side="right") - 1, 0, len(slopes) - 1)
        out = slopes[idx]
        # flat extrapolation outside the table
        out = np.where((v < self._v[0]) | (v > self._v[-1]), 0.0, out)
        return out

    def critical_points(self, v_max):
        inside = [x for x in self._v.tolist() if 0.0 <= x <= v_max]
        return [0.0, v_max] + inside

    def kernel_spec(self):
        return CHI_TABULATED, 0.0, 0.0, self._v.copy(), self._f.copy()

    def to_dict(self):
        return {"type": "tabulated", "nodes": [list(n) for n in self.nodes]}

    def label(self):
        return f"table:{len(self.nodes)}"


ChiFunction = Union[ConstantChi, AffineChi, TabulatedChi]
_EMPTY = np.zeros(0)


def chi_from_dict(d) -> ChiFunction:
    kind = d.get("type")
    try:
        if kind == "constant":
            return ConstantChi(float(d["kappa"]))
        if kind == "affine":
            return AffineChi(float(d["a"]), float(d["b"]))
        if kind == "tabulated":
            return TabulatedChi(tuple(tuple(n) for n in d["nodes"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"chi: malformed {kind!r} entry ({exc})") from None
    raise ConfigError(f"chi.type: unknown variant {kind!r}")


def chi_eval(chi: ChiFunction, v, beta: float | None = None, with_flag: bool = False):
    """Evaluate ``chi`` at ``v``.

    When ``beta`` is given, ``v`` is clamped to ``[0, 1/beta]`` first and the
    clamp is reported through the flag (``with_flag=True`` returns
    ``(value, clamped)``).
    """
    scalar = np.ndim(v) == 0
    vv = np.asarray(v, dtype=float)
    clamped = False
    if beta is not None:
        lo, hi = 0.0, 1.0 / beta
        clamped = bool(np.any((vv < lo) | (vv > hi)))
        vv = np.clip(vv, lo, hi)
    out = chi.values(vv)
    if scalar:
        out = float(out)
    return (out, clamped) if with_flag else out


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    mu: float
    beta: float
    diff: float
    chi: ChiFunction = field(default_factory=lambda: ConstantChi(0.0))

    @property
    def v_max(self):
        return 1.0 / self.beta

    @property
    def dim(self):
        return 3 if self.diff == 0 else 4

    def chi_at(self, v):
        """chi with v clamped to the admissible interval [0, 1/beta]."""
        return chi_eval(self.chi, v, self.beta)

    def with_chi(self, chi):
        return ModelParams(self.mu, self.beta, self.diff, chi)

    def to_dict(self):
        return {"mu": self.mu, "beta": self.beta, "D": self.diff, "chi": self.chi.to_dict()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(float(d["mu"]), float(d["beta"]), float(d.get("D", 0.0)),
                       chi_from_dict(d.get("chi", {"type": "constant", "kappa": 0.0})))
        except KeyError as exc:
            raise ConfigError(f"params: missing field {exc.args[0]!r}") from None


def validate_params(p: ModelParams) -> ModelParams:
    """Return ``p`` unchanged if it is admissible, otherwise raise.

    chi is checked on a dense sample of [0, 1/beta] together with each
    variant's analytic extrema (endpoints, table nodes).
    """
    for name in ("mu", "beta"):
        val = getattr(p, name)
        if not (math.isfinite(val) and val > 0):
            raise NonPositiveRate(f"{name} must be positive, got {val}")
    if not (math.isfinite(p.diff) and p.diff >= 0):
        raise NegativeDiffusion(f"D must be nonnegative, got {p.diff}")
    if isinstance(p.chi, TabulatedChi):
        if p.chi._v[0] > 0.0 or p.chi._v[-1] < p.v_max:
            raise ConfigError(
                f"chi.nodes: table spans [{p.chi._v[0]:g}, {p.chi._v[-1]:g}], "
                f"must cover [0, {p.v_max:g}]"
            )
    v = np.concatenate([np.linspace(0.0, p.v_max, N_VALIDATION_SAMPLES),
                        np.asarray(p.chi.critical_points(p.v_max), dtype=float)])
    vals = p.chi.values(v)
    # tolerate roundoff at chi == mu exactly (e.g. tables sampled from chi = mu)
    excess = np.maximum(-vals, vals - p.mu * (1 + 1e-14))
    k = int(np.argmax(excess))
    if excess[k] > 0 or not np.all(np.isfinite(vals)):
        raise ChiOutOfRange(v[k], vals[k], p.mu)
    return p


# ---------------------------------------------------------------------------
# phase-space states and right-hand sides
# ---------------------------------------------------------------------------

class SpatialState3(NamedTuple):
    u: float
    v: float
    w: float


class SpatialState4(NamedTuple):
    u: float
    v: float
    y: float
    w: float


class Equilibria(NamedTuple):
    invaded: tuple
    invading: tuple


def check_finite(s: Sequence[float]):
    if not all(math.isfinite(x) for x in s):
        raise ConfigError(f"state has non-finite components: {tuple(s)}")
    return s


def equilibria(p: ModelParams, c: float) -> Equilibria:
    if p.diff == 0:
        return Equilibria(SpatialState3(0.0, 0.0, 0.0), SpatialState3(1.0, 1.0 / p.beta, c))
    return Equilibria(SpatialState4(0.0, 0.0, 0.0, 0.0), SpatialState4(1.0, 1.0 / p.beta, 0.0, c))


def spatial_rhs_3d(s, p: ModelParams, c: float) -> SpatialState3:
    u, v, w = s
    gap = u - p.beta * v
    return SpatialState3(
        -c * u + u * p.chi_at(v) * gap / c + w,
        gap / c,
        p.mu * u * (u - 1.0),
    )


def spatial_rhs_4d(s, p: ModelParams, c: float) -> SpatialState4:
    u, v, y, w = s
    d = p.diff
    return SpatialState4(
        -c * u + u * p.chi_at(v) * y + w,
        y,
        -c * y / d + (u - p.beta * v) / d,
        p.mu * u * (u - 1.0),
    )


def spatial_rhs(s, p: ModelParams, c: float):
    return spatial_rhs_3d(s, p, c) if p.diff == 0 else spatial_rhs_4d(s, p, c)


def _chi_and_slope(p, v):
    lo, hi = 0.0, p.v_max
    inside = lo <= v <= hi
    vc = min(max(v, lo), hi)
    chi = float(p.chi.values(vc))
    dchi = float(p.chi.derivative(vc)) if inside else 0.0
    return chi, dchi


def jacobian_3d(s, p: ModelParams, c: float) -> np.ndarray:
    u, v, _ = s
    b = p.beta
    chi, dchi = _chi_and_slope(p, v)
    gap = u - b * v
    return np.array([
        [-c + chi * gap / c + u * chi / c, u * dchi * gap / c - u * chi * b / c, 1.0],
        [1.0 / c, -b / c, 0.0],
        [p.mu * (2.0 * u - 1.0), 0.0, 0.0],
    ])


def jacobian_4d(s, p: ModelParams, c: float) -> np.ndarray:
    u, v, y, _ = s
    b, d = p.beta, p.diff
    chi, dchi = _chi_and_slope(p, v)
    return np.array([
        [-c + chi * y, u * dchi * y, u * chi, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [1.0 / d, -b / d, -c / d, 0.0],
        [p.mu * (2.0 * u - 1.0), 0.0, 0.0, 0.0],
    ])


def jacobian(s, p: ModelParams, c: float) -> np.ndarray:
    return jacobian_3d(s, p, c) if p.diff == 0 else jacobian_4d(s, p, c)
