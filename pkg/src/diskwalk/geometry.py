"""Deterministic geometry of the Poincare disk.

Metric, Busemann functions, bipolar coordinates relative to a pole pair
``(alpha, -alpha)`` and the circles through both poles.

Near a pole the Cartesian value of a point carries almost no information:
once ``tau`` exceeds ~36, ``1 - |z|`` falls below the float spacing at 1.
A :class:`DiskPoint` may therefore carry a *frame*, its offsets
``z - alpha`` and ``z + alpha`` computed without cancellation by whatever
map produced it.  All routines here prefer the frame offsets when present,
which keeps distances, Busemann values and bipolar coordinates accurate to
a few ulps relative even when the Cartesian coordinates have saturated.

The ``*_v`` helpers are the vectorised cores; they work on numpy arrays or
plain complex scalars and are shared by the scalar API and the identity
verification suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCircleError, DomainError, PoleSingularityError

BOUNDARY_TOL = 1e-12
#: |tau| above which Cartesian output is replaced by the pole (1-|z| < 1e-13).
SATURATION_TAU = 30.0
#: |tau| above which cosh/sinh based conversion would overflow.
MAX_TAU = 700.0
ORBIT_TOL = 1e-9


@dataclass(frozen=True)
class Pole:
    """A boundary point ``alpha``; the pair ``(alpha, -alpha)`` fixes the frame."""

    alpha: complex = 1 + 0j

    def __post_init__(self):
        a = complex(self.alpha)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise DomainError(f"pole must be finite, got {a!r}")
        if abs(abs(a) - 1.0) > BOUNDARY_TOL:
            raise DomainError(f"pole must lie on the unit circle, |alpha|={abs(a)!r}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_angle(cls, theta: float) -> "Pole":
        return cls(complex(math.cos(theta), math.sin(theta)))

    @property
    def antipode(self) -> complex:
        return -self.alpha


@dataclass(frozen=True)
class DiskPoint:
    """A point of the closed unit disk.

    ``frame`` is ``(alpha, z - alpha, z + alpha)`` when the point was produced
    by a pole-aware map; it never changes which point is meant, only how
    precisely quantities near the poles can be evaluated.  ``saturated``
    marks points whose Cartesian value is numerically a pole.
    """

    re: float
    im: float
    frame: tuple | None = field(default=None, compare=False, repr=False)
    saturated: bool = field(default=False, compare=False)

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise DomainError(f"non-finite point ({re!r}, {im!r})")
        if math.hypot(re, im) > 1.0 + BOUNDARY_TOL:
            raise DomainError(f"point ({re!r}, {im!r}) lies outside the closed disk")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, z) -> "DiskPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    @classmethod
    def framed(cls, alpha: complex, dm: complex, dp: complex, saturated=False) -> "DiskPoint":
        """Build a point from its pole offsets ``dm = z - alpha``, ``dp = z + alpha``."""
        alpha, dm, dp = complex(alpha), complex(dm), complex(dp)
        z = alpha + dm if abs(dm) <= abs(dp) else -alpha + dp
        r = abs(z)
        if r > 1.0:
            # Roundoff of alpha + dm can land a hair outside the circle.
            z = z / r
        return cls(z.real, z.imag, frame=(alpha, dm, dp), saturated=saturated)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def offsets(self, alpha: complex) -> tuple[complex, complex]:
        """Return ``(z - alpha, z + alpha)``, from the frame when it matches."""
        if self.frame is not None:
            a, dm, dp = self.frame
            if a == alpha:
                return dm, dp
            if a == -alpha:
                return dp, dm
        z = self.z
        return z - alpha, z + alpha

    def one_minus_abs2(self) -> float:
        """``1 - |z|^2`` evaluated without cancellation when a frame is present."""
        if self.frame is not None:
            a, dm, dp = self.frame
            return float(one_minus_abs2_v(dm, dp, a))
        r = math.hypot(self.re, self.im)
        return (1.0 - r) * (1.0 + r)

    def interior(self) -> bool:
        if self.frame is not None:
            return self.one_minus_abs2() > 0.0
        return math.hypot(self.re, self.im) < 1.0 - BOUNDARY_TOL

    def __complex__(self):
        return self.z


@dataclass(frozen=True)
class BipolarPoint:
    """Bipolar coordinates ``(varsigma, tau)`` relative to ``pole``.

    ``(z + alpha) / (alpha - z) = exp(tau + i*varsigma)``; ``varsigma`` is
    0 on the diameter through the poles and +-pi/2 on the unit circle.
    """

    varsigma: float
    tau: float
    pole: Pole = Pole()

    def __post_init__(self):
        if not -math.pi / 2 - 1e-12 <= self.varsigma <= math.pi / 2 + 1e-12:
            raise DomainError(f"varsigma={self.varsigma!r} outside [-pi/2, pi/2]")
        if math.isnan(self.tau):
            raise DomainError("tau is NaN")

    @property
    def sigma(self) -> float:
        """Classical bipolar angle, ``sign(varsigma)*pi - varsigma`` with sign(0)=+1."""
        s = 1.0 if self.varsigma >= 0 else -1.0
        return s * math.pi - self.varsigma


@dataclass(frozen=True)
class ApollonianCircle:
    """Circle of the elliptic pencil through ``alpha`` and ``-alpha``."""

    center: complex
    radius: float
    pole: Pole

    def contains(self, u, tol: float = 1e-9) -> bool:
        return abs(abs(complex(u) - self.center) - self.radius) <= tol


# -- vectorised cores --------------------------------------------------------


def one_minus_abs2_v(dm, dp, alpha):
    """``1 - |z|^2`` from the offset to whichever pole is nearer."""
    ad = np.conj(alpha)
    near_plus = np.abs(dm) <= np.abs(dp)
    via_plus = -2.0 * np.real(ad * dm) - np.abs(dm) ** 2
    via_minus = 2.0 * np.real(ad * dp) - np.abs(dp) ** 2
    return np.where(near_plus, via_plus, via_minus)


def poincare_distance_v(z1, dm1, dp1, z2, dm2, dp2, alpha):
    """Poincare distance ``log((1+rho)/(1-rho))`` between framed points.

    Arguments are put in a canonical order first, so the result is exactly
    symmetric in floating point.
    """
    z1, z2 = np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex)
    swap = (z1.real > z2.real) | ((z1.real == z2.real) & (z1.imag > z2.imag))
    z1, z2 = np.where(swap, z2, z1), np.where(swap, z1, z2)
    dm1, dm2 = np.where(swap, dm2, dm1), np.where(swap, dm1, dm2)
    dp1, dp2 = np.where(swap, dp2, dp1), np.where(swap, dp1, dp2)
    n1 = np.abs(dm1) <= np.abs(dp1)
    n2 = np.abs(dm2) <= np.abs(dp2)
    both_plus = n1 & n2
    both_minus = ~n1 & ~n2
    diff = np.where(both_plus, dm1 - dm2, np.where(both_minus, dp1 - dp2, z1 - z2))
    # 1 - conj(z1) z2 with z1 = a + d1, z2 = a + d2 shared pole a:
    #   -(conj(a) d2 + a conj(d1) + conj(d1) d2)
    ad = np.conj(alpha)
    c_plus = -(ad * dm2 + alpha * np.conj(dm1) + np.conj(dm1) * dm2)
    c_minus = -(-ad * dp2 - alpha * np.conj(dp1) + np.conj(dp1) * dp2)
    c = np.where(both_plus, c_plus, np.where(both_minus, c_minus, 1.0 - np.conj(z1) * z2))
    cabs = np.abs(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.abs(diff) / cabs
        near = np.log1p(rho) - np.log1p(-np.minimum(rho, 0.5))
        a = one_minus_abs2_v(dm1, dp1, alpha)
        b = one_minus_abs2_v(dm2, dp2, alpha)
        far = 2.0 * np.log1p(rho) - np.log(a) - np.log(b) + 2.0 * np.log(cabs)
    return np.where(rho <= 0.5, near, far)


def busemann_v(xi, dm, dp, z, alpha):
    """``-log((1-|z|^2)/|xi - z|^2)``; ``xi`` may be ``alpha``, ``-alpha`` or any boundary point."""
    if xi == alpha:
        dist = np.abs(dm)
    elif xi == -alpha:
        dist = np.abs(dp)
    else:
        dist = np.abs(xi - z)
    with np.errstate(divide="ignore"):
        return -np.log(one_minus_abs2_v(dm, dp, alpha)) + 2.0 * np.log(dist)


def to_bipolar_v(dm, dp):
    """``(varsigma, tau)`` from pole offsets; ``dm = z - alpha``, ``dp = z + alpha``."""
    with np.errstate(divide="ignore"):
        tau = np.log(np.abs(dp)) - np.log(np.abs(dm))
    vs = np.angle(-dp * np.conj(dm))
    return np.clip(vs, -math.pi / 2, math.pi / 2), tau


def from_bipolar_v(varsigma, tau, alpha):
    """Cartesian point and pole offsets for bipolar ``(varsigma, tau)``.

    The Cartesian value uses the classical closed form
    ``x = sinh tau / (cosh tau - cos sigma)``, ``y = sin sigma / (...)``
    with ``cos sigma = -cos varsigma`` and ``sin sigma = sin varsigma``.
    """
    varsigma = np.asarray(varsigma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    den = np.cosh(tau) + np.cos(varsigma)
    z = alpha * (np.sinh(tau) + 1j * np.sin(varsigma)) / den
    w = tau + 1j * varsigma
    pos = tau > 0
    e = np.exp(np.where(pos, -w, w))
    # 1/(1+e^w) and 1/(1+e^-w), each from the non-overflowing exponential.
    inv_plus = np.where(pos, e / (1.0 + e), 1.0 / (1.0 + e))
    inv_minus = np.where(pos, 1.0 / (1.0 + e), e / (1.0 + e))
    dm = -2.0 * alpha * inv_plus
    dp = 2.0 * alpha * inv_minus
    return z, dm, dp


def log_abs_one_plus_exp(tau, varsigma):
    """``log|1 + exp(tau + i varsigma)|`` for ``|varsigma| <= pi/2``, overflow free."""
    t = np.abs(tau)
    e = np.exp(-t)
    return np.maximum(tau, 0.0) + 0.5 * np.log1p(2.0 * e * np.cos(varsigma) + e * e)


def log_pole_distance(tau, varsigma, eps):
    """``log|z - eps*alpha|`` for the point with bipolar coordinates ``(varsigma, tau)``."""
    return math.log(2.0) - log_abs_one_plus_exp(eps * np.asarray(tau), varsigma)


def dist_from_origin_bipolar(tau, varsigma):
    """``d_p(0, z)`` from bipolar coordinates, via ``cosh d = cosh tau / cos varsigma``."""
    tau = np.asarray(tau, dtype=float)
    varsigma = np.asarray(varsigma, dtype=float)
    c = np.cos(varsigma)
    at = np.abs(tau)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        sh = np.sinh(0.5 * np.minimum(at, 40.0))
        sn = np.sin(0.5 * varsigma)
        t = 2.0 * (sh * sh + sn * sn) / c
        small = np.log1p(t + np.sqrt(t * (t + 2.0)))
        log_x = at - math.log(2.0) + np.log1p(np.exp(-2.0 * at)) - np.log(c)
        big = log_x + np.log1p(np.sqrt(-np.expm1(-2.0 * log_x)))
    return np.where(at <= 20.0, small, big)


# -- scalar API --------------------------------------------------------------


def _as_point(z) -> DiskPoint:
    return z if isinstance(z, DiskPoint) else DiskPoint.from_complex(z)


def _alpha_of(pole) -> complex:
    return pole.alpha if isinstance(pole, Pole) else Pole(pole).alpha


def poincare_distance(z, w) -> float:
    """Poincare distance between two interior points.

    Raises
    ------
    DomainError
        If either point is on the boundary (the distance is infinite).
    """
    z, w = _as_point(z), _as_point(w)
    for p in (z, w):
        if not p.interior():
            raise DomainError(f"{p!r} is not interior; distance is infinite")
    alpha = 1 + 0j
    if z.frame is not None:
        alpha = z.frame[0]
    elif w.frame is not None:
        alpha = w.frame[0]
    dm1, dp1 = z.offsets(alpha)
    dm2, dp2 = w.offsets(alpha)
    return float(poincare_distance_v(z.z, dm1, dp1, w.z, dm2, dp2, alpha))


def busemann(xi, z) -> float:
    """Busemann function ``B_xi(z) = -log((1-|z|^2)/|xi-z|^2)``, zero at the origin."""
    xi = _alpha_of(xi)
    z = _as_point(z)
    if not z.interior():
        raise DomainError(f"{z!r} is not interior")
    alpha = z.frame[0] if z.frame is not None else xi
    dm, dp = z.offsets(alpha)
    return float(busemann_v(xi, dm, dp, z.z, alpha))


def to_bipolar(z, pole=Pole()) -> BipolarPoint:
    pole = pole if isinstance(pole, Pole) else Pole(pole)
    z = _as_point(z)
    dm, dp = z.offsets(pole.alpha)
    if dm == 0 or dp == 0:
        raise PoleSingularityError(f"{z!r} coincides with a pole of {pole!r}")
    vs, tau = to_bipolar_v(dm, dp)
    return BipolarPoint(float(vs), float(tau), pole)


def from_bipolar(b: BipolarPoint, *, saturate: bool = False) -> DiskPoint:
    """Cartesian point for ``b``, framed with its pole offsets.

    With ``saturate=True`` a point with ``|tau| > SATURATION_TAU`` is
    returned at the nearer pole with ``saturated=True``; its frame still
    holds the exact offsets.
    """
    if abs(b.tau) > MAX_TAU:
        raise DomainError(
            f"|tau|={abs(b.tau):g} > {MAX_TAU:g}; use the limit point "
            f"{'+' if b.tau > 0 else '-'}alpha instead"
        )
    alpha = b.pole.alpha
    z, dm, dp = from_bipolar_v(b.varsigma, b.tau, alpha)
    z, dm, dp = complex(z), complex(dm), complex(dp)
    if saturate and abs(b.tau) > SATURATION_TAU:
        z = alpha if b.tau > 0 else -alpha
        return DiskPoint(z.real, z.imag, frame=(alpha, dm, dp), saturated=True)
    r = abs(z)
    if r > 1.0:
        z /= r
    return DiskPoint(z.real, z.imag, frame=(alpha, dm, dp))


def orbit_circle(z, pole=Pole()) -> ApollonianCircle:
    """Circle through ``alpha``, ``-alpha`` and ``z``.

    Center ``-i*alpha*c``, radius ``sqrt(1+c^2)``, where ``c`` solves
    ``|z + i c alpha|^2 = 1 + c^2``, i.e. ``c = (1-|z|^2) / (2 Im(conj(alpha) z))``.
    """
    pole = pole if isinstance(pole, Pole) else Pole(pole)
    z = _as_point(z)
    alpha = pole.alpha
    h = (alpha.conjugate() * z.z).imag
    if abs(h) <= 1e-15:
        raise DegenerateCircleError(
            f"{z!r} lies on the diameter through the poles; the orbit is that line"
        )
    c = z.one_minus_abs2() / (2.0 * h)
    return ApollonianCircle(-1j * alpha * c, math.sqrt(1.0 + c * c), pole)


def on_orbit_circle(u, z, pole=Pole(), tol: float = ORBIT_TOL) -> bool:
    """Whether ``u`` lies on the circle through the poles and ``z``.

    Tests that ``((u+alpha)/(u-alpha)) * ((z-alpha)/(z+alpha))`` is real; the
    imaginary part is compared relative to ``max(1, |product|)`` since the
    product grows like ``exp(tau(u) - tau(z))``.
    """
    pole = pole if isinstance(pole, Pole) else Pole(pole)
    alpha = pole.alpha
    u, z = _as_point(u), _as_point(z)
    dmu, dpu = u.offsets(alpha)
    dmz, dpz = z.offsets(alpha)
    if dmu == 0 or dpu == 0 or dmz == 0 or dpz == 0:
        raise PoleSingularityError("orbit circle test is undefined at the poles")
    prod = (dpu / dmu) * (dmz / dpz)
    return abs(prod.imag) <= tol * max(1.0, abs(prod))
