"""The abelian group of gyrotranslations fixing a pole pair.

``g_gamma(z) = (z + x alpha) / (1 + x conj(alpha) z)`` with ``x = tanh(gamma/2)``.
Elements are stored by their additive parameter ``gamma`` so composition is
plain real addition; ``x`` is only formed when the map is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleMismatchError
from .geometry import DiskPoint, Pole, _as_point

#: |gamma| beyond which tanh(gamma/2) is +-1 to far below float resolution.
GAMMA_SATURATION = 700.0


@dataclass(frozen=True)
class GroupElement:
    gamma: float
    pole: Pole = Pole()

    def __post_init__(self):
        g = float(self.gamma)
        if math.isnan(g):
            raise DomainError("gamma is NaN")
        object.__setattr__(self, "gamma", g)

    @property
    def x(self) -> float:
        return math.tanh(self.gamma / 2.0)

    @property
    def rho(self) -> float:
        """Derivative of the map at ``-alpha``, ``e^gamma``."""
        return math.exp(self.gamma)

    def inverse(self) -> "GroupElement":
        return GroupElement(-self.gamma, self.pole)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def __call__(self, z) -> DiskPoint:
        return apply(self, z)


def identity(pole: Pole = Pole()) -> GroupElement:
    return GroupElement(0.0, pole)


def gamma_of_x(x):
    """``log((1+x)/(1-x))``, accurate near 0 and near +-1."""
    return np.log1p(x) - np.log1p(-np.asarray(x, dtype=float))


def from_x(x: float, pole: Pole = Pole()) -> GroupElement:
    """Group element ``q_{x,alpha}`` for ``x`` in (-1, 1)."""
    x = float(x)
    if not -1.0 < x < 1.0:
        raise DomainError(f"x={x!r} must lie in (-1, 1)")
    return GroupElement(float(gamma_of_x(x)), pole)


def _check_same_pole(*elements):
    poles = {e.pole.alpha for e in elements}
    if len(poles) > 1:
        raise PoleMismatchError(f"elements act on different poles: {sorted(poles, key=repr)}")


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    _check_same_pole(g1, g2)
    return GroupElement(g1.gamma + g2.gamma, g1.pole)


def compose_all(elements) -> GroupElement:
    """Compose many elements; the sum is exactly rounded, so order never matters."""
    elements = list(elements)
    if not elements:
        return identity()
    _check_same_pole(*elements)
    return GroupElement(math.fsum(e.gamma for e in elements), elements[0].pole)


def apply_offsets_v(gamma, dm, dp, alpha):
    """Image of framed points under ``g_gamma``.

    Works on pole offsets, following ``U - eps*alpha = (z - eps*alpha)(1 - eps*x) / (1 + x conj(alpha) z)``.
    The denominator is expanded around the nearer pole so that no term
    cancels.  ``|gamma|`` is clipped at :data:`GAMMA_SATURATION`.

    Returns ``(z, dm, dp)`` of the image.
    """
    gamma = np.clip(gamma, -GAMMA_SATURATION, GAMMA_SATURATION)
    eg = np.exp(gamma)
    one_minus_x = 2.0 / (1.0 + eg)
    one_plus_x = 2.0 / (1.0 + 1.0 / eg)
    x = np.tanh(0.5 * gamma)
    ad = np.conj(alpha)
    near_plus = np.abs(dm) <= np.abs(dp)
    den = np.where(near_plus, one_plus_x + x * ad * dm, one_minus_x + x * ad * dp)
    dm2 = dm * one_minus_x / den
    dp2 = dp * one_plus_x / den
    z2 = np.where(np.abs(dm2) <= np.abs(dp2), alpha + dm2, -alpha + dp2)
    return z2, dm2, dp2


def apply(g: GroupElement, z) -> DiskPoint:
    """``g(z)`` for ``z`` in the closed disk; fixes both poles.

    For ``|gamma| > 700`` the result is the attracting pole with
    ``saturated=True`` (the repelling pole itself stays fixed).
    """
    z = _as_point(z)
    alpha = g.pole.alpha
    dm, dp = z.offsets(alpha)
    if abs(g.gamma) > GAMMA_SATURATION:
        target = alpha if g.gamma > 0 else -alpha
        repelling = dp if g.gamma > 0 else dm
        if repelling != 0:
            return DiskPoint.framed(alpha, target - alpha, target + alpha, saturated=True)
    _, dm2, dp2 = apply_offsets_v(g.gamma, dm, dp, alpha)
    return DiskPoint.framed(alpha, complex(dm2), complex(dp2))


def apply_Tz(z, u, pole: Pole = Pole()) -> DiskPoint:
    """``T_z(u) = alpha^2 (z + u) / (alpha^2 + z u)``: fixes both poles, sends 0 to z."""
    a2 = pole.alpha ** 2
    z, u = complex(z), complex(u)
    den = a2 + z * u
    if den == 0:
        raise DomainError("alpha^2 + z*u vanishes")
    return DiskPoint.from_complex(a2 * (z + u) / den)


def tau_hat(z, delta: float, pole: Pole = Pole()) -> DiskPoint:
    """Point of the orbit arc through ``z`` at signed hyperbolic offset ``delta``.

    ``T_z(tanh(delta/2) * alpha)``; the orbit of the walk is ``U_n(z) = tau_hat(z, omega_n)``.
    """
    return apply_Tz(z, math.tanh(delta / 2.0) * pole.alpha, pole)
