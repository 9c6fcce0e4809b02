"""Distributions of the step parameter ``x_n`` on (-1, 1).

Each law maps open-interval uniforms to ``x`` by its inverse CDF and
returns ``gamma = log((1+x)/(1-x))`` computed from ``1+x`` and ``1-x``
directly, so tails stay accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


class StepLaw:
    """Base class; subclasses implement ``_one_plus_minus(u)``."""

    name = "law"

    def _one_plus_minus(self, u):
        raise NotImplementedError

    def transform(self, u):
        """Map uniforms ``u`` to ``(x, gamma)``."""
        u = np.asarray(u, dtype=float)
        a, b = self._one_plus_minus(u)
        x = np.where(a <= b, a - 1.0, 1.0 - b)
        return x, self.gamma(u)

    def gamma(self, u):
        a, b = self._one_plus_minus(np.asarray(u, dtype=float))
        return np.log(a) - np.log(b)

    def cdf(self, x):
        raise NotImplementedError

    def pieces(self):
        """``[(lo, hi, density)]`` segments plus ``[(x, mass)]`` atoms, for quadrature."""
        raise NotImplementedError


@dataclass(frozen=True)
class UniformX(StepLaw):
    """``x`` uniform on (-1, 1); ``gamma`` is then standard logistic."""

    name = "uniform"

    def _one_plus_minus(self, u):
        return 2.0 * u, 2.0 * (1.0 - u)

    def gamma(self, u):
        u = np.asarray(u, dtype=float)
        return np.log(u) - np.log1p(-u)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + 1.0) / 2.0, 0.0, 1.0)

    def pieces(self):
        return [(-1.0, 1.0, lambda x: 0.5 + 0.0 * x)], []


@dataclass(frozen=True)
class Triangular(StepLaw):
    """Triangular density on (-1, 1) with peak at ``mode``.

    ``f(x) = (x+1)/(1+mode)`` left of the mode, ``(1-x)/(1-mode)`` right of it.
    ``Triangular(0.21)`` is the piecewise density ``(100/121)(x+1)``,
    ``(100/79)(1-x)``.
    """

    mode: float = 0.1
    name = "triangular"

    def __post_init__(self):
        if not -1.0 < self.mode < 1.0:
            raise ConfigError(f"mode={self.mode!r} must lie in (-1, 1)")

    @property
    def _split(self):
        return (1.0 + self.mode) / 2.0

    def _one_plus_minus(self, u):
        c = self.mode
        left = u < self._split
        a_left = np.sqrt(2.0 * (1.0 + c) * np.where(left, u, 0.0))
        b_right = np.sqrt(2.0 * (1.0 - c) * np.where(left, 0.0, 1.0 - u))
        a = np.where(left, a_left, 2.0 - b_right)
        b = np.where(left, 2.0 - a_left, b_right)
        return a, b

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        c = self.mode
        return np.where(
            x < c,
            (x + 1.0) ** 2 / (2.0 * (1.0 + c)),
            1.0 - (1.0 - x) ** 2 / (2.0 * (1.0 - c)),
        )

    def pieces(self):
        c = self.mode
        return [
            (-1.0, c, lambda x: (x + 1.0) / (1.0 + c)),
            (c, 1.0, lambda x: (1.0 - x) / (1.0 - c)),
        ], []


def PaperTriangular() -> Triangular:
    """The drifting law of the simulations: triangular with mode 0.1, E(gamma) ~ 0.0774."""
    return Triangular(0.1)


@dataclass(frozen=True)
class InverseCdfTable(StepLaw):
    """Piecewise-linear inverse CDF through knots ``(u, x)``.

    ``u`` must run strictly increasing from 0 to 1 and ``x`` be nondecreasing
    within [-1, 1].  A flat segment is an atom; ``[(0, 0), (1, 0)]`` is a
    point mass at 0.
    """

    knots: tuple
    name = "table"

    def __post_init__(self):
        try:
            k = np.asarray(self.knots, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"knots are not numeric pairs: {exc}") from None
        if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 2:
            raise ConfigError("knots must be a sequence of at least two (u, x) pairs")
        u, x = k[:, 0], k[:, 1]
        if not np.all(np.isfinite(k)):
            raise ConfigError("knots must be finite")
        if u[0] != 0.0 or u[-1] != 1.0 or np.any(np.diff(u) <= 0):
            raise ConfigError("knot u values must increase strictly from 0 to 1")
        if np.any(np.diff(x) < 0):
            raise ConfigError("knot x values must be nondecreasing")
        if x[0] < -1.0 or x[-1] > 1.0:
            raise ConfigError("knot x values must lie in [-1, 1]")
        if x[0] == x[-1] and abs(x[0]) == 1.0:
            raise ConfigError("a point mass on the boundary is not a law on (-1, 1)")
        object.__setattr__(self, "knots", tuple(map(tuple, k.tolist())))

    @property
    def _u(self):
        return np.array([p[0] for p in self.knots])

    @property
    def _x(self):
        return np.array([p[1] for p in self.knots])

    def _one_plus_minus(self, u):
        x = np.interp(u, self._u, self._x)
        lo, hi = np.nextafter(-1.0, 0.0), np.nextafter(1.0, 0.0)
        x = np.clip(x, lo, hi)
        return 1.0 + x, 1.0 - x

    def cdf(self, x):
        xs, us = self._x, self._u
        x = np.asarray(x, dtype=float)
        # right-continuous: largest u with knot-interpolated x <= query
        out = np.zeros_like(x)
        for i in range(len(xs) - 1):
            x0, x1, u0, u1 = xs[i], xs[i + 1], us[i], us[i + 1]
            if x1 > x0:
                seg = np.clip((x - x0) / (x1 - x0), 0.0, 1.0)
                out = np.maximum(out, np.where(x >= x0, u0 + seg * (u1 - u0), 0.0))
            else:
                out = np.maximum(out, np.where(x >= x0, u1, 0.0))
        return out

    def pieces(self):
        segs, atoms = [], []
        xs, us = self._x, self._u
        for i in range(len(xs) - 1):
            x0, x1, du = xs[i], xs[i + 1], us[i + 1] - us[i]
            if x1 > x0:
                dens = du / (x1 - x0)
                segs.append((x0, x1, lambda x, d=dens: d + 0.0 * x))
            else:
                atoms.append((x0, du))
        return segs, atoms


def parse_law(text: str) -> StepLaw:
    """Law from a CLI token: ``uniform``, ``paper-triangular``,
    ``triangular:<mode>`` or ``table:<path to JSON [[u, x], ...]>``."""
    import json

    text = text.strip()
    if text == "uniform":
        return UniformX()
    if text == "paper-triangular":
        return PaperTriangular()
    if text.startswith("triangular:"):
        try:
            return Triangular(float(text.split(":", 1)[1]))
        except ValueError as exc:
            raise ConfigError(f"bad triangular mode in {text!r}") from exc
    if text.startswith("table:"):
        path = text.split(":", 1)[1]
        try:
            with open(path) as fh:
                knots = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read inverse-CDF table {path!r}: {exc}") from exc
        return InverseCdfTable(tuple(map(tuple, knots)))
    raise ConfigError(f"unknown step law {text!r}")


def law_token(law: StepLaw) -> str:
    if isinstance(law, UniformX):
        return "uniform"
    if isinstance(law, Triangular):
        return "paper-triangular" if math.isclose(law.mode, 0.1) else f"triangular:{law.mode!r}"
    return law.name


def sample_step(law: StepLaw, stream):
    """One draw ``(x, gamma)`` from ``law`` using ``stream``."""
    x, g = law.transform(stream.uniform())
    return float(x), float(g)
