"""Exact-identity verification suite.

Random start points and step paths are pushed through the Mobius maps one
step at a time (``U_n = g_{gamma_n}(U_{n-1})``, on pole offsets) and every
iterate is compared with the closed forms in terms of ``omega_n``.  All
cases are processed as arrays, so 1000 cases of 200 steps take well under
a second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    busemann_v,
    one_minus_abs2_v,
    poincare_distance_v,
    to_bipolar_v,
)
from .group import apply_offsets_v

TOL = 1e-9
ALG_TOL = 1e-12
ISO_TOL = 1e-10
MAX_OMEGA = 30.0


@dataclass
class CheckResult:
    name: str
    cases: int
    failures: int
    max_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class VerifyReport:
    trials: int
    steps: int
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.checks)

    def as_dict(self):
        return {
            "trials": self.trials, "steps": self.steps, "seed": self.seed,
            "passed": self.passed,
            "checks": [dict(c.__dict__, passed=c.passed) for c in self.checks],
        }


def _add(report, name, err, tol, cases=None):
    err = np.asarray(err, dtype=float).ravel()
    bad = ~(err <= tol)
    report.checks.append(CheckResult(name, int(cases if cases is not None else err.size),
                                     int(bad.sum()), float(np.nanmax(err)) if err.size else 0.0, tol))


def _random_paths(rng, trials, steps):
    """Step paths with ``|omega_n| <= 30`` throughout, by rejection."""
    out = np.empty((0, steps))
    while out.shape[0] < trials:
        scale = rng.uniform(0.05, 1.5, size=(trials, 1))
        u = rng.random((trials, steps))
        g = scale * (np.log(u) - np.log1p(-u))
        ok = np.max(np.abs(np.cumsum(g, axis=1)), axis=1) <= MAX_OMEGA
        out = np.concatenate([out, g[ok]])
    return out[:trials]


def _iterate(gammas, dm, dp, alpha):
    """All iterates ``U_0..U_n`` as arrays of shape ``(steps + 1, trials)``."""
    steps = gammas.shape[1]
    Z = np.empty((steps + 1, dm.size), complex)
    DM = np.empty_like(Z)
    DP = np.empty_like(Z)
    DM[0], DP[0] = dm, dp
    Z[0] = np.where(np.abs(dm) <= np.abs(dp), alpha + dm, -alpha + dp)
    for k in range(steps):
        Z[k + 1], DM[k + 1], DP[k + 1] = apply_offsets_v(gammas[:, k], DM[k], DP[k], alpha)
    return Z, DM, DP


def _log_tan_half_psi_plus(dm, dp, alpha):
    """``log tan(psi^+/2)`` for boundary points, ``psi^+`` the angle at 0 between ``U`` and ``-alpha``.

    The angle is measured from whichever pole is nearer, via
    ``tan(psi^+/2) = cot(psi^-/2)``, so it keeps full relative precision.
    """
    ad = np.conj(alpha)
    wp = -ad * dp                      # U * conj(-alpha) - 1
    wm = ad * dm                       # U * conj(alpha) - 1
    psi_plus = np.abs(np.arctan2(wp.imag, 1.0 + wp.real))
    psi_minus = np.abs(np.arctan2(wm.imag, 1.0 + wm.real))
    return np.where(psi_plus <= psi_minus,
                    np.log(np.tan(0.5 * psi_plus)),
                    -np.log(np.tan(0.5 * psi_minus)))


def run_verification(trials: int = 1000, steps: int = 200, seed: int = 0) -> VerifyReport:
    """Run every identity check; see :class:`VerifyReport` for the outcome."""
    rng = np.random.default_rng(seed)
    rep = VerifyReport(trials, steps, seed)

    alpha = np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    r = 0.999 * np.sqrt(rng.random(trials))
    z0 = r * np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    g = _random_paths(rng, trials, steps)
    omega = np.cumsum(g, axis=1)
    omega = np.vstack([np.zeros(trials), omega.T])          # (steps + 1, trials)

    Z, DM, DP = _iterate(g, z0 - alpha, z0 + alpha, alpha)
    vs, tau = to_bipolar_v(DM, DP)

    # tau shifts by omega_n, varsigma is invariant
    _add(rep, "bipo.tau_shift", np.abs(tau - tau[0] - omega), TOL, trials)
    _add(rep, "bipo.varsigma_invariant", np.abs(vs - vs[0]), TOL, trials)

    # Busemann shifts
    bp = _busemann_pair(DM, DP, alpha)
    _add(rep, "pbuz.alpha", np.abs(bp[0] + omega - bp[0][0]), TOL, trials)
    _add(rep, "pbuz.minus_alpha", np.abs(bp[1] - omega - bp[1][0]), TOL, trials)

    # cross-ratio law (U+a)/(U-a) = e^omega (z+a)/(z-a), relative
    lhs = DP / DM
    rhs = (DP[0] / DM[0]) * np.exp(omega)
    _add(rep, "curious.cross_ratio", np.abs(lhs / rhs - 1.0), TOL, trials)

    # every iterate on the circle through the poles and z0
    prod = (DP / DM) * (DM[0] / DP[0])
    _add(rep, "cinv.orbit_circle", np.abs(prod.imag) / np.maximum(1.0, np.abs(prod)), TOL, trials)

    # distance sandwich |d(0,U_n) - |omega_n|| <= d(0, z0)
    zero = np.zeros_like(Z)
    d = poincare_distance_v(zero, zero - alpha, zero + alpha, Z, DM, DP, alpha)
    excess = np.abs(d - np.abs(omega)) - d[0]
    _add(rep, "zero.distance_sandwich", np.maximum(excess, 0.0), TOL, trials)

    # four-way monotonicity, both poles, every step
    mon_bad = np.zeros(trials, dtype=int)
    x = np.tanh(0.5 * g.T)
    for eps, D, B in ((1, DM, bp[0]), (-1, DP, bp[1])):
        closer = np.abs(D[1:]) < np.abs(D[:-1])
        stmts = [closer, eps * x > 0, eps * g.T > 0, B[1:] < B[:-1]]
        agree = np.all([s == stmts[2] for s in stmts], axis=0)
        mon_bad += np.sum(~agree & (g.T != 0), axis=0)
    _add(rep, "mon.four_way", mon_bad.astype(float), 0.5, trials)

    # half-angle law on the boundary
    theta = rng.uniform(0.01, math.pi - 0.01, trials) * rng.choice([-1.0, 1.0], trials)
    zb = alpha * np.exp(1j * theta)
    _, BM, BP = _iterate(g, zb - alpha, zb + alpha, alpha)
    lt = _log_tan_half_psi_plus(BM, BP, alpha)
    _add(rep, "angular.half_angle", np.abs(lt - lt[0] - omega), TOL, trials)

    _group_checks(rep, rng, trials)
    _geometry_checks(rep, rng, trials)
    return rep


def _busemann_pair(DM, DP, alpha):
    with np.errstate(divide="ignore"):
        a = one_minus_abs2_v(DM, DP, alpha)
        la = np.log(a)
        return -la + 2.0 * np.log(np.abs(DM)), -la + 2.0 * np.log(np.abs(DP))


def _apply_c(gamma, z, alpha):
    """Apply ``g_gamma`` to Cartesian points; returns ``(z, dm, dp)``."""
    return apply_offsets_v(gamma, z - alpha, z + alpha, alpha)


def _group_checks(rep, rng, trials):
    alpha = np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    z = 0.99 * np.sqrt(rng.random(trials)) * np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    w = 0.99 * np.sqrt(rng.random(trials)) * np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    g1, g2 = rng.uniform(-5, 5, trials), rng.uniform(-5, 5, trials)

    a12 = apply_offsets_v(g1, *_apply_c(g2, z, alpha)[1:], alpha)[0]
    a21 = apply_offsets_v(g2, *_apply_c(g1, z, alpha)[1:], alpha)[0]
    a_sum = _apply_c(g1 + g2, z, alpha)[0]
    _add(rep, "group.commutative", np.abs(a12 - a21), ALG_TOL)
    _add(rep, "group.composition", np.abs(a12 - a_sum), ALG_TOL)

    # isometry for |gamma| <= 20
    g = rng.uniform(-20, 20, trials)
    gz, gzm, gzp = _apply_c(g, z, alpha)
    gw, gwm, gwp = _apply_c(g, w, alpha)
    d_img = poincare_distance_v(gz, gzm, gzp, gw, gwm, gwp, alpha)
    d_orig = poincare_distance_v(z, z - alpha, z + alpha, w, w - alpha, w + alpha, alpha)
    _add(rep, "group.isometry", np.abs(d_img - d_orig), ISO_TOL)

    # fixed points
    fp = np.abs(_apply_c(g, alpha, alpha)[0] - alpha)
    fm = np.abs(_apply_c(g, -alpha, alpha)[0] + alpha)
    _add(rep, "group.fixed_points", np.maximum(fp, fm), ALG_TOL)

    # diameter l_alpha maps to itself by the scalar law
    xs = rng.uniform(-0.99, 0.99, trials)
    y = np.tanh(0.5 * g1)
    img = _apply_c(g1, xs * alpha, alpha)[0]
    _add(rep, "group.diameter", np.abs(img - alpha * (xs + y) / (1 + xs * y)), ALG_TOL)

    # permutation invariance of composition
    bad = 0
    for _ in range(20):
        gs = rng.normal(scale=3.0, size=500)
        if math.fsum(gs) != math.fsum(rng.permutation(gs)):
            bad += 1
    _add(rep, "group.permutation", np.array([float(bad)]), 0.5, 20)


def _geometry_checks(rep, rng, trials):
    z = 0.99 * np.sqrt(rng.random(trials)) * np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    xi = np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    one = np.ones(trials, complex)
    b = np.array([busemann_v(xi[i], z[i] - 1, z[i] + 1, z[i], 1.0) for i in range(trials)])
    kernel = -np.log(np.real((xi + z) / (xi - z)))
    _add(rep, "geometry.busemann_kernel", np.abs(b - kernel) / np.maximum(1.0, np.abs(b)), ALG_TOL)
    w = 0.99 * np.sqrt(rng.random(trials)) * np.exp(1j * rng.uniform(-math.pi, math.pi, trials))
    d_zw = poincare_distance_v(z, z - one, z + one, w, w - one, w + one, one)
    d_wz = poincare_distance_v(w, w - one, w + one, z, z - one, z + one, one)
    _add(rep, "geometry.symmetry", np.abs(d_zw - d_wz), ALG_TOL)
