"""Pure-numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module (to a few
ulps; transcendental functions may round differently).  All geometry is in
the ``alpha = 1`` frame; callers rotate.
"""

import math

import numpy as np

from .geometry import dist_from_origin_bipolar

LOG2 = math.log(2.0)


def partial_sums(gammas, start=0.0):
    """``start + cumsum(gammas)`` accumulated strictly left to right."""
    g = np.asarray(gammas, dtype=np.float64)
    return np.cumsum(np.concatenate(([start], g)))[1:]


def z_walk_path(coins, gammas, arcs, omega0, varsigma0):
    """Per-step ``(omega_tilde, varsigma)`` of the two-pencil walk.

    A coin of 1 consumes the next ``gammas`` entry and moves along the arc;
    a coin of 0 consumes the next ``arcs`` entry and switches arc.
    """
    c = np.asarray(coins, dtype=bool)
    n = c.size
    if n == 0:
        return np.empty(0), np.empty(0)
    s = np.cumsum(c)
    omega_all = partial_sums(gammas, omega0)
    omega_all = np.concatenate(([omega0], omega_all))
    omega = omega_all[s]
    zeros = np.arange(1, n + 1) - s
    arc_all = np.concatenate(([varsigma0], np.asarray(arcs, dtype=np.float64)))
    varsigma = arc_all[zeros]
    return omega, varsigma


def record_fields(tau, varsigma, sat_tau):
    """Cartesian position and distance statistics from bipolar coordinates."""
    tau = np.asarray(tau, dtype=np.float64)
    vs = np.asarray(varsigma, dtype=np.float64)
    sat = np.abs(tau) > sat_tau
    tt = np.where(sat, 0.0, tau)
    den = np.cosh(tt) + np.cos(vs)
    x = np.where(sat, np.sign(tau), np.sinh(tt) / den)
    y = np.where(sat, 0.0, np.sin(vs) / den)
    with np.errstate(divide="ignore"):
        lc = np.log(np.cos(vs))
    bplus = -(tau + lc)
    bminus = tau - lc
    dist = dist_from_origin_bipolar(tau, vs)
    return x, y, sat.astype(np.uint8), bplus, bminus, dist


def lil_scan(tau, varsigma, n_first, burn_in, sups, ck_idx):
    """Running sups of ``B_alpha``, ``B_-alpha``, ``d_p(0, .)`` over ``sqrt(2 n log log n)``.

    ``tau[i]``, ``varsigma[i]`` describe the walk at step ``n_first + i``.
    Steps below ``burn_in`` are ignored.  ``sups`` (length 3) carries the
    running sups in and out.  Returns ``(ck_sups, ck_vals)``, shape
    ``(len(ck_idx), 3)``: running sups and current normalised values at the
    local indices ``ck_idx``.
    """
    tau = np.asarray(tau, dtype=np.float64)
    vs = np.asarray(varsigma, dtype=np.float64)
    n = n_first + np.arange(tau.size, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.sqrt(2.0 * n * np.log(np.log(n)))
        lc = np.log(np.cos(vs))
        vals = np.stack([-(tau + lc), tau - lc, dist_from_origin_bipolar(tau, vs)], axis=1)
        ratio = vals / norm[:, None]
    active = n >= burn_in
    ratio_act = np.where(active[:, None], ratio, -np.inf)
    run = np.maximum.accumulate(ratio_act, axis=0)
    run = np.maximum(run, np.asarray(sups)[None, :])
    if tau.size:
        sups[:] = run[-1]
    ck_idx = np.asarray(ck_idx, dtype=np.int64)
    return run[ck_idx].copy(), ratio[ck_idx].copy()
