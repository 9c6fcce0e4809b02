"""Estimators and Monte Carlo checks of the walk's limit behaviour.

Every statistic is evaluated from bipolar coordinates, where

* ``B_alpha = -(tau + log cos varsigma)``, ``B_-alpha = tau - log cos varsigma``,
* ``log|z - eps*alpha| = log 2 - log|1 + exp(eps*tau + i*varsigma)|``,
* ``cosh d_p(0, z) = cosh tau / cos varsigma``,

so nothing underflows however far the walk has gone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import kernels
from .errors import ConfigError, NotApplicableError, PreconditionError
from .geometry import Pole, dist_from_origin_bipolar, log_pole_distance, to_bipolar_v
from .laws import StepLaw
from .rng import TrajectoryStreams
from .walk import (
    CHUNK,
    EnsembleConfig,
    RecordBlock,
    TrajectoryRecord,
    arc_from_uniform,
    run_ensemble,
    start_bipolar,
)

LIL_BURN_IN = 1000


# -- moments ------------------------------------------------------------------


@dataclass(frozen=True)
class Moments:
    mean: float
    var: float
    error: float
    second: float
    divergent: bool = False

    def __iter__(self):
        # unpacks as (mean, var, error)
        return iter((self.mean, self.var, self.error))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.second) if math.isfinite(self.second) else math.inf


def _gamma_x(x):
    return math.log1p(x) - math.log1p(-x)


def step_law_moments(law: StepLaw) -> Moments:
    """``E(gamma)`` and ``Var(gamma)`` by adaptive quadrature over the law's pieces.

    ``gamma(x)`` has log singularities at ``x = +-1``; each piece is split at
    0 so that QUADPACK's endpoint extrapolation sees one singular end.  A
    quadrature failure marks the moments ``divergent`` instead of raising.
    """
    segments, atoms = law.pieces()
    m1 = m2 = err = 0.0
    divergent = False
    for lo, hi, dens in segments:
        cuts = [lo, hi] if (lo >= 0.0 or hi <= 0.0) else [lo, 0.0, hi]
        for a, b in zip(cuts[:-1], cuts[1:]):
            for k in (1, 2):
                val, e, *info = integrate.quad(
                    lambda x: _gamma_x(x) ** k * dens(x), a, b,
                    epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1)
                if len(info) > 1 and not math.isfinite(val):
                    divergent = True
                if k == 1:
                    m1 += val
                else:
                    m2 += val
                err += e
    for x, mass in atoms:
        g = _gamma_x(x) if abs(x) < 1.0 else math.copysign(math.inf, x)
        m1 += mass * g
        m2 += mass * g * g
    if not (math.isfinite(m1) and math.isfinite(m2)):
        divergent = True
    var = m2 - m1 * m1 if not divergent else math.inf
    return Moments(float(m1), float(max(var, 0.0)), float(err), float(m2), divergent)


def epsilon_x(moments: Moments) -> int:
    """Sign of ``E(gamma)``, zero when the mean is within its error bar."""
    if abs(moments.mean) <= max(moments.error, 1e-12):
        return 0
    return 1 if moments.mean > 0 else -1


# -- escape rates -------------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    n: int
    busemann_rate: float
    distance_rate: float
    euclid_log_rate: float
    epsilon_x: int
    expected_rate: float
    omega_rate: float = math.nan
    distance_bound: float = math.nan

    def as_dict(self):
        return dict(self.__dict__)


def _final_record(records) -> TrajectoryRecord:
    if isinstance(records, TrajectoryRecord):
        return records
    if isinstance(records, RecordBlock):
        return records.last()
    if hasattr(records, "blocks"):
        return records.blocks[0].last()
    seq = list(records)
    if not seq:
        raise ConfigError("no records")
    return seq[-1]


def rates_from_bipolar(n, omega, varsigma, tau, eps):
    """``(busemann_rate, distance_rate, euclid_log_rate)`` at step ``n``."""
    lc = math.log(math.cos(varsigma))
    b = -(tau + lc) if eps > 0 else tau - lc
    d = float(dist_from_origin_bipolar(tau, varsigma))
    e = float(log_pole_distance(tau, varsigma, eps))
    return b / n, d / n, e / n


def escape_rate(records, law: StepLaw, p: float = 1.0, d0: float = math.nan) -> RateReport:
    """Escape rates from the last record of a run.

    ``p`` scales the expected rate for the Z-walk.  ``d0 = d_p(0, z0)``, when
    given, is reported as ``d0/n``, the exact bound on
    ``|distance_rate - |omega_n|/n|``.

    Raises
    ------
    NotApplicableError
        When ``E(gamma) = 0``; use :func:`oscillation_check`.
    """
    mom = step_law_moments(law)
    eps = epsilon_x(mom)
    if eps == 0:
        raise NotApplicableError("E(gamma) = 0: no escape rate; see oscillation_check")
    r = _final_record(records)
    if r.n < 1:
        raise PreconditionError("need at least one step")
    b, d, e = rates_from_bipolar(r.n, r.omega, r.varsigma, r.tau, eps)
    return RateReport(r.n, b, d, e, eps, p * abs(mom.mean), abs(r.omega) / r.n, d0 / r.n)


def z_rate_report(cfg: EnsembleConfig, trajectory: int = 0) -> RateReport:
    """Escape rates of the Z-walk; the expected rate is ``p * |E(gamma)|``."""
    one = EnsembleConfig(1, cfg.steps, cfg.seed, cfg.steps or 1, cfg.law, cfg.p,
                         cfg.tau0, cfg.varsigma0, cfg.z0, cfg.pole)
    if trajectory:
        from .walk import z_trajectory
        block = z_trajectory(one, trajectory)
    else:
        block = run_ensemble(one, "z").blocks[0]
    return escape_rate(block, cfg.law, p=cfg.p)


def disk_grid(delta: float, count: int) -> np.ndarray:
    """At least ``count`` points of the closed disk at Euclidean distance >= ``delta`` from ``+-1``.

    A sunflower lattice of the disk plus points on the unit circle.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    golden = math.pi * (3.0 - math.sqrt(5.0))
    m = max(count, 8)
    while True:
        k = np.arange(m)
        r = np.sqrt((k + 0.5) / m)
        inner = r * np.exp(1j * golden * k)
        rim = np.exp(2j * math.pi * (np.arange(m // 4) + 0.5) / (m // 4))
        pts = np.concatenate([inner, rim])
        pts = pts[(np.abs(pts - 1) >= delta) & (np.abs(pts + 1) >= delta)]
        if pts.size >= count:
            return pts
        m = int(m * 1.5) + 1


def grid_log_distances(points, omega, eps):
    """``log|U_n(z) - eps*alpha|`` at every grid point ``z`` (given in the ``alpha = 1`` frame)."""
    pts = np.asarray(points, dtype=complex)
    vs, tau = to_bipolar_v(pts - 1.0, pts + 1.0)
    return log_pole_distance(tau + omega, vs, eps)


def uniform_escape_rate(law: StepLaw, delta: float = 0.1, grid: int = 100, n: int = 100_000,
                        seed: int = 0, trajectory: int = 0, return_grid: bool = False):
    """``(1/n) log sup_z |U_n(z) - eps_x alpha|`` over a grid of the trimmed closed disk.

    All grid points share one ``omega`` path.
    """
    mom = step_law_moments(law)
    eps = epsilon_x(mom)
    if eps == 0:
        raise NotApplicableError("E(gamma) = 0: no escape rate; see oscillation_check")
    pts = disk_grid(delta, grid)
    omega = walk_omega(law, n, seed, trajectory)
    logs = grid_log_distances(pts, omega, eps)
    rate = float(np.max(logs)) / n
    if return_grid:
        return rate, logs / n
    return rate


def walk_omega(law: StepLaw, n: int, seed: int, trajectory: int = 0) -> float:
    """``omega_n`` of the U-walk for one trajectory stream."""
    cfg = EnsembleConfig(1, n, seed, max(n, 1), law)
    from .walk import u_trajectory
    return float(u_trajectory(cfg, trajectory).omega[-1])


def sandwich_check(records, eps: int = 1, tol: float = 1e-12):
    """Check ``|z_- - eps a| <= |z - eps a| <= |z_+ - eps a|`` on Z-walk records.

    ``z_-`` and ``z_+`` share ``tau`` with the record and sit at
    ``varsigma = 0`` and ``varsigma = pi/2``.  Returns ``(ok, worst_violation)``.
    """
    if isinstance(records, RecordBlock):
        tau, vs = records.tau, records.varsigma
    else:
        rs = list(records)
        tau = np.array([r.tau for r in rs])
        vs = np.array([r.varsigma for r in rs])
    mid = log_pole_distance(tau, vs, eps)
    lo = log_pole_distance(tau, 0.0, eps)
    hi = log_pole_distance(tau, math.pi / 2, eps)
    worst = float(max(np.max(lo - mid, initial=-np.inf), np.max(mid - hi, initial=-np.inf)))
    return worst <= tol, worst


# -- CLT ----------------------------------------------------------------------


@dataclass(frozen=True)
class TailRow:
    s: float
    p_plus: float   # P((1/a_n) log|U_n + alpha| < -s)
    p_minus: float  # P((1/a_n) log|U_n - alpha| < -s)
    target: float   # Phi(-s/sigma)


@dataclass(frozen=True)
class CltReport:
    n: int
    replicas: int
    a_n: float
    sigma: float
    sigma_hat: float
    ks_statistic: float
    ks_pvalue: float
    table: list = field(default_factory=list)

    def as_dict(self):
        d = dict(self.__dict__)
        d["table"] = [dict(r.__dict__) for r in self.table]
        return d


def clt_report(law: StepLaw, n: int, replicas: int, thresholds=(1.0, 2.0, 3.0), *,
               seed: int, z0=0j, pole: Pole = Pole(), workers=1) -> CltReport:
    """Compare ``omega_n / sqrt(n)`` and the log pole distances with ``Normal(0, sigma^2)``.

    Raises
    ------
    PreconditionError
        If the law has a detectable drift or infinite variance.
    """
    mom = step_law_moments(law)
    if mom.divergent or not math.isfinite(mom.var):
        raise PreconditionError("the step law has infinite variance")
    sigma = math.sqrt(mom.var)
    if abs(mom.mean) >= 3.0 * sigma / math.sqrt(n * replicas) and abs(mom.mean) > mom.error:
        raise PreconditionError(f"E(gamma)={mom.mean:.3g} is not zero at this sample size")
    cfg = EnsembleConfig(replicas, n, seed, n, law, z0=z0, pole=pole)
    res = run_ensemble(cfg, "u", workers=workers)
    omega = np.array([b.omega[-1] for b in res.blocks])
    tau = np.array([b.tau[-1] for b in res.blocks])
    vs = np.array([b.varsigma[-1] for b in res.blocks])
    a_n = math.sqrt(n)
    ks = stats.kstest(omega / a_n, "norm", args=(0.0, sigma))
    lp = log_pole_distance(tau, vs, -1) / a_n
    lm = log_pole_distance(tau, vs, 1) / a_n
    table = [TailRow(float(s), float(np.mean(lp < -s)), float(np.mean(lm < -s)),
                     float(stats.norm.cdf(-s / sigma))) for s in thresholds]
    return CltReport(n, replicas, a_n, sigma, float(np.std(omega) / a_n),
                     float(ks.statistic), float(ks.pvalue), table)


# -- oscillation --------------------------------------------------------------


@dataclass(frozen=True)
class OscillationReport:
    n: int
    max_omega: float
    min_omega: float
    sign_changes: int
    threshold: float
    passed: bool
    oracle_probability: float


def oscillation_oracle(threshold: float, sigma: float, n: int) -> float:
    """Reflection-principle probability that a driftless walk exceeds ``+threshold`` and ``-threshold``.

    ``P(max > a) = 2(1 - Phi(a / (sigma sqrt n)))`` per side; the joint event
    is approximated by ``1 - 2 P(max <= a)``, exact up to the probability of
    never leaving ``[-a, a]``.
    """
    if sigma == 0:
        return 0.0
    miss = 2.0 * stats.norm.cdf(threshold / (sigma * math.sqrt(n))) - 1.0
    return max(0.0, 1.0 - 2.0 * miss)


def omega_extremes(gammas_chunks):
    """Max, min and sign changes of the partial sums of a chunked sequence."""
    carry, mx, mn, flips, last_sign = 0.0, 0.0, 0.0, 0, 0
    for g in gammas_chunks:
        path = kernels.partial_sums(g, carry)
        if path.size == 0:
            continue
        carry = path[-1]
        mx, mn = max(mx, float(path.max())), min(mn, float(path.min()))
        sg = np.sign(path)
        sg = sg[sg != 0]
        if sg.size:
            if last_sign and sg[0] != last_sign:
                flips += 1
            flips += int(np.count_nonzero(sg[1:] != sg[:-1]))
            last_sign = sg[-1]
    return mx, mn, flips


def law_gamma_chunks(law: StepLaw, n: int, streams: TrajectoryStreams):
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        yield law.gamma(streams.steps.uniform(m))
        done += m


def oscillation_check(law: StepLaw, n: int, threshold: float | None = None, *,
                      seed: int, trajectory: int = 0, factor: float = 0.2) -> OscillationReport:
    """Extremes of ``omega_k = tau(U_k(z)) - tau(z)`` over ``k <= n``.

    Passes when ``max > threshold`` and ``min < -threshold``; the default
    threshold is ``factor * sigma * sqrt(n)``.

    Raises
    ------
    NotApplicableError
        If the law has a drift.
    """
    mom = step_law_moments(law)
    if epsilon_x(mom) != 0:
        raise NotApplicableError("E(gamma) != 0: the walk escapes; see escape_rate")
    sigma = math.sqrt(mom.var)
    if threshold is None:
        threshold = factor * sigma * math.sqrt(n)
    streams = TrajectoryStreams(seed, trajectory)
    mx, mn, flips = omega_extremes(law_gamma_chunks(law, n, streams))
    return OscillationReport(n, mx, mn, flips, float(threshold),
                             bool(mx > threshold and mn < -threshold),
                             oscillation_oracle(threshold, sigma, n))


# -- LIL ----------------------------------------------------------------------


@dataclass(frozen=True)
class LilCheckpoint:
    n: int
    sup_bplus: float
    sup_bminus: float
    sup_dist: float
    bplus: float
    bminus: float
    dist: float
    pair_gap: float
    pair_bound: float


@dataclass(frozen=True)
class LilReport:
    checkpoints: list
    normalizer: str
    sigma: float
    scale: float
    ratio: float
    paper_phi_ratio: float
    burn_in: int
    pairs_ok: bool

    def as_dict(self):
        d = dict(self.__dict__)
        d["checkpoints"] = [dict(c.__dict__) for c in self.checkpoints]
        return d


def lil_norm(n):
    return np.sqrt(2.0 * n * np.log(np.log(n)))


def geometric_checkpoints(n_max: int, burn_in: int):
    pts = set()
    k = 1
    while k <= n_max:
        for m in (1, 2, 5):
            if burn_in <= m * k <= n_max:
                pts.add(m * k)
        k *= 10
    pts.add(n_max)
    return np.array(sorted(pts), dtype=np.int64)


def lil_scan_path(path_chunks, checkpoints, *, burn_in=LIL_BURN_IN, d0=0.0, slack=1e-9):
    """Running LIL statistics over chunks of ``(tau, varsigma)`` starting at step 1.

    Returns the list of :class:`LilCheckpoint`.  ``pair_gap`` is the largest
    pairwise difference of the normalised ``|B_alpha|``, ``|B_-alpha|`` and
    ``d_p`` at that step; ``pair_bound`` is ``2 d0 / norm(n)`` plus ``slack``.
    """
    sups = np.full(3, -np.inf)
    out, first = [], 1
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    for tau, vs in path_chunks:
        m = len(tau)
        sel = checkpoints[(checkpoints >= first) & (checkpoints < first + m)]
        cs, cv = kernels.lil_scan(tau, vs, first, burn_in, sups, sel - first)
        for n, s, v in zip(sel.tolist(), cs, cv):
            a = np.abs(v)
            gap = float(max(abs(a[0] - a[1]), abs(a[0] - a[2]), abs(a[1] - a[2])))
            bound = 2.0 * d0 / float(lil_norm(n)) + slack
            out.append(LilCheckpoint(n, *map(float, s), *map(float, v), gap, bound))
        first += m
    return out


def _u_path_chunks(law, n_max, streams, tau0, vs0):
    carry = 0.0
    for g in law_gamma_chunks(law, n_max, streams):
        om = kernels.partial_sums(g, carry)
        carry = om[-1]
        yield tau0 + om, np.full(om.size, vs0)


def _z_path_chunks(law, n_max, streams, p, tau0, vs0):
    w, vs, done = 0.0, vs0, 0
    while done < n_max:
        m = min(CHUNK, n_max - done)
        coins = (streams.coins.uniform(m) < p).astype(np.uint8)
        heads = int(coins.sum())
        gammas = law.gamma(streams.steps.uniform(heads))
        arcs = arc_from_uniform(streams.arcs.uniform(m - heads))
        om, vv = kernels.z_walk_path(coins, gammas, arcs, w, vs)
        w, vs = om[-1], vv[-1]
        done += m
        yield tau0 + om, vv


def lil_report(law: StepLaw, n_max: int, normalizer: str = "standard", *, seed: int,
               z0=0j, burn_in: int = LIL_BURN_IN, kind: str = "u", p: float = 1.0,
               tau0: float = 0.0, varsigma0=0.0, trajectory: int = 0) -> LilReport:
    """Running sups of ``B_alpha``, ``B_-alpha`` and ``d_p(0, .)`` over ``sqrt(2 n log log n)``.

    ``ratio`` is the final running sup of the distance statistic divided by
    ``sigma`` (U-walk) or ``sigma * sqrt(p)`` (Z-walk).  With
    ``normalizer="paper"`` the norm carries an extra ``sqrt(pi)``, so the
    reported ratio is the standard one divided by ``sqrt(pi)``.

    Raises
    ------
    PreconditionError
        For a drifting law, infinite variance or ``n_max < 10**4``.
    """
    if normalizer not in ("standard", "paper"):
        raise ConfigError("normalizer must be 'standard' or 'paper'")
    if n_max < 10_000:
        raise PreconditionError("n_max must be at least 10^4")
    if burn_in < 3:
        raise ConfigError("burn_in must be >= 3 so that log log n > 0")
    mom = step_law_moments(law)
    if epsilon_x(mom) != 0:
        raise PreconditionError("the LIL statistics need a mean-zero step law")
    if mom.divergent:
        raise PreconditionError("the step law has infinite variance")
    sigma = math.sqrt(mom.var)
    streams = TrajectoryStreams(seed, trajectory)
    if kind == "u":
        vs0, t0 = start_bipolar(z0, Pole())
        chunks = _u_path_chunks(law, n_max, streams, t0, vs0)
        scale = sigma
    elif kind == "z":
        if varsigma0 == "uniform":
            vs0 = float(arc_from_uniform(streams.arcs.uniform()))
        else:
            vs0 = float(varsigma0)
        t0 = tau0
        chunks = _z_path_chunks(law, n_max, streams, p, tau0, vs0)
        scale = sigma * math.sqrt(p)
    else:
        raise ConfigError("kind must be 'u' or 'z'")
    d0 = float(dist_from_origin_bipolar(t0, vs0))
    cps = lil_scan_path(chunks, geometric_checkpoints(n_max, burn_in), burn_in=burn_in, d0=d0)
    final = cps[-1].sup_dist / scale if scale > 0 else math.inf
    ratio = final if normalizer == "standard" else final / math.sqrt(math.pi)
    pairs_ok = all(c.pair_gap <= c.pair_bound for c in cps) if kind == "u" else True
    return LilReport(cps, normalizer, sigma, scale, ratio, final / math.sqrt(math.pi),
                     burn_in, pairs_ok)
