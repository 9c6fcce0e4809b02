"""The U-walk ``U_n(z) = g_{omega_n}(z)`` and the two-pencil Z-walk.

Both walks are carried in the bipolar chart of the pole pair: the U-walk
moves ``tau`` by ``omega_n`` and never changes ``varsigma``; the Z-walk
moves ``tau`` on heads and redraws ``varsigma`` on tails.  Records are
derived from ``(varsigma, tau)`` only, so they stay finite and accurate at
any distance from the origin.

Stream consumption (see :mod:`diskwalk.rng`) is the same for the scalar
step functions and the vectorised ensemble runner: the coin stream yields
one uniform per step, the step stream one uniform per heads, the arc
stream one uniform per tails (after one for a random ``varsigma_0``).
Scalar stepping and :func:`run_ensemble` therefore produce identical
paths for identical seeds.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from . import kernels
from .errors import ConfigError, PartialResultError, PoleSingularityError
from .geometry import (
    SATURATION_TAU,
    BipolarPoint,
    DiskPoint,
    Pole,
    _as_point,
    from_bipolar,
    from_bipolar_v,
    to_bipolar,
)
from .group import GroupElement, apply
from .laws import StepLaw, UniformX
from .rng import TrajectoryStreams

CHUNK = 1 << 20
HALF_PI = math.pi / 2

RECORD_FIELDS = (
    "traj", "n", "omega", "varsigma", "tau", "x", "y", "saturated",
    "busemann_plus", "busemann_minus", "dist_p",
)


def arc_from_uniform(u):
    """Map open uniforms to ``varsigma`` uniform on (-pi/2, pi/2)."""
    return u * math.pi - HALF_PI


def _saturated_point(varsigma, tau, alpha):
    with np.errstate(over="ignore", invalid="ignore"):
        _, dm, dp = from_bipolar_v(varsigma, tau, alpha)
    z = alpha if tau > 0 else -alpha
    return DiskPoint(z.real, z.imag, frame=(alpha, complex(dm), complex(dp)), saturated=True)


def _position(varsigma, tau, pole):
    if abs(tau) > SATURATION_TAU:
        return _saturated_point(varsigma, tau, pole.alpha)
    return from_bipolar(BipolarPoint(varsigma, tau, pole))


# -- U-walk -------------------------------------------------------------------


@dataclass(frozen=True)
class WalkState:
    """Running state of the U-walk: ``omega_n`` and the start point."""

    n: int = 0
    omega: float = 0.0
    pole: Pole = Pole()
    z0: DiskPoint = DiskPoint(0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "z0", _as_point(self.z0))
        if not math.isfinite(self.omega):
            raise ConfigError(f"omega must be finite, got {self.omega!r}")


def u_walk_step(state: WalkState, gamma: float) -> WalkState:
    """``omega_{n+1} = omega_n + gamma``."""
    return replace(state, n=state.n + 1, omega=state.omega + float(gamma))


def current_position(state: WalkState) -> DiskPoint:
    """``U_n(z0)``.

    Applies ``g_{omega_n}`` to ``z0``.  When ``|tau(z0) + omega_n| > 30``
    the point is built from its bipolar coordinates instead and returned
    at the pole with ``saturated=True``.

    Raises
    ------
    PoleSingularityError
        If ``z0`` is one of the poles.
    """
    b = to_bipolar(state.z0, state.pole)
    tau = b.tau + state.omega
    if abs(tau) > SATURATION_TAU:
        return _saturated_point(b.varsigma, tau, state.pole.alpha)
    return apply(GroupElement(state.omega, state.pole), state.z0)


# -- Z-walk -------------------------------------------------------------------


@dataclass(frozen=True)
class ZWalkState:
    """Running state of the two-pencil walk.

    ``omega_tilde`` is the sum of the ``gamma`` draws on heads, ``S`` the
    number of heads, ``varsigma`` the current arc.  The position is
    ``(varsigma, tau0 + omega_tilde)`` in bipolar coordinates.
    """

    n: int = 0
    S: int = 0
    omega_tilde: float = 0.0
    varsigma: float = 0.0
    tau0: float = 0.0
    p: float = 0.5
    pole: Pole = Pole()

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p={self.p!r} must lie in (0, 1]")
        if not -HALF_PI <= self.varsigma <= HALF_PI:
            raise ConfigError(f"varsigma={self.varsigma!r} outside [-pi/2, pi/2]")
        if not 0 <= self.S <= self.n:
            raise ConfigError("S must satisfy 0 <= S <= n")

    @property
    def tau(self) -> float:
        return self.tau0 + self.omega_tilde


def z_walk_step(state: ZWalkState, streams: TrajectoryStreams, law: StepLaw, *,
                coin=None, gamma=None, arc=None) -> ZWalkState:
    """One step: heads moves along the arc by a fresh ``gamma``, tails redraws the arc.

    ``coin``, ``gamma`` and ``arc`` override the corresponding draw (the
    stream is then not consumed for that draw).
    """
    if coin is None:
        coin = int(streams.coins.uniform() < state.p)
    if coin:
        if gamma is None:
            gamma = float(law.gamma(streams.steps.uniform()))
        return replace(state, n=state.n + 1, S=state.S + 1,
                       omega_tilde=state.omega_tilde + float(gamma))
    if arc is None:
        arc = arc_from_uniform(streams.arcs.uniform())
    return replace(state, n=state.n + 1, varsigma=float(arc))


def z_current_position(state: ZWalkState) -> DiskPoint:
    """``Z_n`` from ``(varsigma_n, tau0 + omega_tilde_n)``; saturated beyond ``|tau| > 30``."""
    return _position(state.varsigma, state.tau, state.pole)


# -- ensembles ----------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of an ensemble run.

    ``z0`` is the start of the U-walk; ``tau0`` and ``varsigma0`` start the
    Z-walk.  ``varsigma0="uniform"`` draws it from the arc stream.
    """

    trajectories: int
    steps: int
    seed: int
    record_stride: int = 1
    law: StepLaw = field(default_factory=UniformX)
    p: float = 0.5
    tau0: float = 0.0
    varsigma0: object = "uniform"
    z0: complex = 0j
    pole: Pole = Pole()

    def __post_init__(self):
        if int(self.trajectories) < 1:
            raise ConfigError("trajectories must be >= 1")
        if int(self.steps) < 0:
            raise ConfigError("steps must be >= 0")
        if int(self.record_stride) < 1:
            raise ConfigError("record_stride must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p={self.p!r} must lie in (0, 1]")
        if not math.isfinite(self.tau0):
            raise ConfigError("tau0 must be finite")
        if self.varsigma0 != "uniform":
            try:
                v = float(self.varsigma0)
            except (TypeError, ValueError):
                raise ConfigError("varsigma0 must be 'uniform' or a number") from None
            if not -HALF_PI <= v <= HALF_PI:
                raise ConfigError(f"varsigma0={v!r} outside [-pi/2, pi/2]")
            object.__setattr__(self, "varsigma0", v)
        if not isinstance(self.pole, Pole):
            object.__setattr__(self, "pole", Pole(self.pole))
        object.__setattr__(self, "z0", complex(self.z0))
        DiskPoint.from_complex(self.z0)


class TrajectoryRecord(NamedTuple):
    traj: int
    n: int
    omega: float
    varsigma: float
    tau: float
    x: float
    y: float
    saturated: bool
    busemann_plus: float
    busemann_minus: float
    dist_p: float


@dataclass
class RecordBlock:
    """Columnar records of one trajectory, ordered by ``n``."""

    traj: int
    n: np.ndarray
    omega: np.ndarray
    varsigma: np.ndarray
    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    saturated: np.ndarray
    busemann_plus: np.ndarray
    busemann_minus: np.ndarray
    dist_p: np.ndarray

    def __len__(self):
        return len(self.n)

    def __iter__(self) -> Iterator[TrajectoryRecord]:
        cols = [getattr(self, k).tolist() for k in RECORD_FIELDS[1:]]
        for row in zip(*cols):
            yield TrajectoryRecord(self.traj, row[0], *row[1:6], bool(row[6]), *row[7:])

    def last(self) -> TrajectoryRecord:
        return TrajectoryRecord(self.traj, *(getattr(self, k)[-1].item() for k in RECORD_FIELDS[1:7]),
                                bool(self.saturated[-1]),
                                *(getattr(self, k)[-1].item() for k in RECORD_FIELDS[8:]))

    @classmethod
    def from_records(cls, traj, records):
        records = list(records)
        cols = {k: np.array([getattr(r, k) for r in records], dtype=float)
                for k in RECORD_FIELDS[2:]}
        cols["saturated"] = cols["saturated"].astype(bool)
        return cls(traj, np.array([r.n for r in records], dtype=np.int64), **cols)


class EnsembleResult:
    """Trajectory blocks in trajectory order; iterating yields records by ``(traj, n)``."""

    def __init__(self, blocks, kind):
        self.blocks = list(blocks)
        self.kind = kind

    def __iter__(self):
        for b in self.blocks:
            yield from b

    def __len__(self):
        return sum(len(b) for b in self.blocks)


def record_steps(steps: int, stride: int) -> np.ndarray:
    """Recorded step numbers: multiples of ``stride`` plus the final step."""
    ns = np.arange(stride, steps + 1, stride, dtype=np.int64)
    if ns.size == 0 or ns[-1] != steps:
        ns = np.append(ns, np.int64(steps))
    return ns


def make_block(traj, ns, omega, varsigma, tau, pole: Pole) -> RecordBlock:
    """Assemble records from bipolar coordinates; rotates Cartesian output by ``alpha``."""
    x, y, sat, bp, bm, d = kernels.record_fields(tau, varsigma, SATURATION_TAU)
    alpha = pole.alpha
    if alpha != 1:
        z = alpha * (x + 1j * y)
        x, y = z.real.copy(), z.imag.copy()
    return RecordBlock(traj, np.asarray(ns, dtype=np.int64), np.asarray(omega, dtype=float),
                       np.asarray(varsigma, dtype=float), np.asarray(tau, dtype=float),
                       x, y, sat.astype(bool), bp, bm, d)


def start_bipolar(z0, pole: Pole):
    """``(varsigma, tau)`` of the U-walk start point."""
    try:
        b = to_bipolar(z0, pole)
    except PoleSingularityError:
        raise ConfigError("z0 must not be a pole") from None
    return b.varsigma, b.tau


def u_trajectory(cfg: EnsembleConfig, traj: int) -> RecordBlock:
    streams = TrajectoryStreams(cfg.seed, traj)
    vs0, tau0 = start_bipolar(cfg.z0, cfg.pole)
    ns = record_steps(cfg.steps, cfg.record_stride)
    omega = np.empty(ns.size)
    if cfg.steps == 0:
        omega[:] = 0.0
    carry, done, k = 0.0, 0, 0
    while done < cfg.steps:
        m = min(CHUNK, cfg.steps - done)
        path = kernels.partial_sums(cfg.law.gamma(streams.steps.uniform(m)), carry)
        carry = path[-1]
        hi = np.searchsorted(ns, done + m, side="right")
        omega[k:hi] = path[ns[k:hi] - done - 1]
        k, done = hi, done + m
    tau = tau0 + omega
    varsigma = np.full(ns.size, vs0)
    return make_block(traj, ns, omega, varsigma, tau, cfg.pole)


def z_trajectory(cfg: EnsembleConfig, traj: int) -> RecordBlock:
    streams = TrajectoryStreams(cfg.seed, traj)
    if cfg.varsigma0 == "uniform":
        vs = float(arc_from_uniform(streams.arcs.uniform()))
    else:
        vs = float(cfg.varsigma0)
    ns = record_steps(cfg.steps, cfg.record_stride)
    omega = np.zeros(ns.size)
    varsigma = np.full(ns.size, vs)
    w, done, k = 0.0, 0, 0
    while done < cfg.steps:
        m = min(CHUNK, cfg.steps - done)
        coins = (streams.coins.uniform(m) < cfg.p).astype(np.uint8)
        heads = int(coins.sum())
        gammas = cfg.law.gamma(streams.steps.uniform(heads))
        arcs = arc_from_uniform(streams.arcs.uniform(m - heads))
        om, vv = kernels.z_walk_path(coins, gammas, arcs, w, vs)
        w, vs = om[-1], vv[-1]
        hi = np.searchsorted(ns, done + m, side="right")
        idx = ns[k:hi] - done - 1
        omega[k:hi] = om[idx]
        varsigma[k:hi] = vv[idx]
        k, done = hi, done + m
    tau = cfg.tau0 + omega
    return make_block(traj, ns, omega, varsigma, tau, cfg.pole)


def run_ensemble(cfg: EnsembleConfig, kind: str = "u", workers: int | None = 1) -> EnsembleResult:
    """Simulate ``cfg.trajectories`` independent walks.

    Parameters
    ----------
    kind : {"u", "z"}
        U-walk from ``cfg.z0`` or Z-walk from ``(cfg.varsigma0, cfg.tau0)``.
    workers : int or None
        Thread count; ``None`` uses every CPU.  Results do not depend on it.

    Raises
    ------
    PartialResultError
        On memory exhaustion; ``completed`` counts the leading trajectories
        that finished.
    """
    kind = kind.lower()
    if kind not in ("u", "z"):
        raise ConfigError(f"kind must be 'u' or 'z', got {kind!r}")
    fn = u_trajectory if kind == "u" else z_trajectory
    if kind == "u":
        start_bipolar(cfg.z0, cfg.pole)
    workers = (os.cpu_count() or 1) if workers is None else max(1, int(workers))
    ids = range(cfg.trajectories)
    blocks = []
    try:
        if workers == 1 or cfg.trajectories == 1:
            for t in ids:
                blocks.append(fn(cfg, t))
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for b in pool.map(lambda t: fn(cfg, t), ids):
                    blocks.append(b)
    except MemoryError:
        raise PartialResultError(
            f"out of memory after {len(blocks)} of {cfg.trajectories} trajectories",
            completed=len(blocks),
        ) from None
    return EnsembleResult(blocks, kind)
