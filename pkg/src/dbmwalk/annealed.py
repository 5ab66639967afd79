"""Walks on a graph revealed edge-by-edge alongside the walker.

Instead of sampling a whole DBM graph first, the out-neighborhood of a
vertex is drawn the first time the walk stands on it (same law as the
quenched generator: per-pair Bernoulli targets without self loops, then
independent rewiring).  Revealed neighborhoods are cached, so revisits
reuse the same edges and the process is a faithful coupling of the
quenched walk with its environment: averaging the quenched path law
over graphs gives exactly this walk's path law.

Short-horizon identities (community marginals, jump survival) hold up
to corrections driven by the revisit probability, which is small while
t^2 is small against n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import DbmParams
from .meanfield import q_power_closed
from .rng import NS_ANNEALED, derived_rng

# Hard validity guard for the short-time laws; the useful window is much
# earlier (t of order sqrt(n) already sees revisit corrections).
T_GUARD_FACTOR = 10.0


@dataclass(frozen=True)
class AnnealedResult:
    """One revealed-graph walk.

    ``vertices`` holds X_0..X_t (shorter if the walk got stuck on a
    zero-out-degree reveal, with ``stuck`` set).  ``cycle_free`` means
    no vertex was visited twice; ``jump_time`` is the 1-based step that
    first traversed a rewired edge (None if none).
    """

    vertices: np.ndarray
    cycle_free: bool
    jump_time: int | None
    stuck: bool


class _Revealer:
    """Per-walk cache of revealed out-neighborhoods."""

    def __init__(self, params: DbmParams, rng: np.random.Generator) -> None:
        self.params = params
        self.rng = rng
        self.cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def neighborhood(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        hit = self.cache.get(v)
        if hit is not None:
            return hit
        prm = self.params
        n, m = prm.n, prm.m
        rng = self.rng
        comm, label = v // n, v % n
        d = int(rng.binomial(n - 1, prm.p))
        if d == 0:
            entry = (np.empty(0, dtype=np.int64), np.empty(0, dtype=bool))
            self.cache[v] = entry
            return entry
        # distinct target labels among the n-1 others, by rejection; dedup
        # must keep first-arrival order (sorted dedup would bias low labels)
        raw = rng.integers(0, n - 1, size=d + 4)
        while np.unique(raw).size < d:
            raw = np.concatenate([raw, rng.integers(0, n - 1, size=d)])
        _, first = np.unique(raw, return_index=True)
        labels = raw[np.sort(first)][:d]
        labels = labels + (labels >= label)  # skip self
        flags = rng.random(d) < prm.alpha
        targets = comm * n + labels
        k = int(np.count_nonzero(flags))
        if k:
            off = rng.integers(0, m - 1, size=k)
            other = off + (off >= comm)
            targets[flags] = other * n + labels[flags]
        entry = (targets, flags)
        self.cache[v] = entry
        return entry


def annealed_walk(
    params: DbmParams,
    start: int,
    t: int,
    rng: np.random.Generator,
    on_stuck: str = "raise",
) -> AnnealedResult:
    """Run one t-step walk on a graph revealed as it is explored.

    ``on_stuck`` is "raise" (error on a zero-out-degree reveal) or
    "truncate" (return the shorter path with the stuck flag set).
    """
    if on_stuck not in ("raise", "truncate"):
        raise ValueError("on_stuck must be 'raise' or 'truncate'")
    reveal = _Revealer(params, rng)
    vertices = [start]
    seen = {start}
    cycle_free = True
    jump_time = None
    cur = start
    for s in range(1, t + 1):
        targets, flags = reveal.neighborhood(cur)
        if targets.size == 0:
            if on_stuck == "raise":
                raise RuntimeError(f"walk stuck at sink vertex {cur} (step {s})")
            return AnnealedResult(
                vertices=np.array(vertices, dtype=np.int64),
                cycle_free=cycle_free,
                jump_time=jump_time,
                stuck=True,
            )
        k = int(rng.integers(0, targets.size))
        cur = int(targets[k])
        vertices.append(cur)
        if jump_time is None and bool(flags[k]):
            jump_time = s
        if cur in seen:
            cycle_free = False
        seen.add(cur)
    return AnnealedResult(
        vertices=np.array(vertices, dtype=np.int64),
        cycle_free=cycle_free,
        jump_time=jump_time,
        stuck=False,
    )


def _check_horizon(params: DbmParams, t: int) -> None:
    cap = T_GUARD_FACTOR * math.sqrt(params.n)
    if t > cap:
        raise ValueError(
            f"horizon {t} is far outside the short-time window (cap {cap:.0f} "
            f"for n={params.n}); the identities checked here need t^2 << n"
        )


@dataclass(frozen=True)
class CommunityLaw:
    """Monte Carlo community marginal of the revealed walk at time t.

    ``joint`` estimates P(X_t in community i, no revisit by t); the
    ``conditional`` row renormalizes within the no-revisit runs, which
    cancels the common revisit deficit when comparing to the community
    mean-field row ``q_row``.  Runs that hit a zero-out-degree reveal
    count as failures next to the revisiting ones.
    """

    t: int
    start: int
    joint: np.ndarray
    joint_se: np.ndarray
    conditional: np.ndarray
    conditional_se: np.ndarray
    q_row: np.ndarray
    cycle_free_rate: float
    reps: int


def annealed_community_law(
    params: DbmParams, start: int, t: int, reps: int, seed: int
) -> CommunityLaw:
    """Estimate where the revealed walk sits at time t, community-wise."""
    _check_horizon(params, t)
    rng = derived_rng(seed, NS_ANNEALED, 0)
    m = params.m
    joint_counts = np.zeros(m, dtype=np.int64)
    cf_counts = np.zeros(m, dtype=np.int64)
    n_cf = 0
    for _ in range(reps):
        res = annealed_walk(params, start, t, rng, on_stuck="truncate")
        if res.stuck:
            continue
        comm = int(res.vertices[-1]) // params.n
        if res.cycle_free:
            n_cf += 1
            joint_counts[comm] += 1
            cf_counts[comm] += 1
    joint = joint_counts / reps
    joint_se = np.sqrt(np.maximum(joint * (1 - joint), 1e-300) / reps)
    if n_cf == 0:
        raise RuntimeError("no cycle-free runs; horizon too long for this n")
    cond = cf_counts / n_cf
    cond_se = np.sqrt(np.maximum(cond * (1 - cond), 1e-300) / n_cf)
    q_row = np.array(
        [q_power_closed(m, params.alpha, t, start // params.n, j) for j in range(m)]
    )
    return CommunityLaw(
        t=t,
        start=start,
        joint=joint,
        joint_se=joint_se,
        conditional=cond,
        conditional_se=cond_se,
        q_row=q_row,
        cycle_free_rate=n_cf / reps,
        reps=reps,
    )


@dataclass(frozen=True)
class JumpSurvival:
    """Empirical survival of the first rewired-edge time."""

    times: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    theory: np.ndarray
    reps: int


def annealed_jump_survival(
    params: DbmParams, t_max: int, reps: int, seed: int, start: int = 0
) -> JumpSurvival:
    """Estimate P(tau_jump > t) for t = 0..t_max on the revealed walk.

    Freshly revealed steps jump independently with probability alpha, so
    the reference curve is (1 - alpha)^t; revisited edges introduce the
    usual short-horizon corrections.
    """
    _check_horizon(params, t_max)
    rng = derived_rng(seed, NS_ANNEALED, 1)
    exceed = np.zeros(t_max + 1, dtype=np.int64)  # exceed[t] = #{tau > t}
    for _ in range(reps):
        res = annealed_walk(params, start, t_max, rng, on_stuck="truncate")
        tau = res.jump_time if res.jump_time is not None else t_max + 1
        exceed[: min(tau, t_max + 1)] += 1
    survival = exceed / reps
    stderr = np.sqrt(np.maximum(survival * (1 - survival), 1e-300) / reps)
    times = np.arange(t_max + 1)
    theory = (1.0 - params.alpha) ** times
    return JumpSurvival(
        times=times, survival=survival, stderr=stderr, theory=theory, reps=reps
    )
