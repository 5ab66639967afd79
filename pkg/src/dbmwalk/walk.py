"""Simple random walk machinery on DBM graphs.

Distributions are row vectors evolved by mu -> mu P where P(x, y) =
1/deg_out(x) on every edge (x, y).  The transition operator is kept as a
cached scipy CSR matrix (transposed, so evolution is a CSR matvec).  All
samplers draw from explicit generators or derived streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.stats import binom

from .graph import DegreeTable, Digraph, pre_rewiring_subgraph
from .rng import NS_TRAJECTORY, derived_rng

STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITER = 10**6


@dataclass(frozen=True)
class ProbVector:
    """A probability distribution over a vertex domain.

    ``domain`` is "global" for the full vertex set or "community:<i>" for
    a single community indexed by labels 0..n-1.  ``flags`` records
    solver fallbacks (e.g. "not_strongly_connected").
    """

    values: np.ndarray
    domain: str = "global"
    flags: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def check(self, atol: float = 1e-12) -> None:
        if np.any(self.values < -1e-15):
            raise AssertionError("negative probability entry")
        s = float(self.values.sum())
        if abs(s - 1.0) > atol:
            raise AssertionError(f"probabilities sum to {s}, not 1")

    @staticmethod
    def delta(size: int, v: int, domain: str = "global") -> "ProbVector":
        values = np.zeros(size)
        values[v] = 1.0
        return ProbVector(values, domain)

    @staticmethod
    def uniform(size: int, domain: str = "global") -> "ProbVector":
        return ProbVector(np.full(size, 1.0 / size), domain)


@dataclass(frozen=True)
class Trajectory:
    """One sampled walk: visited vertices, log path mass, first jump time.

    ``log_mass`` is the log-probability of the realized path, i.e. minus
    the sum of log out-degrees along it.  ``jump_time`` is the 1-based
    step at which a rewired edge was first traversed (None if never).
    """

    vertices: np.ndarray
    log_mass: float
    jump_time: int | None


@dataclass(frozen=True)
class EntropyResult:
    """Empirical mean log out-degree and the derived time scale."""

    h: float
    t_ent: float
    h_analytic: float | None
    h_first_order: float


@dataclass
class MixingProfile:
    """Total-variation distance to a reference at recorded times."""

    times: np.ndarray
    per_start: np.ndarray  # shape (n_starts, n_times)
    starts: np.ndarray
    aggregation: str = "max"
    reference_label: str = "stationary"

    @property
    def distances(self) -> np.ndarray:
        if self.aggregation == "max":
            return self.per_start.max(axis=0)
        if self.aggregation == "mean":
            return self.per_start.mean(axis=0)
        raise ValueError(f"unknown aggregation {self.aggregation!r}")


def transition_operator(graph: Digraph) -> csr_matrix:
    """Transposed walk kernel P^T as CSR (cached on the graph)."""
    if "PT" not in graph._cache:
        n = graph.vertex_count
        src = graph.sources()
        deg = graph.out_degree
        data = 1.0 / deg[src]
        pt = csr_matrix((data, (graph.targets, src)), shape=(n, n))
        graph._cache["PT"] = pt
    return graph._cache["PT"]


def _sink_mask(graph: Digraph) -> np.ndarray:
    if "sinks" not in graph._cache:
        graph._cache["sinks"] = graph.out_degree == 0
    return graph._cache["sinks"]


def _check_no_sink_mass(graph: Digraph, values: np.ndarray) -> None:
    sinks = _sink_mask(graph)
    if sinks.any() and float(values[sinks].sum()) > 0.0:
        v = int(np.flatnonzero(sinks & (values > 0))[0])
        raise ValueError(f"distribution puts mass on sink vertex {v}")


def step_distribution(graph: Digraph, mu: ProbVector) -> ProbVector:
    """One step of the walk: mu P."""
    if mu.size != graph.vertex_count:
        raise ValueError("distribution length does not match graph")
    _check_no_sink_mass(graph, mu.values)
    return ProbVector(transition_operator(graph) @ mu.values, mu.domain, mu.flags)


def evolve(graph: Digraph, mu: ProbVector, t: int) -> ProbVector:
    """t steps of the walk (t >= 0)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    out = mu
    for _ in range(t):
        out = step_distribution(graph, out)
    return out


def evolve_batch(graph: Digraph, columns: np.ndarray, t: int) -> np.ndarray:
    """Evolve several distributions at once (columns of an N x K array)."""
    pt = transition_operator(graph)
    _check_no_sink_mass(graph, columns.max(axis=1))
    out = columns
    for _ in range(t):
        out = pt @ out
    return out


def stationary(
    graph: Digraph,
    domain: str = "global",
    tol: float = STATIONARY_TOL,
    max_iter: int = STATIONARY_MAX_ITER,
) -> ProbVector:
    """Stationary distribution by power iteration on the half-lazy kernel.

    Iterates mu <- (mu + mu P) / 2 from uniform until the plain-kernel
    residual ||mu P - mu||_1 drops below ``tol``.  If the graph is not
    strongly connected the uniform distribution is returned with the
    flag "not_strongly_connected" attached instead.
    """
    n = graph.vertex_count
    if not graph.is_strongly_connected():
        return ProbVector(
            np.full(n, 1.0 / n), domain, flags=("not_strongly_connected",)
        )
    pt = transition_operator(graph)
    mu = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        stepped = pt @ mu
        residual = float(np.abs(stepped - mu).sum())
        if residual < tol:
            return ProbVector(mu, domain)
        mu = 0.5 * (mu + stepped)
    raise RuntimeError(
        f"stationary iteration did not reach residual {tol} in {max_iter} steps"
    )


def local_stationary(graph: Digraph, i: int) -> ProbVector:
    """Stationary distribution of community i's pre-rewiring graph."""
    sub = pre_rewiring_subgraph(graph, i)
    pi = stationary(sub, domain=f"community:{i}")
    return pi


def tv_distance(a: ProbVector, b: ProbVector) -> float:
    if a.domain != b.domain or a.size != b.size:
        raise ValueError(f"domain mismatch: {a.domain} vs {b.domain}")
    return 0.5 * float(np.abs(a.values - b.values).sum())


def restrict_normalize(mu: ProbVector, subset: np.ndarray) -> ProbVector:
    """Condition mu on a subset of its domain (zero elsewhere)."""
    mask = np.zeros(mu.size, dtype=bool)
    mask[subset] = True
    mass = float(mu.values[mask].sum())
    if mass <= 0.0:
        raise ValueError("cannot condition on a zero-mass subset")
    values = np.where(mask, mu.values, 0.0) / mass
    return ProbVector(values, mu.domain)


def community_mass(graph: Digraph, mu: ProbVector) -> np.ndarray:
    """Mass of each community under a global distribution."""
    if mu.domain != "global":
        raise ValueError("community_mass expects a global distribution")
    return mu.values.reshape(graph.m, graph.n).sum(axis=1)


def stationary_community_masses(graph: Digraph) -> np.ndarray:
    return community_mass(graph, stationary(graph))


@dataclass(frozen=True)
class IndegreeApproximation:
    """In-degree proxy for the local stationary distribution.

    ``raw`` is pre-rewiring in-degree / (p*n^2), whose scale error vs
    pi_i is part of the statement; ``approx`` renormalizes it.  When a
    reference pi_i is supplied, ``max_rel_err`` is max_x |raw/pi_i - 1|
    over the ``included`` vertices (zero in-degree vertices excluded).
    """

    approx: ProbVector
    raw: np.ndarray
    max_rel_err: float | None
    excluded: int


def indegree_approximation(
    graph: Digraph, table: DegreeTable, i: int, pi_local: ProbVector | None = None
) -> IndegreeApproximation:
    if graph.params is None:
        raise ValueError("needs model parameters for the p*n^2 scale")
    n = graph.n
    raw = table.d_in_intra[i * n : (i + 1) * n] / (graph.params.p * n * n)
    total = float(raw.sum())
    if total <= 0.0:
        raise ValueError("community has no intra in-edges")
    max_rel_err = None
    excluded = 0
    if pi_local is not None:
        if pi_local.domain != f"community:{i}":
            raise ValueError("reference must live on the same community")
        keep = raw > 0.0
        excluded = int(np.count_nonzero(~keep))
        ratios = raw[keep] / pi_local.values[keep]
        max_rel_err = float(np.abs(ratios - 1.0).max())
    return IndegreeApproximation(
        approx=ProbVector(raw / total, f"community:{i}"),
        raw=raw,
        max_rel_err=max_rel_err,
        excluded=excluded,
    )


def entropy_and_entropic_time(
    table: DegreeTable, n: int, p: float | None = None
) -> EntropyResult:
    """Mean log out-degree H and the time scale log(n)/H.

    H averages log(deg v 1) over all vertices.  When ``p`` is given the
    exact Binomial(n-1, p) expectation is computed alongside, plus the
    first-order value log(log(n)).
    """
    logs = np.log(np.maximum(table.d_out, 1))
    h = float(logs.mean())
    if h <= 0.0:
        raise ValueError("mean log out-degree is zero; no entropic time scale")
    analytic = None
    if p is not None:
        k = np.arange(n)
        pmf = binom.pmf(k, n - 1, p)
        analytic = float((pmf * np.log(np.maximum(k, 1))).sum())
    return EntropyResult(
        h=h,
        t_ent=math.log(n) / h,
        h_analytic=analytic,
        h_first_order=math.log(math.log(n)),
    )


def select_starts(
    graph: Digraph,
    rng: np.random.Generator,
    k: int = 64,
    exhaustive_limit: int = 2000,
) -> np.ndarray:
    """Start set for worst-case profiles.

    All vertices when the graph is small; otherwise k sampled vertices
    plus the out-degree extremes (slow and fast spreading witnesses).
    """
    n = graph.vertex_count
    if n <= exhaustive_limit:
        return np.arange(n, dtype=np.int64)
    sampled = rng.choice(n, size=min(k, n), replace=False)
    deg = graph.out_degree
    extra = np.array([int(deg.argmin()), int(deg.argmax())], dtype=np.int64)
    return np.unique(np.concatenate([sampled, extra]))


def mixing_profile(
    graph: Digraph,
    starts: np.ndarray,
    times: np.ndarray,
    reference: ProbVector,
    aggregation: str = "max",
) -> MixingProfile:
    """TV distance to ``reference`` from each start at the given times."""
    times = np.asarray(sorted(int(t) for t in times), dtype=np.int64)
    if times.size and times[0] < 0:
        raise ValueError("times must be non-negative")
    starts = np.asarray(starts, dtype=np.int64)
    n = graph.vertex_count
    cols = np.zeros((n, starts.size))
    cols[starts, np.arange(starts.size)] = 1.0
    ref = reference.values[:, None]
    per_start = np.zeros((starts.size, times.size))
    now = 0
    for j, t in enumerate(times):
        cols = evolve_batch(graph, cols, int(t - now))
        now = int(t)
        per_start[:, j] = 0.5 * np.abs(cols - ref).sum(axis=0)
    return MixingProfile(
        times=times,
        per_start=per_start,
        starts=starts,
        aggregation=aggregation,
        reference_label="stationary",
    )


def _step_walkers(
    graph: Digraph, current: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Advance every walker one step; returns (next vertices, rewired?)."""
    deg = graph.out_degree[current]
    if np.any(deg == 0):
        v = int(current[int(np.flatnonzero(deg == 0)[0])])
        raise ValueError(f"walker stuck at sink vertex {v}")
    pick = (rng.random(current.shape[0]) * deg).astype(np.int64)
    edge = graph.indptr[current] + pick
    return graph.targets[edge], graph.rewired[edge]


def sample_trajectory(
    graph: Digraph, start: int, t: int, rng: np.random.Generator
) -> Trajectory:
    """Sample one t-step walk from ``start``."""
    vertices = np.empty(t + 1, dtype=np.int64)
    vertices[0] = start
    log_mass = 0.0
    jump_time = None
    cur = np.array([start], dtype=np.int64)
    for s in range(1, t + 1):
        log_mass -= math.log(graph.out_degree[cur[0]])
        cur, rew = _step_walkers(graph, cur, rng)
        vertices[s] = cur[0]
        if jump_time is None and bool(rew[0]):
            jump_time = s
    return Trajectory(vertices=vertices, log_mass=log_mass, jump_time=jump_time)


def path_mass_ratios(
    graph: Digraph,
    table: DegreeTable,
    starts: np.ndarray,
    t: int,
    reps: int,
    seed: int,
) -> np.ndarray:
    """Normalized log path masses -log m(path) / (H t) for sampled walks.

    Walks start round-robin on ``starts``; the ratio concentrates at 1
    when the walk's step entropy matches the graph average H.
    """
    ent = entropy_and_entropic_time(table, graph.n)
    rng = derived_rng(seed, NS_TRAJECTORY, 0)
    starts = np.asarray(starts, dtype=np.int64)
    cur = starts[np.arange(reps) % starts.size]
    log_sum = np.zeros(reps)
    for _ in range(t):
        log_sum += np.log(graph.out_degree[cur])
        cur, _ = _step_walkers(graph, cur, rng)
    return log_sum / (ent.h * t)


def sample_tau_jump(
    graph: Digraph,
    starts: np.ndarray,
    reps: int,
    seed: int,
    horizon: int | None = None,
) -> tuple[np.ndarray, int]:
    """First times a rewired edge is traversed, for ``reps`` walkers.

    Returns (samples, censored) where censored counts walkers that never
    jumped within the horizon (default 20/alpha steps, or 10^6 when
    alpha = 0 and every walker is censored); censored walkers are
    excluded from the samples.
    """
    if graph.params is None:
        raise ValueError("jump times need model parameters")
    if horizon is None:
        alpha = graph.params.alpha
        horizon = int(math.ceil(20.0 / alpha)) if alpha > 0.0 else 10**6
    if not graph.rewired.any():
        return np.empty(0, dtype=np.int64), int(reps)
    rng = derived_rng(seed, NS_TRAJECTORY, 1)
    starts = np.asarray(starts, dtype=np.int64)
    cur = starts[np.arange(reps) % starts.size]
    alive = np.arange(reps, dtype=np.int64)
    out = np.zeros(reps, dtype=np.int64)
    for t in range(1, horizon + 1):
        nxt, rew = _step_walkers(graph, cur, rng)
        if rew.any():
            out[alive[rew]] = t
            keep = ~rew
            alive = alive[keep]
            cur = nxt[keep]
            if alive.size == 0:
                break
        else:
            cur = nxt
    samples = out[out > 0]
    return samples, int(reps - samples.size)
