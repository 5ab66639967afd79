"""Directed block model graphs.

A DBM(n, m, p, alpha) graph is a union of m directed Erdos-Renyi graphs
on n vertices each (edge probability p = lambda * log(n) / n, no self
loops), where every edge is independently rewired with probability alpha:
a rewired edge keeps its source and its target *label* but moves to a
uniformly chosen other community.

Vertices are numbered globally: vertex v belongs to community v // n and
carries label v % n.  Community i occupies ids [i*n, (i+1)*n).  Edges are
stored in compressed form (indptr/targets) with a parallel boolean array
marking rewired edges; within each source the targets are sorted.
"""

from __future__ import annotations

import math
import zipfile
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .rng import NS_GRAPH, derived_rng

FORMAT_VERSION = 1


@dataclass(frozen=True)
class DbmParams:
    """Model parameters. ``lam`` is the edge-density constant lambda."""

    n: int
    m: int
    lam: float
    alpha: float
    seed: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"community size n must be >= 2, got {self.n}")
        if self.m < 2:
            raise ValueError(f"community count m must be >= 2, got {self.m}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.p > 1.0:
            raise ValueError(
                f"edge probability lambda*log(n)/n = {self.p} exceeds 1"
            )

    @property
    def p(self) -> float:
        return self.lam * math.log(self.n) / self.n

    @property
    def vertex_count(self) -> int:
        return self.n * self.m

    @classmethod
    def from_edge_probability(
        cls, n: int, m: int, p: float, alpha: float, seed: int
    ) -> "DbmParams":
        """Build params from a raw edge probability instead of lambda."""
        return cls(n=n, m=m, lam=p * n / math.log(n), alpha=alpha, seed=seed)


class Digraph:
    """Immutable directed graph in compressed out-adjacency form.

    ``indptr`` has length N+1; the targets of vertex v are
    ``targets[indptr[v]:indptr[v+1]]``, sorted, with ``rewired`` flags
    aligned.  ``n`` is the community width and ``m`` the community count;
    single-community subgraphs use m = 1.
    """

    def __init__(
        self,
        n: int,
        m: int,
        indptr: np.ndarray,
        targets: np.ndarray,
        rewired: np.ndarray,
        params: DbmParams | None = None,
    ) -> None:
        self.n = int(n)
        self.m = int(m)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.rewired = np.asarray(rewired, dtype=bool)
        self.params = params
        if self.indptr.shape != (self.vertex_count + 1,):
            raise ValueError("indptr length does not match vertex count")
        if self.targets.shape != self.rewired.shape:
            raise ValueError("targets and rewired flags must align")
        self._cache: dict = {}

    @property
    def vertex_count(self) -> int:
        return self.n * self.m

    @property
    def edge_count(self) -> int:
        return int(self.targets.shape[0])

    @property
    def out_degree(self) -> np.ndarray:
        if "out_degree" not in self._cache:
            self._cache["out_degree"] = np.diff(self.indptr)
        return self._cache["out_degree"]

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.indptr[v] : self.indptr[v + 1]]

    def sources(self) -> np.ndarray:
        """Source vertex of every edge, aligned with ``targets``."""
        if "sources" not in self._cache:
            self._cache["sources"] = np.repeat(
                np.arange(self.vertex_count, dtype=np.int64), self.out_degree
            )
        return self._cache["sources"]

    def community_of(self, v) -> np.ndarray | int:
        self._check_vertex(v)
        return v // self.n

    def label_of(self, v) -> np.ndarray | int:
        self._check_vertex(v)
        return v % self.n

    def _check_vertex(self, v) -> None:
        if np.any(np.asarray(v) < 0) or np.any(np.asarray(v) >= self.vertex_count):
            raise IndexError(f"vertex id out of range [0, {self.vertex_count})")

    def community_vertices(self, i: int) -> np.ndarray:
        return np.arange(i * self.n, (i + 1) * self.n, dtype=np.int64)

    def adjacency(self) -> csr_matrix:
        """0/1 adjacency in CSR form (cached)."""
        if "adjacency" not in self._cache:
            data = np.ones(self.edge_count, dtype=np.int8)
            self._cache["adjacency"] = csr_matrix(
                (data, self.targets, self.indptr),
                shape=(self.vertex_count, self.vertex_count),
            )
        return self._cache["adjacency"]

    def is_strongly_connected(self) -> bool:
        if "strong" not in self._cache:
            ncomp, _ = connected_components(
                self.adjacency(), directed=True, connection="strong"
            )
            self._cache["strong"] = ncomp == 1
        return self._cache["strong"]

    def validate(self) -> None:
        """Full structural invariant sweep (used by tests)."""
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be non-decreasing")
        if self.edge_count:
            if self.targets.min() < 0 or self.targets.max() >= self.vertex_count:
                raise ValueError("target out of range")
        src = self.sources()
        if np.any(src == self.targets):
            raise ValueError("self loop present")
        for v in range(self.vertex_count):
            seg = self.targets[self.indptr[v] : self.indptr[v + 1]]
            if np.any(np.diff(seg) <= 0):
                raise ValueError(f"targets of vertex {v} not strictly sorted")
        cross = self.community_of(src) != self.community_of(self.targets)
        if not np.array_equal(cross, self.rewired):
            raise ValueError("rewired flags must mark exactly cross-community edges")


@dataclass(frozen=True)
class DegreeTable:
    """Per-vertex degree statistics.

    d_out = d_intra_out + d_rewired_out; d_in counts post-rewiring in-edges
    and d_in_intra counts in-edges of the pre-rewiring graph (same-community
    sources aiming at this label).
    """

    d_out: np.ndarray
    d_intra_out: np.ndarray
    d_rewired_out: np.ndarray
    d_in: np.ndarray
    d_in_intra: np.ndarray


def generate(params: DbmParams, seed: int | None = None) -> tuple[Digraph, DegreeTable]:
    """Sample a DBM graph.

    Randomness is drawn from one derived stream per community, so results
    do not depend on scheduling.  ``seed`` overrides ``params.seed``.
    """
    root = params.seed if seed is None else seed
    n, m, p, alpha = params.n, params.m, params.p, params.alpha

    seg_targets = []
    seg_rewired = []
    seg_sources = []
    for i in range(m):
        rng = derived_rng(root, NS_GRAPH, i)
        src_label, tgt_label = _community_edge_labels(rng, n, p)
        e = src_label.shape[0]
        flags = rng.random(e) < alpha
        target = i * n + tgt_label
        k = int(np.count_nonzero(flags))
        if k:
            off = rng.integers(0, m - 1, size=k)
            other = off + (off >= i)
            target[flags] = other * n + tgt_label[flags]
        # rewiring perturbs the within-source target order; restore it
        order = np.lexsort((target, src_label))
        seg_sources.append(i * n + src_label[order])
        seg_targets.append(target[order])
        seg_rewired.append(flags[order])

    sources = np.concatenate(seg_sources) if seg_sources else np.empty(0, np.int64)
    targets = np.concatenate(seg_targets) if seg_targets else np.empty(0, np.int64)
    rewired = np.concatenate(seg_rewired) if seg_rewired else np.empty(0, bool)
    counts = np.bincount(sources, minlength=n * m)
    indptr = np.zeros(n * m + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    graph = Digraph(n, m, indptr, targets, rewired, params=params)
    return graph, degrees(graph)


def _community_edge_labels(
    rng: np.random.Generator, n: int, p: float
) -> tuple[np.ndarray, np.ndarray]:
    """Sample one community's pre-rewiring edges as (source, target) labels.

    Runs a Bernoulli(p) process over the n*(n-1) ordered non-diagonal
    pairs, realized through geometric gaps, which yields each pair
    independently with probability p and targets already distinct and
    sorted within each source.
    """
    line = n * (n - 1)
    if p >= 1.0:
        pos = np.arange(line, dtype=np.int64)
    else:
        mean = line * p
        batch = int(mean + 6.0 * math.sqrt(mean) + 16.0)
        cum = np.cumsum(rng.geometric(p, size=batch))
        while cum.size == 0 or cum[-1] < line:
            more = np.cumsum(rng.geometric(p, size=batch // 4 + 16))
            tail = (cum[-1] if cum.size else 0) + more
            cum = np.concatenate([cum, tail])
        pos = cum[cum <= line] - 1
    src = pos // (n - 1)
    slot = pos % (n - 1)
    tgt = slot + (slot >= src)  # skip the diagonal: no self loops
    return src.astype(np.int64), tgt.astype(np.int64)


def degrees(graph: Digraph) -> DegreeTable:
    """Recompute the degree table from the edge arrays."""
    nv = graph.vertex_count
    src = graph.sources()
    d_out = np.bincount(src, minlength=nv).astype(np.int64)
    d_rew = np.bincount(src[graph.rewired], minlength=nv).astype(np.int64)
    d_in = np.bincount(graph.targets, minlength=nv).astype(np.int64)
    pre_target = (src // graph.n) * graph.n + (graph.targets % graph.n)
    d_in_intra = np.bincount(pre_target, minlength=nv).astype(np.int64)
    return DegreeTable(
        d_out=d_out,
        d_intra_out=d_out - d_rew,
        d_rewired_out=d_rew,
        d_in=d_in,
        d_in_intra=d_in_intra,
    )


def gates(graph: Digraph, table: DegreeTable, i: int) -> np.ndarray:
    """Vertices of community i with at least one rewired out-edge, sorted."""
    lo, hi = i * graph.n, (i + 1) * graph.n
    local = table.d_rewired_out[lo:hi]
    return lo + np.flatnonzero(local > 0).astype(np.int64)


def pre_rewiring_subgraph(graph: Digraph, i: int) -> Digraph:
    """Community i's graph before rewiring, on label ids 0..n-1.

    Every edge with a source in community i is restored to its original
    target (same label, community i); the result is the plain directed
    Erdos-Renyi graph the community was born as.
    """
    n = graph.n
    lo, hi = i * n, (i + 1) * n
    e_lo, e_hi = graph.indptr[lo], graph.indptr[hi]
    tgt = graph.targets[e_lo:e_hi] % n
    src = graph.sources()[e_lo:e_hi] % n
    indptr = graph.indptr[lo : hi + 1] - e_lo
    order = np.lexsort((tgt, src))  # label restoration breaks global target order
    return Digraph(
        n, 1, indptr, tgt[order], np.zeros(tgt.shape[0], dtype=bool), params=None
    )


@dataclass(frozen=True)
class DegreeExtremes:
    """Extreme degrees with their vertices and ratios to lambda*log(n)."""

    min_out: int
    max_out: int
    argmin_out: int
    argmax_out: int
    ratios: dict


def degree_extremes(graph: Digraph, table: DegreeTable, lam: float) -> DegreeExtremes:
    """Extremes of each degree type, expressed relative to lambda*log(n)."""
    scale = lam * math.log(graph.n)
    ratios = {}
    for name, arr in (
        ("d_out", table.d_out),
        ("d_in", table.d_in),
        ("d_in_intra", table.d_in_intra),
    ):
        ratios[name] = (float(arr.min()) / scale, float(arr.max()) / scale)
    return DegreeExtremes(
        min_out=int(table.d_out.min()),
        max_out=int(table.d_out.max()),
        argmin_out=int(table.d_out.argmin()),
        argmax_out=int(table.d_out.argmax()),
        ratios=ratios,
    )


def save_text(graph: Digraph, path: str) -> None:
    """Write the text format: a header line then one 'src dst r' per edge."""
    if graph.params is None:
        raise ValueError("text format requires model parameters on the graph")
    prm = graph.params
    src = graph.sources()
    with open(path, "w") as fh:
        fh.write(
            f"DBM {FORMAT_VERSION} {prm.n} {prm.m} {prm.lam!r} {prm.alpha!r} {prm.seed}\n"
        )
        rew = graph.rewired.astype(np.int8)
        for s, t, r in zip(src.tolist(), graph.targets.tolist(), rew.tolist()):
            fh.write(f"{s} {t} {r}\n")


def load_text(path: str) -> Digraph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 7 or header[0] != "DBM":
            raise ValueError(f"{path}: not a DBM graph file")
        if int(header[1]) != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {header[1]}")
        n, m = int(header[2]), int(header[3])
        params = DbmParams(
            n=n, m=m, lam=float(header[4]), alpha=float(header[5]), seed=int(header[6])
        )
        rows = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, 3)
    src, tgt, rew = rows[:, 0], rows[:, 1], rows[:, 2].astype(bool)
    counts = np.bincount(src, minlength=n * m)
    indptr = np.zeros(n * m + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    if np.any(np.diff(src) < 0):
        raise ValueError(f"{path}: edges must be grouped by source")
    return Digraph(n, m, indptr, tgt, rew, params=params)


def save_binary(graph: Digraph, path: str) -> None:
    """Write the compact binary variant (same logical content as text)."""
    if graph.params is None:
        raise ValueError("binary format requires model parameters on the graph")
    prm = graph.params
    np.savez(
        path,
        format_version=np.array([FORMAT_VERSION], dtype=np.int64),
        shape=np.array([prm.n, prm.m, prm.seed], dtype=np.int64),
        reals=np.array([prm.lam, prm.alpha], dtype=np.float64),
        indptr=graph.indptr,
        targets=graph.targets,
        rewired=graph.rewired,
    )


def load_binary(path: str) -> Digraph:
    try:
        data = np.load(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise ValueError(f"{path}: not a DBM binary graph file") from exc
    if "format_version" not in data or int(data["format_version"][0]) != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported or missing format version")
    n, m, seed = (int(x) for x in data["shape"])
    lam, alpha = (float(x) for x in data["reals"])
    params = DbmParams(n=n, m=m, lam=lam, alpha=alpha, seed=seed)
    return Digraph(
        n, m, data["indptr"], data["targets"], data["rewired"], params=params
    )
