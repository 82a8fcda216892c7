"""Consistent pseudo-distributions from geometry: pairwise tables, embeddings,
and Gaussian max rounding.

Pipeline: a labeled instance with girth above 2L has a unique shortest path
between any two vertices within distance L, along which arc labels compose to
an offset mod (T+1).  Label pairs realizing that offset "match".  The pairwise
table rho gives matching pairs mass (1-mu)^d/(T+1) + (1-(1-mu)^d)/(T+1)^2 at
distance d <= L, non-matching pairs (1-(1-mu)^d)/(T+1)^2, and 1/(T+1)^2 beyond
L; the same numbers arise exactly from cutting each edge of a tree
independently with probability mu and propagating a uniform root label per
piece.  Embedding vectors with inner products mu/2 + rho (norm-squared
mu + 1/(T+1)) and assigning every vertex the label whose vector maximizes the
inner product with one shared Gaussian direction yields local distributions
that are consistent by construction: the same sampled assignment populates
every set, so marginalization identities hold exactly on the empirical table.

This module is the only floating-point one; tables and frequencies stay exact.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import GmdInstance, InstanceError
from .rng import substream
from .salp import SaSolution


class AmbiguousPathError(InstanceError):
    """Two shortest paths (or parallel arcs) make the label offset ill-defined."""


class EmbeddingError(InstanceError):
    """Gram matrix is not positive semidefinite within tolerance."""


def _delta_adjacency(inst: GmdInstance) -> list[list[tuple[int, int]]]:
    """Undirected adjacency; traversing arc tail->head adds +label (mod T+1),
    the reverse direction -label.  Parallel arcs appear as parallel entries so
    that path counting flags them as ambiguity."""
    q = inst.T + 1
    adj: list[list[tuple[int, int]]] = [[] for _ in range(inst.n)]
    for a in inst.arcs:
        adj[a.tail].append((a.head, a.label % q))
        adj[a.head].append((a.tail, (-a.label) % q))
    for entries in adj:
        entries.sort()
    return adj


def _bounded_shortest_paths(adj, src: int, depth: int):
    """BFS to `depth`: per reached vertex (distance, path count, label offset)."""
    dist = {src: 0}
    count = {src: 1}
    offset = {src: 0}
    frontier = [src]
    q = len(adj)
    for d in range(depth):
        nxt: list[int] = []
        for x in sorted(frontier):
            for y, delta in adj[x]:
                if y in dist and dist[y] <= d:
                    continue
                if y not in dist:
                    dist[y] = d + 1
                    count[y] = 0
                    offset[y] = offset[x] + delta
                    nxt.append(y)
                count[y] += count[x]
        frontier = nxt
        if not frontier:
            break
    return dist, count, offset


def match_pairs(
    inst: GmdInstance, u: int, v: int, max_dist: Optional[int] = None
) -> frozenset[tuple[int, int]]:
    """The T+1 label pairs extendable to weakly satisfy the unique shortest
    u..v path (head label minus tail label equals the arc label mod T+1)."""
    q = inst.T + 1
    adj = _delta_adjacency(inst)
    depth = max_dist if max_dist is not None else inst.n
    dist, count, offset = _bounded_shortest_paths(adj, u, depth)
    if v not in dist:
        raise AmbiguousPathError(
            f"vertices {u},{v} are farther than {depth} apart or disconnected"
        )
    if count[v] != 1:
        raise AmbiguousPathError(f"shortest path {u}..{v} is not unique")
    off = offset[v] % q
    return frozenset((i, (i + off) % q) for i in range(q))


@dataclass
class PairwiseTable:
    """Exact pairwise table rho over (vertex, label) pairs."""

    inst: GmdInstance
    mu: Fraction
    L: int
    pair_info: dict = field(repr=False)  # ordered (u,v) -> (dist, offset), d <= L

    @property
    def q(self) -> int:
        return self.inst.T + 1

    def entry(self, u: int, i: int, v: int, ip: int) -> Fraction:
        q = self.q
        if u == v:
            return Fraction(1, q) if i == ip else Fraction(0)
        info = self.pair_info.get((u, v))
        if info is None:
            return Fraction(1, q * q)
        d, off = info
        keep = (1 - self.mu) ** d
        if (ip - i) % q == off:
            return keep / q + (1 - keep) / (q * q)
        return (1 - keep) / (q * q)

    def row_sum(self, u: int, i: int, v: int) -> Fraction:
        return sum((self.entry(u, i, v, ip) for ip in range(self.q)), Fraction(0))


def pairwise_rho(inst: GmdInstance, mu: Fraction, L: int) -> PairwiseTable:
    if not (0 <= mu <= 1):
        raise InstanceError(f"noise mu must be in [0, 1], got {mu}")
    if L < 0:
        raise InstanceError("L must be nonnegative")
    mu = Fraction(mu)
    adj = _delta_adjacency(inst)
    q = inst.T + 1
    info: dict = {}
    for u in range(inst.n):
        dist, count, offset = _bounded_shortest_paths(adj, u, L)
        for v, d in dist.items():
            if v == u:
                continue
            if count[v] != 1:
                raise AmbiguousPathError(
                    f"shortest path {u}..{v} (distance {d}) is not unique"
                )
            info[(u, v)] = (d, offset[v] % q)
    return PairwiseTable(inst=inst, mu=mu, L=L, pair_info=info)


# ---------------------------------------------------------------------------
# Exact local distributions on forests
# ---------------------------------------------------------------------------


def _forest_structure(inst: GmdInstance):
    pairs = set()
    for a in inst.arcs:
        key = (min(a.tail, a.head), max(a.tail, a.head))
        if key in pairs:
            raise InstanceError("parallel arcs form an undirected 2-cycle")
        pairs.add(key)
    adj = _delta_adjacency(inst)
    seen: set[int] = set()
    components = []
    for root in range(inst.n):
        if root in seen:
            continue
        comp = []
        parent = {root: None}
        queue = deque([root])
        seen.add(root)
        order = []
        while queue:
            x = queue.popleft()
            order.append(x)
            for y, delta in adj[x]:
                if y == parent[x]:
                    continue
                if y in seen:
                    raise InstanceError("input contains a cycle; need a forest")
                seen.add(y)
                parent[y] = x
                queue.append(y)
        components.append((root, order, parent))
    return adj, components


def local_distribution_tree(
    forest: GmdInstance,
    mu: Fraction,
    S: Sequence[int],
    mode: str = "exact",
    trials: int = 100_000,
    seed: int = 0,
) -> dict[tuple, Fraction]:
    """Joint label distribution on S under independent edge cutting.

    Each edge of the forest is cut with probability mu; each resulting piece
    draws one uniform label and propagates it so that every kept arc is
    weakly satisfied.  Exact mode marginalizes by dynamic programming over
    each tree; sample mode simulates and returns empirical frequencies.
    """
    mu = Fraction(mu)
    q = forest.T + 1
    S = tuple(S)
    adj, components = _forest_structure(forest)
    if mode == "exact":
        out = {}
        for alpha in itertools.product(range(q), repeat=len(S)):
            clamp = dict(zip(S, alpha))
            p = Fraction(1)
            for root, order, parent in components:
                if not any(v in clamp for v in order):
                    continue
                p *= _clamped_tree_probability(adj, order, parent, clamp, mu, q)
            out[alpha] = p
        return out
    if mode == "sample":
        return _sampled_distribution(forest, adj, components, mu, S, trials, seed)
    raise InstanceError(f"unknown mode {mode!r}")


def _clamped_tree_probability(adj, order, parent, clamp, mu: Fraction, q: int) -> Fraction:
    keep = 1 - mu
    cut = mu / q
    messages: dict[int, list[Fraction]] = {}
    for v in reversed(order):
        base = [
            Fraction(1) if (v not in clamp or clamp[v] == x) else Fraction(0)
            for x in range(q)
        ]
        for y, delta in adj[v]:
            if parent.get(y) != v:
                continue
            m = messages.pop(y)
            total = sum(m, Fraction(0))
            # child value = parent value + delta when the edge survives
            base = [
                base[x] * (keep * m[(x + delta) % q] + cut * total)
                for x in range(q)
            ]
        messages[v] = base
    root_msg = messages[order[0]]
    return sum(root_msg, Fraction(0)) / q


def _sampled_distribution(forest, adj, components, mu, S, trials, seed):
    rng = substream(seed, 0)
    q = forest.T + 1
    mu_f = float(mu)
    counts: dict[tuple, int] = {}
    tree_edges = []
    for root, order, parent in components:
        tree_edges.append([(v, parent[v]) for v in order if parent[v] is not None])
    delta_of = {}
    for v in range(forest.n):
        for y, delta in adj[v]:
            delta_of[(v, y)] = delta
    for _ in range(trials):
        labels = [0] * forest.n
        for (root, order, parent), edges in zip(components, tree_edges):
            cut = {e for e in edges if rng.random() < mu_f}
            labels[root] = int(rng.integers(0, q))
            for v in order[1:]:
                p = parent[v]
                if (v, p) in cut:
                    labels[v] = int(rng.integers(0, q))
                else:
                    labels[v] = (labels[p] + delta_of[(p, v)]) % q
        key = tuple(labels[v] for v in S)
        counts[key] = counts.get(key, 0) + 1
    return {
        alpha: Fraction(counts.get(alpha, 0), trials)
        for alpha in itertools.product(range(q), repeat=len(S))
    }


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------


@dataclass
class VectorSystem:
    """Factored embedding of the pairwise table over (vertex, label) pairs."""

    vertices: tuple[int, ...]
    T: int
    gram: np.ndarray
    factors: np.ndarray          # rows indexed like gram
    psd_clamp_report: tuple[float, ...]
    inst: Optional[GmdInstance] = None

    @property
    def q(self) -> int:
        return self.T + 1

    def rows_for(self, v: int) -> np.ndarray:
        pos = self.vertices.index(v)
        return self.factors[pos * self.q:(pos + 1) * self.q]

    @property
    def dim(self) -> int:
        return self.factors.shape[1]


def embed_vectors(
    table: PairwiseTable,
    S: Optional[Sequence[int]] = None,
    psd_tol: float = 1e-9,
) -> VectorSystem:
    """Eigen-factor the Gram matrix mu/2 + rho (+ mu/2 on the diagonal).

    Eigenvalues in [-psd_tol, 0) are clamped to zero and reported; anything
    lower signals a parameter regime where no such embedding exists and
    raises.  The factor must reproduce the Gram entrywise within
    max(1e-9, 2 * psd_tol).
    """
    inst = table.inst
    S = tuple(sorted(S if S is not None else range(inst.n)))
    q = table.q
    mu = float(table.mu)
    size = len(S) * q
    gram = np.empty((size, size))
    for a, u in enumerate(S):
        for i in range(q):
            for b, v in enumerate(S):
                for ip in range(q):
                    g = mu / 2 + float(table.entry(u, i, v, ip))
                    if u == v and i == ip:
                        g += mu / 2
                    gram[a * q + i, b * q + ip] = g
    eigvals, eigvecs = np.linalg.eigh(gram)
    if eigvals.min() < -psd_tol:
        raise EmbeddingError(
            f"Gram minimum eigenvalue {eigvals.min():.3e} below -{psd_tol:.1e}"
        )
    clamped = tuple(float(v) for v in eigvals[eigvals < 0])
    eigvals = np.clip(eigvals, 0.0, None)
    factors = eigvecs * np.sqrt(eigvals)
    err = np.abs(factors @ factors.T - gram).max()
    if err > max(1e-9, 2 * psd_tol):
        raise EmbeddingError(f"factorization error {err:.3e} too large")
    return VectorSystem(
        vertices=S,
        T=inst.T,
        gram=gram,
        factors=factors,
        psd_clamp_report=clamped,
        inst=inst,
    )


@dataclass
class EdgeVectorSystem:
    """Explicit orthogonal-coordinate embedding for one arc with a label.

    Built from blocks a(i) (shared by matching pairs, length
    sqrt((1-mu)/(T+1))), b(i,j) (pair bookkeeping, length sqrt(mu)/(T+1)),
    per-side c(i)/c'(i) and a common d (each length sqrt(mu/2)).  Inner
    products: ||u(i)||^2 = mu + 1/(T+1); u(i).u(j) = mu/2 for i != j;
    u(i).v(i') = mu/2 + mu/(T+1)^2, plus (1-mu)/(T+1) when i' - i equals the
    arc label mod T+1.
    """

    T: int
    mu: float
    label: int
    vectors_u: np.ndarray = field(init=False)
    vectors_v: np.ndarray = field(init=False)

    def __post_init__(self):
        q = self.T + 1
        if not (1 <= self.label <= self.T):
            raise InstanceError(f"label {self.label} outside 1..{self.T}")
        if not (0 <= self.mu <= 1):
            raise InstanceError("mu must be in [0, 1]")
        dim = q * q + 3 * q + 1
        len_a = math.sqrt((1 - self.mu) / q)
        len_b = math.sqrt(self.mu) / q
        len_c = math.sqrt(self.mu / 2)
        u = np.zeros((q, dim))
        v = np.zeros((q, dim))
        b0 = q
        c0 = q + q * q
        cp0 = c0 + q
        d0 = cp0 + q
        for i in range(q):
            u[i, i] = len_a
            for j in range(q):
                u[i, b0 + i * q + j] = len_b
            u[i, c0 + i] = len_c
            u[i, d0] = len_c
        for ip in range(q):
            v[ip, (ip - self.label) % q] = len_a
            for j in range(q):
                v[ip, b0 + j * q + ip] = len_b
            v[ip, cp0 + ip] = len_c
            v[ip, d0] = len_c
        self.vectors_u = u
        self.vectors_v = v

    @property
    def q(self) -> int:
        return self.T + 1

    @property
    def dim(self) -> int:
        return self.vectors_u.shape[1]


def noise_for_target_gap(T: int, eps: float) -> float:
    """Largest mu the rounding analysis tolerates for a 1-12*eps guarantee."""
    return eps * eps / (256 * (T + 1) * math.log((T + 1) / eps) ** 2)


@dataclass
class RoundingEstimate:
    trials: int
    seed: int
    vertices: tuple[int, ...]
    marginals: np.ndarray                 # (len(vertices), q) frequencies
    per_edge: dict                        # (u, v, label) -> (p_hat, stderr)

    def edge_estimate(self, u: int, v: int, label: int) -> tuple[float, float]:
        return self.per_edge[(u, v, label)]


def _argmax_labels(scores: np.ndarray, q: int) -> np.ndarray:
    """Per-trial argmax label per vertex; ties (measure zero) -> smallest."""
    t, total = scores.shape
    return scores.reshape(t, total // q, q).argmax(axis=2)


def round_and_estimate(
    vs,
    trials: int,
    seed: int,
    vertices: Optional[Sequence[int]] = None,
    batch: int = 100_000,
) -> RoundingEstimate:
    """Shared-Gaussian argmax rounding with per-edge satisfaction estimates.

    For a VectorSystem the edges are the instance arcs inside the requested
    vertex set; for an EdgeVectorSystem the single built arc (its endpoints
    are named 0 and 1).  Marginals for a vertex are bit-identical across
    calls with the same system and seed regardless of the vertex subset,
    because the Gaussian stream has the system's full dimension.
    """
    if trials < 1:
        raise InstanceError("need at least one trial")
    if isinstance(vs, EdgeVectorSystem):
        matrix = np.vstack([vs.vectors_u, vs.vectors_v])
        verts = (0, 1)
        arcs = [(0, 1, vs.label)]
        q = vs.q
    else:
        if vs.factors.size == 0:
            raise InstanceError("empty vector system")
        matrix = vs.factors
        verts = vs.vertices
        arcs = [
            (a.tail, a.head, a.label)
            for a in vs.inst.arcs
            if a.tail in set(verts) and a.head in set(verts)
        ]
        q = vs.q
    request = tuple(verts if vertices is None else sorted(vertices))
    pos = {v: i for i, v in enumerate(verts)}
    rng = substream(seed, 0)
    marg = np.zeros((len(request), q), dtype=np.int64)
    edge_hits = {arc: 0 for arc in arcs if arc[0] in request and arc[1] in request}
    done = 0
    while done < trials:
        step = min(batch, trials - done)
        g = rng.standard_normal((step, matrix.shape[1]))
        labels = _argmax_labels(g @ matrix.T, q)
        for r, v in enumerate(request):
            marg[r] += np.bincount(labels[:, pos[v]], minlength=q)
        for (u, v, t) in edge_hits:
            edge_hits[(u, v, t)] += int(
                np.count_nonzero((labels[:, pos[u]] == 0) & (labels[:, pos[v]] == t))
            )
        done += step
    per_edge = {}
    for arc, hits in edge_hits.items():
        p = hits / trials
        per_edge[arc] = (p, math.sqrt(max(p * (1 - p), 1e-300) / trials))
    return RoundingEstimate(
        trials=trials,
        seed=seed,
        vertices=request,
        marginals=marg / trials,
        per_edge=per_edge,
    )


@dataclass
class SaBuildResult:
    solution: SaSolution
    objective: Fraction
    trials: int
    seed: int
    psd_clamp_report: tuple[float, ...]


def build_sa_solution(
    inst: GmdInstance,
    mu: Fraction,
    L: int,
    k: int,
    trials: int,
    seed: int,
    psd_tol: float = 1e-9,
    sets: Optional[Sequence[tuple[int, ...]]] = None,
    batch: int = 100_000,
) -> SaBuildResult:
    """Empirical pseudo-distribution over all vertex sets of size <= k.

    One shared Gaussian stream rounds every vertex per trial, and each set's
    table is the empirical frequency of its joint outcome, so the
    marginalization identities hold exactly (the same assignments populate
    every set).  The objective is the weighted frequency of satisfied arcs.
    """
    if k < 1:
        raise InstanceError("k must be >= 1")
    table = pairwise_rho(inst, mu, L)
    vs = embed_vectors(table, psd_tol=psd_tol)
    q = inst.T + 1
    if sets is None:
        sets = [
            S
            for size in range(1, k + 1)
            for S in itertools.combinations(range(inst.n), size)
        ]
    else:
        sets = [tuple(sorted(S)) for S in sets]
        if any(len(S) > k for S in sets):
            raise InstanceError("a requested set exceeds size k")

    counts = {S: np.zeros(q ** len(S), dtype=np.int64) for S in sets}
    sat_counts = [0] * len(inst.arcs)
    rng = substream(seed, 0)
    done = 0
    while done < trials:
        step = min(batch, trials - done)
        g = rng.standard_normal((step, vs.dim))
        labels = _argmax_labels(g @ vs.factors.T, q)
        for S in sets:
            code = np.zeros(step, dtype=np.int64)
            for v in S:
                code = code * q + labels[:, v]
            counts[S] += np.bincount(code, minlength=q ** len(S))
        for j, a in enumerate(inst.arcs):
            sat_counts[j] += int(
                np.count_nonzero((labels[:, a.tail] == 0) & (labels[:, a.head] == a.label))
            )
        done += step

    values = {}
    for S in sets:
        for j, alpha in enumerate(itertools.product(range(q), repeat=len(S))):
            values[(S, alpha)] = Fraction(int(counts[S][j]), trials)
    solution = SaSolution(
        values=values, rounds=k, domains=tuple(tuple(range(q)) for _ in range(inst.n))
    )
    # objective from the same shared samples; identical to the pair-table
    # number whenever that table exists (k >= 2 over the arc's endpoints)
    objective = Fraction(0)
    for j, a in enumerate(inst.arcs):
        objective += a.weight * Fraction(sat_counts[j], trials)
        S = (a.tail, a.head) if a.tail < a.head else (a.head, a.tail)
        alpha = (0, a.label) if S == (a.tail, a.head) else (a.label, 0)
        if (S, alpha) in values:
            assert values[(S, alpha)] == Fraction(sat_counts[j], trials)
    return SaBuildResult(
        solution=solution,
        objective=objective,
        trials=trials,
        seed=seed,
        psd_clamp_report=vs.psd_clamp_report,
    )
