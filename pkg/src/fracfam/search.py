"""Maximum fractional L-intersecting families as maximum cliques.

A family is fractional L-intersecting exactly when it is a clique in the
compatibility graph on candidate subsets, so the exact search is a bitset
branch-and-bound with greedy colouring bounds (MCQ/BBMC family).
"""
from __future__ import annotations

import heapq
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .bounds import theorem1_bound, theorem2_bound
from .constructions import star_block_family
from .core import Family, FamilyError, LSet, verify_family

__all__ = [
    "UniverseFilter",
    "CompatibilityGraph",
    "SearchResult",
    "SearchLimits",
    "build_graph",
    "max_clique",
    "heuristic_grow",
    "extremal_table",
    "default_threads",
    "GRAPH_MAX_N",
    "HEURISTIC_MAX_N",
    "DEFAULT_VERTEX_BUDGET",
]

GRAPH_MAX_N = 20
HEURISTIC_MAX_N = 63
DEFAULT_VERTEX_BUDGET = 5000
ENUMERATE_MAX_N = 20


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FRACFAM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class UniverseFilter:
    """Conjunctive restrictions on candidate set sizes (the empty set is never a candidate)."""

    min_size: int | None = None
    max_size: int | None = None
    parity: str | None = None
    size_set: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.parity not in (None, "even", "odd"):
            raise FamilyError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.size_set is not None:
            object.__setattr__(self, "size_set", tuple(sorted(set(self.size_set))))

    def allows(self, k: int) -> bool:
        if k < 1:
            return False
        if self.min_size is not None and k < self.min_size:
            return False
        if self.max_size is not None and k > self.max_size:
            return False
        if self.parity == "even" and k % 2:
            return False
        if self.parity == "odd" and not k % 2:
            return False
        if self.size_set is not None and k not in self.size_set:
            return False
        return True

    def sizes(self, n: int) -> list[int]:
        return [k for k in range(1, n + 1) if self.allows(k)]

    def count(self, n: int) -> int:
        return sum(comb(n, k) for k in self.sizes(n))

    def to_dict(self) -> dict:
        return {
            "min_size": self.min_size,
            "max_size": self.max_size,
            "parity": self.parity,
            "size_set": list(self.size_set) if self.size_set is not None else None,
        }


def _masks_of_sizes(n: int, sizes: list[int]) -> np.ndarray:
    """All masks of ``[n]`` with popcount in ``sizes``, ascending by (size, mask)."""
    if n > ENUMERATE_MAX_N:
        raise FamilyError(f"cannot enumerate subsets of [{n}]")
    allm = np.arange(1, 2 ** n, dtype=np.uint64)
    pc = np.bitwise_count(allm)
    keep = np.isin(pc, np.array(sizes, dtype=pc.dtype))
    sel, selpc = allm[keep], pc[keep]
    order = np.lexsort((sel, selpc))
    return sel[order]


def _compat_vector(masks: np.ndarray, sizes: np.ndarray, v: int, vsize: int, L: LSet) -> np.ndarray:
    inter = np.bitwise_count(masks & np.uint64(v)).astype(np.int64)
    ok = np.zeros(len(masks), dtype=bool)
    for f in L.fractions:
        p, q = f.numerator, f.denominator
        ok |= (q * inter == p * sizes) | (q * inter == p * vsize)
    return ok


def _row_to_int(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


@dataclass
class CompatibilityGraph:
    n: int
    L: LSet
    vertices: list[int]
    adjacency: list[int]
    filter: UniverseFilter = field(default_factory=UniverseFilter)

    def __len__(self) -> int:
        return len(self.vertices)

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def edges(self):
        for i, row in enumerate(self.adjacency):
            r = row >> (i + 1)
            j = i + 1
            while r:
                if r & 1:
                    yield (i, j)
                r >>= 1
                j += 1

    def family(self, idx) -> Family:
        return Family.from_masks((self.vertices[i] for i in idx), self.n)

    def is_clique(self, idx) -> bool:
        idx = list(idx)
        return all(self.adjacency[i] >> j & 1 for k, i in enumerate(idx) for j in idx[k + 1:])


def build_graph(
    n: int,
    L: LSet,
    filter: UniverseFilter | None = None,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
) -> CompatibilityGraph:
    """Compatibility graph on every non-empty subset of ``[n]`` passing ``filter``."""
    filter = filter or UniverseFilter()
    if n < 1:
        raise FamilyError("n must be positive")
    if n > GRAPH_MAX_N:
        raise FamilyError(f"n={n} exceeds the graph cap {GRAPH_MAX_N}")
    count = filter.count(n)
    if count > vertex_budget:
        raise FamilyError(f"universe has {count} vertices, over the budget of {vertex_budget}")
    masks = _masks_of_sizes(n, filter.sizes(n))
    sizes = np.bitwise_count(masks).astype(np.int64)
    adj = []
    for i, (v, k) in enumerate(zip(masks.tolist(), sizes.tolist())):
        row = _compat_vector(masks, sizes, v, k, L)
        row[i] = False
        adj.append(_row_to_int(row))
    return CompatibilityGraph(n, L, [int(v) for v in masks.tolist()], adj, filter)


@dataclass
class SearchLimits:
    time_limit: float | None = None
    node_limit: int | None = None


@dataclass
class SearchResult:
    best_family: Family
    size: int
    optimal: bool
    nodes_explored: int
    wall_time: float
    limits_hit: list[str] = field(default_factory=list)
    method: str = "exact"

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "optimal": self.optimal,
            "method": self.method,
            "nodes_explored": self.nodes_explored,
            "wall_time": self.wall_time,
            "limits_hit": list(self.limits_hit),
            "family": self.best_family.as_lists(),
        }


class _Budget(Exception):
    pass


def _degeneracy_order(adj: list[int], nv: int) -> list[int]:
    """Vertices in smallest-last order, reversed so dense cores come first."""
    deg = [a.bit_count() for a in adj]
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    alive = (1 << nv) - 1
    removed = []
    while heap:
        d, v = heapq.heappop(heap)
        if not alive >> v & 1 or d != deg[v]:
            continue
        removed.append(v)
        alive &= ~(1 << v)
        r = adj[v] & alive
        while r:
            low = r & -r
            u = low.bit_length() - 1
            deg[u] -= 1
            heapq.heappush(heap, (deg[u], u))
            r ^= low
    return removed[::-1]


class _CliqueSearch:
    def __init__(self, adj: list[int], limits: SearchLimits):
        self.adj = adj
        self.limits = limits
        self.lock = threading.Lock()
        self.best_size = 0
        self.best = []
        self.nodes = 0
        self.hit: set[str] = set()
        self.start = time.perf_counter()
        self.stop = False

    def offer(self, clique: list[int]):
        with self.lock:
            if len(clique) > self.best_size:
                self.best_size = len(clique)
                self.best = list(clique)

    def tick(self):
        self.nodes += 1
        lim = self.limits
        if self.stop:
            raise _Budget
        if lim.node_limit is not None and self.nodes > lim.node_limit:
            self.hit.add("node_limit")
            self.stop = True
            raise _Budget
        if lim.time_limit is not None and not self.nodes & 63:
            if time.perf_counter() - self.start > lim.time_limit:
                self.hit.add("time_limit")
                self.stop = True
                raise _Budget

    def color_sort(self, P: int) -> tuple[list[int], list[int]]:
        adj = self.adj
        order, colors = [], []
        k, U = 0, P
        while U:
            k += 1
            Q = U
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                Q &= ~adj[v] & ~low
                U &= ~low
                order.append(v)
                colors.append(k)
        return order, colors

    def expand(self, clique: list[int], P: int):
        self.tick()
        order, colors = self.color_sort(P)
        for idx in range(len(order) - 1, -1, -1):
            if len(clique) + colors[idx] <= self.best_size:
                return
            v = order[idx]
            clique.append(v)
            newP = P & self.adj[v]
            if newP:
                self.expand(clique, newP)
            else:
                self.offer(clique)
            clique.pop()
            P &= ~(1 << v)

    def branch(self, v: int, P: int):
        if self.stop:
            return
        try:
            if P:
                self.expand([v], P)
            else:
                self.offer([v])
        except _Budget:
            pass


def max_clique(
    G: CompatibilityGraph,
    limits: SearchLimits | None = None,
    threads: int | None = None,
) -> SearchResult:
    """Maximum clique of ``G``; ``optimal`` is set only if the search ran to completion.

    With several threads the top-level branches are shared out over a pool and
    the incumbent size is shared, so the reported size does not depend on the
    thread count (the witness may).
    """
    limits = limits or SearchLimits()
    threads = threads or default_threads()
    t0 = time.perf_counter()
    nv = len(G.vertices)
    if nv == 0:
        return SearchResult(Family(G.n, []), 0, True, 0, 0.0)
    perm = _degeneracy_order(G.adjacency, nv)
    pos = {v: i for i, v in enumerate(perm)}
    adj = []
    for v in perm:
        row, r = 0, G.adjacency[v]
        while r:
            low = r & -r
            row |= 1 << pos[low.bit_length() - 1]
            r ^= low
        adj.append(row)

    search = _CliqueSearch(adj, limits)
    full = (1 << nv) - 1
    order, colors = search.color_sort(full)
    # top-level branch for order[idx]: candidates are the vertices coloured before it
    tasks = []
    P = full
    for idx in range(len(order) - 1, -1, -1):
        v = order[idx]
        tasks.append((colors[idx], v, P & adj[v]))
        P &= ~(1 << v)

    def run(task):
        bound, v, cand = task
        if bound <= search.best_size:
            return
        search.branch(v, cand)

    if threads == 1:
        for task in tasks:
            if task[0] <= search.best_size:
                break
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, tasks))

    clique = sorted(perm[i] for i in search.best)
    fam = G.family(clique)
    optimal = not search.hit
    return SearchResult(
        best_family=fam,
        size=len(fam),
        optimal=optimal,
        nodes_explored=search.nodes,
        wall_time=time.perf_counter() - t0,
        limits_hit=sorted(search.hit),
        method="exact",
    )


# -- heuristic ---------------------------------------------------------------

def _seed_families(n: int, L: LSet, filter: UniverseFilter) -> list[list[int]]:
    seeds = []
    if Fraction(1, 2) in L.fractions and n >= 4 and n % 2 == 0:
        seeds.append(star_block_family(n).family.masks)
    if Fraction(0) in L.fractions:
        seeds.append([1 << k for k in range(n)])
    out = []
    for s in seeds:
        s = [m for m in s if filter.allows(m.bit_count())]
        if s and verify_family(Family.from_masks(s, n), L).valid:
            out.append(s)
    return out


def _random_pool(n: int, filter: UniverseFilter, size: int, rng: random.Random) -> list[int]:
    allowed = filter.sizes(n)
    if not allowed:
        return []
    weights = [comb(n, k) for k in allowed]
    out = set()
    while len(out) < size:
        k = rng.choices(allowed, weights)[0]
        out.add(sum(1 << e for e in rng.sample(range(n), k)))
    return sorted(out)


def heuristic_grow(
    n: int,
    L: LSet,
    seed: int,
    budget: int = 2000,
    filter: UniverseFilter | None = None,
    time_limit: float | None = None,
    pool_size: int = 20000,
) -> SearchResult:
    """Seeded greedy growth followed by remove-and-regrow local search.

    The start family is the largest applicable known construction (pairs and
    4-sets through a common point for 1/2, singletons for 0), completed
    greedily.  Each of the ``budget`` rounds drops one or two random members and
    regrows; non-shrinking moves are kept.  For ``n`` above 20 the candidates
    are a seeded random pool instead of every subset.  Never claims optimality.
    """
    filter = filter or UniverseFilter()
    if not 1 <= n <= HEURISTIC_MAX_N:
        raise FamilyError(f"heuristic search supports 1 <= n <= {HEURISTIC_MAX_N}")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    seeds = _seed_families(n, L, filter)
    if n <= ENUMERATE_MAX_N:
        universe = _masks_of_sizes(n, filter.sizes(n)).tolist()
    else:
        universe = _random_pool(n, filter, pool_size, rng)
    extra = sorted({m for s in seeds for m in s} - set(universe))
    U = np.array(universe + extra, dtype=np.uint64)
    sizes = np.bitwise_count(U).astype(np.int64)
    index = {int(m): i for i, m in enumerate(U.tolist())}
    nU = len(U)
    if nU == 0:
        return SearchResult(Family(n, []), 0, False, 0, 0.0, [], "heuristic")

    compat_cache: dict[int, np.ndarray] = {}

    def compat(i: int) -> np.ndarray:
        c = compat_cache.get(i)
        if c is None:
            c = _compat_vector(U, sizes, int(U[i]), int(sizes[i]), L)
            c[i] = False
            if len(compat_cache) < 4096:
                compat_cache[i] = c
        return c

    conflicts = np.zeros(nU, dtype=np.int32)
    members: list[int] = []
    in_fam = np.zeros(nU, dtype=bool)

    def add(i: int):
        members.append(i)
        in_fam[i] = True
        conflicts[:] += ~compat(i)

    def remove(i: int):
        members.remove(i)
        in_fam[i] = False
        conflicts[:] -= ~compat(i)

    def grow():
        while True:
            cand = np.flatnonzero((conflicts == 0) & ~in_fam)
            if cand.size == 0:
                return
            add(int(cand[rng.randrange(cand.size)]))

    start = max(seeds, key=len, default=[])
    for m in start:
        add(index[m])
    grow()
    best = list(members)
    nodes = 0
    hit = []
    for _ in range(budget):
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            hit.append("time_limit")
            break
        nodes += 1
        before = list(members)
        for _k in range(min(len(members), rng.choice((1, 1, 2)))):
            remove(members[rng.randrange(len(members))])
        grow()
        if len(members) < len(before):
            for i in list(members):
                remove(i)
            for i in before:
                add(i)
        if len(members) > len(best):
            best = list(members)
    fam = Family.from_masks((int(U[i]) for i in best), n)
    return SearchResult(fam, len(fam), False, nodes, time.perf_counter() - t0, hit, "heuristic")


# -- tables -----------------------------------------------------------------

def extremal_table(
    n_values,
    L: LSet,
    filter: UniverseFilter | None = None,
    limits: SearchLimits | None = None,
    vertex_budget: int = DEFAULT_VERTEX_BUDGET,
    threads: int | None = None,
    seed: int = 0,
    heuristic_budget: int = 500,
) -> list[dict]:
    """One row per ``n``: the exact maximum (or best found) next to the bounds."""
    filter = filter or UniverseFilter()
    rows = []
    half = L.fractions == (Fraction(1, 2),)
    for n in n_values:
        try:
            G = build_graph(n, L, filter, vertex_budget)
            res = max_clique(G, limits, threads)
        except FamilyError:
            res = heuristic_grow(n, L, seed, heuristic_budget, filter)
        row = {
            "n": n,
            "size": res.size,
            "optimal": res.optimal,
            "method": res.method,
            "theorem1_exact": theorem1_bound(n, L).exact_prime_bound,
            "theorem2": None,
            "construction_3n_2_minus_2": None,
        }
        if L.s == 1 and n >= 2:
            try:
                row["theorem2"] = theorem2_bound(n, L.fractions[0])
            except FamilyError:
                pass
        if half and n % 2 == 0 and n >= 4:
            row["construction_3n_2_minus_2"] = 3 * n // 2 - 2
            row["attains_construction"] = res.size >= 3 * n // 2 - 2
        row["within_theorem1"] = res.size <= row["theorem1_exact"]
        if row["theorem2"] is not None:
            row["within_theorem2"] = res.size <= row["theorem2"]
        rows.append(row)
    return rows
