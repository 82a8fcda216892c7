"""Small undirected-graph routines shared by the pipeline and embedding code.

Graphs are plain edge sets of sorted vertex pairs over vertices 0..n-1.
Everything here is deterministic: BFS visits neighbors in increasing id
order and cycle extraction canonicalizes before comparing.
"""

from __future__ import annotations

from collections import deque

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def adjacency(n: int, edges) -> list[list[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return [sorted(s) for s in adj]


def canonical_cycle(path: list[int]) -> tuple[int, ...]:
    """Rotation/reflection minimal form of a cycle given as a vertex list."""
    k = len(path)
    best = None
    for seq in (path, path[::-1]):
        for shift in range(k):
            rot = tuple(seq[(shift + i) % k] for i in range(k))
            if best is None or rot < best:
                best = rot
    return best


def _bfs_path(n: int, adj, src: int, dst: int, skip: Edge) -> list[int] | None:
    """Deterministic shortest src..dst path avoiding one edge."""
    parent = [-1] * n
    parent[src] = src
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            break
        for y in adj[x]:
            if edge(x, y) == skip or parent[y] != -1:
                continue
            parent[y] = x
            queue.append(y)
    if parent[dst] == -1:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def shortest_cycle(n: int, edges) -> tuple[int, ...] | None:
    """Lexicographically smallest among the shortest cycles found per edge.

    Every cycle contains an edge, and the shortest cycle through edge (a, b)
    is (a, b) plus a shortest a..b path avoiding it, so the minimum over
    edges has girth length.  Among cycles of that length the canonical
    lexicographic minimum of the per-edge candidates is picked; BFS tie
    breaking makes the outcome a deterministic function of the graph.
    """
    edges = sorted(edge(u, v) for u, v in edges)
    adj = adjacency(n, edges)
    best = None
    for a, b in edges:
        path = _bfs_path(n, adj, a, b, skip=(a, b))
        if path is None:
            continue
        cyc = canonical_cycle(path)
        key = (len(cyc), cyc)
        if best is None or key < best:
            best = key
    return best[1] if best else None


def girth(n: int, edges) -> int | None:
    cyc = shortest_cycle(n, edges)
    return len(cyc) if cyc else None


def max_degree(n: int, edges) -> int:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0)


def biconnected_blocks(n: int, edges) -> list[list[Edge]]:
    """Blocks (2-edge-partition into maximal 2-connected pieces and bridges).

    Iterative lowpoint algorithm; each returned block is a sorted edge list.
    """
    adj = adjacency(n, {edge(u, v) for u, v in edges})
    disc = [-1] * n
    low = [0] * n
    blocks: list[list[Edge]] = []
    stack: list[Edge] = []
    timer = 0
    for root in range(n):
        if disc[root] != -1 or not adj[root]:
            continue
        work = [(root, -1, iter(adj[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while work:
            v, parent, it = work[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    stack.append(edge(v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    work.append((w, v, iter(adj[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    stack.append(edge(v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    block = []
                    while stack and stack[-1] != edge(u, v):
                        block.append(stack.pop())
                    if stack:
                        block.append(stack.pop())
                    if block:
                        blocks.append(sorted(block))
    return blocks


def connected_components(vertices, edges) -> list[list[int]]:
    vertices = sorted(vertices)
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = set()
    comps = []
    for v in vertices:
        if v in seen:
            continue
        comp = []
        queue = deque([v])
        seen.add(v)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in sorted(adj[x]):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        comps.append(sorted(comp))
    return comps
