"""Domination graphs and perfect matchings between agents."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import Grouping, Instance, OrdinalProfile, ordinal_profile_from_instance

_UNMATCHED = -1
_INF = float("inf")


class PreconditionError(ValueError):
    """A helper was called on inputs outside its stated precondition."""


@dataclass(frozen=True)
class DominationGraph:
    """Agents on both sides; ``edges[i]`` lists the right-agents ``j`` adjacent to ``i``."""

    n: int
    edges: tuple[tuple[int, ...], ...]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.edges[i]

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, j) for i, adj in enumerate(self.edges) for j in adj)


def domination_graph(profile: OrdinalProfile, x: int) -> DominationGraph:
    """Edge ``(i, j)`` iff agent ``i`` ranks ``x`` no lower than ``top(j)``."""
    if not 0 <= x < profile.m:
        raise IndexError(f"alternative index {x} out of range for m={profile.m}")
    pos = profile.positions
    # adj[i, j] = pos[i, x] <= pos[i, top(j)]
    adj = pos[:, [x]] <= pos[:, profile.tops]
    return DominationGraph(profile.n, tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adj))


def maximum_matching(g: DominationGraph) -> dict[int, int]:
    """Hopcroft-Karp; returns ``{left: right}`` for a maximum matching."""
    n = g.n
    adj = g.edges
    match_l = [_UNMATCHED] * n
    match_r = [_UNMATCHED] * n
    dist = [0.0] * n

    def bfs() -> bool:
        q = deque()
        for u in range(n):
            if match_l[u] == _UNMATCHED:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == _UNMATCHED:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        # iterative to stay clear of the recursion limit on long augmenting paths
        stack = [(u, iter(adj[u]))]
        path: list[tuple[int, int]] = []
        while stack:
            node, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == _UNMATCHED:
                    path.append((node, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[node] + 1:
                    path.append((node, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[node] = _INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n):
            if match_l[u] == _UNMATCHED:
                dfs(u)
    return {u: v for u, v in enumerate(match_l) if v != _UNMATCHED}


def has_perfect_matching(g: DominationGraph) -> tuple[bool, dict[int, int] | None]:
    """Return ``(True, witness)`` when every agent can be matched, else ``(False, None)``."""
    mu = maximum_matching(g)
    if len(mu) == g.n:
        return True, mu
    return False, None


def is_valid_matching(g: DominationGraph, mu: dict[int, int]) -> bool:
    """Witness check: bijection on agents using only graph edges."""
    return (
        sorted(mu) == list(range(g.n))
        and sorted(mu.values()) == list(range(g.n))
        and all(g.has_edge(i, j) for i, j in mu.items())
    )


def perfect_matching_alternatives(profile: OrdinalProfile) -> list[int]:
    return [x for x in range(profile.m) if has_perfect_matching(domination_graph(profile, x))[0]]


def lemma_distance_bound_holds(inst: Instance, grp: Grouping, x: int, y: int, tol: float = 1e-9) -> bool:
    """Check ``d(x, y) <= (4/n) * sum_g sum_{i in g} d(i, y)`` for a perfect-matching ``x``.

    Raises :class:`PreconditionError` if the domination graph of ``x`` (under
    the instance's induced profile) has no perfect matching.
    """
    grp.check_agents(inst.n)
    profile = ordinal_profile_from_instance(inst)
    ok, _ = has_perfect_matching(domination_graph(profile, x))
    if not ok:
        raise PreconditionError(f"domination graph of alternative {x} has no perfect matching")
    lhs = inst.dist[inst.alt(x), inst.alt(y)]
    col = inst.agent_alt[:, y]
    rhs = 4.0 / inst.n * sum(float(col[list(g)].sum()) for g in grp.groups)
    return bool(lhs <= rhs + tol)
