"""Yen's k shortest loopless paths with a total order on ties.

Paths compare by (length, node sequence). Dijkstra labels carry the path
itself, so among equal-length paths the lexicographically smallest wins; the
same order drives the candidate heap, which makes the output deterministic.
"""

from __future__ import annotations

import heapq
from typing import Iterable

from ..netmodel import Network

__all__ = ["yen_ksp", "path_length"]


def path_length(network: Network, path: Iterable[int]) -> float:
    path = tuple(path)
    total = 0.0
    for uv in zip(path[:-1], path[1:]):
        total += network.links[uv]
    return total


def _dijkstra(network: Network, src: int, dst: int, banned_nodes: set, banned_links: set):
    best = {src: (0.0, (src,))}
    heap = [(0.0, (src,))]
    done = set()
    while heap:
        dist, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return path
        for v in network.adjacency[u]:
            if v in banned_nodes or (u, v) in banned_links or v in done:
                continue
            label = (dist + network.links[(u, v)], path + (v,))
            if v not in best or label < best[v]:
                best[v] = label
                heapq.heappush(heap, label)
    return None


def yen_ksp(network: Network, src: int, dst: int, k: int) -> list[tuple[int, ...]]:
    if src == dst:
        raise ValueError("src and dst must differ")
    if k < 1:
        raise ValueError("k must be >= 1")
    if src not in network.adjacency or dst not in network.adjacency:
        return []
    first = _dijkstra(network, src, dst, set(), set())
    if first is None:
        return []
    found = [first]
    seen = {first}
    cand: list[tuple[float, tuple[int, ...]]] = []
    while len(found) < k:
        last = found[-1]
        for s in range(len(last) - 1):
            root = last[: s + 1]
            banned_links = {
                (p[s], p[s + 1]) for p in found if len(p) > s + 1 and p[: s + 1] == root
            }
            banned_nodes = set(root[:-1])
            spur = _dijkstra(network, root[-1], dst, banned_nodes, banned_links)
            if spur is None:
                continue
            path = root[:-1] + spur
            if path not in seen:
                seen.add(path)
                heapq.heappush(cand, (path_length(network, path), path))
        if not cand:
            break
        found.append(heapq.heappop(cand)[1])
    return found
