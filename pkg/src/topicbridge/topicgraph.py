"""Weighted topic co-contribution graph and intermediary-topic discovery.

Topics are nodes; an edge joins two topics when at least one user holds
both above the significance threshold, weighted by the fraction of all
users doing so. Centrality over this graph (weighted closeness by default,
current-flow closeness as a variant) ranks topics; the top half by
centrality — median inclusive — form the intermediary topic set.
"""

from __future__ import annotations

import heapq
import json
import logging
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .topics import TopicVector, significant_topics

logger = logging.getLogger(__name__)

GRAPH_FORMAT_VERSION = 1

WEIGHTED_CLOSENESS = "weighted_closeness"
CURRENT_FLOW_CLOSENESS = "current_flow_closeness"
CENTRALITY_METHODS = (WEIGHTED_CLOSENESS, CURRENT_FLOW_CLOSENESS)


@dataclass(frozen=True)
class TopicGraph:
    """Undirected weighted graph over topic ids 0..k-1; no self-loops."""

    k: int
    epsilon: float
    n_users: int
    edges: dict[tuple[int, int], float]  # keys (i, j) with i < j, weights in (0, 1]

    @property
    def nodes(self) -> range:
        return range(self.k)

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        key = (i, j) if i < j else (j, i)
        return self.edges.get(key, 0.0)

    def adjacency(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {v: [] for v in self.nodes}
        for (i, j), w in self.edges.items():
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


@dataclass(frozen=True)
class IntermediaryTopicSet:
    """Topics in the top 50% by centrality (ties at the median included)."""

    topic_ids: frozenset[int]
    centrality: dict[int, float]
    threshold: float
    method: str
    epsilon: float

    def __contains__(self, topic: int) -> bool:
        return topic in self.topic_ids


def build_graph(vectors: list[TopicVector], epsilon: float) -> TopicGraph:
    """Build the co-contribution graph from all user topic vectors.

    Edge (i, j) exists iff some user has P(t_i|u) >= epsilon and
    P(t_j|u) >= epsilon; its weight is the fraction of all users for whom
    both are significant. Isolated topics stay as nodes.
    """
    if not vectors:
        raise ValueError("at least one topic vector is required")
    k = len(vectors[0].probs)
    if any(len(v.probs) != k for v in vectors):
        raise ValueError("all vectors must share the same k")
    counts: dict[tuple[int, int], int] = {}
    for vector in vectors:
        sig = sorted(significant_topics(vector, epsilon))
        for a in range(len(sig)):
            for b in range(a + 1, len(sig)):
                key = (sig[a], sig[b])
                counts[key] = counts.get(key, 0) + 1
    n_users = len(vectors)
    edges = {key: c / n_users for key, c in counts.items()}
    return TopicGraph(k=k, epsilon=epsilon, n_users=n_users, edges=edges)


def centrality(graph: TopicGraph, method: str = WEIGHTED_CLOSENESS) -> dict[int, float]:
    """Centrality of every node under the chosen method.

    weighted_closeness: edge length 1/weight; Wasserman–Faust scaling for
    disconnected graphs; isolated nodes 0. current_flow_closeness: computed
    on the largest connected component, 0 elsewhere.
    """
    if method == WEIGHTED_CLOSENESS:
        return weighted_closeness(graph)
    if method == CURRENT_FLOW_CLOSENESS:
        return current_flow_closeness(graph)
    raise ValueError(f"unknown centrality method: {method}")


def weighted_closeness(graph: TopicGraph) -> dict[int, float]:
    """Closeness over shortest paths with edge length = 1/weight.

    closeness(v) = (n_reach - 1) / sum(d(v, u)), scaled by
    (n_reach - 1)/(n - 1) so scores stay comparable across components.
    """
    n = graph.k
    if n == 0:
        return {}
    adj = graph.adjacency()
    scores: dict[int, float] = {}
    for v in graph.nodes:
        dist = _dijkstra(adj, v)
        reach = len(dist)  # includes v itself
        if reach <= 1 or n <= 1:
            scores[v] = 0.0
            continue
        total = sum(dist.values())
        scores[v] = ((reach - 1) / total) * ((reach - 1) / (n - 1))
    return scores


def _dijkstra(adj: dict[int, list[tuple[int, float]]], source: int) -> dict[int, float]:
    dist = {source: 0.0}
    heap: list[tuple[float, int]] = [(0.0, source)]
    done: set[int] = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in adj[v]:
            nd = d + 1.0 / w
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def current_flow_closeness(graph: TopicGraph) -> dict[int, float]:
    """Current-flow (information) closeness on the largest component.

    Treats edge weights as conductances; C(v) = 1 / sum of effective
    resistances from v to every other node of the component, via the
    pseudoinverse of the component Laplacian. Nodes outside the largest
    component (ties broken toward the component containing the smallest
    node id) score 0.
    """
    scores = {v: 0.0 for v in graph.nodes}
    if graph.k == 0:
        return {}
    component = _largest_component(graph)
    if len(component) < 2:
        return scores
    nodes = sorted(component)
    index = {v: i for i, v in enumerate(nodes)}
    m = len(nodes)
    lap = np.zeros((m, m), dtype=np.float64)
    for (i, j), w in graph.edges.items():
        if i in index and j in index:
            a, b = index[i], index[j]
            lap[a, a] += w
            lap[b, b] += w
            lap[a, b] -= w
            lap[b, a] -= w
    pinv = np.linalg.pinv(lap)
    diag = np.diag(pinv)
    for v in nodes:
        a = index[v]
        r_eff = diag[a] + diag - 2.0 * pinv[a]
        scores[v] = 1.0 / float(r_eff.sum())
    return scores


def _largest_component(graph: TopicGraph) -> set[int]:
    adj = graph.adjacency()
    seen: set[int] = set()
    best: set[int] = set()
    for start in graph.nodes:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for u, _ in adj[v]:
                if u not in seen:
                    seen.add(u)
                    comp.add(u)
                    stack.append(u)
        if len(comp) > len(best):
            best = comp
    return best


def intermediary_topics(graph: TopicGraph, method: str = WEIGHTED_CLOSENESS) -> IntermediaryTopicSet:
    """Topics whose centrality is >= the median over all graph nodes."""
    scores = centrality(graph, method)
    if not scores:
        return IntermediaryTopicSet(
            topic_ids=frozenset(), centrality={}, threshold=0.0,
            method=method, epsilon=graph.epsilon,
        )
    threshold = statistics.median(scores.values())
    topic_ids = frozenset(t for t, c in scores.items() if c >= threshold)
    return IntermediaryTopicSet(
        topic_ids=topic_ids,
        centrality=scores,
        threshold=threshold,
        method=method,
        epsilon=graph.epsilon,
    )


# ---------------------------------------------------------------------------
# Graph artifact: nodes, weighted edges, centralities and intermediary ids
# in one JSON file, as produced by the `graph` CLI command.
# ---------------------------------------------------------------------------


def save_graph_bundle(
    path: str | Path,
    graph: TopicGraph,
    itset: IntermediaryTopicSet,
    topic_labels: dict[int, list[str]] | None = None,
) -> None:
    bundle = {
        "format_version": GRAPH_FORMAT_VERSION,
        "k": graph.k,
        "epsilon": graph.epsilon,
        "n_users": graph.n_users,
        "method": itset.method,
        "edges": [[i, j, w] for (i, j), w in sorted(graph.edges.items())],
        "centrality": {str(t): c for t, c in sorted(itset.centrality.items())},
        "threshold": itset.threshold,
        "intermediary_topics": sorted(itset.topic_ids),
        "topic_labels": {str(t): words for t, words in sorted((topic_labels or {}).items())},
    }
    Path(path).write_text(json.dumps(bundle, separators=(",", ":"), ensure_ascii=False), "utf-8")


def load_graph_bundle(path: str | Path) -> tuple[TopicGraph, IntermediaryTopicSet, dict[int, list[str]]]:
    bundle = json.loads(Path(path).read_text("utf-8"))
    if bundle.get("format_version") != GRAPH_FORMAT_VERSION:
        raise ValueError(f"unsupported graph format: {bundle.get('format_version')}")
    graph = TopicGraph(
        k=bundle["k"],
        epsilon=bundle["epsilon"],
        n_users=bundle["n_users"],
        edges={(i, j): w for i, j, w in bundle["edges"]},
    )
    itset = IntermediaryTopicSet(
        topic_ids=frozenset(bundle["intermediary_topics"]),
        centrality={int(t): c for t, c in bundle["centrality"].items()},
        threshold=bundle["threshold"],
        method=bundle["method"],
        epsilon=bundle["epsilon"],
    )
    labels = {int(t): words for t, words in bundle.get("topic_labels", {}).items()}
    return graph, itset, labels
