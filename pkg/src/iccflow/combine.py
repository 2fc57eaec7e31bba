"""Merging apps into one analyzable model and scoping work via an IAC graph.

Cross-app links only matter when both endpoints are analyzed together, so the
corpus is first reduced to an undirected graph whose nodes are apps and whose
edges are induced by cross-app links. Each connected piece is an analysis
unit; pieces larger than ``max_len`` apps are covered by all their connected
induced subsets of exactly ``max_len`` nodes, which guarantees every simple
path of at most ``max_len`` apps lies inside at least one emitted set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .icc import IccLink
from .ir import AppModel


class CombineError(Exception):
    pass


def combine(apps: list[AppModel]) -> AppModel:
    """Merge several apps into one model; components keep their origin app.

    Component objects are shared with the inputs, not copied — downstream
    transformations copy before mutating.
    """
    ids = [a.app_id for a in apps]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise CombineError(f"duplicate app id(s): {', '.join(dupes)}")
    if not apps:
        raise CombineError("nothing to combine")
    merged = AppModel(app_id="+".join(sorted(ids)))
    for app in sorted(apps, key=lambda a: a.app_id):
        merged.components.extend(app.components)
    return merged


def _app_of(qualified_name: str) -> str:
    return qualified_name.rsplit("/", 1)[0]


@dataclass
class IacGraph:
    """Undirected app graph; an edge means at least one cross-app link."""

    nodes: list[str] = field(default_factory=list)
    # key is the sorted app pair
    edges: dict[tuple[str, str], list[IccLink]] = field(default_factory=dict)

    def neighbors(self, app_id: str) -> list[str]:
        out = []
        for a, b in self.edges:
            if a == app_id:
                out.append(b)
            elif b == app_id:
                out.append(a)
        return sorted(out)


def build_iac_graph(apps: list[str], links: list[IccLink]) -> IacGraph:
    graph = IacGraph(nodes=sorted(apps))
    known = set(graph.nodes)
    for link in sorted(links):
        if not link.cross_app:
            continue
        a, b = link.from_stmt.app, _app_of(link.to)
        if a == b or a not in known or b not in known:
            continue
        key = (a, b) if a < b else (b, a)
        graph.edges.setdefault(key, []).append(link)
    return graph


def _components_of(graph: IacGraph) -> list[list[str]]:
    adj: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for a, b in graph.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[str] = set()
    out: list[list[str]] = []
    for start in graph.nodes:
        if start in seen:
            continue
        stack, group = [start], []
        seen.add(start)
        while stack:
            n = stack.pop()
            group.append(n)
            for m in sorted(adj[n]):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        out.append(sorted(group))
    return out


def _connected_ksubsets(nodes: list[str], adj: dict[str, set[str]], k: int) -> list[frozenset[str]]:
    """All connected induced subsets of exactly k nodes."""
    found: set[frozenset[str]] = set()
    visited: set[frozenset[str]] = set()

    def grow(sub: frozenset[str]) -> None:
        if len(sub) == k:
            found.add(sub)
            return
        boundary: set[str] = set()
        for v in sub:
            boundary |= adj[v]
        for w in sorted(boundary - sub):
            nxt = sub | {w}
            if nxt not in visited:
                visited.add(nxt)
                grow(nxt)

    for v in nodes:
        seed = frozenset([v])
        visited.add(seed)
        grow(seed)
    return sorted(found, key=sorted)


def split_graph(graph: IacGraph, max_len: int = 2) -> list[frozenset[str]]:
    """Split into connected app groups, bounding each emitted set's size.

    Groups of at most ``max_len`` apps are emitted whole. A larger group is
    covered by all its connected induced subsets of exactly ``max_len``
    nodes; any leak chain through at most ``max_len`` apps is then fully
    contained in at least one emitted set.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    adj: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for a, b in graph.edges:
        adj[a].add(b)
        adj[b].add(a)
    out: list[frozenset[str]] = []
    for group in _components_of(graph):
        if len(group) <= max_len:
            out.append(frozenset(group))
        else:
            out.extend(_connected_ksubsets(group, adj, max_len))
    return sorted(out, key=sorted)
