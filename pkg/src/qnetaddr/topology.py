"""Bell-pair network graphs and deterministic spanning trees.

The topology file format is line oriented UTF-8:

    # comment
    device <id>
    bell <i> <j>

Device ids are integers in [1, 2**16); devices must be declared before
they appear in a ``bell`` edge. The graph must be connected.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import (
    DisconnectedTopology,
    DuplicateEdge,
    TopologyFormatError,
    UnknownDevice,
)

MAX_DEVICE_ID = (1 << 16) - 1

Edge = tuple[int, int]


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Topology:
    """Devices plus undirected Bell-pair edges; connected by construction."""

    devices: frozenset[int]
    bell_edges: frozenset[Edge]

    def neighbors(self, device: int) -> list[int]:
        if device not in self.devices:
            raise UnknownDevice(f"device {device} not in topology")
        out = [j for i, j in self.bell_edges if i == device]
        out += [i for i, j in self.bell_edges if j == device]
        return sorted(out)

    @property
    def device_count(self) -> int:
        return len(self.devices)


@dataclass(frozen=True)
class SpanningTree:
    """Rooted tree over a topology; every tree edge is a Bell edge."""

    root: int
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]

    @property
    def devices(self) -> list[int]:
        return sorted(self.children)

    def path_from_root(self, device: int) -> tuple[int, ...]:
        """Device sequence from the root to ``device``, inclusive."""
        if device not in self.children:
            raise UnknownDevice(f"device {device} not in tree")
        path = [device]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return tuple(reversed(path))

    def subtree(self, device: int) -> frozenset[int]:
        """All devices in the subtree rooted at ``device`` (inclusive)."""
        if device not in self.children:
            raise UnknownDevice(f"device {device} not in tree")
        seen = {device}
        queue = deque([device])
        while queue:
            for child in self.children[queue.popleft()]:
                seen.add(child)
                queue.append(child)
        return frozenset(seen)

    def distance(self, a: int, b: int) -> int:
        """Number of tree edges on the unique path between two devices."""
        pa, pb = self.path_from_root(a), self.path_from_root(b)
        common = 0
        for x, y in zip(pa, pb):
            if x != y:
                break
            common += 1
        return (len(pa) - common) + (len(pb) - common)

    def leaves(self) -> tuple[int, ...]:
        return tuple(sorted(d for d, c in self.children.items() if not c))


def parse_topology(text: str) -> Topology:
    """Parse the topology file format, raising diagnostics with line numbers."""
    devices: set[int] = set()
    edges: set[Edge] = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "device":
            if len(fields) != 2:
                raise TopologyFormatError("expected 'device <id>'", number)
            ident = _parse_id(fields[1], number)
            if ident in devices:
                raise TopologyFormatError(f"device {ident} declared twice", number)
            devices.add(ident)
        elif fields[0] == "bell":
            if len(fields) != 3:
                raise TopologyFormatError("expected 'bell <i> <j>'", number)
            i = _parse_id(fields[1], number)
            j = _parse_id(fields[2], number)
            if i == j:
                raise DuplicateEdge(f"self-loop on device {i}", number)
            for d in (i, j):
                if d not in devices:
                    raise UnknownDevice(f"device {d} used before declaration", number)
            edge = _edge(i, j)
            if edge in edges:
                raise DuplicateEdge(f"edge {edge[0]}-{edge[1]} declared twice", number)
            edges.add(edge)
        else:
            raise TopologyFormatError(f"unknown directive {fields[0]!r}", number)
    if not devices:
        raise TopologyFormatError("no devices declared")
    _check_connected(devices, edges)
    return Topology(frozenset(devices), frozenset(edges))


def _parse_id(token: str, line: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise TopologyFormatError(f"not an integer id: {token!r}", line) from None
    if not 1 <= value <= MAX_DEVICE_ID:
        raise TopologyFormatError(f"device id {value} outside [1, 2^16)", line)
    return value


def _check_connected(devices: set[int], edges: set[Edge]) -> None:
    adjacency: dict[int, set[int]] = {d: set() for d in devices}
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    start = min(devices)
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    missing = devices - seen
    if missing:
        raise DisconnectedTopology(
            f"devices unreachable from {start}: {sorted(missing)}"
        )


def build_mst(topology: Topology, root: int) -> SpanningTree:
    """Breadth-first spanning tree from ``root``.

    The Bell-pair graph carries no edge weights, so the minimal tree is
    taken hop-count-minimal: BFS with neighbors explored in ascending
    device id, which makes the result deterministic.
    """
    if root not in topology.devices:
        raise UnknownDevice(f"root device {root} not in topology")
    adjacency: dict[int, list[int]] = {d: [] for d in topology.devices}
    for i, j in topology.bell_edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    for d in adjacency:
        adjacency[d].sort()

    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {d: [] for d in topology.devices}
    seen = {root}
    queue = deque([root])
    while queue:
        current = queue.popleft()
        for nxt in adjacency[current]:
            if nxt in seen:
                continue
            seen.add(nxt)
            parent[nxt] = current
            children[current].append(nxt)
            queue.append(nxt)
    return SpanningTree(root, parent, {d: tuple(c) for d, c in children.items()})


def reach_sets(tree: SpanningTree) -> dict[int, frozenset[int]]:
    """Per root-neighbor, the devices reachable by consuming that Bell pair.

    The sets partition the devices other than the root.
    """
    return {child: tree.subtree(child) for child in tree.children[tree.root]}


def to_dot(topology: Topology, tree: SpanningTree | None = None) -> str:
    """Render as a DOT digraph; tree edges solid, other Bell edges dashed."""
    lines = ["digraph network {"]
    for device in sorted(topology.devices):
        lines.append(f"  {device};")
    tree_edges: set[Edge] = set()
    if tree is not None:
        tree_edges = {_edge(child, parent) for child, parent in tree.parent.items()}
        for child in sorted(tree.parent):
            lines.append(f"  {tree.parent[child]} -> {child};")
    for i, j in sorted(topology.bell_edges):
        if (i, j) in tree_edges:
            continue
        style = ' [dir=none, style=dashed]' if tree is not None else " [dir=none]"
        lines.append(f"  {i} -> {j}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
