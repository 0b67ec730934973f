"""Path-set evaluation: the heart of relevance selection.

An expression names a set of start vertices and a sequence of role names.
Evaluation walks the typed graph one segment at a time: a path grows by one
link when the far endpoint of that link carries the segment's role, stays a
simple path (no repeated vertex or edge), and paths that cannot grow are
retained as they are — a reader who can no longer follow the chain still
cares about the part they reached.  Only full-length paths keep growing;
a path retired at segment k is never picked up again by segment k+1.

The resulting set is prefix-free (a retired path cannot be the prefix of a
survivor, or it could have grown) and is used both to select relevant data
and to drive the timestamp sync.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PathBudgetError, UnboundVariableError, UnknownClassError
from .expr import (
    ClassAll,
    ClassFilter,
    InstanceSet,
    PathExpr,
    USER_VARIABLE,
    satisfies_filter,
)
from .model import Link, Schema, SystemData

DEFAULT_MAX_PATHS = 100_000

Binding = dict[str, str]


class TypedGraph:
    """Immutable view of system data as a graph with typed edges."""

    def __init__(self, data: SystemData, schema: Schema):
        self.schema = schema
        self.vertices: frozenset[str] = frozenset(data.objects)
        self.edges: frozenset[Link] = frozenset(data.links)
        self._classes: dict[str, str] = dict(data.objects)
        adjacency: dict[str, set[Link]] = {}
        for link in data.links:
            adjacency.setdefault(link.src, set()).add(link)
            adjacency.setdefault(link.dst, set()).add(link)
        self._adjacency = adjacency

    def class_of(self, vertex: str) -> str | None:
        return self._classes.get(vertex)

    def adjacent(self, vertex: str) -> set[Link]:
        return self._adjacency.get(vertex, set())

    @property
    def edge_types(self):
        return self.schema.assocs


@dataclass(frozen=True)
class Path:
    """A simple path v0 -e0- v1 -e1- … -e(n-1)- vn; n may be 0.

    Flattened positions interleave vertices and edges: vertex i sits at
    index 2i, edge i at index 2i+1.  Those positions are what the timestamp
    sync's "first created element" calculation runs over.
    """

    vertices: tuple[str, ...]
    edges: tuple[Link, ...] = ()

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("path needs exactly one more vertex than edges")

    @property
    def end(self) -> str:
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.edges)

    def flattened(self) -> tuple[str | Link, ...]:
        out: list[str | Link] = []
        for i, vertex in enumerate(self.vertices):
            out.append(vertex)
            if i < len(self.edges):
                out.append(self.edges[i])
        return tuple(out)

    def elements(self) -> tuple[str | Link, ...]:
        return self.flattened()

    def extended(self, edge: Link, vertex: str) -> Path:
        return Path(self.vertices + (vertex,), self.edges + (edge,))


def end_vertex(p: Path) -> str:
    return p.end


def is_in_role(g: TypedGraph, vertex: str, edge: Link, role: str) -> bool:
    """True iff the association types this end of the link with `role`.

    Both orientations are checked: the vertex may sit at either end, and it
    carries the role declared for that end's class."""
    assoc = g.schema.assocs.get(edge.assoc)
    if assoc is None:
        return False
    if vertex == edge.src and g.class_of(vertex) == assoc.class_a and role == assoc.role_a:
        return True
    if vertex == edge.dst and g.class_of(vertex) == assoc.class_b and role == assoc.role_b:
        return True
    return False


def is_path(p: Path, g: TypedGraph) -> bool:
    if len(set(p.vertices)) != len(p.vertices):
        return False
    if len(set(p.edges)) != len(p.edges):
        return False
    for vertex in p.vertices:
        if vertex not in g.vertices:
            return False
    for i, edge in enumerate(p.edges):
        if edge not in g.edges:
            return False
        if {edge.src, edge.dst} != {p.vertices[i], p.vertices[i + 1]}:
            return False
    return True


def is_sub_path(p: Path, q: Path, g: TypedGraph, proper: bool = False) -> bool:
    """True iff q starts with p (and extends it strictly, when `proper`)."""
    if not is_path(p, g) or not is_path(q, g):
        return False
    if len(p.edges) > len(q.edges):
        return False
    if proper and len(p.edges) == len(q.edges):
        return False
    return (
        q.vertices[: len(p.vertices)] == p.vertices
        and q.edges[: len(p.edges)] == p.edges
    )


def is_in_path(element: str | Link, p: Path) -> bool:
    if isinstance(element, Link):
        return element in p.edges
    return element in p.vertices


def _direct_vertices(
    expr: PathExpr, g: TypedGraph, data: SystemData, binding: Binding | None
) -> set[str]:
    root = expr.root
    if isinstance(root, InstanceSet):
        vertices: set[str] = set()
        for ref in root.refs:
            if ref == USER_VARIABLE:
                if not binding or USER_VARIABLE not in binding:
                    raise UnboundVariableError(
                        f"expression uses {USER_VARIABLE!r} but no binding was given"
                    )
                ref = binding[USER_VARIABLE]
            if ref in g.vertices:
                vertices.add(ref)
        return vertices
    if root.class_name not in g.schema.classes:
        raise UnknownClassError(f"unknown class {root.class_name!r}")
    members = {v for v in g.vertices if g.class_of(v) == root.class_name}
    if isinstance(root, ClassAll):
        return members
    return {v for v in members if satisfies_filter(data.states.get(v, {}), root)}


def evaluate(
    expr: PathExpr,
    g: TypedGraph,
    data: SystemData,
    binding: Binding | None = None,
    *,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> frozenset[Path]:
    """All paths the expression defines over the graph.

    Works segment by segment over a frontier of full-length matches.  A
    frontier path with no valid extension retires into the result as-is;
    extended paths move forward.  The final set is frontier ∪ retired."""
    frontier: set[Path] = {Path((v,)) for v in _direct_vertices(expr, g, data, binding)}
    retired: set[Path] = set()

    def check_budget(extra: int = 0) -> None:
        if len(frontier) + len(retired) + extra > max_paths:
            raise PathBudgetError(
                f"path budget of {max_paths} exceeded while evaluating expression"
            )

    check_budget()
    for role in expr.segments:
        grown: set[Path] = set()
        for path in frontier:
            extended = False
            for edge in g.adjacent(path.end):
                far = edge.dst if path.end == edge.src else edge.src
                if far in path.vertices or edge in path.edges:
                    continue
                if not is_in_role(g, far, edge, role):
                    continue
                grown.add(path.extended(edge, far))
                extended = True
                if len(grown) + len(retired) > max_paths:
                    raise PathBudgetError(
                        f"path budget of {max_paths} exceeded while evaluating expression"
                    )
            if not extended:
                retired.add(path)
        frontier = grown
        check_budget()
    return frozenset(frontier | retired)


@dataclass
class RelevantData:
    """The slice of system data a user cares about, plus which paths back
    each object (count of distinct paths through it)."""

    data: SystemData
    provenance: dict[str, int] = field(default_factory=dict)


def relevant_paths(
    schema: Schema,
    data: SystemData,
    exprs: list[PathExpr],
    binding: Binding | None = None,
    *,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> frozenset[Path]:
    g = TypedGraph(data, schema)
    paths: set[Path] = set()
    for expr in exprs:
        paths |= evaluate(expr, g, data, binding, max_paths=max_paths)
    return frozenset(paths)


def data_from_paths(paths: frozenset[Path], data: SystemData) -> SystemData:
    objects: dict[str, str] = {}
    links: set[Link] = set()
    for path in paths:
        for vertex in path.vertices:
            objects[vertex] = data.objects[vertex]
        links.update(path.edges)
    states = {oid: dict(data.states[oid]) for oid in objects}
    return SystemData(objects=objects, links=links, states=states)


def select_relevant(
    schema: Schema,
    data: SystemData,
    exprs: list[PathExpr],
    binding: Binding | None = None,
    *,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> RelevantData:
    paths = relevant_paths(schema, data, exprs, binding, max_paths=max_paths)
    provenance: dict[str, int] = {}
    for path in paths:
        for vertex in path.vertices:
            provenance[vertex] = provenance.get(vertex, 0) + 1
    return RelevantData(data=data_from_paths(paths, data), provenance=provenance)


__all__ = [
    "Binding",
    "DEFAULT_MAX_PATHS",
    "Path",
    "RelevantData",
    "TypedGraph",
    "data_from_paths",
    "end_vertex",
    "evaluate",
    "is_in_path",
    "is_in_role",
    "is_path",
    "is_sub_path",
    "relevant_paths",
    "select_relevant",
]
