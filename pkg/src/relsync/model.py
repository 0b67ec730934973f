"""Typed object-graph data model: schema, system data, links, and mutations.

System data is the triple of objects (id -> class), links (typed triples),
and per-object attribute states.  A schema constrains which classes exist
and which class pairs each association may join.  Mutations are the only
way the store changes system data; they are plain values so scenarios,
replicas, and the fuzzer can all build them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import TokenError

# Attribute values are flat scalars; states compare by exact equality.
Scalar = str | int | bool
State = dict[str, Scalar]

# Tokens appear in the scenario DSL, expression syntax, and canonical dumps,
# so they must be free of the punctuation those formats reserve.
_TOKEN_FORBIDDEN = re.compile(r'[\s.{}\[\]"=,:]')


def validate_token(name: str, what: str = "name") -> str:
    if not name:
        raise TokenError(f"{what} must be a nonempty token")
    if _TOKEN_FORBIDDEN.search(name):
        raise TokenError(f"{what} {name!r} contains whitespace or reserved punctuation")
    return name


@dataclass(frozen=True)
class AssociationDef:
    """A link type joining two classes, with a role name for each end.

    `role_a` names objects of `class_a` as seen from the `class_b` side,
    and symmetrically for `role_b`.  A self-association (class_a == class_b)
    must use two distinct roles or traversal direction would be ambiguous.
    """

    name: str
    class_a: str
    role_a: str
    class_b: str
    role_b: str

    def __post_init__(self):
        for value, what in (
            (self.name, "association name"),
            (self.class_a, "class name"),
            (self.class_b, "class name"),
            (self.role_a, "role name"),
            (self.role_b, "role name"),
        ):
            validate_token(value, what)
        if self.class_a == self.class_b and self.role_a == self.role_b:
            raise TokenError(
                f"self-association {self.name!r} needs two distinct roles"
            )


@dataclass(frozen=True, order=True)
class Link:
    """A typed link; identity is the full (src, dst, association) triple."""

    src: str
    dst: str
    assoc: str

    def endpoints(self) -> tuple[str, str]:
        return (self.src, self.dst)

    def touches(self, object_id: str) -> bool:
        return object_id == self.src or object_id == self.dst

    def other_end(self, object_id: str) -> str:
        if object_id == self.src:
            return self.dst
        if object_id == self.dst:
            return self.src
        raise ValueError(f"{object_id} is not an endpoint of {self}")


class Schema:
    """Classes plus named associations; validates system data against both."""

    def __init__(self, classes: set[str], assocs: list[AssociationDef] | None = None):
        self.classes: set[str] = set()
        self.assocs: dict[str, AssociationDef] = {}
        for cls in classes:
            self.add_class(cls)
        for assoc in assocs or []:
            self.add_assoc(assoc)

    def add_class(self, name: str) -> None:
        validate_token(name, "class name")
        if name in self.classes:
            raise TokenError(f"duplicate class {name!r}")
        self.classes.add(name)

    def add_assoc(self, assoc: AssociationDef) -> None:
        if assoc.name in self.assocs:
            raise TokenError(f"duplicate association {assoc.name!r}")
        for cls in (assoc.class_a, assoc.class_b):
            if cls not in self.classes:
                raise TokenError(
                    f"association {assoc.name!r} references unknown class {cls!r}"
                )
        self.assocs[assoc.name] = assoc

    def assoc(self, name: str) -> AssociationDef:
        return self.assocs[name]


@dataclass
class SystemData:
    """The full content of one store: objects, links, and states.

    Invariants (maintained by the store, re-checked by validate_schema):
    every link endpoint is a live object, and every live object has a state
    entry (possibly empty).
    """

    objects: dict[str, str] = field(default_factory=dict)
    links: set[Link] = field(default_factory=set)
    states: dict[str, State] = field(default_factory=dict)

    def copy(self) -> SystemData:
        return SystemData(
            objects=dict(self.objects),
            links=set(self.links),
            states={oid: dict(state) for oid, state in self.states.items()},
        )

    def class_of(self, object_id: str) -> str | None:
        return self.objects.get(object_id)

    def links_touching(self, object_id: str) -> set[Link]:
        return {l for l in self.links if l.touches(object_id)}

    def __deepcopy__(self, memo):
        data = self.copy()
        memo[id(self)] = data
        return data


def empty_data() -> SystemData:
    return SystemData()


# Mutations -----------------------------------------------------------------

@dataclass(frozen=True)
class CreateObject:
    object_id: str
    class_name: str
    state: tuple[tuple[str, Scalar], ...]

    @staticmethod
    def make(object_id: str, class_name: str, state: State | None = None) -> CreateObject:
        return CreateObject(object_id, class_name, _freeze_state(state or {}))

    def state_dict(self) -> State:
        return dict(self.state)


@dataclass(frozen=True)
class UpdateState:
    object_id: str
    state: tuple[tuple[str, Scalar], ...]

    @staticmethod
    def make(object_id: str, state: State) -> UpdateState:
        return UpdateState(object_id, _freeze_state(state))

    def state_dict(self) -> State:
        return dict(self.state)


@dataclass(frozen=True)
class DeleteObject:
    object_id: str


@dataclass(frozen=True)
class CreateLink:
    link: Link


@dataclass(frozen=True)
class DeleteLink:
    link: Link


Mutation = CreateObject | UpdateState | DeleteObject | CreateLink | DeleteLink


def _freeze_state(state: State) -> tuple[tuple[str, Scalar], ...]:
    return tuple(sorted(state.items()))


# Validation and sub-data ---------------------------------------------------

@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_schema(schema: Schema, data: SystemData) -> ValidationReport:
    """Check system data against a schema.

    Reports one violation per offending object or link: unknown classes,
    links whose association is undeclared or whose endpoint classes do not
    match it, dangling link endpoints, and object/state bookkeeping drift.
    """
    report = ValidationReport()
    for oid, cls in data.objects.items():
        if cls not in schema.classes:
            report.violations.append(f"object {oid}: unknown class {cls!r}")
    for link in sorted(data.links):
        assoc = schema.assocs.get(link.assoc)
        if assoc is None:
            report.violations.append(
                f"link {link.src} {link.assoc} {link.dst}: unknown association"
            )
            continue
        src_cls = data.objects.get(link.src)
        dst_cls = data.objects.get(link.dst)
        if src_cls is None or dst_cls is None:
            report.violations.append(
                f"link {link.src} {link.assoc} {link.dst}: dangling endpoint"
            )
            continue
        if src_cls != assoc.class_a or dst_cls != assoc.class_b:
            report.violations.append(
                f"link {link.src} {link.assoc} {link.dst}: link class mismatch "
                f"({src_cls}-{dst_cls} vs {assoc.class_a}-{assoc.class_b})"
            )
    for oid in data.objects:
        if oid not in data.states:
            report.violations.append(f"object {oid}: missing state entry")
    for oid in data.states:
        if oid not in data.objects:
            report.violations.append(f"state {oid}: no such object")
    return report


def is_subdata(d2: SystemData, d1: SystemData) -> bool:
    """True iff d2 is a restriction of d1 to a subset of its objects.

    Objects keep their classes, links are a subset of d1's links between
    d2's objects, and states agree exactly on d2's objects.
    """
    for oid, cls in d2.objects.items():
        if d1.objects.get(oid) != cls:
            return False
    for link in d2.links:
        if link not in d1.links:
            return False
        if link.src not in d2.objects or link.dst not in d2.objects:
            return False
    for oid in d2.objects:
        if d2.states.get(oid) != d1.states.get(oid):
            return False
    return True


def deep_state_copy(states: dict[str, State]) -> dict[str, State]:
    return {oid: dict(state) for oid, state in states.items()}


__all__ = [
    "AssociationDef",
    "CreateLink",
    "CreateObject",
    "DeleteLink",
    "DeleteObject",
    "Link",
    "Mutation",
    "Scalar",
    "Schema",
    "State",
    "SystemData",
    "UpdateState",
    "ValidationReport",
    "deep_state_copy",
    "empty_data",
    "is_subdata",
    "validate_schema",
    "validate_token",
]
