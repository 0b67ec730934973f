"""Client-side replica: applies deltas, pushes local changes, sweeps garbage.

The replica holds a plain SystemData plus the sync cursor and the relevance
expressions (shipped to the client so it can evaluate relevance locally).
Delta application is deliberately tolerant — the timestamp algorithm may
over-deliver, re-deliver, or announce deletions of things this client never
had — and is ordered so no step observes a dangling reference: object
creates, link creates, updates, link deletes, object deletes, then the GC
sweep drops whatever is no longer on any locally-relevant path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .delta import DeltaSet, render_state
from .errors import (
    AlreadyDeletedError,
    DuplicateIdError,
    DuplicateLinkError,
    IdReuseError,
    OfflinePushError,
    UnknownIdError,
)
from .expr import PathExpr
from .model import (
    CreateLink,
    CreateObject,
    DeleteLink,
    DeleteObject,
    Link,
    Mutation,
    Schema,
    SystemData,
    UpdateState,
)
from .paths import relevant_paths
from .sync import SyncCursor


@dataclass
class Replica:
    name: str
    root: str
    exprs: list[PathExpr]
    schema: Schema
    data: SystemData = field(default_factory=SystemData)
    cursor: SyncCursor = None  # type: ignore[assignment]
    divergence_warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.cursor is None:
            self.cursor = SyncCursor(user=self.root)

    def warn(self, message: str) -> None:
        self.divergence_warnings.append(f"{self.name}: {message}")

    # -- delta application ----------------------------------------------------

    def apply_delta(self, delta: DeltaSet) -> None:
        data = self.data
        for oid, cls in sorted(delta.crt_objects):
            existing = data.objects.get(oid)
            if existing is not None and existing != cls:
                raise IdReuseError(
                    f"create of {oid} as {cls} conflicts with existing class {existing}"
                )
            data.objects[oid] = cls
            data.states[oid] = dict(delta.states.get(oid, {}))
        for link in delta.crt_links:
            if link.src in data.objects and link.dst in data.objects:
                data.links.add(link)
            else:
                # Can happen when the server over-delivers a link whose
                # endpoint this client is not entitled to; holding the link
                # back keeps the replica free of dangling references.
                self.warn(
                    f"dropped link {link.src} {link.assoc} {link.dst}: endpoint missing"
                )
        for oid in delta.upd_objects:
            if oid in data.objects:
                data.states[oid] = dict(delta.states.get(oid, {}))
            else:
                # The update wire format carries no class, so the unknown
                # target cannot be materialized as a create; skip it.  Any
                # object this starves of state is off-path locally and the
                # sweep removes it anyway.
                self.warn(f"skipped update of unknown object {oid}")
        for link in delta.del_links:
            data.links.discard(link)
        for oid in delta.del_objects:
            if oid not in data.objects:
                continue  # deletions are broadcast; unknown ids are expected
            for link in list(data.links):
                if link.touches(oid):
                    data.links.discard(link)
            del data.objects[oid]
            data.states.pop(oid, None)
        self.cursor.ts_ls = delta.ts_cs

    def gc_sweep(self) -> set[str]:
        """Drop everything not on a locally-relevant path (the root object
        always stays).  Returns the removed object ids.  One pass reaches a
        fixed point: removal only ever shrinks the path sets further."""
        paths = relevant_paths(
            self.schema, self.data, self.exprs, {"user": self.root}
        )
        keep_objects: set[str] = {self.root}
        keep_links: set[Link] = set()
        for p in paths:
            keep_objects.update(p.vertices)
            keep_links.update(p.edges)
        removed = {oid for oid in self.data.objects if oid not in keep_objects}
        for oid in removed:
            del self.data.objects[oid]
            self.data.states.pop(oid, None)
        self.data.links = {l for l in self.data.links if l in keep_links}
        return removed

    def ingest(self, delta: DeltaSet) -> None:
        self.apply_delta(delta)
        self.gc_sweep()

    # -- local changes ----------------------------------------------------------

    def push_local_change(self, mutation: Mutation, server) -> int | None:
        """Apply a local mutation and forward it as one server transaction.

        The local copy changes first (the mutation must make sense against
        the replica's view), but a server rejection rolls it back, so a
        failed push leaves no trace."""
        if server is None:
            raise OfflinePushError(f"{self.name} is offline; push not queued")
        before = self.data.copy()
        self._apply_local(mutation)
        try:
            return server.apply([mutation])
        except Exception:
            self.data = before
            raise

    def _apply_local(self, mutation: Mutation) -> None:
        data = self.data
        if isinstance(mutation, CreateObject):
            if mutation.object_id in data.objects:
                raise DuplicateIdError(f"object {mutation.object_id} already exists")
            data.objects[mutation.object_id] = mutation.class_name
            data.states[mutation.object_id] = mutation.state_dict()
        elif isinstance(mutation, UpdateState):
            if mutation.object_id not in data.objects:
                raise UnknownIdError(f"unknown object {mutation.object_id}")
            data.states[mutation.object_id] = mutation.state_dict()
        elif isinstance(mutation, DeleteObject):
            if mutation.object_id not in data.objects:
                raise AlreadyDeletedError(f"object {mutation.object_id} not present")
            for link in list(data.links):
                if link.touches(mutation.object_id):
                    data.links.discard(link)
            del data.objects[mutation.object_id]
            data.states.pop(mutation.object_id, None)
        elif isinstance(mutation, CreateLink):
            link = mutation.link
            if link.src not in data.objects or link.dst not in data.objects:
                raise UnknownIdError(
                    f"link {link.src} {link.assoc} {link.dst}: endpoint not replicated"
                )
            if link in data.links:
                raise DuplicateLinkError(f"link {link.src} {link.assoc} {link.dst} exists")
            data.links.add(link)
        elif isinstance(mutation, DeleteLink):
            if mutation.link not in data.links:
                raise UnknownIdError(
                    f"link {mutation.link.src} {mutation.link.assoc} "
                    f"{mutation.link.dst} not replicated"
                )
            data.links.discard(mutation.link)
        else:  # pragma: no cover - exhaustive over the Mutation union
            raise TypeError(f"not a mutation: {mutation!r}")

    # -- rendering ---------------------------------------------------------------

    def dump(self) -> str:
        lines = []
        for oid in sorted(self.data.objects):
            cls = self.data.objects[oid]
            lines.append(f"obj {oid} {cls} {render_state(self.data.states.get(oid, {}))}")
        for link in sorted(self.data.links, key=lambda l: (l.src, l.assoc, l.dst)):
            lines.append(f"link {link.src} {link.assoc} {link.dst}")
        return "".join(line + "\n" for line in lines)


__all__ = ["Replica"]
