"""Deterministic scenario execution: server + replicas + assertions.

The runner owns one store and one replica per declared client and walks the
scenario's steps in order.  Sync steps run the engine selected by `mode`:
`timestamp` uses the log-based algorithm, `oracle` the snapshot-diff one,
and `both` applies the timestamp delta while also computing the oracle
delta as a shadow and checking, after apply + GC, that the replica equals
the relevant slice of the server data exactly.  Assertion steps append
DivergenceReports instead of raising; step-level execution errors abort
with the step index attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .delta import DeltaSet, render_delta, render_state
from .errors import RelsyncError, ScenarioRuntimeError
from .oracle import SnapshotOracle
from .paths import select_relevant
from .replica import Replica
from .scenario import (
    AssertConvergedStep,
    AssertDeltaStep,
    PushStep,
    Scenario,
    SyncStep,
    TxStep,
)
from .store import Store
from .sync import timestamp_sync

MODES = ("timestamp", "oracle", "both")


@dataclass
class DivergenceReport:
    step_index: int
    client: str
    missing: list[str] = field(default_factory=list)
    extra: list[str] = field(default_factory=list)
    state_mismatches: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.missing or self.extra or self.state_mismatches)

    def render(self) -> str:
        lines = [
            f"step {self.step_index} client {self.client}: "
            f"{len(self.missing)} missing, {len(self.extra)} extra, "
            f"{len(self.state_mismatches)} state mismatches"
        ]
        lines.extend(f"  missing {item}" for item in self.missing)
        lines.extend(f"  extra {item}" for item in self.extra)
        lines.extend(f"  state {item}" for item in self.state_mismatches)
        return "".join(line + "\n" for line in lines)


# Called after every sync step: (ctx, step_index, client, applied delta,
# shadow oracle delta or None).  Lets tests observe both algorithms mid-run.
SyncHook = Callable[["RunContext", int, str, DeltaSet, DeltaSet | None], None]


@dataclass
class RunContext:
    scenario: Scenario
    mode: str
    store: Store
    oracle: SnapshotOracle
    replicas: dict[str, Replica]
    reports: list[DivergenceReport] = field(default_factory=list)
    dump_dir: Path | None = None
    on_sync: SyncHook | None = None


def compare_replica(ctx: RunContext, client: str) -> tuple[list[str], list[str], list[str]]:
    """Diff a replica against the relevant slice of current server data."""
    replica = ctx.replicas[client]
    decl = ctx.scenario.clients[client]
    rel = select_relevant(
        ctx.scenario.schema, ctx.store.data, decl.exprs, {"user": decl.root}
    ).data
    local = replica.data
    missing = [f"obj {oid}" for oid in sorted(set(rel.objects) - set(local.objects))]
    extra = [f"obj {oid}" for oid in sorted(set(local.objects) - set(rel.objects))]
    link_key = lambda l: (l.src, l.assoc, l.dst)
    missing += [
        f"link {l.src} {l.assoc} {l.dst}"
        for l in sorted(rel.links - local.links, key=link_key)
    ]
    extra += [
        f"link {l.src} {l.assoc} {l.dst}"
        for l in sorted(local.links - rel.links, key=link_key)
    ]
    mismatches = []
    for oid in sorted(set(rel.objects) & set(local.objects)):
        if rel.objects[oid] != local.objects[oid]:
            mismatches.append(
                f"{oid} class {local.objects[oid]} != {rel.objects[oid]}"
            )
        elif rel.states.get(oid) != local.states.get(oid):
            mismatches.append(
                f"{oid} {render_state(local.states.get(oid, {}))} "
                f"!= {render_state(rel.states.get(oid, {}))}"
            )
    return missing, extra, mismatches


def _dump(ctx: RunContext, name: str, delta: DeltaSet) -> None:
    if ctx.dump_dir is not None:
        ctx.dump_dir.mkdir(parents=True, exist_ok=True)
        (ctx.dump_dir / name).write_text(render_delta(delta), encoding="utf-8")


def _do_sync(
    ctx: RunContext,
    index: int,
    client: str,
    use_oracle: bool,
    expected: DeltaSet | None = None,
) -> None:
    replica = ctx.replicas[client]
    decl = ctx.scenario.clients[client]
    store = ctx.store
    shadow: DeltaSet | None = None
    if use_oracle or ctx.mode == "oracle":
        applied = ctx.oracle.sync(
            client, decl.root, store.data, store.counter, decl.exprs
        )
    else:
        applied = timestamp_sync(
            replica.cursor, store.data, store.log, decl.exprs, ctx.scenario.schema
        )
        if ctx.mode == "both":
            shadow = ctx.oracle.sync(
                client, decl.root, store.data, store.counter, decl.exprs
            )
    _dump(ctx, f"{index:03d}_{client}.delta", applied)
    if shadow is not None:
        _dump(ctx, f"{index:03d}_{client}_oracle.delta", shadow)

    if expected is not None:
        want = render_delta(expected).splitlines()
        got = render_delta(applied).splitlines()
        if want != got:
            ctx.reports.append(
                DivergenceReport(
                    step_index=index,
                    client=client,
                    missing=[line for line in want if line not in got],
                    extra=[line for line in got if line not in want],
                )
            )

    replica.apply_delta(applied)
    replica.gc_sweep()

    if ctx.mode == "both":
        missing, extra, mismatches = compare_replica(ctx, client)
        if missing or extra or mismatches:
            ctx.reports.append(
                DivergenceReport(index, client, missing, extra, mismatches)
            )
    if ctx.on_sync is not None:
        ctx.on_sync(ctx, index, client, applied, shadow)


def run_scenario(
    scenario: Scenario,
    mode: str = "both",
    dump_dir: str | Path | None = None,
    on_sync: SyncHook | None = None,
) -> list[DivergenceReport]:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ctx = RunContext(
        scenario=scenario,
        mode=mode,
        store=Store(scenario.schema),
        oracle=SnapshotOracle(scenario.schema),
        replicas={
            name: Replica(
                name=name, root=decl.root, exprs=decl.exprs, schema=scenario.schema
            )
            for name, decl in scenario.clients.items()
        },
        dump_dir=Path(dump_dir) if dump_dir is not None else None,
        on_sync=on_sync,
    )
    for index, step in enumerate(scenario.steps):
        try:
            if isinstance(step, TxStep):
                tx = ctx.store.begin_transaction()
                try:
                    for mutation in step.mutations:
                        tx.stage_mutation(mutation)
                except Exception:
                    tx.abort()
                    raise
                tx.commit()
            elif isinstance(step, SyncStep):
                _do_sync(ctx, index, step.client, step.use_oracle)
            elif isinstance(step, AssertDeltaStep):
                _do_sync(ctx, index, step.client, use_oracle=False, expected=step.expected)
            elif isinstance(step, PushStep):
                ctx.replicas[step.client].push_local_change(step.mutation, ctx.store)
            elif isinstance(step, AssertConvergedStep):
                missing, extra, mismatches = compare_replica(ctx, step.client)
                if missing or extra or mismatches:
                    ctx.reports.append(
                        DivergenceReport(index, step.client, missing, extra, mismatches)
                    )
            else:  # pragma: no cover - exhaustive over Step union
                raise TypeError(f"unknown step {step!r}")
        except RelsyncError as exc:
            raise ScenarioRuntimeError(str(exc), step_index=index) from exc
    return ctx.reports


__all__ = [
    "DivergenceReport",
    "MODES",
    "RunContext",
    "compare_replica",
    "run_scenario",
]
