"""Change log: last-wins entries, tombstones, monotonic clock."""

from __future__ import annotations

import pytest

from relsync.changelog import ActionType, ChangeLog
from relsync.errors import NonMonotonicTimestampError
from relsync.model import Link

L = Link("a", "b", "R")


def test_timestamps_must_not_go_backwards():
    log = ChangeLog()
    log.record("o1", ActionType.CREATE, 2)
    with pytest.raises(NonMonotonicTimestampError):
        log.record("o2", ActionType.CREATE, 1)


def test_equal_timestamp_allowed_for_same_transaction():
    log = ChangeLog()
    log.record("o1", ActionType.CREATE, 1)
    log.record("o2", ActionType.CREATE, 1)
    assert log.max_ts == 1


def test_last_action_wins_per_element_and_kind():
    log = ChangeLog()
    log.record("o1", ActionType.UPDATE, 1)
    log.record("o1", ActionType.UPDATE, 4)
    assert log.ts("o1", ActionType.UPDATE) == 4
    assert len(log.actions("o1")) == 1


def test_delete_collapses_to_tombstone():
    log = ChangeLog()
    log.record("o1", ActionType.CREATE, 1)
    log.record("o1", ActionType.UPDATE, 2)
    log.record("o1", ActionType.DELETE, 3)
    assert log.actions("o1") == {ActionType.DELETE: 3}
    assert log.is_deleted("o1")
    assert log.latest_ts("o1") == 3


def test_link_recreate_purges_tombstone():
    log = ChangeLog()
    log.record(L, ActionType.CREATE, 1)
    log.record(L, ActionType.DELETE, 2)
    log.record(L, ActionType.CREATE, 3)
    # one delta must never say both "add this link" and "remove it"
    assert log.actions(L) == {ActionType.CREATE: 3}
    assert not log.is_deleted(L)


def test_object_tombstones_are_permanent():
    # the store never reuses object ids, so the log keeps object tombstones
    # forever; only link creates supersede a matching tombstone
    log = ChangeLog()
    log.record("o1", ActionType.CREATE, 1)
    log.record("o1", ActionType.DELETE, 2)
    log.record("o1", ActionType.CREATE, 3)
    assert log.is_deleted("o1")
    assert log.actions("o1") == {ActionType.CREATE: 3, ActionType.DELETE: 2}


def test_element_never_has_more_entries_than_create_update_delete():
    log = ChangeLog()
    for ts, action in enumerate(
        [ActionType.CREATE, ActionType.UPDATE, ActionType.UPDATE, ActionType.DELETE],
        start=1,
    ):
        log.record("o1", action, ts)
        assert 1 <= len(log.actions("o1")) <= 3


def test_deletions_since_is_strict():
    log = ChangeLog()
    log.record("o1", ActionType.DELETE, 5)
    log.record(L, ActionType.DELETE, 6)
    assert log.deletions_since(6) == (set(), set())
    assert log.deletions_since(5) == (set(), {L})
    assert log.deletions_since(4) == ({"o1"}, {L})


def test_dump_is_sorted_and_canonical():
    log = ChangeLog()
    log.record("o1", ActionType.CREATE, 1)
    log.record(L, ActionType.CREATE, 2)
    log.record("o1", ActionType.UPDATE, 3)
    assert log.dump() == "1 create o1\n2 create a R b\n3 update o1\n"
