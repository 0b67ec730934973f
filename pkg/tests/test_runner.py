"""Scenario runner: engine selection, convergence checks, delta goldens."""

from __future__ import annotations

import pytest

from relsync.delta import DeltaSet
from relsync.errors import ScenarioRuntimeError
from relsync.runner import DivergenceReport, run_scenario
from relsync.scenario import load_scenario, parse_scenario

CONTACT_SCENARIO = """\
class Identity
class Contact
assoc Ownership Identity:owner -- Contact:Contact
assoc Reference Contact:reference -- Identity:contactIdentity
client A root=I1 expr="{user}.Contact.contactIdentity"

tx
  create I1 Identity {name="ana"}
  create I2 Identity {name="bo"}
  create C1 Contact {}
  link I1 Ownership C1
  link C1 Reference I2
end
sync A
assert-converged A
tx
  delete C1
end
sync A
assert-converged A
"""


class TestModes:
    @pytest.mark.parametrize("mode", ["timestamp", "oracle", "both"])
    def test_contact_lifecycle_converges_in_every_mode(self, mode):
        reports = run_scenario(parse_scenario(CONTACT_SCENARIO), mode=mode)
        assert reports == []

    def test_shipped_scenarios_converge(self):
        for name in ("social_event", "delete_contact", "deletion_broadcast"):
            scenario = load_scenario(f"scenarios/{name}.scn")
            assert run_scenario(scenario, mode="both") == [], name

    def test_invalid_mode(self):
        with pytest.raises(ValueError, match="mode must be one of"):
            run_scenario(parse_scenario(CONTACT_SCENARIO), mode="psychic")


class TestConvergenceChecks:
    def test_assert_converged_before_any_sync_reports_everything(self):
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            '  create I1 Identity {}\n'
            "end\n"
            "assert-converged A\n"
        )
        reports = run_scenario(parse_scenario(text), mode="timestamp")
        assert len(reports) == 1
        report = reports[0]
        assert report.step_index == 1 and report.client == "A"
        assert report.missing == ["obj I1"]
        assert "1 missing" in report.render()

    def test_assert_delta_mismatch_is_reported_as_line_diff(self):
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            '  create I1 Identity {name="ana"}\n'
            "end\n"
            "assert-delta A\n"
            "  ts_cs 1\n"
            '  crt-obj I1 Identity {name="typo"}\n'
            "end\n"
        )
        reports = run_scenario(parse_scenario(text), mode="timestamp")
        assert len(reports) == 1
        report = reports[0]
        assert report.missing == ['crt-obj I1 Identity {name="typo"}']
        assert report.extra == ['crt-obj I1 Identity {name="ana"}']

    def test_assert_delta_match_applies_the_delta(self):
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            '  create I1 Identity {name="ana"}\n'
            "end\n"
            "assert-delta A\n"
            "  ts_cs 1\n"
            '  crt-obj I1 Identity {name="ana"}\n'
            "end\n"
            "assert-converged A\n"
        )
        assert run_scenario(parse_scenario(text), mode="both") == []


class TestRuntimeErrors:
    def test_store_rejection_names_the_step(self):
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            "  create I1 Identity {}\n"
            "end\n"
            "tx\n"
            "  create I1 Identity {}\n"
            "end\n"
        )
        with pytest.raises(ScenarioRuntimeError, match="step 1"):
            run_scenario(parse_scenario(text), mode="timestamp")

    def test_failed_tx_aborts_and_releases_the_store(self):
        # two bad steps in sequence would deadlock if abort leaked the writer
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            "  update Zz {k=1}\n"
            "end\n"
        )
        with pytest.raises(ScenarioRuntimeError, match="unknown object Zz"):
            run_scenario(parse_scenario(text), mode="timestamp")


class TestPushStep:
    def test_push_flows_through_replica_to_server(self):
        text = (
            "class Identity\n"
            'client A root=I1 expr="{user}"\n'
            "tx\n"
            '  create I1 Identity {name="ana"}\n'
            "end\n"
            "sync A\n"
            'push A update I1 {name="pushed"}\n'
            "sync A\n"
            "assert-converged A\n"
        )
        assert run_scenario(parse_scenario(text), mode="both") == []


class TestHooksAndDumps:
    def test_on_sync_sees_applied_and_shadow(self):
        calls = []

        def hook(ctx, index, client, applied, shadow):
            calls.append((index, client, applied, shadow))

        run_scenario(parse_scenario(CONTACT_SCENARIO), mode="both", on_sync=hook)
        assert len(calls) == 2
        for index, client, applied, shadow in calls:
            assert client == "A"
            assert isinstance(applied, DeltaSet)
            assert isinstance(shadow, DeltaSet)  # both mode runs the oracle too

    def test_timestamp_mode_has_no_shadow(self):
        shadows = []
        run_scenario(
            parse_scenario(CONTACT_SCENARIO),
            mode="timestamp",
            on_sync=lambda ctx, i, c, a, s: shadows.append(s),
        )
        assert shadows == [None, None]

    def test_dump_dir_gets_one_file_per_sync(self, tmp_path):
        run_scenario(parse_scenario(CONTACT_SCENARIO), mode="both", dump_dir=tmp_path)
        names = sorted(p.name for p in tmp_path.iterdir())
        # sync steps sit at scenario indices 1 and 4
        assert names == [
            "001_A.delta",
            "001_A_oracle.delta",
            "004_A.delta",
            "004_A_oracle.delta",
        ]


def test_divergence_report_render_shape():
    report = DivergenceReport(
        step_index=4,
        client="B",
        missing=["obj X"],
        extra=["link a R b"],
        state_mismatches=['I1 {k=1} != {k=2}'],
    )
    text = report.render()
    assert text.splitlines()[0] == "step 4 client B: 1 missing, 1 extra, 1 state mismatches"
    assert "  missing obj X" in text
    assert "  extra link a R b" in text
