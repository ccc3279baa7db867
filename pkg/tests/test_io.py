"""Config parsing, scenario library, trial-state files, reports, CLI."""

import json

import pytest

from pkboin12 import DesignKind, OperatingCharacteristics, builtin_scenario
from pkboin12 import io as pio
from pkboin12.cli import main as cli_main
from pkboin12.design import decide
from pkboin12.scenarios import SCENARIO_IDS


# Golden copy of the benchmark truth table, field for field.
GOLDEN = {
    1: ((0.01, 0.03, 0.05, 0.10, 0.18, 0.24), (0.05, 0.10, 0.20, 0.30, 0.45, 0.55),
        (1000, 1500, 2500, 3600, 4800, 6500), 6),
    2: ((0.03, 0.05, 0.10, 0.15, 0.20, 0.41), (0.05, 0.10, 0.20, 0.40, 0.55, 0.65),
        (1000, 2000, 3500, 6000, 7500, 8500), 5),
    3: ((0.20, 0.30, 0.40, 0.50, 0.60, 0.70), (0.40, 0.55, 0.60, 0.65, 0.70, 0.75),
        (4500, 6000, 7000, 8000, 9000, 9500), 2),
    4: ((0.30, 0.40, 0.50, 0.60, 0.70, 0.80), (0.50, 0.55, 0.60, 0.65, 0.70, 0.75),
        (6500, 7000, 7500, 8000, 8500, 9000), 1),
    5: ((0.03, 0.05, 0.10, 0.20, 0.30, 0.45), (0.10, 0.30, 0.45, 0.55, 0.55, 0.55),
        (1000, 2000, 4000, 6000, 7500, 9000), 4),
    6: ((0.10, 0.15, 0.21, 0.24, 0.27, 0.30), (0.20, 0.30, 0.40, 0.55, 0.55, 0.55),
        (2000, 3000, 4000, 6000, 6500, 7000), 4),
    7: ((0.10, 0.15, 0.21, 0.24, 0.27, 0.30), (0.30, 0.40, 0.55, 0.55, 0.55, 0.55),
        (2000, 4000, 6000, 6500, 7000, 7500), 3),
    8: ((0.10, 0.21, 0.24, 0.27, 0.30, 0.33), (0.40, 0.55, 0.55, 0.55, 0.55, 0.55),
        (4000, 6000, 6500, 7000, 7500, 8000), 2),
    9: ((0.20, 0.25, 0.30, 0.40, 0.45, 0.50), (0.30, 0.50, 0.45, 0.40, 0.35, 0.30),
        (5000, 6500, 7500, 8000, 8500, 9000), 2),
    10: ((0.10, 0.20, 0.30, 0.45, 0.50, 0.55), (0.30, 0.40, 0.55, 0.60, 0.55, 0.45),
         (4000, 5000, 6000, 7000, 7500, 8000), 3),
    11: ((0.03, 0.05, 0.10, 0.15, 0.20, 0.25), (0.10, 0.30, 0.40, 0.50, 0.65, 0.55),
         (1500, 3000, 4500, 6000, 7500, 9000), 5),
    12: ((0.05, 0.10, 0.20, 0.45, 0.55, 0.65), (0.50, 0.50, 0.50, 0.50, 0.50, 0.50),
         (6000, 7000, 7500, 8000, 8500, 9000), 1),
    13: ((0.01, 0.03, 0.05, 0.10, 0.12, 0.14), (0.03, 0.05, 0.10, 0.20, 0.20, 0.20),
         (500, 900, 1500, 2600, 3600, 4600), None),
    14: ((0.45, 0.50, 0.55, 0.60, 0.65, 0.70), (0.30, 0.40, 0.55, 0.55, 0.55, 0.55),
         (6000, 6500, 7000, 7500, 8000, 8500), None),
}


class TestScenarioLibrary:
    def test_matches_golden_copy(self):
        assert set(SCENARIO_IDS) == set(GOLDEN)
        for i, (tox, eff, pk, obd) in GOLDEN.items():
            s = builtin_scenario(i)
            assert s.tox_probs == pytest.approx(tox)
            assert s.eff_probs == pytest.approx(eff)
            assert s.pk_means == pytest.approx(pk)
            assert s.obd == obd

    def test_defaults(self):
        s = builtin_scenario(1)
        assert (s.cv, s.pk_influence, s.tox_eff_corr) == (0.25, 1.0, 0.0)
        assert (s.accrual_per_month, s.tox_window_days, s.eff_window_days) == (3.0, 30.0, 60.0)

    def test_scenario_13_is_underexposed(self):
        s = builtin_scenario(13)
        assert all(q <= 0.20 for q in s.eff_probs)
        assert all(r < 6000 for r in s.pk_means)

    @pytest.mark.parametrize("bad", [0, 15, -3])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            builtin_scenario(bad)

    def test_override_knobs(self):
        s = builtin_scenario(1, cv=0.4, pk_influence=2.0)
        assert s.cv == 0.4 and s.pk_influence == 2.0


class TestLoadConfig:
    def test_minimal_config_fills_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"design": "PKBOIN-12", "scenario": 1, "reps": 2000, "seed": 42}))
        cfg = pio.load_config(path)
        assert cfg.designs == [DesignKind.PKBOIN12]
        assert cfg.reps == 2000 and cfg.seed == 42
        params = pio.params_from_json(cfg.params, kind=cfg.designs[0])
        assert params.max_tox_prob == 0.35
        assert params.min_eff_prob == 0.25
        assert params.utilities.as_tuple() == (100, 40, 60, 0)
        assert params.pk.target == 6000 and params.pk.cutoff == 4800

    def test_all_designs_keyword(self):
        cfg = pio.load_config({"design": "all", "scenario": 1})
        assert cfg.designs == list(DesignKind)

    def test_non_monotone_scenario_rejected(self):
        with pytest.raises(pio.ConfigError, match="tox_probs"):
            pio.resolve_scenario(
                {"tox_probs": [0.3, 0.2, 0.4], "eff_probs": [0.1, 0.2, 0.3],
                 "pk_means": [1000, 2000, 3000]}
            )

    def test_unknown_design_lists_valid_kinds(self):
        with pytest.raises(pio.ConfigError, match="BOIN12"):
            pio.load_config({"design": "CRM", "scenario": 1})

    def test_unknown_fields_named(self):
        with pytest.raises(pio.ConfigError, match="frobnicate"):
            pio.load_config({"design": "BOIN12", "scenario": 1, "frobnicate": 2})
        with pytest.raises(pio.ConfigError, match="max_tox_prob"):
            pio.load_config({"design": "BOIN12", "scenario": 1, "params": {"max_tox_prob": 1.4}})

    def test_bad_reps(self):
        with pytest.raises(pio.ConfigError, match="reps"):
            pio.load_config({"design": "BOIN12", "scenario": 1, "reps": 0})

    def test_scenario_file_reference(self, tmp_path):
        doc = pio.scenario_to_json(builtin_scenario(3))
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        s = pio.resolve_scenario(str(path))
        assert s.tox_probs == builtin_scenario(3).tox_probs


def make_oc(design="PKBOIN-12", scenario="scenario-1"):
    return OperatingCharacteristics(
        design=design, scenario=scenario, reps=2000, seed=7,
        selection_pct=(0.0, 0.1, 2.5, 10.0, 40.313, 45.187),
        early_termination_pct=1.9, terminated_pct=1.5, no_selection_completed_pct=0.4,
        mean_patients=(3.0, 3.3, 5.1, 8.2, 12.6, 12.6),
        mean_enrolled=44.8, mean_duration_months=38.124,
    )


class TestReports:
    def test_csv_layout(self, tmp_path):
        path = tmp_path / "r.csv"
        pio.write_report([make_oc()], "csv", path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 2
        header = lines[0].split(",")
        assert [f"sel{d}_pct" for d in range(1, 7)] == header[4:10]
        assert header[10] == "et_pct"
        assert [f"n{d}" for d in range(1, 7)] == header[11:17]
        assert header[17] == "duration_months"
        row = dict(zip(header, lines[1].split(",")))
        assert row["sel5_pct"] == "40.3"  # display column rounds to 1 decimal
        assert row["duration_months"] == "38.1"
        assert float(row["sel5_pct_full"]) == pytest.approx(40.313)

    def test_empty_report_is_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        pio.write_report([], "csv", path)
        assert len(path.read_text().strip().splitlines()) == 1

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "r.json"
        oc = make_oc()
        pio.write_report([oc], "json", path)
        back = pio.read_report_json(path)
        assert back == [oc]

    def test_bit_stable(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        pio.write_report([make_oc()], "csv", a)
        pio.write_report([make_oc()], "csv", b)
        assert a.read_bytes() == b.read_bytes()

    def test_write_failure_carries_path(self, tmp_path):
        with pytest.raises(OSError, match="no-such-dir"):
            pio.write_report([make_oc()], "csv", tmp_path / "no-such-dir" / "r.csv")


def start_state_doc(kind="PKBOIN-12"):
    return {
        "design": {"kind": kind},
        "current_dose": 1,
        "doses": [
            {"counts": [0, 0, 0, 0], "pk_values": []} for _ in range(6)
        ],
    }


class TestTrialState:
    def test_round_trip(self):
        doc = start_state_doc()
        doc["doses"][0]["counts"] = [2, 1, 0, 0]
        doc["doses"][0]["pk_values"] = [5000.0, 6000.0, 5500.0]
        state = pio.trial_state_from_json(doc)
        again = pio.trial_state_from_json(pio.trial_state_to_json(state))
        assert again.states[0].counts == [2, 1, 0, 0]
        assert again.states[0].pk_values == [5000.0, 6000.0, 5500.0]

    def test_patient_records_fill_counts(self):
        doc = {
            "design": {"kind": "PKBOIN-12"},
            "current_dose": 1,
            "patients": [
                {"id": "a", "dose": 1, "enroll_day": 0, "pk_value": 5000,
                 "tox_event_day": 3.0, "eff_event_day": None},
                {"id": "b", "dose": 1, "enroll_day": 0, "pk_value": 6000,
                 "tox_event_day": None, "eff_event_day": 10.0},
            ],
            "time_days": 100.0,
        }
        state = pio.trial_state_from_json(doc)
        assert state.states[0].counts == [1, 0, 0, 1]
        assert state.states[0].pk_values == [5000.0, 6000.0]

    def test_needs_doses_or_patients(self):
        with pytest.raises(pio.ConfigError, match="doses or patients"):
            pio.trial_state_from_json({"design": {"kind": "BOIN12"}})


class TestCli:
    def test_decide_on_start_state_treats_at_start_dose(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(start_state_doc()))
        assert cli_main(["decide", "--state", str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["action"] == "treat_at_dose"
        assert out["dose"] == 1
        assert out["rule"] == "first_cohort"

    def test_decide_matches_library(self, tmp_path, capsys):
        doc = start_state_doc()
        doc["current_dose"] = 2
        doc["doses"][0] = {"counts": [1, 2, 0, 0], "pk_values": [900.0, 1000.0, 1100.0]}
        doc["doses"][1] = {"counts": [2, 0, 1, 0], "pk_values": [2100.0, 1900.0, 2000.0]}
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        assert cli_main(["decide", "--state", str(path)]) == 0
        out = capsys.readouterr().out.strip()

        state = pio.trial_state_from_json(json.loads(path.read_text()))
        expected = decide(state.states, state.current_dose, state.params)
        assert out == pio.canonical_json(pio.decision_to_json(expected))

    def test_finalize_reports_selection(self, tmp_path, capsys):
        doc = start_state_doc()
        doc["doses"][0] = {"counts": [4, 3, 1, 1], "pk_values": [5800.0, 6100.0, 5900.0] * 3}
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        assert cli_main(["finalize", "--state", str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["selected"] == 1

    def test_scenarios_listing(self, capsys):
        assert cli_main(["scenarios"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["scenarios"]) == 14
        assert cli_main(["scenarios", "--id", "13"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["pk_means"] == [500, 900, 1500, 2600, 3600, 4600]

    def test_simulate_writes_report(self, tmp_path, capsys):
        out_path = tmp_path / "oc.csv"
        code = cli_main([
            "simulate", "--design", "BOIN12", "--scenario", "1",
            "--reps", "20", "--seed", "5", "--threads", "1",
            "--out", str(out_path), "--format", "csv",
        ])
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 2

    def test_simulate_sweep_grid(self, tmp_path):
        out_path = tmp_path / "oc.json"
        code = cli_main([
            "simulate", "--design", "BOIN12,PKBOIN-12", "--scenario", "1",
            "--reps", "10", "--seed", "5", "--threads", "1",
            "--sweep", "gP=0,1", "--out", str(out_path), "--format", "json",
        ])
        assert code == 0
        rows = pio.read_report_json(out_path)
        assert len(rows) == 4
        labels = {r.scenario for r in rows}
        assert labels == {"scenario-1[pk_influence=0]", "scenario-1[pk_influence=1]"}

    def test_validation_error_exit_code(self, capsys):
        assert cli_main(["simulate", "--design", "NOPE", "--reps", "1"]) == 1
        assert "valid kinds" in capsys.readouterr().err

    def test_missing_state_file_is_runtime_error(self, capsys):
        assert cli_main(["decide", "--state", "/nonexistent/state.json"]) == 2

    def test_usage_error_exit_code(self, capsys):
        assert cli_main(["decide"]) == 1  # missing required --state
