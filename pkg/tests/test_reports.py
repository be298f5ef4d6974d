"""Report construction and byte-stable serialization."""

import importlib.resources
import json

import jsonschema
import numpy as np
import pytest

from levelsim.reports import (
    Check,
    Report,
    abs_check,
    bound_check,
    emit_report,
    flag_check,
    rel_check,
    render_report,
    sigma_check,
)


def sample_report() -> Report:
    return Report(
        subcommand="demo",
        inputs={"seed": 7, "x": 1.5, "label": "run"},
        estimates=(
            {"name": "mean", "value": 2.5, "stderr": 0.1, "replicas": 40},
            {"name": "p_hat", "value": 0.25, "stderr": None},
        ),
        checks=(
            abs_check("anchor", 1.01, 1.0, 0.001, "closed form"),
            sigma_check("mc", 2.4, 0.1, 2.5, 3.5, "oracle", detail="n=40"),
            flag_check("dominated", True, "pathwise coupling"),
        ),
    )


class TestCheckConstructors:
    def test_abs_and_rel(self):
        assert abs_check("a", 1.05, 1.0, 0.1, "x").passed
        assert not abs_check("a", 1.2, 1.0, 0.1, "x").passed
        assert rel_check("r", 110.0, 100.0, 0.1, "x").passed
        assert not rel_check("r", 111.0, 100.0, 0.1, "x").passed
        assert rel_check("r", 110.0, 100.0, 0.1, "x").kind == "rel"

    def test_sigma_embeds_stderr(self):
        check = sigma_check("s", 1.2, 0.1, 1.0, 3.0, "oracle", detail="note")
        assert check.passed  # off by 2 stderr against a 3 stderr budget
        assert "stderr=0.1" in check.detail
        assert "note" in check.detail
        assert not sigma_check("s", 1.2, 0.1, 1.0, 1.5, "oracle").passed

    def test_bound_and_flag(self):
        assert bound_check("b", 0.5, 0.5, "union bound").passed
        assert not bound_check("b", 0.6, 0.5, "union bound").passed
        flag = flag_check("f", False, "witness")
        assert not flag.passed
        assert flag.value is None and flag.target is None

    def test_report_passed_aggregates(self):
        good = flag_check("ok", True, "x")
        bad = flag_check("bad", False, "x")
        assert Report("s", {}, (), (good,)).passed
        assert not Report("s", {}, (), (good, bad)).passed
        assert Report("s", {}, (), ()).passed


class TestSerialization:
    def test_json_is_sorted_and_stable(self):
        report = sample_report()
        text = render_report(report, "json")
        again = render_report(report, "json")
        assert text == again
        doc = json.loads(text)
        assert list(doc) == sorted(doc)
        assert doc["passed"] is False  # the anchor check above fails

    def test_json_matches_schema(self):
        schema = json.loads(
            importlib.resources.files("levelsim")
            .joinpath("report_schema.json")
            .read_text()
        )
        doc = json.loads(render_report(sample_report(), "json"))
        jsonschema.validate(doc, schema)

    def test_numpy_values_coerced(self):
        report = Report(
            "s",
            {"n": np.int64(5)},
            ({"name": "v", "value": np.float64(1.5), "stderr": np.float64(0.25)},),
            (abs_check("a", float(np.float64(1.0)), 1.0, 0.1, "x"),),
        )
        doc = json.loads(render_report(report, "json"))
        assert doc["inputs"]["n"] == 5
        assert isinstance(doc["estimates"][0]["value"], float)

    def test_csv_layout(self):
        lines = render_report(sample_report(), "csv").splitlines()
        assert lines[0] == "section,name,value,stderr,target,tolerance,kind,passed,detail"
        assert len(lines) == 1 + 2 + 3
        first = lines[1].split(",")
        assert first[0] == "estimate" and first[1] == "mean"
        assert first[2] == "2.5" and first[3] == "0.1"
        assert "replicas=40" in lines[1]
        check_rows = [l for l in lines if l.startswith("check,")]
        assert len(check_rows) == 3
        assert "anchor=closed form" in check_rows[0]
        assert ",true" in check_rows[2]

    def test_empty_report_is_header_only_csv(self):
        text = render_report(Report("s", {}, (), ()), "csv")
        assert text.splitlines() == [
            "section,name,value,stderr,target,tolerance,kind,passed,detail"
        ]

    def test_single_estimate_is_two_line_csv(self):
        report = Report("s", {}, ({"name": "v", "value": 1.0, "stderr": 0.5},), ())
        assert len(render_report(report, "csv").splitlines()) == 2

    def test_csv_none_and_bool_cells(self):
        report = Report(
            "s",
            {},
            ({"name": "p", "value": 0.5, "stderr": None},),
            (flag_check("f", True, "x"),),
        )
        lines = render_report(report, "csv").splitlines()
        est = lines[1].split(",")
        assert est[3] == ""  # stderr None renders empty
        flag_row = lines[2].split(",")
        assert flag_row[2] == "" and flag_row[7] == "true"

    def test_float_cells_round_trip(self):
        value = 0.1 + 0.2  # repr must preserve the exact double
        report = Report(
            "s", {}, ({"name": "v", "value": value, "stderr": 1e-17},), ()
        )
        row = render_report(report, "csv").splitlines()[1].split(",")
        assert float(row[2]) == value
        assert float(row[3]) == 1e-17

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            render_report(sample_report(), "yaml")


class TestEmit:
    def test_writes_file_and_returns_text(self, tmp_path):
        path = tmp_path / "out.json"
        text = emit_report(sample_report(), "json", path)
        assert path.read_text() == text

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            emit_report(sample_report(), "json", tmp_path / "missing" / "out.json")
