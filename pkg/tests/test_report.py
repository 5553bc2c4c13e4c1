"""Report serialization round-trips, sina data, and atomic writes."""

import os

import pytest

from chainshap import AttributionReport
from chainshap.report import (
    atomic_write_bytes,
    atomic_write_text,
    report_from_csv,
    report_from_dict,
    report_from_json,
    report_to_csv,
    report_to_dict,
    report_to_json,
    sina_rows,
    sina_to_csv,
)


def make_report(decompose=True, values=(1.25, -0.5)):
    phi = (0.123456789012345, -2.5)
    return AttributionReport(
        feature_names=("a", "b"),
        feature_values=values,
        phi=phi,
        stderr=(0.01, 0.02),
        direct=(0.1, -2.0) if decompose else None,
        indirect=(0.023456789012345, -0.5) if decompose else None,
        f0=0.5,
        f0_stderr=0.001,
        fx=1.0,
        variant="causal",
        mode="exact-uniform",
        n_permutations=None,
        n_samples=1000,
        seed=7,
    )


class TestRoundTrips:
    def test_dict(self):
        report = make_report()
        assert report_from_dict(report_to_dict(report)) == report

    def test_json(self):
        report = make_report()
        assert report_from_json(report_to_json(report)) == report

    def test_csv_with_decomposition(self):
        report = make_report()
        again = report_from_csv(report_to_csv(report))
        assert again == report

    def test_csv_without_decomposition(self):
        report = make_report(decompose=False)
        again = report_from_csv(report_to_csv(report))
        assert again == report
        assert again.direct is None

    def test_csv_preserves_float_precision(self):
        report = make_report()
        again = report_from_csv(report_to_csv(report))
        assert again.phi == report.phi
        assert again.indirect == report.indirect

    def test_csv_metadata_rows(self):
        text = report_to_csv(make_report())
        lines = text.splitlines()
        assert lines[0] == "# variant,causal"
        assert "# symmetry,symmetric" in lines
        assert "feature,value,phi,direct,indirect,stderr" in lines

    def test_categorical_feature_values(self):
        report = make_report(values=("u", "v"))
        again = report_from_csv(report_to_csv(report))
        assert again.feature_values == ("u", "v")


class TestSina:
    def test_rows_are_long_format(self):
        reports = [make_report(), make_report()]
        rows = sina_rows(reports)
        assert len(rows) == 4
        assert rows[0] == {
            "instance": 0, "feature": "a", "value": 1.25,
            "phi": reports[0].phi[0],
        }
        assert rows[3]["instance"] == 1

    def test_csv_header(self):
        text = sina_to_csv([make_report()])
        assert text.splitlines()[0] == "instance,feature,value,phi"


class TestAtomicWrites:
    def test_write_and_overwrite(self, tmp_path):
        path = tmp_path / "sub" / "out.csv"
        atomic_write_text(path, "one\n")
        atomic_write_text(path, "two\n")
        assert path.read_text() == "two\n"
        assert os.listdir(path.parent) == ["out.csv"]

    def test_bytes(self, tmp_path):
        path = tmp_path / "img.png"
        atomic_write_bytes(path, b"\x89PNG")
        assert path.read_bytes() == b"\x89PNG"

    def test_failure_leaves_no_partial_file(self, tmp_path):
        path = tmp_path / "out.txt"
        with pytest.raises(TypeError):
            atomic_write_text(path, 123)  # not a string: write() fails
        assert not path.exists()
        assert os.listdir(tmp_path) == []
