"""Attribution report serialization: CSV and JSON forms, long-format data
for sina-style plots, and atomic file writes."""

from __future__ import annotations

import csv
import io
import json
import numbers
import os
import tempfile
from pathlib import Path
from typing import Sequence

from .errors import ConfigError
from .shapley import AttributionReport

_META_FIELDS = ("variant", "mode", "symmetry", "seed", "n_samples", "n_permutations",
                "f0", "fx", "f0_stderr")


def report_to_dict(report: AttributionReport) -> dict:
    return {
        "variant": report.variant,
        "mode": report.mode,
        "symmetry": report.symmetry,
        "seed": report.seed,
        "n_samples": report.n_samples,
        "n_permutations": report.n_permutations,
        "f0": report.f0,
        "f0_stderr": report.f0_stderr,
        "fx": report.fx,
        "features": [
            {
                "name": report.feature_names[i],
                "value": report.feature_values[i],
                "phi": report.phi[i],
                "direct": None if report.direct is None else report.direct[i],
                "indirect": None if report.indirect is None else report.indirect[i],
                "stderr": report.stderr[i],
            }
            for i in range(len(report.feature_names))
        ],
    }


def report_from_dict(spec: dict) -> AttributionReport:
    feats = spec["features"]
    has_split = feats and feats[0].get("direct") is not None
    return AttributionReport(
        feature_names=tuple(f["name"] for f in feats),
        feature_values=tuple(f["value"] for f in feats),
        phi=tuple(float(f["phi"]) for f in feats),
        stderr=tuple(float(f["stderr"]) for f in feats),
        direct=tuple(float(f["direct"]) for f in feats) if has_split else None,
        indirect=tuple(float(f["indirect"]) for f in feats) if has_split else None,
        f0=float(spec["f0"]),
        f0_stderr=float(spec["f0_stderr"]),
        fx=float(spec["fx"]),
        variant=spec["variant"],
        mode=spec["mode"],
        n_permutations=spec["n_permutations"],
        n_samples=spec["n_samples"],
        seed=spec["seed"],
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, numbers.Real) and not isinstance(value, numbers.Integral):
        return repr(float(value))
    return str(value)


def report_to_csv(report: AttributionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = report_to_dict(report)
    for key in _META_FIELDS:
        writer.writerow([f"# {key}", _fmt(d[key])])
    writer.writerow(["feature", "value", "phi", "direct", "indirect", "stderr"])
    for f in d["features"]:
        writer.writerow(
            [f["name"], _fmt(f["value"]), _fmt(f["phi"]), _fmt(f["direct"]),
             _fmt(f["indirect"]), _fmt(f["stderr"])]
        )
    return buf.getvalue()


def report_from_csv(text: str) -> AttributionReport:
    meta: dict = {}
    feats = []
    rows = list(csv.reader(io.StringIO(text)))
    body = False
    for row in rows:
        if not row:
            continue
        if row[0].startswith("# "):
            meta[row[0][2:]] = row[1] if len(row) > 1 else ""
            continue
        if row[0] == "feature":
            body = True
            continue
        if not body:
            raise ConfigError("report CSV has data before the header row")
        name, value, phi, direct, indirect, stderr = row
        feats.append(
            {
                "name": name,
                "value": _parse_value(value),
                "phi": float(phi),
                "direct": float(direct) if direct else None,
                "indirect": float(indirect) if indirect else None,
                "stderr": float(stderr),
            }
        )
    spec = {
        "variant": meta["variant"],
        "mode": meta["mode"],
        "symmetry": meta["symmetry"],
        "seed": int(meta["seed"]) if meta.get("seed") else None,
        "n_samples": int(meta["n_samples"]) if meta.get("n_samples") else None,
        "n_permutations": (
            int(meta["n_permutations"]) if meta.get("n_permutations") else None
        ),
        "f0": float(meta["f0"]),
        "fx": float(meta["fx"]),
        "f0_stderr": float(meta["f0_stderr"]),
        "features": feats,
    }
    return report_from_dict(spec)


def _parse_value(cell: str):
    try:
        return float(cell)
    except ValueError:
        return cell


def sina_rows(reports: Sequence[AttributionReport]) -> list[dict]:
    """Long-format (instance, feature, feature value, phi) rows for external
    sina-style plotting."""
    out = []
    for idx, report in enumerate(reports):
        for i, name in enumerate(report.feature_names):
            out.append(
                {
                    "instance": idx,
                    "feature": name,
                    "value": report.feature_values[i],
                    "phi": report.phi[i],
                }
            )
    return out


def sina_to_csv(reports: Sequence[AttributionReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["instance", "feature", "value", "phi"])
    for row in sina_rows(reports):
        writer.writerow(
            [row["instance"], row["feature"], _fmt(row["value"]), _fmt(row["phi"])]
        )
    return buf.getvalue()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory plus rename, so partial
    outputs are never left in place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def report_to_json(report: AttributionReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_from_json(text: str) -> AttributionReport:
    return report_from_dict(json.loads(text))
