"""Deterministic report rendering.

CSV files start with comment lines: the tool banner, the resolved config as
``# cfg:key = value`` (machine-recoverable, see config.from_file), then the
summary.  Floats are written with repr so values round-trip exactly and
identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import os

from .config import format_value


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(report: dict) -> str:
    lines = [f"# skewmix {report['kind']} report v{report['version']}"]
    for key in sorted(report["config"]):
        lines.append(f"# cfg:{key} = {format_value(report['config'][key])}")
    for key in sorted(report["summary"]):
        lines.append(f"# {key} = {_fmt(report['summary'][key])}")
    table = report["table"]
    lines.append(",".join(table["columns"]))
    for row in table["rows"]:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: dict, out_dir) -> list:
    """Write <kind>.json always and <kind>.csv unless the config says json-only.

    Returns the list of paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    kind = report["kind"]
    paths = []
    json_path = os.path.join(out_dir, f"{kind}.json")
    with open(json_path, "w") as fh:
        fh.write(render_json(report))
    paths.append(json_path)
    if report["config"].get("output_format", "csv") == "csv":
        csv_path = os.path.join(out_dir, f"{kind}.csv")
        with open(csv_path, "w") as fh:
            fh.write(render_csv(report))
        paths.append(csv_path)
    return paths


def summary_lines(report: dict) -> list:
    keys = sorted(report["summary"])
    return [f"{key} = {_fmt(report['summary'][key])}" for key in keys]
