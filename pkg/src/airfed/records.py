"""Deterministic serialization of run outputs.

Floats are written with 17 significant digits everywhere (JSONL, CSV, JSON),
which round-trips float64 exactly and makes byte-identical output the test
for determinism. One JSONL line per round; the summary CSV carries the
columns t, N_t, alpha, error_sq, loss, accuracy, cumulative_energy.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

SUMMARY_COLUMNS = ("t", "N_t", "alpha", "error_sq", "loss", "accuracy", "cumulative_energy")


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"refusing to serialize non-finite float {value!r}")
    return format(value, ".17g")


def dumps(obj) -> str:
    """JSON text with 17-significant-digit floats and stable key order."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_jsonl(path, dicts) -> None:
    text = "".join(dumps(d) + "\n" for d in dicts)
    Path(path).write_text(text)


def read_jsonl(path) -> list:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def write_summary_csv(path, rows) -> None:
    """rows: iterables aligned with SUMMARY_COLUMNS; None renders empty."""
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_summary_csv(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        row = {}
        for key, cell in zip(header, parts):
            if cell == "":
                row[key] = None
            elif key in ("t", "N_t"):
                row[key] = int(cell)
            else:
                row[key] = float(cell)
        rows.append(row)
    return rows


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def write_run_outputs(out_dir, result) -> None:
    """Write the full artifact set for one run into ``out_dir``:

    config.txt (echoed effective config), rounds.jsonl, summary.csv,
    diagnostics.json, geometry.json.
    """
    from .config import emit_config  # local import keeps this module dependency-light

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(emit_config(result.config))
    write_jsonl(out / "rounds.jsonl", (r.to_dict() for r in result.records))
    write_summary_csv(out / "summary.csv", (r.summary_row() for r in result.records))
    diagnostics = {
        "available": result.diagnostics is not None,
        "initial_loss": result.initial_loss,
        "initial_accuracy": result.initial_accuracy,
    }
    if result.diagnostics is not None:
        diagnostics.update(result.diagnostics.to_dict())
    write_json(out / "diagnostics.json", diagnostics)
    geometry = result.geometry
    write_json(out / "geometry.json", {
        "device_pos": geometry.device_pos,
        "inband_pos": geometry.inband_pos,
        "outband_pos": geometry.outband_pos,
        "device_ps_dist": geometry.device_ps_dist,
        "inband_ps_dist": geometry.inband_ps_dist,
    })
