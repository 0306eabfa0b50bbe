"""Deterministic CSV/JSON writers for the command-line pipelines.

Every output file starts with a comment block carrying the fully resolved
configuration (the reproducibility contract), then optional metadata lines,
then an RFC-4180 body with '.' decimals and LF line endings. Floats are
written with shortest round-trip repr, so re-running a subcommand with the
same config reproduces files byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+!r}j"
    return str(value)


def config_header(config: Mapping, extra: Mapping | None = None) -> list[str]:
    lines = ["# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))]
    for key, value in (extra or {}).items():
        if isinstance(value, (list, tuple, np.ndarray)):
            rendered = json.dumps([float(v) for v in value], separators=(",", ":"))
        else:
            rendered = _fmt(value)
        lines.append(f"# {key}: {rendered}")
    return lines


def write_csv(
    path: str | Path,
    config: Mapping,
    columns: list[str],
    rows: Iterable[Iterable],
    extra: Mapping | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = config_header(config, extra)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_grid_csv(
    path: str | Path,
    config: Mapping,
    row_axis: np.ndarray,
    col_axis: np.ndarray,
    values: np.ndarray,
    extra: Mapping | None = None,
) -> Path:
    """Dense real-valued grid, row-major, with both axes in the header."""
    meta = dict(extra or {})
    meta["row_axis"] = row_axis
    meta["col_axis"] = col_axis
    rows = ([v for v in row] for row in np.asarray(values))
    columns = [f"c{i}" for i in range(values.shape[1])]
    return write_csv(path, config, columns, rows, extra=meta)


def write_json(path: str | Path, config: Mapping, payload: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"config": config, **payload}
    path.write_text(
        json.dumps(document, sort_keys=True, indent=2, default=_json_default) + "\n",
        newline="\n",
    )
    return path


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)!r}")


def read_header_config(path: str | Path) -> dict:
    """Parse the '# config:' line back out of a data file."""
    with open(path) as handle:
        for line in handle:
            if line.startswith("# config: "):
                return json.loads(line[len("# config: "):])
            if not line.startswith("#"):
                break
    raise ValueError(f"{path} carries no config header")
