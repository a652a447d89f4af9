"""Artifact emission: byte-stable CSV tables and JSON run manifests.

CSV files carry one comment row with the config hash, then a single
header row, then data rows.  Numbers render through shortest ``repr``,
so identical inputs produce identical bytes on every platform and run.
The JSON manifest ties a run to its exact inputs: config, hash, seed,
library versions, the admissibility report, the files written, and the
wall time (the one field that varies between reruns, which is why it
lives in the manifest and never in a CSV).
"""

from __future__ import annotations

import json
import platform
from pathlib import Path

import numpy as np
import scipy

__all__ = [
    "csv_text",
    "environment_versions",
    "manifest_dict",
    "write_csv",
    "write_manifest",
]


def _cell(value) -> str:
    if isinstance(value, str):
        if "," in value or "\n" in value:
            raise ValueError(f"cell values must not contain commas: {value!r}")
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def csv_text(columns: dict[str, object], config_hash: str) -> str:
    """Render named columns of equal length to CSV text."""
    names = list(columns)
    if not names:
        raise ValueError("csv_text needs at least one column")
    series = [list(columns[name]) for name in names]
    length = len(series[0])
    for name, values in zip(names, series):
        if len(values) != length:
            raise ValueError(
                f"column {name!r} has {len(values)} rows, expected {length}"
            )
    lines = [f"# config_hash={config_hash}", ",".join(names)]
    for i in range(length):
        lines.append(",".join(_cell(values[i]) for values in series))
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, columns: dict[str, object], config_hash: str) -> Path:
    """Write a CSV table; returns the path written."""
    out = Path(path)
    out.write_text(csv_text(columns, config_hash), encoding="utf-8")
    return out


def environment_versions() -> dict[str, str]:
    """Versions of the interpreter and the numeric stack."""
    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "specgal": __version__,
    }


def manifest_dict(
    cfg,
    cfg_hash: str,
    admissibility: dict,
    command: str,
    outputs: list[str],
    wall_time_s: float,
    threads: int,
    extra: dict | None = None,
) -> dict:
    """Assemble the manifest for one finished run."""
    return {
        "command": command,
        "name": cfg.name,
        "statement": cfg.statement,
        "seed": cfg.seed,
        "threads": threads,
        "config_hash": cfg_hash,
        "config": cfg.to_dict(),
        "versions": environment_versions(),
        "admissibility": admissibility,
        "outputs": sorted(outputs),
        "wall_time_s": round(float(wall_time_s), 6),
        "extra": extra or {},
    }


def write_manifest(path: str | Path, manifest: dict) -> Path:
    """Write a manifest as formatted JSON; returns the path written."""
    out = Path(path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
