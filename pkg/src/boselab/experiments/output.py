"""CSV tables and run manifests."""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

from .. import __version__
from ..errors import FormatError

MANIFEST_SCHEMA_VERSION = 1


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12e" % float(value)
    return str(value)


def write_csv(path, columns: list[str], rows: list[tuple]) -> None:
    lines = [",".join(columns)]
    lines += [",".join(format_cell(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    value: float | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed), "detail": self.detail}
        if self.value is not None:
            out["value"] = float(self.value)
        return out


@dataclass
class ExperimentResult:
    name: str
    columns: list[str]
    rows: list[tuple] = dc_field(default_factory=list)
    checks: list[CheckResult] = dc_field(default_factory=list)
    truncation_losses: dict[str, float] = dc_field(default_factory=dict)
    truncation_budget: float | None = None
    basis_sizes: dict[str, int] = dc_field(default_factory=dict)
    wall_times: dict[str, float] = dc_field(default_factory=dict)
    artifacts: list[str] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "", value: float | None = None) -> None:
        self.checks.append(CheckResult(name, bool(passed), detail, value))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "rows": len(self.rows),
            "checks": [c.to_json() for c in self.checks],
            "truncation_budget": self.truncation_budget,
            "truncation_losses": self.truncation_losses,
            "basis_sizes": self.basis_sizes,
            "wall_times": self.wall_times,
            "artifacts": self.artifacts,
        }


def build_manifest(command: str, config: dict, seed: int, results: list[ExperimentResult],
                   status: str, error: str | None = None) -> dict:
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "command": command,
        "seed": seed,
        "status": status,
        "error": error,
        "config": config,
        "experiments": [r.to_json() for r in results],
    }


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("schema_version")
    if version != MANIFEST_SCHEMA_VERSION:
        raise FormatError(f"unknown manifest schema version {version!r}")
    return data
