"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import pandas as pd
from pydantic import BaseModel, Field

from . import __version__
from .app import app


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunManifest(BaseModel):
    """Everything needed to reproduce an output file."""

    command: str
    spec: dict[str, Any]
    tolerances: dict[str, Any]
    seed: Optional[int] = None
    artifact_version: str = __version__
    timestamp: str = Field(default_factory=_timestamp)
    outputs: list[str] = []

    @classmethod
    def create(
        cls, command: str, spec: dict[str, Any], seed: Optional[int] = None
    ) -> "RunManifest":
        """Manifest with the numerical settings currently in effect.

        Args:
            command: Subcommand that produced the output.
            spec: Resolved inputs of the run.
            seed: Random seed, if any.

        Returns:
            RunManifest: A new manifest.
        """
        settings = app.settings
        tolerances = {
            section: getattr(settings, section).dict()
            for section in ("series", "dynamics", "formulas", "bloch")
        }
        return cls(
            command=command, spec=spec, tolerances=tolerances, seed=seed
        )


def write_table(
    frame: pd.DataFrame, path: Path, manifest: RunManifest
) -> Path:
    """Write a CSV table with its manifest sidecar.

    Numbers are written with output.digits significant digits and a '.'
    decimal separator; the manifest goes to `<stem>.manifest.json`.

    Args:
        frame: Table to write.
        path: CSV path; parent directories are created.
        manifest: Manifest of the run.

    Returns:
        Path: The CSV path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    digits = app.settings.output.digits
    frame.to_csv(path, index=False, float_format=f"%.{digits}g")
    manifest = manifest.copy(update={"outputs": [path.name]})
    sidecar = path.with_name(f"{path.stem}.manifest.json")
    sidecar.write_text(manifest.json(indent=2) + "\n")
    return path
