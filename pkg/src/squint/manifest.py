"""Reproducibility record embedded in every emitted report.

Timestamps come only from the SOURCE_DATE_EPOCH environment variable (null
otherwise): identical inputs and seed must produce byte-identical outputs,
so no wall-clock entropy is allowed anywhere.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

TOOL_VERSION = "0.1.0"


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()[:16]


def text_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    config_digest: Optional[str] = None
    seed: Optional[int] = None
    tool_version: str = TOOL_VERSION
    timestamp: Optional[str] = None

    @classmethod
    def build(
        cls,
        command: Sequence[str],
        input_paths: dict[str, str],
        config_digest: Optional[str] = None,
        seed: Optional[int] = None,
    ) -> "RunManifest":
        ts = None
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        if epoch:
            ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
        return cls(
            command=list(command),
            inputs={name: file_digest(path) for name, path in input_paths.items()},
            config_digest=config_digest,
            seed=seed,
            timestamp=ts,
        )

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        }

    def digest(self) -> str:
        return text_digest(json.dumps(self.to_dict(), sort_keys=True))
