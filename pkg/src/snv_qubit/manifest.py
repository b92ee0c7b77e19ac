"""Run manifest written next to the CSV outputs."""

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import List

from snv_qubit import __version__

MANIFEST_NAME = "manifest.json"


def timestamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    started: str
    finished: str = ""
    files: List[str] = field(default_factory=list)
    version: str = __version__

    def write(self, directory):
        """Atomically write ``manifest.json`` into ``directory``."""
        for name in self.files:
            if not os.path.exists(os.path.join(directory, name)):
                raise FileNotFoundError(f"manifest lists missing file {name}")
        payload = json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(prefix=".manifest-", dir=directory)
        try:
            with os.fdopen(fd, "w") as f:
                f.write(payload)
            os.replace(tmp, os.path.join(directory, MANIFEST_NAME))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return MANIFEST_NAME


def read_manifest(directory):
    with open(os.path.join(directory, MANIFEST_NAME)) as f:
        return json.load(f)
