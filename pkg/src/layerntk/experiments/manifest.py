"""Run manifests: a small JSON file written before any heavy computation."""
import json
import os
import platform
from importlib import metadata

import numpy as np

from .._accel import backend


def build_id():
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    return f"artifact-{version}+numpy-{np.__version__}+{backend()}"


def write_manifest(path, command, config=None, seeds=(), extra=None):
    manifest = {
        "command": command,
        "build": build_id(),
        "python": platform.python_version(),
        "config_hash": None if config is None else config.digest(),
        "config": None if config is None else config.as_dict(),
        "seeds": list(seeds),
    }
    if extra:
        manifest.update(extra)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    os.replace(tmp, path)
    return manifest
