import hashlib
import json
from pathlib import Path
from typing import Any

import git

from .._version import __version__

PACKAGE_ROOT = Path(__file__).resolve().parent.parent


def sha256_bytes(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def digest_json(data: Any) -> str:
    return sha256_bytes(json.dumps(data, sort_keys=True).encode())


def code_version() -> str:
    """`bootens <version>`, plus the git commit when running from a checkout."""
    try:
        repo = git.Repo(PACKAGE_ROOT, search_parent_directories=True)
        sha = repo.head.commit.hexsha[:12]
        dirty = "-dirty" if repo.is_dirty() else ""
        return f"bootens {__version__} ({sha}{dirty})"
    except (git.exc.GitError, ValueError):
        return f"bootens {__version__}"
