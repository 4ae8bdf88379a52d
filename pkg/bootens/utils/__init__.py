import copy
from typing import Any, Dict, List

from .files import read_json, write_json, write_rows
from .hashing import code_version, digest_json, sha256_bytes, sha256_file
from .parallel import run_tasks

__all__ = [
    "code_version",
    "digest_json",
    "merge",
    "query",
    "read_json",
    "run_tasks",
    "sha256_bytes",
    "sha256_file",
    "update",
    "write_json",
    "write_rows",
]


def _key_variants(key: str) -> List[str]:
    return [key, key.replace("-", "_"), key.replace("_", "-")]


def _step(data: Any, key: str) -> Any:
    match data:
        case dict():
            for variant in _key_variants(key):
                if variant in data:
                    return data[variant]
            raise KeyError(key)
        case list():
            return data[int(key)]
        case _:
            raise KeyError(key)


def query(data: Dict[Any, Any], property_path: str | None) -> Any:
    """Look up a dotted path such as `network.hidden_sizes.0`."""
    if property_path:
        for key in property_path.split("."):
            data = _step(data, key)
    return data


def merge(old: Any, new: Any):
    if isinstance(old, Dict) and isinstance(new, Dict):
        old = copy.deepcopy(old)
        for key, val in new.items():
            if key in old and isinstance(val, dict):
                old[key] = merge(old[key], val)
            else:
                old[key] = val
        return old
    else:
        return new


def update(data_root: Dict[Any, Any], property_path: str | None, value: Any) -> Any:
    """Merge `value` into the entry at a dotted path, creating missing table keys."""
    if not property_path:
        return merge(data_root, value)
    keys = property_path.split(".")
    data = query(data_root, ".".join(keys[:-1]))
    key = keys[-1]
    match data:
        case dict():
            existing = next((k for k in _key_variants(key) if k in data), key)
            data[existing] = merge(data.get(existing), value)
        case list():
            data[int(key)] = merge(data[int(key)], value)
        case _:
            raise KeyError(property_path)
    return data_root
