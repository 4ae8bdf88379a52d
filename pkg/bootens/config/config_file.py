from pathlib import Path
from typing import Any

import tomlkit
from tomlkit.exceptions import ParseError

from ..errors import ConfigError
from ..utils import query, update


class ConfigFile(object):
    """
    A TOML file opened as a context manager.

    Changes made inside the `with` block are written back on exit unless the
    file was opened read-only or the block raised.
    """

    def __init__(self, path: Path, read_only: bool = False):
        self.data = tomlkit.document()
        self.path = Path(path)
        self.read_only = read_only

    def __enter__(self):
        if not self.path.is_file():
            raise ConfigError(str(self.path), "configuration file not found")
        with open(self.path) as f:
            try:
                self.data = tomlkit.load(f)
            except ParseError as e:
                raise ConfigError(str(self.path), f"invalid TOML: {e}") from e
        return self

    def __exit__(self, type, value, traceback):
        if self.read_only or type is not None:
            return
        with open(self.path, "w") as f:
            tomlkit.dump(self.data, f)

    def __getitem__(self, key) -> Any:
        return self.data[key]

    def query(self, property_path: str | None) -> Any:
        try:
            return query(self.data, property_path)
        except (KeyError, IndexError, ValueError):
            raise ConfigError(property_path or "", "no such key")

    def update(self, property_path: str | None, value: Any):
        try:
            self.data = update(self.data, property_path, value)
        except (KeyError, IndexError, ValueError):
            raise ConfigError(property_path or "", "no such key")

    def unwrap(self) -> dict:
        return self.data.unwrap()
