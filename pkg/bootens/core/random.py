import hashlib
from typing import Any, Dict, Union

import numpy as np

Tag = Union[int, str]

_MASK64 = (1 << 64) - 1


def derive_stream_id(parent: int, *tags: Tag) -> int:
    """
    Hash a parent stream id and a sequence of tags into a new 64-bit stream id.

    `derive_stream_id(0, 3, "boot")` is the bootstrap stream of member 3.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(parent & _MASK64).to_bytes(8, "little"))
    for tag in tags:
        match tag:
            case bool():
                raise TypeError("stream tags must be int or str")
            case int():
                h.update(b"i" + int(tag & _MASK64).to_bytes(8, "little"))
            case str():
                h.update(b"s" + tag.encode() + b"\0")
            case _:
                raise TypeError("stream tags must be int or str")
    return int.from_bytes(h.digest(), "little")


def derive_seed(seed: int, *tags: Tag) -> int:
    return derive_stream_id(seed, "seed", *tags)


class RngStream:
    """
    A reproducible random stream keyed by `(seed, stream_id)`.

    Backed by numpy's counter-based Philox generator with the 128-bit key
    `(seed, stream_id)`, so equal keys give identical sequences and streams
    never depend on the order in which other streams were used.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def child(self, *tags: Tag) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(self.stream_id, *tags))

    def clone(self) -> "RngStream":
        other = RngStream(self.seed, self.stream_id)
        other.generator.bit_generator.state = self.generator.bit_generator.state
        return other

    def state_dict(self) -> Dict[str, Any]:
        state = self.generator.bit_generator.state
        inner = state["state"]
        return {
            "seed": self.seed,
            "stream_id": self.stream_id,
            "counter": [int(v) for v in inner["counter"]],
            "key": [int(v) for v in inner["key"]],
            "buffer": [int(v) for v in state["buffer"]],
            "buffer_pos": int(state["buffer_pos"]),
            "has_uint32": int(state["has_uint32"]),
            "uinteger": int(state["uinteger"]),
        }

    @staticmethod
    def from_state_dict(data: Dict[str, Any]) -> "RngStream":
        stream = RngStream(data["seed"], data["stream_id"])
        stream.generator.bit_generator.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array(data["counter"], dtype=np.uint64),
                "key": np.array(data["key"], dtype=np.uint64),
            },
            "buffer": np.array(data["buffer"], dtype=np.uint64),
            "buffer_pos": data["buffer_pos"],
            "has_uint32": data["has_uint32"],
            "uinteger": data["uinteger"],
        }
        return stream

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RngStream):
            return NotImplemented
        return self.state_dict() == other.state_dict()

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id:#018x})"
