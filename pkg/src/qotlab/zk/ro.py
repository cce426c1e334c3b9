"""Random oracle: domain-separated SHA-256 with an optional query log."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field


@dataclass
class RandomOracle:
    key: bytes = b""
    record: bool = True
    log: list[tuple[str, bytes, bytes]] = field(default_factory=list)

    def query(self, tag: str, data: bytes) -> bytes:
        h = hashlib.sha256()
        h.update(b"qotlab/ro|")
        h.update(len(self.key).to_bytes(2, "big") + self.key)
        h.update(tag.encode() + b"|")
        h.update(data)
        out = h.digest()
        if self.record:
            self.log.append((tag, bytes(data), out))
        return out

    def preimage_index(self, tag: str) -> dict[bytes, bytes]:
        """Output -> input for every logged query under ``tag``."""
        return {out: data for t, data, out in self.log if t == tag}

    def fork(self, record: bool = False) -> "RandomOracle":
        """Same function, fresh log (e.g. for a verifier)."""
        return RandomOracle(self.key, record)
