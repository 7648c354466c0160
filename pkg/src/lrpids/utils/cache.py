"""
lrpids Artifact Cache Module.

Content-addressed storage for window graphs and spectra. Entries are JSON
envelopes named `<kind>-<key>.json`:

    {"kind": ..., "key": ..., "checksum": sha256(canonical payload), "payload": {...}}

Keys are digests of everything that determines the artifact (params digest,
radius, truncation tolerance, projection request), never of file names, so a
scan over n reuses whatever an earlier run already produced. Writes go to a
temporary file in the cache directory and are published with an atomic
rename; readers never see partial entries. A checksum mismatch is logged as a
warning and treated as a miss.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from ..core.errors import CacheCorruptionError

logger = logging.getLogger("lrpids")


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def digest(*parts: Any) -> str:
    """sha256 of the canonical JSON form of the given parts."""
    return hashlib.sha256(canonical_json(list(parts)).encode()).hexdigest()


class ArtifactCache:
    """
    On-disk cache with concurrent reads and exclusive, atomic writes.

    Args:
        root: Directory holding the entries; created on first write.
        enabled: When False every lookup misses and nothing is written.
    """

    def __init__(self, root: Path, enabled: bool = True):
        self.root = Path(root)
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        self._write_lock = threading.Lock()
        self._count_lock = threading.Lock()

    def path_for(self, kind: str, key: str) -> Path:
        return self.root / f"{kind}-{key}.json"

    def _read(self, kind: str, key: str) -> Dict:
        path = self.path_for(kind, key)
        try:
            envelope = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise CacheCorruptionError(f"unreadable cache entry {path.name}: {e}")
        payload = envelope.get("payload")
        checksum = hashlib.sha256(canonical_json(payload).encode()).hexdigest()
        if envelope.get("key") != key or envelope.get("kind") != kind or checksum != envelope.get("checksum"):
            raise CacheCorruptionError(f"checksum mismatch in cache entry {path.name}")
        return payload

    def _count(self, hit: bool) -> None:
        with self._count_lock:
            if hit:
                self.hits += 1
            else:
                self.misses += 1

    def load(self, kind: str, key: str) -> Optional[Dict]:
        """
        Returns the cached payload, or None on a miss or a corrupt entry.
        """
        if not self.enabled or not self.path_for(kind, key).exists():
            self._count(False)
            return None
        try:
            payload = self._read(kind, key)
        except CacheCorruptionError as e:
            logger.warning(f"{e}; recomputing")
            self._count(False)
            return None
        self._count(True)
        logger.debug(f"Cache hit {kind}-{key[:12]}")
        return payload

    def store(self, kind: str, key: str, payload: Dict) -> None:
        """Writes an entry atomically (temp file + rename)."""
        if not self.enabled:
            return
        envelope = {
            "kind": kind,
            "key": key,
            "checksum": hashlib.sha256(canonical_json(payload).encode()).hexdigest(),
            "payload": payload,
        }
        with self._write_lock:
            self.root.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=f".{kind}-", suffix=".tmp")
            try:
                with os.fdopen(fd, "w") as handle:
                    handle.write(canonical_json(envelope))
                os.replace(tmp_name, self.path_for(kind, key))
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise

    def get_or_compute(self, kind: str, key: str, compute: Callable[[], Dict]) -> Dict:
        payload = self.load(kind, key)
        if payload is None:
            payload = compute()
            self.store(kind, key, payload)
        return payload
