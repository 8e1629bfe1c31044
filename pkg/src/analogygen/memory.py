"""Procedural memory: a persistent store of procedures with exact top-k search.

Retrieval is an exhaustive cosine scan (corpora here stay small, so exact
search is cheap and fully deterministic). Entry ids are content hashes, which
makes re-ingesting the same records idempotent. The store supports many
concurrent readers; ingestion requires exclusive access.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import Embedder, ZeroVectorError
from .procedures import Procedure

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
ENTRIES_NAME = "entries.jsonl"


class EmptyStoreError(RuntimeError):
    """A search was issued against a store with no entries."""


class StoreFormatError(RuntimeError):
    """A persisted store could not be read back consistently."""


class IngestError(RuntimeError):
    """Embedding failed for one of the records being ingested."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"failed to embed record {index}: {cause}")
        self.index = index


def procedure_id(p: Procedure) -> str:
    """Stable content-derived identifier (identical fields, identical id)."""
    payload = json.dumps(
        {"input": p.input, "output": p.output, "steps": list(p.steps)},
        ensure_ascii=False,
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class MemoryEntry:
    id: str
    procedure: Procedure
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class RetrievalResult:
    entry: MemoryEntry
    score: float


class ProcedureStore:
    def __init__(self, embedder: Embedder):
        self.embedder = embedder
        self._entries: dict[str, MemoryEntry] = {}
        self._norms: dict[str, float] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[MemoryEntry]:
        """All entries, sorted by id for reproducible iteration."""
        return [self._entries[eid] for eid in sorted(self._entries)]

    def ingest(self, procedures) -> int:
        """Embed and persist procedures; returns how many were newly stored.

        Exact duplicates (all three fields equal) are stored once; feeding
        the same corpus twice leaves the store unchanged.
        """
        added = 0
        for i, proc in enumerate(procedures):
            eid = procedure_id(proc)
            if eid in self._entries:
                continue
            try:
                vector = self.embedder.embed_procedure(proc)
            except Exception as exc:
                raise IngestError(i, exc) from exc
            self._entries[eid] = MemoryEntry(id=eid, procedure=proc, vector=vector)
            self._norms[eid] = float(np.linalg.norm(vector))
            added += 1
        return added

    def search(self, query: str, k: int) -> list[RetrievalResult]:
        """The k entries nearest to the query by cosine, descending.

        An exhaustive per-entry scan with the same scalar arithmetic a
        reference scan would use, so rankings are bit-reproducible. Ties
        break by ascending id. Returns min(k, store size) results.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._entries:
            raise EmptyStoreError("cannot search an empty store")
        qvec = self.embedder.embed_text(query)
        qnorm = float(np.linalg.norm(qvec))
        if qnorm == 0.0:
            raise ZeroVectorError("cosine similarity is undefined for a zero vector")
        scored: list[tuple[float, str]] = []
        for eid, entry in self._entries.items():
            vnorm = self._norms[eid]
            if vnorm == 0.0:
                raise ZeroVectorError(f"entry {eid} has a zero vector")
            scored.append((float(np.dot(entry.vector, qvec)) / (vnorm * qnorm), eid))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        return [
            RetrievalResult(entry=self._entries[eid], score=score)
            for score, eid in scored[:k]
        ]

    def save(self, path) -> None:
        """Write manifest + one JSON line per entry under ``path``."""
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        entries = self.entries()
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "dimension": self.embedder.dimension,
            "count": len(entries),
            "embedder": getattr(self.embedder, "name", "unknown"),
        }
        (directory / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        with (directory / ENTRIES_NAME).open("w", encoding="utf-8") as fh:
            for entry in entries:
                record = {
                    "id": entry.id,
                    "input": entry.procedure.input,
                    "output": entry.procedure.output,
                    "steps": list(entry.procedure.steps),
                    "vector": entry.vector.tolist(),
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path, embedder: Embedder) -> "ProcedureStore":
        """Rebuild a store from disk; never returns a partial store."""
        directory = Path(path)
        manifest_path = directory / MANIFEST_NAME
        if not manifest_path.exists():
            raise StoreFormatError(f"missing {MANIFEST_NAME} in {directory}")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreFormatError(f"unreadable manifest: {exc}") from exc
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise StoreFormatError(
                f"schema version {manifest.get('schema_version')} is not supported"
            )
        if manifest.get("dimension") != embedder.dimension:
            raise StoreFormatError(
                f"store dimension {manifest.get('dimension')} does not match "
                f"embedder dimension {embedder.dimension}"
            )
        stored_name = manifest.get("embedder")
        if stored_name and stored_name != getattr(embedder, "name", "unknown"):
            raise StoreFormatError(
                f"store was built with the {stored_name!r} embedder, "
                f"got {getattr(embedder, 'name', 'unknown')!r}"
            )
        store = cls(embedder)
        entries: dict[str, MemoryEntry] = {}
        with (directory / ENTRIES_NAME).open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    proc = Procedure(
                        input=record["input"],
                        output=record["output"],
                        steps=tuple(record["steps"]),
                    )
                    vector = np.asarray(record["vector"], dtype=np.float64)
                    eid = record["id"]
                except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                    raise StoreFormatError(f"bad entry at line {lineno}: {exc}") from exc
                if vector.shape != (embedder.dimension,):
                    raise StoreFormatError(f"bad vector dimension at line {lineno}")
                entries[eid] = MemoryEntry(id=eid, procedure=proc, vector=vector)
        if len(entries) != manifest.get("count"):
            raise StoreFormatError(
                f"manifest says {manifest.get('count')} entries, file has {len(entries)}"
            )
        store._entries = entries
        store._norms = {eid: float(np.linalg.norm(e.vector)) for eid, e in entries.items()}
        return store
