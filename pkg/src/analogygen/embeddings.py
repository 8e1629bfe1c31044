"""Embedding providers: dense fixed-dimension vectors for procedures and queries.

Two providers share one interface. The hashing provider is pure and
deterministic (token-level feature hashing with signed buckets, L2
normalized) and exists so retrieval behaves meaningfully offline. The remote
provider speaks an OpenAI-compatible HTTP embeddings endpoint.
"""

from __future__ import annotations

import hashlib
import os
import re

import numpy as np

from .procedures import Procedure, RenderStyle, render_procedure

DEFAULT_DIMENSION = 768
DEFAULT_TIMEOUT = 30.0


class EmptyInputError(ValueError):
    """embed_text was called with an empty string."""


class DimensionMismatchError(ValueError):
    """Vectors of different dimensions were combined."""


class ZeroVectorError(ValueError):
    """Cosine similarity is undefined for an all-zero vector."""


class ProviderUnavailableError(RuntimeError):
    """The remote embedding endpoint could not be reached or answered badly."""


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a, b) / (|a| * |b|), in [-1, 1].

    Vectors are stored unnormalized; normalization happens here so it cannot
    be applied twice.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimensions differ: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for a zero vector")
    return float(np.dot(a, b)) / (norm_a * norm_b)


class Embedder:
    """Common surface for embedding providers."""

    dimension: int

    def embed_text(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_procedure(self, p: Procedure) -> np.ndarray:
        """A single joint vector over all three fields, never per-field."""
        return self.embed_text(render_procedure(p, RenderStyle.EMBEDDING))


_TOKEN = re.compile(r"\w+")


class HashingEmbedder(Embedder):
    """Deterministic token-hashing embedder. Stateless, no I/O."""

    name = "hash"

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension

    def embed_text(self, text: str) -> np.ndarray:
        if not text:
            raise EmptyInputError("cannot embed empty text")
        tokens = _TOKEN.findall(text.lower()) or [text]
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "big")
            sign = 1.0 if value & 1 else -1.0
            vec[(value >> 1) % self.dimension] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # Signed buckets cancelled out; fall back to a single full-text bucket.
            digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
            vec[int.from_bytes(digest, "big") % self.dimension] = 1.0
            norm = 1.0
        return vec / norm


def _default_transport(url: str, headers: dict, payload: dict, timeout: float):
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise ProviderUnavailableError(f"embedding request failed: {exc}") from exc
    if resp.status_code != 200:
        raise ProviderUnavailableError(
            f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
        )
    return resp.json()


class RemoteEmbedder(Embedder):
    """Client for an HTTP embeddings endpoint.

    Sends ``{"model": ..., "input": [text]}`` and expects one vector per
    input under ``data[i].embedding``. Exactly one request per call; safe
    for concurrent use (no shared mutable state).
    """

    name = "remote"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        dimension: int = DEFAULT_DIMENSION,
        timeout: float = DEFAULT_TIMEOUT,
        transport=None,
    ):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.dimension = dimension
        self.timeout = timeout
        self._transport = transport or _default_transport

    @classmethod
    def from_env(cls, env=os.environ) -> "RemoteEmbedder":
        url = env.get("ANALOGYGEN_EMBED_URL", "")
        if not url:
            raise ProviderUnavailableError("ANALOGYGEN_EMBED_URL is not set")
        return cls(
            base_url=url,
            model=env.get("ANALOGYGEN_EMBED_MODEL", "all-mpnet-base-v2"),
            api_key=env.get("ANALOGYGEN_EMBED_API_KEY", env.get("ANALOGYGEN_API_KEY", "")),
            dimension=int(env.get("ANALOGYGEN_EMBED_DIMENSION", DEFAULT_DIMENSION)),
            timeout=float(env.get("ANALOGYGEN_EMBED_TIMEOUT", DEFAULT_TIMEOUT)),
        )

    def embed_text(self, text: str) -> np.ndarray:
        if not text:
            raise EmptyInputError("cannot embed empty text")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = self._transport(
            f"{self.base_url}/embeddings",
            headers,
            {"model": self.model, "input": [text]},
            self.timeout,
        )
        try:
            values = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailableError(f"malformed embedding response: {exc}") from exc
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"endpoint returned dimension {vec.shape}, expected ({self.dimension},)"
            )
        if not np.all(np.isfinite(vec)):
            raise ProviderUnavailableError("embedding contains non-finite entries")
        return vec
