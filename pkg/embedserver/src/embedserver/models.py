"""Embedding model registry.

Two model kinds: "sentence-transformers" wraps a pretrained checkpoint
(loaded eagerly at startup, inference serialized per model to bound
memory), and "hash" is a deterministic token-hash embedder that needs no
weights, used for smoke tests and offline deployments. All vectors are
L2-normalized server-side so every consumer sees identical rows.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ModelInfo:
    id: str
    dim: int
    version: str


class HashModel:
    """Deterministic per-token pseudo-random unit vectors, mean-pooled."""

    kind = "hash"

    def __init__(self, model_id: str, dim: int = 256, seed: int = 0):
        if dim < 8:
            raise ValueError("hash model dim must be >= 8")
        self.id = model_id
        self.dim = dim
        self.seed = seed
        self.version = f"hash-{seed}"
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
            rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "big")))
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            self._token_cache[token] = vec
        return vec

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        rows = []
        for sentence in sentences:
            tokens = sorted(sentence.lower().split())
            if not tokens:
                rows.append(np.zeros(self.dim))
                continue
            rows.append(np.mean([self._token_vector(t) for t in tokens], axis=0))
        return np.vstack(rows)


class SentenceTransformerModel:
    """Pretrained checkpoint behind the sentence-transformers API."""

    kind = "sentence-transformers"

    def __init__(self, model_id: str, checkpoint: str):
        from sentence_transformers import SentenceTransformer

        self.id = model_id
        self.version = checkpoint
        self._model = SentenceTransformer(checkpoint)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(list(sentences), convert_to_numpy=True),
            dtype=np.float64,
        )


def build_model(spec: dict):
    kind = spec.get("kind", "sentence-transformers")
    if kind == "hash":
        return HashModel(spec["id"], dim=spec.get("dim", 256), seed=spec.get("seed", 0))
    if kind == "sentence-transformers":
        return SentenceTransformerModel(spec["id"], spec["checkpoint"])
    raise ValueError(f"unknown model kind {kind!r}")


class ModelRegistry:
    """Loaded models plus a per-model inference lock."""

    def __init__(self):
        self._models: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}

    def load(self, specs: Sequence[dict]) -> None:
        for spec in specs:
            model = build_model(spec)
            self._models[model.id] = model
            self._locks[model.id] = threading.Lock()

    def get(self, model_id: str):
        return self._models.get(model_id)

    def info(self) -> list[ModelInfo]:
        return [
            ModelInfo(model.id, model.dim, model.version)
            for model in self._models.values()
        ]

    def encode(self, model_id: str, sentences: Sequence[str]) -> np.ndarray:
        model = self._models[model_id]
        with self._locks[model_id]:
            raw = model.encode(sentences)
        raw = np.asarray(raw, dtype=np.float64)
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return raw / norms
