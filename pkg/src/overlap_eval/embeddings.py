"""Sentence-embedding backends producing unit-norm vectors.

Three interchangeable backends sit behind one config type: a deterministic
hash embedder for hermetic tests, a precomputed JSONL store for frozen
offline runs, and an HTTP client for a live embedding service. Every
vector is L2-normalized at this boundary so cosine similarity downstream
is a plain dot product, and results are cached keyed by
(backend id, exact sentence text).
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .errors import (
    BackendUnavailableError,
    CorruptBackendError,
    EmptySummaryError,
    MissingEmbeddingError,
)
from .rng import Rng, token_seed
from .textseg import Sentence, tokenize

_BACKEND_KINDS = ("test", "precomputed", "remote")
_REMOTE_ATTEMPTS = 3
_REMOTE_BACKOFF_S = 0.25
_REMOTE_MAX_BATCH = 256

ENDPOINT_ENV = "OVERLAP_EVAL_ENDPOINT"
CACHE_DIR_ENV = "OVERLAP_EVAL_CACHE_DIR"


@dataclass(frozen=True)
class BackendConfig:
    """Selects and parameterizes an embedding backend.

    ``seed`` and ``dim`` apply to the test backend only; ``endpoint`` is
    required for kind="remote" and ``store_path`` for kind="precomputed".
    Model ids ("p-v1", "stsb", "use", ...) are opaque strings passed
    through to the backend.
    """

    kind: str
    model_id: str = "test"
    endpoint: str | None = None
    store_path: str | None = None
    batch_size: int = 64
    seed: int = 0
    dim: int = 256

    def __post_init__(self):
        if self.kind not in _BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote backend requires an endpoint")
        if self.kind == "precomputed" and not self.store_path:
            raise ValueError("precomputed backend requires a store_path")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.kind == "test" and self.dim < 8:
            raise ValueError("test backend requires dim >= 8")

    @property
    def backend_id(self) -> str:
        if self.kind == "test":
            return f"test:{self.seed}:{self.dim}"
        return self.model_id


@dataclass
class EmbeddingBatch:
    """Unit-norm vectors row-aligned to a sentence list."""

    sentences: list[Sentence]
    vectors: np.ndarray
    backend_id: str

    def __post_init__(self):
        if self.vectors.ndim != 2 or len(self.vectors) != len(self.sentences):
            raise ValueError("vectors must be a 2-D array row-aligned to sentences")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale to unit Euclidean norm; the all-zero vector passes through."""
    v = np.asarray(v, dtype=np.float64)
    norm = math.sqrt(float(np.dot(v, v)))
    if norm == 0.0:
        return np.zeros_like(v)
    return v / norm


def is_zero_vector(v: np.ndarray) -> bool:
    """True for the flagged degenerate vector (no tokens / empty input)."""
    return not np.any(v)


def _token_vector(seed: int, dim: int, token: str) -> np.ndarray:
    rng = Rng(token_seed(seed, token))
    return normalize(np.array([rng.gauss() for _ in range(dim)]))


def test_embed(seed: int, dim: int, sentence: Sentence | str) -> np.ndarray:
    """Deterministic stand-in embedder for hermetic evaluation runs.

    Each token hashes to a pseudo-random unit vector; the sentence vector
    is the normalized mean over the token multiset (summed in sorted token
    order, so any permutation of the same multiset is bit-identical).
    Sentences with no tokens map to the flagged all-zero vector. Distinct
    tokens get near-orthogonal vectors in expectation.
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    text = sentence.text if isinstance(sentence, Sentence) else sentence
    tokens = sorted(tokenize(text))
    if not tokens:
        return np.zeros(dim)
    total = np.zeros(dim)
    for token in tokens:
        total += _token_vector(seed, dim, token)
    return normalize(total / len(tokens))


test_embed.__test__ = False  # keep pytest from collecting the embedder


def load_store(path: str | Path) -> dict[tuple[str, str], np.ndarray]:
    """Read a JSONL vector store; duplicate (model, text) keys: last wins."""
    entries: dict[tuple[str, str], np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                model = record["model"]
                text = record["text"]
                dim = record["dim"]
                vector = np.asarray(record["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorruptBackendError(f"{path}: bad store line {lineno}: {exc}")
            if vector.ndim != 1 or len(vector) != dim:
                raise CorruptBackendError(
                    f"{path}: line {lineno}: vector length != dim"
                )
            vector.flags.writeable = False
            entries[(model, text)] = vector
    return entries


def default_cache_path() -> Path:
    """Cache file location; OVERLAP_EVAL_CACHE_DIR overrides the directory."""
    root = os.environ.get(CACHE_DIR_ENV)
    base = Path(root) if root else Path.home() / ".cache" / "overlap-eval"
    return base / "embeddings.jsonl"


class EmbeddingCache:
    """(model, text) -> vector cache, optionally persisted as JSONL.

    The file format is identical to the precomputed store, so a cache
    written against a remote backend can be replayed later as a frozen
    offline store. Reads are lock-free; writes are serialized and each
    entry is appended as one complete line.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._mem: dict[tuple[str, str], np.ndarray] = {}
        if self.path is not None and self.path.exists():
            self._mem.update(load_store(self.path))

    def get(self, model: str, text: str) -> np.ndarray | None:
        return self._mem.get((model, text))

    def put(self, model: str, text: str, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        vector.flags.writeable = False
        with self._lock:
            if (model, text) in self._mem:
                return
            self._mem[(model, text)] = vector
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                line = json.dumps(
                    {
                        "model": model,
                        "text": text,
                        "dim": len(vector),
                        "vector": [float(x) for x in vector],
                    }
                )
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(line + "\n")

    def __len__(self) -> int:
        return len(self._mem)


class _TestBackend:
    normalize_output = True

    def __init__(self, config: BackendConfig):
        self.config = config
        self._token_vectors: dict[str, np.ndarray] = {}

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            tokens = sorted(tokenize(text))
            if not tokens:
                out.append(np.zeros(self.config.dim))
                continue
            total = np.zeros(self.config.dim)
            for token in tokens:
                vec = self._token_vectors.get(token)
                if vec is None:
                    vec = _token_vector(self.config.seed, self.config.dim, token)
                    self._token_vectors.setdefault(token, vec)
                total += vec
            out.append(total / len(tokens))
        return out


class _PrecomputedBackend:
    # Stored vectors are served exactly as written; re-normalizing could
    # perturb the last ulp.
    normalize_output = False

    def __init__(self, config: BackendConfig):
        self.config = config
        self._store = load_store(config.store_path)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            vec = self._store.get((self.config.model_id, text))
            if vec is None:
                raise MissingEmbeddingError(
                    f"no stored embedding for model {self.config.model_id!r}, "
                    f"text {text!r}"
                )
            norm = math.sqrt(float(np.dot(vec, vec)))
            if norm != 0.0 and abs(norm - 1.0) > 1e-6:
                raise CorruptBackendError(
                    f"stored vector for {text!r} is not unit-norm (|v|={norm:.8f})"
                )
            out.append(vec)
        return out


class _RemoteBackend:
    normalize_output = True

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        self.config = config
        self._session = session or requests.Session()
        self._url = config.endpoint.rstrip("/") + "/embed"

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        payload = {"model": self.config.model_id, "sentences": list(texts)}
        response = None
        last_error: Exception | None = None
        for attempt in range(_REMOTE_ATTEMPTS):
            try:
                response = self._session.post(self._url, json=payload, timeout=30)
            except requests.RequestException as exc:
                last_error = exc
                response = None
            if response is not None and response.status_code == 200:
                break
            if response is not None and 400 <= response.status_code < 500:
                raise BackendUnavailableError(
                    f"embedding service rejected request "
                    f"({response.status_code}): {response.text[:200]}"
                )
            if attempt < _REMOTE_ATTEMPTS - 1:
                time.sleep(_REMOTE_BACKOFF_S * (2**attempt))
        else:
            detail = last_error if response is None else f"HTTP {response.status_code}"
            raise BackendUnavailableError(
                f"embedding service unavailable after {_REMOTE_ATTEMPTS} attempts: "
                f"{detail}"
            )
        try:
            data = response.json()
            vectors = data["vectors"]
            dim = data["dim"]
        except (ValueError, KeyError) as exc:
            raise CorruptBackendError(f"malformed embedding response: {exc}")
        if len(vectors) != len(texts):
            raise CorruptBackendError(
                f"service returned {len(vectors)} rows for {len(texts)} sentences"
            )
        out = []
        for row in vectors:
            arr = np.asarray(row, dtype=np.float64)
            if arr.ndim != 1 or len(arr) != dim:
                raise CorruptBackendError("response row length differs from dim")
            if not np.all(np.isfinite(arr)):
                raise CorruptBackendError("response contains non-finite values")
            out.append(arr)
        return out


_BACKEND_TYPES = {
    "test": _TestBackend,
    "precomputed": _PrecomputedBackend,
    "remote": _RemoteBackend,
}
_backend_instances: dict[BackendConfig, object] = {}
_backend_lock = threading.Lock()


def _backend_for(config: BackendConfig):
    with _backend_lock:
        backend = _backend_instances.get(config)
        if backend is None:
            backend = _BACKEND_TYPES[config.kind](config)
            _backend_instances[config] = backend
        return backend


def embed_sentences(
    config: BackendConfig,
    sentences: Sequence[Sentence],
    cache: EmbeddingCache | None = None,
) -> EmbeddingBatch:
    """Embed sentences through the configured backend, one vector each.

    Deterministic for fixed (config, sentences); identical texts within a
    call share one backend query. When a cache is supplied, hits skip the
    backend and misses are written back post-normalization, so cached and
    uncached runs return bit-identical batches.
    """
    if not sentences:
        raise EmptySummaryError("cannot embed an empty sentence list")
    backend = _backend_for(config)
    backend_id = config.backend_id

    resolved: dict[str, np.ndarray] = {}
    misses: list[str] = []
    for sentence in sentences:
        text = sentence.text
        if text in resolved:
            continue
        hit = cache.get(backend_id, text) if cache is not None else None
        if hit is not None:
            resolved[text] = hit
        else:
            resolved[text] = None  # placeholder keeps first-occurrence order
            misses.append(text)

    chunk = min(config.batch_size, _REMOTE_MAX_BATCH)
    for start in range(0, len(misses), chunk):
        batch_texts = misses[start : start + chunk]
        for text, raw in zip(batch_texts, backend.embed(batch_texts)):
            vector = normalize(raw) if backend.normalize_output else np.asarray(raw)
            resolved[text] = vector
            if cache is not None:
                cache.put(backend_id, text, vector)

    vectors = [resolved[sentence.text] for sentence in sentences]
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise CorruptBackendError(f"mixed vector dimensions in batch: {sorted(dims)}")
    return EmbeddingBatch(list(sentences), np.vstack(vectors), backend_id)
