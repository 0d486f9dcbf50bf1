"""FastAPI application serving batch sentence embeddings.

Endpoints:
  POST /embed   {"model": id, "sentences": [...]} -> {"model", "dim", "vectors"}
  GET  /models  -> [{"id", "dim", "version"}, ...]
  GET  /health  -> {"status": "ok"} once models are loaded, 503 before

Rows are unit-norm, aligned to request order, and deterministic for a
fixed model version. Errors: 400 malformed body, 404 unknown model,
413 oversized batch or payload. Env: EMBEDSERVER_PORT (default 8080),
EMBEDSERVER_MODELS (model config path), EMBEDSERVER_MAX_BATCH
(default 256).
"""

from __future__ import annotations

import json
import os
from contextlib import asynccontextmanager
from importlib import resources
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .models import ModelRegistry

MAX_PAYLOAD_BYTES = 1 << 20  # 1 MiB
DEFAULT_MAX_BATCH = 256
DEFAULT_PORT = 8080


def _default_config() -> dict:
    ref = resources.files("embedserver").joinpath("data/models.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def load_config(path: str | Path | None = None) -> dict:
    if path is None:
        path = os.environ.get("EMBEDSERVER_MODELS")
    if path is None:
        return _default_config()
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: dict | None = None, max_batch: int | None = None) -> FastAPI:
    if max_batch is None:
        max_batch = int(os.environ.get("EMBEDSERVER_MAX_BATCH", DEFAULT_MAX_BATCH))
    registry = ModelRegistry()
    state = {"ready": False}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        registry.load((config or load_config())["models"])
        state["ready"] = True
        yield

    app = FastAPI(title="embedserver", lifespan=lifespan)

    @app.get("/health")
    async def health():
        if not state["ready"]:
            return _error(503, "models loading")
        return {"status": "ok"}

    @app.get("/models")
    async def models():
        return [
            {"id": info.id, "dim": info.dim, "version": info.version}
            for info in registry.info()
        ]

    @app.post("/embed")
    async def embed(request: Request):
        body = await request.body()
        if len(body) > MAX_PAYLOAD_BYTES:
            return _error(413, f"payload exceeds {MAX_PAYLOAD_BYTES} bytes")
        try:
            data = json.loads(body)
        except json.JSONDecodeError:
            return _error(400, "body is not valid JSON")
        if not isinstance(data, dict):
            return _error(400, "body must be a JSON object")
        model_id = data.get("model")
        sentences = data.get("sentences")
        if not isinstance(model_id, str):
            return _error(400, "field 'model' must be a string")
        if (
            not isinstance(sentences, list)
            or not sentences
            or not all(isinstance(s, str) and s.strip() for s in sentences)
        ):
            return _error(400, "field 'sentences' must be a non-empty list of non-empty strings")
        if len(sentences) > max_batch:
            return _error(413, f"batch size {len(sentences)} exceeds limit {max_batch}")
        if registry.get(model_id) is None:
            return _error(404, f"unknown model {model_id!r}")
        vectors = registry.encode(model_id, sentences)
        if not np.all(np.isfinite(vectors)):
            return _error(500, "model produced non-finite values")
        return {
            "model": model_id,
            "dim": int(vectors.shape[1]),
            "vectors": [[float(x) for x in row] for row in vectors],
        }

    return app


def main() -> None:
    import uvicorn

    port = int(os.environ.get("EMBEDSERVER_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
