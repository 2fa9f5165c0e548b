"""HTTP surface: POST /embed, POST /paraphrase, GET /health.

Requests and responses are plain JSON; the contract never names models, so
backends are swappable server configuration. Malformed bodies answer 400,
oversize batches 413, backend failures 500, and /health serves 503 until
every configured backend has finished loading.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

MAX_EMBED_BATCH = 256
MAX_VARIANTS = 64


def create_app(embed_backend, paraphrase_backend) -> FastAPI:
    app = FastAPI(title="semcom model server", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request"})

    def _error(code: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=code, content={"error": message})

    @app.get("/health")
    async def health():
        models = {"embed": embed_backend.name, "paraphrase": paraphrase_backend.name}
        if not (embed_backend.ready and paraphrase_backend.ready):
            return JSONResponse(status_code=503, content={"status": "loading", "models": models})
        return {"status": "ok", "models": models}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body is not JSON")
        texts = body.get("texts") if isinstance(body, dict) else None
        if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
            return _error(400, "texts must be a non-empty list of strings")
        if len(texts) > MAX_EMBED_BATCH:
            return _error(413, f"at most {MAX_EMBED_BATCH} texts per request")
        try:
            vectors = embed_backend.embed(texts)
        except Exception as exc:
            return _error(500, f"embedding failed: {exc}")
        if any(not all(math.isfinite(x) for x in vec) for vec in vectors):
            return _error(500, "backend produced non-finite values")
        return {"vectors": vectors, "model": embed_backend.name}

    @app.post("/paraphrase")
    async def paraphrase(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body is not JSON")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        text = body.get("text")
        n = body.get("n")
        seed = body.get("seed")
        if not isinstance(text, str) or not isinstance(n, int) or isinstance(n, bool):
            return _error(400, "need string 'text' and integer 'n'")
        if not 1 <= n <= MAX_VARIANTS:
            return _error(400, f"n must be in 1..{MAX_VARIANTS}")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            return _error(400, "seed must be an integer when present")
        try:
            variants = paraphrase_backend.paraphrase(text, n, seed)
        except Exception as exc:
            return _error(500, f"paraphrasing failed: {exc}")
        if len(variants) != n:
            return _error(500, f"backend produced {len(variants)} variants for n={n}")
        return {"variants": variants, "model": paraphrase_backend.name}

    return app
