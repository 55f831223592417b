"""HTTP app implementing the logits wire protocol.

GET /v1/info  -> {"vocab": [symbols in id order], "model": name}
POST /v1/logits {"model": str, "contexts": [[int]]} -> {"logits": [[float]]}

Logits are raw (unwarped); sampling and truncation belong to the client.
Batch order is preserved; identical requests return identical logits.
Status codes: 400 malformed body, 422 token id out of range, 503 model
not ready. Floats serialize via Python's shortest round-trip repr, so the
client recovers them bit for bit.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .models import ServedModel

__all__ = ["create_app"]


def create_app(model: ServedModel | None) -> FastAPI:
    app = FastAPI(title="modelserver", docs_url=None, redoc_url=None)

    @app.get("/v1/info")
    async def info():
        if model is None:
            return JSONResponse({"error": "model not ready"}, status_code=503)
        return {"vocab": list(model.vocab), "model": model.name}

    @app.post("/v1/logits")
    async def logits(request: Request):
        if model is None:
            return JSONResponse({"error": "model not ready"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not JSON"}, status_code=400)
        if not isinstance(body, dict) or not isinstance(body.get("contexts"), list):
            return JSONResponse(
                {"error": "expected {model, contexts: [[int]]}"}, status_code=400
            )
        contexts = body["contexts"]
        width = len(model.vocab)
        cleaned = []
        for i, context in enumerate(contexts):
            if not isinstance(context, list):
                return JSONResponse(
                    {"error": f"context {i} is not a list"}, status_code=400
                )
            ids = []
            for t in context:
                if not isinstance(t, int) or isinstance(t, bool):
                    return JSONResponse(
                        {"error": f"context {i} holds a non-integer token"},
                        status_code=400,
                    )
                if not 0 <= t < width:
                    return JSONResponse(
                        {"error": f"token id {t} out of range in context {i}"},
                        status_code=422,
                    )
                ids.append(t)
            if len(ids) > model.max_context:
                return JSONResponse(
                    {"error": f"context {i} exceeds max length {model.max_context}"},
                    status_code=422,
                )
            cleaned.append(ids)
        try:
            rows = model.logits(cleaned)
        except KeyError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {"logits": rows}

    return app
