"""FastAPI application wiring.

The backend loads in a background thread started by the lifespan hook, so
the service binds its port immediately and reports readiness through
/health: 503 with a status body while loading (or after a failed load),
200 once ready. Inference endpoints also refuse with 503 until the
backend is up. Request handling is stateless beyond the loaded backend.
"""

import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .backends import Backend
from .projection import project_subword_to_word
from .wire import (
    MASK_TOKEN,
    MAX_TEXT_CHARS,
    MAX_TOKENS_PER_REQUEST,
    InfillRequest,
    InfillResponse,
    PredictRequest,
    PredictResponse,
)


def create_app(
    backend: Backend,
    max_tokens: int = MAX_TOKENS_PER_REQUEST,
    max_chars: int = MAX_TEXT_CHARS,
) -> FastAPI:
    ready = threading.Event()
    state = {"error": None}

    def _load():
        try:
            backend.load()
        except Exception as exc:
            state["error"] = f"{type(exc).__name__}: {exc}"
        else:
            ready.set()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        threading.Thread(target=_load, daemon=True).start()
        yield

    app = FastAPI(title="halluc-bridge", lifespan=lifespan)

    def _require_ready():
        if state["error"] is not None:
            raise HTTPException(503, f"backend failed to load: {state['error']}")
        if not ready.is_set():
            raise HTTPException(503, "backend is still loading")

    @app.get("/health")
    def health():
        if state["error"] is not None:
            return JSONResponse(
                {"status": "failed", "detail": state["error"]}, status_code=503
            )
        if not ready.is_set():
            return JSONResponse({"status": "loading"}, status_code=503)
        return {"status": "ready", "backend": backend.name}

    @app.post("/infill", response_model=InfillResponse)
    def infill(req: InfillRequest):
        _require_ready()
        if len(req.tokens) > max_tokens:
            raise HTTPException(
                413, f"request exceeds {max_tokens} tokens"
            )
        filled = backend.infill(req.tokens, req.beam_size, req.length_penalty)
        if any(tok == MASK_TOKEN for tok in filled):
            raise HTTPException(500, "backend left mask sentinels unresolved")
        return InfillResponse(tokens=filled)

    @app.post("/predict", response_model=PredictResponse)
    def predict(req: PredictRequest):
        _require_ready()
        for name, text in (
            ("source", req.source),
            ("target", req.target),
            ("reference", req.reference or ""),
        ):
            if len(text) > max_chars:
                raise HTTPException(
                    413, f"field {name!r} exceeds {max_chars} characters"
                )
        n_words = len(req.target.split())
        sub = backend.predict_subwords(req.source, req.target, req.reference)
        try:
            probs = project_subword_to_word(sub.probs, sub.word_ranges)
        except ValueError as exc:
            raise HTTPException(500, f"backend segmentation invalid: {exc}")
        if len(probs) != n_words:
            raise HTTPException(
                500,
                f"backend produced {len(probs)} word scores for "
                f"{n_words} target tokens",
            )
        return PredictResponse(probs=probs)

    return app
