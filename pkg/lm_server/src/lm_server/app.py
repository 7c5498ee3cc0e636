"""HTTP surface: POST /predict and GET /health.

Request body: {"tokens": [...], "mask_positions": [...], "top_k": K}.
Response: {"predictions": [{"position": P, "candidates":
[{"token": "...", "logprob": -1.23}, ...]}, ...]} with candidates sorted by
descending logprob. Malformed requests get 400; 503 until the model loads.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import Callable

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import Backend


class PredictRequest(BaseModel):
    tokens: list[str]
    mask_positions: list[int]
    top_k: int = Field(default=5)


class Candidate(BaseModel):
    token: str
    logprob: float


class PositionPrediction(BaseModel):
    position: int
    candidates: list[Candidate]


class PredictResponse(BaseModel):
    predictions: list[PositionPrediction]


def create_app(backend: Backend | Callable[[], Backend] | None = None) -> FastAPI:
    """Build the app. ``backend`` may be a ready backend or a zero-argument
    loader invoked on startup; None starts a server that reports not-ready."""
    state = {"backend": backend if not callable(backend) else None}

    lifespan = None
    if callable(backend):
        @asynccontextmanager
        async def lifespan(_app: FastAPI):
            state["backend"] = backend()
            yield

    app = FastAPI(title="lm-server", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/health")
    def health():
        b = state["backend"]
        if b is None:
            return {"ready": False, "model": None, "vocab_size": None}
        return {"ready": True, "model": b.model_id, "vocab_size": b.vocab_size}

    @app.post("/predict", response_model=PredictResponse)
    def predict(req: PredictRequest):
        b = state["backend"]
        if b is None:
            raise HTTPException(status_code=503, detail="model not ready")
        if req.top_k < 1:
            raise HTTPException(status_code=400, detail="top_k must be >= 1")
        for p in req.mask_positions:
            if not 0 <= p < len(req.tokens):
                raise HTTPException(
                    status_code=400,
                    detail=f"mask position {p} out of range for {len(req.tokens)} tokens",
                )
        tokens = [t.lower() for t in req.tokens]
        predictions = []
        for p in req.mask_positions:
            cands = b.predict_position(tokens, p, req.top_k)
            predictions.append(
                PositionPrediction(
                    position=p,
                    candidates=[Candidate(token=t, logprob=lp) for t, lp in cands],
                )
            )
        return PredictResponse(predictions=predictions)

    return app
