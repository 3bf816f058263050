"""Local streaming segmentation service and one-shot file inference.

HTTP surface:
    POST /segment   image bytes in, PNG mask out (X-Inference-Ms header)
    GET  /models    all variants with parameter counts + active config
    PUT  /config    {"threshold": float} and/or {"variant": str}

WebSocket /stream speaks a binary protocol. Client frame packets are
8-byte LE sequence, 8-byte LE timestamp (ms), then an encoded image.
Server mask packets are 8-byte LE sequence, 4-byte LE float32 inference
milliseconds, then the run-length-encoded 224x224 mask. Each connection
owns a one-slot mailbox: a frame arriving mid-inference replaces any
undecoded predecessor (latest wins), so the stream never lags more than
one inference behind the camera and the last frame is always processed.
"""

from __future__ import annotations

import asyncio
import json
import logging
import struct
import time
from pathlib import Path

import cv2
import numpy as np
import torch
from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect

from .config import ServiceConfig
from .errors import ConfigError, InferenceError, WoundsegError
from .models import (
    VARIANTS, Network, build_model, count_parameters, normalize_variant,
    variant_parameter_count,
)
from .preprocess import CROP_SIZE, preprocess_frame, to_float_image
from .rle import encode_mask
from .weights import load_weights, read_archive_meta

logger = logging.getLogger(__name__)

FRAME_HEADER = struct.Struct("<QQ")  # sequence, timestamp ms
MASK_HEADER = struct.Struct("<Qf")   # sequence, inference ms


def threshold_probs(probs: np.ndarray, threshold: float) -> np.ndarray:
    """probability >= threshold selects a pixel (inclusive tie rule)."""
    return (probs >= threshold).astype(np.uint8)


def predict_mask(network: Network, tensor: torch.Tensor,
                 threshold: float = 0.75) -> np.ndarray:
    """Run one preprocessed 3xHxW tensor; returns the HxW binary mask."""
    network.eval()
    with torch.inference_mode():
        logits = network(tensor[None])
    if not torch.isfinite(logits).all():
        raise InferenceError(
            f"non-finite logits from variant {network.variant!r}"
        )
    probs = torch.sigmoid(logits)[0, 0].numpy()
    return threshold_probs(probs, threshold)


class InferenceEngine:
    """Shared model + threshold; swaps are atomic and apply to the next frame."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.threshold = config.threshold
        self.network = self._load_variant(normalize_variant(config.variant))

    def _weights_for(self, variant: str) -> Path | None:
        if self.config.weights and normalize_variant(variant) == normalize_variant(
            self.config.variant
        ):
            return Path(self.config.weights)
        if self.config.weights_dir:
            candidate = Path(self.config.weights_dir) / f"{variant}.wsa"
            if candidate.exists():
                return candidate
        return None

    def _load_variant(self, variant: str) -> Network:
        network = build_model(variant, seed=0)
        archive = self._weights_for(variant)
        if archive is not None:
            load_weights(network, archive)
            logger.info("loaded %s weights from %s", variant, archive)
        else:
            logger.warning("no weight archive for %s; serving seeded init", variant)
        return network

    def snapshot(self) -> tuple[Network, float]:
        return self.network, self.threshold

    def set_threshold(self, threshold: float) -> None:
        if not 0 < threshold < 1:
            raise ConfigError(f"threshold must be in (0,1), got {threshold}")
        self.threshold = threshold

    def set_variant(self, variant: str) -> None:
        self.network = self._load_variant(normalize_variant(variant))

    def segment_frame(self, frame_bgr: np.ndarray) -> tuple[np.ndarray, float]:
        """BGR frame -> (224x224 mask, inference milliseconds)."""
        rgb = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB)
        tensor = preprocess_frame(to_float_image(rgb))
        network, threshold = self.snapshot()
        start = time.perf_counter()
        mask = predict_mask(network, tensor, threshold)
        return mask, (time.perf_counter() - start) * 1000.0


class LatestFrameMailbox:
    """One-slot mailbox; putting a new frame drops the unprocessed one."""

    def __init__(self):
        self._item = None
        self._event = asyncio.Event()

    def put(self, item) -> None:
        self._item = item
        self._event.set()

    async def take(self):
        await self._event.wait()
        item = self._item
        self._item = None
        self._event.clear()
        return item


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="woundseg service")
    app.state.engine = InferenceEngine(config)

    @app.get("/models")
    def list_models():
        engine: InferenceEngine = app.state.engine
        return {
            "variants": [
                {"variant": v, "parameters": variant_parameter_count(v)}
                for v in VARIANTS
            ],
            "active": engine.network.variant,
            "threshold": engine.threshold,
            "parameters": count_parameters(engine.network),
        }

    @app.put("/config")
    async def put_config(request: Request):
        engine: InferenceEngine = app.state.engine
        body = await request.json()
        unknown = set(body) - {"threshold", "variant"}
        if unknown:
            return Response(
                json.dumps({"error": f"unknown config keys: {sorted(unknown)}"}),
                status_code=400, media_type="application/json",
            )
        try:
            if "threshold" in body:
                engine.set_threshold(float(body["threshold"]))
            if "variant" in body:
                await asyncio.to_thread(engine.set_variant, str(body["variant"]))
        except (ConfigError, WoundsegError, ValueError) as exc:
            return Response(
                json.dumps({"error": str(exc)}), status_code=400,
                media_type="application/json",
            )
        return {"active": engine.network.variant, "threshold": engine.threshold}

    @app.post("/segment")
    async def segment(request: Request):
        engine: InferenceEngine = app.state.engine
        payload = await request.body()
        frame = cv2.imdecode(np.frombuffer(payload, np.uint8), cv2.IMREAD_COLOR)
        if frame is None:
            return Response(
                json.dumps({"error": "cannot decode image payload"}),
                status_code=400, media_type="application/json",
            )
        mask, ms = await asyncio.to_thread(engine.segment_frame, frame)
        ok, png = cv2.imencode(".png", mask * 255)
        if not ok:
            raise InferenceError("failed to encode mask image")
        return Response(
            content=png.tobytes(), media_type="image/png",
            headers={
                "X-Inference-Ms": f"{ms:.3f}",
                "X-Variant": engine.network.variant,
                "X-Threshold": str(engine.threshold),
            },
        )

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        engine: InferenceEngine = app.state.engine
        await ws.accept()
        mailbox = LatestFrameMailbox()

        async def worker():
            while True:
                sequence, payload = await mailbox.take()
                frame = cv2.imdecode(np.frombuffer(payload, np.uint8),
                                     cv2.IMREAD_COLOR)
                if frame is None:
                    await ws.send_text(json.dumps(
                        {"sequence": sequence, "error": "cannot decode frame"}
                    ))
                    continue
                try:
                    mask, ms = await asyncio.to_thread(engine.segment_frame, frame)
                except WoundsegError as exc:
                    await ws.send_text(json.dumps(
                        {"sequence": sequence, "error": str(exc)}
                    ))
                    continue
                await ws.send_bytes(
                    MASK_HEADER.pack(sequence, ms) + encode_mask(mask)
                )

        worker_task = asyncio.create_task(worker())
        try:
            while True:
                packet = await ws.receive_bytes()
                if len(packet) <= FRAME_HEADER.size:
                    await ws.send_text(json.dumps(
                        {"error": "frame packet too short"}
                    ))
                    continue
                sequence, _timestamp = FRAME_HEADER.unpack_from(packet)
                mailbox.put((sequence, packet[FRAME_HEADER.size:]))
        except WebSocketDisconnect:
            pass
        finally:
            worker_task.cancel()

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def infer_file(
    image_path: Path | str,
    ckpt: Path | str | None = None,
    variant: str | None = None,
    threshold: float = 0.75,
    out_path: Path | str | None = None,
) -> tuple[Path, Path]:
    """One-shot inference: write the 0/255 mask PNG plus a metadata line.

    The variant comes from the checkpoint's metadata block unless given
    explicitly; without a checkpoint a seeded-init model is used.
    """
    image_path = Path(image_path)
    frame = cv2.imread(str(image_path), cv2.IMREAD_COLOR)
    if frame is None:
        raise IOError(f"cannot read image: {image_path}")
    if ckpt is not None and variant is None:
        meta = read_archive_meta(ckpt)
        variant = meta.get("variant")
        if not variant:
            raise ConfigError(f"{ckpt}: archive does not record a variant; pass one")
    network = build_model(variant or "unext_s", seed=0)
    if ckpt is not None:
        load_weights(network, ckpt)

    rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
    tensor = preprocess_frame(to_float_image(rgb))
    start = time.perf_counter()
    mask = predict_mask(network, tensor, threshold)
    ms = (time.perf_counter() - start) * 1000.0

    out_path = Path(out_path) if out_path else image_path.with_name(
        image_path.stem + "_mask.png"
    )
    cv2.imwrite(str(out_path), mask * 255)
    meta_path = out_path.with_suffix(".txt")
    meta_path.write_text(
        f"variant={network.variant} threshold={threshold} inference_ms={ms:.3f}\n"
    )
    return out_path, meta_path
