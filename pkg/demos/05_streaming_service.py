"""Streaming service walkthrough: HTTP + WebSocket protocol end to end.

Starts the service in a background thread, exercises every endpoint with
plain stdlib HTTP, then drives the binary WebSocket stream, including the
latest-wins behavior under a frame burst.

Run: python3 demos/05_streaming_service.py
"""

import asyncio
import json
import struct
import threading
import time
import urllib.request

import cv2
import numpy as np
import uvicorn
import websockets

from woundseg.config import ServiceConfig
from woundseg.rle import decode_mask
from woundseg.service import create_app

PORT = 8731
BASE = f"http://127.0.0.1:{PORT}"


def start_server():
    app = create_app(ServiceConfig(variant="unext_s", threshold=0.75, port=PORT))
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=PORT,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.05)
    return server


def http(method, path, body=None, headers=None):
    request = urllib.request.Request(BASE + path, data=body, method=method,
                                     headers=headers or {})
    with urllib.request.urlopen(request) as resp:
        return resp.status, dict(resp.headers), resp.read()


def make_frame():
    frame = np.full((480, 640, 3), 168, np.uint8)
    cv2.ellipse(frame, (320, 240), (90, 60), 25, 0, 360, (36, 28, 152), -1)
    ok, png = cv2.imencode(".png", frame)
    assert ok
    return png.tobytes()


async def stream_demo(frame):
    async with websockets.connect(f"ws://127.0.0.1:{PORT}/stream") as ws:
        # one frame, one mask
        await ws.send(struct.pack("<QQ", 1, int(time.time() * 1000)) + frame)
        reply = await ws.recv()
        seq, ms = struct.unpack_from("<Qf", reply)
        mask = decode_mask(reply[12:], (224, 224))
        print(f"  frame 1 -> mask {mask.shape}, {int(mask.sum())} positive px, "
              f"{ms:.1f} ms inference")

        # burst ten frames: the one-slot mailbox drops stale ones but the
        # final frame is always answered
        for seq in range(2, 12):
            await ws.send(struct.pack("<QQ", seq, int(time.time() * 1000)) + frame)
        answered = []
        while True:
            reply = await ws.recv()
            seq, _ = struct.unpack_from("<Qf", reply)
            answered.append(seq)
            if seq == 11:
                break
        print(f"  burst of 10 -> {len(answered)} masks "
              f"(sequences {answered}); stale frames were dropped")


def main():
    print("starting service (seeded-init UNeXt-S)...")
    server = start_server()
    frame = make_frame()

    status, _, body = http("GET", "/models")
    models = json.loads(body)
    print(f"\nGET /models -> {status}; active={models['active']} "
          f"threshold={models['threshold']}")
    for item in models["variants"]:
        print(f"  {item['variant']:14s} {item['parameters']:>12,} params")

    status, headers, body = http("POST", "/segment", frame,
                                 {"content-type": "image/png"})
    print(f"\nPOST /segment -> {status}; {len(body)} byte PNG mask; "
          f"inference {headers['X-Inference-Ms']} ms")

    status, _, body = http("PUT", "/config",
                           json.dumps({"threshold": 0.9}).encode(),
                           {"content-type": "application/json"})
    print(f"PUT /config threshold=0.9 -> {status}: {body.decode()}")

    print("\nWebSocket /stream:")
    asyncio.run(stream_demo(frame))

    server.should_exit = True
    print("\ndone")


if __name__ == "__main__":
    main()
