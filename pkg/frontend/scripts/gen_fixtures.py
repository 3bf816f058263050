"""Generate protocol test fixtures from the Python service encoder.

Writes fixtures/rle_cases.json: 100 masks described by integer rectangle
lists (so the TypeScript test can rebuild them exactly) together with the
service's RLE bytes, plus one synthetic camera frame as base64 JPEG for
the replay tests.
"""

import base64
import json
from pathlib import Path

import cv2
import numpy as np

from woundseg.rle import encode_mask

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"


def build_mask(rects, side=224):
    mask = np.zeros((side, side), np.uint8)
    for x, y, w, h in rects:
        mask[y : y + h, x : x + w] = 1
    return mask


def main():
    FIXTURES.mkdir(exist_ok=True)
    rng = np.random.default_rng(424242)
    cases = []
    for index in range(100):
        n_rects = int(rng.integers(0, 6))
        rects = []
        for _ in range(n_rects):
            w = int(rng.integers(1, 120))
            h = int(rng.integers(1, 120))
            x = int(rng.integers(0, 224 - w))
            y = int(rng.integers(0, 224 - h))
            rects.append([x, y, w, h])
        mask = build_mask(rects)
        cases.append({
            "rects": rects,
            "rle_b64": base64.b64encode(encode_mask(mask)).decode("ascii"),
            "area": int(mask.sum()),
        })
    (FIXTURES / "rle_cases.json").write_text(json.dumps({"side": 224, "cases": cases}))

    frame = np.full((480, 640, 3), 168, np.uint8)
    cv2.ellipse(frame, (320, 240), (90, 60), 25.0, 0, 360, (36, 28, 152), -1)
    cv2.rectangle(frame, (80, 80), (170, 150), (90, 120, 60), -1)
    ok, jpg = cv2.imencode(".jpg", frame, [cv2.IMWRITE_JPEG_QUALITY, 85])
    assert ok
    (FIXTURES / "frame_jpeg.b64").write_text(
        base64.b64encode(jpg.tobytes()).decode("ascii")
    )
    print(f"wrote {len(cases)} RLE cases and one replay frame to {FIXTURES}")


if __name__ == "__main__":
    main()
