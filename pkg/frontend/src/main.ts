// Operator console: webcam capture -> stream -> mask overlay + controls.

import { fetchModels, putConfig } from "./api.js";
import { cropRect, tintMask } from "./overlay.js";
import { MaskPacket } from "./protocol.js";
import { SCENES } from "./scenes.js";
import { StreamSession } from "./session.js";
import { SessionState } from "./state.js";

const SHORT_SIDE = 360; // capture downscale target; must stay >= 224
const JPEG_QUALITY = 0.8;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const video = el<HTMLVideoElement>("camera");
const captureCanvas = el<HTMLCanvasElement>("capture");
const viewCanvas = el<HTMLCanvasElement>("view");
const statusDot = el<HTMLSpanElement>("status");
const statsLine = el<HTMLSpanElement>("stats");
const variantSelect = el<HTMLSelectElement>("variant");
const thresholdSlider = el<HTMLInputElement>("threshold");
const thresholdValue = el<HTMLSpanElement>("threshold-value");
const opacitySlider = el<HTMLInputElement>("opacity");
const errorBar = el<HTMLDivElement>("error-bar");
const retryButton = el<HTMLButtonElement>("retry-camera");
const sceneList = el<HTMLUListElement>("scenes");

const baseUrl = (window as { WOUNDSEG_URL?: string }).WOUNDSEG_URL ?? "";
const wsUrl =
  (baseUrl || `${location.protocol}//${location.host}`)
    .replace(/^http/, "ws") + "/stream";

let lastMask: MaskPacket | null = null;
let lastFrame: ImageData | null = null;

function renderState(state: SessionState): void {
  statusDot.dataset.status = state.streamStatus;
  statusDot.title = state.streamStatus;
  statsLine.textContent =
    `${state.fps.toFixed(1)} masks/s · ${state.inferenceMs.toFixed(0)} ms · ` +
    `stream #${state.streamId}`;
  thresholdValue.textContent = state.threshold.toFixed(2);
  if (document.activeElement !== thresholdSlider) {
    thresholdSlider.value = String(state.threshold);
  }
  if (state.lastError) {
    errorBar.textContent = state.lastError;
    errorBar.hidden = false;
  } else {
    errorBar.hidden = true;
  }
}

const session = new StreamSession({
  url: wsUrl,
  onMask: (packet) => {
    lastMask = packet;
    drawComposite();
  },
  onState: renderState,
});

function drawComposite(): void {
  const ctx = viewCanvas.getContext("2d");
  if (!ctx || !lastFrame) return;
  const frame = new ImageData(
    new Uint8ClampedArray(lastFrame.data), lastFrame.width, lastFrame.height,
  );
  const rect = cropRect(frame.width, frame.height);
  if (lastMask) {
    tintMask(frame, lastMask.mask, rect, Number(opacitySlider.value));
  }
  viewCanvas.width = frame.width;
  viewCanvas.height = frame.height;
  ctx.putImageData(frame, 0, 0);
  // outline what the model sees
  ctx.strokeStyle = "#27e1a4";
  ctx.lineWidth = 2;
  ctx.strokeRect(rect.x + 1, rect.y + 1, rect.size - 2, rect.size - 2);
}

async function captureLoop(): Promise<void> {
  const ctx = captureCanvas.getContext("2d");
  if (!ctx) return;
  const tick = async () => {
    if (video.readyState >= 2 && video.videoWidth > 0) {
      const scale = Math.max(
        SHORT_SIDE / Math.min(video.videoWidth, video.videoHeight), 0,
      );
      const w = Math.max(224, Math.round(video.videoWidth * scale));
      const h = Math.max(224, Math.round(video.videoHeight * scale));
      captureCanvas.width = w;
      captureCanvas.height = h;
      ctx.drawImage(video, 0, 0, w, h);
      lastFrame = ctx.getImageData(0, 0, w, h);
      drawComposite();
      const blob = await new Promise<Blob | null>((resolve) =>
        captureCanvas.toBlob(resolve, "image/jpeg", JPEG_QUALITY),
      );
      if (blob) {
        session.offerFrame(new Uint8Array(await blob.arrayBuffer()));
      }
    }
    requestAnimationFrame(() => void tick());
  };
  await tick();
}

async function startCamera(): Promise<void> {
  retryButton.hidden = true;
  try {
    const stream = await navigator.mediaDevices.getUserMedia({
      video: { width: 640, height: 480 },
    });
    video.srcObject = stream;
    await video.play();
    void captureLoop();
  } catch (err) {
    errorBar.textContent = `camera unavailable: ${err}`;
    errorBar.hidden = false;
    retryButton.hidden = false;
  }
}

async function syncControls(): Promise<void> {
  const models = await fetchModels(baseUrl);
  variantSelect.innerHTML = "";
  for (const item of models.variants) {
    const option = document.createElement("option");
    option.value = item.variant;
    option.textContent =
      `${item.variant} (${(item.parameters / 1e6).toFixed(2)}M)`;
    variantSelect.appendChild(option);
  }
  variantSelect.value = models.active;
  session.state = {
    ...session.state,
    variants: models.variants,
    activeVariant: models.active,
    threshold: models.threshold,
  };
  renderState(session.state);
}

variantSelect.addEventListener("change", async () => {
  const previous = session.state.activeVariant;
  try {
    const ack = await putConfig(baseUrl, { variant: variantSelect.value });
    session.state = { ...session.state, activeVariant: ack.active };
  } catch (err) {
    variantSelect.value = previous;
    errorBar.textContent = String(err);
    errorBar.hidden = false;
  }
});

thresholdSlider.addEventListener("change", async () => {
  const previous = session.state.threshold;
  try {
    const ack = await putConfig(baseUrl, {
      threshold: Number(thresholdSlider.value),
    });
    session.state = { ...session.state, threshold: ack.threshold };
    renderState(session.state);
  } catch (err) {
    thresholdSlider.value = String(previous);
    errorBar.textContent = String(err);
    errorBar.hidden = false;
  }
});

opacitySlider.addEventListener("input", drawComposite);
retryButton.addEventListener("click", () => void startCamera());

for (const scene of SCENES) {
  const item = document.createElement("li");
  const box = document.createElement("input");
  box.type = "checkbox";
  box.id = `scene-${scene.id}`;
  const label = document.createElement("label");
  label.htmlFor = box.id;
  label.textContent = scene.label;
  item.append(box, label);
  sceneList.appendChild(item);
}

// service restarts re-sync the panel once the stream comes back
let lastStreamId = 0;
const poll = setInterval(() => {
  if (session.state.streamId !== lastStreamId &&
      session.state.streamStatus === "connected") {
    lastStreamId = session.state.streamId;
    void syncControls();
  }
}, 500);
window.addEventListener("beforeunload", () => clearInterval(poll));

void syncControls();
session.connect();
void startCamera();
