// Session state with every mutation funnelled through one reducer.
//
// The threshold/variant fields always mirror the last configuration the
// service acknowledged; slider drags dispatch nothing until the PUT
// round-trips, so the display can never drift from the service.

export type StreamStatus = "connecting" | "connected" | "disconnected";

export interface VariantInfo {
  variant: string;
  parameters: number;
}

export interface SessionState {
  variants: VariantInfo[];
  activeVariant: string;
  threshold: number;
  streamStatus: StreamStatus;
  streamId: number;
  fps: number;
  inferenceMs: number;
  overlayOpacity: number;
  framesSent: number;
  masksReceived: number;
  lastError: string | null;
}

export const initialState: SessionState = {
  variants: [],
  activeVariant: "",
  threshold: 0.75,
  streamStatus: "connecting",
  streamId: 0,
  fps: 0,
  inferenceMs: 0,
  overlayOpacity: 0.45,
  framesSent: 0,
  masksReceived: 0,
  lastError: null,
};

export type Action =
  | { type: "models-loaded"; variants: VariantInfo[]; active: string; threshold: number }
  | { type: "config-acked"; active: string; threshold: number }
  | { type: "config-rejected"; error: string }
  | { type: "stream-status"; status: StreamStatus; streamId?: number }
  | { type: "frame-sent" }
  | { type: "mask-received"; inferenceMs: number; fps: number }
  | { type: "overlay-opacity"; value: number }
  | { type: "protocol-error"; error: string };

export function reduce(state: SessionState, action: Action): SessionState {
  switch (action.type) {
    case "models-loaded":
      return {
        ...state,
        variants: action.variants,
        activeVariant: action.active,
        threshold: action.threshold,
      };
    case "config-acked":
      return {
        ...state,
        activeVariant: action.active,
        threshold: action.threshold,
        lastError: null,
      };
    case "config-rejected":
      return { ...state, lastError: action.error };
    case "stream-status":
      return {
        ...state,
        streamStatus: action.status,
        streamId: action.streamId ?? state.streamId,
      };
    case "frame-sent":
      return { ...state, framesSent: state.framesSent + 1 };
    case "mask-received":
      return {
        ...state,
        masksReceived: state.masksReceived + 1,
        inferenceMs: action.inferenceMs,
        fps: action.fps,
      };
    case "overlay-opacity":
      return { ...state, overlayOpacity: action.value };
    case "protocol-error":
      return { ...state, lastError: action.error };
  }
}
