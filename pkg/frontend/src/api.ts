// HTTP control plane: model listing and config mutations.

import { VariantInfo } from "./state.js";

export interface ModelsResponse {
  variants: VariantInfo[];
  active: string;
  threshold: number;
}

export async function fetchModels(baseUrl: string): Promise<ModelsResponse> {
  const resp = await fetch(`${baseUrl}/models`);
  if (!resp.ok) throw new Error(`GET /models failed: ${resp.status}`);
  return (await resp.json()) as ModelsResponse;
}

export interface ConfigAck {
  active: string;
  threshold: number;
}

/** PUT /config; resolves with the acknowledged config or throws with the
 * service's error message (the caller snaps the UI back). */
export async function putConfig(
  baseUrl: string,
  change: { threshold?: number; variant?: string },
): Promise<ConfigAck> {
  const resp = await fetch(`${baseUrl}/config`, {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(change),
  });
  const body = await resp.json();
  if (!resp.ok) {
    throw new Error(String(body.error ?? `PUT /config failed: ${resp.status}`));
  }
  return body as ConfigAck;
}
