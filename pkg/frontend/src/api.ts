import { ServiceError } from "./types.js";
import type {
  ConfigPatch,
  InvalidatedStage,
  LayerName,
  ResultDoc,
  ServiceApi,
  SessionInfo,
  StageName,
} from "./types.js";

async function failFrom(res: Response): Promise<never> {
  let payload = { error: `HTTP ${res.status}` };
  try {
    payload = await res.json();
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(res.status, payload);
}

/** fetch-backed client for the tuning service */
export class HttpApi implements ServiceApi {
  constructor(private base: string = "") {}

  async createSession(file: Blob, name: string): Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", file, name);
    const res = await fetch(`${this.base}/api/sessions`, { method: "POST", body: form });
    if (!res.ok) await failFrom(res);
    return res.json();
  }

  async patchParams(
    id: string,
    patch: ConfigPatch,
  ): Promise<{ invalidated: InvalidatedStage[] }> {
    const res = await fetch(`${this.base}/api/sessions/${id}/params`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
    if (!res.ok) await failFrom(res);
    return res.json();
  }

  async fetchStage(id: string, stage: StageName, layer: LayerName | null): Promise<Blob> {
    const query = layer ? `?layer=${layer}` : "";
    const res = await fetch(`${this.base}/api/sessions/${id}/stages/${stage}${query}`);
    if (!res.ok) await failFrom(res);
    return res.blob();
  }

  async fetchResult(id: string): Promise<ResultDoc> {
    const res = await fetch(`${this.base}/api/sessions/${id}/result`);
    if (!res.ok) await failFrom(res);
    return res.json();
  }

  async deleteSession(id: string): Promise<void> {
    await fetch(`${this.base}/api/sessions/${id}`, { method: "DELETE" });
  }
}
