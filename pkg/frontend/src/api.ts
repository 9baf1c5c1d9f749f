/**
 * Thin typed wrapper over the gateway HTTP API. The Transport interface
 * exists so editor logic can run against a fake in tests.
 */

import type { BoxRec } from "./model.js";

export interface PageInfo {
  id: string;
  image: string;
  has_boxes: boolean;
}

export interface SaveOutcome {
  ok: boolean;
  /** machine-readable server reason on failure */
  reason?: string;
}

export interface Transport {
  listPages(): Promise<PageInfo[]>;
  getBoxes(pageId: string): Promise<BoxRec[]>;
  putBoxes(pageId: string, records: BoxRec[]): Promise<SaveOutcome>;
  autobox(pageId: string): Promise<BoxRec[]>;
  imageUrl(pageId: string): string;
}

export class HttpTransport implements Transport {
  constructor(private base: string = "") {}

  async listPages(): Promise<PageInfo[]> {
    const resp = await fetch(`${this.base}/api/pages`);
    if (!resp.ok) throw new Error(`pages: HTTP ${resp.status}`);
    return (await resp.json()).pages as PageInfo[];
  }

  async getBoxes(pageId: string): Promise<BoxRec[]> {
    const resp = await fetch(`${this.base}/api/pages/${encodeURIComponent(pageId)}/boxes`);
    if (!resp.ok) throw new Error(`boxes: HTTP ${resp.status}`);
    return (await resp.json()).records as BoxRec[];
  }

  async putBoxes(pageId: string, records: BoxRec[]): Promise<SaveOutcome> {
    const resp = await fetch(`${this.base}/api/pages/${encodeURIComponent(pageId)}/boxes`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ records }),
    });
    if (resp.ok) return { ok: true };
    let reason = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      if (body && typeof body.error === "string") reason = body.error;
    } catch {
      /* non-JSON error body: keep the status text */
    }
    return { ok: false, reason };
  }

  async autobox(pageId: string): Promise<BoxRec[]> {
    const resp = await fetch(`${this.base}/api/pages/${encodeURIComponent(pageId)}/autobox`, {
      method: "POST",
    });
    if (!resp.ok) throw new Error(`autobox: HTTP ${resp.status}`);
    return (await resp.json()).records as BoxRec[];
  }

  imageUrl(pageId: string): string {
    return `${this.base}/api/pages/${encodeURIComponent(pageId)}/image`;
  }
}
