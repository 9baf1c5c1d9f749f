/**
 * Editor controller: owns the state, talks to the transport, keeps one
 * save in flight at a time. DOM-free so the whole edit/save loop is
 * testable; app.ts wires it to the canvas.
 */

import type { SaveOutcome, Transport } from "./api.js";
import {
  applyEdit,
  createState,
  EditAction,
  EditorState,
  isDirty,
  markSaved,
  undo,
} from "./model.js";

export type SaveResult =
  | { status: "saved" }
  | { status: "clean" } // nothing to save, no network call
  | { status: "rejected"; reason: string }
  | { status: "busy" };

export class Editor {
  state: EditorState | null = null;
  lastError: string | null = null;
  private saving = false;

  constructor(
    private transport: Transport,
    private onChange: () => void = () => {},
  ) {}

  async load(pageId: string, imageWidth: number, imageHeight: number): Promise<void> {
    const records = await this.transport.getBoxes(pageId);
    this.state = createState(pageId, imageWidth, imageHeight, records);
    this.lastError = null;
    this.onChange();
  }

  get dirty(): boolean {
    return this.state !== null && isDirty(this.state);
  }

  /** Apply an action; invalid edits are refused and leave state untouched. */
  edit(action: EditAction): boolean {
    if (!this.state) return false;
    const result = applyEdit(this.state, action);
    if (!result.ok) {
      this.lastError = result.reason;
      this.onChange();
      return false;
    }
    this.state = result.state;
    this.lastError = null;
    this.onChange();
    return true;
  }

  select(index: number | null): void {
    if (!this.state) return;
    this.state = { ...this.state, selection: index };
    this.onChange();
  }

  undo(): void {
    if (!this.state) return;
    this.state = undo(this.state);
    this.lastError = null;
    this.onChange();
  }

  async save(): Promise<SaveResult> {
    if (!this.state) return { status: "clean" };
    if (!this.dirty) return { status: "clean" };
    if (this.saving) return { status: "busy" };
    this.saving = true;
    let outcome: SaveOutcome;
    try {
      outcome = await this.transport.putBoxes(this.state.pageId, this.state.records);
    } catch (err) {
      outcome = { ok: false, reason: err instanceof Error ? err.message : String(err) };
    } finally {
      this.saving = false;
    }
    if (!outcome.ok) {
      // client state is retained so the user can fix and retry
      this.lastError = outcome.reason ?? "save failed";
      this.onChange();
      return { status: "rejected", reason: this.lastError };
    }
    this.state = markSaved(this.state);
    this.lastError = null;
    this.onChange();
    return { status: "saved" };
  }

  /** Replace the client list with autobox proposals (explicit user accept). */
  async acceptAutobox(): Promise<void> {
    if (!this.state) return;
    const proposals = await this.transport.autobox(this.state.pageId);
    const base = this.state;
    this.state = {
      ...base,
      records: proposals,
      selection: proposals.length ? 0 : null,
      undoStack: [...base.undoStack, base.records],
    };
    this.onChange();
  }
}
