import { describe, expect, it } from "vitest";

import {
  applyEdit,
  boxToScreen,
  BoxRec,
  createState,
  hitTest,
  isDirty,
  markSaved,
  MAX_UNDO,
  screenToBox,
  undo,
  validateRec,
} from "../src/model.js";

const W = 200;
const H = 100;

function rec(glyph: string, left: number, bottom: number, right: number, top: number): BoxRec {
  return { glyph, left, bottom, right, top, page: 0 };
}

function freshState(records = [rec("1", 10, 10, 20, 30), rec("2", 40, 10, 50, 30)]) {
  return createState("page", W, H, records);
}

describe("validateRec", () => {
  it("accepts a sane record", () => {
    expect(validateRec(rec("7", 0, 0, 5, 5), W, H)).toBeNull();
  });

  it("rejects multi-character and whitespace glyphs", () => {
    expect(validateRec(rec("10", 0, 0, 5, 5), W, H)).toMatch(/glyph/);
    expect(validateRec(rec(" ", 0, 0, 5, 5), W, H)).toMatch(/glyph/);
    expect(validateRec(rec("", 0, 0, 5, 5), W, H)).toMatch(/glyph/);
  });

  it("accepts an astral-plane glyph as one character", () => {
    expect(validateRec(rec("\u{1D7D8}", 0, 0, 5, 5), W, H)).toBeNull();
  });

  it("rejects inverted or degenerate geometry", () => {
    expect(validateRec(rec("1", 9, 0, 3, 5), W, H)).toMatch(/left/);
    expect(validateRec(rec("1", 0, 5, 3, 5), W, H)).toMatch(/bottom/);
  });

  it("rejects records leaving the image or negative coords", () => {
    expect(validateRec(rec("1", 0, 0, W + 1, 5), W, H)).toMatch(/image/);
    expect(validateRec(rec("1", -1, 0, 5, 5), W, H)).toMatch(/left/);
    expect(validateRec(rec("1", 0.5 as unknown as number, 0, 5, 5), W, H)).toMatch(/left/);
  });
});

describe("applyEdit", () => {
  it("relabel updates glyph and sets dirty", () => {
    const state = freshState();
    const result = applyEdit(state, { kind: "relabel", index: 0, glyph: "7" });
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    expect(result.state.records[0]!.glyph).toBe("7");
    expect(isDirty(result.state)).toBe(true);
    expect(isDirty(state)).toBe(false); // original untouched
  });

  it("refuses dragging the right edge past the left edge", () => {
    const state = freshState();
    const result = applyEdit(state, { kind: "resize", index: 0, edge: "right", delta: -15 });
    expect(result.ok).toBe(false);
    if (result.ok) return;
    expect(result.reason).toMatch(/left/);
  });

  it("refuses moves that leave the image", () => {
    const state = freshState();
    expect(applyEdit(state, { kind: "move", index: 0, dx: -11, dy: 0 }).ok).toBe(false);
    expect(applyEdit(state, { kind: "move", index: 0, dx: 0, dy: 75 }).ok).toBe(false);
    expect(applyEdit(state, { kind: "move", index: 0, dx: 5, dy: 5 }).ok).toBe(true);
  });

  it("delete then undo restores the record exactly", () => {
    const state = freshState();
    const deleted = applyEdit(state, { kind: "delete", index: 0 });
    expect(deleted.ok).toBe(true);
    if (!deleted.ok) return;
    expect(deleted.state.records).toHaveLength(1);
    const restored = undo(deleted.state);
    expect(restored.records).toEqual(state.records);
  });

  it("add validates and selects the new record", () => {
    const state = freshState();
    const bad = applyEdit(state, { kind: "add", rec: rec("9", 5, 5, 5, 9) });
    expect(bad.ok).toBe(false);
    const good = applyEdit(state, { kind: "add", rec: rec("9", 60, 10, 70, 30) });
    expect(good.ok).toBe(true);
    if (!good.ok) return;
    expect(good.state.records).toHaveLength(3);
    expect(good.state.selection).toBe(2);
  });

  it("no action sequence can produce an invalid record", () => {
    let state = freshState();
    const actions = [
      { kind: "move", index: 0, dx: -100, dy: 0 },
      { kind: "resize", index: 0, edge: "top", delta: 500 },
      { kind: "resize", index: 1, edge: "left", delta: 50 },
      { kind: "relabel", index: 0, glyph: "ab" },
      { kind: "move", index: 1, dx: 3, dy: -2 },
      { kind: "relabel", index: 1, glyph: "4" },
    ] as const;
    for (const action of actions) {
      const result = applyEdit(state, action);
      if (result.ok) state = result.state;
    }
    for (const r of state.records) {
      expect(validateRec(r, W, H)).toBeNull();
    }
  });

  it("undo stack is bounded", () => {
    let state = freshState();
    for (let i = 0; i < MAX_UNDO + 40; i++) {
      const result = applyEdit(state, {
        kind: "relabel",
        index: 0,
        glyph: String(i % 10),
      });
      if (result.ok) state = result.state;
    }
    expect(state.undoStack.length).toBe(MAX_UNDO);
    expect(MAX_UNDO).toBeGreaterThanOrEqual(50);
  });
});

describe("dirty flag", () => {
  it("true iff client list differs from the saved snapshot", () => {
    const state = freshState();
    expect(isDirty(state)).toBe(false);
    const edited = applyEdit(state, { kind: "relabel", index: 0, glyph: "9" });
    if (!edited.ok) throw new Error("edit failed");
    expect(isDirty(edited.state)).toBe(true);
    // editing back to the original value clears dirtiness
    const back = applyEdit(edited.state, { kind: "relabel", index: 0, glyph: "1" });
    if (!back.ok) throw new Error("edit failed");
    expect(isDirty(back.state)).toBe(false);
    expect(isDirty(markSaved(edited.state))).toBe(false);
  });
});

describe("coordinate conversion", () => {
  it("round-trips every integer rect exactly", () => {
    for (const r of [
      rec("1", 0, 0, 1, 1),
      rec("2", 0, H - 1, 7, H),
      rec("3", 13, 27, 54, 81),
    ]) {
      const screen = boxToScreen(r, H);
      expect(screenToBox(screen, H, r.glyph, r.page)).toEqual(r);
    }
  });

  it("screen y origin is the page top", () => {
    const top = boxToScreen(rec("1", 0, H - 10, 10, H), H);
    expect(top.y).toBe(0);
    expect(top.h).toBe(10);
  });

  it("hitTest honors half-open box edges", () => {
    const records = [rec("1", 10, 10, 20, 30)];
    // box rows span screen y in [H-30, H-10)
    expect(hitTest(records, H, 10, H - 30)).toBe(0);
    expect(hitTest(records, H, 19, H - 11)).toBe(0);
    expect(hitTest(records, H, 20, H - 11)).toBeNull();
    expect(hitTest(records, H, 10, H - 10)).toBeNull();
    expect(hitTest(records, H, 0, 0)).toBeNull();
  });
});
