/**
 * Editor state and the pure edit operations.
 *
 * Box records use bottom-left-origin page coordinates (y grows upward,
 * left/bottom inclusive, right/top exclusive) exactly like the on-disk box
 * format; conversion to top-left screen space lives in boxToScreen /
 * screenToBox and is exact for integers. All edits are validated before
 * they apply, so no action sequence can produce an invalid client record.
 */

export interface BoxRec {
  glyph: string;
  left: number;
  bottom: number;
  right: number;
  top: number;
  page: number;
}

export interface EditorState {
  pageId: string;
  imageWidth: number;
  imageHeight: number;
  records: BoxRec[];
  /** last state acknowledged by the server; dirty = differs from this */
  savedRecords: BoxRec[];
  selection: number | null;
  undoStack: BoxRec[][];
}

export const MAX_UNDO = 100;

export type EditAction =
  | { kind: "relabel"; index: number; glyph: string }
  | { kind: "move"; index: number; dx: number; dy: number }
  | { kind: "resize"; index: number; edge: "left" | "right" | "bottom" | "top"; delta: number }
  | { kind: "delete"; index: number }
  | { kind: "add"; rec: BoxRec };

export type EditResult =
  | { ok: true; state: EditorState }
  | { ok: false; reason: string };

export function createState(
  pageId: string,
  imageWidth: number,
  imageHeight: number,
  records: BoxRec[],
): EditorState {
  return {
    pageId,
    imageWidth,
    imageHeight,
    records: records.map(cloneRec),
    savedRecords: records.map(cloneRec),
    selection: records.length ? 0 : null,
    undoStack: [],
  };
}

export function cloneRec(rec: BoxRec): BoxRec {
  return { ...rec };
}

export function recordsEqual(a: BoxRec[], b: BoxRec[]): boolean {
  if (a.length !== b.length) return false;
  return a.every((rec, i) => {
    const other = b[i]!;
    return (
      rec.glyph === other.glyph &&
      rec.left === other.left &&
      rec.bottom === other.bottom &&
      rec.right === other.right &&
      rec.top === other.top &&
      rec.page === other.page
    );
  });
}

export function isDirty(state: EditorState): boolean {
  return !recordsEqual(state.records, state.savedRecords);
}

/** Reject anything that would violate the box-record invariants. */
export function validateRec(rec: BoxRec, imageWidth: number, imageHeight: number): string | null {
  if ([...rec.glyph].length !== 1 || /\s/u.test(rec.glyph)) {
    return `glyph must be a single non-space character, got "${rec.glyph}"`;
  }
  for (const key of ["left", "bottom", "right", "top", "page"] as const) {
    if (!Number.isInteger(rec[key]) || rec[key] < 0) {
      return `${key} must be a non-negative integer`;
    }
  }
  if (rec.left >= rec.right) return "left edge must stay left of the right edge";
  if (rec.bottom >= rec.top) return "bottom edge must stay below the top edge";
  if (rec.right > imageWidth || rec.top > imageHeight) {
    return "box must stay inside the image";
  }
  return null;
}

function pushUndo(state: EditorState): BoxRec[][] {
  const stack = [...state.undoStack, state.records.map(cloneRec)];
  return stack.length > MAX_UNDO ? stack.slice(stack.length - MAX_UNDO) : stack;
}

export function applyEdit(state: EditorState, action: EditAction): EditResult {
  if (action.kind !== "add") {
    const index = action.index;
    if (index < 0 || index >= state.records.length) {
      return { ok: false, reason: `no box at index ${index}` };
    }
  }

  let records = state.records.map(cloneRec);
  let selection = state.selection;

  switch (action.kind) {
    case "relabel": {
      const rec = { ...records[action.index]!, glyph: action.glyph };
      const bad = validateRec(rec, state.imageWidth, state.imageHeight);
      if (bad) return { ok: false, reason: bad };
      records[action.index] = rec;
      break;
    }
    case "move": {
      const r = records[action.index]!;
      const rec = {
        ...r,
        left: r.left + action.dx,
        right: r.right + action.dx,
        bottom: r.bottom + action.dy,
        top: r.top + action.dy,
      };
      const bad = validateRec(rec, state.imageWidth, state.imageHeight);
      if (bad) return { ok: false, reason: bad };
      records[action.index] = rec;
      break;
    }
    case "resize": {
      const rec = { ...records[action.index]! };
      rec[action.edge] += action.delta;
      const bad = validateRec(rec, state.imageWidth, state.imageHeight);
      if (bad) return { ok: false, reason: bad };
      records[action.index] = rec;
      break;
    }
    case "delete": {
      records = records.filter((_, i) => i !== action.index);
      if (selection !== null) {
        selection = records.length === 0 ? null : Math.min(selection, records.length - 1);
      }
      break;
    }
    case "add": {
      const bad = validateRec(action.rec, state.imageWidth, state.imageHeight);
      if (bad) return { ok: false, reason: bad };
      records = [...records, cloneRec(action.rec)];
      selection = records.length - 1;
      break;
    }
  }

  return {
    ok: true,
    state: { ...state, records, selection, undoStack: pushUndo(state) },
  };
}

export function undo(state: EditorState): EditorState {
  const stack = [...state.undoStack];
  const previous = stack.pop();
  if (!previous) return state;
  const selection =
    state.selection !== null && state.selection < previous.length
      ? state.selection
      : previous.length
        ? previous.length - 1
        : null;
  return { ...state, records: previous, selection, undoStack: stack };
}

/** Server acknowledged this exact list. */
export function markSaved(state: EditorState): EditorState {
  return { ...state, savedRecords: state.records.map(cloneRec) };
}

export interface ScreenRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Bottom-left box coords -> top-left screen rect (exact for integers). */
export function boxToScreen(rec: BoxRec, imageHeight: number): ScreenRect {
  return {
    x: rec.left,
    y: imageHeight - rec.top,
    w: rec.right - rec.left,
    h: rec.top - rec.bottom,
  };
}

/** Inverse of boxToScreen. */
export function screenToBox(
  rect: ScreenRect,
  imageHeight: number,
  glyph: string,
  page = 0,
): BoxRec {
  return {
    glyph,
    left: rect.x,
    bottom: imageHeight - rect.y - rect.h,
    right: rect.x + rect.w,
    top: imageHeight - rect.y,
    page,
  };
}

/** Topmost (then leftmost) box whose screen rect contains the point. */
export function hitTest(
  records: BoxRec[],
  imageHeight: number,
  x: number,
  y: number,
): number | null {
  for (let i = 0; i < records.length; i++) {
    const r = boxToScreen(records[i]!, imageHeight);
    if (x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h) return i;
  }
  return null;
}
