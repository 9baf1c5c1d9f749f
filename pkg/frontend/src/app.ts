/**
 * Canvas + panel wiring for the box editor.
 *
 * Keyboard-first workflow: click (or Tab through the panel) to select a
 * box, type a digit to relabel it, arrows to move, shift+arrows to resize,
 * Delete to remove, "u" to undo, "s" (or the button) to save.
 */

import { HttpTransport, PageInfo } from "./api.js";
import { Editor } from "./editor.js";
import { boxToScreen, hitTest, screenToBox } from "./model.js";

const transport = new HttpTransport();
const editor = new Editor(transport, render);

const pageList = document.getElementById("page-list") as HTMLUListElement;
const boxPanel = document.getElementById("box-panel") as HTMLUListElement;
const canvas = document.getElementById("page-canvas") as HTMLCanvasElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const saveButton = document.getElementById("save") as HTMLButtonElement;
const autoboxButton = document.getElementById("autobox") as HTMLButtonElement;
const addButton = document.getElementById("add-box") as HTMLButtonElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const dirtyBadge = document.getElementById("dirty") as HTMLSpanElement;

let pages: PageInfo[] = [];
let image: HTMLImageElement | null = null;

function showBanner(text: string, isError = true): void {
  banner.textContent = text;
  banner.className = text ? (isError ? "banner error" : "banner info") : "banner hidden";
}

async function boot(): Promise<void> {
  try {
    pages = await transport.listPages();
  } catch (err) {
    showBanner(`cannot reach the label service: ${err}`);
    return;
  }
  pageList.replaceChildren(
    ...pages.map((page) => {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${page.id}${page.has_boxes ? "" : " (no boxes)"}`;
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        void openPage(page.id);
      });
      item.appendChild(link);
      return item;
    }),
  );
  if (pages.length) void openPage(pages[0]!.id);
}

async function openPage(pageId: string): Promise<void> {
  if (editor.dirty && !window.confirm("Discard unsaved changes?")) return;
  showBanner("");
  image = new Image();
  image.src = transport.imageUrl(pageId);
  try {
    await image.decode();
  } catch {
    image = null;
    showBanner(`cannot load the image for page ${pageId}`);
    return;
  }
  try {
    await editor.load(pageId, image.naturalWidth, image.naturalHeight);
  } catch (err) {
    image = null;
    showBanner(`cannot load boxes: ${err}`);
    return;
  }
  if (editor.state && editor.state.records.length === 0) {
    showBanner("no boxes yet: press Autobox to seed proposals", false);
  }
}

function render(): void {
  const state = editor.state;
  dirtyBadge.classList.toggle("hidden", !editor.dirty);
  saveButton.disabled = !editor.dirty;
  if (editor.lastError) showBanner(editor.lastError);
  if (!state || !image) return;

  canvas.width = image.naturalWidth;
  canvas.height = image.naturalHeight;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(image, 0, 0);
  state.records.forEach((rec, i) => {
    const r = boxToScreen(rec, state.imageHeight);
    ctx.lineWidth = i === state.selection ? 3 : 1.5;
    ctx.strokeStyle = i === state.selection ? "#d03020" : "#2060d0";
    ctx.strokeRect(r.x + 0.5, r.y + 0.5, r.w, r.h);
    ctx.font = "14px monospace";
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(rec.glyph, r.x, Math.max(12, r.y - 3));
  });

  boxPanel.replaceChildren(
    ...state.records.map((rec, i) => {
      const item = document.createElement("li");
      item.textContent = `${rec.glyph}  [${rec.left},${rec.bottom},${rec.right},${rec.top}]`;
      item.className = i === state.selection ? "selected" : "";
      item.tabIndex = 0;
      item.addEventListener("click", () => editor.select(i));
      item.addEventListener("focus", () => editor.select(i));
      return item;
    }),
  );
}

canvas.addEventListener("mousedown", (ev) => {
  const state = editor.state;
  if (!state) return;
  const bounds = canvas.getBoundingClientRect();
  const x = Math.floor(((ev.clientX - bounds.left) / bounds.width) * canvas.width);
  const y = Math.floor(((ev.clientY - bounds.top) / bounds.height) * canvas.height);
  editor.select(hitTest(state.records, state.imageHeight, x, y));
});

document.addEventListener("keydown", (ev) => {
  const state = editor.state;
  if (!state) return;
  if (ev.target instanceof HTMLInputElement) return;
  const selected = state.selection;

  if (/^[0-9]$/.test(ev.key) && selected !== null) {
    editor.edit({ kind: "relabel", index: selected, glyph: ev.key });
    ev.preventDefault();
    return;
  }
  const arrows: Record<string, [number, number]> = {
    ArrowLeft: [-1, 0],
    ArrowRight: [1, 0],
    ArrowUp: [0, 1], // up on screen = +y in box coords
    ArrowDown: [0, -1],
  };
  const step = arrows[ev.key];
  if (step && selected !== null) {
    ev.preventDefault();
    if (ev.shiftKey) {
      const edge = step[0] !== 0 ? "right" : "top";
      const delta = step[0] !== 0 ? step[0] : step[1];
      editor.edit({ kind: "resize", index: selected, edge, delta });
    } else {
      editor.edit({ kind: "move", index: selected, dx: step[0], dy: step[1] });
    }
    return;
  }
  if ((ev.key === "Delete" || ev.key === "Backspace") && selected !== null) {
    ev.preventDefault();
    editor.edit({ kind: "delete", index: selected });
  } else if (ev.key === "u") {
    editor.undo();
  } else if (ev.key === "s") {
    ev.preventDefault();
    void doSave();
  }
});

async function doSave(): Promise<void> {
  const result = await editor.save();
  if (result.status === "saved") showBanner("saved", false);
  else if (result.status === "rejected") showBanner(`save refused: ${result.reason}`);
}

saveButton.addEventListener("click", () => void doSave());
undoButton.addEventListener("click", () => editor.undo());
autoboxButton.addEventListener("click", () => void editor.acceptAutobox());
addButton.addEventListener("click", () => {
  const state = editor.state;
  if (!state) return;
  const size = 24;
  const rec = screenToBox(
    {
      x: Math.floor(state.imageWidth / 2 - size / 2),
      y: Math.floor(state.imageHeight / 2 - size / 2),
      w: size,
      h: size,
    },
    state.imageHeight,
    "?",
  );
  editor.edit({ kind: "add", rec });
});

void boot();
