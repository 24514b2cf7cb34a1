/** Alignment review screen: two sentence columns, ribbons, edit actions.
 * All state lives on the server; every payload rerenders from scratch. */

import { ApiError, ReviewApi } from "./api.js";
import {
  confirmEdit,
  mergeFromSelection,
  nextUnconfirmed,
  progress,
  splitChoices,
  splitToEdit,
} from "./alignlogic.js";
import { clear, el } from "./dom.js";
import { ribbonPath, ribbons, type Box } from "./geometry.js";
import type { BitextPayload, EditOp, Violation } from "./types.js";

const GUTTER = 80;

export class AlignView {
  private payload: BitextPayload | null = null;
  private selected = new Set<number>();
  private focusIndex = 0;
  private message = "";
  private violations: Violation[] = [];

  constructor(
    private root: HTMLElement,
    private api: ReviewApi,
    private label: string,
  ) {}

  async load(): Promise<void> {
    this.payload = await this.api.getBitext(this.label);
    this.selected.clear();
    this.render();
  }

  private async submit(edits: EditOp[]): Promise<void> {
    if (!this.payload) {
      return;
    }
    try {
      this.payload = await this.api.postEdits(this.label, this.payload.revision, edits);
      this.message = "";
      this.violations = [];
      this.selected.clear();
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.message = "Stale revision: the bitext changed elsewhere. Reload to continue.";
      } else if (err instanceof ApiError) {
        this.message = err.payload.message;
        this.violations = err.payload.violations ?? [];
      } else {
        this.message = String(err);
      }
    }
    this.render();
  }

  private async confirmAndAdvance(): Promise<void> {
    if (!this.payload) {
      return;
    }
    await this.submit([confirmEdit(this.focusIndex)]);
    if (this.payload) {
      const next = nextUnconfirmed(this.payload.links, this.focusIndex);
      if (next !== null) {
        this.focusIndex = next;
        this.render();
      }
    }
  }

  private toggleSelect(index: number): void {
    if (this.selected.has(index)) {
      this.selected.delete(index);
    } else {
      this.selected.add(index);
    }
    this.focusIndex = index;
    this.render();
  }

  render(): void {
    const payload = this.payload;
    clear(this.root);
    if (!payload) {
      this.root.append("loading…");
      return;
    }
    const { confirmed, total } = progress(payload.links);
    const readOnly = payload.approved;

    const header = el("div", { class: "toolbar" });
    header.append(
      el("strong", {}, [`${payload.label}`]),
      el("span", { class: "muted" }, [
        ` revision ${payload.revision} — ${confirmed}/${total} links confirmed`,
      ]),
    );
    if (readOnly) {
      header.append(el("span", { class: "badge approved" }, ["approved — read only"]));
    } else {
      const confirmBtn = el("button", {}, ["confirm link (c)"]);
      confirmBtn.onclick = () => void this.confirmAndAdvance();
      const approveBtn = el("button", {}, ["approve bitext"]);
      approveBtn.onclick = () => void this.approve();
      header.append(confirmBtn, approveBtn);
      const merge = mergeFromSelection(payload.links, [...this.selected]);
      if (merge) {
        const mergeBtn = el("button", {}, ["merge selected"]);
        mergeBtn.onclick = () => void this.submit([merge]);
        header.append(mergeBtn);
      }
      if (this.selected.size === 1) {
        const [only] = [...this.selected];
        for (const choice of splitChoices(payload.links[only])) {
          const btn = el("button", {}, [`split ${choice.label}`]);
          btn.onclick = () => void this.submit([splitToEdit(only, choice)]);
          header.append(btn);
        }
      }
    }
    this.root.append(header);

    if (this.message) {
      const box = el("div", { class: "error" }, [this.message]);
      for (const violation of this.violations) {
        box.append(
          el("div", { class: "violation" }, [
            `${violation.kind} on ${violation.side} ${violation.segment} ${violation.detail}`,
          ]),
        );
      }
      this.root.append(box);
    }

    const board = el("div", { class: "board" });
    const left = el("div", { class: "column" });
    const right = el("div", { class: "column" });
    const gutter = el("div", { class: "gutter" });
    board.append(left, gutter, right);
    this.root.append(board);

    const linkOfPivot = new Map<string, number>();
    const linkOfTarget = new Map<string, number>();
    payload.links.forEach((link, i) => {
      link.pivot.forEach((id) => linkOfPivot.set(id, i));
      link.target.forEach((id) => linkOfTarget.set(id, i));
    });

    const attach = (
      column: HTMLElement,
      sentences: { id: string; text: string }[],
      linkOf: Map<string, number>,
    ) => {
      for (const sentence of sentences) {
        const index = linkOf.get(sentence.id);
        const link = index !== undefined ? payload.links[index] : undefined;
        const cls = `sentence ${link ? "status-" + link.status : ""} ${
          index !== undefined && this.selected.has(index) ? "selected" : ""
        } ${index === this.focusIndex ? "focused" : ""}`;
        const node = el("div", { class: cls, "data-id": sentence.id }, [
          el("span", { class: "segid" }, [sentence.id]),
          " ",
          sentence.text,
        ]);
        if (index !== undefined && !readOnly) {
          node.onclick = () => this.toggleSelect(index);
        }
        column.append(node);
      }
    };
    attach(left, payload.pivot, linkOfPivot);
    attach(right, payload.target, linkOfTarget);

    // ribbons need rendered boxes; measure after insertion
    requestAnimationFrame(() => {
      const measure = (column: HTMLElement): Map<string, Box> => {
        const boxes = new Map<string, Box>();
        const base = column.getBoundingClientRect().top;
        column.querySelectorAll<HTMLElement>(".sentence").forEach((node) => {
          const rect = node.getBoundingClientRect();
          boxes.set(node.dataset.id ?? "", { top: rect.top - base, height: rect.height });
        });
        return boxes;
      };
      const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
      svg.setAttribute("width", String(GUTTER));
      svg.setAttribute("height", String(Math.max(left.scrollHeight, right.scrollHeight)));
      for (const ribbon of ribbons(payload.links, measure(left), measure(right))) {
        if (ribbon.y1 === null || ribbon.y2 === null) {
          continue; // omission links have no counterpart to connect
        }
        const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
        path.setAttribute("d", ribbonPath(ribbon.y1, ribbon.y2, GUTTER));
        path.setAttribute(
          "class",
          `ribbon status-${payload.links[ribbon.linkIndex].status} ${
            this.selected.has(ribbon.linkIndex) ? "selected" : ""
          }`,
        );
        path.onclick = () => this.toggleSelect(ribbon.linkIndex);
        svg.append(path);
      }
      clear(gutter);
      gutter.append(svg);
    });
  }

  private async approve(): Promise<void> {
    if (!this.payload) {
      return;
    }
    try {
      this.payload = await this.api.approve(this.label, this.payload.revision);
      this.message = "";
    } catch (err) {
      this.message = err instanceof ApiError ? err.payload.message : String(err);
    }
    this.render();
  }

  onKey(event: KeyboardEvent): void {
    if (event.key === "c" && this.payload && !this.payload.approved) {
      void this.confirmAndAdvance();
    }
  }
}
