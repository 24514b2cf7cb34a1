/** Pair review screen: filterable list of name pairs, immediate overrides. */

import { ApiError, ReviewApi } from "./api.js";
import { clear, el } from "./dom.js";
import {
  evidenceValues,
  filterPairs,
  hypertypeValues,
  overrideBlocked,
  type PairFilter,
} from "./pairlogic.js";
import { PROCEDURES, type PairsPayload, type ProcedureLabel } from "./types.js";

export class PairView {
  private payload: PairsPayload | null = null;
  private filter: PairFilter = {};
  private message = "";

  constructor(
    private root: HTMLElement,
    private api: ReviewApi,
    private label: string,
  ) {}

  async load(): Promise<void> {
    this.payload = await this.api.getPairs(this.label);
    this.render();
  }

  private async override(index: number, label: ProcedureLabel, note: string): Promise<void> {
    if (!this.payload) {
      return;
    }
    const blocked = overrideBlocked(label, note);
    if (blocked) {
      this.message = blocked;
      this.render();
      return;
    }
    try {
      this.payload = await this.api.postOverride(
        this.label,
        this.payload.revision,
        index,
        label,
        note,
      );
      this.message = "";
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.message = "Stale revision: reload to continue.";
      } else {
        this.message = err instanceof ApiError ? err.payload.message : String(err);
      }
    }
    this.render();
  }

  render(): void {
    const payload = this.payload;
    clear(this.root);
    if (!payload) {
      this.root.append("loading…");
      return;
    }
    const bar = el("div", { class: "toolbar" });
    bar.append(
      el("strong", {}, [payload.label]),
      el("span", { class: "muted" }, [
        ` revision ${payload.revision} — ${payload.pairs.length} name pairs`,
      ]),
    );
    const makeSelect = (
      key: keyof PairFilter,
      values: string[],
      all: string,
    ): HTMLSelectElement => {
      const select = el("select");
      select.append(el("option", { value: "" }, [all]));
      for (const value of values) {
        select.append(el("option", { value }, [value]));
      }
      select.value = (this.filter[key] as string | undefined) ?? "";
      select.onchange = () => {
        this.filter = { ...this.filter, [key]: select.value };
        this.render();
      };
      return select;
    };
    bar.append(
      makeSelect("label", PROCEDURES as unknown as string[], "all labels"),
      makeSelect("evidence", evidenceValues(payload.pairs), "all evidence"),
      makeSelect("hypertype", hypertypeValues(payload.pairs), "all hypertypes"),
    );
    this.root.append(bar);
    if (this.message) {
      this.root.append(el("div", { class: "error" }, [this.message]));
    }

    const list = el("div", { class: "pairs" });
    for (const pair of filterPairs(payload.pairs, this.filter)) {
      const item = el("div", { class: `pair ${pair.override ? "override" : ""}` });
      item.append(
        el("div", { class: "pair-head" }, [
          el("span", { class: "segid" }, [pair.segment]),
          " ",
          el("strong", {}, [pair.surface]),
          el("span", { class: "muted" }, [` (${pair.hypertype})`]),
          " → ",
          pair.targetSurface !== null
            ? el("em", {}, [pair.targetSurface])
            : el("span", { class: "muted" }, ["(no counterpart)"]),
        ]),
        el("div", { class: "pair-meta" }, [
          el("span", { class: `label label-${pair.label}` }, [pair.label]),
          el("span", { class: "muted" }, [
            ` evidence ${pair.evidence}, score ${pair.score.toFixed(2)}`,
          ]),
          pair.note ? el("span", { class: "note" }, [` — ${pair.note}`]) : "",
        ]),
      );
      const controls = el("div", { class: "pair-controls" });
      const select = el("select");
      for (const procedure of PROCEDURES) {
        select.append(el("option", { value: procedure }, [procedure]));
      }
      select.value = pair.label;
      const note = el("input", {
        type: "text",
        placeholder: "note (required for Other)",
        value: pair.note,
      });
      const apply = el("button", {}, ["override"]);
      const sync = () => {
        apply.disabled =
          overrideBlocked(select.value as ProcedureLabel, note.value) !== null;
      };
      select.onchange = sync;
      note.oninput = sync;
      sync();
      apply.onclick = () =>
        void this.override(pair.index, select.value as ProcedureLabel, note.value);
      controls.append(select, note, apply);
      item.append(controls);
      list.append(item);
    }
    this.root.append(list);
  }
}
