/** Payload shapes of the review API. */

export interface ProjectTarget {
  label: string;
  lang: string;
  script: string;
  revision: number;
  approved: boolean;
}

export interface ProjectSummary {
  pivot: { lang: string; path: string };
  targets: ProjectTarget[];
  stages: string[];
}

export interface SentenceRef {
  id: string;
  text: string;
}

export type LinkKind = "1:1" | "1:2" | "2:1" | "1:0" | "0:1";
export type LinkStatus = "auto" | "confirmed" | "edited";

export interface Link {
  pivot: string[];
  target: string[];
  kind: LinkKind;
  status: LinkStatus;
  score: number;
}

export interface BitextPayload {
  label: string;
  revision: number;
  approved: boolean;
  pivot: SentenceRef[];
  target: SentenceRef[];
  links: Link[];
}

export type ProcedureLabel =
  | "Borrowing"
  | "Assimilation"
  | "Calque"
  | "Absence"
  | "Other";

export const PROCEDURES: ProcedureLabel[] = [
  "Borrowing",
  "Assimilation",
  "Calque",
  "Absence",
  "Other",
];

export interface PairItem {
  index: number;
  segment: string;
  surface: string;
  hypertype: string;
  lang: string;
  row: number;
  span: [number, number] | null;
  targetSurface: string | null;
  label: ProcedureLabel;
  evidence: string;
  score: number;
  note: string;
  override: boolean;
}

export interface PairsPayload {
  label: string;
  revision: number;
  pairs: PairItem[];
}

export interface EditOp {
  op: "merge" | "split" | "retype" | "confirm";
  index: number;
  pivot_first?: number;
  target_first?: number;
  pieces?: [number, number][];
}

export interface Violation {
  kind: string;
  side: string;
  segment: string;
  detail: string;
}

export interface ApiErrorPayload {
  error: string;
  message: string;
  violations?: Violation[];
}
