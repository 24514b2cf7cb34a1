"""Workspace: deterministic stage artifacts, hash manifest, event log.

Every stage writes its artifact atomically (temp file + rename) and records
the sha256 of its inputs and outputs in ``manifest.json``. A later stage
refuses to run when its predecessor is missing (StageOrderError) or when
the recorded hashes no longer match the files on disk (StaleArtifact).
Manual corrections append to ``events.ndjson``; replaying that log over the
pristine ``*.auto.tsv`` artifacts reproduces the working state exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass
from hashlib import sha256
from importlib import resources as importlib_resources
from pathlib import Path

from .align import (
    AlignmentLink,
    Bitext,
    Edit,
    align_bitext,
    apply_corrections,
    read_links,
    write_links,
)
from .cascade import (
    AnnotatedDocument,
    Cascade,
    EntityAnnotation,
    EntityTypeTag,
    DEFAULT_HYPERTYPE_MAP,
    compile_cascade,
    load_lexicon,
    render_tagged,
    run_cascade,
)
from .config import ProjectConfig
from .corpus import Document, SegmentId, SegmentationRules, parse_tei, segment_text, serialize_tei
from .errors import StageOrderError, StaleArtifact
from .figures import render_inventory_figure, render_procedure_figure
from .multitext import Multitext, escape_cell, export_table, merge, unescape_cell
from .report import ReportBundle, emit_report, np_inventory, procedure_matrix, top_frequency_sample
from .transfer import (
    InflectionRules,
    LangResources,
    NamePair,
    TransliterationTable,
    classify_multitext,
    load_np_lexicon,
    write_pairs,
)

STAGES = ("segment", "tag", "align", "merge", "classify", "report")

_PACKAGED = importlib_resources.files("nomina") / "resources"

_CYRILLIC_LANGS = {"bg", "sr", "ru", "mk", "uk"}
_GREEK_LANGS = {"el"}


def file_sha256(path: Path) -> str:
    h = sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def bytes_sha256(data: bytes) -> str:
    return sha256(data).hexdigest()


class Workspace:
    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.dir / name

    def atomic_write(self, name: str, data: bytes) -> str:
        """Write via temp file + rename; returns the content hash."""
        target = self.path(name)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return bytes_sha256(data)

    # --- manifest ---------------------------------------------------------

    def manifest(self) -> dict:
        p = self.path("manifest.json")
        if not p.exists():
            return {}
        return json.loads(p.read_text(encoding="utf-8"))

    def record_stage(
        self,
        stage: str,
        inputs: dict[str, str],
        outputs: dict[str, str],
        working: list[str] | None = None,
    ) -> None:
        """Record a stage run. ``outputs`` are hash-frozen; ``working`` names
        review-mutable copies whose integrity flows through the event log."""
        manifest = self.manifest()
        manifest[stage] = {"inputs": inputs, "outputs": outputs, "working": working or []}
        # artifacts of later stages are now stale; drop their entries
        idx = STAGES.index(stage)
        for later in STAGES[idx + 1 :]:
            manifest.pop(later, None)
        self.atomic_write(
            "manifest.json",
            (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )

    def require_stage(self, stage: str) -> dict:
        manifest = self.manifest()
        if stage not in manifest:
            raise StageOrderError(f"stage {stage!r} has not run yet")
        entry = manifest[stage]
        for name, digest in entry["outputs"].items():
            p = self.path(name)
            if not p.exists():
                raise StaleArtifact(f"artifact {name} of stage {stage!r} is missing")
            if file_sha256(p) != digest:
                raise StaleArtifact(
                    f"artifact {name} no longer matches the manifest; rerun {stage!r}"
                )
        for name in entry.get("working", []):
            if not self.path(name).exists():
                raise StaleArtifact(f"artifact {name} of stage {stage!r} is missing")
        for key, digest in entry["inputs"].items():
            if key.startswith("param:"):
                continue
            p = Path(key)
            if not p.exists() or file_sha256(p) != digest:
                raise StaleArtifact(
                    f"input {key} changed since stage {stage!r} ran; rerun it"
                )
        return entry

    # --- event log ---------------------------------------------------------

    def events(self) -> list[dict]:
        p = self.path("events.ndjson")
        if not p.exists():
            return []
        out = []
        for line in p.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def revision(self, label: str) -> int:
        return sum(1 for e in self.events() if e["bitext"] == label)

    def append_event(self, label: str, kind: str, payload: dict, actor: str) -> dict:
        events = self.events()
        event = {
            "seq": len(events) + 1,
            "bitext": label,
            "kind": kind,
            "payload": payload,
            "actor": actor,
            "ts": time.time(),
            "revision": self.revision(label) + 1,
        }
        with open(self.path("events.ndjson"), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        return event


# --- annotation artifact -----------------------------------------------------


def write_annotations(annotations: tuple[EntityAnnotation, ...]) -> bytes:
    lines = ["segment\tstart\tstop\ttype\tsurface"]
    for a in annotations:
        lines.append(
            f"{a.segment}\t{a.span[0]}\t{a.span[1]}\t{a.type.raw}\t{escape_cell(a.surface)}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_annotations(data: bytes, hypertype_map: dict[str, str]) -> tuple[EntityAnnotation, ...]:
    lines = data.decode("utf-8").splitlines()
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        seg, start, stop, raw, surface = line.split("\t", 4)
        out.append(
            EntityAnnotation(
                segment=SegmentId.parse(seg),
                span=(int(start), int(stop)),
                type=EntityTypeTag.of(raw, hypertype_map),
                surface=unescape_cell(surface),
            )
        )
    return tuple(out)


# --- pair artifact -------------------------------------------------------------


def read_pairs(data: bytes, column_label: str) -> list[NamePair]:
    """Reload a name-pair dump; entities carry presentation-level spans."""
    lines = data.decode("utf-8").splitlines()
    out: list[NamePair] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        seg, surface, hypertype, lang, span_field, label, evidence, score, note = (
            line.split("\t")
        )
        surface = unescape_cell(surface)
        note = unescape_cell(note)
        override = note.startswith("*")
        if override:
            note = note[1:]
        row_index = -1
        target_span = None
        target_surface = None
        if span_field != "-":
            head, _, rest = span_field.partition("[")
            row_index = int(head[1:])
            if rest:
                span_txt, _, target_surface = rest.partition("]=")
                a, b = span_txt.split(":")
                target_span = (int(a), int(b))
                target_surface = unescape_cell(target_surface)
        out.append(
            NamePair(
                entity=EntityAnnotation(
                    segment=SegmentId.parse(seg),
                    span=(0, 1),
                    type=EntityTypeTag(raw=hypertype, hypertype=hypertype),
                    surface=surface,
                ),
                target_lang=lang,
                column_label=column_label,
                row_index=row_index,
                target_span=target_span,
                target_surface=target_surface,
                label=label,
                evidence=evidence,
                score=float(score),
                note=note,
                override=override,
            )
        )
    return out


# --- resource assembly ---------------------------------------------------------


def segmentation_rules_for(config: ProjectConfig, lang: str) -> SegmentationRules:
    if lang in config.rules_paths:
        return SegmentationRules.load(config.rules_paths[lang])
    packaged = _PACKAGED / "segmentation" / f"{lang}.rules"
    if packaged.is_file():
        with importlib_resources.as_file(packaged) as p:
            return SegmentationRules.load(p)
    return SegmentationRules()


def hypertype_map_for(config: ProjectConfig) -> dict[str, str]:
    mapping = dict(DEFAULT_HYPERTYPE_MAP)
    mapping.update(config.hypertype_overrides)
    return mapping


def load_cascade_for(config: ProjectConfig) -> Cascade:
    lexicons = {
        p.stem: load_lexicon(p) for p in sorted(Path(config.lexicon_dir).glob("*.txt"))
    }
    source = Path(config.grammar_path).read_text(encoding="utf-8")
    return compile_cascade(source, lexicons, hypertype_map=hypertype_map_for(config))


def _packaged_file(kind: str, lang: str) -> Path | None:
    candidate = _PACKAGED / kind / f"{lang}.tsv"
    if candidate.is_file():
        with importlib_resources.as_file(candidate) as p:
            return Path(p)
    return None


def resources_for(config: ProjectConfig, label: str) -> LangResources:
    spec = config.target(label)
    translit = None
    if spec.lang in config.translit_paths:
        script = "cyrillic" if spec.lang in _CYRILLIC_LANGS else "greek"
        translit = TransliterationTable.load(config.translit_paths[spec.lang], script)
    elif spec.script in ("cyrillic", "greek"):
        packaged = _packaged_file("translit", spec.lang)
        if packaged is not None:
            translit = TransliterationTable.load(packaged, spec.script)
    inflection = None
    if spec.lang in config.inflect_paths:
        inflection = InflectionRules.load(config.inflect_paths[spec.lang], spec.lang)
    else:
        packaged = _packaged_file("inflect", spec.lang)
        if packaged is not None:
            inflection = InflectionRules.load(packaged, spec.lang)
    np_lexicon: dict = {}
    if config.np_lexicon_path is not None:
        np_lexicon = load_np_lexicon(config.np_lexicon_path).get(spec.lang, {})
    return LangResources(
        lang=spec.lang,
        script=spec.script,
        translit=translit,
        inflection=inflection,
        np_lexicon=np_lexicon,
        theta=config.theta,
    )


# --- stages ---------------------------------------------------------------------


def _params_hash(config: ProjectConfig) -> str:
    payload = json.dumps(
        {
            "cost": vars(config.cost_params),
            "theta": config.theta,
            "hypertypes": config.hypertype_overrides,
            "pivot_lang": config.pivot_lang,
        },
        sort_keys=True,
    )
    return bytes_sha256(payload.encode("utf-8"))


def _read_document(path: Path, lang: str, script: str,
                   rules: SegmentationRules) -> Document:
    """Plain text is segmented; files that look like XML parse as TEI-lite."""
    data = path.read_bytes()
    head = data.lstrip()[:6]
    if head.startswith(b"<?xml") or head.startswith(b"<text"):
        return parse_tei(data)
    return segment_text(data.decode("utf-8"), lang, rules, script=script)


def run_segment(config: ProjectConfig, ws: Workspace) -> list[str]:
    inputs = {str(config.pivot_path): file_sha256(config.pivot_path)}
    for t in config.targets:
        inputs[str(t.path)] = file_sha256(t.path)
    for lang, p in config.rules_paths.items():
        inputs[str(p)] = file_sha256(p)
    inputs["param:project"] = _params_hash(config)
    outputs = {}
    pivot_doc = _read_document(
        config.pivot_path,
        config.pivot_lang,
        config.pivot_script,
        segmentation_rules_for(config, config.pivot_lang),
    )
    outputs["pivot.tei.xml"] = ws.atomic_write("pivot.tei.xml", serialize_tei(pivot_doc))
    for t in config.targets:
        doc = _read_document(
            t.path, t.lang, t.script, segmentation_rules_for(config, t.lang)
        )
        outputs[f"{t.label}.tei.xml"] = ws.atomic_write(
            f"{t.label}.tei.xml", serialize_tei(doc)
        )
    ws.record_stage("segment", inputs, outputs)
    return sorted(outputs)


def _stage_input_hashes(ws: Workspace, names: list[str]) -> dict[str, str]:
    return {str(ws.path(n)): file_sha256(ws.path(n)) for n in names}


def load_pivot(ws: Workspace) -> Document:
    return parse_tei(ws.path("pivot.tei.xml").read_bytes())


def load_target(ws: Workspace, label: str) -> Document:
    return parse_tei(ws.path(f"{label}.tei.xml").read_bytes())


def load_annotated_pivot(config: ProjectConfig, ws: Workspace) -> AnnotatedDocument:
    doc = load_pivot(ws)
    annotations = read_annotations(
        ws.path("pivot.ents.tsv").read_bytes(), hypertype_map_for(config)
    )
    return AnnotatedDocument(doc, annotations)


def load_bitext(ws: Workspace, label: str, working: bool = True) -> Bitext:
    pivot = load_pivot(ws)
    target = load_target(ws, label)
    name = f"links_{label}.tsv" if working else f"links_{label}.auto.tsv"
    links = read_links(ws.path(name).read_bytes())
    return Bitext(pivot, target, links)


def run_tag(config: ProjectConfig, ws: Workspace) -> list[str]:
    ws.require_stage("segment")
    cascade = load_cascade_for(config)
    doc = load_pivot(ws)
    annotated = run_cascade(doc, cascade)
    inputs = _stage_input_hashes(ws, ["pivot.tei.xml"])
    inputs[str(config.grammar_path)] = file_sha256(config.grammar_path)
    for p in sorted(Path(config.lexicon_dir).glob("*.txt")):
        inputs[str(p)] = file_sha256(p)
    inputs["param:project"] = _params_hash(config)
    outputs = {
        "pivot.ents.tsv": ws.atomic_write(
            "pivot.ents.tsv", write_annotations(annotated.annotations)
        ),
        "pivot.tagged.txt": ws.atomic_write(
            "pivot.tagged.txt", render_tagged(annotated).encode("utf-8")
        ),
    }
    ws.record_stage("tag", inputs, outputs)
    return sorted(outputs)


def run_align(config: ProjectConfig, ws: Workspace) -> list[str]:
    ws.require_stage("segment")
    pivot = load_pivot(ws)
    names = ["pivot.tei.xml"] + [f"{t.label}.tei.xml" for t in config.targets]
    inputs = _stage_input_hashes(ws, names)
    inputs["param:project"] = _params_hash(config)
    outputs = {}
    working = []
    for t in config.targets:
        target = load_target(ws, t.label)
        bitext = align_bitext(pivot, target, config.cost_params)
        data = write_links(bitext.links)
        outputs[f"links_{t.label}.auto.tsv"] = ws.atomic_write(
            f"links_{t.label}.auto.tsv", data
        )
        ws.atomic_write(f"links_{t.label}.tsv", data)
        working.append(f"links_{t.label}.tsv")
        if any(e["bitext"] == t.label for e in ws.events()):
            # a re-run resets the working copy; mark it in the log so that
            # replay starts from this baseline
            ws.append_event(t.label, "reset_links", {}, "pipeline")
    ws.record_stage("align", inputs, outputs, working)
    return sorted(outputs) + sorted(working)


def build_multitext(config: ProjectConfig, ws: Workspace) -> Multitext:
    annotated = load_annotated_pivot(config, ws)
    bitexts = [(t.label, load_bitext(ws, t.label)) for t in config.targets]
    return merge(annotated, bitexts)


def run_merge(config: ProjectConfig, ws: Workspace) -> list[str]:
    ws.require_stage("tag")
    ws.require_stage("align")
    mt = build_multitext(config, ws)
    names = ["pivot.tei.xml", "pivot.ents.tsv"]
    for t in config.targets:
        names += [f"{t.label}.tei.xml", f"links_{t.label}.tsv"]
    inputs = _stage_input_hashes(ws, names)
    outputs = {
        "multitext.tsv": ws.atomic_write("multitext.tsv", export_table(mt, "tsv")),
        "multitext.html": ws.atomic_write("multitext.html", export_table(mt, "html")),
    }
    ws.record_stage("merge", inputs, outputs)
    return sorted(outputs)


def run_classify(config: ProjectConfig, ws: Workspace) -> list[str]:
    ws.require_stage("merge")
    mt = build_multitext(config, ws)
    resources = {t.label: resources_for(config, t.label) for t in config.targets}
    pairs_by_label = classify_multitext(mt, resources)
    names = ["pivot.tei.xml", "pivot.ents.tsv", "multitext.tsv"]
    for t in config.targets:
        names += [f"{t.label}.tei.xml", f"links_{t.label}.tsv"]
    inputs = _stage_input_hashes(ws, names)
    inputs["param:project"] = _params_hash(config)
    outputs = {}
    working = []
    for label, pairs in pairs_by_label.items():
        data = write_pairs(pairs)
        outputs[f"pairs_{label}.auto.tsv"] = ws.atomic_write(
            f"pairs_{label}.auto.tsv", data
        )
        ws.atomic_write(f"pairs_{label}.tsv", data)
        working.append(f"pairs_{label}.tsv")
        if any(e["bitext"] == label for e in ws.events()):
            ws.append_event(label, "reset_pairs", {}, "pipeline")
    ws.record_stage("classify", inputs, outputs, working)
    return sorted(outputs) + sorted(working)


def run_report(config: ProjectConfig, ws: Workspace) -> list[str]:
    ws.require_stage("classify")
    annotated = load_annotated_pivot(config, ws)
    all_pairs: list[NamePair] = []
    names = ["pivot.tei.xml", "pivot.ents.tsv"]
    for t in config.targets:
        names.append(f"pairs_{t.label}.tsv")
        all_pairs.extend(
            read_pairs(ws.path(f"pairs_{t.label}.tsv").read_bytes(), t.label)
        )
    inputs = _stage_input_hashes(ws, names)
    matrix = procedure_matrix(all_pairs) if all_pairs else procedure_matrix([])
    basis = ", ".join(
        f"{label}: {matrix.basis[label]} pairs" for label in matrix.row_labels
    )
    bundle = ReportBundle(
        inventory=np_inventory(annotated),
        sample=top_frequency_sample(annotated),
        matrix=matrix,
        basis_note=f"procedure percentages over occurrence counts ({basis})",
    )
    outputs = {}
    for fmt, name in (("tsv", "report.tsv"), ("markdown", "report.md"), ("json", "report.json")):
        outputs[name] = ws.atomic_write(name, emit_report(bundle, fmt))
    inventory_png = ws.path("report_inventory.png")
    render_inventory_figure(bundle.inventory, inventory_png)
    outputs["report_inventory.png"] = file_sha256(inventory_png)
    procedures_png = ws.path("report_procedures.png")
    render_procedure_figure(bundle.matrix, procedures_png)
    outputs["report_procedures.png"] = file_sha256(procedures_png)
    ws.record_stage("report", inputs, outputs)
    return sorted(outputs)


# --- event replay ----------------------------------------------------------------


def apply_links_events(links: tuple[AlignmentLink, ...], events: list[dict]) -> tuple[AlignmentLink, ...]:
    from dataclasses import replace as dc_replace

    current = list(links)
    for event in events:
        if event["kind"] == "links_edit":
            edits = [Edit.from_dict(e) for e in event["payload"]["edits"]]
            current = list(_apply_edits_links_only(tuple(current), edits))
        elif event["kind"] == "approve":
            current = [dc_replace(l, status="confirmed") for l in current]
    return tuple(current)


def _apply_edits_links_only(links: tuple[AlignmentLink, ...], edits: list[Edit]):
    """apply_corrections without document-level validation (replay path)."""
    from .align import _reshaped  # internal reuse
    from dataclasses import replace as dc_replace

    out = list(links)
    for edit in edits:
        if edit.op == "confirm":
            out[edit.index] = dc_replace(out[edit.index], status="confirmed")
        elif edit.op == "merge":
            first, second = out[edit.index], out[edit.index + 1]
            pivot = first.pivot + second.pivot
            target = first.target + second.target
            kind = f"{len(pivot)}:{len(target)}"
            out[edit.index : edit.index + 2] = [
                AlignmentLink(pivot, target, kind, 0.0, "edited")
            ]
        elif edit.op == "split":
            link = out[edit.index]
            pieces = (
                (edit.pivot_first, edit.target_first),
                (len(link.pivot) - edit.pivot_first, len(link.target) - edit.target_first),
            )
            out[edit.index : edit.index + 1] = _reshaped(link.pivot, link.target, pieces)
        elif edit.op == "retype":
            link = out[edit.index]
            out[edit.index : edit.index + 1] = _reshaped(link.pivot, link.target, edit.pieces)
    return out


def apply_pairs_events(pairs: list[NamePair], events: list[dict]) -> list[NamePair]:
    from dataclasses import replace as dc_replace

    out = list(pairs)
    for event in events:
        if event["kind"] != "pairs_override":
            continue
        payload = event["payload"]
        idx = payload["index"]
        out[idx] = dc_replace(
            out[idx], label=payload["label"], note=payload.get("note", ""), override=True
        )
    return out


def _since_last(events: list[dict], reset_kind: str) -> list[dict]:
    cut = 0
    for i, e in enumerate(events):
        if e["kind"] == reset_kind:
            cut = i + 1
    return events[cut:]


def replay_state(config: ProjectConfig, ws: Workspace) -> dict[str, dict[str, bytes]]:
    """Recompute working artifacts from auto artifacts + event log.

    Stage re-runs reset the baseline (``reset_links`` / ``reset_pairs``
    events); replay applies everything after the last reset.
    """
    events = ws.events()
    out: dict[str, dict[str, bytes]] = {}
    for t in config.targets:
        label_events = [e for e in events if e["bitext"] == t.label]
        links_auto = read_links(ws.path(f"links_{t.label}.auto.tsv").read_bytes())
        links = apply_links_events(links_auto, _since_last(label_events, "reset_links"))
        result = {"links": write_links(links)}
        pairs_auto_path = ws.path(f"pairs_{t.label}.auto.tsv")
        if pairs_auto_path.exists():
            pairs_auto = read_pairs(pairs_auto_path.read_bytes(), t.label)
            pairs = apply_pairs_events(
                pairs_auto, _since_last(label_events, "reset_pairs")
            )
            result["pairs"] = write_pairs(pairs)
        out[t.label] = result
    return out
