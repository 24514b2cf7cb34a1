"""Local review service: JSON API over loopback plus static UI assets.

Endpoints:
  GET  /api/project                      project summary, labels, revisions
  GET  /api/bitext/{label}               sentences, links, revision, approved
  POST /api/bitext/{label}/edits         apply corrections (optimistic revision)
  POST /api/bitext/{label}/approve       confirm all links, mark approved
  GET  /api/pairs/{label}                name pairs with labels and evidence
  POST /api/pairs/{label}/overrides      operator label override

Every successful POST appends one event to the log and atomically rewrites
the working artifact; writers are serialized by a process-wide lock plus a
per-bitext revision check (stale revision -> 409).
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .align import Edit, apply_corrections, read_links, write_links
from .config import ProjectConfig
from .errors import EditConflict, InvalidEdit, NominaError
from .transfer import PROCEDURES, apply_override
from .workspace import Workspace, load_bitext, read_pairs, write_pairs

_FRONTEND_DIST = Path(__file__).resolve().parents[2] / "frontend" / "dist"

_FALLBACK_INDEX = b"""<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>nomina review</title></head>
<body><h1>nomina review service</h1>
<p>The API is up. Build the frontend (<code>frontend/</code>, <code>npm run build</code>)
to get the review screens, or drive the JSON endpoints directly.</p>
</body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


class ReviewState:
    """Workspace-backed state shared by request handlers."""

    def __init__(self, config: ProjectConfig, ws: Workspace, static_dir: Path | None = None):
        self.config = config
        self.ws = ws
        self.lock = threading.Lock()
        self.static_dir = static_dir if static_dir is not None else _FRONTEND_DIST

    # --- reads -----------------------------------------------------------

    def labels(self) -> list[str]:
        return [t.label for t in self.config.targets]

    def approved(self, label: str) -> bool:
        events = [e for e in self.ws.events() if e["bitext"] == label]
        return bool(events) and events[-1]["kind"] == "approve"

    def project_summary(self) -> dict:
        manifest = self.ws.manifest()
        return {
            "pivot": {"lang": self.config.pivot_lang, "path": str(self.config.pivot_path)},
            "targets": [
                {
                    "label": t.label,
                    "lang": t.lang,
                    "script": t.script,
                    "revision": self.ws.revision(t.label),
                    "approved": self.approved(t.label),
                }
                for t in self.config.targets
            ],
            "stages": sorted(manifest.keys()),
        }

    def bitext_payload(self, label: str) -> dict:
        bitext = load_bitext(self.ws, label)
        return {
            "label": label,
            "revision": self.ws.revision(label),
            "approved": self.approved(label),
            "pivot": [
                {"id": str(s.id), "text": s.text} for s in bitext.pivot.sentences
            ],
            "target": [
                {"id": str(s.id), "text": s.text} for s in bitext.target.sentences
            ],
            "links": [
                {
                    "pivot": [str(i) for i in l.pivot],
                    "target": [str(i) for i in l.target],
                    "kind": l.kind,
                    "status": l.status,
                    "score": l.score,
                }
                for l in bitext.links
            ],
        }

    def pairs_payload(self, label: str) -> dict:
        pairs = read_pairs(self.ws.path(f"pairs_{label}.tsv").read_bytes(), label)
        return {
            "label": label,
            "revision": self.ws.revision(label),
            "pairs": [
                {
                    "index": i,
                    "segment": str(p.entity.segment),
                    "surface": p.entity.surface,
                    "hypertype": p.entity.type.hypertype,
                    "lang": p.target_lang,
                    "row": p.row_index,
                    "span": list(p.target_span) if p.target_span else None,
                    "targetSurface": p.target_surface,
                    "label": p.label,
                    "evidence": p.evidence,
                    "score": p.score,
                    "note": p.note,
                    "override": p.override,
                }
                for i, p in enumerate(pairs)
            ],
        }

    # --- writes ----------------------------------------------------------

    def _check_revision(self, label: str, revision) -> None:
        current = self.ws.revision(label)
        if revision != current:
            raise EditConflict(
                f"revision {revision} is stale; current revision is {current}"
            )

    def post_edits(self, label: str, payload: dict, actor: str) -> dict:
        with self.lock:
            self._check_revision(label, payload.get("revision"))
            edits = [Edit.from_dict(e) for e in payload.get("edits", [])]
            bitext = load_bitext(self.ws, label)
            edited = apply_corrections(bitext, edits)
            self.ws.atomic_write(f"links_{label}.tsv", write_links(edited.links))
            self.ws.append_event(
                label, "links_edit", {"edits": [e.to_dict() for e in edits]}, actor
            )
        return self.bitext_payload(label)

    def post_approve(self, label: str, payload: dict, actor: str) -> dict:
        with self.lock:
            self._check_revision(label, payload.get("revision"))
            links = read_links(self.ws.path(f"links_{label}.tsv").read_bytes())
            from dataclasses import replace

            confirmed = tuple(replace(l, status="confirmed") for l in links)
            self.ws.atomic_write(f"links_{label}.tsv", write_links(confirmed))
            self.ws.append_event(label, "approve", {}, actor)
        return self.bitext_payload(label)

    def post_override(self, label: str, payload: dict, actor: str) -> dict:
        with self.lock:
            self._check_revision(label, payload.get("revision"))
            index = payload.get("index")
            new_label = payload.get("label")
            note = payload.get("note", "")
            if new_label not in PROCEDURES:
                raise InvalidEdit(f"unknown procedure label {new_label!r}")
            if new_label == "Other" and not note.strip():
                raise InvalidEdit("an override to Other requires a note")
            pairs = read_pairs(self.ws.path(f"pairs_{label}.tsv").read_bytes(), label)
            if not isinstance(index, int) or not (0 <= index < len(pairs)):
                raise EditConflict(f"pair index {index!r} does not exist")
            pairs[index] = apply_override(pairs[index], new_label, note)
            self.ws.atomic_write(f"pairs_{label}.tsv", write_pairs(pairs))
            self.ws.append_event(
                label,
                "pairs_override",
                {"index": index, "label": new_label, "note": note},
                actor,
            )
        return self.pairs_payload(label)


def make_handler(state: ReviewState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict | bytes,
                  content_type: str = "application/json; charset=utf-8") -> None:
            body = (
                payload
                if isinstance(payload, bytes)
                else (json.dumps(payload, ensure_ascii=False) + "\n").encode("utf-8")
            )
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _error(self, status: int, exc: Exception) -> None:
            payload = {"error": exc.__class__.__name__, "message": str(exc)}
            violations = getattr(exc, "violations", None)
            if violations:
                payload["violations"] = [
                    {"kind": v.kind, "side": v.side, "segment": v.segment, "detail": v.detail}
                    for v in violations
                ]
            self._send(status, payload)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length", 0))
            if not length:
                return {}
            return json.loads(self.rfile.read(length).decode("utf-8"))

        def _label_or_404(self, label: str) -> bool:
            if label not in state.labels():
                self._send(404, {"error": "NotFound", "message": f"no bitext {label!r}"})
                return False
            return True

        def do_GET(self):  # noqa: N802
            try:
                if self.path == "/api/project":
                    self._send(200, state.project_summary())
                elif self.path.startswith("/api/bitext/"):
                    label = self.path.split("/")[3]
                    if self._label_or_404(label):
                        self._send(200, state.bitext_payload(label))
                elif self.path.startswith("/api/pairs/"):
                    label = self.path.split("/")[3]
                    if self._label_or_404(label):
                        self._send(200, state.pairs_payload(label))
                else:
                    self._serve_static()
            except FileNotFoundError as exc:
                self._send(404, {"error": "NotFound",
                                 "message": f"stage artifact missing: {exc}"})
            except NominaError as exc:
                self._error(422, exc)
            except Exception as exc:  # pragma: no cover - defensive
                self._error(500, exc)

        def _serve_static(self):
            rel = self.path.lstrip("/") or "index.html"
            rel = rel.split("?")[0]
            candidate = (state.static_dir / rel).resolve() if state.static_dir else None
            if (
                candidate is not None
                and state.static_dir.exists()
                and str(candidate).startswith(str(state.static_dir.resolve()))
                and candidate.is_file()
            ):
                ctype = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
                self._send(200, candidate.read_bytes(), ctype)
            elif rel == "index.html":
                self._send(200, _FALLBACK_INDEX, "text/html; charset=utf-8")
            else:
                self._send(404, {"error": "NotFound", "message": self.path})

        def do_POST(self):  # noqa: N802
            try:
                parts = self.path.rstrip("/").split("/")
                payload = self._read_json()
                actor = self.headers.get("X-Actor", "reviewer")
                if len(parts) == 5 and parts[1] == "api" and parts[2] == "bitext":
                    label, action = parts[3], parts[4]
                    if not self._label_or_404(label):
                        return
                    if action == "edits":
                        self._send(200, state.post_edits(label, payload, actor))
                        return
                    if action == "approve":
                        self._send(200, state.post_approve(label, payload, actor))
                        return
                if len(parts) == 5 and parts[1] == "api" and parts[2] == "pairs":
                    label, action = parts[3], parts[4]
                    if not self._label_or_404(label):
                        return
                    if action == "overrides":
                        self._send(200, state.post_override(label, payload, actor))
                        return
                self._send(404, {"error": "NotFound", "message": self.path})
            except EditConflict as exc:
                self._error(409, exc)
            except (InvalidEdit, NominaError) as exc:
                self._error(422, exc)
            except json.JSONDecodeError as exc:
                self._error(400, exc)
            except Exception as exc:  # pragma: no cover - defensive
                self._error(500, exc)

    return Handler


def make_server(config: ProjectConfig, ws: Workspace, port: int = 7878,
                static_dir: Path | None = None) -> ThreadingHTTPServer:
    state = ReviewState(config, ws, static_dir=static_dir)
    server = ThreadingHTTPServer(("127.0.0.1", port), make_handler(state))
    return server


def serve_review(config: ProjectConfig, ws: Workspace, port: int = 7878) -> None:
    server = make_server(config, ws, port)
    host, actual_port = server.server_address[:2]
    print(f"review service on http://{host}:{actual_port}/ (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
