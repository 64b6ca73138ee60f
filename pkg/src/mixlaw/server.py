"""Read-only HTTP service over a frozen law bundle.

Endpoints:

* ``GET /api/bundle`` -- the bundle document, exactly as persisted.
* ``POST /api/predict`` with body ``{"task": str, "p": number, "n": number}``
  -- returns ``{"value": number, "n_eff": number, "f": number}``.  Also
  accepts GET with query parameters.  Errors come back as a JSON body
  ``{"code": str, "message": str}`` with a 4xx status.
* Optional static assets under a configured directory (the browser UI).

Handlers are pure reads over the loaded bundle; every response is
deterministic, so concurrent identical requests return identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .dataio import LawBundle, bundle_to_dict, canonical_bytes
from .errors import (
    DomainError,
    MissingTaskError,
    MixlawError,
    ZeroShotError,
)
from .lawcore import eval_fraction_curve, predict_loss_any_weighting


def predict_payload(bundle: LawBundle, task: str, p: float, n: float) -> dict:
    """The /api/predict computation: value, effective size, and fraction.

    Uses the flexible fraction curve when fitted, the linear one otherwise.
    """
    laws = bundle.task_laws(task)
    fit = laws.fraction_fits.get("flexible") or laws.fraction_fits.get("linear")
    if fit is None:
        raise MissingTaskError(f"task {task!r} has no fraction fit")
    value = predict_loss_any_weighting(laws.single_task, fit, p, n, bundle.direction)
    f = eval_fraction_curve(fit, p)
    return {"value": value, "n_eff": f * float(n), "f": f}


def _error_code(exc: MixlawError) -> str:
    if isinstance(exc, ZeroShotError):
        return "zero_shot"
    if isinstance(exc, MissingTaskError):
        return "missing_task"
    if isinstance(exc, DomainError):
        return "domain"
    return "invalid_request"


class BundleRequestHandler(BaseHTTPRequestHandler):
    server_version = "mixlaw"
    protocol_version = "HTTP/1.1"

    # Set by make_server:
    bundle: LawBundle
    bundle_payload: bytes
    static_dir: Path | None

    def log_message(self, fmt, *args):
        pass

    def _send(self, status: int, payload: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, canonical_bytes(obj))

    def _send_error_body(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"code": code, "message": message})

    def _predict(self, params: dict) -> None:
        try:
            task = params["task"]
            p = float(params["p"])
            n = float(params["n"])
        except (KeyError, TypeError, ValueError):
            self._send_error_body(
                400, "bad_request", "predict needs fields task (string), p (number), n (number)"
            )
            return
        try:
            if p == 0.0:
                raise ZeroShotError("zero-shot unsupported: p = 0 is not modeled")
            if not n > 0:
                raise DomainError(f"model size must be positive, got {n}")
            payload = predict_payload(self.bundle, task, p, n)
        except MissingTaskError as exc:
            self._send_error_body(404, "missing_task", str(exc))
            return
        except MixlawError as exc:
            self._send_error_body(400, _error_code(exc), str(exc))
            return
        self._send_json(200, payload)

    def do_POST(self):
        path = urlparse(self.path).path
        if path != "/api/predict":
            self._send_error_body(404, "not_found", f"unknown endpoint {path!r}")
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            params = json.loads(raw.decode("utf-8")) if raw else {}
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send_error_body(400, "bad_request", "request body is not valid JSON")
            return
        if not isinstance(params, dict):
            self._send_error_body(400, "bad_request", "request body must be a JSON object")
            return
        self._predict(params)

    def do_GET(self):
        parsed = urlparse(self.path)
        if parsed.path == "/api/bundle":
            self._send(200, self.bundle_payload)
            return
        if parsed.path == "/api/predict":
            query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
            self._predict(query)
            return
        if self.static_dir is not None:
            self._serve_static(parsed.path)
            return
        self._send_error_body(404, "not_found", f"unknown endpoint {parsed.path!r}")

    def _serve_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        root = self.static_dir.resolve()
        if root not in target.parents and target != root:
            self._send_error_body(404, "not_found", "no such asset")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_error_body(404, "not_found", f"no such asset {rel!r}")
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), content_type)


def make_server(
    bundle: LawBundle,
    port: int = 8351,
    host: str = "127.0.0.1",
    static_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (and bind) the service; raises OSError when the port is taken."""
    body = bundle_to_dict(bundle)
    body_bytes = canonical_bytes(body)
    document = {
        "schema_version": bundle.schema_version,
        "sha256": hashlib.sha256(body_bytes).hexdigest(),
        "body": body,
    }

    class Handler(BundleRequestHandler):
        pass

    Handler.bundle = bundle
    Handler.bundle_payload = canonical_bytes(document)
    Handler.static_dir = Path(static_dir) if static_dir is not None else None
    return ThreadingHTTPServer((host, port), Handler)
