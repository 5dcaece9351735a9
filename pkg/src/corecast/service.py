"""Prediction service: one code path behind both the CLI and the HTTP API.

The service owns an immutable checkpoint (network, scalers, reference
cycles) and, for the slow comparison path, an assembly library for oracle
runs. HTTP is JSON over stdlib http.server with permissive CORS so a
local UI can talk to it during development.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import geometry
from .cycle import STATEPOINT_TIMES, simulate_cycle
from .dataset import transform_features
from .errors import CorecastError, ValidationError
from .library import AssemblyLibrary, REFLECTOR_ID, default_library
from .neuralnet import Checkpoint


class PatternRangeError(ValidationError):
    """Pattern entry outside 1..9 (maps to HTTP 422)."""


def _validated_octant(pattern) -> tuple:
    if not isinstance(pattern, (list, tuple)) or len(pattern) != geometry.N_SLOTS:
        raise ValidationError(
            f"pattern: expected {geometry.N_SLOTS} integers, got "
            f"{len(pattern) if isinstance(pattern, (list, tuple)) else type(pattern).__name__}")
    octant = []
    for i, v in enumerate(pattern):
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"pattern[{i}]: expected an integer")
        if not 1 <= v <= geometry.N_TYPES:
            raise PatternRangeError(
                f"pattern[{i}]: type {v} outside 1..{geometry.N_TYPES}")
        octant.append(v)
    return tuple(octant)


class PredictionService:
    """Stateless request handling over a loaded checkpoint and library."""

    def __init__(self, checkpoint: Checkpoint,
                 library: AssemblyLibrary | None = None):
        self.checkpoint = checkpoint
        self.library = library if library is not None else default_library()

    def model_info(self) -> dict:
        m = self.checkpoint.model
        return {
            "v": 1,
            "layer_dims": list(m.layer_dims),
            "dropout": m.dropout,
            "output_activation": m.output_activation,
            "metadata": self.checkpoint.metadata,
        }

    def assemblies(self) -> dict:
        ref = self.checkpoint.ref_cycles
        rows = []
        for tid, name, enr, ba in self.library.assemblies:
            if tid == REFLECTOR_ID:
                continue
            rows.append({"id": tid, "name": name, "enrichment_wt_pct": enr,
                         "ba_rods": ba,
                         "reference_cycle_efpd": float(ref[tid - 1])})
        return {"v": 1, "assemblies": rows}

    def predict(self, pattern) -> dict:
        """Surrogate prediction for one octant pattern (the fast path)."""
        octant = _validated_octant(list(pattern))
        ckpt = self.checkpoint
        features = transform_features(octant, ckpt.ref_cycles)
        x = ckpt.feature_scaler.apply(features[None, :])
        y = ckpt.label_scaler.invert(ckpt.model.predict(x))[0]
        trajectory = [
            {"index": int(idx), "time_efpd": float(t), "rho": float(y[1 + j])}
            for j, (idx, t) in enumerate(zip(ckpt.label_indices, ckpt.label_times))
        ]
        return {
            "v": 1,
            "pattern": list(octant),
            "features": [float(f) for f in features],
            "rho_max": float(y[0]),
            "trajectory": trajectory,
            "cycle_length_efpd": float(y[-1]),
            "model": self.model_info(),
        }

    def simulate(self, pattern) -> dict:
        """Full oracle run for side-by-side comparison (the slow path)."""
        octant = _validated_octant(list(pattern))
        trace = simulate_cycle(geometry.make_pattern(octant), self.library)
        return {
            "v": 1,
            "pattern": list(octant),
            "times": [float(t) for t in trace.times],
            "k_eff": [float(k) for k in trace.k_eff],
            "rho": [float(r) for r in trace.rho],
            "rho_max": float(trace.rho_max),
            "cycle_length_efpd":
                None if trace.censored else float(trace.cycle_length),
            "censored": bool(trace.censored),
        }


def statepoint_times() -> np.ndarray:
    return STATEPOINT_TIMES.copy()


# -- HTTP layer ---------------------------------------------------------------

class _Handler(BaseHTTPRequestHandler):
    service: PredictionService = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):          # quiet by default
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/api/assemblies":
            self._send(200, self.service.assemblies())
        elif self.path == "/api/model":
            self._send(200, self.service.model_info())
        else:
            self._send(404, {"error": "not_found", "message": self.path})

    def do_POST(self):
        if self.path not in ("/api/predict", "/api/simulate"):
            self._send(404, {"error": "not_found", "message": self.path})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            doc = json.loads(raw.decode("utf-8"))
            if not isinstance(doc, dict) or "pattern" not in doc:
                raise ValidationError("pattern: field is required")
            pattern = doc["pattern"]
        except (ValueError, UnicodeDecodeError) as exc:
            self._send(400, {"error": "bad_request", "message": f"body: {exc}"})
            return
        except ValidationError as exc:
            self._send(400, {"error": "bad_request", "message": str(exc)})
            return

        try:
            if self.path == "/api/predict":
                self._send(200, self.service.predict(pattern))
            else:
                self._send(200, self.service.simulate(pattern))
        except PatternRangeError as exc:
            self._send(422, {"error": "pattern_out_of_range", "message": str(exc)})
        except ValidationError as exc:
            self._send(400, {"error": "bad_request", "message": str(exc)})
        except CorecastError as exc:
            self._send(500, {"error": "oracle_failure",
                             "kind": type(exc).__name__, "message": str(exc)})


def make_server(service: PredictionService, host: str = "127.0.0.1",
                port: int = 8421) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(service: PredictionService, host: str = "127.0.0.1",
                  port: int = 8421) -> None:
    server = make_server(service, host, port)
    print(f"serving on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def start_background(service: PredictionService, host: str = "127.0.0.1",
                     port: int = 0):
    """Start a server thread (tests, UI development); returns (server, thread)."""
    server = make_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
