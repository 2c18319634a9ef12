"""In-process stand-in for the external materials database.

Serves the same two endpoints the real client consumes, from a JSON
fixture file, as a plain WSGI app. Wired into an httpx WSGITransport it
gives the pipeline a fully hermetic database: no sockets, no network.

Fixture schema: {"materials": [{"id", "formula", "cif",
"elastic_tensor" (6x6 list or null)}]}.
"""

from __future__ import annotations

import json
from pathlib import Path
from urllib.parse import parse_qs

import httpx

from .cif import parse_cif

__all__ = ["StubDatabase", "stub_client_kwargs"]


class StubDatabase:
    def __init__(self, db_path: str | Path) -> None:
        payload = json.loads(Path(db_path).read_text())
        self.materials = payload["materials"]
        for entry in self.materials:
            parse_cif(entry["cif"])  # fail fast on a corrupt fixture

    def _select(self, params: dict[str, list[str]]) -> list[dict]:
        ids = set()
        for chunk in params.get("ids", []):
            ids.update(x for x in chunk.split(",") if x)
        elements = set()
        for chunk in params.get("elements", []):
            elements.update(x for x in chunk.split(",") if x)
        out = []
        for entry in self.materials:
            if ids and entry["id"] not in ids:
                continue
            if elements:
                present = {s.element for s in parse_cif(entry["cif"]).sites}
                if not present <= elements:
                    continue
            out.append(entry)
        return sorted(out, key=lambda e: e["id"])

    def wsgi(self, environ, start_response):
        path = environ.get("PATH_INFO", "")
        params = parse_qs(environ.get("QUERY_STRING", ""))
        if not environ.get("HTTP_X_API_KEY"):
            start_response("401 Unauthorized", [("Content-Type", "application/json")])
            return [b'{"error": "missing API key"}']
        if path == "/materials/structures":
            body = [
                {"id": e["id"], "formula": e.get("formula", ""), "cif": e["cif"]}
                for e in self._select(params)
            ]
        elif path == "/materials/elasticity":
            body = [
                {
                    "id": e["id"],
                    "formula": e.get("formula", ""),
                    "cif": e["cif"],
                    "elastic_tensor": e.get("elastic_tensor"),
                }
                for e in self._select(params)
            ]
        else:
            start_response("404 Not Found", [("Content-Type", "application/json")])
            return [b'{"error": "no such endpoint"}']
        data = json.dumps(body, sort_keys=True).encode()
        start_response("200 OK", [("Content-Type", "application/json")])
        return [data]


def stub_client_kwargs(db_path: str | Path) -> dict:
    """Keyword arguments wiring a DatabaseClient to an in-process stub."""
    app = StubDatabase(db_path).wsgi
    return {"transport": httpx.WSGITransport(app=app)}
