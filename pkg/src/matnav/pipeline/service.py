"""HTTP facade over the run directory layout.

Stage execution happens in a background thread per request; clients poll
GET /runs/{run_id} until the stage flips to done or failed. Artifacts are
served straight from disk, so anything the API returns is exactly what a
CLI run of the same config would have produced.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..errors import MatnavError, NotReady, StageBusy, StageOrderError
from .config import RUN_ROOT_ENV, RunConfig, load_config
from .stages import (
    RUNNING,
    _require_stage_done,
    load_state,
    run_stage1,
    run_stage2,
    run_stage3,
    save_state,
)

__all__ = ["create_app", "RunRegistry"]

log = logging.getLogger(__name__)

_STAGE_FN = {1: run_stage1, 2: run_stage2, 3: run_stage3}
_SAFE_ID = re.compile(r"^[A-Za-z0-9_.-]+$")


class RunRegistry:
    """Tracks run directories under one root plus per-run busy flags."""

    def __init__(self, run_root: Path, default_config: RunConfig, base: Path):
        self.run_root = Path(run_root)
        self.default_config = default_config
        self.base = Path(base)
        self._lock = threading.Lock()
        self._busy: dict[str, int] = {}

    def run_dir(self, run_id: str) -> Path:
        if not _SAFE_ID.match(run_id):
            raise KeyError(run_id)
        path = self.run_root / run_id
        if not (path / "state.json").exists():
            raise KeyError(run_id)
        return path

    def create(self, overrides: dict | None) -> tuple[str, bool]:
        cfg = self.default_config if not overrides else RunConfig.from_dict(overrides)
        run_id = cfg.run_id()
        run_dir = self.run_root / run_id
        created = not (run_dir / "state.json").exists()
        if created:
            run_dir.mkdir(parents=True, exist_ok=True)
            (run_dir / "config.json").write_text(cfg.to_json())
            save_state(run_dir, load_state(run_dir, cfg))
        return run_id, created

    def list_runs(self) -> list[dict]:
        out = []
        if self.run_root.exists():
            for path in sorted(self.run_root.iterdir()):
                if (path / "state.json").exists():
                    state = load_state(path)
                    out.append({"run_id": state.run_id, "stages": {str(n): s for n, s in sorted(state.stages.items())}})
        return out

    def config_for(self, run_id: str) -> RunConfig:
        path = self.run_dir(run_id) / "config.json"
        return RunConfig.from_dict(json.loads(path.read_text()))

    def start_stage(self, run_id: str, stage: int) -> None:
        run_dir = self.run_dir(run_id)
        cfg = self.config_for(run_id)
        with self._lock:
            if self._busy.get(run_id):
                raise StageBusy(f"run {run_id} is already executing stage {self._busy[run_id]}")
            state = load_state(run_dir)
            _require_stage_done(state, stage)
            self._busy[run_id] = stage
            state.stages[stage] = RUNNING
            save_state(run_dir, state)

        def worker():
            try:
                _STAGE_FN[stage](cfg, run_dir, self.base)
            except Exception:
                # run_stage* already persisted the failure diagnostics
                log.exception("stage %d of run %s failed", stage, run_id)
            finally:
                with self._lock:
                    self._busy.pop(run_id, None)

        threading.Thread(target=worker, name=f"{run_id}-stage{stage}", daemon=True).start()


def _artifact(run_dir: Path, relative: str, stage: int) -> Path:
    path = run_dir / relative
    if not path.exists():
        raise NotReady(f"stage {stage} has not produced {relative} yet")
    return path


def create_app(
    config_path: str | Path,
    run_root: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around one default config file."""
    cfg, base = load_config(config_path)
    if run_root is None:
        run_root = os.environ.get(RUN_ROOT_ENV) or Path.cwd() / "runs"
    registry = RunRegistry(Path(run_root), cfg, base)

    app = FastAPI(title="matnav", docs_url=None, redoc_url=None)
    app.state.registry = registry

    @app.exception_handler(MatnavError)
    async def matnav_error(request: Request, exc: MatnavError):
        status = 409 if isinstance(exc, (StageBusy, StageOrderError, NotReady)) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(KeyError)
    async def missing_run(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"error": "NotFound", "detail": str(exc)})

    @app.post("/runs", status_code=201)
    async def create_run(request: Request):
        body = await request.body()
        overrides = None
        if body:
            try:
                overrides = json.loads(body).get("config") or None
            except json.JSONDecodeError:
                return JSONResponse(
                    status_code=400,
                    content={"error": "BadRequest", "detail": "body must be JSON"},
                )
        run_id, created = registry.create(overrides)
        return JSONResponse(
            status_code=201 if created else 200,
            content={"run_id": run_id, "url": f"/runs/{run_id}"},
        )

    @app.get("/runs")
    def list_runs():
        return registry.list_runs()

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        state = load_state(registry.run_dir(run_id))
        return state.to_payload()

    @app.post("/runs/{run_id}/stages/{stage}", status_code=202)
    def start_stage(run_id: str, stage: int):
        if stage not in _STAGE_FN:
            return JSONResponse(
                status_code=404,
                content={"error": "NotFound", "detail": f"no stage {stage}"},
            )
        registry.start_stage(run_id, stage)
        return JSONResponse(
            status_code=202,
            content={"run_id": run_id, "stage": stage, "status": RUNNING, "poll": f"/runs/{run_id}"},
        )

    @app.get("/runs/{run_id}/criterion")
    def get_criterion(run_id: str):
        path = _artifact(registry.run_dir(run_id), "stage1/criterion.json", 1)
        return json.loads(path.read_text())

    @app.get("/runs/{run_id}/candidates")
    def get_candidates(run_id: str, status: str | None = None):
        run_dir = registry.run_dir(run_id)
        if status == "stable":
            path = _artifact(run_dir, "stage3/ranked.json", 3)
            return json.loads(path.read_text())
        path = _artifact(run_dir, "stage3/candidates.json", 3)
        payload = json.loads(path.read_text())
        rows = payload["candidates"]
        if status:
            rows = [r for r in rows if r["status"] == status]
        return rows

    @app.get("/runs/{run_id}/distribution")
    def get_distribution(run_id: str):
        path = _artifact(registry.run_dir(run_id), "stage3/distribution.json", 3)
        return json.loads(path.read_text())

    @app.get("/runs/{run_id}/candidates/{candidate_id}/cif")
    def get_cif(run_id: str, candidate_id: str):
        run_dir = registry.run_dir(run_id)
        if not _SAFE_ID.match(candidate_id):
            return JSONResponse(status_code=404, content={"error": "NotFound", "detail": candidate_id})
        path = run_dir / "stage3" / "candidates" / f"{candidate_id}.cif"
        if not path.exists():
            return JSONResponse(status_code=404, content={"error": "NotFound", "detail": candidate_id})
        return PlainTextResponse(path.read_text(), media_type="chemical/x-cif")

    if static_dir is None:
        probe = Path.cwd() / "frontend" / "dist"
        static_dir = probe if probe.exists() else None
    if static_dir is not None and Path(static_dir).exists():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
