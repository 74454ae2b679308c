"""HTTP campaign service for human-operated (and simulated) sampling runs.

A human experimenter drives the loop over plain JSON: fetch the next
suggested initial condition, run the physical experiment, post back the
observed attractor label (optionally with the measured trajectory, which is
harvested for extra samples exactly like a simulated one). The live boundary
estimate is served as a raster for display.

Persistence is a campaign-header file plus the append-only event log; state
is rebuilt from the log on restart, replaying the RNG stream, so the next
suggestion after a crash equals the one an uninterrupted run would produce.
Suggestions themselves are never stored: they are deterministic functions of
the replayed state.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.exceptions import RequestValidationError
from pydantic import BaseModel

from . import evaluation as eval_mod
from . import svm as svm_mod
from .campaign import (
    CampaignState,
    apply_query_result,
    bootstrap,
    draw_bootstrap_index,
    dump_event,
    estimate_raster,
    new_campaign,
    parse_event_log,
    propose_episode,
    refit_models,
    replay_events,
    run_episode,
)
from .config import ConfigError, RunConfig, parse_config
from .domain import denormalize
from .dynamics import SimulatedOracle, Trajectory, find_attractors
from .errors import BasinLearnError
from .trajectory_sampling import subsample

MAX_RASTER_RESOLUTION = 400
TRAJECTORY_START_TOL = 1e-6


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field

    def body(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.field:
            out["field"] = self.field
        return out


class CreateCampaignBody(BaseModel):
    id: str | None = None
    oracle: str = "simulated"
    config: dict = {}


class ObservationBody(BaseModel):
    suggestion_id: str
    label: int | None = None
    trajectory: list[list[float]] | None = None
    failed: bool = False


class CampaignRecord:
    """One campaign: config, live state, outstanding suggestion, disk paths."""

    def __init__(self, campaign_id: str, oracle_kind: str, config: RunConfig, directory: Path):
        self.id = campaign_id
        self.oracle_kind = oracle_kind
        self.config = config
        self.dir = directory
        self.lock = threading.RLock()
        self.state: CampaignState = new_campaign(config.hal, config.domain)
        self.outstanding: dict | None = None
        self.delivered = False
        self.metrics: list[dict] = []
        self.eval_grid = None
        if oracle_kind == "simulated":
            self.attractors = find_attractors(config.system, config.domain)
        else:
            self.attractors = []
        self.allowed_labels = (
            {a.id for a in self.attractors} if self.attractors else {0, 1}
        )

    # -- persistence ------------------------------------------------------

    @property
    def header_path(self) -> Path:
        return self.dir / "header.json"

    @property
    def events_path(self) -> Path:
        return self.dir / "events.jsonl"

    def write_header(self) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        payload = {"id": self.id, "oracle": self.oracle_kind, "config": self.config.to_dict()}
        self.header_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
        self.events_path.touch()

    def append_event(self, event: dict) -> None:
        with self.events_path.open("a") as fh:
            fh.write(dump_event(event) + "\n")
            fh.flush()

    def rewrite_events(self) -> None:
        with self.events_path.open("w") as fh:
            for ev in self.state.events:
                fh.write(dump_event(ev) + "\n")

    @property
    def metrics_path(self) -> Path:
        return self.dir / "metrics.json"

    def save_metrics(self) -> None:
        self.metrics_path.write_text(json.dumps(self.metrics))

    def load_metrics(self) -> None:
        if self.metrics_path.exists():
            self.metrics = json.loads(self.metrics_path.read_text())

    # -- phase logic --------------------------------------------------------

    def finished(self) -> bool:
        return (
            self.state.bootstrap_done
            and self.outstanding is None
            and self.state.episode >= self.config.hal.episodes
        )

    def status(self) -> str:
        if self.finished():
            return "finished"
        return "awaiting_observation" if self.outstanding is not None else "ready"

    def ensure_suggestion(self) -> dict:
        """The outstanding suggestion, computing (and RNG-consuming) it once.

        Deterministic given the event log, so it is never persisted: a
        restarted service recomputes the identical suggestion.
        """
        if self.outstanding is not None:
            return self.outstanding
        if self.finished():
            raise ApiError(410, "gone", "campaign has finished all episodes")
        state = self.state
        if not state.bootstrap_done:
            idx = draw_bootstrap_index(state)
            method = "bootstrap"
            episode = 0
        else:
            idx, method = propose_episode(state)
            episode = state.episode
        phys = denormalize(state.pool.candidates[idx], self.config.domain)
        self.outstanding = {
            "suggestion_id": f"{self.id}-{len(state.events)}",
            "pool_index": int(idx),
            "state": [float(v) for v in phys],
            "method": method,
            "episode": int(episode),
        }
        self.delivered = False
        return self.outstanding

    def public_suggestion(self) -> dict | None:
        if self.outstanding is None:
            return None
        return {k: v for k, v in self.outstanding.items() if k != "pool_index"}

    def record_f1(self) -> None:
        if self.eval_grid is None or self.state.svm_model is None:
            return
        pred = svm_mod.predict(self.state.svm_model, self.eval_grid[0])
        self.metrics.append(
            {
                "queries": self.state.queries,
                "labeled": len(self.state.labeled),
                "macro_f1": eval_mod.macro_f1(pred, self.eval_grid[1]),
            }
        )
        self.save_metrics()

    def attach_eval_grid(self) -> None:
        grid = eval_mod.ground_truth(
            self.config.domain, self.config.hal.n_per_dim, self.config.system, self.config.sim
        )
        self.eval_grid = (grid.unit_states, grid.labels)


class CampaignStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._records: dict[str, CampaignRecord] = {}
        self._lock = threading.Lock()

    def ids(self) -> list[str]:
        with self._lock:
            known = set(self._records)
        for p in self.data_dir.iterdir():
            if (p / "header.json").exists():
                known.add(p.name)
        return sorted(known)

    def exists(self, campaign_id: str) -> bool:
        with self._lock:
            if campaign_id in self._records:
                return True
        return (self.data_dir / campaign_id / "header.json").exists()

    def add(self, record: CampaignRecord) -> None:
        with self._lock:
            self._records[record.id] = record

    def get(self, campaign_id: str) -> CampaignRecord:
        with self._lock:
            rec = self._records.get(campaign_id)
        if rec is not None:
            return rec
        header = self.data_dir / campaign_id / "header.json"
        if not header.exists():
            raise ApiError(404, "not_found", f"no campaign {campaign_id!r}")
        rec = self._load(campaign_id)
        with self._lock:
            self._records.setdefault(campaign_id, rec)
            return self._records[campaign_id]

    def _load(self, campaign_id: str) -> CampaignRecord:
        directory = self.data_dir / campaign_id
        payload = json.loads((directory / "header.json").read_text())
        config = parse_config(payload["config"])
        rec = CampaignRecord(campaign_id, payload["oracle"], config, directory)
        events_file = directory / "events.jsonl"
        events = parse_event_log(events_file.read_text()) if events_file.exists() else []
        rec.state = replay_events(config.hal, config.domain, events)
        rec.load_metrics()
        if rec.oracle_kind == "simulated" and config.evaluate:
            rec.attach_eval_grid()
        if rec.oracle_kind == "human" and not rec.finished():
            # live campaigns always hold the next suggestion; recompute it
            # (same RNG stream position, so it matches the pre-crash one)
            rec.ensure_suggestion()
        return rec


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="basinlearn campaign service")
    store = CampaignStore(Path(data_dir))
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", []) if p != "body")
        return JSONResponse(
            status_code=422,
            content={"code": "validation", "message": first.get("msg", "invalid body"),
                     "field": loc or None},
        )

    @app.exception_handler(BasinLearnError)
    async def _domain_error(_req: Request, exc: BasinLearnError):
        return JSONResponse(status_code=409, content={"code": "conflict", "message": str(exc)})

    def campaign_view(rec: CampaignRecord) -> dict:
        return {
            "id": rec.id,
            "oracle": rec.oracle_kind,
            "status": rec.status(),
            "episode": rec.state.episode,
            "episodes_total": rec.config.hal.episodes,
            "queries": rec.state.queries,
            "labeled_count": len(rec.state.labeled),
            "bootstrap_done": rec.state.bootstrap_done,
            "suggestion": rec.public_suggestion(),
            "attractors": [
                {"id": a.id, "location": [float(v) for v in a.location]}
                for a in rec.attractors
            ],
            "domain": {
                "lower": [float(v) for v in rec.config.domain.lower],
                "upper": [float(v) for v in rec.config.domain.upper],
            },
            "config": rec.config.to_dict(),
        }

    @app.get("/campaigns")
    def list_campaigns():
        out = []
        for cid in store.ids():
            rec = store.get(cid)
            with rec.lock:
                out.append(
                    {"id": rec.id, "oracle": rec.oracle_kind, "status": rec.status(),
                     "queries": rec.state.queries, "episode": rec.state.episode}
                )
        return {"campaigns": out}

    @app.post("/campaigns", status_code=201)
    def create_campaign(body: CreateCampaignBody):
        if body.oracle not in ("simulated", "human"):
            raise ApiError(422, "validation", "oracle must be 'simulated' or 'human'", "oracle")
        campaign_id = body.id or uuid.uuid4().hex[:12]
        if store.exists(campaign_id):
            raise ApiError(409, "conflict", f"campaign {campaign_id!r} already exists", "id")
        try:
            config = parse_config(body.config)
        except ConfigError as exc:
            raise ApiError(422, "validation", str(exc), exc.field_name) from exc
        rec = CampaignRecord(campaign_id, body.oracle, config, store.data_dir / campaign_id)
        rec.write_header()
        with rec.lock:
            if body.oracle == "simulated":
                _run_simulated(rec)
            else:
                rec.ensure_suggestion()
            store.add(rec)
            return campaign_view(rec)

    def _run_simulated(rec: CampaignRecord) -> None:
        oracle = SimulatedOracle(
            rec.config.system, rec.config.sim, rec.config.domain, rec.attractors
        )
        if rec.config.evaluate:
            rec.attach_eval_grid()
        state = rec.state
        bootstrap(state, oracle)
        rec.record_f1()
        for _ in range(rec.config.hal.episodes):
            budget = rec.config.hal.query_budget
            if budget is not None and state.queries >= budget:
                break
            run_episode(state, oracle)
            rec.record_f1()
        rec.rewrite_events()

    @app.get("/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        rec = store.get(campaign_id)
        with rec.lock:
            return campaign_view(rec)

    @app.get("/campaigns/{campaign_id}/suggestion")
    def get_suggestion(campaign_id: str):
        rec = store.get(campaign_id)
        with rec.lock:
            if rec.oracle_kind == "simulated" or rec.finished():
                raise ApiError(410, "gone", "campaign accepts no further suggestions")
            if rec.outstanding is not None and rec.delivered:
                raise ApiError(
                    409, "conflict",
                    "a suggestion is already outstanding; submit its observation first",
                )
            rec.ensure_suggestion()
            rec.delivered = True
            return rec.public_suggestion()

    @app.post("/campaigns/{campaign_id}/observations")
    def submit_observation(campaign_id: str, body: ObservationBody):
        rec = store.get(campaign_id)
        with rec.lock:
            if rec.oracle_kind != "human":
                raise ApiError(409, "conflict", "observations apply to human-mode campaigns")
            if rec.finished():
                raise ApiError(410, "gone", "campaign has finished all episodes")
            outstanding = rec.ensure_suggestion()
            if body.suggestion_id != outstanding["suggestion_id"]:
                raise ApiError(
                    409, "conflict",
                    f"suggestion {body.suggestion_id!r} is not outstanding "
                    f"(expected {outstanding['suggestion_id']!r})",
                    "suggestion_id",
                )
            state = rec.state
            idx = outstanding["pool_index"]
            method = outstanding["method"]
            now = time.time()
            if body.failed:
                ev = apply_query_result(state, idx, method, None, [], ts=now)
            else:
                if body.label is None:
                    raise ApiError(422, "validation", "label is required unless failed", "label")
                if body.label not in rec.allowed_labels:
                    raise ApiError(
                        422, "validation",
                        f"label {body.label} not in {sorted(rec.allowed_labels)}", "label",
                    )
                traj = _build_trajectory(body, outstanding, int(body.label))
                samples = subsample(
                    traj, rec.config.hal.spacing, rec.config.domain,
                    source_query=state.queries,
                )
                ev = apply_query_result(state, idx, method, traj, samples, ts=now)
            rec.append_event(ev)
            rec.outstanding = None
            rec.delivered = False
            if ev["type"] != "failure":
                state.bootstrap_done = len(state.seen_labels()) >= 2
                refit_models(state)
                rec.record_f1()
            if not rec.finished():
                rec.ensure_suggestion()
            return {
                "queries": state.queries,
                "labeled_count": len(state.labeled),
                "episode": state.episode,
                "status": rec.status(),
                "ast_count": ev["ast_count"],
            }

    def _build_trajectory(body: ObservationBody, outstanding: dict, label: int) -> Trajectory:
        start = np.array(outstanding["state"], dtype=float)
        if body.trajectory is None:
            states = start[None, :]
            times = np.zeros(1)
        else:
            rows = np.asarray(body.trajectory, dtype=float)
            if rows.ndim != 2 or rows.shape[1] != 3:
                raise ApiError(422, "validation", "trajectory rows must be [t, x, v]", "trajectory")
            times = rows[:, 0] - rows[0, 0]
            states = rows[:, 1:]
            if np.any(np.diff(times) <= 0):
                raise ApiError(422, "validation", "trajectory times must increase strictly", "trajectory")
            if float(np.abs(states[0] - start).max()) > TRAJECTORY_START_TOL:
                raise ApiError(
                    422, "validation",
                    "trajectory must start at the suggested state "
                    f"(tolerance {TRAJECTORY_START_TOL})", "trajectory",
                )
        return Trajectory(states=states, times=times, label=label, initial=states[0])

    @app.get("/campaigns/{campaign_id}/estimate")
    def get_estimate(campaign_id: str, resolution: int = 100):
        rec = store.get(campaign_id)
        with rec.lock:
            if rec.state.svm_model is None:
                raise ApiError(409, "not_ready", "no classifier fitted yet")
            if not 2 <= resolution <= MAX_RASTER_RESOLUTION:
                raise ApiError(
                    422, "validation",
                    f"resolution must be in [2, {MAX_RASTER_RESOLUTION}]", "resolution",
                )
            payload = estimate_raster(rec.state, resolution)
            payload["suggestion"] = rec.public_suggestion()
            return payload

    @app.get("/campaigns/{campaign_id}/metrics")
    def get_metrics(campaign_id: str):
        rec = store.get(campaign_id)
        with rec.lock:
            return {
                "events": rec.state.events,
                "f1": rec.metrics,
                "queries": rec.state.queries,
                "labeled_count": len(rec.state.labeled),
            }

    @app.get("/campaigns/{campaign_id}/export")
    def export_csv(campaign_id: str):
        rec = store.get(campaign_id)
        with rec.lock:
            buf = io.StringIO()
            writer = csv.writer(buf)
            writer.writerow(["x", "v", "label", "provenance", "source_query", "remaining_length"])
            dom = rec.config.domain
            for s in rec.state.labeled:
                phys = denormalize(s.state, dom)
                writer.writerow(
                    [repr(float(phys[0])), repr(float(phys[1])), s.label,
                     s.provenance, s.source_query, s.remaining_length]
                )
            return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    return app
