"""HTTP facade for interactive labeling sessions.

Pull-based protocol: the client creates a session, fetches the outstanding
batch, posts labels for exactly that batch, and reads back the refreshed
view plus the stopping status. Sessions are serialized per-id with a lock;
a label submission either advances the whole iteration or changes nothing.

Every accepted submission is appended to a transcript that is checkpointed
to disk; restoring a session replays its transcript through the engine, so
a crash never loses labels and a replayed session is state-identical.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .datasets import LoadedDataset, builtin_spec, load_dataset
from .engine import (
    Aggregation,
    CleaningConfig,
    CleaningSession,
    DashboardSpec,
    Strategy,
    start_session,
)
from .errors import ConfigError, DataError, ViewCleanError
from .relation import pair_key
from .views import ViewResult


class ConflictError(ViewCleanError):
    """Submission conflicts with the outstanding batch or session state."""


class SessionConfigBody(BaseModel):
    budget: int = 100
    batch: int = 20
    initial_batch: int = 13
    alpha: float = 0.5
    strategy: str = "view_impact"
    epsilon: float = 0.01
    window: int = 3
    seed: int = 0
    kernel: str = "linear"
    holdout: bool = False
    ensemble_size: int = 10

    def to_config(self) -> CleaningConfig:
        try:
            strategy = Strategy(self.strategy)
        except ValueError:
            raise ConfigError(f"unknown strategy {self.strategy!r}") from None
        return CleaningConfig(
            budget=self.budget,
            batch=self.batch,
            initial_batch=self.initial_batch,
            alpha=self.alpha,
            strategy=strategy,
            epsilon=self.epsilon,
            window=self.window,
            seed=self.seed,
            kernel=self.kernel,
            holdout=self.holdout,
            ensemble_size=self.ensemble_size,
        )


class DashboardBody(BaseModel):
    views: list[str]
    aggregation: str = "max"


class CreateSessionBody(BaseModel):
    dataset: str = "synthetic"
    view: str | None = None
    dashboard: DashboardBody | None = None
    config: SessionConfigBody = Field(default_factory=SessionConfigBody)
    idempotency_key: str | None = None


class LabelEntry(BaseModel):
    id1: int
    id2: int
    label: bool


class LabelSubmissionBody(BaseModel):
    labels: list[LabelEntry]


class ReplayBody(BaseModel):
    dataset: str = "synthetic"
    view: str | None = None
    dashboard: DashboardBody | None = None
    config: SessionConfigBody = Field(default_factory=SessionConfigBody)
    transcript: list


@dataclass
class _LiveSession:
    id: str
    dataset: str
    view_names: list[str]
    config: SessionConfigBody
    session: CleaningSession
    created_at: str
    transcript: list[list[Any]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _view_payload(vr: ViewResult) -> dict:
    return {
        "schema": [[n, t.value] for n, t in vr.schema],
        "rows": [[v for v in row] for row in vr.rows],
    }


def _descriptor(live: _LiveSession) -> dict:
    s = live.session
    state = s.state()
    return {
        "id": live.id,
        "dataset": live.dataset,
        "views": live.view_names,
        "config": live.config.model_dump(),
        "created_at": live.created_at,
        "labels_used": s.labels_used(),
        "budget": s.cfg.budget,
        "budget_left": s.budget_left,
        "batches_done": s.iteration,
        "batch_size": len(s.pending),
        "last_view_change": s.history[-1] if s.history else None,
        "history": list(s.history),
        "stopped": s.stopped,
        "reason": s.reason,
        "digest": state.digest(),
    }


class SessionService:
    def __init__(self, data_dir: str | None = None, state_dir: str | None = None):
        self.data_dir = data_dir
        self.state_dir = Path(state_dir) if state_dir else None
        self.sessions: dict[str, _LiveSession] = {}
        self.idempotency: dict[str, str] = {}
        self.datasets: dict[str, LoadedDataset] = {}
        self.registry_lock = threading.Lock()
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._restore_all()

    # -- datasets -----------------------------------------------------------

    def _dataset(self, name: str) -> LoadedDataset:
        with self.registry_lock:
            if name not in self.datasets:
                self.datasets[name] = load_dataset(builtin_spec(name), self.data_dir)
            return self.datasets[name]

    # -- session lifecycle ----------------------------------------------------

    def _build_session(self, body: CreateSessionBody) -> tuple[CleaningSession, list[str]]:
        try:
            loaded = self._dataset(body.dataset)
        except ConfigError as exc:  # unknown dataset name -> not found
            raise DataError(str(exc)) from None
        if body.dashboard is not None:
            names = list(body.dashboard.views)
        elif body.view is not None:
            names = [body.view]
        else:
            raise ConfigError("request needs either view or dashboard")
        for name in names:
            if name not in loaded.views:
                raise DataError(
                    f"dataset {body.dataset!r} has no view {name!r}; "
                    f"available: {sorted(loaded.views)}"
                )
        if body.dashboard is not None:
            try:
                agg = Aggregation(body.dashboard.aggregation)
            except ValueError:
                raise ConfigError(
                    f"unknown aggregation {body.dashboard.aggregation!r}"
                ) from None
            spec = DashboardSpec(tuple(loaded.view(v) for v in names), agg)
        else:
            spec = loaded.view(body.view)
        session = start_session(
            spec,
            loaded.relation,
            body.config.to_config(),
            loaded.spec.blocking,
            loaded.spec.all_features(),
            ground_truth=loaded.ground_truth,
        )
        return session, names

    def create(self, body: CreateSessionBody) -> dict:
        with self.registry_lock:
            if body.idempotency_key and body.idempotency_key in self.idempotency:
                return _descriptor(self.sessions[self.idempotency[body.idempotency_key]])
        session, names = self._build_session(body)
        live = _LiveSession(
            id=uuid.uuid4().hex[:12],
            dataset=body.dataset,
            view_names=names,
            config=body.config,
            session=session,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        with self.registry_lock:
            if body.idempotency_key:
                existing = self.idempotency.get(body.idempotency_key)
                if existing is not None:  # lost the race: reuse the winner
                    return _descriptor(self.sessions[existing])
                self.idempotency[body.idempotency_key] = live.id
            self.sessions[live.id] = live
        self._checkpoint(live)
        return _descriptor(live)

    def get(self, session_id: str) -> _LiveSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise DataError(f"no session {session_id!r}") from None

    def batch(self, session_id: str) -> dict:
        live = self.get(session_id)
        with live.lock:
            s = live.session
            if s.stopped:
                return {"stopped": True, "reason": s.reason, "pairs": []}
            loaded = self._dataset(live.dataset)
            by_id = {r.id: r for r in loaded.relation.records}
            columns = [n for n, _ in loaded.relation.schema]
            pairs = []
            for a, b in s.pending_batch():
                pairs.append(
                    {
                        "id1": a,
                        "id2": b,
                        "records": [
                            dict(zip(columns, by_id[a].values)),
                            dict(zip(columns, by_id[b].values)),
                        ],
                        "impact": s.cands.pair_scores.get((a, b), 0.0),
                    }
                )
            return {
                "stopped": False,
                "reason": None,
                "columns": columns,
                "pairs": pairs,
                "labels_used": s.labels_used(),
                "budget": s.cfg.budget,
            }

    def submit(self, session_id: str, body: LabelSubmissionBody) -> dict:
        live = self.get(session_id)
        with live.lock:
            s = live.session
            if s.stopped:
                raise ConflictError("session already stopped")
            try:
                labels = {}
                for entry in body.labels:
                    labels[pair_key(entry.id1, entry.id2)] = entry.label
                s.submit_labels(labels)  # atomic: raises on any mismatch
            except (DataError, ValueError) as exc:
                raise ConflictError(str(exc)) from exc
            live.transcript.append(
                [[list(p), bool(lab)] for p, lab in sorted(labels.items())]
            )
            self._checkpoint(live)
            return {
                "state": _descriptor(live),
                "views": {name: _view_payload(vr) for name, vr in s.views.items()},
                "view_change": s.history[-1],
                "stopped": s.stopped,
                "reason": s.reason,
            }

    def views(self, session_id: str) -> dict:
        live = self.get(session_id)
        with live.lock:
            return {
                "views": {
                    name: _view_payload(vr) for name, vr in live.session.views.items()
                },
                "history": list(live.session.history),
                "stopped": live.session.stopped,
                "reason": live.session.reason,
            }

    def replay_digest(self, body: CreateSessionBody, transcript: list) -> str:
        """Digest of the state reached by replaying a label transcript."""
        session, _ = self._build_session(body)
        for step in transcript:
            labels = {pair_key(a, b): bool(lab) for (a, b), lab in step}
            session.submit_labels(labels)
        return session.state().digest()

    # -- checkpointing ---------------------------------------------------------

    def _checkpoint(self, live: _LiveSession) -> None:
        if not self.state_dir:
            return
        payload = {
            "id": live.id,
            "dataset": live.dataset,
            "view_names": live.view_names,
            "config": live.config.model_dump(),
            "created_at": live.created_at,
            "transcript": live.transcript,
        }
        path = self.state_dir / f"{live.id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        tmp.replace(path)

    def _restore_all(self) -> None:
        for path in sorted(self.state_dir.glob("*.json")):
            payload = json.loads(path.read_text(encoding="utf-8"))
            body = CreateSessionBody(
                dataset=payload["dataset"],
                view=payload["view_names"][0] if len(payload["view_names"]) == 1 else None,
                dashboard=(
                    None
                    if len(payload["view_names"]) == 1
                    else DashboardBody(views=payload["view_names"])
                ),
                config=SessionConfigBody(**payload["config"]),
            )
            session, names = self._build_session(body)
            live = _LiveSession(
                id=payload["id"],
                dataset=payload["dataset"],
                view_names=names,
                config=body.config,
                session=session,
                created_at=payload["created_at"],
            )
            for step in payload["transcript"]:
                labels = {pair_key(a, b): bool(lab) for (a, b), lab in step}
                session.submit_labels(labels)
                live.transcript.append(step)
            self.sessions[live.id] = live


def create_app(data_dir: str | None = None, state_dir: str | None = None) -> FastAPI:
    service = SessionService(data_dir=data_dir, state_dir=state_dir)
    app = FastAPI(title="viewclean labeling service")
    app.state.service = service

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (ConfigError, ViewCleanError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/sessions")
    def create(body: CreateSessionBody):
        return guard(service.create, body)

    @app.get("/sessions/{session_id}")
    def descriptor(session_id: str):
        return guard(lambda: _descriptor(service.get(session_id)))

    @app.get("/sessions/{session_id}/batch")
    def batch(session_id: str):
        return guard(service.batch, session_id)

    @app.post("/sessions/{session_id}/labels")
    def labels(session_id: str, body: LabelSubmissionBody):
        return guard(service.submit, session_id, body)

    @app.get("/sessions/{session_id}/view")
    def view(session_id: str):
        return guard(service.views, session_id)

    @app.post("/replay")
    def replay(body: ReplayBody):
        create_body = CreateSessionBody(
            dataset=body.dataset, view=body.view, dashboard=body.dashboard,
            config=body.config,
        )
        return {"digest": guard(service.replay_digest, create_body, body.transcript)}

    return app
