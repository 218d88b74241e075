"""HTTP + WebSocket service for live typing sessions.

A human drives the decoder one intent at a time: for every declared action
the server draws noisy evidence through the session's calibration profile,
runs the repetition loop and the posterior update, applies the decoded
action or concludes the epoch, and streams the resulting state back.  REST
manages session lifecycle; per-trial traffic flows over one WebSocket per
session.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from .config import RunConfig
from .epoch import (
    CONCLUDED_CAP,
    CONCLUDED_PSC,
    CONCLUDED_SELECT,
    EpochConfig,
    MODELS,
    psc_check,
    run_trial,
)
from .evidence import make_profile
from .graph import (
    Action,
    BACKSPACE,
    MODES,
    NavGraph,
    SELECT_COMMAND,
    apply_action,
    n_action_classes,
    policy_matrix,
)
from .inference import init_epoch, update_posterior
from .lm import char_prior, uniform_prior

_ACTION_NAMES = {a.name.lower(): a for a in Action}


class CreateSessionRequest(BaseModel):
    model: str = "marginal"
    criterion: str = SELECT_COMMAND
    accuracy: float = Field(0.85, gt=0.0, le=1.0)
    theta: float = Field(0.9, ge=0.0)
    psc_threshold: float = Field(10.0, gt=1.0)
    max_repetitions: int = Field(5, ge=1)
    max_trials_per_epoch: int = Field(50, ge=1)
    seed: int = 0
    prior: str | None = None  # "uniform" | "lm"; default from server config


@dataclass
class LiveSession:
    session_id: str
    graph: NavGraph
    config: EpochConfig
    profile: Any
    rng: np.random.Generator
    prior_source: str
    lm: Any
    state: Any = None
    typed_text: str = ""
    draws: int = 0
    trials_in_epoch: int = 0
    epoch_id: int = 0
    log: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def epoch_prior(self) -> np.ndarray:
        if self.prior_source == "lm" and self.lm is not None:
            return char_prior(self.lm, self.typed_text)
        return uniform_prior(self.graph.n_nodes)

    def start_epoch(self) -> None:
        cursor = self.state.cursor if self.state is not None else self.graph.node_index(
            self.graph.rows // 2, self.graph.cols // 2
        )
        self.state = init_epoch(self.epoch_prior(), cursor, self.config.criterion,
                                self.epoch_id)
        self.trials_in_epoch = 0

    def cursor_payload(self) -> dict:
        r, c = self.graph.node_rc(self.state.cursor)
        return {"row": r, "col": c, "label": self.graph.label_of(self.state.cursor)}

    def posterior_payload(self) -> list[float]:
        return [round(float(p), 9) for p in self.state.posterior]

    def describe(self) -> dict:
        return {
            "session_id": self.session_id,
            "rows": self.graph.rows,
            "cols": self.graph.cols,
            "labels": list(self.graph.labels),
            "model": self.config.model,
            "criterion": self.config.criterion,
            "theta": self.config.confidence_threshold,
            "psc_threshold": self.config.psc_threshold,
            "accuracy": self.profile.target_accuracy,
            "cursor": self.cursor_payload(),
            "posterior": self.posterior_payload(),
            "typed_text": self.typed_text,
            "elapsed_s": self.draws * self.config.seconds_per_draw,
            "trial_count": len(self.log),
        }

    def post_intent(self, action_name: str) -> dict:
        """Run one trial for the declared intent and return the wire update."""
        action = _ACTION_NAMES.get(action_name)
        if action is None:
            raise ValueError(f"unknown action {action_name!r}")
        if int(action) >= n_action_classes(self.config.criterion):
            raise ValueError(
                f"action {action_name!r} is not admissible under {self.config.criterion}"
            )
        with self.lock:
            cursor = self.state.cursor
            policy = policy_matrix(self.graph, cursor, self.config.criterion)
            outcome = run_trial(self.state, self.profile, action, self.config,
                                self.rng, policy)
            self.state = update_posterior(self.state, outcome.fused_evidence, policy)
            self.draws += outcome.repetitions
            self.trials_in_epoch += 1

            concluded_by = None
            if (self.config.criterion == SELECT_COMMAND
                    and outcome.decision.action == Action.SELECT):
                concluded_by = CONCLUDED_SELECT
            elif (self.config.criterion != SELECT_COMMAND
                    and psc_check(self.state.posterior, cursor,
                                  self.config.psc_threshold)):
                concluded_by = CONCLUDED_PSC
            else:
                self.state = replace(
                    self.state,
                    cursor=apply_action(self.graph, cursor, outcome.decision.action),
                )
                if (self.config.criterion != SELECT_COMMAND
                        and self.state.cursor != cursor
                        and psc_check(self.state.posterior, self.state.cursor,
                                      self.config.psc_threshold)):
                    concluded_by = CONCLUDED_PSC
                elif self.trials_in_epoch >= self.config.max_trials_per_epoch:
                    concluded_by = CONCLUDED_CAP

            selected_char = None
            if concluded_by is not None:
                selected_char = self.graph.label_of(self.state.cursor)
                if selected_char == BACKSPACE:
                    self.typed_text = self.typed_text[:-1]
                else:
                    self.typed_text += selected_char
                self.epoch_id += 1
                self.start_epoch()

            update = {
                "cursor": self.cursor_payload(),
                "posterior": self.posterior_payload(),
                "decided_action": outcome.decision.action.name.lower(),
                "confidence": float(outcome.decision.confidence),
                "repetitions": outcome.repetitions,
                "elapsed_s": self.draws * self.config.seconds_per_draw,
                "selected_char": selected_char,
                "typed_text": self.typed_text,
                "concluded_by": concluded_by,
            }
            self.log.append({"intent": action_name, "update": update})
            return update


def create_app(cfg: RunConfig | None = None, ui_dir: str | None = None) -> FastAPI:
    cfg = cfg or RunConfig()
    graph = cfg.graph.build()
    lm = cfg.lm.build(graph.labels) if cfg.service.prior == "lm" else None
    app = FastAPI(title="gridtype session service")
    sessions: dict[str, LiveSession] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> LiveSession:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict:
        if req.model not in MODELS:
            raise HTTPException(422, f"unknown model {req.model!r}")
        if req.criterion not in MODES:
            raise HTTPException(422, f"unknown criterion {req.criterion!r}")
        n_classes = n_action_classes(req.criterion)
        if req.accuracy <= 1.0 / n_classes:
            raise HTTPException(
                422, f"accuracy {req.accuracy} not above chance (1/{n_classes})"
            )
        prior_source = req.prior or cfg.service.prior
        if prior_source not in ("uniform", "lm"):
            raise HTTPException(422, f"unknown prior {prior_source!r}")
        if prior_source == "lm" and lm is None:
            raise HTTPException(
                422, "server has no language model; start serve with service.prior: lm"
            )
        epoch_cfg = EpochConfig(
            model=req.model, criterion=req.criterion,
            confidence_threshold=req.theta, psc_threshold=req.psc_threshold,
            max_repetitions=req.max_repetitions,
            max_trials_per_epoch=req.max_trials_per_epoch,
        )
        calib_seed = int(np.random.SeedSequence([req.seed, 0xCA11]).generate_state(1)[0])
        profile = make_profile(req.accuracy, n_classes=n_classes, seed=calib_seed)
        session = LiveSession(
            session_id=uuid.uuid4().hex,
            graph=graph,
            config=epoch_cfg,
            profile=profile,
            rng=np.random.default_rng(np.random.SeedSequence([req.seed, 0xE0])),
            prior_source=prior_source,
            lm=lm,
        )
        session.start_epoch()
        with registry_lock:
            sessions[session.session_id] = session
        return session.describe()

    @app.get("/sessions/{session_id}")
    def describe_session(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            out = session.describe()
            out["log"] = session.log
        return out

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str) -> None:
        get_session(session_id)
        with registry_lock:
            sessions.pop(session_id, None)

    @app.websocket("/sessions/{session_id}/ws")
    async def session_socket(ws: WebSocket, session_id: str) -> None:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            await ws.close(code=4004, reason="unknown session")
            return
        await ws.accept()
        try:
            while True:
                msg = await ws.receive_json()
                action = msg.get("action") if isinstance(msg, dict) else None
                if not isinstance(action, str):
                    await ws.send_json({"error": "message must be {\"action\": <name>}"})
                    continue
                try:
                    update = session.post_intent(action)
                except ValueError as exc:
                    await ws.send_json({"error": str(exc)})
                    continue
                await ws.send_json(update)
        except WebSocketDisconnect:
            return

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
