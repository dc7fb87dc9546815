"""HTTP service exposing the study protocol, event-sourced onto one log file.

Every mutation appends events to the log before acknowledging; restarting
the service replays the log and reconstructs identical state.  The clock
is injectable so a six-day schedule can be driven in milliseconds during
tests (run with a manual clock and advance it through POST
/admin/clock/advance).
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel

from .errors import (
    ConfigError,
    PoolExhausted,
    RoundAlreadyTerminal,
    RoundClosed,
    RoundLocked,
)
from .events import EventLogWriter, read_events
from .similarity import DefaultEmbeddingProvider
from .study import (
    StudyConfig,
    StudyState,
    compute_metrics,
    schedule,
    survey_aggregates,
    typo_report,
)


class RealClock:
    def now(self) -> float:
        return time.time()


class ManualClock:
    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        self._now += seconds
        return self._now


@dataclass
class ServiceConfig:
    study: StudyConfig
    admin_token: str
    listen_host: str = "127.0.0.1"
    listen_port: int = 8099
    test_clock: bool = False

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        pools = {}
        for story, pool_file in raw.get("pools", {}).items():
            pool_path = Path(pool_file)
            if not pool_path.is_absolute():
                pool_path = path.parent / pool_path
            entries = []
            for line in pool_path.read_text(encoding="utf-8").splitlines():
                if not line.strip() or line.startswith("#"):
                    continue
                entries.append(line.split("\t")[-1].split())
            pools[story] = entries
        study_kwargs = {}
        for key in (
            "stories",
            "schedule_offsets",
            "attempts_per_login",
            "round_window",
            "dedup_theta",
            "seed",
        ):
            if key in raw:
                study_kwargs[key] = raw[key]
        study = StudyConfig(pools=pools, **study_kwargs)
        if "admin_token" not in raw:
            raise ConfigError("config is missing admin_token")
        return cls(
            study=study,
            admin_token=raw["admin_token"],
            listen_host=raw.get("listen_host", "127.0.0.1"),
            listen_port=int(raw.get("listen_port", 8099)),
            test_clock=bool(raw.get("test_clock", False)),
        )


class EnrollBody(BaseModel):
    condition: str = "auto"


class StoryBody(BaseModel):
    story: str


class AttemptBody(BaseModel):
    text: str
    request_id: str | None = None


class SurveyBody(BaseModel):
    answers: dict


class AdvanceBody(BaseModel):
    seconds: float


@dataclass
class Service:
    config: ServiceConfig
    log_path: Path
    clock: object
    state: StudyState = field(init=False)
    writer: EventLogWriter = field(init=False)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.log_path = Path(self.log_path)
        provider = DefaultEmbeddingProvider()
        self.state = StudyState(self.config.study, provider=provider)
        if self.log_path.exists():
            for event in read_events(self.log_path):  # LogCorrupt aborts startup
                self.state.apply(event)
        self.writer = EventLogWriter(self.log_path)
        self.state.sink = self.writer.append


def serve(config: ServiceConfig, event_log_path, clock=None) -> FastAPI:
    """Build the application; state is replayed from the event log."""
    clock = clock or (ManualClock() if config.test_clock else RealClock())
    service = Service(config=config, log_path=event_log_path, clock=clock)
    return build_app(service)


def build_app(service: Service) -> FastAPI:
    app = FastAPI(title="storyphrase recall study")
    state = service.state
    config = service.config

    def admin_guard(x_admin_token: str = Header(default="")):
        if x_admin_token != config.admin_token:
            raise HTTPException(status_code=401, detail="bad admin token")

    def participant_guard(pid: str, token: str):
        participant = state.participants.get(pid)
        if participant is None:
            raise HTTPException(status_code=404, detail="unknown participant")
        if token != participant.token:
            raise HTTPException(status_code=401, detail="bad participant token")
        return participant

    def translate(exc: Exception) -> HTTPException:
        if isinstance(exc, (RoundClosed, RoundAlreadyTerminal, RoundLocked, PoolExhausted)):
            return HTTPException(status_code=409, detail=str(exc))
        if isinstance(exc, ConfigError):
            return HTTPException(status_code=422, detail=str(exc))
        raise exc

    @app.post("/participants")
    def enroll(body: EnrollBody):
        with service.lock:
            try:
                result = state.enroll(service.clock.now(), body.condition)
            except Exception as exc:  # noqa: BLE001 - translated below
                raise translate(exc)
        result["stories"] = list(config.study.stories)
        return result

    @app.post("/participants/{pid}/story")
    def choose_story(pid: str, body: StoryBody, x_participant_token: str = Header(default="")):
        with service.lock:
            participant_guard(pid, x_participant_token)
            try:
                return state.choose_story(pid, service.clock.now(), body.story)
            except Exception as exc:
                raise translate(exc)

    @app.get("/participants/{pid}/assignment")
    def assignment(pid: str, x_participant_token: str = Header(default="")):
        with service.lock:
            participant = participant_guard(pid, x_participant_token)
            if participant.assignment is None:
                raise HTTPException(status_code=409, detail="no assignment yet")
            round0 = participant.round(0)
            if round0.terminal is not None:
                raise HTTPException(
                    status_code=409, detail="memorization phase already completed"
                )
            opens = participant.enrolled_at
            return {
                "passphrase": " ".join(participant.assignment),
                "round": 0,
                "opens_at": opens,
                "closes_at": opens + config.study.round_window,
            }

    @app.get("/participants/{pid}/rounds")
    def rounds(pid: str, x_participant_token: str = Header(default="")):
        with service.lock:
            participant = participant_guard(pid, x_participant_token)
            now = service.clock.now()
            entries = [
                {
                    "round": 0,
                    "opens_at": participant.enrolled_at,
                    "closes_at": participant.enrolled_at + config.study.round_window,
                }
            ]
            for i, opens, closes in schedule(participant.enrolled_at, config.study):
                entries.append({"round": i, "opens_at": opens, "closes_at": closes})
            out = []
            previous_terminal = True
            for entry in entries:
                i = entry["round"]
                rstate = participant.round(i)
                if rstate.terminal is not None:
                    status = rstate.terminal
                elif not previous_terminal or participant.assignment is None:
                    status = "locked"
                elif now < entry["opens_at"]:
                    status = "pending"
                elif now > entry["closes_at"]:
                    status = "missed"
                else:
                    status = "open"
                out.append(
                    {
                        **entry,
                        "status": status,
                        "remaining_attempts": config.study.attempts_per_login
                        - rstate.incorrect
                        if rstate.terminal is None
                        else 0,
                        "revealed": " ".join(participant.assignment)
                        if rstate.terminal == "failed" and participant.assignment
                        else None,
                    }
                )
                previous_terminal = rstate.terminal is not None
            return {
                "now": now,
                "rounds": out,
                "survey_pending": participant.survey is None
                and participant.round(1).terminal is not None,
            }

    @app.post("/participants/{pid}/rounds/{round_index}/attempts")
    def attempt(
        pid: str,
        round_index: int,
        body: AttemptBody,
        x_participant_token: str = Header(default=""),
    ):
        with service.lock:
            participant_guard(pid, x_participant_token)
            try:
                return state.attempt(
                    pid,
                    round_index,
                    body.text,
                    service.clock.now(),
                    request_id=body.request_id,
                )
            except Exception as exc:
                raise translate(exc)

    @app.post("/participants/{pid}/survey")
    def survey(pid: str, body: SurveyBody, x_participant_token: str = Header(default="")):
        with service.lock:
            participant_guard(pid, x_participant_token)
            try:
                return state.submit_survey(pid, service.clock.now(), body.answers)
            except Exception as exc:
                raise translate(exc)

    @app.get("/admin/metrics", dependencies=[Depends(admin_guard)])
    def metrics(condition: str | None = None):
        with service.lock:
            events = list(state.events)
        conditions = [condition] if condition else ["random", "familiar"]
        result = {
            "conditions": {
                c: compute_metrics(events, condition=c).to_dict() for c in conditions
            },
            "stories": {
                s: compute_metrics(events, condition="familiar", story=s).to_dict()
                for s in config.study.stories
            },
            "survey": survey_aggregates(events),
        }
        return result

    @app.get("/admin/typo-report", dependencies=[Depends(admin_guard)])
    def typos():
        with service.lock:
            events = list(state.events)
        return {"stories": typo_report(events, provider=state.provider)}

    @app.get("/admin/export", dependencies=[Depends(admin_guard)])
    def export():
        with service.lock:
            return {"log": "\n".join(e.to_line() for e in state.events)}

    @app.post("/admin/clock/advance", dependencies=[Depends(admin_guard)])
    def advance(body: AdvanceBody):
        if not isinstance(service.clock, ManualClock):
            raise HTTPException(status_code=403, detail="service runs on a real clock")
        with service.lock:
            return {"now": service.clock.advance(body.seconds)}

    return app
