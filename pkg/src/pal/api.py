"""HTTP surface over the session store.

All bodies are JSON; every error is {"error": {"code": ..., "message": ...}}
with extra fields where useful (bank validation carries the violation list).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .pipeline import (
    Bank,
    BankValidationError,
    PipelineConfig,
    Transcript,
    TranscriptParseError,
    TranscriptSegment,
    assemble_bank,
    compile_bank,
    parse_transcript,
)
from .session import (
    ConfigError,
    ConflictError,
    NotEndedError,
    ProtocolError,
    ServedQuestion,
    Session,
    SessionConfig,
    SessionEndedError,
    SessionError,
    SessionStore,
)
from .summary import LearnerProfile, compose_summary


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message, **extra}})


_SESSION_ERROR_STATUS = {
    ProtocolError: 409,
    ConflictError: 409,
    SessionEndedError: 409,
    NotEndedError: 409,
}


def _served_payload(session: Session, served: ServedQuestion) -> dict:
    rec = served.question
    return {
        "question_id": served.question_id,
        "q": rec.q,
        "options": list(rec.a.options),
        "d": rec.d.label,
        "t": round(rec.t, 3),
        "c": rec.c,
        "difficulty": rec.d.label,
        "fallback": served.fallback,
        "time_limit": session.config.time_limit,
        "progress": {"answered": session.answered_count, "planned": session.config.planned_questions},
    }


def _fallback_transcript(bank: Bank) -> Transcript:
    """Pseudo-transcript from question contexts, for banks uploaded without one."""
    segments: list[TranscriptSegment] = []
    prev = None
    for rec in bank.questions:
        text = rec.c.strip()
        if text and text != prev:
            segments.append(TranscriptSegment(t=rec.t, u=text, index=len(segments)))
            prev = text
    return Transcript(segments=tuple(segments), source_id=bank.source_id)


def create_app(data_dir: str) -> FastAPI:
    app = FastAPI(title="pal session service")
    store = SessionStore(data_dir)
    app.state.store = store

    @app.exception_handler(SessionError)
    async def session_error_handler(request: Request, exc: SessionError):
        return _error(_SESSION_ERROR_STATUS.get(type(exc), 409), exc.code, str(exc))

    @app.exception_handler(BankValidationError)
    async def bank_error_handler(request: Request, exc: BankValidationError):
        return _error(
            422,
            "invalid_bank",
            str(exc),
            violations=[v.as_dict() for v in exc.violations],
        )

    @app.exception_handler(TranscriptParseError)
    async def transcript_error_handler(request: Request, exc: TranscriptParseError):
        return _error(422, "invalid_transcript", str(exc))

    @app.exception_handler(ConfigError)
    async def config_error_handler(request: Request, exc: ConfigError):
        return _error(400, "invalid_config", str(exc))

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc))

    @app.post("/banks")
    async def upload_bank(request: Request):
        raw = await request.body()
        bank_id = store.put_bank(raw)
        return {"bank_id": bank_id}

    @app.post("/banks/compile")
    async def compile_endpoint(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "transcript" not in body or "format" not in body:
            return _error(400, "invalid_request", "body needs 'transcript' and 'format'")
        cfg_body = body.get("config", {})
        cfg = PipelineConfig(
            cue_phrases=tuple(cfg_body.get("cue_phrases", PipelineConfig().cue_phrases)),
            every_n=int(cfg_body.get("every_n", PipelineConfig().every_n)),
            min_sentence_tokens=int(
                cfg_body.get("min_sentence_tokens", PipelineConfig().min_sentence_tokens)
            ),
        )
        source_id = str(body.get("source_id", "uploaded-transcript"))
        transcript = parse_transcript(body["transcript"].encode("utf-8"), body["format"], source_id)
        records = compile_bank(transcript, cfg)
        bank_bytes = assemble_bank(records, source_id)
        bank_id = store.put_bank(bank_bytes)
        store.put_transcript(bank_id, transcript)
        return Response(
            content=bank_bytes, media_type="application/json", headers={"X-Bank-Id": bank_id}
        )

    @app.post("/sessions")
    async def create_session_endpoint(request: Request):
        config = SessionConfig.from_dict(await request.json())
        try:
            session = store.create_session(config)
        except KeyError:
            return _error(404, "unknown_bank", f"no bank {config.bank_id!r}")
        return {"session_id": session.id}

    def _get_session(session_id: str) -> Session:
        return store.get_session(session_id)

    @app.get("/sessions/{session_id}/next")
    def next_question(session_id: str):
        try:
            served = store.with_session(session_id, lambda s: s.next_question())
        except KeyError:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return _served_payload(store.get_session(session_id), served)

    @app.post("/sessions/{session_id}/answer")
    async def submit_answer(session_id: str, request: Request):
        body = await request.json()
        for key in ("question_id", "choice", "response_time"):
            if not isinstance(body, dict) or key not in body:
                return _error(400, "invalid_request", f"body needs {key!r}")
        try:
            result = store.with_session(
                session_id,
                lambda s: s.submit_answer(body["question_id"], body["choice"], body["response_time"]),
            )
        except KeyError:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return {
            "correct": result.correct,
            "correct_index": result.correct_index,
            "reward": result.reward.as_dict(),
            "new_level": result.new_level.label,
            "state": result.state_snapshot,
            "status": result.status,
            "progress": {"answered": result.answered, "planned": result.planned},
        }

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str):
        try:
            session = _get_session(session_id)
        except KeyError:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return session.state_view()

    @app.get("/sessions/{session_id}/summary")
    def session_summary(session_id: str):
        try:
            session = _get_session(session_id)
        except KeyError:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if session.status != "ended":
            raise NotEndedError("summary requires an ended session")
        transcript = store.get_transcript(session.config.bank_id)
        if transcript is None:
            transcript = _fallback_transcript(session.bank)
        profile = LearnerProfile(
            learner_id=session.config.learner_id, interests=session.config.interests
        )
        report = compose_summary(session.bank.questions, session.answers, transcript, profile)
        return {
            "mastered": [{"concept": s.concept, "excerpts": list(s.excerpts)} for s in report.mastered],
            "discovery": [{"concept": s.concept, "excerpts": list(s.excerpts)} for s in report.discovery],
            "tailored_examples": list(report.tailored_examples),
            "rendered": report.rendered,
        }

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str):
        try:
            lines = store.event_lines(session_id)
        except KeyError:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return PlainTextResponse(lines, media_type="application/x-ndjson")

    return app
