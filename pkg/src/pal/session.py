"""Event-sourced session lifecycle over a question bank and the hybrid policy.

State is the fold of an append-only event log (created / question_served /
level_changed / answer_submitted / session_ended), one JSONL file per session.
The created event embeds the session config and the full bank, so a log alone
reconstructs the exact live PolicyState via `replay`.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .bandit import BanditConfig
from .difficulty import Difficulty
from .irt import PriorConfig
from .model import AnswerOutcome, ModelConfig, RewardBreakdown
from .pipeline import Bank, QuestionRecord, Transcript, TranscriptSegment, assemble_bank
from .policy import BlendConfig, PolicyConfigs, PolicyState, choose_difficulty
from .policy import step as policy_step

EVENT_KINDS = ("created", "question_served", "level_changed", "answer_submitted", "session_ended")

RESPONSE_TIME_CAP_FACTOR = 10.0  # client-reported times are clamped to 10x the limit


class SessionError(Exception):
    code = "session_error"


class ProtocolError(SessionError):
    code = "question_pending"


class ConflictError(SessionError):
    code = "answer_conflict"


class SessionEndedError(SessionError):
    code = "session_ended"


class NotEndedError(SessionError):
    code = "session_active"


class ConfigError(ValueError):
    pass


class CorruptLogError(ValueError):
    def __init__(self, seq: int | None, message: str):
        self.seq = seq
        super().__init__(f"event {seq}: {message}" if seq is not None else message)


# --- config (de)serialization ---

def _flat_from_dict(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    try:
        return cls(**{k: v for k, v in data.items() if k in names})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad {cls.__name__}: {e}") from None


def _prior_to_dict(cfg: PriorConfig) -> dict:
    return {
        "params_per_level": {d.label: p.as_dict() for d, p in cfg.params_per_level.items()},
        "promote_threshold": cfg.promote_threshold,
        "demote_threshold": cfg.demote_threshold,
        "cooldown_len": cfg.cooldown_len,
        "hold_len": cfg.hold_len,
        "prior_mode": cfg.prior_mode.value,
        "target_success": cfg.target_success,
        "zone_sharpness": cfg.zone_sharpness,
    }


def _prior_from_dict(data: dict) -> PriorConfig:
    from .irt import ItemParams, PriorMode

    kwargs = dict(data)
    try:
        if "params_per_level" in kwargs:
            kwargs["params_per_level"] = {
                Difficulty.from_label(label): ItemParams.from_dict(p)
                for label, p in kwargs["params_per_level"].items()
            }
        if "prior_mode" in kwargs:
            kwargs["prior_mode"] = PriorMode(kwargs["prior_mode"])
        names = {f.name for f in dataclasses.fields(PriorConfig)}
        return PriorConfig(**{k: v for k, v in kwargs.items() if k in names})
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"bad PriorConfig: {e}") from None


@dataclass(frozen=True)
class SessionConfig:
    bank_id: str
    learner_id: str = "anonymous"
    planned_questions: int | None = None  # None means "whole bank", resolved at create time
    rng_seed: int = 0
    time_limit: float = 30.0
    interests: tuple[str, ...] = ()
    configs: PolicyConfigs = field(default_factory=PolicyConfigs)

    def __post_init__(self):
        if self.planned_questions is not None and self.planned_questions < 1:
            raise ConfigError("planned_questions must be >= 1")
        if self.time_limit <= 0:
            raise ConfigError("time_limit must be > 0")

    def to_dict(self) -> dict:
        return {
            "bank_id": self.bank_id,
            "learner_id": self.learner_id,
            "planned_questions": self.planned_questions,
            "rng_seed": self.rng_seed,
            "time_limit": self.time_limit,
            "interests": list(self.interests),
            "model": dataclasses.asdict(self.configs.model),
            "prior": _prior_to_dict(self.configs.prior),
            "bandit": dataclasses.asdict(self.configs.bandit),
            "blend": dataclasses.asdict(self.configs.blend),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        if not isinstance(data, dict):
            raise ConfigError("session config must be an object")
        if not isinstance(data.get("bank_id"), str) or not data["bank_id"]:
            raise ConfigError("bank_id is required")
        configs = PolicyConfigs(
            model=_flat_from_dict(ModelConfig, data.get("model", {})),
            prior=_prior_from_dict(data.get("prior", {})),
            bandit=_flat_from_dict(BanditConfig, data.get("bandit", {})),
            blend=_flat_from_dict(BlendConfig, data.get("blend", {})),
        )
        planned = data.get("planned_questions")
        try:
            return cls(
                bank_id=data["bank_id"],
                learner_id=str(data.get("learner_id", "anonymous")),
                planned_questions=int(planned) if planned is not None else None,
                rng_seed=int(data.get("rng_seed", 0)),
                time_limit=float(data.get("time_limit", 30.0)),
                interests=tuple(str(t) for t in data.get("interests", [])),
                configs=configs,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None


# --- events ---

@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    payload: dict
    wall_time: str

    def to_json_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "payload": self.payload, "wall_time": self.wall_time},
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json_line(cls, line: str, line_no: int) -> "SessionEvent":
        try:
            doc = json.loads(line)
            return cls(seq=doc["seq"], kind=doc["kind"], payload=doc["payload"], wall_time=doc["wall_time"])
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise CorruptLogError(None, f"unreadable event at line {line_no}: {e}") from None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class ServedQuestion:
    question_id: str
    question: QuestionRecord
    sampled: Difficulty
    fallback: bool


@dataclass(frozen=True)
class AnswerResult:
    correct: bool
    correct_index: int
    reward: RewardBreakdown
    new_level: Difficulty
    state_snapshot: dict
    status: str
    answered: int
    planned: int


_FALLBACK_ORDER = {
    Difficulty.EASY: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    Difficulty.MEDIUM: (Difficulty.MEDIUM, Difficulty.EASY, Difficulty.HARD),
    Difficulty.HARD: (Difficulty.HARD, Difficulty.MEDIUM, Difficulty.EASY),
}


class Session:
    """One live session: bank + policy state + its append-only event log."""

    def __init__(self, session_id: str, config: SessionConfig, bank: Bank):
        self.id = session_id
        self.config = config
        self.bank = bank
        self.policy = PolicyState.initial(config.configs)
        self.served_count = 0
        self.pending_question: str | None = None
        self.status = "active"
        self.events: list[SessionEvent] = []
        self.served_ids: set[str] = set()
        self.answers: list[tuple[QuestionRecord, bool]] = []

    # question ids are positions in the canonical t-sorted question array
    def question_by_id(self, qid: str) -> QuestionRecord:
        return self.bank.questions[int(qid[1:])]

    @property
    def answered_count(self) -> int:
        return self.policy.learner.answered_count

    def _append(self, kind: str, payload: dict) -> SessionEvent:
        ev = SessionEvent(seq=len(self.events), kind=kind, payload=payload, wall_time=_now())
        self.events.append(ev)
        return ev

    def _end(self) -> None:
        if self.status != "ended":
            self.status = "ended"
            self._append("session_ended", {"served_count": self.served_count})

    def next_question(self) -> ServedQuestion:
        """Choose a difficulty, serve the lowest-timestamp unserved question of
        that level (falling back to the nearest level, easier first), and
        persist the full decision trace."""
        if self.status == "ended":
            raise SessionEndedError(f"session {self.id} has ended")
        if self.pending_question is not None:
            raise ProtocolError(f"question {self.pending_question} is awaiting an answer")
        if self.served_count >= self.config.planned_questions:
            self._end()
            raise SessionEndedError(f"session {self.id} has ended")

        unserved = [i for i in range(len(self.bank.questions)) if f"q{i}" not in self.served_ids]
        if not unserved:
            self._end()
            raise SessionEndedError(f"bank exhausted for session {self.id}")

        seed = self.config.rng_seed + self.served_count
        level_before = self.policy.ladder.current_level
        self.policy, sampled, trace = choose_difficulty(self.policy, self.config.configs, seed)

        chosen = None
        for d in _FALLBACK_ORDER[sampled]:
            at_level = [i for i in unserved if self.bank.questions[i].d == d]
            if at_level:
                chosen = min(at_level, key=lambda i: (self.bank.questions[i].t, i))
                break
        assert chosen is not None
        qid = f"q{chosen}"
        rec = self.bank.questions[chosen]
        fallback = rec.d != sampled

        self.served_ids.add(qid)
        self.pending_question = qid
        self.served_count += 1
        # the commit happens while choosing, so the change event precedes the serve
        if self.policy.ladder.current_level != level_before:
            self._append(
                "level_changed",
                {"from": level_before.label, "to": self.policy.ladder.current_level.label},
            )
        self._append(
            "question_served",
            {
                "question_id": qid,
                "question": rec.as_dict(),
                "served_difficulty": rec.d.label,
                "fallback": fallback,
                "seed": seed,
                "trace": trace.as_dict(),
            },
        )
        return ServedQuestion(question_id=qid, question=rec, sampled=sampled, fallback=fallback)

    def submit_answer(self, question_id: str, choice: int, response_time: float) -> AnswerResult:
        if self.status == "ended":
            raise SessionEndedError(f"session {self.id} has ended")
        if self.pending_question is None:
            raise ConflictError("no question is pending (already answered?)")
        if question_id != self.pending_question:
            raise ConflictError(
                f"answer for {question_id!r} but {self.pending_question!r} is pending"
            )
        rec = self.question_by_id(question_id)
        if not isinstance(choice, int) or isinstance(choice, bool) or not 0 <= choice < len(rec.a.options):
            raise ValueError(f"choice must be in [0, {len(rec.a.options)}), got {choice!r}")
        if not isinstance(response_time, (int, float)) or not math.isfinite(response_time):
            raise ValueError(f"response_time must be a finite number, got {response_time!r}")
        response_time = min(max(0.0, float(response_time)), RESPONSE_TIME_CAP_FACTOR * self.config.time_limit)

        correct = choice == rec.a.correct_index
        outcome = AnswerOutcome(
            question_id=question_id,
            difficulty=rec.d,
            correct=correct,
            response_time=response_time,
            time_limit=self.config.time_limit,
        )
        self.policy, reward = policy_step(self.policy, outcome, self.config.configs)
        self.pending_question = None
        self.answers.append((rec, correct))
        self._append(
            "answer_submitted",
            {
                "question_id": question_id,
                "choice": choice,
                "response_time": response_time,
                "correct": correct,
                "reward": reward.as_dict(),
            },
        )
        if self.served_count >= self.config.planned_questions:
            self._end()
        return AnswerResult(
            correct=correct,
            correct_index=rec.a.correct_index,
            reward=reward,
            new_level=self.policy.ladder.current_level,
            state_snapshot=self.policy.learner.as_dict(),
            status=self.status,
            answered=self.answered_count,
            planned=self.config.planned_questions,
        )

    def state_view(self) -> dict:
        trace = self.policy.decision_trace
        return {
            "session_id": self.id,
            "status": self.status,
            "learner": self.policy.learner.as_dict(),
            "ladder": self.policy.ladder.as_dict(),
            "qtable": self.policy.qtable.as_dict(),
            "trace": trace.as_dict() if trace is not None else None,
            "progress": {"answered": self.answered_count, "planned": self.config.planned_questions},
        }


def create_session(config: SessionConfig, bank: Bank, session_id: str | None = None) -> Session:
    """Fresh session: cold learner, zeroed Q-table, ladder at Easy."""
    planned = config.planned_questions if config.planned_questions is not None else len(bank.questions)
    if not 1 <= planned <= len(bank.questions):
        raise ConfigError(
            f"planned_questions must be in [1, {len(bank.questions)}], got {planned}"
        )
    config = dataclasses.replace(
        config,
        planned_questions=planned,
        configs=dataclasses.replace(
            config.configs,
            blend=dataclasses.replace(config.configs.blend, planned_questions=planned),
        ),
    )
    session = Session(session_id or uuid.uuid4().hex[:12], config, bank)
    session._append(
        "created",
        {
            "session_id": session.id,
            "config": config.to_dict(),
            "bank": {
                "schema": bank.schema,
                "source_id": bank.source_id,
                "questions": [q.as_dict() for q in bank.questions],
            },
        },
    )
    return session


def replay(lines_or_events) -> Session:
    """Rebuild a session by re-running the same pure operations over its log.

    The log must start with `created` and have contiguous seq numbers. Served
    questions and level changes are re-derived and cross-checked against the
    logged payloads; any disagreement (or an unknown kind) is reported as
    corruption naming the offending seq. A prefix of a valid log replays to the
    corresponding earlier state.
    """
    events: list[SessionEvent] = []
    for i, item in enumerate(lines_or_events):
        if isinstance(item, SessionEvent):
            events.append(item)
        else:
            line = item.strip()
            if line:
                events.append(SessionEvent.from_json_line(line, i + 1))
    if not events:
        raise CorruptLogError(None, "empty event log")
    for i, ev in enumerate(events):
        if ev.seq != i:
            raise CorruptLogError(ev.seq, f"sequence gap: expected {i}")
        if ev.kind not in EVENT_KINDS:
            raise CorruptLogError(ev.seq, f"unknown event kind {ev.kind!r}")
    if events[0].kind != "created":
        raise CorruptLogError(events[0].seq, "log must start with a created event")

    payload = events[0].payload
    try:
        config = SessionConfig.from_dict(payload["config"])
        bank = Bank(
            schema=payload["bank"]["schema"],
            source_id=payload["bank"]["source_id"],
            questions=tuple(QuestionRecord.from_dict(q) for q in payload["bank"]["questions"]),
        )
        session = create_session(config, bank, session_id=payload["session_id"])
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptLogError(0, f"bad created payload: {e}") from None

    for ev in events[1:]:
        try:
            if ev.kind == "question_served":
                served = session.next_question()
                if served.question_id != ev.payload["question_id"]:
                    raise CorruptLogError(
                        ev.seq,
                        f"replayed question {served.question_id} != logged {ev.payload['question_id']}",
                    )
            elif ev.kind == "level_changed":
                # precedes the serve that commits it, so the ladder still shows "from"
                if session.policy.ladder.current_level.label != ev.payload["from"]:
                    raise CorruptLogError(ev.seq, "level change does not match replayed ladder")
            elif ev.kind == "answer_submitted":
                session.submit_answer(
                    ev.payload["question_id"], ev.payload["choice"], ev.payload["response_time"]
                )
            elif ev.kind == "session_ended":
                session._end()
        except SessionError as e:
            raise CorruptLogError(ev.seq, f"cannot apply {ev.kind}: {e}") from None
    # keep the source log (original wall times), not the re-derived copies
    session.events = events
    return session


# --- persistence ---

class SessionStore:
    """Banks, transcripts, and session event logs under one data directory.

    Live sessions stay in memory; a session found only on disk is rehydrated by
    replaying its log. Per-session mutations are serialized with a
    non-blocking lock: a second in-flight mutation is a conflict, not a wait.
    """

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "banks").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        (self.root / "transcripts").mkdir(parents=True, exist_ok=True)
        self._banks: dict[str, Bank] = {}
        self._sessions: dict[str, Session] = {}
        self._persisted: dict[str, int] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # -- banks --

    def put_bank(self, raw: bytes) -> str:
        from .pipeline import validate_bank

        bank = validate_bank(raw)
        canonical = assemble_bank(list(bank.questions), bank.source_id)
        bank_id = hashlib.sha256(canonical).hexdigest()[:12]
        (self.root / "banks" / f"{bank_id}.json").write_bytes(canonical)
        self._banks[bank_id] = bank
        return bank_id

    def get_bank(self, bank_id: str) -> Bank:
        from .pipeline import validate_bank

        if bank_id not in self._banks:
            path = self.root / "banks" / f"{bank_id}.json"
            if not path.exists():
                raise KeyError(bank_id)
            self._banks[bank_id] = validate_bank(path.read_bytes())
        return self._banks[bank_id]

    # -- transcripts --

    def put_transcript(self, bank_id: str, transcript: Transcript) -> None:
        doc = [{"t": seg.t, "u": seg.u} for seg in transcript.segments]
        path = self.root / "transcripts" / f"{bank_id}.json"
        path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")

    def get_transcript(self, bank_id: str) -> Transcript | None:
        path = self.root / "transcripts" / f"{bank_id}.json"
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        segments = tuple(
            TranscriptSegment(t=float(e["t"]), u=e["u"], index=i) for i, e in enumerate(doc)
        )
        return Transcript(segments=segments, source_id=bank_id)

    # -- sessions --

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _log_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.jsonl"

    def _persist(self, session: Session) -> None:
        done = self._persisted.get(session.id, 0)
        new = session.events[done:]
        if new:
            with self._log_path(session.id).open("a", encoding="utf-8") as fh:
                for ev in new:
                    fh.write(ev.to_json_line() + "\n")
            self._persisted[session.id] = len(session.events)

    def create_session(self, config: SessionConfig) -> Session:
        bank = self.get_bank(config.bank_id)
        session = create_session(config, bank)
        self._sessions[session.id] = session
        self._persist(session)
        return session

    def get_session(self, session_id: str) -> Session:
        if session_id not in self._sessions:
            path = self._log_path(session_id)
            if not path.exists():
                raise KeyError(session_id)
            with path.open(encoding="utf-8") as fh:
                session = replay(fh)
            self._sessions[session_id] = session
            self._persisted[session_id] = len(session.events)
        return self._sessions[session_id]

    def with_session(self, session_id: str, fn):
        """Run one mutating operation under the per-session lock and persist."""
        session = self.get_session(session_id)
        lock = self._lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise ConflictError(f"another operation is in flight for session {session_id}")
        try:
            result = fn(session)
            return result
        finally:
            self._persist(session)
            lock.release()

    def event_lines(self, session_id: str) -> str:
        session = self.get_session(session_id)
        self._persist(session)
        return self._log_path(session_id).read_text(encoding="utf-8")
