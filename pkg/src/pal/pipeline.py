"""Transcript-to-question-bank pipeline.

Parses SubRip / WebVTT / plain-JSON transcripts, scans for candidate question
points via linguistic cues or an every-N fallback, generates cloze questions
through a pluggable generator contract (the default backend is rule-based and
model-free), rates difficulty by keyword rules, and serializes the bank to a
canonical, byte-stable JSON file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Protocol

from .difficulty import Difficulty
from .hashing import stable_hash64


class TranscriptParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TranscriptOrderError(TranscriptParseError):
    """Cue start times decreased (or a cue ends before it starts)."""


class BankValidationError(ValueError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        summary = "; ".join(f"{v.path}: {v.reason}" for v in violations[:5])
        if len(violations) > 5:
            summary += f" (+{len(violations) - 5} more)"
        super().__init__(f"bank failed validation: {summary}")


@dataclass(frozen=True)
class Violation:
    path: str
    reason: str

    def as_dict(self) -> dict[str, str]:
        return {"path": self.path, "reason": self.reason}


@dataclass(frozen=True)
class TranscriptSegment:
    t: float
    u: str
    index: int


@dataclass(frozen=True)
class Transcript:
    segments: tuple[TranscriptSegment, ...]
    source_id: str

    def full_text(self) -> str:
        return " ".join(seg.u for seg in self.segments)


@dataclass(frozen=True)
class CandidatePoint:
    timestamp: float
    sentence_index: int
    trigger: str  # "cue" or "every_n"
    cue_phrase: str | None = None


DEFAULT_CUE_PHRASES = (
    "is defined as",
    "is called",
    "refers to",
    "means that",
    "in other words",
    "for example",
    "the key idea",
    "consists of",
)


@dataclass(frozen=True)
class PipelineConfig:
    cue_phrases: tuple[str, ...] = DEFAULT_CUE_PHRASES
    every_n: int = 8
    min_sentence_tokens: int = 3

    def __post_init__(self):
        if self.every_n < 1:
            raise ValueError("every_n must be >= 1")
        if not self.cue_phrases:
            raise ValueError("cue_phrases must be non-empty")


@dataclass(frozen=True)
class AnswerKey:
    options: tuple[str, ...]
    correct_index: int


@dataclass(frozen=True)
class QuestionRecord:
    q: str
    a: AnswerKey
    d: Difficulty
    t: float
    c: str

    def __post_init__(self):
        if len(self.a.options) < 2:
            raise ValueError("need at least two options")
        if len(set(self.a.options)) != len(self.a.options):
            raise ValueError("options must be pairwise distinct")
        if not 0 <= self.a.correct_index < len(self.a.options):
            raise ValueError("correct_index out of range")

    @property
    def correct_answer(self) -> str:
        return self.a.options[self.a.correct_index]

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "a": {"options": list(self.a.options), "correct_index": self.a.correct_index},
            "d": self.d.label,
            "t": round(self.t, 3),
            "c": self.c,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuestionRecord":
        return cls(
            q=d["q"],
            a=AnswerKey(tuple(d["a"]["options"]), d["a"]["correct_index"]),
            d=Difficulty.from_label(d["d"]),
            t=float(d["t"]),
            c=d["c"],
        )


BANK_SCHEMA = "pal-bank/1"


@dataclass(frozen=True)
class Bank:
    source_id: str
    questions: tuple[QuestionRecord, ...]
    schema: str = BANK_SCHEMA


# --- transcript parsing ---

_SRT_TIME = re.compile(r"^(\d+):([0-5]\d):([0-5]\d),(\d{1,3})$")
_VTT_TIME = re.compile(r"^(?:(\d+):)?([0-5]\d):([0-5]\d)\.(\d{3})$")
_ARROW = re.compile(r"\s-->\s")


def _parse_srt_time(text: str, line_no: int) -> float:
    m = _SRT_TIME.match(text.strip())
    if not m:
        raise TranscriptParseError(f"malformed SRT timestamp {text.strip()!r}", line_no)
    h, mi, s, ms = m.groups()
    return int(h) * 3600 + int(mi) * 60 + int(s) + int(ms.ljust(3, "0")) / 1000.0


def _parse_vtt_time(text: str, line_no: int) -> float:
    m = _VTT_TIME.match(text.strip())
    if not m:
        raise TranscriptParseError(f"malformed VTT timestamp {text.strip()!r}", line_no)
    h, mi, s, ms = m.groups()
    return (int(h) if h else 0) * 3600 + int(mi) * 60 + int(s) + int(ms) / 1000.0


def _parse_cue_blocks(lines: list[str], time_parser, skip_headers: bool) -> list[tuple[float, float, str, int]]:
    """Shared SRT/VTT cue walk: returns (start, end, text, line_no) per cue."""
    cues = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i].strip().lstrip("﻿")
        if not line:
            i += 1
            continue
        if skip_headers and (line.startswith("WEBVTT") or line.startswith("NOTE") or line.startswith("STYLE")):
            # skip the whole header/comment block
            while i < n and lines[i].strip():
                i += 1
            continue
        if _ARROW.search(line) is None:
            # cue identifier (SRT index or VTT id); timing must follow
            i += 1
            if i >= n or _ARROW.search(lines[i]) is None:
                raise TranscriptParseError(f"expected a timing line after {line!r}", i + 1)
            line = lines[i].strip()
        timing_line_no = i + 1
        parts = _ARROW.split(line)
        if len(parts) != 2:
            raise TranscriptParseError(f"malformed timing line {line!r}", timing_line_no)
        # VTT allows settings after the end time
        end_text = parts[1].strip().split(" ")[0]
        start = time_parser(parts[0], timing_line_no)
        end = time_parser(end_text, timing_line_no)
        if end < start:
            raise TranscriptOrderError(f"cue ends before it starts ({parts[0].strip()} --> {end_text})", timing_line_no)
        i += 1
        text_lines = []
        while i < n and lines[i].strip():
            text_lines.append(lines[i].strip())
            i += 1
        cues.append((start, end, " ".join(text_lines), timing_line_no))
    return cues


def parse_transcript(data: bytes, format: str, source_id: str = "transcript") -> Transcript:
    """Decode a transcript file into ordered (t, u) segments.

    Formats: "srt", "vtt", and "json" (a plain list of {"t": seconds, "u": text}
    objects). Multi-line cue text is joined with single spaces; cues that are
    empty after trimming are dropped. Start times must be non-decreasing.
    """
    fmt = format.lower()
    if fmt == "plain_json":
        fmt = "json"
    if fmt not in ("srt", "vtt", "json"):
        raise ValueError(f"unknown transcript format: {format!r}")

    text = data.decode("utf-8")
    if not text.strip():
        return Transcript(segments=(), source_id=source_id)

    raw: list[tuple[float, str, int | None]] = []
    if fmt == "json":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise TranscriptParseError(f"invalid JSON: {e.msg}", e.lineno) from None
        if not isinstance(payload, list):
            raise TranscriptParseError("expected a JSON list of {t, u} objects")
        for i, entry in enumerate(payload):
            if not isinstance(entry, dict) or "t" not in entry or "u" not in entry:
                raise TranscriptParseError(f"entry {i} is not a {{t, u}} object")
            t = entry["t"]
            if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
                raise TranscriptParseError(f"entry {i} has a bad timestamp {t!r}")
            raw.append((float(t), str(entry["u"]), None))
    else:
        lines = text.split("\n")
        parser = _parse_srt_time if fmt == "srt" else _parse_vtt_time
        for start, _end, cue_text, line_no in _parse_cue_blocks(lines, parser, skip_headers=(fmt == "vtt")):
            raw.append((start, cue_text, line_no))

    segments = []
    prev_t = None
    for t, u, line_no in raw:
        u = u.strip()
        if not u:
            continue
        if prev_t is not None and t < prev_t:
            raise TranscriptOrderError(f"start time {t} decreases below {prev_t}", line_no)
        prev_t = t
        segments.append(TranscriptSegment(t=t, u=u, index=len(segments)))
    return Transcript(segments=tuple(segments), source_id=source_id)


# --- candidate points ---

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _token_count(text: str) -> int:
    return len(_TOKEN_RE.findall(text.lower()))


def find_candidate_points(transcript: Transcript, config: PipelineConfig) -> list[CandidatePoint]:
    """Scan segments for cue phrases, with an every-N fallback between hits.

    A cue match emits a point and resets the every-N counter, so dense-cue
    regions are not double-sampled. Sentences below min_sentence_tokens never
    become points; an every-N hit on such a sentence is deferred to the next
    eligible one.
    """
    points = []
    since_point = 0
    for seg in transcript.segments:
        lowered = seg.u.lower()
        eligible = _token_count(seg.u) >= config.min_sentence_tokens
        cue = next((c for c in config.cue_phrases if c in lowered), None) if eligible else None
        if cue is not None:
            points.append(
                CandidatePoint(timestamp=seg.t, sentence_index=seg.index, trigger="cue", cue_phrase=cue)
            )
            since_point = 0
            continue
        since_point += 1
        if since_point >= config.every_n and eligible:
            points.append(
                CandidatePoint(timestamp=seg.t, sentence_index=seg.index, trigger="every_n")
            )
            since_point = 0
    return points


# --- difficulty rating ---

_HARD_RE = re.compile(r"\b(apply|predict)\b")
_MEDIUM_RE = re.compile(r"\b(why|how)\b")
_EASY_RE = re.compile(r"\bwhat is\b")


def rate_difficulty(stem: str) -> Difficulty:
    """Keyword rules, hardest first: apply/predict > why/how > "what is" > Medium fallback."""
    lowered = stem.lower()
    if _HARD_RE.search(lowered):
        return Difficulty.HARD
    if _MEDIUM_RE.search(lowered):
        return Difficulty.MEDIUM
    if _EASY_RE.search(lowered):
        return Difficulty.EASY
    return Difficulty.MEDIUM


# --- question generation ---

class QuestionGenerator(Protocol):
    """Generator contract: produce a record for a candidate point, or skip (None).

    An LLM-backed generator can slot in here; the default backend is a
    deterministic rule-based cloze over definitional sentences.
    """

    def generate(
        self,
        point: CandidatePoint,
        transcript: Transcript,
        bank_so_far: list[QuestionRecord],
    ) -> QuestionRecord | None: ...


# cue -> (subject, answer) split: text before the cue names the concept, text after defines it
_DEFINITIONAL_CUES = ("is defined as", "is called", "refers to", "means that", "consists of")
_LEADING_ARTICLE = re.compile(r"^(the|a|an)\s+", re.IGNORECASE)
_MAX_DISTRACTORS = 3


@dataclass(frozen=True)
class ClozeGenerator:
    """Default backend: template cloze with distractors from sibling answers.

    The distractor pool is the correct answers of questions already generated;
    `extra_answers` lets the compile driver widen it with answers extracted
    from the transcript's other definitional sentences, which is what lets the
    first question of a fresh transcript exist at all.
    """

    max_distractors: int = _MAX_DISTRACTORS
    extra_answers: tuple[str, ...] = ()

    def generate(
        self,
        point: CandidatePoint,
        transcript: Transcript,
        bank_so_far: list[QuestionRecord],
    ) -> QuestionRecord | None:
        sentence = transcript.segments[point.sentence_index].u
        split = extract_definition(sentence)
        if split is None:
            return None
        subject, answer = split
        stem = f"What is {subject}?"
        distractors = _sibling_distractors(bank_so_far, answer, self.max_distractors)
        for extra in self.extra_answers:
            if len(distractors) >= self.max_distractors:
                break
            if extra != answer and extra not in distractors:
                distractors.append(extra)
        if not distractors:
            return None
        options = list(distractors)
        insert_at = stable_hash64(stem) % (len(options) + 1)
        options.insert(insert_at, answer)
        return QuestionRecord(
            q=stem,
            a=AnswerKey(options=tuple(options), correct_index=insert_at),
            d=rate_difficulty(stem),
            t=point.timestamp,
            c=_context_window(transcript, point.sentence_index),
        )


def extract_definition(sentence: str) -> tuple[str, str] | None:
    """Split a definitional sentence into (subject, definition), or None."""
    lowered = sentence.lower()
    for cue in _DEFINITIONAL_CUES:
        idx = lowered.find(cue)
        if idx <= 0:
            continue
        subject = _LEADING_ARTICLE.sub("", sentence[:idx].strip()).strip(" ,;:")
        answer = sentence[idx + len(cue) :].strip().rstrip(".!?").strip()
        if subject and answer:
            return _decapitalize(subject), answer
    return None


def _decapitalize(subject: str) -> str:
    # lowercase a sentence-initial capital, but leave acronyms and CamelCase alone
    first = subject.split()[0]
    if first[0].isupper() and first[1:].islower():
        return subject[0].lower() + subject[1:]
    return subject


def _sibling_distractors(bank_so_far: list[QuestionRecord], answer: str, limit: int) -> list[str]:
    pool = []
    for rec in bank_so_far:
        candidate = rec.correct_answer
        if candidate != answer and candidate not in pool:
            pool.append(candidate)
    return pool[-limit:]


def _context_window(transcript: Transcript, index: int) -> str:
    lo = max(0, index - 1)
    hi = min(len(transcript.segments), index + 2)
    return " ".join(seg.u for seg in transcript.segments[lo:hi])


def generate_question(
    point: CandidatePoint,
    transcript: Transcript,
    bank_so_far: list[QuestionRecord],
    generator: QuestionGenerator | None = None,
) -> QuestionRecord | None:
    gen = generator if generator is not None else ClozeGenerator()
    return gen.generate(point, transcript, bank_so_far)


def compile_bank(
    transcript: Transcript,
    config: PipelineConfig | None = None,
    generator: QuestionGenerator | None = None,
) -> list[QuestionRecord]:
    """Run the whole pipeline: candidate points -> questions (skips drop out).

    With the default backend, each point's distractor pool is widened with the
    answers extracted from the transcript's other definitional sentences;
    without that the empty starting bank could never produce a first question.
    A custom generator is used as given.
    """
    cfg = config if config is not None else PipelineConfig()
    points = find_candidate_points(transcript, cfg)
    records: list[QuestionRecord] = []
    for point in points:
        gen = generator
        if gen is None:
            siblings = tuple(
                definition[1]
                for other in points
                if other.sentence_index != point.sentence_index
                and (definition := extract_definition(transcript.segments[other.sentence_index].u))
            )
            gen = ClozeGenerator(extra_answers=siblings)
        rec = generate_question(point, transcript, records, gen)
        if rec is not None:
            records.append(rec)
    return records


# --- bank serialization ---

def _jstr(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _render_question(rec: QuestionRecord) -> str:
    options = ", ".join(_jstr(o) for o in rec.a.options)
    return (
        f'{{"q": {_jstr(rec.q)}, '
        f'"a": {{"options": [{options}], "correct_index": {rec.a.correct_index}}}, '
        f'"d": {_jstr(rec.d.label)}, '
        f'"t": {rec.t:.3f}, '
        f'"c": {_jstr(rec.c)}}}'
    )


def assemble_bank(records: list[QuestionRecord], source_id: str) -> bytes:
    """Serialize records to the canonical bank file.

    Questions are sorted by (3-decimal) timestamp with a stable tie order, keys
    are emitted in the fixed q/a/d/t/c order, and timestamps always carry three
    decimals, so identical input is byte-identical output.
    """
    ordered = sorted(records, key=lambda r: round(r.t, 3))
    seen = set()
    for rec in ordered:
        key = (f"{rec.t:.3f}", rec.q)
        if key in seen:
            raise ValueError(f"duplicate question at t={key[0]}: {rec.q!r}")
        seen.add(key)
    lines = [
        "{",
        f'  "schema": {_jstr(BANK_SCHEMA)},',
        f'  "source_id": {_jstr(source_id)},',
    ]
    if ordered:
        lines.append('  "questions": [')
        for i, rec in enumerate(ordered):
            comma = "," if i < len(ordered) - 1 else ""
            lines.append(f"    {_render_question(rec)}{comma}")
        lines.append("  ]")
    else:
        lines.append('  "questions": []')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


_VALID_LABELS = ("easy", "medium", "hard")


def validate_bank(data: bytes) -> Bank:
    """Parse and fully check a bank file; collects every violation before failing.

    An unknown schema version short-circuits (one version error, no field
    checks). On success returns the typed bank.
    """
    violations: list[Violation] = []
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BankValidationError([Violation("$", f"invalid JSON: {e}")]) from None
    if not isinstance(doc, dict):
        raise BankValidationError([Violation("$", "top level must be an object")])
    if doc.get("schema") != BANK_SCHEMA:
        raise BankValidationError(
            [Violation("$.schema", f"unknown schema version {doc.get('schema')!r}")]
        )
    if not isinstance(doc.get("source_id"), str):
        violations.append(Violation("$.source_id", "must be a string"))
    questions = doc.get("questions")
    if not isinstance(questions, list):
        violations.append(Violation("$.questions", "must be a list"))
        raise BankValidationError(violations)

    prev_t = None
    seen_keys = set()
    for i, item in enumerate(questions):
        path = f"questions[{i}]"
        if not isinstance(item, dict):
            violations.append(Violation(path, "must be an object"))
            continue
        q = item.get("q")
        if not isinstance(q, str) or not q.strip():
            violations.append(Violation(f"{path}.q", "must be a non-empty string"))
        a = item.get("a")
        options = None
        if not isinstance(a, dict):
            violations.append(Violation(f"{path}.a", "must be an object"))
        else:
            options = a.get("options")
            if (
                not isinstance(options, list)
                or len(options) < 2
                or not all(isinstance(o, str) for o in options)
            ):
                violations.append(Violation(f"{path}.a.options", "must be a list of >= 2 strings"))
                options = None
            elif len(set(options)) != len(options):
                violations.append(Violation(f"{path}.a.options", "options must be pairwise distinct"))
            ci = a.get("correct_index")
            if not isinstance(ci, int) or isinstance(ci, bool) or ci < 0:
                violations.append(Violation(f"{path}.a.correct_index", "must be a non-negative integer"))
            elif options is not None and ci >= len(options):
                violations.append(
                    Violation(f"{path}.a.correct_index", f"index {ci} out of range for {len(options)} options")
                )
        if item.get("d") not in _VALID_LABELS:
            violations.append(Violation(f"{path}.d", f"must be one of {_VALID_LABELS}"))
        t = item.get("t")
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
            violations.append(Violation(f"{path}.t", "must be a non-negative number"))
        else:
            if prev_t is not None and t < prev_t:
                violations.append(Violation(f"{path}.t", f"timestamp {t} not in ascending order"))
            prev_t = t
            key = (f"{float(t):.3f}", q)
            if key in seen_keys:
                violations.append(Violation(path, f"duplicate (t, q) pair at t={key[0]}"))
            seen_keys.add(key)
        if not isinstance(item.get("c"), str):
            violations.append(Violation(f"{path}.c", "must be a string"))

    if violations:
        raise BankValidationError(violations)
    return Bank(
        schema=BANK_SCHEMA,
        source_id=doc["source_id"],
        questions=tuple(QuestionRecord.from_dict(item) for item in questions),
    )
