"""Post-session summary: semantic extraction plus mastery classification.

Stage 1 builds a semantic map of the lecture (sentence segmentation, hashed
bag-of-tokens embeddings, cosine top-k search) and pulls context-rich excerpts
for each concept. The report splits concepts into Territory Mastered and
Discovery Zone and ranks example sentences against the learner's interests.
Both the embedder and the final text synthesizer are pluggable contracts; the
defaults are deterministic so identical inputs render byte-identical text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np

from .hashing import stable_hash64
from .pipeline import QuestionRecord, Transcript

EMBED_DIM = 256
MASTERY_THRESHOLD = 0.75  # same bar as ladder promotion
DISCOVERY_THRESHOLD = 0.5

MASTERED_HEADER = "Territory Mastered"
DISCOVERY_HEADER = "Discovery Zone"
EXAMPLES_HEADER = "Examples for You"

# fixed 50-word stopword list; changing it changes every embedding
STOPWORDS = frozenset(
    """a an the and or but if then else of in on at by for with to from as is
    are was were be been being it its this that these those he she they we you
    i not no do does did so than too very can will just
    """.split()
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOPWORDS]


class Embedder(Protocol):
    """Sentence-to-vector contract; a learned model can replace the default."""

    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedBagEmbedder:
    """Deterministic hashed bag-of-tokens embedding.

    Each non-stopword token lands in one of `dim` buckets via a fixed 64-bit
    hash, signed +/-1 by a separate hash bit; the accumulated vector is
    L2-normalized. Stopword-only text embeds to the zero vector.
    """

    def __init__(self, dim: int = EMBED_DIM):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in _tokenize(text):
            h = stable_hash64(token)
            sign = 1.0 if (h >> 32) & 1 else -1.0
            vec[h % self.dim] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


_DEFAULT_EMBEDDER = HashedBagEmbedder()


def embed(text: str, embedder: Embedder | None = None) -> np.ndarray:
    return (embedder or _DEFAULT_EMBEDDER).embed(text)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


# --- sentence segmentation ---

@dataclass(frozen=True)
class Sentence:
    text: str
    start: int
    end: int


def segment_sentences(text: str, min_tokens: int = 3) -> list[Sentence]:
    """Split at ./!/? followed by whitespace + an uppercase letter (or text end).

    Decimal points and mid-sentence abbreviations survive because the split
    needs the whitespace-then-uppercase context. Sentences shorter than
    min_tokens merge into the previous sentence; character offsets refer to the
    original text.
    """
    boundaries: list[int] = []  # index one past the terminator
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in ".!?":
            continue
        j = i + 1
        while j < n and text[j].isspace():
            j += 1
        if j >= n or (j > i + 1 and text[j].isupper()):
            boundaries.append(i + 1)

    raw: list[tuple[int, int]] = []
    start = 0
    for b in boundaries:
        raw.append((start, b))
        start = b
    if text[start:].strip():
        raw.append((start, n))

    def trimmed(lo: int, hi: int) -> tuple[int, int]:
        while lo < hi and text[lo].isspace():
            lo += 1
        while hi > lo and text[hi - 1].isspace():
            hi -= 1
        return lo, hi

    sentences: list[Sentence] = []
    for lo, hi in raw:
        lo, hi = trimmed(lo, hi)
        if lo >= hi:
            continue
        piece = text[lo:hi]
        if sentences and len(_TOKEN_RE.findall(piece.lower())) < min_tokens:
            prev = sentences[-1]
            sentences[-1] = Sentence(text=text[prev.start:hi], start=prev.start, end=hi)
        else:
            sentences.append(Sentence(text=piece, start=lo, end=hi))
    return sentences


# --- similarity extraction ---

@dataclass(frozen=True)
class ExcerptSpan:
    """A contiguous run of sentences around one or more similarity hits."""

    first: int
    last: int
    text: str


def _sentence_vectors(sentences: Sequence[Sentence], embedder: Embedder) -> np.ndarray:
    if not sentences:
        return np.zeros((0, embedder.dim), dtype=np.float64)
    return np.stack([embedder.embed(s.text) for s in sentences])


def extract_relevant(
    concept: str,
    transcript: Transcript,
    k: int,
    embedder: Embedder | None = None,
) -> list[ExcerptSpan]:
    """Top-k cosine hits for the concept, each widened by one neighbor sentence.

    Ties break toward the earlier transcript position; zero-vector sentences
    are never hits; overlapping spans merge. Result is in transcript order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    emb = embedder or _DEFAULT_EMBEDDER
    sentences = segment_sentences(transcript.full_text())
    if not sentences:
        return []
    vectors = _sentence_vectors(sentences, emb)
    cvec = emb.embed(concept)
    scores = vectors @ cvec  # all rows unit or zero norm, so this is cosine
    candidates = [i for i in range(len(sentences)) if float(np.linalg.norm(vectors[i])) > 0.0]
    hits = sorted(candidates, key=lambda i: (-float(scores[i]), i))[:k]
    return _spans_from_hits(hits, sentences)


def _spans_from_hits(hits: Iterable[int], sentences: Sequence[Sentence]) -> list[ExcerptSpan]:
    n = len(sentences)
    ranges = sorted((max(0, i - 1), min(n - 1, i + 1)) for i in hits)
    merged: list[list[int]] = []
    for lo, hi in ranges:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [
        ExcerptSpan(first=lo, last=hi, text=" ".join(s.text for s in sentences[lo : hi + 1]))
        for lo, hi in merged
    ]


# --- mastery classification ---

@dataclass(frozen=True)
class ConceptStats:
    concept: str
    asked: int
    correct: int

    def __post_init__(self):
        if self.correct > self.asked:
            raise ValueError("correct cannot exceed asked")


def classify_concepts(
    stats: Sequence[ConceptStats],
) -> tuple[list[ConceptStats], list[ConceptStats], list[ConceptStats]]:
    """Partition into (mastered, discovery, neutral).

    Mastered needs at least two asks at >= 0.75 accuracy; discovery is anything
    unasked or below 0.5; the rest is neutral and stays out of the report.
    """
    mastered, discovery, neutral = [], [], []
    for s in stats:
        if s.asked == 0 or s.correct / s.asked < DISCOVERY_THRESHOLD:
            discovery.append(s)
        elif s.asked >= 2 and s.correct / s.asked >= MASTERY_THRESHOLD:
            mastered.append(s)
        else:
            neutral.append(s)
    return mastered, discovery, neutral


_WHAT_IS_RE = re.compile(r"^\s*what\s+is\s+(.+?)\s*\?\s*$", re.IGNORECASE)


def concept_of(stem: str) -> str:
    """The question's subject: the X of "What is X?", else the trimmed stem."""
    m = _WHAT_IS_RE.match(stem)
    if m:
        return m.group(1)
    return stem.strip().rstrip("?.!").strip()


def build_concept_stats(
    bank_questions: Sequence[QuestionRecord],
    answered: Sequence[tuple[QuestionRecord, bool]],
) -> list[ConceptStats]:
    """Aggregate per-concept tallies; unasked bank concepts appear with asked=0.

    Concepts group case-insensitively; the first-seen spelling is kept.
    """
    display: dict[str, str] = {}
    asked: dict[str, int] = {}
    correct: dict[str, int] = {}
    for rec in bank_questions:
        concept = concept_of(rec.q)
        key = concept.lower()
        display.setdefault(key, concept)
        asked.setdefault(key, 0)
        correct.setdefault(key, 0)
    for rec, was_correct in answered:
        key = concept_of(rec.q).lower()
        display.setdefault(key, concept_of(rec.q))
        asked[key] = asked.get(key, 0) + 1
        correct[key] = correct.get(key, 0) + (1 if was_correct else 0)
    return [ConceptStats(display[key], asked[key], correct[key]) for key in display]


# --- report composition ---

@dataclass(frozen=True)
class LearnerProfile:
    learner_id: str
    interests: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConceptSection:
    concept: str
    excerpts: tuple[str, ...]


@dataclass(frozen=True)
class SummaryReport:
    mastered: tuple[ConceptSection, ...]
    discovery: tuple[ConceptSection, ...]
    tailored_examples: tuple[str, ...]
    rendered: str


@dataclass(frozen=True)
class SummaryConfig:
    excerpt_k: int = 3
    interest_hits: int = 5
    max_examples: int = 5


class Synthesizer(Protocol):
    """Final rendering contract; an LLM-backed writer can replace the template."""

    def render(
        self,
        learner_id: str,
        mastered: Sequence[ConceptSection],
        discovery: Sequence[ConceptSection],
        examples: Sequence[str],
    ) -> str: ...


class TemplateSynthesizer:
    """Deterministic plain-text rendering with the two fixed section headers."""

    def render(self, learner_id, mastered, discovery, examples) -> str:
        lines = [f"Session summary for {learner_id}", ""]
        lines += [MASTERED_HEADER, "-" * len(MASTERED_HEADER)]
        lines += self._section_lines(mastered, "Nothing mastered yet; keep going.")
        lines += ["", DISCOVERY_HEADER, "-" * len(DISCOVERY_HEADER)]
        lines += self._section_lines(discovery, "Nothing left to discover here.")
        if examples:
            lines += ["", EXAMPLES_HEADER, "-" * len(EXAMPLES_HEADER)]
            lines += [f"- {ex}" for ex in examples]
        return "\n".join(lines) + "\n"

    @staticmethod
    def _section_lines(sections: Sequence[ConceptSection], empty_note: str) -> list[str]:
        if not sections:
            return [f"({empty_note})"]
        lines = []
        for sec in sections:
            lines.append(f"* {sec.concept}")
            lines.extend(f"    {ex}" for ex in sec.excerpts)
        return lines


def _rank_examples(
    sentences: Sequence[Sentence],
    vectors: np.ndarray,
    interests: Sequence[str],
    emb: Embedder,
    config: SummaryConfig,
) -> list[str]:
    if not interests or not sentences:
        return []
    tag_vecs = [emb.embed(tag) for tag in interests]
    nonzero = [i for i in range(len(sentences)) if float(np.linalg.norm(vectors[i])) > 0.0]
    candidates: set[int] = {
        i for i in range(len(sentences)) if "for example" in sentences[i].text.lower()
    }
    for tv in tag_vecs:
        scored = sorted(nonzero, key=lambda i: (-float(vectors[i] @ tv), i))
        candidates.update(i for i in scored[: config.interest_hits] if float(vectors[i] @ tv) > 0.0)
    best_score = {
        i: max(float(vectors[i] @ tv) for tv in tag_vecs) for i in candidates
    }
    ranked = sorted(candidates, key=lambda i: (-best_score[i], i))
    return [sentences[i].text for i in ranked[: config.max_examples]]


def compose_summary(
    bank_questions: Sequence[QuestionRecord],
    answered: Sequence[tuple[QuestionRecord, bool]],
    transcript: Transcript,
    profile: LearnerProfile,
    config: SummaryConfig | None = None,
    embedder: Embedder | None = None,
    synthesizer: Synthesizer | None = None,
) -> SummaryReport:
    """Build the full post-session report for a finished session."""
    cfg = config or SummaryConfig()
    emb = embedder or _DEFAULT_EMBEDDER
    synth = synthesizer or TemplateSynthesizer()

    stats = build_concept_stats(bank_questions, answered)
    mastered_stats, discovery_stats, _ = classify_concepts(stats)

    def sections(stat_list: list[ConceptStats]) -> tuple[ConceptSection, ...]:
        out = []
        for s in sorted(stat_list, key=lambda s: s.concept.lower()):
            spans = extract_relevant(s.concept, transcript, cfg.excerpt_k, emb)
            out.append(ConceptSection(s.concept, tuple(sp.text for sp in spans)))
        return tuple(out)

    mastered = sections(mastered_stats)
    discovery = sections(discovery_stats)

    sentences = segment_sentences(transcript.full_text())
    vectors = _sentence_vectors(sentences, emb)
    examples = tuple(_rank_examples(sentences, vectors, profile.interests, emb, cfg))

    rendered = synth.render(profile.learner_id, mastered, discovery, examples)
    return SummaryReport(
        mastered=mastered,
        discovery=discovery,
        tailored_examples=examples,
        rendered=rendered,
    )
