"""Command-line entry points: compile, serve, simulate, summarize."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .difficulty import Difficulty
from .pipeline import (
    BankValidationError,
    PipelineConfig,
    TranscriptParseError,
    assemble_bank,
    compile_bank,
    parse_transcript,
)
from .session import CorruptLogError, replay
from .sim import EpisodeConfig, SyntheticLearner, compare_policies
from .summary import LearnerProfile, compose_summary


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pal", description="Adaptive learning sessions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="compile a transcript into a question bank")
    p_compile.add_argument("--in", dest="infile", required=True, help="transcript file")
    p_compile.add_argument("--format", required=True, choices=["srt", "vtt", "json"])
    p_compile.add_argument("--out", required=True, help="bank file to write")
    p_compile.add_argument("--every-n", type=int, default=8, dest="every_n")
    p_compile.add_argument("--cues", help="file with one cue phrase per line")

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--data", default="pal-data", help="data directory (PAL_DATA_DIR overrides)")
    p_serve.add_argument("--host", default="127.0.0.1")

    p_sim = sub.add_parser("simulate", help="run synthetic-learner episodes")
    p_sim.add_argument("--policy", default="hybrid", help="hybrid|stat|rl|fixed:<d> (comma-separated)")
    p_sim.add_argument(
        "--learner",
        default="static:0",
        help="static:<theta>|improving:<theta>,<delta>|noisy:<theta>,<p> (comma-separated specs use ';')",
    )
    p_sim.add_argument("--n", type=int, default=40, help="questions per episode")
    p_sim.add_argument("--seeds", default="0..19", help="inclusive seed range a..b or single seed")
    p_sim.add_argument("--start-level", default="easy", choices=["easy", "medium", "hard"])
    p_sim.add_argument("--out", help="CSV file to write")

    p_sum = sub.add_parser("summarize", help="render a post-session summary from an event log")
    p_sum.add_argument("--session", required=True, help="session event log (JSONL)")
    p_sum.add_argument("--transcript", required=True, help="transcript file (.srt/.vtt/.json or plain text)")
    p_sum.add_argument("--profile", required=True, help='profile JSON: {"learner_id": .., "interests": [..]}')
    p_sum.add_argument("--out", required=True, help="text file to write")
    return parser


def _load_transcript(path: Path):
    suffix = path.suffix.lower().lstrip(".")
    data = path.read_bytes()
    if suffix in ("srt", "vtt", "json"):
        return parse_transcript(data, suffix, source_id=path.stem)
    # plain text: one synthetic segment; the summary engine re-segments anyway
    from .pipeline import Transcript, TranscriptSegment

    text = data.decode("utf-8").strip()
    segments = (TranscriptSegment(t=0.0, u=text, index=0),) if text else ()
    return Transcript(segments=segments, source_id=path.stem)


def _parse_seeds(spec: str) -> list[int]:
    if ".." in spec:
        a, b = spec.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(spec)]


def _parse_policy(spec: str, start_level: Difficulty) -> EpisodeConfig:
    if spec.startswith("fixed:"):
        return EpisodeConfig(
            mode="fixed",
            fixed_level=Difficulty.from_label(spec.split(":", 1)[1]),
            start_level=start_level,
        )
    return EpisodeConfig(mode=spec, start_level=start_level)


def _parse_learner(spec: str) -> SyntheticLearner:
    kind, _, rest = spec.partition(":")
    args = [float(x) for x in rest.split(",")] if rest else []
    if kind == "static" and len(args) == 1:
        return SyntheticLearner(true_theta=args[0])
    if kind == "improving" and len(args) == 2:
        return SyntheticLearner(true_theta=args[0], kind="improving", delta_per_correct=args[1])
    if kind == "noisy" and len(args) == 2:
        return SyntheticLearner(true_theta=args[0], kind="noisy", flip_prob=args[1])
    raise ValueError(f"bad learner spec {spec!r}")


def _cmd_compile(args) -> int:
    path = Path(args.infile)
    config = PipelineConfig(every_n=args.every_n)
    if args.cues:
        phrases = [
            line.strip().lower()
            for line in Path(args.cues).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        config = PipelineConfig(
            cue_phrases=tuple(phrases),
            every_n=args.every_n,
            min_sentence_tokens=config.min_sentence_tokens,
        )
    transcript = parse_transcript(path.read_bytes(), args.format, source_id=path.stem)
    records = compile_bank(transcript, config)
    Path(args.out).write_bytes(assemble_bank(records, transcript.source_id))
    print(f"wrote {len(records)} questions to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    data_dir = os.environ.get("PAL_DATA_DIR", args.data)
    app = create_app(data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_simulate(args) -> int:
    start = Difficulty.from_label(args.start_level)
    policies = [_parse_policy(s.strip(), start) for s in args.policy.split(",") if s.strip()]
    population = [_parse_learner(s.strip()) for s in args.learner.split(";") if s.strip()]
    seeds = _parse_seeds(args.seeds)
    report = compare_policies(policies, population, seeds, n_questions=args.n)
    sys.stdout.write(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    with open(args.session, encoding="utf-8") as fh:
        session = replay(fh)
    if session.status != "ended":
        print("error: session has not ended; no summary available", file=sys.stderr)
        return 2
    transcript = _load_transcript(Path(args.transcript))
    profile_doc = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    profile = LearnerProfile(
        learner_id=str(profile_doc.get("learner_id", session.config.learner_id)),
        interests=tuple(str(t) for t in profile_doc.get("interests", [])),
    )
    report = compose_summary(session.bank.questions, session.answers, transcript, profile)
    Path(args.out).write_text(report.rendered, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "compile": _cmd_compile,
        "serve": _cmd_serve,
        "simulate": _cmd_simulate,
        "summarize": _cmd_summarize,
    }
    try:
        return handlers[args.command](args)
    except (TranscriptParseError, BankValidationError, CorruptLogError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
