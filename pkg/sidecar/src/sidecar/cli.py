"""Sidecar CLI: annotate | embed | score | answer.

Inputs are plain text (annotate) or tab-separated ``<id>\\t<text>`` files;
outputs are the interchange files the main toolkit loads. All writes are
atomic (temp file + rename) so a crashed run never leaves a partial file.

Exit codes: 0 success, 1 input error or unavailable model.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .parser import annotate_text
from .textproc import question_hash
from .vectors import embed_text, extract_answer, score_sentence

BUILTIN_MODELS = {
    "annotate": "builtin-en",
    "embed": "builtin-hash",
    "score": "builtin-lexical",
    "answer": "builtin-extractive",
}


class SidecarError(Exception):
    pass


def _atomic_write(path: str | Path, payload: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_model(command: str, model: str) -> str:
    """Accept the builtin model; direct toolkit ids to their installers."""
    if model == BUILTIN_MODELS[command]:
        return model
    if model.startswith("stanza:"):
        try:
            import stanza  # noqa: F401
        except ImportError:
            raise SidecarError(
                f"model {model!r} needs the stanza toolkit; install it and download"
                f" its English models, or use --model {BUILTIN_MODELS[command]}"
            )
        raise SidecarError(
            f"model {model!r} is recognized but no stanza backend is wired in"
            f" this build; use --model {BUILTIN_MODELS[command]}"
        )
    if model.startswith("hf:"):
        raise SidecarError(
            f"model {model!r} needs downloadable transformer weights, which this"
            f" environment does not provide; use --model {BUILTIN_MODELS[command]}"
        )
    raise SidecarError(
        f"unknown model {model!r} for {command}; available: {BUILTIN_MODELS[command]},"
        " stanza:<name>, hf:<name>"
    )


def _read_tsv_pairs(path: Path, what: str) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise SidecarError(f"{what} line {lineno}: expected <id>\\t<text>")
        item_id, _, text = line.partition("\t")
        pairs.append((item_id, text))
    return pairs


def cmd_annotate(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    _resolve_model("annotate", args.model)
    _atomic_write(args.output, annotate_text(text))
    return 0


def cmd_embed(args) -> int:
    _resolve_model("embed", args.model)
    pairs = _read_tsv_pairs(Path(args.input), "segment")
    lines = [f"dim={args.dim}"]
    for segment_id, text in pairs:
        vector = embed_text(text, args.dim)
        lines.append(segment_id + "\t" + " ".join(f"{x:.6f}" for x in vector))
    _atomic_write(args.output, "\n".join(lines) + "\n")
    return 0


def cmd_score(args) -> int:
    _resolve_model("score", args.model)
    pairs = _read_tsv_pairs(Path(args.input), "sentence")
    qhash = question_hash(args.question)
    lines = [
        f"{qhash}\t{sent_id}\t{score_sentence(args.question, text)}"
        for sent_id, text in pairs
    ]
    _atomic_write(args.output, "\n".join(lines) + ("\n" if lines else ""))
    return 0


def cmd_answer(args) -> int:
    _resolve_model("answer", args.model)
    pairs = _read_tsv_pairs(Path(args.input), "span")
    qhash = question_hash(args.question)
    lines = []
    for span_id, text in pairs:
        start, end, confidence = extract_answer(args.question, text, args.max_answer_chars)
        lines.append(f"{qhash}\t{span_id}\t{start}\t{end}\t{confidence}")
    _atomic_write(args.output, "\n".join(lines) + ("\n" if lines else ""))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidecar",
        description="Produce annotation/embedding/score/answer files for the main toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="text file -> 10-column dependency annotations")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", default=BUILTIN_MODELS["annotate"])
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("embed", help="<id>\\t<text> file -> embedding table")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--model", default=BUILTIN_MODELS["embed"])
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("score", help="question + <sent_id>\\t<text> file -> score file")
    p.add_argument("--question", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", default=BUILTIN_MODELS["score"])
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("answer", help="question + <span_id>\\t<text> file -> answer file")
    p.add_argument("--question", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--max-answer-chars", type=int, default=512)
    p.add_argument("--model", default=BUILTIN_MODELS["answer"])
    p.set_defaults(func=cmd_answer)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SidecarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
