"""Command-line surface: ingest, qa, check, classify, eval.

Exit codes: 0 success; 1 input or usage error; 2 violations found when
--fail-on-violation is set. All commands are batch-style and deterministic
for fixed inputs — external model artifacts enter only as files, never as
live calls.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import classify as classify_mod
from . import compliance, corpus, criteria, evaluation, qa, report
from .annotations import load_annotations
from .errors import RegcheckError
from .resources import default_stopwords, load_wordlist
from .srl import load_gold_frames, load_marker_file
from .vectorize import load_embeddings_file

_CONFIG_KEYS = {
    "bundle", "annotations", "embeddings", "requirements", "rules", "concepts",
    "predictions", "gold_frames", "synonyms", "aliases", "markers", "stopwords",
    "abbreviations", "theta", "tau_text", "tau_sat", "centroid_threshold",
    "k", "budget", "fail_on_violation", "no_gate", "per_segment_rules",
}


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise RegcheckError(f"unknown config keys: {unknown}")
    return data


def _setting(args, config: dict, name: str, default):
    """CLI flag beats config file beats default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise RegcheckError(f"{what} file not found: {path}")
    return p


def _digest(paths: list[Path]) -> str:
    h = hashlib.sha256()
    for p in sorted(paths):
        h.update(p.name.encode("utf-8"))
        h.update(p.read_bytes())
    return "sha256:" + h.hexdigest()[:16]


def _generated_at(stamp: bool) -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    if stamp:
        return datetime.now(tz=timezone.utc).isoformat()
    return None


def _stopwords(args, config) -> frozenset[str]:
    path = _setting(args, config, "stopwords", None)
    return load_wordlist(_require_file(path, "stopword")) if path else default_stopwords()


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_ingest(args) -> int:
    config = _read_config(args.config)
    text_path = _require_file(args.text, "document text")
    meta_path = _require_file(args.metadata, "metadata")
    metadata = corpus.load_metadata_file(meta_path)
    abbreviations_path = _setting(args, config, "abbreviations", None)
    abbreviations = load_wordlist(abbreviations_path) if abbreviations_path else None
    doc = corpus.load_document(
        text_path.read_text(encoding="utf-8"),
        metadata,
        stopwords=_stopwords(args, config),
        abbreviations=abbreviations,
    )
    budget = int(_setting(args, config, "budget", corpus.DEFAULT_TOKEN_BUDGET))
    spans = corpus.partition_spans(doc, budget)
    annotations_path = _setting(args, config, "annotations", None)
    if annotations_path:
        annotated = load_annotations(_require_file(annotations_path, "annotation"))
        known = {s.sent_id for s in doc.sentences}
        stray = sorted(a.sent_id for a in annotated if a.sent_id not in known)
        if stray:
            raise RegcheckError(f"annotations reference unknown sentence ids: {stray}")
    corpus.save_bundle(args.out, doc, spans, budget)
    print(
        f"wrote {args.out}: {len(doc.articles)} article(s), "
        f"{len(doc.sentences)} sentence(s), {len(spans)} span(s)"
    )
    return 0


def _make_scorer(name: str, doc: corpus.Document):
    if name == "bm25":
        return qa.Bm25SentenceScorer(doc)
    if name.startswith("file:"):
        return qa.FileScorer.from_path(_require_file(name[5:], "score"))
    raise RegcheckError(f"unknown scorer {name!r} (expected 'bm25' or 'file:<path>')")


def _make_extractor(name: str, scorer):
    if name == "best-sentence":
        return qa.BaselineExtractor(scorer)
    if name.startswith("file:"):
        return qa.FileExtractor.from_path(_require_file(name[5:], "answer"))
    raise RegcheckError(f"unknown extractor {name!r} (expected 'best-sentence' or 'file:<path>')")


def cmd_qa(args) -> int:
    config = _read_config(args.config)
    doc, spans, _ = corpus.load_bundle(_require_file(args.bundle, "bundle"))
    if not spans:
        raise RegcheckError("bundle contains no context spans")
    question = qa.make_question(args.question, _stopwords(args, config))
    scorer = _make_scorer(args.scorer, doc)
    extractor = _make_extractor(args.extractor, scorer)
    k = int(_setting(args, config, "k", 3))
    ranked = qa.top_k_spans(question, spans, doc, k, scorer)
    warn = qa.all_zero_relevance(ranked)
    span_by_id = {s.span_id: s for s in spans}

    results = []
    for r in ranked:
        entry = {
            "span_id": r.span_id,
            "relevance": round(r.relevance, 6),
            "best_sentence_id": r.best_sentence_id,
            "answer": None,
        }
        try:
            answer = qa.extract_answer(question, span_by_id[r.span_id], doc, extractor)
            entry["answer"] = {
                "text": answer.text,
                "char_range": list(answer.char_range),
                "confidence": round(answer.confidence, 6),
            }
        except RegcheckError as exc:
            entry["answer_error"] = str(exc)
        results.append(entry)

    payload = {
        "question": question.text,
        "question_hash": question.hash,
        "k": k,
        "zero_relevance_warning": warn,
        "spans": results,
    }
    if warn:
        print("warning: every span scored 0; results are unranked noise", file=sys.stderr)
    for entry in results:
        answer = entry.get("answer")
        summary = answer["text"] if answer else entry.get("answer_error", "-")
        print(f"{entry['span_id']}\t{entry['relevance']:.4f}\t{summary}")
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_check(args) -> int:
    config = _read_config(args.config)
    inputs: list[Path] = []

    def tracked(path: str, what: str) -> Path:
        p = _require_file(path, what)
        inputs.append(p)
        return p

    doc, _, _ = corpus.load_bundle(tracked(args.bundle, "bundle"))
    stopwords = _stopwords(args, config)
    requirements = criteria.load_requirements_file(tracked(args.requirements, "requirements"))

    concept_model = None
    concepts_path = _setting(args, config, "concepts", None)
    if concepts_path:
        concept_model = classify_mod.load_concept_model_file(tracked(concepts_path, "concept model"))

    rules = []
    rules_path = _setting(args, config, "rules", None)
    if rules_path:
        rules = criteria.load_rules_file(tracked(rules_path, "rule"), concept_model)

    predictions = None
    predictions_path = _setting(args, config, "predictions", None)
    if predictions_path:
        predictions = classify_mod.load_predictions_file(
            tracked(predictions_path, "prediction"), concept_model
        )

    aliases = None
    aliases_path = _setting(args, config, "aliases", None)
    if aliases_path:
        aliases = compliance.load_aliases_file(tracked(aliases_path, "alias"))
    synonyms_path = _setting(args, config, "synonyms", None)
    if synonyms_path:
        synonyms = compliance.load_synonyms_file(tracked(synonyms_path, "synonym"), aliases)
    else:
        synonyms = compliance.SynonymLexicon(aliases=aliases)

    marker_lexicon = None
    markers_path = _setting(args, config, "markers", None)
    if markers_path:
        marker_lexicon = load_marker_file(tracked(markers_path, "marker"))

    annotated = ()
    annotations_path = _setting(args, config, "annotations", None)
    if annotations_path:
        annotated = load_annotations(tracked(annotations_path, "annotation"))

    gold_frames = None
    gold_path = _setting(args, config, "gold_frames", None)
    if gold_path:
        gold_frames = load_gold_frames(tracked(gold_path, "gold frame"))

    embeddings = None
    embeddings_path = _setting(args, config, "embeddings", None)
    if embeddings_path:
        embeddings = load_embeddings_file(tracked(embeddings_path, "embedding"))

    run_config = compliance.ComplianceConfig(
        theta=float(_setting(args, config, "theta", 0.5)),
        tau_text=float(_setting(args, config, "tau_text", 0.5)),
        tau_sat=float(_setting(args, config, "tau_sat", 0.8)),
        centroid_threshold=float(_setting(args, config, "centroid_threshold", 0.5)),
        gate_on_relevance=not bool(_setting(args, config, "no_gate", False)),
        per_segment_rules=bool(_setting(args, config, "per_segment_rules", False)),
    )

    diagnostics: list[str] = []
    segments = compliance.analyze_segments(doc, annotated, gold_frames, marker_lexicon, diagnostics)
    result = compliance.check_compliance(
        doc,
        segments,
        requirements,
        rules,
        predictions,
        run_config,
        synonyms=synonyms,
        concept_model=concept_model,
        embeddings=embeddings,
        stopwords=stopwords,
        generated_at=_generated_at(args.stamp),
        input_digest=_digest(inputs),
    )
    result = compliance.ComplianceReport(
        doc_id=result.doc_id,
        config=result.config,
        requirement_results=result.requirement_results,
        rule_verdicts=result.rule_verdicts,
        diagnostics=tuple(diagnostics) + result.diagnostics,
        generated_at=result.generated_at,
        input_digest=result.input_digest,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(result.to_json(), encoding="utf-8")
    report_dict = result.to_dict()
    report.render_report_files(report_dict, out_dir, figures=not args.no_figures)

    violations = result.violation_count
    print(f"wrote {report_path} ({violations} violation(s))")
    fail_on_violation = bool(_setting(args, config, "fail_on_violation", False))
    if fail_on_violation and violations > 0:
        return 2
    return 0


def cmd_classify(args) -> int:
    config = _read_config(args.config)
    doc, _, _ = corpus.load_bundle(_require_file(args.bundle, "bundle"))
    model = classify_mod.load_concept_model_file(_require_file(args.concepts, "concept model"))

    lemmas_by_segment: dict[str, list[str]] = {}
    annotations_path = _setting(args, config, "annotations", None)
    if annotations_path:
        annotated = load_annotations(_require_file(annotations_path, "annotation"))
        for a in annotated:
            lemmas_by_segment[f"s{a.sent_id}"] = [e.lemma.casefold() for e in a.entries]
    for sentence in doc.sentences:
        lemmas_by_segment.setdefault(
            f"s{sentence.sent_id}", [t.lower for t in sentence.tokens if t.is_word]
        )

    external = None
    predictions_path = _setting(args, config, "predictions", None)
    if predictions_path:
        external = classify_mod.load_predictions_file(
            _require_file(predictions_path, "prediction"), model
        )

    centroid_model = None
    if args.train:
        labels_by_segment: dict[str, set[str]] = {}
        for line in _require_file(args.train, "training label").read_text("utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            segment_id, _, concept_id = line.partition("\t")
            if concept_id not in model.ids:
                raise RegcheckError(f"training label with unknown concept {concept_id!r}")
            labels_by_segment.setdefault(segment_id, set()).add(concept_id)
        from .vectorize import build_index

        stopwords = _stopwords(args, config)
        index = build_index(list(lemmas_by_segment.values()), stopwords)
        labeled = [
            (lemmas_by_segment[sid], concept_ids)
            for sid, concept_ids in sorted(labels_by_segment.items())
            if sid in lemmas_by_segment
        ]
        threshold = float(_setting(args, config, "centroid_threshold", 0.5))
        centroid_model = classify_mod.centroid_train(labeled, index, threshold)

    lines = []
    diagnostics: list[str] = []
    for sentence in doc.sentences:
        segment_id = f"s{sentence.sent_id}"
        labels = classify_mod.hybrid_predict(
            segment_id,
            lemmas_by_segment[segment_id],
            model,
            centroid_model,
            external,
            diagnostics,
        )
        for concept_id in sorted(labels):
            confidence = 1.0
            if external is not None and concept_id in external.by_segment.get(segment_id, {}):
                confidence = external.by_segment[segment_id][concept_id]
            lines.append(f"{segment_id}\t{concept_id}\t{confidence}")
    output = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
        print(f"wrote {args.out} ({len(lines)} label(s))")
    else:
        sys.stdout.write(output)
    for message in diagnostics:
        print(f"note: {message}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    gold = evaluation.load_gold_file(_require_file(args.gold, "gold"))
    per_doc: dict[str, evaluation.Confusion] = {}
    for report_path in args.report:
        data = json.loads(_require_file(report_path, "report").read_text(encoding="utf-8"))
        doc_id = data["doc_id"]
        predicted = {r["req_id"] for r in data["requirements"] if r["status"] == "Violated"}
        predicted |= {r["rule_id"] for r in data["rules"] if r["status"] == "Violated"}
        per_doc[doc_id] = evaluation.confusion(gold.get(doc_id, set()), predicted)
    table = evaluation.evaluation_table(per_doc)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(table)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regcheck",
        description="Regulatory-compliance text analysis: QA, classification, compliance reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a document bundle from text + metadata")
    p.add_argument("--text", required=True, help="UTF-8 document text")
    p.add_argument("--metadata", required=True, help="key: value metadata file (doc_id required)")
    p.add_argument("--out", required=True, help="output bundle JSON path")
    p.add_argument("--annotations", help="annotation file to validate against the bundle")
    p.add_argument("--budget", type=int, help="context-span token budget (default 512)")
    p.add_argument("--stopwords", help="stopword list override")
    p.add_argument("--abbreviations", help="abbreviation list override")
    p.add_argument("--config", help="JSON config file with defaults")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("qa", help="answer a question against an ingested regulation")
    p.add_argument("--question", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("-k", type=int, help="number of spans to return (default 3)")
    p.add_argument("--scorer", default="bm25", help="'bm25' or 'file:<score file>'")
    p.add_argument(
        "--extractor", default="best-sentence", help="'best-sentence' or 'file:<answer file>'"
    )
    p.add_argument("--json-out", help="also write results as JSON")
    p.add_argument("--stopwords", help="stopword list override")
    p.add_argument("--config", help="JSON config file with defaults")
    p.set_defaults(func=cmd_qa)

    p = sub.add_parser("check", help="check a document bundle against requirements and rules")
    p.add_argument("--bundle", required=True)
    p.add_argument("--requirements", required=True)
    p.add_argument("--rules")
    p.add_argument("--concepts")
    p.add_argument("--predictions")
    p.add_argument("--annotations")
    p.add_argument("--gold-frames", dest="gold_frames")
    p.add_argument("--synonyms")
    p.add_argument("--aliases")
    p.add_argument("--markers")
    p.add_argument("--embeddings")
    p.add_argument("--stopwords")
    p.add_argument("--theta", type=float, help="relevance threshold (default 0.5)")
    p.add_argument("--tau-text", dest="tau_text", type=float, help="role text threshold (default 0.5)")
    p.add_argument("--tau-sat", dest="tau_sat", type=float, help="satisfaction threshold (default 0.8)")
    p.add_argument("--centroid-threshold", dest="centroid_threshold", type=float)
    p.add_argument("--no-gate", dest="no_gate", action="store_const", const=True,
                   help="score every (requirement, segment) pair, skipping the relevance gate")
    p.add_argument("--per-segment-rules", dest="per_segment_rules", action="store_const", const=True)
    p.add_argument("--fail-on-violation", dest="fail_on_violation", action="store_const", const=True)
    p.add_argument("--out", default="report-out", help="output directory (default report-out)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--stamp", action="store_true", help="stamp the report with the wall clock")
    p.add_argument("--config", help="JSON config file with defaults")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="assign concept labels to bundle segments")
    p.add_argument("--bundle", required=True)
    p.add_argument("--concepts", required=True)
    p.add_argument("--annotations")
    p.add_argument("--predictions", help="external prediction TSV")
    p.add_argument("--train", help="segment_id<TAB>concept_id training labels for centroids")
    p.add_argument("--centroid-threshold", dest="centroid_threshold", type=float)
    p.add_argument("--stopwords")
    p.add_argument("--out", help="output TSV path (default stdout)")
    p.add_argument("--config", help="JSON config file with defaults")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="score predicted violations against gold annotations")
    p.add_argument("--gold", required=True, help="gold file: doc_id<TAB>requirement_or_rule_id")
    p.add_argument("--report", required=True, nargs="+", help="report.json path(s)")
    p.add_argument("--out", help="output TSV path (default stdout)")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RegcheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
