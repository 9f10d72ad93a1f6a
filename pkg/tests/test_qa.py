import pytest
from hypothesis import given
from hypothesis import strategies as st

from regcheck.corpus import load_document, partition_spans
from regcheck.errors import (
    AnswerUnavailable,
    InvalidInput,
    MissingScore,
    ScorerContractViolation,
)
from regcheck.qa import (
    BaselineExtractor,
    Bm25SentenceScorer,
    FileExtractor,
    FileScorer,
    all_zero_relevance,
    extract_answer,
    make_question,
    question_hash,
    span_relevance,
    span_text,
    top_k_spans,
)


class StubScorer:
    """Fixed per-sentence scores for deterministic tests."""

    def __init__(self, scores):
        self.scores = scores

    def score(self, question, sentence):
        return self.scores[sentence.sent_id]


@pytest.fixture(scope="module")
def q():
    return make_question("How should we handle personal data breach?")


@pytest.fixture(scope="module")
def doc_and_span(request):
    doc = request.getfixturevalue("article33_doc")
    spans = partition_spans(doc, 512)
    assert len(spans) == 1
    return doc, spans[0]


class TestQuestion:
    def test_stopwords_removed(self, q):
        assert q.tokens == ("handle", "personal", "data", "breach")

    def test_hash_normalizes_case_and_space(self):
        a = question_hash("How should we  handle personal data breach?")
        b = question_hash("how should we handle personal data breach?")
        assert a == b

    def test_empty_question_rejected(self):
        with pytest.raises(InvalidInput):
            make_question("   ")


class TestSpanRelevance:
    def test_max_aggregation(self, q, doc_and_span):
        doc, span = doc_and_span
        relevance, best = span_relevance(q, span, doc, StubScorer({0: 0.9, 1: 0.1}))
        assert relevance == 0.9
        assert best == 0

    def test_single_sentence_span(self, q, policy_doc):
        span = partition_spans(policy_doc, 512)[0]
        relevance, best = span_relevance(q, span, policy_doc, StubScorer({0: 0.42}))
        assert relevance == 0.42

    def test_max_differs_from_mean(self, q, doc_and_span):
        doc, span = doc_and_span
        relevance, _ = span_relevance(q, span, doc, StubScorer({0: 0.9, 1: 0.1}))
        assert relevance == 0.9 != pytest.approx((0.9 + 0.1) / 2)

    def test_scorer_contract_enforced(self, q, doc_and_span):
        doc, span = doc_and_span
        with pytest.raises(ScorerContractViolation):
            span_relevance(q, span, doc, StubScorer({0: 1.7, 1: 0.0}))

    def test_earliest_sentence_wins_ties(self, q, doc_and_span):
        doc, span = doc_and_span
        _, best = span_relevance(q, span, doc, StubScorer({0: 0.5, 1: 0.5}))
        assert best == 0


class TestTopK:
    def test_k1_selects_best(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(q, spans, regulation_two_doc, 1, StubScorer({0: 0.2, 1: 0.2, 2: 0.8}))
        assert [r.span_id for r in ranked] == ["34.0"]

    def test_k_larger_than_span_count(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(q, spans, regulation_two_doc, 10, StubScorer({0: 0.3, 1: 0.1, 2: 0.2}))
        assert len(ranked) == len(spans)

    def test_tie_keeps_document_order(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(q, spans, regulation_two_doc, 2, StubScorer({0: 0.5, 1: 0.5, 2: 0.5}))
        assert [r.span_id for r in ranked] == ["33.0", "34.0"]

    def test_k_below_one_rejected(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        with pytest.raises(InvalidInput):
            top_k_spans(q, spans, regulation_two_doc, 0, StubScorer({}))

    def test_full_k_is_permutation(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(
            q, spans, regulation_two_doc, len(spans), StubScorer({0: 0.9, 1: 0.2, 2: 0.4})
        )
        assert {r.span_id for r in ranked} == {s.span_id for s in spans}

    def test_span_permutation_changes_only_tie_order(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        scorer = StubScorer({0: 0.7, 1: 0.1, 2: 0.4})
        forward = top_k_spans(q, spans, regulation_two_doc, 2, scorer)
        backward = top_k_spans(q, list(reversed(spans)), regulation_two_doc, 2, scorer)
        assert {(r.span_id, r.relevance) for r in forward} == {
            (r.span_id, r.relevance) for r in backward
        }

    def test_zero_relevance_flag(self, q, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(q, spans, regulation_two_doc, 3, StubScorer({0: 0, 1: 0, 2: 0}))
        assert all_zero_relevance(ranked)


class TestMaxAggregationProperties:
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8))
    def test_relevance_is_multiset_max(self, scores):
        text = " ".join(f"Sentence number {i} stands alone." for i in range(len(scores)))
        doc = load_document(text, {"doc_id": "gen"})
        assert len(doc.sentences) == len(scores)
        span = partition_spans(doc, 10_000)[0]
        scorer = StubScorer(dict(enumerate(scores)))
        q = make_question("irrelevant question?")
        relevance, _ = span_relevance(q, span, doc, scorer)
        assert relevance == max(scores)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=7),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_appending_sentence_never_decreases(self, scores, extra):
        text = " ".join(f"Sentence number {i} stands alone." for i in range(len(scores) + 1))
        doc = load_document(text, {"doc_id": "gen"})
        spans = partition_spans(doc, 10_000)
        full_span = spans[0]
        prefix_span = type(full_span)(
            span_id="prefix",
            article_id=full_span.article_id,
            sentence_ids=full_span.sentence_ids[:-1],
            token_count=0,
        )
        scorer = StubScorer({**dict(enumerate(scores)), len(scores): extra})
        q = make_question("irrelevant question?")
        before, _ = span_relevance(q, prefix_span, doc, scorer)
        after, _ = span_relevance(q, full_span, doc, scorer)
        assert after >= before


class TestExtractAnswer:
    def test_baseline_returns_best_sentence(self, q, doc_and_span):
        doc, span = doc_and_span
        scorer = StubScorer({0: 0.9, 1: 0.1})
        answer = extract_answer(q, span, doc, BaselineExtractor(scorer))
        assert answer.text == doc.sentences[0].text
        assert answer.confidence == 0.9
        start, end = answer.char_range
        assert span_text(doc, span)[start:end] == answer.text

    def test_committed_snapshot_answer(self, q, fixtures, regulation_two_doc):
        spans = partition_spans(regulation_two_doc, 512)
        extractor = FileExtractor.from_path(fixtures / "answers.tsv")
        answer = extract_answer(q, spans[0], regulation_two_doc, extractor)
        assert answer.char_range == (0, 370)
        assert answer.text == regulation_two_doc.sentences[0].text
        assert answer.confidence == 0.75

    def test_empty_span_unavailable(self, q, doc_and_span):
        doc, span = doc_and_span
        empty = type(span)(span_id="e", article_id="33", sentence_ids=(), token_count=0)
        with pytest.raises(AnswerUnavailable):
            extract_answer(q, empty, doc, BaselineExtractor(StubScorer({})))

    def test_missing_answer_row_unavailable(self, doc_and_span, fixtures):
        doc, span = doc_and_span
        other = make_question("What about something else entirely?")
        extractor = FileExtractor.from_path(fixtures / "answers.tsv")
        with pytest.raises(AnswerUnavailable):
            extract_answer(other, span, doc, extractor)


class TestFileScorer:
    def test_reads_committed_scores(self, q, fixtures, regulation_two_doc):
        scorer = FileScorer.from_path(fixtures / "scores.tsv")
        spans = partition_spans(regulation_two_doc, 512)
        ranked = top_k_spans(q, spans, regulation_two_doc, 2, scorer)
        assert [r.span_id for r in ranked] == ["33.0", "34.0"]
        assert ranked[0].relevance == 0.9
        assert ranked[0].best_sentence_id == 0

    def test_missing_pair_raises(self, fixtures, regulation_two_doc):
        scorer = FileScorer.from_path(fixtures / "scores.tsv")
        other = make_question("A question nobody scored?")
        with pytest.raises(MissingScore):
            scorer.score(other, regulation_two_doc.sentences[0])


class TestBm25Scorer:
    def test_scores_within_unit_interval(self, q, regulation_two_doc):
        scorer = Bm25SentenceScorer(regulation_two_doc)
        for sentence in regulation_two_doc.sentences:
            assert 0.0 <= scorer.score(q, sentence) < 1.0

    def test_relevant_sentence_outscores_unrelated(self, regulation_two_doc):
        scorer = Bm25SentenceScorer(regulation_two_doc)
        q = make_question("When must the supervisory authority be notified of a breach?")
        relevant = scorer.score(q, regulation_two_doc.sentences[0])
        # Sentence 2 talks about communication language, not notification.
        assert relevant > 0.0
