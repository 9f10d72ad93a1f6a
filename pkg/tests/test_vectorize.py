import io
import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from regcheck.errors import (
    DimensionMismatch,
    DuplicateId,
    InvalidInput,
    ZeroVector,
)
from regcheck.vectorize import (
    bm25_score,
    build_index,
    cosine,
    load_embeddings,
    tfidf_vector,
)

TOL = 1e-9

token_lists = st.lists(
    st.sampled_from(["data", "breach", "notify", "risk", "delay", "authority"]),
    min_size=0,
    max_size=12,
)
corpora = st.lists(token_lists, min_size=1, max_size=8).filter(
    lambda segs: any(seg for seg in segs)
)


class TestBuildIndex:
    def test_counting(self):
        idx = build_index([["data", "breach"], ["data"]])
        assert idx.doc_count == 2
        assert idx.doc_freq["data"] == 2
        assert idx.doc_freq["breach"] == 1

    def test_empty_corpus_rejected(self):
        with pytest.raises(InvalidInput):
            build_index([])

    def test_stopwords_excluded(self):
        idx = build_index([["the", "breach"]], stopwords=frozenset({"the"}))
        assert "the" not in idx.vocabulary
        assert idx.doc_lens == (1,)

    @given(corpora)
    def test_matches_naive_recount(self, segments):
        idx = build_index(segments)
        # Independent recount with plain counters.
        df = Counter()
        for seg in segments:
            for term in set(t.casefold() for t in seg):
                df[term] += 1
        assert idx.doc_freq == dict(df)
        assert idx.doc_count == len(segments)
        lens = [len(seg) for seg in segments]
        assert idx.avg_doc_len == pytest.approx(sum(lens) / len(lens))
        for term, n in df.items():
            assert 1 <= n <= len(segments)


class TestTfidf:
    def test_unseen_terms_ignored(self):
        idx = build_index([["data"]])
        assert tfidf_vector(["unknown", "terms"], idx) == {}

    def test_single_doc_double_term(self):
        idx = build_index([["data", "data"]])
        vec = tfidf_vector(["data", "data"], idx)
        # weight = 2 * (ln(2/2) + 1) = 2.0
        assert vec[idx.vocabulary["data"]] == pytest.approx(2.0, abs=TOL)

    def test_fixture_weights_match_formula(self):
        segments = [
            ["data", "breach", "notify"],
            ["data", "risk"],
            ["breach", "breach", "delay"],
            ["authority"],
            ["data", "authority", "notify", "notify"],
        ]
        idx = build_index(segments)
        n = len(segments)
        for seg in segments:
            vec = tfidf_vector(seg, idx)
            counts = Counter(seg)
            for term, tf in counts.items():
                expected = tf * (math.log((n + 1) / (idx.doc_freq[term] + 1)) + 1.0)
                assert vec[idx.vocabulary[term]] == pytest.approx(expected, abs=TOL)

    @given(corpora)
    def test_weights_non_negative(self, segments):
        idx = build_index(segments)
        for seg in segments:
            assert all(w >= 0 for w in tfidf_vector(seg, idx).values())


class TestCosine:
    def test_identity(self):
        assert cosine((1.0, 0.0), (1.0, 0.0)) == pytest.approx(1.0, abs=TOL)

    def test_orthogonal(self):
        assert cosine((1.0, 0.0), (0.0, 1.0)) == pytest.approx(0.0, abs=TOL)

    def test_analytic_45_degrees(self):
        assert cosine((1.0, 1.0), (1.0, 0.0)) == pytest.approx(math.sqrt(0.5), abs=TOL)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            cosine((0.0, 0.0), (1.0, 0.0))

    def test_sparse_and_dense_agree(self):
        assert cosine({0: 1.0, 1: 1.0}, {0: 1.0}) == pytest.approx(
            cosine((1.0, 1.0), (1.0, 0.0)), abs=TOL
        )

    vectors = st.lists(
        st.one_of(st.just(0.0), st.floats(min_value=0.01, max_value=100.0)),
        min_size=1,
        max_size=8,
    ).filter(lambda v: any(x > 0 for x in v))

    @given(vectors, vectors)
    def test_symmetry_exact(self, v, w):
        n = max(len(v), len(w))
        v = v + [0.0] * (n - len(v))
        w = w + [0.0] * (n - len(w))
        assert cosine(v, w) == cosine(w, v)

    @given(vectors, st.floats(min_value=0.001, max_value=1000.0))
    def test_scale_invariance(self, v, a):
        scaled = [a * x for x in v]
        assert cosine(scaled, v) == pytest.approx(1.0, abs=TOL)
        assert cosine(scaled, list(reversed(v))) == pytest.approx(
            cosine(v, list(reversed(v))), abs=TOL
        )

    @given(vectors)
    def test_self_similarity(self, v):
        assert cosine(v, v) == pytest.approx(1.0, abs=TOL)


class TestBm25:
    def test_zero_overlap(self):
        idx = build_index([["data", "breach"]])
        assert bm25_score(["unrelated"], 0, idx) == 0.0

    def test_single_doc_formula(self):
        idx = build_index([["data"]])
        got = bm25_score(["data"], 0, idx, k1=1.2, b=0.75)
        # Hand evaluation: df=1, N=1 -> idf = ln(1 + 0.5/1.5); tf=1, len=avglen
        idf = math.log(1 + 0.5 / 1.5)
        expected = idf * 1 * (1.2 + 1) / (1 + 1.2 * (1 - 0.75 + 0.75 * 1.0))
        assert got == pytest.approx(expected, abs=TOL)

    def test_unknown_segment_id(self):
        idx = build_index([["data"]])
        with pytest.raises(IndexError):
            bm25_score(["data"], 3, idx)

    def test_invalid_parameters(self):
        idx = build_index([["data"]])
        with pytest.raises(InvalidInput):
            bm25_score(["data"], 0, idx, k1=0.0)
        with pytest.raises(InvalidInput):
            bm25_score(["data"], 0, idx, b=1.5)

    def test_tf_monotonicity_random_corpora(self):
        rng = random.Random(7)
        words = ["data", "breach", "notify", "risk", "delay"]
        for _ in range(30):
            base = [rng.choice(words) for _ in range(rng.randint(1, 10))]
            query_term = rng.choice(words)
            more = base + [query_term]
            idx = build_index([base, more])
            padded = build_index([base + ["pad"], more + ["pad"]])
            # Same segment with an extra query-term occurrence never scores lower
            # when lengths are equalized via the padded corpus.
            low = bm25_score([query_term], 0, padded)
            high = bm25_score([query_term], 1, padded)
            assert high >= low

    @given(corpora, token_lists)
    def test_scores_non_negative(self, segments, query):
        idx = build_index(segments)
        for i in range(len(segments)):
            assert bm25_score(query, i, idx) >= 0.0


class TestEmbeddings:
    def test_minimal_table(self):
        table = load_embeddings("dim=2\ns1\t1.0 0.0\n")
        assert table.dim == 2
        assert table.vector("s1") == (1.0, 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch) as err:
            load_embeddings("dim=2\ns1\t1.0 0.0 3.0\n")
        assert err.value.segment_id == "s1"

    def test_duplicate_id(self):
        with pytest.raises(DuplicateId):
            load_embeddings("dim=1\ns1\t1.0\ns1\t2.0\n")

    def test_missing_header(self):
        with pytest.raises(InvalidInput):
            load_embeddings("s1\t1.0\n")

    def test_reads_file_objects(self):
        table = load_embeddings(io.StringIO("dim=1\na\t0.5\nb\t1.5\n"))
        assert set(table.vectors) == {"a", "b"}
