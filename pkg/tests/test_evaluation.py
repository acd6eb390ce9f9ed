import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policysum.corpus import load_gdpr_topics
from policysum.embedding import HashEmbedder
from policysum.errors import ArgumentError
from policysum.evaluation import (
    batch_evaluate,
    rouge_all,
    rouge_evaluate,
    rouge_l,
    rouge_n,
    rouge_w,
    ssd_evaluate,
    write_plot_data,
    write_rouge_csv,
    write_ssd_csv,
)
from policysum.summarizer import random_baseline_summary, summary_sentences

from oracles import lcs_brute_force

token_lists = st.lists(st.sampled_from("a b c d e f".split()), min_size=0, max_size=10)


class TestSsd:
    def test_verbatim_topic_headers_score_zero(self, hash_provider):
        topics = load_gdpr_topics()
        report = ssd_evaluate(topics.headers, list(topics.headers), hash_provider)
        assert report.total == 0.0
        for entry in report.per_topic:
            assert entry.squared_distance == 0.0
            assert entry.best_sentence == entry.topic

    def test_matches_exhaustive_min_scan(self, hash_provider):
        topics = ["first topic text", "second topic text"]
        sentences = ["one candidate here", "another candidate there", "a third option"]
        report = ssd_evaluate(topics, sentences, hash_provider)
        topic_vecs = hash_provider.embed(topics)
        sent_vecs = hash_provider.embed(sentences)
        expected_total = 0.0
        for i, tv in enumerate(topic_vecs):
            best = min(float(np.sum((sv - tv) ** 2)) for sv in sent_vecs)
            assert abs(report.per_topic[i].squared_distance - best) <= 1e-12
            expected_total += best
        assert abs(report.total - expected_total) <= 1e-9

    def test_total_is_sum_of_topics(self, hash_provider):
        topics = load_gdpr_topics()
        report = ssd_evaluate(
            topics.headers, ["we collect data", "we use cookies"], hash_provider
        )
        assert abs(report.total - sum(e.squared_distance for e in report.per_topic)) <= 1e-9

    def test_adding_sentence_never_increases_any_topic(self, hash_provider):
        rng = np.random.default_rng(0)
        words = "alpha beta gamma delta epsilon zeta eta theta".split()
        for trial in range(100):
            size = int(rng.integers(1, 6))
            sentences = [
                " ".join(rng.choice(words, size=4)) + f" marker{trial}-{j}"
                for j in range(size)
            ]
            extra = " ".join(rng.choice(words, size=5)) + f" extra{trial}"
            topics = ["things we keep", "things we share"]
            before = ssd_evaluate(topics, sentences, hash_provider)
            after = ssd_evaluate(topics, sentences + [extra], hash_provider)
            for b, a in zip(before.per_topic, after.per_topic):
                assert a.squared_distance <= b.squared_distance + 1e-12
            assert after.total <= before.total + 1e-9

    def test_empty_summary_rejected(self, hash_provider):
        with pytest.raises(ArgumentError):
            ssd_evaluate(["topic"], [], hash_provider)

    def test_random_pool_scores_worse_than_verbatim_headers(self, hash_provider):
        topics = load_gdpr_topics()
        random_sentences = summary_sentences(random_baseline_summary(14, seed=3))
        random_report = ssd_evaluate(topics.headers, random_sentences, hash_provider)
        verbatim_report = ssd_evaluate(topics.headers, list(topics.headers), hash_provider)
        assert random_report.total > verbatim_report.total


class TestRougeN:
    def test_hand_counted_unigram_case(self):
        score = rouge_n("the cat sat", "the cat", 1)
        assert score.precision == 1.0
        assert abs(score.recall - 2.0 / 3.0) <= 1e-12
        assert score.f == 0.8

    def test_identical_texts(self):
        score = rouge_n("we collect data", "we collect data", 2)
        assert (score.precision, score.recall, score.f) == (1.0, 1.0, 1.0)

    def test_disjoint_vocabulary(self):
        score = rouge_n("alpha beta gamma", "delta epsilon", 1)
        assert (score.precision, score.recall, score.f) == (0.0, 0.0, 0.0)

    def test_clipping_counts_repeats_once_per_reference_occurrence(self):
        score = rouge_n("the cat", "the the the cat", 1)
        assert score.precision == 2.0 / 4.0
        assert score.recall == 1.0

    def test_bigram_overlap(self):
        score = rouge_n("we collect your data", "we collect their data", 2)
        assert score.precision == 1.0 / 3.0
        assert score.recall == 1.0 / 3.0

    def test_empty_hypothesis(self):
        assert rouge_n("something here", "", 1) == rouge_n("something here", "!!!", 1)
        assert rouge_n("something here", "", 1).f == 0.0

    def test_n_validated(self):
        with pytest.raises(ArgumentError):
            rouge_n("a", "a", 0)

    def test_scores_stay_in_unit_interval(self):
        rng = np.random.default_rng(9)
        vocab = "a b c d".split()
        for _ in range(200):
            ref = " ".join(rng.choice(vocab, size=rng.integers(0, 9)))
            hyp = " ".join(rng.choice(vocab, size=rng.integers(0, 9)))
            for n in (1, 2):
                score = rouge_n(ref, hyp, n)
                assert 0.0 <= score.precision <= 1.0
                assert 0.0 <= score.recall <= 1.0
                assert 0.0 <= score.f <= 1.0


class TestRougeL:
    def test_transposed_tokens(self):
        score = rouge_l("a b c d", "a c b d")
        assert (score.precision, score.recall, score.f) == (0.75, 0.75, 0.75)

    def test_prefix_hypothesis_has_full_precision(self):
        score = rouge_l("we collect data about you", "we collect data")
        assert score.precision == 1.0

    def test_empty_hypothesis_is_zero(self):
        score = rouge_l("anything at all", "")
        assert (score.precision, score.recall, score.f) == (0.0, 0.0, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(token_lists, token_lists)
    def test_dp_equals_brute_force(self, ref_tokens, hyp_tokens):
        from policysum.evaluation import _lcs_length

        assert _lcs_length(ref_tokens, hyp_tokens) == lcs_brute_force(ref_tokens, hyp_tokens)


class TestRougeW:
    @settings(max_examples=100, deadline=None)
    @given(token_lists, token_lists)
    def test_weight_one_equals_rouge_l(self, ref_tokens, hyp_tokens):
        ref = " ".join(ref_tokens)
        hyp = " ".join(hyp_tokens)
        lw = rouge_w(ref, hyp, weight=1.0)
        ll = rouge_l(ref, hyp)
        assert abs(lw.precision - ll.precision) <= 1e-12
        assert abs(lw.recall - ll.recall) <= 1e-12
        assert abs(lw.f - ll.f) <= 1e-12

    def test_consecutive_run_rewarded(self):
        consecutive = rouge_w("a b c d", "a b x d", weight=1.2)
        scattered = rouge_w("a b c d", "a x b d", weight=1.2)
        assert consecutive.f > scattered.f

    def test_empty_inputs_zero(self):
        assert rouge_w("", "", weight=1.2).f == 0.0
        assert rouge_w("a b", "", weight=1.2).f == 0.0

    def test_weight_below_one_rejected(self):
        with pytest.raises(ArgumentError):
            rouge_w("a", "a", weight=0.5)

    def test_perfect_match_scores_one(self):
        score = rouge_w("we keep records safe", "we keep records safe", weight=1.2)
        assert abs(score.precision - 1.0) <= 1e-12
        assert abs(score.recall - 1.0) <= 1e-12


class TestRougeEvaluate:
    def test_self_reference_scores_one(self, hash_provider):
        topics = load_gdpr_topics()
        summary = random_baseline_summary(
            14, seed=0, sentence_pool=list(topics.combined_sentences)
        )
        # overwrite picks so each topic holds exactly its own reference
        from policysum.summarizer import Pick, Summary, SummaryStats, TopicSummary

        aligned = Summary(
            source="test://self",
            mode="pdc",
            n_best=1,
            topics=tuple(
                TopicSummary(label=h, picks=(Pick(text=c, distance=0.0),))
                for h, c in topics.entries
            ),
            stats=SummaryStats(14, 14, 0.0),
        )
        scores = rouge_evaluate(topics.combined_sentences, aligned)
        assert abs(scores.r1.f - 1.0) <= 1e-12
        assert abs(scores.rl.f - 1.0) <= 1e-12
        assert abs(scores.mean_r1_rl - 1.0) <= 1e-12

    def test_macro_average_identity(self):
        topics = load_gdpr_topics()
        summary = random_baseline_summary(14, seed=8, labels=tuple(topics.headers))
        scores = rouge_evaluate(topics.combined_sentences, summary)
        per_topic = [
            rouge_all(ref, topic.picks[0].text)
            for ref, topic in zip(topics.combined_sentences, summary.topics)
        ]
        assert abs(scores.r1.f - sum(s.r1.f for s in per_topic) / 14) <= 1e-12
        assert abs(scores.rl.f - sum(s.rl.f for s in per_topic) / 14) <= 1e-12
        assert abs(scores.mean_r1_rl - (scores.r1.f + scores.rl.f) / 2) <= 1e-12

    def test_topic_count_mismatch_rejected(self):
        summary = random_baseline_summary(6, seed=1, labels=("a", "b", "c"))
        with pytest.raises(ArgumentError):
            rouge_evaluate(["only", "two"], summary)


@pytest.fixture
def manifest(fixtures_dir):
    return [
        ("Alpha", str(fixtures_dir / "alpha_policy.html")),
        ("Beta", str(fixtures_dir / "beta_policy.html")),
    ]


class TestBatch:
    def test_row_accounting_single_document(self, hash_provider, manifest):
        report = batch_evaluate(manifest[:1], ["pdc"], hash_provider, seed=0)
        assert len(report.rows) == 3
        assert {row.model for row in report.rows} == {"random", "pdc", "gdpr"}

    def test_aggregates_match_rows(self, hash_provider, manifest):
        report = batch_evaluate(manifest, ["pdc"], hash_provider, seed=0)
        for model, aggregate in report.ssd_aggregates.items():
            values = [r.ssd for r in report.rows if r.model == model and r.error is None]
            mean = sum(values) / len(values)
            std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
            assert abs(aggregate.mean - mean) <= 1e-9
            assert abs(aggregate.std_dev - std) <= 1e-9

    def test_gdpr_ssd_constant_across_documents(self, hash_provider, manifest):
        report = batch_evaluate(manifest, ["pdc"], hash_provider, seed=0)
        gdpr_values = {r.ssd for r in report.rows if r.model == "gdpr"}
        assert len(gdpr_values) == 1

    def test_failures_marked_and_batch_continues(self, hash_provider, manifest, tmp_path):
        bad = ("Broken", str(tmp_path / "missing.html"))
        report = batch_evaluate([bad] + manifest, ["pdc"], hash_provider, seed=0)
        broken_rows = [r for r in report.rows if r.company == "Broken"]
        assert len(broken_rows) == 3
        assert all(r.error is not None for r in broken_rows)
        alpha_rows = [r for r in report.rows if r.company == "Alpha"]
        assert all(r.error is None for r in alpha_rows)

    def test_error_rows_excluded_from_aggregates(self, hash_provider, manifest, tmp_path):
        bad = ("Broken", str(tmp_path / "missing.html"))
        with_bad = batch_evaluate([bad] + manifest, ["pdc"], hash_provider, seed=0)
        without = batch_evaluate(manifest, ["pdc"], hash_provider, seed=0)
        for model in without.ssd_aggregates:
            assert abs(
                with_bad.ssd_aggregates[model].mean - without.ssd_aggregates[model].mean
            ) <= 1e-9

    def test_kmeans_mode_requires_centroids(self, hash_provider, manifest):
        with pytest.raises(ArgumentError):
            batch_evaluate(manifest, ["kmeans"], hash_provider, seed=0)

    def test_csv_outputs(self, hash_provider, manifest, tmp_path):
        report = batch_evaluate(manifest, ["pdc"], hash_provider, seed=0)
        ssd_path = tmp_path / "ssd.csv"
        rouge_path = tmp_path / "rouge.csv"
        plot_path = tmp_path / "plot.csv"
        write_ssd_csv(report, ssd_path)
        write_rouge_csv(report, rouge_path)
        write_plot_data(report, plot_path)

        with open(ssd_path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["company", "random", "pdc", "kmeans", "gdpr_fixed"]
        assert [r[0] for r in rows[1:]] == ["Alpha", "Beta", "mean", "std_dev"]
        mean_row = rows[3]
        values = [float(r[2]) for r in rows[1:3]]
        assert abs(float(mean_row[2]) - round(sum(values) / 2, 4)) <= 1e-3
        assert rows[1][3] == ""  # kmeans column empty when the mode was not run

        with open(rouge_path, encoding="utf-8") as fh:
            rouge_rows = list(csv.reader(fh))
        assert rouge_rows[0] == [
            "company", "model", "r1_p", "r1_r", "r1_f", "r2_f", "rl_f", "rw_f", "mean_r1_rl"
        ]
        assert len(rouge_rows) == 1 + 4  # two documents x (random, pdc)

        with open(plot_path, encoding="utf-8") as fh:
            plot_rows = list(csv.reader(fh))
        assert plot_rows[0] == ["company", "series", "value"]
        series = {r[1] for r in plot_rows[1:]}
        assert "ssd_gdpr" in series and "rouge_mean_pdc" in series

    def test_empty_manifest_rejected(self, hash_provider):
        with pytest.raises(ArgumentError):
            batch_evaluate([], ["pdc"], hash_provider, seed=0)

    def test_duplicate_company_rejected(self, hash_provider, manifest):
        with pytest.raises(ArgumentError):
            batch_evaluate([manifest[0], manifest[0]], ["pdc"], hash_provider, seed=0)

    def test_rouge_weight_flows_through(self, hash_provider, manifest):
        default = batch_evaluate(manifest[:1], ["pdc"], hash_provider, seed=0)
        heavier = batch_evaluate(manifest[:1], ["pdc"], hash_provider, seed=0, rouge_weight=1.2)
        row_default = next(r for r in default.rows if r.model == "pdc")
        row_heavier = next(r for r in heavier.rows if r.model == "pdc")
        assert row_default.rouge.rw != row_heavier.rouge.rw
        assert row_default.rouge.r1 == row_heavier.rouge.r1
        assert row_default.rouge.rl == row_heavier.rouge.rl
