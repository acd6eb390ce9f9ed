import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from policysum.cli import main
from policysum.corpus import load_gdpr_topics


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus_file(tmp_path):
    topics = load_gdpr_topics()
    extra = [
        "we explain how long records are kept",
        "our service shows advertisements sometimes",
        "you can export everything from the settings page",
        "support replies within two working days",
        "the mobile app mirrors the website features",
        "we audit our vendors once a year",
    ]
    path = tmp_path / "corpus.txt"
    path.write_text("\n".join(list(topics.combined_sentences) + extra) + "\n", encoding="utf-8")
    return path


def run_embed(runner, corpus_file, store_path, dim="32"):
    return runner.invoke(
        main,
        ["embed", "--corpus", str(corpus_file), "--store", str(store_path), "--dim", dim],
        catch_exceptions=False,
    )


class TestEmbed:
    def test_fresh_store_counts_every_sentence(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        result = run_embed(runner, corpus_file, store_path)
        assert result.exit_code == 0
        n = len(corpus_file.read_text().splitlines())
        assert f"embedded {n} new sentences ({n} total)" in result.output

    def test_rerun_adds_nothing(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path)
        first_bytes = store_path.read_bytes()
        result = run_embed(runner, corpus_file, store_path)
        assert result.exit_code == 0
        assert "embedded 0 new sentences" in result.output
        assert store_path.read_bytes() == first_bytes

    def test_provider_mismatch_exits_3(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path, dim="32")
        result = runner.invoke(
            main,
            ["embed", "--corpus", str(corpus_file), "--store", str(store_path), "--dim", "16"],
        )
        assert result.exit_code == 3

    def test_missing_required_option_exits_2(self, runner):
        result = runner.invoke(main, ["embed", "--corpus", "nope.txt"])
        assert result.exit_code == 2


class TestFit:
    def test_small_store_two_clusters(self, runner, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text(
            "north north north pole station\n"
            "north pole research outpost team\n"
            "south south south tropic harbour\n"
            "south tropic diving harbour crew\n",
            encoding="utf-8",
        )
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus, store_path)
        out = tmp_path / "centroids.jsonl"
        result = runner.invoke(
            main,
            ["fit", "--store", str(store_path), "--k", "2", "--seed", "0", "--out", str(out)],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3  # header + 2 centroids
        header = json.loads(lines[0])
        assert header["mode"] == "kmeans"
        assert header["space"] == "raw"

    def test_default_k_is_fourteen(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path)
        out = tmp_path / "centroids.jsonl"
        result = runner.invoke(
            main, ["fit", "--store", str(store_path), "--out", str(out)],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 15

    def test_rerun_same_seed_identical_bytes(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path)
        out_a = tmp_path / "a.jsonl"
        out_b = tmp_path / "b.jsonl"
        for out in (out_a, out_b):
            runner.invoke(
                main,
                ["fit", "--store", str(store_path), "--k", "3", "--seed", "5", "--out", str(out)],
                catch_exceptions=False,
            )
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_k_larger_than_store_exits_2(self, runner, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("only one sentence lives here\n", encoding="utf-8")
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus, store_path)
        result = runner.invoke(
            main, ["fit", "--store", str(store_path), "--k", "5", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2

    def test_pca_fit_writes_model_and_space(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path)
        out = tmp_path / "centroids.jsonl"
        result = runner.invoke(
            main,
            ["fit", "--store", str(store_path), "--k", "3", "--n-comp", "4", "--out", str(out)],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        assert Path(str(out) + ".pca").exists()
        header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
        assert header["space"] == "pca:4"


class TestSummarize:
    def test_gdpr_fixture_yields_zero_distances(self, runner, fixtures_dir, tmp_path):
        out = tmp_path / "summary.json"
        result = runner.invoke(
            main,
            [
                "summarize",
                "--source", str(fixtures_dir / "gdpr_sentences.html"),
                "--mode", "pdc",
                "--n-best", "1",
                "--out", str(out),
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert len(payload["topics"]) == 14
        assert all(t["picks"][0]["distance"] == 0.0 for t in payload["topics"])

    def test_n_best_one_returns_fourteen_picks(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["summarize", "--source", str(fixtures_dir / "meta_policy.html")],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["stats"]["output_sentence_count"] == 14
        assert payload["stats"]["reduction_ratio"] > 0.9

    def test_url_under_fixture_only_exits_3(self, runner):
        result = runner.invoke(
            main, ["summarize", "--source", "https://example.com/privacy"]
        )
        assert result.exit_code == 3

    def test_kmeans_without_centroids_exits_2(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["summarize", "--source", str(fixtures_dir / "meta_policy.html"), "--mode", "kmeans"],
        )
        assert result.exit_code == 2

    def test_kmeans_mode_with_fitted_centroids(self, runner, corpus_file, fixtures_dir, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path, dim="64")
        centroid_path = tmp_path / "centroids.jsonl"
        runner.invoke(
            main,
            ["fit", "--store", str(store_path), "--k", "3", "--seed", "1",
             "--out", str(centroid_path)],
            catch_exceptions=False,
        )
        result = runner.invoke(
            main,
            [
                "summarize",
                "--source", str(fixtures_dir / "alpha_policy.html"),
                "--mode", "kmeans",
                "--centroids", str(centroid_path),
                "--dim", "64",
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert [t["label"] for t in payload["topics"]] == [
            "cluster-00", "cluster-01", "cluster-02"
        ]
        assert all("gloss" in t for t in payload["topics"])

    def test_byte_identical_reruns(self, runner, fixtures_dir, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        for out in (out_a, out_b):
            runner.invoke(
                main,
                ["summarize", "--source", str(fixtures_dir / "alpha_policy.html"),
                 "--out", str(out)],
                catch_exceptions=False,
            )
        assert out_a.read_bytes() == out_b.read_bytes()


class TestEvaluate:
    def test_two_document_manifest(self, runner, fixtures_dir, tmp_path):
        out_dir = tmp_path / "reports"
        result = runner.invoke(
            main,
            [
                "evaluate",
                "--manifest", str(fixtures_dir / "manifest.csv"),
                "--modes", "pdc",
                "--out-dir", str(out_dir),
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        ssd_lines = (out_dir / "ssd.csv").read_text(encoding="utf-8").splitlines()
        assert len(ssd_lines) == 1 + 2 + 2  # header, two companies, mean and std
        rouge_lines = (out_dir / "rouge.csv").read_text(encoding="utf-8").splitlines()
        assert len(rouge_lines) == 1 + 4  # header + 2 docs x (random, pdc)
        assert (out_dir / "plot_data.csv").exists()

    def test_fixture_root_env(self, runner, fixtures_dir, tmp_path, monkeypatch):
        monkeypatch.setenv("FIXTURE_ROOT", str(fixtures_dir))
        manifest = tmp_path / "manifest.csv"
        manifest.write_text(
            "company,url,fixture_file\nAlpha,https://alpha.example/p,alpha_policy.html\n",
            encoding="utf-8",
        )
        out_dir = tmp_path / "reports"
        result = runner.invoke(
            main,
            ["evaluate", "--manifest", str(manifest), "--out-dir", str(out_dir)],
            catch_exceptions=False,
        )
        assert result.exit_code == 0

    def test_malformed_manifest_exits_3(self, runner, tmp_path):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("name,address\nx,y\n", encoding="utf-8")
        result = runner.invoke(
            main, ["evaluate", "--manifest", str(manifest), "--out-dir", str(tmp_path / "o")],
        )
        assert result.exit_code == 3

    def test_kmeans_mode_with_pca_centroids(self, runner, corpus_file, fixtures_dir, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path, dim="64")
        centroid_path = tmp_path / "centroids.jsonl"
        runner.invoke(
            main,
            ["fit", "--store", str(store_path), "--k", "14", "--n-comp", "4",
             "--seed", "1", "--out", str(centroid_path)],
            catch_exceptions=False,
        )
        out_dir = tmp_path / "reports"
        result = runner.invoke(
            main,
            [
                "evaluate",
                "--manifest", str(fixtures_dir / "manifest.csv"),
                "--modes", "kmeans",
                "--centroids", str(centroid_path),
                "--out-dir", str(out_dir),
                "--dim", "64",
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        assert "0 error rows" in result.output
        ssd_lines = (out_dir / "ssd.csv").read_text(encoding="utf-8").splitlines()
        assert any(line.startswith("Alpha") for line in ssd_lines)


class TestSweep:
    def test_sweep_writes_csv(self, runner, corpus_file, tmp_path):
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus_file, store_path)
        out = tmp_path / "sweep.csv"
        result = runner.invoke(
            main,
            [
                "sweep",
                "--store", str(store_path),
                "--algorithms", "kmeans,pdc",
                "--n-comp", "2,3",
                "--k", "4",
                "--out", str(out),
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "algorithm,n_comp,silhouette"
        assert len(lines) == 5

    def test_pdc_sweep_needs_topic_embeddings(self, runner, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("a plain sentence without topics\nmore words in this one\n" * 3,
                          encoding="utf-8")
        store_path = tmp_path / "store.jsonl"
        run_embed(runner, corpus, store_path)
        result = runner.invoke(
            main,
            ["sweep", "--store", str(store_path), "--algorithms", "pdc",
             "--n-comp", "2", "--out", str(tmp_path / "s.csv")],
        )
        assert result.exit_code == 3


class TestServeCheck:
    def test_healthy_sidecar(self, runner, mock_embed_service):
        with mock_embed_service(dim=8) as service:
            result = runner.invoke(main, ["serve-check", "--endpoint", service.endpoint])
        assert result.exit_code == 0
        assert "model=mock-encoder" in result.output
        assert "dim=8" in result.output

    def test_dead_endpoint_exits_4(self, runner):
        result = runner.invoke(main, ["serve-check", "--endpoint", "http://127.0.0.1:9"])
        assert result.exit_code == 4


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, runner, fixtures_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"summarize": {"n_best": 3, "source": str(fixtures_dir / "alpha_policy.html")}}),
            encoding="utf-8",
        )
        defaulted = runner.invoke(
            main, ["--config", str(config), "summarize"], catch_exceptions=False
        )
        assert defaulted.exit_code == 0
        assert json.loads(defaulted.output)["n_best"] == 3

        overridden = runner.invoke(
            main, ["--config", str(config), "summarize", "--n-best", "1"],
            catch_exceptions=False,
        )
        assert json.loads(overridden.output)["n_best"] == 1
