import json
from pathlib import Path

import pytest

from lscdeval import ingest
from lscdeval.bench import (
    RunConfig,
    config_from_dict,
    render_plot,
    render_tsv,
    run,
    sample_uses,
)
from lscdeval.cli import main
from lscdeval.errors import ConfigError
from lscdeval.fixture import FixtureSpec, make_fixture

from conftest import MINIFIX, make_usage


@pytest.fixture(scope="module")
def fix(tmp_path_factory):
    out = tmp_path_factory.mktemp("benchfix")
    make_fixture(FixtureSpec(), seed=17, out_dir=out, with_store=True)
    return out


def gold_config(fix: Path, **overrides) -> RunConfig:
    base = dict(
        dataset=str(fix / "manifest.json"),
        task="compare",
        split="all",
        pair_source="golden-pairs",
        scorer="external-file",
        scores_path=str(fix / "gold_scores.tsv"),
        seed=5,
    )
    base.update(overrides)
    return RunConfig(**base)


class TestSampleUses:
    usages = [make_usage(f"u{i:02d}") for i in range(100)]

    def test_identity_when_n_covers(self):
        assert sample_uses(self.usages[:5], 5, seed=0) == sorted(
            self.usages[:5], key=lambda u: u.id
        )

    def test_single_reproducible(self):
        a = sample_uses(self.usages, 1, seed=33)
        b = sample_uses(self.usages, 1, seed=33)
        assert a == b and len(a) == 1

    def test_different_seeds_differ(self):
        a = {u.id for u in sample_uses(self.usages, 50, seed=1)}
        b = {u.id for u in sample_uses(self.usages, 50, seed=2)}
        assert a != b

    def test_bad_n(self):
        with pytest.raises(ConfigError):
            sample_uses(self.usages, 0, seed=0)


class TestPipelineSelfConsistency:
    def test_wic_graded_gold_scores_spearman_one(self, fix):
        report = run(gold_config(fix, task="wic-graded"))
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)
        assert report.metrics["spearman"]["coverage"] == 1.0

    def test_compare_apd_gold_medians_spearman_one(self, fix):
        report = run(gold_config(fix, task="compare", measure="apd"))
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)

    def test_wsi_planted_ari_one(self, fix):
        report = run(gold_config(fix, task="wsi"))
        assert report.metrics["ari"]["value"] == pytest.approx(1.0)
        assert all(v == 1.0 for v in report.metrics["ari"]["per_lemma"].values())

    def test_graded_jsd_matches_planted(self, fix):
        report = run(gold_config(fix, task="lscd-graded", measure="jsd"))
        gold = ingest.parse_gold_lscd(fix / "gold.tsv")
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)
        for row in report.predictions:
            assert row["value"] == pytest.approx(
                gold[row["lemma"]].change_graded, abs=1e-6
            )

    def test_binary_f1_one(self, fix):
        report = run(gold_config(fix, task="lscd-binary"))
        assert report.metrics["f1"]["value"] == 1.0
        assert report.metrics["f1_gain"]["value"] == 1.0
        assert report.metrics["f1_loss"]["value"] == 1.0

    def test_wic_ordinal_alpha_one(self, fix):
        report = run(gold_config(fix, task="wic-ordinal", thresholds=(1.5, 2.5, 3.5)))
        assert report.metrics["krippendorff_alpha"]["value"] == pytest.approx(1.0)

    def test_wic_pair_type_breakdown_present(self, fix):
        report = run(gold_config(fix, task="wic-graded"))
        assert "spearman_compare" in report.metrics
        assert "spearman_earlier" in report.metrics


class TestEmbeddingRoute:
    def test_wsi_from_store(self, fix):
        config = RunConfig(
            dataset=str(fix / "manifest.json"),
            task="wsi",
            pair_source="generated",
            scorer="embedding",
            embeddings_path=str(fix / "embeddings.bin"),
            metric="cosine",
            cluster_threshold=0.5,
            seed=2,
        )
        report = run(config)
        assert report.metrics["ari"]["value"] == pytest.approx(1.0)

    def test_cos_measure(self, fix):
        config = RunConfig(
            dataset=str(fix / "manifest.json"),
            task="lscd-graded",
            measure="cos",
            embeddings_path=str(fix / "embeddings.bin"),
            metric="cosine",
            seed=2,
        )
        report = run(config)
        entry = report.metrics["spearman"]
        assert entry["orientation"] == "distance"
        assert entry["predictions_negated"] is False
        assert entry["value"] > 0.5  # prototype distance tracks planted change

    def test_apd_similarity_flipped_for_change(self, fix):
        config = RunConfig(
            dataset=str(fix / "manifest.json"),
            task="lscd-graded",
            measure="apd",
            pair_source="generated",
            scorer="embedding",
            embeddings_path=str(fix / "embeddings.bin"),
            metric="cosine",
            seed=2,
        )
        report = run(config)
        assert report.metrics["spearman"]["predictions_negated"] is True
        assert report.metrics["spearman"]["value"] > 0.8


class TestConfigValidation:
    def test_unknown_task(self, fix):
        with pytest.raises(ConfigError, match="unknown task"):
            run(gold_config(fix, task="lscd-everything"))

    def test_measure_task_mismatch(self, fix):
        with pytest.raises(ConfigError, match="incompatible"):
            run(gold_config(fix, task="compare", measure="jsd"))

    def test_missing_scorer(self, fix):
        with pytest.raises(ConfigError, match="scorer"):
            run(gold_config(fix, task="wsi", scorer=None, scores_path=None))

    def test_thresholds_required_for_ordinal(self, fix):
        with pytest.raises(ConfigError, match="thresholds"):
            run(gold_config(fix, task="wic-ordinal"))

    def test_dataset_without_task_backing(self, fix):
        manifest = ingest.load_manifest(fix / "manifest.json")
        stripped = ingest.DatasetManifest(
            name=manifest.name, version=manifest.version, language=manifest.language,
            tasks=("wic", "compare"), root=manifest.root, lemmas=manifest.lemmas,
            gold_path=manifest.gold_path, split_path=manifest.split_path,
        )
        path = fix / "manifest-stripped.json"
        ingest.write_manifest(stripped, path)
        with pytest.raises(ConfigError, match="does not support"):
            run(gold_config(fix, dataset=str(path), task="wsi"))
        # prediction-only tasks with gold backing still work
        report = run(gold_config(fix, dataset=str(path), task="compare", measure="apd"))
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)

    def test_generated_pairs_rejected_for_wic(self, fix):
        with pytest.raises(ConfigError, match="golden pairs"):
            run(gold_config(fix, task="wic-graded", pair_source="generated"))

    def test_diasense_ratio_needs_distances(self, fix):
        with pytest.raises(ConfigError, match="diasense ratio"):
            run(gold_config(fix, task="lscd-graded", measure="diasense"))

    def test_unknown_config_key(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            config_from_dict({"dataset": "x", "task": "wsi", "verbosity": 3})


class TestSampling:
    def test_corpus_sample_shrinks_and_stays_deterministic(self, fix):
        sampled = gold_config(fix, task="lscd-graded", measure="jsd",
                              use_source="corpus-sample", n_uses=12)
        r1 = run(sampled)
        r2 = run(sampled)
        assert r1.to_dict() == r2.to_dict()
        full = run(gold_config(fix, task="lscd-graded", measure="jsd"))
        assert r1.metrics["spearman"]["value"] is not None
        assert r1.config_hash != full.config_hash

    def test_generated_pairs_subsampling(self, fix):
        config = gold_config(
            fix, task="compare", measure="apd", pair_source="generated",
            max_pairs=20, scorer="embedding", scores_path=None,
            embeddings_path=str(fix / "embeddings.bin"), metric="cosine",
        )
        r1 = run(config)
        r2 = run(config)
        assert r1.to_dict() == r2.to_dict()
        assert r1.metrics["spearman"]["n"] == 10

    def test_scores_are_distances_flag(self, fix, tmp_path):
        # negated-distance scores must rank identically to the originals
        import csv

        src = fix / "gold_scores.tsv"
        flipped = tmp_path / "as_distances.tsv"
        with open(src, newline="") as fh:
            rows = list(csv.reader(fh, delimiter="\t"))
        with open(flipped, "w", newline="") as fh:
            fh.write("identifier1\tidentifier2\tscore\n")
            for id1, id2, score in rows[1:]:
                fh.write(f"{id1}\t{id2}\t{-float(score)}\n")
        report = run(gold_config(fix, task="compare", measure="apd",
                                 scores_path=str(flipped), scores_are_distances=True))
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)


class TestSplitDiscipline:
    def test_test_split_selects_subset(self, fix):
        report = run(gold_config(fix, task="lscd-graded", measure="jsd", split="test"))
        split = ingest.load_split(fix / "split.tsv")
        test_lemmas = set(split.lemmas("test"))
        assert {r["lemma"] for r in report.predictions} == test_lemmas

    def test_unknown_split_value(self, fix):
        with pytest.raises(ValueError):
            run(gold_config(fix, split="validation"))


class TestDeterminismAndRendering:
    def test_reports_byte_identical(self, fix, tmp_path):
        for sub in ("a", "b"):
            config = gold_config(fix, task="lscd-graded", measure="jsd",
                                 out=str(tmp_path / sub))
            run(config)
        for name in ("report.json", "metrics.tsv", "predictions.tsv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_tsv_round_trip_metric_values(self, fix, tmp_path):
        report = run(gold_config(fix, task="lscd-graded", measure="jsd"))
        render_tsv(report.to_dict(), tmp_path)
        rows = (tmp_path / "metrics.tsv").read_text().splitlines()
        header = rows[0].split("\t")
        parsed = {}
        for line in rows[1:]:
            cells = dict(zip(header, line.split("\t")))
            parsed[cells["metric"]] = float(cells["value"])
        for name in ("spearman", "pearson"):
            assert parsed[name] == report.metrics[name]["value"]

    def test_timing_not_serialized(self, fix):
        report = run(gold_config(fix))
        assert report.timing_seconds > 0.0
        assert "timing" not in json.dumps(report.to_dict())

    def test_empty_predictions_drop_policy_reports_coverage_zero(self, fix, tmp_path):
        empty_scores = tmp_path / "none.tsv"
        empty_scores.write_text("identifier1\tidentifier2\tscore\n")
        config = gold_config(
            fix, task="lscd-graded", measure="jsd",
            scores_path=str(empty_scores), missing_policy="drop-with-coverage",
        )
        report = run(config)
        assert report.metrics["spearman"]["value"] is None
        assert report.metrics["spearman"]["coverage"] == 0.0

    def test_plot_two_configs_one_file(self, fix, tmp_path):
        r1 = run(gold_config(fix, task="compare", measure="apd", label="apd"))
        r2 = run(gold_config(fix, task="compare", measure="compare-clusters",
                             label="clusters"))
        path = render_plot([r1.to_dict(), r2.to_dict()], tmp_path / "plot.png")
        assert path.exists() and path.stat().st_size > 0

    def test_write_report_all_formats(self, fix, tmp_path):
        from lscdeval.bench import write_report

        report = run(gold_config(fix, task="compare", measure="apd"))
        written = write_report(report, tmp_path, formats=("json", "tsv", "plot"))
        names = {p.name for p in written}
        assert names == {"report.json", "metrics.tsv", "predictions.tsv", "report.png"}

    def test_plot_rejects_mixed_tasks(self, fix, tmp_path):
        r1 = run(gold_config(fix, task="compare", measure="apd"))
        r2 = run(gold_config(fix, task="wsi"))
        with pytest.raises(ConfigError, match="one task"):
            render_plot([r1.to_dict(), r2.to_dict()], tmp_path / "plot.png")


class TestCli:
    def test_full_cli_cycle(self, tmp_path):
        fix_dir = tmp_path / "fix"
        out_dir = tmp_path / "out"
        assert main(["fixture", "--out", str(fix_dir), "--seed", "3"]) == 0
        config = {
            "task": "compare",
            "pair_source": "golden-pairs",
            "scorer": "external-file",
            "scores_path": str(fix_dir / "gold_scores.tsv"),
            "measure": "apd",
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        code = main([
            "run", "--config", str(config_path),
            "--dataset", str(fix_dir / "manifest.json"),
            "--seed", "1", "--out", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "report.json").exists()
        assert main(["validate", "--dataset", str(fix_dir / "manifest.json")]) == 0
        assert main([
            "report", str(out_dir / "report.json"),
            "--format", "plot", "--out", str(tmp_path / "plots"),
        ]) == 0
        assert (tmp_path / "plots" / "results.png").exists()

    def test_config_error_exit_2(self, tmp_path):
        assert main(["run", "--dataset", "missing.json", "--task", "nope",
                     "--out", str(tmp_path)]) == 2

    def test_data_error_exit_3(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text("{not json")
        assert main(["validate", "--dataset", str(bad)]) == 3

    def test_oracle_on_small_dataset(self, tmp_path):
        root = tmp_path / "tiny"
        (root / "data" / "arm").mkdir(parents=True)
        uses_rows = ["lemma\tidentifier\tcontext\tgrouping\tindexes_target_token"]
        for i, grouping in enumerate((1, 1, 2, 2)):
            uses_rows.append(f"arm\tu{i}\tthe arm here\t{grouping}\t4:7")
        (root / "data" / "arm" / "uses.tsv").write_text("\n".join(uses_rows) + "\n")
        judgment_rows = [
            "identifier1\tidentifier2\tannotator\tjudgment",
            "u0\tu1\tann1\t4", "u2\tu3\tann1\t4",
            "u0\tu2\tann1\t1", "u1\tu3\tann1\t1",
        ]
        (root / "data" / "arm" / "judgments.tsv").write_text("\n".join(judgment_rows) + "\n")
        ingest.write_manifest(
            ingest.DatasetManifest(name="tiny", version="1", language="xx",
                                   tasks=("wic",), root=root, lemmas=("arm",),
                                   gold_path=None, split_path=None),
            root / "manifest.json",
        )
        out = tmp_path / "clusters.tsv"
        assert main(["oracle", "--dataset", str(root / "manifest.json"),
                     "--lemma", "arm", "--out", str(out)]) == 0
        clustering = ingest.parse_clusters(out)
        assert clustering.label("u0") == clustering.label("u1")
        assert clustering.label("u2") == clustering.label("u3")
        assert clustering.label("u0") != clustering.label("u2")

    def test_oracle_size_guard_exit_2(self, minifix_manifest):
        manifest = ingest.load_manifest(minifix_manifest)
        assert main(["oracle", "--dataset", str(minifix_manifest),
                     "--lemma", manifest.lemmas[0]]) == 2


class TestMinifixEndToEnd:
    def test_bundled_fixture_pipeline(self, minifix_manifest):
        config = RunConfig(
            dataset=str(minifix_manifest),
            task="lscd-graded",
            measure="jsd",
            pair_source="golden-pairs",
            scorer="external-file",
            scores_path=str(MINIFIX / "gold_scores.tsv"),
            seed=0,
        )
        report = run(config)
        assert report.metrics["spearman"]["value"] == pytest.approx(1.0, abs=1e-12)
