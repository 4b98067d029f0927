import json

import numpy as np
import pytest

from robustecd.bench import (
    ExperimentConfig,
    Registry,
    derive_rng,
    load_dataset,
    prepare_target,
    run_experiment,
    run_experiment_full,
)
from robustecd.errors import ConfigError, RegistryError
from robustecd.metrics import rimp

SE_FAST = {"samples_per_index": 1, "beta_a": 0.5}


class TestRegistry:
    def test_builtin_karate(self):
        ds = load_dataset("karate")
        assert (ds.n, ds.m, ds.k) == (34, 78, 2)

    def test_duplicate(self, karate_paths):
        reg = Registry()
        reg.register("k", *karate_paths)
        with pytest.raises(RegistryError, match="already"):
            reg.register("k", *karate_paths)

    def test_unknown_mentions_env(self, monkeypatch):
        monkeypatch.delenv("ROBUSTECD_DATA", raising=False)
        with pytest.raises(RegistryError, match="ROBUSTECD_DATA"):
            Registry().get("polbooks")

    def test_env_lookup(self, tmp_path, monkeypatch, karate_paths):
        for src, ext in zip(karate_paths, ("edges", "labels")):
            (tmp_path / f"club.{ext}").write_text(open(src).read())
        monkeypatch.setenv("ROBUSTECD_DATA", str(tmp_path))
        assert Registry().get("club").m == 78


class TestSeeding:
    def test_streams_are_reproducible_and_distinct(self):
        a = derive_rng(3, 1, "louvain").integers(0, 2**62, 4)
        assert np.array_equal(a, derive_rng(3, 1, "louvain").integers(0, 2**62, 4))
        for other in (derive_rng(3, 2, "louvain"), derive_rng(4, 1, "louvain"), derive_rng(3, 1, "fg")):
            assert not np.array_equal(a, other.integers(0, 2**62, 4))


class TestConfig:
    @pytest.mark.parametrize("bad", [
        {"method": "edmot"}, {"trials": 0}, {"graph": "x.edges"}, {"detectors": []}, {"unknown_key": 1},
    ])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            ExperimentConfig(graph=str(tmp_path / "a"), labels=str(tmp_path / "b"))

    def test_bad_json(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json("{not json")

    def test_detector_dicts(self):
        cfg = ExperimentConfig.from_dict({"detectors": [{"kind": "walktrap", "walk_length": 3}, "fg"]})
        assert [d.name for d in cfg.detectors] == ["WT", "FG"]


class TestRuns:
    def test_reports_are_byte_identical(self):
        cfg = {"detectors": ["louvain", "lp"], "method": "se", "se": SE_FAST, "trials": 3, "base_seed": 4}
        a = run_experiment(ExperimentConfig.from_dict(cfg))
        b = run_experiment(ExperimentConfig.from_dict(cfg))
        assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()

    def test_serial_matches_parallel(self):
        cfg = {"detectors": ["louvain", "fg"], "method": "se", "se": SE_FAST, "trials": 4, "base_seed": 9}
        serial = run_experiment(ExperimentConfig.from_dict(cfg))
        parallel = run_experiment(ExperimentConfig.from_dict({**cfg, "workers": 2}))
        assert serial.to_json() == parallel.to_json()

    def test_rimp_consistent_with_means(self):
        cfg = ExperimentConfig.from_dict({"detectors": ["lp"], "method": "se", "se": SE_FAST, "trials": 3})
        rep = run_experiment(cfg)
        ref, enh = rep.get("LP", "none", "nmi"), rep.get("LP", "se", "nmi")
        assert enh.rimp == pytest.approx(rimp(ref.mean, enh.mean))
        assert ref.rimp is None
        assert rep.avg_rimp("se", "nmi") == pytest.approx(enh.rimp)

    def test_unenhanced_rows_and_timings(self):
        res = run_experiment_full(ExperimentConfig(detectors=["fg"], trials=2))
        rows = json.loads(res.report.to_json())["rows"]
        assert [r["metric"] for r in rows] == ["nmi", "ari", "q"]
        # a deterministic detector gives zero spread
        assert rows[0]["std"] == 0 and rows[0]["mean"] == pytest.approx(0.692, abs=1e-3)
        assert set(res.timings) == {("FG", "none")}

    def test_reference_shares_trial_seeds(self):
        cfg = ExperimentConfig(detectors=["louvain"], method="se", se=SE_FAST, trials=3, base_seed=2)
        ref = run_experiment(ExperimentConfig(detectors=["louvain"], trials=3, base_seed=2))
        assert run_experiment(cfg).get("LOU", "none", "nmi").values == ref.get("LOU", "none", "nmi").values

    def test_ground_truth_k_auto(self):
        cfg = ExperimentConfig(method="se", trials=1, se={**SE_FAST, "threshold_mode": "approx", "ground_truth_k": "auto"})
        assert run_experiment(cfg).get("LOU", "se", "nmi").values

    @pytest.mark.filterwarnings("ignore:only . of . swaps")
    def test_attack_target_is_seeded(self):
        cfg = ExperimentConfig(attack={"method": "q", "budget": 3, "ga": {"population_size": 6, "generations": 2}}, base_seed=5)
        ds = cfg.load()
        a, b = prepare_target(cfg, ds), prepare_target(cfg, ds)
        assert a.same_edges(b) and not a.same_edges(ds.graph)
        assert np.array_equal(a.degrees, ds.graph.degrees)
