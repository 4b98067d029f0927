import json
import subprocess
import sys

import pytest

from robustecd.cli import main
from robustecd.graph import read_edge_list, read_labels
from robustecd.metrics import nmi


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def stochastic_commands(paths, out):
    g, lab = paths
    base = ["--graph", g, "--seed", 7]
    return {
        "detect": ["detect", *base, "--detector", "lp"],
        "enhance-ga": ["enhance-ga", *base, "--labels", lab, "--pop", 8, "--gens", 3, "--out-graph", out / "ga.edges"],
        "enhance-se": ["enhance-se", *base, "--samples", 1, "--beta-a", 0.5],
        "attack-q": ["attack", *base, "--budget", 3, "--pop", 6, "--gens", 2],
        "attack-dm": ["attack", *base, "--labels", lab, "--method", "dm", "--budget", 3, "--target", 0],
        "extract-sub": ["extract-sub", *base, "--labels", lab, "--x", 2, "--h", 1, "--out-prefix", out / "sub"],
    }


@pytest.mark.filterwarnings("ignore")
@pytest.mark.parametrize("name", ["detect", "enhance-ga", "enhance-se", "attack-q", "attack-dm", "extract-sub"])
def test_same_seed_byte_identical(name, run, karate_paths, tmp_path):
    outputs = []
    for rep in range(2):
        d = tmp_path / str(rep)
        d.mkdir()
        code, out, _ = run(*stochastic_commands(karate_paths, d)[name])
        assert code == 0
        files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
        outputs.append((out, files))
    assert outputs[0] == outputs[1]
    assert outputs[0][0] or outputs[0][1]


@pytest.mark.parametrize("name", ["detect", "enhance-ga", "enhance-se", "attack-q", "attack-dm", "extract-sub"])
def test_seed_is_mandatory(name, karate_paths, tmp_path, capsys):
    argv = [str(a) for a in stochastic_commands(karate_paths, tmp_path)[name]]
    i = argv.index("--seed")
    with pytest.raises(SystemExit) as exc:
        main(argv[:i] + argv[i + 2:])
    assert exc.value.code == 2
    assert "--seed" in capsys.readouterr().err


def test_detect_partition_file(run, karate_paths, tmp_path):
    out = tmp_path / "p.labels"
    assert run("detect", "--graph", karate_paths[0], "--seed", 0, "--detector", "fg", "--out-partition", out)[0] == 0
    g = read_edge_list(karate_paths[0])
    assert read_labels(out, g).k == 3


def test_evaluate(run, karate_paths):
    code, out, _ = run("evaluate", "--graph", karate_paths[0], "--labels", karate_paths[1], "--partition", karate_paths[1])
    assert code == 0
    vals = json.loads(out)
    assert vals["nmi"] == 1.0 and vals["ari"] == 1.0 and vals["k"] == 2
    assert vals["q"] == pytest.approx(0.3715, abs=1e-4)


def test_enhance_se_recovers_factions(run, karate_paths, tmp_path):
    out = tmp_path / "se.labels"
    code, _, _ = run("enhance-se", "--graph", karate_paths[0], "--labels", karate_paths[1], "--seed", 0,
                     "--threshold-mode", "approx", "--out-partition", out)
    assert code == 0
    g = read_edge_list(karate_paths[0])
    assert nmi(read_labels(out, g), read_labels(karate_paths[1], g)) == 1.0


def test_benchmark(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"detectors": ["fg"], "trials": 2}))
    code, out, err = run("benchmark", "--config", cfg, "--timings", "--out-json", tmp_path / "r.json")
    assert code == 0
    assert out.splitlines()[0] == "dataset,detector,method,metric,mean,std,rimp"
    assert "FG\tnone" in err
    assert json.loads((tmp_path / "r.json").read_text())["rows"][0]["mean"] == pytest.approx(0.692, abs=1e-3)


class TestErrors:
    def test_missing_graph_file(self, run, tmp_path):
        code, _, err = run("detect", "--graph", tmp_path / "nope.edges", "--seed", 0)
        assert code == 1 and err.startswith("robustecd: error:")

    def test_malformed_graph(self, run, tmp_path):
        f = tmp_path / "bad.edges"
        f.write_text("1 2 3 4\n")
        code, _, err = run("detect", "--graph", f, "--seed", 0)
        assert code == 1 and "error" in err

    def test_dm_needs_labels(self, run, karate_paths):
        code, _, err = run("attack", "--graph", karate_paths[0], "--seed", 0, "--method", "dm", "--budget", 1, "--target", 0)
        assert code == 1 and "--labels" in err

    def test_bad_config(self, run, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"method": "edmot"}))
        assert run("benchmark", "--config", cfg)[0] == 1

    def test_unknown_dataset(self, run, tmp_path, monkeypatch):
        monkeypatch.delenv("ROBUSTECD_DATA", raising=False)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dataset": "polbooks"}))
        code, _, err = run("benchmark", "--config", cfg)
        assert code == 1 and "polbooks" in err


def test_module_entry_point(karate_paths):
    proc = subprocess.run([sys.executable, "-m", "robustecd", "detect", "--graph", karate_paths[0], "--seed", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 34
    proc = subprocess.run([sys.executable, "-m", "robustecd", "detect", "--graph", karate_paths[0]],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "--seed" in proc.stderr
