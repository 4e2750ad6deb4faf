import json
import logging
import subprocess
import sys

import pytest

from hyperlap import scenarios
from hyperlap.cli import main
from hyperlap.hypergraph import Hyperedge, Hypergraph, save_hypergraph
from hyperlap.tensor import ones_tensor


def run(capsys, *argv):
    """Run the CLI; returns (exit code, stdout, logged messages)."""
    handler = _Collect()
    logging.getLogger("hyperlap").addHandler(handler)
    try:
        code = main(list(argv))
    finally:
        logging.getLogger("hyperlap").removeHandler(handler)
    return code, capsys.readouterr().out, "\n".join(handler.messages)


class _Collect(logging.Handler):
    def __init__(self):
        super().__init__()
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


def test_laplacian_fig_a(tmp_path, capsys):
    code, out, _ = run(capsys, "laplacian", "--graph", "fig-a", "--out", str(tmp_path / "new" / "dir"))
    assert code == 0
    report = json.loads(out)
    assert report["layers"][0]["diagonal"] == [63.0] * 4
    assert (tmp_path / "new" / "dir" / "laplacian_def3_k4.json").exists()


def test_laplacian_def2_triangle(tmp_path, capsys):
    save_hypergraph(Hypergraph(3, [Hyperedge((0, 1, 2))], directed=False), tmp_path / "tri.json")
    code, out, _ = run(capsys, "laplacian", "--graph", str(tmp_path / "tri.json"), "--spec", "def2", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "laplacian_def2_k3.json").read_text())
    off = [e[-1] for e in doc["entries"] if len(set(e[:-1])) > 1]
    assert off == [-0.5] * 6


def test_laplacian_signed_with_def3_is_input_error(tmp_path, capsys):
    code, _, err = run(capsys, "laplacian", "--graph", "fig-c", "--spec", "def3", "--out", str(tmp_path))
    assert code == 2 and "def4" in err


def test_eig_negated_laplacian(capsys):
    code, out, _ = run(capsys, "eig", "--graph", "fig-a", "--negate")
    assert code == 0
    obj = json.loads(out)
    assert abs(obj["lambda"]) < 1e-10 and obj["method"] == "perron_metzler"
    assert all(abs(v - 1) < 1e-10 for v in obj["x"])


def test_eig_all_ones_tensor(tmp_path, capsys):
    path = tmp_path / "J.json"
    path.write_text(ones_tensor(4, 4).dumps())
    code, out, _ = run(capsys, "eig", "--tensor", str(path))
    assert code == 0 and abs(json.loads(out)["lambda"] - 64) < 1e-10


def test_eig_reducible_is_failure(tmp_path, capsys):
    path = tmp_path / "R.json"
    path.write_text(json.dumps({"order": 3, "dim": 2, "entries": [[1, 1, 1, 1.0]]}))
    code, _, err = run(capsys, "eig", "--tensor", str(path))
    assert code == 1 and "reducible" in err


def test_eig_bad_inputs(tmp_path, capsys):
    assert run(capsys, "eig", "--tensor", str(tmp_path / "none.json"))[0] == 2
    assert run(capsys, "eig")[0] == 2
    assert run(capsys, "eig", "--graph", "fig-a")[0] == 2  # L itself is not Metzler
    assert run(capsys, "eig", "--graph", "fig-b")[0] == 2  # two layers, no --order


def test_balance_builtins(capsys):
    code, out, _ = run(capsys, "balance", "--graph", "fig-c")
    assert code == 0 and json.loads(out) == {"balanced": True, "sigma": [1, 1, -1, -1]}
    code, out, _ = run(capsys, "balance", "--graph", "fig-a")
    assert json.loads(out)["sigma"] == [1, 1, 1, 1]


def test_balance_frustrated(tmp_path, capsys):
    edges = [Hyperedge((1,), 1.0, 0), Hyperedge((2,), 1.0, 1), Hyperedge((0,), -1.0, 2)]
    save_hypergraph(Hypergraph(3, edges), tmp_path / "f.json")
    code, out, _ = run(capsys, "balance", "--graph", str(tmp_path / "f.json"))
    obj = json.loads(out)
    assert code == 0 and obj["balanced"] is False
    assert obj["conflict_nodes"] == [1, 2, 3] and len(obj["conflict"]) == 3


def test_bad_graph_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 2, "directed": True, "edges": [{"tail": 3, "members": [1]}]}))
    code, _, err = run(capsys, "balance", "--graph", str(path))
    assert code == 2 and "edges[0].tail" in err


def test_simulate_outputs(tmp_path, capsys):
    out_dir = tmp_path / "sim"
    code, out, _ = run(capsys, "simulate", "--graph", "fig-d", "--spec", "def4", "--seed", "5", "--out", str(out_dir), "--no-plot")
    assert code == 0
    s = json.loads(out)
    assert s["overall"] == "pass" and s["consensus"]["mode"] == "bipartite"
    assert s["config"]["seed"] == 5
    assert (out_dir / "fig-d.csv").exists() and not (out_dir / "fig-d.png").exists()


def test_simulate_config_file(tmp_path, capsys):
    cfg = scenarios.ExperimentConfig("mine", "fig-np", "def4", f="arctan", t_end=0.5)
    (tmp_path / "c.json").write_text(cfg.dumps())
    code, out, _ = run(capsys, "simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path), "--no-plot")
    assert code == 0 and json.loads(out)["experiment"] == "mine"
    assert run(capsys, "simulate", "--config", str(tmp_path / "none.json"))[0] == 2


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ["simulate", "--graph", "fig-b", "--seed", "9", "--no-plot"]
    run(capsys, *args, "--out", str(tmp_path / "a"))
    run(capsys, *args, "--out", str(tmp_path / "b"))
    for name in ("fig-b.summary.json", "fig-b.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_env_overrides_flag(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HYPERLAP_SEED", "77")
    code, out, _ = run(capsys, "simulate", "--graph", "fig-a", "--seed", "1", "--out", str(tmp_path), "--no-plot")
    assert json.loads(out)["config"]["seed"] == 77
    monkeypatch.setenv("HYPERLAP_SEED", "x")
    assert run(capsys, "simulate", "--graph", "fig-a", "--out", str(tmp_path), "--no-plot")[0] == 2


def test_repro_single(tmp_path, capsys):
    code, out, _ = run(capsys, "repro", "fig-np", "--out", str(tmp_path), "--no-plot")
    line = json.loads(out)
    assert code == 0 and line["ok"] and line["sigma"] == [1, 1, -1, 1]


def test_repro_all_writes_figures(tmp_path, capsys):
    out_dir = tmp_path / "missing" / "out"
    code, out, _ = run(capsys, "repro", "all", "--out", str(out_dir))
    assert code == 0
    lines = [json.loads(s) for s in out.splitlines()]
    assert [d["experiment"] for d in lines] == list(scenarios.BUILTIN_EXPERIMENTS)
    assert all(d["ok"] and d["overall"] == "pass" for d in lines)
    for name in scenarios.BUILTIN_EXPERIMENTS:
        assert (out_dir / f"{name}.png").exists()
    assert (out_dir / "overview.png").exists()


def test_repro_corrupted_builtin_exits_1(tmp_path, capsys, monkeypatch):
    def corrupted():
        H = scenarios.graph_fig_d()
        e = H.edges[0]
        return Hypergraph(4, [Hyperedge(e.members, -e.weight, e.tail)] + list(H.edges[1:]))

    monkeypatch.setitem(scenarios.BUILTIN_GRAPHS, "fig-d", corrupted)
    code, out, err = run(capsys, "repro", "fig-d", "--out", str(tmp_path), "--no-plot")
    assert code == 1 and json.loads(out)["ok"] is False
    assert "faction vector" in err


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_console_entry_point_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hyperlap.cli", "balance", "--graph", "fig-np"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["sigma"] == [1, 1, -1, 1]
