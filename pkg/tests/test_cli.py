import json

from steiner_mcts.cli import main


def test_full_workflow(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["generate", "--model", "geometric", "--n", "12", "--count", "6", "--terminals", "5",
                 "--seed", "2", "--out-dir", str(data)]) == 0
    manifest = json.loads((data / "manifest.json").read_text())
    assert len(manifest["instances"]) == 6 and all("file" in e for e in manifest["instances"])

    samples = tmp_path / "data" / "samples.jsonl"
    assert main(["label", "--manifest", str(data / "manifest.json"), "--k", "3", "--out", str(samples)]) == 0
    ckpt = tmp_path / "m.npz"
    assert main(["train", "--dataset", str(samples), "--epochs", "2", "--hidden", "8", "--seed", "1",
                 "--out-checkpoint", str(ckpt)]) == 0
    assert ckpt.exists()

    inst = data / manifest["instances"][0]["file"]
    capsys.readouterr()
    main(["solve-exact", "--instance", str(inst)])
    exact = json.loads(capsys.readouterr().out)
    main(["solve-2approx", "--instance", str(inst), "--out", str(tmp_path / "a.json")])
    approx = json.loads((tmp_path / "a.json").read_text())
    main(["solve-mcts", "--instance", str(inst), "--checkpoint", str(ckpt), "--simulations", "10", "--trace"])
    mcts = json.loads(capsys.readouterr().out)
    assert exact["cost"] <= mcts["cost"] <= approx["cost"]
    assert {"edges", "runtime_ms", "moves"} <= set(mcts)

    out = tmp_path / "bench"
    assert main(["bench", "--manifest", str(data / "manifest.json"), "--checkpoint", str(ckpt),
                 "--out-dir", str(out), "--simulations", "5", "--no-timing"]) == 0
    first = (out / "results.csv").read_text()
    main(["bench", "--manifest", str(data / "manifest.json"), "--checkpoint", str(ckpt),
          "--out-dir", str(out), "--simulations", "5", "--no-timing"])
    assert (out / "results.csv").read_text() == first


def test_generate_fractions(tmp_path):
    main(["generate", "--model", "erdos_renyi", "--n", "50", "--count", "4", "--fractions", "0.2,0.4,0.6,0.8",
          "--weighted", "--out-dir", str(tmp_path)])
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [e["config"]["terminal_count"] for e in manifest["instances"]] == [10, 20, 30, 40]
