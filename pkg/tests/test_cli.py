import csv
import json
from itertools import product

import numpy as np
import pytest

from oracles import best_wellformedness
from srsa import cli, rl
from srsa.color import approximate_chart, load_chart, perceptual_similarity
from srsa.errors import NonFiniteGradient


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def wcs_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("wcs")
    assert cli.main(["synth-wcs", "--languages", "3", "--seed", "4", "--out-dir", str(d)]) == 0
    return d


def write_chart(path, labs):
    lines = ["#id\trow\tcol\tL\ta\tb"]
    lines += [f"{i + 1}\tA\t{i}\t{l_}\t{a}\t{b}" for i, (l_, a, b) in enumerate(labs)]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_synth_wcs_writes_files(wcs_dir):
    for name in ("term.txt", "lang.txt", "dict.txt", "manifest_synth_wcs.json"):
        assert (wcs_dir / name).exists()


def test_analyze_wcs_row_counts(wcs_dir, tmp_path):
    out = tmp_path / "a"
    code = cli.main(["analyze-wcs", "--wcs-dir", str(wcs_dir), "--no-frontier", "--depths", "1,limit",
                     "--highlight", "syn002", "--mode-maps", "--out-dir", str(out)])
    assert code == 0
    rows = rows_of(out / "wcs_points.csv")
    assert len(rows) == 3 * (1 + 2 * 2)
    assert list(rows[0]) == cli.WCS_COLUMNS_OUT
    assert {r["highlight"] for r in rows if r["language"] == "syn002"} == {"1"}
    assert {r["highlight"] for r in rows if r["language"] != "syn002"} == {"0"}
    assert len(list((out / "modemaps").glob("*.txt"))) == 3
    man = json.loads((out / "manifest_analyze_wcs.json").read_text())
    assert man["outputs"] and man["inputs"]


def test_analyze_wcs_empty_filter(wcs_dir, tmp_path):
    out = tmp_path / "e"
    assert cli.main(["analyze-wcs", "--wcs-dir", str(wcs_dir), "--languages", "", "--out-dir", str(out)]) == 0
    assert rows_of(out / "wcs_points.csv") == []


def test_analyze_wcs_input_errors(wcs_dir, tmp_path):
    assert cli.main(["analyze-wcs", "--wcs-dir", str(tmp_path / "none"), "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["analyze-wcs", "--wcs-dir", str(wcs_dir), "--languages", "atlantis",
                     "--out-dir", str(tmp_path)]) == 1


def test_frontier_ib_two_betas(tmp_path):
    chart = write_chart(tmp_path / "chart.tsv", [[50, 0, 0], [52, 3, 0], [60, 10, 5], [70, -5, 20]])
    code = cli.main(["frontier", "ib", "--chart", str(chart), "--beta-min", "1", "--beta-max", "4",
                     "--beta-steps", "2", "--out-dir", str(tmp_path)])
    assert code == 0
    rows = rows_of(tmp_path / "ib_frontier.csv")
    assert 1 <= len(rows) <= 2
    assert list(rows[0]) == cli.IB_COLUMNS


def test_frontier_cc_matches_brute_force(tmp_path):
    labs = [[50, 0, 0], [53, 2, 1], [60, 10, 5], [64, 12, 8], [75, -5, 20]]
    chart = write_chart(tmp_path / "chart.tsv", labs)
    assert cli.main(["frontier", "cc", "--chart", str(chart), "--k-max", "5", "--out-dir", str(tmp_path)]) == 0
    sim = perceptual_similarity(load_chart(chart))
    for r in rows_of(tmp_path / "cc_frontier.csv"):
        assert float(r["wellformedness"]) == pytest.approx(best_wellformedness(sim, int(r["k"])), abs=1e-9)
        assert float(r["wellformedness_per_pair"]) == pytest.approx(float(r["wellformedness"]) / 10)


def test_manifest_digest_tracks_chart(tmp_path):
    digests = []
    for i, shift in enumerate((0.0, 1.0)):
        chart = write_chart(tmp_path / f"c{i}.tsv", [[50 + shift, 0, 0], [60, 5, 5], [70, 9, 1]])
        out = tmp_path / f"o{i}"
        cli.main(["frontier", "cc", "--chart", str(chart), "--k-max", "2", "--out-dir", str(out)])
        man = json.loads((out / "manifest_frontier.json").read_text())
        digests.append(list(man["inputs"].values())[0])
    assert digests[0] != digests[1]


TRAIN = ["train", "--updates", "4", "--batch", "4", "--vocab", "5", "--no-frontier"]


def test_train_three_seeds(tmp_path):
    assert cli.main(TRAIN + ["--seeds", "3", "--out-dir", str(tmp_path)]) == 0
    assert len(list((tmp_path / "logs").glob("*.csv"))) == 3
    assert len(list((tmp_path / "checkpoints").glob("*.json"))) == 3
    summary = rows_of(tmp_path / "summary.csv")
    assert {r["point"] for r in summary} == {"agent", "meaning_fn"}
    assert {r["n_seeds"] for r in summary} == {"3"}
    log = rows_of(next((tmp_path / "logs").glob("*.csv")))
    assert len(log) == 4 and list(log[0]) == cli.LOG_COLUMNS


def test_train_all_variants(tmp_path):
    assert cli.main(TRAIN + ["--variant", "all", "--depth", "0,2", "--out-dir", str(tmp_path)]) == 0
    ev = rows_of(tmp_path / "evaluation.csv")
    assert {(r["variant"], r["depth"]) for r in ev} == set(product(["rsa", "srsa", "rl"], ["0", "2"]))
    assert len(ev) == 12


def test_checkpoint_reloads(tmp_path):
    cli.main(TRAIN + ["--out-dir", str(tmp_path)])
    ck = json.loads(next((tmp_path / "checkpoints").glob("*.json")).read_text())
    a = rl.MlpParams.from_json(ck["agent_a"])
    cfg = rl.TrainConfig(**ck["config"])
    agent, _ = rl.evaluate(a, approximate_chart(), cfg)
    ev = [r for r in rows_of(tmp_path / "evaluation.csv") if r["point"] == "agent"][0]
    assert float(ev["complexity_nats"]) == pytest.approx(agent.complexity, rel=1e-9)


def test_train_threads_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(TRAIN + ["--seeds", "2", "--out-dir", str(a)])
    cli.main(TRAIN + ["--seeds", "2", "--threads", "2", "--out-dir", str(b)])
    assert (a / "evaluation.csv").read_text() == (b / "evaluation.csv").read_text()


def test_train_numeric_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NonFiniteGradient("nan")
    monkeypatch.setattr(rl, "train", boom)
    assert cli.main(TRAIN + ["--out-dir", str(tmp_path)]) == 2


def test_train_rejects_limit_depth(tmp_path):
    assert cli.main(TRAIN + ["--depth", "limit", "--out-dir", str(tmp_path)]) == 1


def test_rerun_reproduces(tmp_path):
    a = tmp_path / "a"
    cli.main(TRAIN + ["--seed", "3", "--out-dir", str(a)])
    b = tmp_path / "b"
    assert cli.main(["rerun", str(a / "manifest_train.json"), "--out-dir", str(b)]) == 0
    assert (a / "evaluation.csv").read_text() == (b / "evaluation.csv").read_text()


def test_game_identity_similarity(tmp_path, capsys):
    g = {"context": [1, 2, 3], "meaning_fn": [[1, 0.2], [0.5, 0.5], [0.1, 1]],
         "similarity": np.eye(3).tolist(), "prior": [0.3, 0.3, 0.4]}
    p = tmp_path / "g.json"
    p.write_text(json.dumps(g))
    assert cli.main(["game", str(p), "--format", "json", "--depth", "0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    by = {(r["variant"], r["depth"]): r for r in rep["results"]}
    for d in ("0", "limit"):
        np.testing.assert_allclose(by["rsa", d]["sender"], by["srsa", d]["sender"], atol=1e-12)
    np.testing.assert_allclose(np.sum(by["rsa", "0"]["sender"], axis=1), 1.0)


def test_game_bundled_example(capsys):
    assert cli.main(["game"]) == 0
    text = capsys.readouterr().out
    assert "srsa depth limit" in text and "grue-w" in text


def test_game_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["game", str(p)]) == 1
    p.write_text(json.dumps({"context": [1]}))
    assert cli.main(["game", str(p)]) == 1


def test_unknown_command():
    assert cli.main(["fly"]) == 1
