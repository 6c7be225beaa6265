import csv
import io
import json

import pytest

from dkastar import cli
from dkastar.fixtures import sachs_truth
from dkastar.graph import Dag, dumps_graph, loads_graph

TIMING = {"runtime_ms", "runtime_ms_std"}


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def synth(tmp_path, capsys):
    prefix = tmp_path / "s"
    assert run(capsys, "synth", "--p", 5, "--seed", 3, "--out-prefix", prefix,
               "--knowledge-kind", "known")[0] == 0
    return prefix


def test_synth_writes_three_files(synth):
    names, truth = loads_graph(synth.with_suffix(".truth.json").read_text())
    assert names == ["x1", "x2", "x3", "x4", "x5"] and isinstance(truth, Dag)
    header = synth.with_suffix(".csv").read_text().splitlines()
    assert header[0] == "x1,x2,x3,x4,x5" and len(header) == 501
    doc = json.loads(synth.with_suffix(".knowledge.json").read_text())
    a, b = doc["known"][0]
    assert truth.has_edge(names.index(a), names.index(b))


def test_synth_is_byte_identical(tmp_path, capsys):
    outputs = []
    for tag in "ab":
        prefix = tmp_path / tag
        run(capsys, "synth", "--p", 6, "--seed", 11, "--out-prefix", prefix, "--knowledge-kind", "tiers")
        outputs.append([prefix.with_name(f"{tag}{ext}").read_bytes()
                        for ext in (".csv", ".truth.json", ".knowledge.json")])
    assert outputs[0] == outputs[1]


def test_discover_round_trip(synth, tmp_path, capsys):
    out, report, dot = tmp_path / "g.json", tmp_path / "r.json", tmp_path / "g.dot"
    code, _, _ = run(capsys, "discover", "--data", synth.with_suffix(".csv"),
                     "--knowledge", synth.with_suffix(".knowledge.json"),
                     "--out", out, "--report", report, "--dot", dot)
    assert code == 0
    rep = json.loads(report.read_text())
    assert rep["eval_count"] == rep["predicted_eval_count"] == 4 * 2 ** 4
    assert dot.read_text().startswith("digraph")
    code, text, _ = run(capsys, "shd", synth.with_suffix(".truth.json"), out,
                        "--knowledge", synth.with_suffix(".knowledge.json"))
    assert code == 0
    scaled = float(text.split()[3])
    assert 0.0 <= scaled <= 1.0


def test_discover_is_deterministic(synth, capsys):
    outs = [run(capsys, "discover", "--data", synth.with_suffix(".csv"))[1] for _ in range(2)]
    assert outs[0] == outs[1] and json.loads(outs[0])["type"] == "cpdag"


def test_certify(tmp_path, capsys):
    prefix = tmp_path / "c"
    run(capsys, "synth", "--p", 4, "--seed", 8, "--out-prefix", prefix, "--knowledge-kind", "forbidden")
    report = tmp_path / "r.json"
    code, _, _ = run(capsys, "discover", "--data", prefix.with_suffix(".csv"), "--certify",
                     "--knowledge", prefix.with_suffix(".knowledge.json"), "--report", report)
    rep = json.loads(report.read_text())
    assert code == 0 and rep["certified"] is True
    assert rep["oracle_score"] == pytest.approx(rep["total_score"], rel=1e-9)


def test_certify_refuses_large_p(synth, tmp_path, capsys):
    prefix = tmp_path / "big"
    run(capsys, "synth", "--p", 6, "--out-prefix", prefix)
    code, _, err = run(capsys, "discover", "--data", prefix.with_suffix(".csv"), "--certify")
    assert code == 2 and "at most" in err


def test_conflicting_knowledge_exit_code(synth, tmp_path, capsys):
    k = tmp_path / "k.json"
    k.write_text('{"known": [["x1", "x2"]], "forbidden": [["x1", "x2"]]}')
    code, _, err = run(capsys, "discover", "--data", synth.with_suffix(".csv"), "--knowledge", k)
    assert code == 2 and "x1 -> x2" in err


def test_missing_file_exit_code(tmp_path, capsys):
    assert run(capsys, "discover", "--data", tmp_path / "nope.csv")[0] == 1


def test_bad_csv_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,abc\n")
    code, _, err = run(capsys, "discover", "--data", bad)
    assert code == 2 and "column 'b'" in err


def test_super_structure(synth, tmp_path, capsys):
    ss = tmp_path / "ss.json"
    ss.write_text('{"edges": [["x1", "x2"]]}')
    out = tmp_path / "g.json"
    code, _, _ = run(capsys, "discover", "--data", synth.with_suffix(".csv"), "--super-structure", ss,
                     "--out", out)
    assert code == 0
    edges = json.loads(out.read_text())["edges"]
    assert all({e["from"], e["to"]} == {"x1", "x2"} for e in edges)


def test_shd_of_identical_graphs(synth, capsys):
    truth = synth.with_suffix(".truth.json")
    code, out, _ = run(capsys, "shd", truth, truth)
    assert code == 0 and out == "shd 0\nshd_scaled 0.0\n"


def test_shd_reorders_variables(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(dumps_graph(Dag.from_edges(3, [(0, 1), (2, 1)]), ["p", "q", "r"]))
    b.write_text(dumps_graph(Dag.from_edges(3, [(2, 0), (1, 0)]), ["q", "r", "p"]))
    assert run(capsys, "shd", a, b)[1] == "shd 0\nshd_scaled 0.0\n"


def _bench_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_row_accounting(capsys):
    code, out, err = run(capsys, "bench", "--dims", "5", "--repeats", 3, "--knowledge-kinds", "none",
                         "--threads", 1)
    rows = _bench_rows(out)
    assert code == 0 and len(rows) == 4
    assert [r["repeat"] for r in rows] == ["0", "1", "2", "summary"]
    assert all(r["eval_count"] == "80" for r in rows[:3])
    assert "shd_scaled" in err


def test_bench_is_reproducible_apart_from_timing(capsys):
    argv = ["bench", "--dims", "4,5", "--repeats", 2, "--seed", 9]
    single = _bench_rows(run(capsys, *argv, "--threads", 1)[1])
    pooled = _bench_rows(run(capsys, *argv, "--threads", 2)[1])
    strip = lambda rows: [{k: v for k, v in r.items() if k not in TIMING} for r in rows]
    assert strip(single) == strip(pooled)
    assert len(single) == 2 * 4 * 3


def test_bench_rejects_unknown_kind(capsys):
    assert run(capsys, "bench", "--knowledge-kinds", "psychic")[0] == 2


def test_verify_counts_small(capsys):
    code, out, _ = run(capsys, "verify-counts", "--min-p", 4, "--max-p", 6, "--random-tiers", 3)
    assert code == 0 and "all counts exact" in out
    assert "tiers-3" in out and "FAILED" not in out


def test_verify_counts_bad_range(capsys):
    assert run(capsys, "verify-counts", "--min-p", 6, "--max-p", 4)[0] == 2


def test_sachs_truth(capsys, tmp_path):
    code, out, _ = run(capsys, "sachs-truth")
    names, dag = loads_graph(out)
    assert code == 0 and len(names) == 11 and dag.n_edges() == 17
    assert sachs_truth()[1] == dag
    target = tmp_path / "s.json"
    run(capsys, "sachs-truth", "--out", target)
    assert target.read_text() == out
