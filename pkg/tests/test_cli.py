import io
import json

import pytest

from loopperc.cli import data_section, parse_graph, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_graph():
    assert parse_graph("box:2:3").edge_count == 12
    assert parse_graph("box:2:3:periodic").edge_count == 18
    assert parse_graph("path:3").edge_count == 3
    assert parse_graph("star:3").max_degree == 3
    assert parse_graph("edge").edge_count == 1


def test_delta_json():
    code, out, _ = call("delta", "--beta", "0.25", "--u", "1", "--theta", "2", "--K", "6")
    doc = json.loads(out)
    assert code == 0 and 1.24e-10 <= doc["data"]["delta"] <= 1.28e-10
    assert set(doc["metadata"]) == {"tool", "version", "spec_hash", "seed", "wall_time_s"}


def test_indicators_csv():
    code, out, _ = call("indicators", "--graph", "box:2:3", "--beta", "1.0", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# ") and lines[1] == "edge,open,blocking,nb"
    assert len(lines) == 2 + 12


def test_indicators_from_links(tmp_path):
    f = tmp_path / "c.json"
    f.write_text('{"links": [[0, 1], [0, 1]]}')
    code, out, _ = call("indicators", "--graph", "edge", "--beta", "1", "--links", str(f))
    assert code == 0 and out.splitlines()[2] == "0,1,1,0"
    f.write_text('{"links": [[5, 1]]}')
    assert call("indicators", "--graph", "edge", "--beta", "1", "--links", str(f))[0] == 2


def test_exit_codes():
    assert call("sample", "--graph", "nope", "--beta", "1")[0] == 2
    assert call("sample", "--graph", "edge", "--beta", "-1")[0] == 2
    assert call("sample", "--graph", "edge")[0] == 2
    assert call("sample", "--graph", "edge", "--beta", "1", "--seed", "x")[0] == 2
    assert call("decay", "--beta", "0.5", "--theta", "2")[0] == 2
    assert call("enumerate", "--graph", "box:2:3", "--beta", "0.3", "--n-max", "12")[0] == 3
    code, _, err = call("verify-domination", "--graph", "edge", "--beta", "3", "--theta", "2", "--n-max", "1")
    assert code == 3 and "inconclusive" in err
    assert call("verify-loops", "--trials", "50")[0] == 0


def test_config_file_and_dump(tmp_path):
    f = tmp_path / "run.toml"
    f.write_text('graph = "path:2"\nbeta = 0.4\nsamples = 5\n')
    code, out, _ = call("sample", "--config", str(f), "--dump-config", "--samples", "7")
    spec = json.loads(out)
    assert code == 0 and spec["graph"] == "path:2" and spec["samples"] == 7 and spec["beta"] == 0.4
    f.write_text("bogus = 1\n")
    assert call("sample", "--config", str(f))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("sample", "--graph", "box:2:4", "--beta", "0.3", "--samples", "20"),
        ("sample", "--graph", "path:2", "--beta", "0.3", "--theta", "2", "--samples", "20", "--chains", "2", "--burn-in", "20"),
        ("reach", "--graph", "box:2:7", "--beta", "0.5", "--radius", "3", "--samples", "100"),
        ("decay", "--beta", "0.5", "--ns", "2,3", "--samples", "100"),
        ("enumerate", "--graph", "edge", "--beta", "0.3", "--theta", "2", "--n-max", "3"),
        ("verify-loops", "--trials", "30"),
    ],
)
def test_same_seed_same_data(argv):
    a = call(*argv, "--seed", "11")
    b = call(*argv, "--seed", "11")
    assert a[0] == b[0] == 0
    assert data_section(a[1]) == data_section(b[1])


def test_output_file(tmp_path):
    out = tmp_path / "o.csv"
    code, printed, _ = call("decay", "--beta", "0.5", "--ns", "2", "--samples", "50", "--output", str(out))
    assert code == 0 and printed == "" and "n,estimate" in out.read_text()


def test_workers_do_not_change_output():
    import os
    import subprocess

    argv = ["loopperc", "sample", "--graph", "path:3", "--beta", "0.4", "--theta", "2", "--samples", "30",
            "--chains", "3", "--burn-in", "30", "--seed", "5"]
    outs = []
    for w in ("1", "2"):
        env = dict(os.environ, LOOPPERC_WORKERS=w)
        res = subprocess.run(argv, capture_output=True, text=True, env=env, check=True)
        outs.append(data_section(res.stdout))
    assert outs[0] == outs[1]


def test_zero_samples_is_metadata_only():
    code, out, _ = call("sample", "--graph", "box:2:10", "--beta", "0.2", "--theta", "1", "--samples", "0")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2 and lines[0].startswith("# ")
