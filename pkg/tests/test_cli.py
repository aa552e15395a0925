import json
import math

import pytest

from oneshot import prevedel_channel, prevedel_encoding
from oneshot.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out + out.err


def run_json(capsys, *argv):
    code, text = run(capsys, *argv, "--format", "json")
    return code, json.loads(text)


def body(report):
    return {k: v for k, v in report.items() if k != "wall_time"}


def leaves(obj):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield str(k)
            yield from leaves(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from leaves(v)
    else:
        yield str(obj)


@pytest.fixture
def prevedel_files(tmp_path):
    ch = tmp_path / "prevedel.json"
    ch.write_text(json.dumps(prevedel_channel().to_json()))
    enc = tmp_path / "prevedel_encoding.json"
    enc.write_text(json.dumps(prevedel_encoding().to_json()))
    return str(ch), str(enc)


def test_classical_bound_on_channel_file(capsys, prevedel_files):
    code, rep = run_json(capsys, "classical-bound", prevedel_files[0])
    assert code == 0 and rep["exact"]["classical_max"] == "5/6"


def test_simulate_prevedel(capsys):
    code, rep = run_json(capsys, "simulate", "--strategy", "prevedel")
    assert code == 0
    assert abs(rep["floating"]["S"] - (1 / 3 + (2 + math.sqrt(2)) / 6)) < 1e-9


def test_simulate_pr_and_cubitt(capsys):
    code, rep = run_json(capsys, "simulate", "--strategy", "pr")
    assert code == 0 and abs(rep["floating"]["S"] - 1) < 1e-12
    code, rep = run_json(capsys, "simulate", "--strategy", "cubitt")
    assert code == 0 and abs(rep["floating"]["S"] - 1) < 1e-9
    assert rep["exact"]["beta"] == "2/3" and rep["exact"]["verdict"] == "violation"


def test_verify_command(capsys):
    code, rep = run_json(capsys, "verify-appendix-f")
    assert code == 0 and rep["ok"] and rep["exact"]["passed"]
    assert all(c["result"] == "PASS" for c in rep["exact"]["claims"])


def test_verify_command_fails_on_mutated_data(capsys, tmp_path):
    from oneshot.kssets import _data

    data = _data("ck31.json")
    del data["completion_stages"][0]["rays"]["47"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, rep = run_json(capsys, "verify-appendix-f", "--data", str(path))
    assert code == 1 and not rep["ok"]


@pytest.mark.parametrize(
    "argv, key, value",
    [
        (["alpha", "builtin:peres"], "alpha", 5),
        (["alpha", "builtin:ck31"], "alpha", 11),
        (["colourable", "builtin:peres24"], "colourable", False),
        (["cig-bound", "builtin:prevedel", "--method", "both"], "cig_classical_max", "2/3"),
        (["beta", "builtin:prevedel", "--method", "both"], "beta", "1/2"),
        (["game", "local-bound", "builtin:prevedel"], "local_max", "11/12"),
        (["ks", "disjoint", "builtin:ck31"], "max_disjoint", 13),
        (["ks", "complete", "--vectors", "1,0,0;0,1,0"], "completion", [0, 0, 1]),
        (["channel-info", "builtin:peres"], "alpha", 5),
    ],
)
def test_subcommand_values(capsys, argv, key, value):
    code, rep = run_json(capsys, *argv)
    assert code == 0
    assert rep["exact"][key] == value


def test_rationals_are_strings(capsys):
    _, rep = run_json(capsys, "channel-info", "builtin:prevedel")
    assert rep["exact"]["eta_min"] == "1/3"
    assert not any(isinstance(v, float) for v in rep["exact"].values())


def test_text_and_json_are_content_equivalent(capsys):
    argv = ["classical-bound", "builtin:peres"]
    _, rep = run_json(capsys, *argv)
    code, text = run(capsys, *argv)
    assert code == 0
    for leaf in leaves(body(rep)):
        if leaf in ("True", "False"):
            continue
        assert leaf in text, leaf


def test_reports_are_reproducible_and_thread_independent(capsys):
    argv = ["beta", "builtin:prevedel", "--method", "lp"]
    _, a = run_json(capsys, *argv, "--threads", "1")
    _, b = run_json(capsys, *argv, "--threads", "1")
    _, c = run_json(capsys, *argv, "--threads", "3")
    assert body(a) == body(b) == body(c)


def test_threads_default_from_environment(monkeypatch):
    from oneshot import cli

    monkeypatch.setenv(cli.THREADS_ENV, "4")
    args = cli.build_parser().parse_args(["alpha", "builtin:peres"])
    assert args.threads == 4


def test_affine_check_random_boxes(capsys):
    code, rep = run_json(capsys, "game", "affine-check", "builtin:peres", "--random", "3", "--seed", "7")
    assert code == 0 and rep["floating"]["max_residual"] < 1e-12


def test_game_build_round_trip(capsys, tmp_path):
    out = tmp_path / "game.json"
    code, _ = run_json(capsys, "game", "build", "builtin:prevedel", "--out", str(out))
    assert code == 0
    code, rep = run_json(capsys, "game", "local-bound", "--game", str(out))
    assert code == 0 and rep["exact"]["local_max"] == "11/12"


def test_box_file_simulation(capsys, tmp_path, prevedel_files):
    import numpy as np

    from oneshot.strategy import effective_box, pr_box, prevedel_wiring

    N = prevedel_channel()
    box = effective_box(pr_box(), prevedel_wiring(), N.inputs, N.outputs)
    path = tmp_path / "box.json"
    path.write_text(json.dumps(box.to_json()))
    code, rep = run_json(
        capsys, "simulate", "--strategy", "file", "--box", str(path), "--channel", prevedel_files[0], "--encoding", prevedel_files[1]
    )
    assert code == 0 and abs(rep["floating"]["S"] - 1) < 1e-12


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "alpha", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "alpha", str(bad))[0] == 2
    assert run(capsys, "alpha", "builtin:nothing")[0] == 2
    code, rep = run_json(capsys, "classical-bound", "builtin:peres", "--budget-nodes", "3")
    assert code == 3 and "budget" in rep["exact"]["error"]
    assert run(capsys, "cig-bound", "builtin:prevedel", "--messages", "2")[0] == 0
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 2


def test_cig_bound_needs_encoding(capsys, prevedel_files):
    code, rep = run_json(capsys, "cig-bound", prevedel_files[0])
    assert code == 2 and "encoding" in rep["exact"]["error"]
    code, rep = run_json(capsys, "cig-bound", prevedel_files[0], "--encoding", prevedel_files[1])
    assert code == 0 and rep["exact"]["cig_classical_max"] == "2/3"


def test_suite_command_subset(capsys):
    code, rep = run_json(capsys, "paper-suite", "--only", "1,7")
    assert code == 0 and [c["criterion"] for c in rep["exact"]["criteria"]] == [1, 7]
    assert all(c["result"] == "PASS" for c in rep["exact"]["criteria"])
