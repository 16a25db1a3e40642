import pytest

from fgrdp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_count_exact(tmp_path, capsys):
    path = tmp_path / "k4.txt"
    path.write_text("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
    code, out, _ = run(capsys, "count-exact", "--graph", str(path))
    assert code == 0
    assert out.splitlines() == ["n,edges,d_max,triangles,kstar2,kstar3,clustering", "4,6,3,4,12,4,1.0"]


@pytest.mark.parametrize("cmd", [
    ["run-kstar", "--k", "3"],
    ["run-triangle", "--alpha", "0.4"],
    ["run-baseline", "--task", "triangle"],
    ["run-baseline", "--task", "kstar", "--epsilon", "0.3"],
])
def test_runs_are_reproducible(capsys, cmd):
    argv = cmd + ["--graph", "er:120,0.08", "--seed", "11", "--repeats", "3"]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    _, second, _ = run(capsys, *argv)
    assert first == second
    header, row = first.splitlines()
    assert header.startswith("task,dataset,n,k,eps1")
    assert row.endswith(",0")


def test_ledger_round_trip(tmp_path, capsys):
    pol, led = tmp_path / "policy.txt", tmp_path / "ledger.csv"
    common = ["--graph", "er:80,0.1", "--seed", "2"]
    code, _, _ = run(capsys, "run-triangle", *common, "--budgets", "0.5,1,2",
                     "--fractions", "0.2,0.3,0.5", "--policy-out", str(pol), "--ledger-out", str(led))
    assert code == 0
    code, out, _ = run(capsys, "check-ledger", *common, "--policy", str(pol), "--ledger", str(led))
    assert code == 0 and out.startswith("PASS")

    lines = led.read_text().splitlines()
    u_v = lines[1].split(",")[0]
    led.write_text("\n".join(lines + [f"{u_v},extra,5.0"]) + "\n")
    code, out, _ = run(capsys, "check-ledger", *common, "--policy", str(pol), "--ledger", str(led))
    assert code == 1 and out.startswith("FAIL")


def test_policy_in(tmp_path, capsys):
    pol = tmp_path / "policy.txt"
    common = ["--graph", "er:60,0.1", "--seed", "4"]
    run(capsys, "run-kstar", *common, "--policy-out", str(pol))
    code, a, _ = run(capsys, "run-kstar", *common, "--policy-in", str(pol))
    _, b, _ = run(capsys, "run-kstar", *common)
    assert code == 0 and a == b


def test_experiment_file(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("dataset = er:100,0.08\ntask = kstar\nsweep = eps\ngrid = 0.5,1\nrepeats = 4\nseed = 9\n")
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "experiment", str(cfg), "--out", str(out_a))[0] == 0
    assert run(capsys, "experiment", str(cfg), "--out", str(out_b))[0] == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert len(out_a.read_text().splitlines()) == 5


def test_errors_are_reported(capsys):
    code, _, err = run(capsys, "run-kstar", "--graph", "nope.txt")
    assert code == 2 and "not found" in err
