import io
import subprocess
import sys

import pytest

from algthermo.cli import main
from algthermo.enumeration import load_corpus, save_corpus

from conftest import corpus


def cli(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def c6_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "c6.corpus"
    code, text = cli("enumerate", "--max-len", 6, "--max-steps", 10, "--out", path)
    assert code == 0 and "halting records : 3" in text
    return path


@pytest.fixture(scope="module")
def c14_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "c14.corpus"
    save_corpus(corpus(14), path)
    return path


def test_enumerate_writes_three_records(c6_file):
    lines = c6_file.read_text().splitlines()
    assert sum(line.startswith("R ") for line in lines) == 3
    assert load_corpus(c6_file) == corpus(6, 10)


def test_enumerate_verify_and_threads(tmp_path):
    path = tmp_path / "c.corpus"
    code, text = cli("enumerate", "--max-len", 11, "--max-steps", 64, "--threads", 3, "--out", path, "--verify")
    assert code == 0 and "verified" in text
    assert load_corpus(path) == corpus(11, 64)


def test_omega_example(c6_file):
    code, text = cli("omega", "--corpus", c6_file)
    assert code == 0
    assert "z_lo = 0.09375\n" in text


def test_stats_prints_both_units(c6_file):
    code, text = cli("stats", "--corpus", c6_file, "--beta", 1, "--gamma", 1, "--delta", 0.5)
    assert code == 0
    assert "nats" in text and "bits" in text and "[certified]" in text


@pytest.mark.parametrize("gamma", ["0", "0.5"])
def test_stats_refuses_uncertified_region(c6_file, tmp_path, capsys, gamma):
    target = tmp_path / "s.csv"
    code, _ = cli("stats", "--corpus", c6_file, "--beta", 0, "--gamma", gamma, "--delta", 0, "--csv", target)
    assert code == 1
    assert not target.exists()
    if gamma == "0":
        assert "diverges" in capsys.readouterr().err


def test_uncertified_flag_gives_lower_bounds(c6_file):
    code, text = cli("stats", "--corpus", c6_file, "--beta", 0, "--gamma", 0.5, "--delta", 0, "--uncertified")
    assert code == 0 and "UNCERTIFIED" in text and "inf" in text


def test_csv_is_byte_deterministic(c6_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for target in (a, b):
        assert cli("stats", "--corpus", c6_file, "--beta", 1, "--gamma", 1, "--delta", 0.5, "--csv", target)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    header, row = a.read_text().splitlines()
    assert header.startswith("beta,gamma,delta,certified,z_lo")
    assert row.startswith("1.0,1.0,0.5,1,")


@pytest.mark.parametrize("argv", [
    ["stats", "--corpus", "x", "--beta", "1", "--gamma", "1"],
    ["stats", "--corpus", "x", "--beta", "1", "--gamma", "1", "--delta", "0", "--bogus"],
    ["stats", "--corpus", "x", "--beta", "nan", "--gamma", "1", "--delta", "0"],
    ["enumerate", "--max-len", "-3", "--out", "x"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_1(argv):
    assert main(argv, out=io.StringIO()) == 1


def test_file_errors_exit_1(tmp_path, capsys):
    assert cli("omega", "--corpus", tmp_path / "missing.corpus")[0] == 1
    bad = tmp_path / "bad.corpus"
    bad.write_text("#ALGTHERMO v9 machine=bitvm1 L=6 Tmax=10\n")
    assert cli("omega", "--corpus", bad)[0] == 1
    assert "v9" in capsys.readouterr().err
    assert cli("enumerate", "--max-len", 40, "--out", tmp_path / "big.corpus")[0] == 1


def test_numerical_failure_exits_2(c6_file, tmp_path, capsys):
    target = tmp_path / "r.csv"
    code, _ = cli("relations", "--corpus", c6_file, "--beta", 0.7, "--gamma", 1.2, "--delta", 0.2, "--csv", target)
    assert code == 2
    assert not target.exists()
    assert "condition" in capsys.readouterr().err


def test_relations_on_c14(c14_file, tmp_path):
    target = tmp_path / "r.csv"
    code, text = cli("relations", "--corpus", c14_file, "--beta", 0.7, "--gamma", 1.2, "--delta", 0.2, "--csv", target)
    assert code == 0
    assert "FAIL" not in text and text.count(" ok") == 10
    header = target.read_text().splitlines()[0].split(",")
    assert "maxwell" in header and "dT_dV_cond" in header


def test_entropy_command(c6_file):
    code, text = cli("entropy", "--corpus", c6_file, "--gamma", "0.6931471805599453", "--output-value", 1)
    assert code == 0
    assert "Kolmogorov proxy): 6 bits" in text and "Levin proxy): 7.0 bits" in text
    code, text = cli("entropy", "--corpus", c6_file, "--gamma", 1, "--output-value", 5)
    assert code == 0 and "no witness" in text


def test_cycle_command(c14_file, tmp_path):
    spec = tmp_path / "loop.txt"
    spec.write_text("START 0.6 1.0 0.2\nPARAM 0.9 1.1 0.3\nPARAM 0.7 1.3 0.1\nPARAM close\n")
    target = tmp_path / "cyc.csv"
    code, text = cli("cycle", "--corpus", c14_file, "--spec", spec, "--refinement", 8, "--csv", target)
    assert code == 0 and "oint T dS" in text
    assert len(target.read_text().splitlines()) == 1 + 3 * 8
    spec.write_text("START 0.6 1.0 0.2\nISO_V 0.9\n")
    assert cli("cycle", "--corpus", c14_file, "--spec", spec)[0] == 1
    assert cli("cycle", "--corpus", c14_file, "--spec", tmp_path / "nope.txt")[0] == 1


def test_console_module_entry_point(c6_file):
    proc = subprocess.run([sys.executable, "-m", "algthermo", "omega", "--corpus", str(c6_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "0.09375" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "algthermo", "stats", "--corpus", str(c6_file),
                           "--beta", "0", "--gamma", "0", "--delta", "0"], capture_output=True, text=True)
    assert proc.returncode == 1
