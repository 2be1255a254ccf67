import importlib.util
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from flagsdp import cli
from flagsdp.certificate import Certificate, CertificateBlock, read_certificate, save_certificate, shipped_certificate

DATA = Path(cli.__file__).parent / "data"
TOY_SOLUTION = "0 1\n2 1 1 1 1\n2 2 2 2 1\n"
SOLVER_SCRIPT = Path(__file__).parents[1] / "scripts" / "cvxopt_sdpa_solver.py"
HAS_CVXOPT = importlib.util.find_spec("cvxopt") is not None


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- enumerate -----------------------------------------------------------------------


def test_enumerate_four(capsys):
    code, out, _ = run(capsys, "enumerate", "--n", 4)
    assert code == 0
    assert len(out.splitlines()) == 11


def test_enumerate_one(capsys):
    code, out, _ = run(capsys, "enumerate", "--n", 1)
    assert out.splitlines() == ["{}_{1,0}\t1"]


def test_enumerate_flags(capsys):
    code, out, _ = run(capsys, "enumerate", "--sigma", "{}_{1,1}", "--m", 3)
    assert code == 0 and len(out.splitlines()) == 6


@pytest.mark.parametrize(
    "argv, code",
    [
        (["enumerate", "--n", "9"], 2),
        (["enumerate"], 2),
        (["enumerate", "--sigma", "{}_{1,1}"], 2),
        (["enumerate", "--sigma", "{1a}_{2,1}", "--m", "3"], 2),
        (["enumerate", "--sigma", "{1x}_{2,1}", "--m", "3"], 3),
    ],
)
def test_enumerate_errors(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


# -- density / oracle / paley -----------------------------------------------------------


@pytest.mark.parametrize(
    "graph, graphon, value",
    [
        ("{ab, ac, bc, cd}_{4,0}", "complement(k2uk2)", "1/32"),
        ("{ab, ac, ad, bc, bd}_{4,0}", "k5", "12/125"),
        ("{ab}_{2,0}", "k5", "4/5"),
    ],
)
def test_density_values(capsys, graph, graphon, value):
    code, out, _ = run(capsys, "density", graph, graphon)
    assert code == 0
    assert out.split("\t")[0] == value


def test_density_from_file_and_hom(capsys, tmp_path):
    f = tmp_path / "w.txt"
    f.write_text("parts: 1/2 1/2\n0 1\n1 0\n")
    code, out, _ = run(capsys, "density", "{ab, bc}_{3,0}", f, "--kind", "hom")
    assert code == 0 and out.startswith("1/4\t")


def test_density_errors(capsys):
    assert run(capsys, "density", "{ab}_{2,0}", "nonsense")[0] == 3
    assert run(capsys, "density", "{ab", "k5")[0] == 3


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "{ab, bc}_{3,0}", "{ab, bc, cd, de, ea}_{5,0}")
    assert code == 0 and out.startswith("induced copies: 5\t")


def test_paley_five(capsys):
    code, out, _ = run(capsys, "paley", 5)
    assert code == 0
    assert "QR(5): 5 vertices, 5 edges" in out
    assert "80/4877" in out and "not reproduced" in out


def test_paley_seventeen_cites_reference(capsys):
    code, out, _ = run(capsys, "paley", 17)
    assert code == 0 and "80/4877" in out


@pytest.mark.parametrize("q", [7, 9, 29])
def test_paley_rejects(capsys, q):
    assert run(capsys, "paley", q)[0] == 2


# -- verify ------------------------------------------------------------------------------


def test_verify_shipped_paw(capsys):
    code, out, _ = run(capsys, "verify", DATA / "paw.cert")
    assert code == 0
    assert "ACCEPTED" in out and "worst slack" in out


def test_verify_tampered(capsys, tmp_path):
    c = shipped_certificate("paw")
    text = save_certificate(c).replace("-7/96 59/96", "7/96 59/96", 1)
    assert text != save_certificate(c)
    bad = tmp_path / "bad.cert"
    bad.write_text(text)
    code, out, _ = run(capsys, "verify", bad)
    # the first block is no longer symmetric, which is a format error
    assert code == 3
    y = [list(r) for r in c.blocks[0].Y]
    y[0][1] = y[1][0] = -y[0][1]
    tampered = Certificate(c.name, c.target, c.n, c.bound, (CertificateBlock.build(1, c.blocks[0].z, y),) + c.blocks[1:])
    bad.write_text(save_certificate(tampered))
    code, out, _ = run(capsys, "verify", bad)
    assert code == 1 and "REJECTED" in out


def test_verify_missing_and_malformed(capsys, tmp_path):
    assert run(capsys, "verify", tmp_path / "nope.cert")[0] == 3
    junk = tmp_path / "junk.cert"
    junk.write_text("hello\n")
    assert run(capsys, "verify", junk)[0] == 3


# -- build / ingest / round -----------------------------------------------------------------


def test_build_sdp_writes_emission_and_manifest(capsys, tmp_path):
    out = tmp_path / "paw.dat-s"
    argv = ["build-sdp", "--target", "{ab, ac, bc, cd}_{4,0}", "--n", 5, "--l", 3, "--dedup-types", "--out", out]
    assert run(capsys, *argv)[0] == 0
    first = out.read_bytes()
    assert (tmp_path / "paw.dat-s.manifest.json").exists()
    assert run(capsys, *argv)[0] == 0
    assert out.read_bytes() == first
    assert first.splitlines()[0] == b"34"


def test_build_sdp_goodman_plain_target(capsys, tmp_path):
    out = tmp_path / "g.dat-s"
    code, text, _ = run(
        capsys, "build-sdp", "--target", "{ab, ac, bc}_{3,0} - 2*{ab, cd}_{4,0} + {ab}_{2,0}",
        "--basis", "plain", "--n", 4, "--l", 2, "--out", out,
    )
    assert code == 0 and "11 variables" in text


@pytest.mark.parametrize(
    "extra, code",
    [
        (["--n", "9", "--l", "1"], 2),
        (["--n", "5", "--l", "6"], 2),
        (["--n", "3", "--l", "1", "--target", "{1a}_{2,1}"], 2),
    ],
)
def test_build_sdp_usage_errors(capsys, tmp_path, extra, code):
    argv = ["build-sdp", "--target", "{ab}_{2,0}", "--out", tmp_path / "x"] + extra
    assert run(capsys, *argv)[0] == code


def test_build_sdp_missing_output_dir(capsys, tmp_path):
    argv = ["build-sdp", "--target", "{ab}_{2,0}", "--n", 3, "--l", 1, "--out", tmp_path / "no" / "x"]
    assert run(capsys, *argv)[0] == 3


def _stub(tmp_path, text=TOY_SOLUTION):
    stub = tmp_path / "stub.py"
    stub.write_text(f"import sys\nopen(sys.argv[2], 'w').write({text!r})\n")
    return f"{sys.executable} {stub} {{input}} {{output}}"


def test_solver_template_ingest_round_verify(capsys, tmp_path):
    out = tmp_path / "k2.dat-s"
    code, text, _ = run(
        capsys, "build-sdp", "--target", "{ab}_{2,0}", "--n", 2, "--l", 1, "--out", out, "--solver-cmd", _stub(tmp_path)
    )
    assert code == 0 and "floating bound: 1" in text
    cert_path = tmp_path / "k2.dat-s.cert"
    assert read_certificate(cert_path).bound == 1

    again = tmp_path / "again.cert"
    code, _, _ = run(capsys, "ingest", tmp_path / "k2.dat-s.sol", "--manifest", tmp_path / "k2.dat-s.manifest.json", "--out", again)
    assert code == 0
    assert read_certificate(again) == read_certificate(cert_path)

    # a nonzero corner leaves the K2 slack at -Y, so the raw solution is rejected
    assert run(capsys, "verify", again)[0] == 1
    rounded = tmp_path / "r.cert"
    pins = tmp_path / "pins.txt"
    pins.write_text("1 1 1 0\n")
    assert run(capsys, "round", again, "--den-cap", 10, "--pin", pins, "--out", rounded)[0] == 0
    assert read_certificate(rounded).blocks[0].Y[0][0] == 0
    assert run(capsys, "verify", rounded)[0] == 0


def test_round_eigen(capsys, tmp_path):
    out = tmp_path / "paw.cert"
    code, _, _ = run(capsys, "round", DATA / "paw.cert", "--eigen", "--den-cap", 10**6, "--bound", "1000001/32000000", "--out", out)
    assert code == 0
    assert read_certificate(out).bound == Fraction(1000001, 32000000)
    assert run(capsys, "verify", out)[0] == 0


def test_ingest_errors(capsys, tmp_path):
    out = tmp_path / "k2.dat-s"
    run(capsys, "build-sdp", "--target", "{ab}_{2,0}", "--n", 2, "--l", 1, "--out", out)
    manifest = tmp_path / "k2.dat-s.manifest.json"
    empty = tmp_path / "empty.sol"
    empty.write_text("")
    code, _, err = run(capsys, "ingest", empty, "--manifest", manifest, "--out", tmp_path / "c.cert")
    assert code == 3 and "empty" in err
    assert run(capsys, "ingest", tmp_path / "missing.sol", "--manifest", manifest, "--out", tmp_path / "c.cert")[0] == 3


def test_round_errors(capsys, tmp_path):
    cert = DATA / "paw.cert"
    assert run(capsys, "round", cert, "--den-cap", 0, "--out", tmp_path / "r")[0] == 2
    pins = tmp_path / "pins.txt"
    pins.write_text("9 1 1 0\n")
    assert run(capsys, "round", cert, "--pin", pins, "--out", tmp_path / "r")[0] == 3


def test_console_entry_point():
    done = subprocess.run([sys.executable, "-m", "flagsdp.cli", "enumerate", "--n", "3"], capture_output=True, text=True)
    assert done.returncode == 0 and len(done.stdout.splitlines()) == 4


def test_round_project_and_flag_conflicts(capsys, tmp_path):
    out = tmp_path / "k2.dat-s"
    run(capsys, "build-sdp", "--target", "{ab}_{2,0}", "--n", 2, "--l", 1, "--out", out, "--solver-cmd", _stub(tmp_path))
    floating = tmp_path / "k2.dat-s.cert"
    projected = tmp_path / "p.cert"
    assert run(capsys, "round", floating, "--project", "--out", projected)[0] == 0
    # the solver's Y = 1 is far from tight, so projection leaves it and verify rejects
    assert run(capsys, "verify", projected)[0] == 1
    assert run(capsys, "round", floating, "--project", "--eigen", "--out", projected)[0] == 2


def test_reduce_needs_solver(capsys, tmp_path):
    argv = ["build-sdp", "--target", "{ab}_{2,0}", "--n", 3, "--l", 1, "--reduce", 2, "--out", tmp_path / "x"]
    assert run(capsys, *argv)[0] == 2


@pytest.mark.skipif(not HAS_CVXOPT, reason="cvxopt not installed")
def test_reduce_and_project_with_cvxopt(capsys, tmp_path):
    out = tmp_path / "paw.dat-s"
    code, text, _ = run(
        capsys, "build-sdp", "--target", "{ab, ac, bc, cd}_{4,0}", "--n", 5, "--l", 3, "--dedup-types",
        "--name", "paw", "--out", out, "--reduce", 3, "--solver-cmd", f"{sys.executable} {SOLVER_SCRIPT} {{input}} {{output}}",
    )
    assert code == 0 and "reduced blocks" in text
    assert (tmp_path / "paw-reduced.dat-s.manifest.json").exists()
    exact = tmp_path / "exact.cert"
    assert run(capsys, "round", tmp_path / "paw.dat-s.cert", "--project", "--bound", "1/32", "--out", exact)[0] == 0
    code, text, _ = run(capsys, "verify", exact)
    assert code == 0 and "<= 1/32" in text
