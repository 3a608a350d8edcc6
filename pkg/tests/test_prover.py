import json

import pytest

from decdiag.cli import main
from decdiag.prover import CRITERIA, Certificate, ProverConfig, check_certificate, prove
from decdiag.trs import format_cops
from fixtures import SOURCES, load
from perturb import perturbations

C = ProverConfig()

ROUTES = [
    ("cops60", C, "rt_star2"),
    ("mot", C, "rtd"),
    ("mot2", C, "rt"),
    ("fail_rtd", C, "rt"),
    ("fail_rtd", C.only("red"), "red"),
    ("mot4", C, "rtd"),
    ("mot4", C.only("red"), "red"),
    ("mot5", C, "rt"),
    ("pl", C, "persist_pl"),
    ("pll", C, "persist_pll"),
    ("hfa", C, "rt"),
    ("hfa", C.only("persist_pl"), "persist_pl"),
    ("ex1", C, "persist_pll"),
    ("ex1", C.only("parallel"), "parallel"),
    ("mot7", C, "linear"),
    ("fail_per", C, "rt_star2"),
    ("fail_per", C.only("parallel"), "parallel"),
    ("imp", C, "linear"),
]


@pytest.mark.parametrize("name,config,criterion", ROUTES)
def test_route(name, config, criterion):
    cert = prove(load(name), config)
    assert (cert.verdict, cert.criterion) == ("YES", criterion)
    assert check_certificate(load(name), cert, config)


@pytest.mark.parametrize("name,disabled", [("fail_rtd", "rtd"), ("mot5", "red"), ("mot4", "rt")])
def test_route_fails(name, disabled):
    assert prove(load(name), C.only(disabled)).verdict == "MAYBE"


def test_kb_no():
    cert = prove(load("kb_no"))
    assert (cert.verdict, cert.criterion) == ("NO", "kb")
    ev = cert.to_json()["evidence"]
    assert sorted(ev["normal_forms"]) == ["b", "c"]
    assert check_certificate(load("kb_no"), cert)


def test_kb_disabled_gives_maybe():
    cert = prove(load("kb_no"), C.without("kb"))
    assert cert.verdict == "MAYBE"
    assert check_certificate(load("kb_no"), cert)


def test_nonterminating_unjoinable_is_maybe():
    from decdiag.trs import parse_cops

    trs = parse_cops("(RULES a -> b a -> c c -> c)")
    assert prove(trs).verdict == "MAYBE"


def test_timeout_gives_maybe():
    cert = prove(load("cops62"), ProverConfig(timeout_ms=1))
    assert cert.verdict == "MAYBE"
    assert "timeout" in cert.trace


def test_certificate_for_other_trs_rejected():
    cert = prove(load("mot"))
    assert not check_certificate(load("mot4"), cert)


def test_certificate_is_json_serialisable():
    cert = prove(load("cops60")).to_json()
    assert json.loads(json.dumps(cert)) == cert
    assert cert["critical_pairs"] == 34


@pytest.mark.parametrize("name", ["mot", "pll", "kb_no", "ex1", "imp"])
def test_every_single_perturbation_rejected(name):
    trs = load(name)
    cert = prove(trs).to_json()
    for desc, bad in perturbations(cert):
        assert not check_certificate(trs, bad), desc


def test_cops60_label_perturbation():
    trs = load("cops60")
    cert = prove(trs).to_json()
    rule = [p for p in cert["labeling"] if p["kind"] == "rule"][0]
    rule["labels"][2] += 1
    assert not check_certificate(trs, cert)


@pytest.mark.parametrize("bad", [None, [], {"version": 1}, {"version": 2, "verdict": "YES"}])
def test_malformed_certificates(bad):
    assert not check_certificate(load("mot"), bad)


def test_config_validation():
    with pytest.raises(ValueError):
        ProverConfig(criteria=("nope",))
    with pytest.raises(ValueError):
        ProverConfig(max_join=-1)
    with pytest.raises(ValueError):
        ProverConfig(criteria=())
    assert C.only("rt", "kb").criteria == ("kb", "rt")
    assert "rt" not in C.without("rt").criteria
    assert C.criteria == CRITERIA


def test_text_rendering():
    text = prove(load("mot")).to_text()
    assert text.splitlines()[0] == "YES"
    assert "criterion: rtd" in text
    assert isinstance(prove(load("kb_no")), Certificate)


# -------------------------------------------------------------------- CLI


@pytest.fixture
def trs_file(tmp_path):
    def write(name):
        p = tmp_path / f"{name}.trs"
        p.write_text(SOURCES[name])
        return str(p)

    return write


def test_cli_text(trs_file, capsys):
    assert main(["prove", trs_file("mot")]) == 0
    assert capsys.readouterr().out.startswith("YES\ncriterion: rtd")


def test_cli_json_and_check(trs_file, tmp_path, capsys):
    path = trs_file("pll")
    assert main(["prove", path, "--format", "json"]) == 0
    out = capsys.readouterr().out
    verdict, body = out.split("\n", 1)
    assert verdict == "YES"
    cert = tmp_path / "cert.json"
    cert.write_text(body)
    assert main(["prove", path, "--check", str(cert)]) == 0
    assert capsys.readouterr().out == "YES\ncertificate: valid\n"
    data = json.loads(body)
    data["labeling"][0]["labels"][0] = 3
    cert.write_text(json.dumps(data))
    assert main(["prove", path, "--check", str(cert)]) == 1
    assert capsys.readouterr().out.endswith("certificate: invalid\n")


def test_cli_criterion_option(trs_file, capsys):
    assert main(["prove", trs_file("fail_rtd"), "--criterion", "red"]) == 0
    assert "criterion: red" in capsys.readouterr().out
    assert main(["prove", trs_file("mot5"), "--criterion", "red"]) == 0
    assert capsys.readouterr().out.startswith("MAYBE")


def test_cli_bad_criterion(trs_file):
    with pytest.raises(SystemExit) as e:
        main(["prove", trs_file("mot"), "--criterion", "bogus"])
    assert e.value.code == 2


def test_cli_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.trs"
    bad.write_text("(VAR x)(RULES x -> f(x))")
    assert main(["prove", str(bad)]) == 1
    assert "variable-lhs" in capsys.readouterr().err
    assert main(["prove", str(tmp_path / "missing.trs")]) == 1


def test_cli_reads_formatted_output(tmp_path, capsys):
    p = tmp_path / "ex.trs"
    p.write_text(format_cops(load("imp")))
    assert main(["prove", str(p), "--max-join", "3", "--label-bound", "2", "--timeout", "10000"]) == 0
    assert capsys.readouterr().out.startswith("YES")
