import json

import pytest

from geoclose.cli import main
from geoclose.reports import canonical_bytes

from conftest import corpus_path, load_spec

EQ = corpus_path("equivalence_3x3.json")
NONEX = corpus_path("nonexchange_pairs_5.json")
TRIVIAL = corpus_path("trivial_components_8.json")
REPLAY = corpus_path("findings/nonexchange_replay.json")


def run(args):
    return main(args)


def read_json(path):
    return json.loads(path.read_text())


def test_rank_golden(tmp_path):
    out = tmp_path / "r.json"
    code = run(["rank", EQ, "--A", "a", "--B", "", "--n", "1",
                "--format", "json", "-o", str(out)])
    assert code == 0
    report = read_json(out)
    assert report["rankBySequences"]["value"] == 2
    assert report["rankRecursive"] == 2
    assert report["methodsAgree"] is True
    assert report["witnessLabels"] == ["[a]", "a"]
    assert report["tool"]["version"] and report["specHash"]


def test_rank_over_self_is_zero(tmp_path):
    out = tmp_path / "r.json"
    code = run(["rank", EQ, "--A", "a", "--B", "a", "--n", "1",
                "--format", "json", "-o", str(out)])
    assert code == 0
    assert read_json(out)["rankBySequences"]["value"] == 0


def test_rank_ccs_flag(tmp_path):
    out = tmp_path / "r.json"
    assert run(["rank", EQ, "--A", "a", "--n", "1", "--ccs",
                "--format", "json", "-o", str(out)]) == 0
    coord = read_json(out)["canonicalSequence"]
    assert coord == {"value": 2, "witness": [9, 0], "coreIndices": [0, 1, 2]}


def test_rank_verify_round_trip(tmp_path):
    out = tmp_path / "r.json"
    run(["rank", EQ, "--A", "a", "--n", "1", "--ccs", "--format", "json",
         "-o", str(out)])
    cert = read_json(out)["canonicalSequence"]
    cert_file = tmp_path / "cert.json"
    cert_file.write_text(json.dumps(cert))
    assert run(["rank", EQ, "--A", "a", "--n", "1",
                "--verify", str(cert_file), "-o", str(tmp_path / "v.json"),
                "--format", "json"]) == 0
    # tampered certificate: replay mismatch
    cert["witness"] = [0, 9]
    cert_file.write_text(json.dumps(cert))
    assert run(["rank", EQ, "--A", "a", "--n", "1",
                "--verify", str(cert_file), "-o", str(tmp_path / "v2.json"),
                "--format", "json"]) == 5


def test_indep_command(tmp_path):
    out = tmp_path / "i.json"
    assert run(["indep", EQ, "--A", "a", "--B", "b", "--C", "", "--n", "1",
                "--format", "json", "-o", str(out)]) == 0
    report = read_json(out)
    assert report["result"]["independent"] is False
    out0 = tmp_path / "i0.json"
    run(["indep", EQ, "--A", "a", "--B", "b", "--C", "", "--n", "0",
         "--format", "json", "-o", str(out0)])
    assert read_json(out0)["result"]["independent"] is True


def test_exchange_command(tmp_path):
    out = tmp_path / "e.json"
    assert run(["exchange", EQ, "--C", "", "--n", "1", "--format", "json",
                "-o", str(out)]) == 0
    assert read_json(out)["passed"] is True
    out2 = tmp_path / "e2.json"
    assert run(["exchange", NONEX, "--C", "x", "--n", "0", "--format", "json",
                "-o", str(out2)]) == 0  # research output, not an error
    report = read_json(out2)
    assert report["passed"] is False and report["witness"]["violationKind"] == "exchange-fail"


def test_exchange_witness_replay_via_cli(tmp_path):
    out = tmp_path / "w.json"
    run(["exchange", NONEX, "--C", "x", "--n", "0", "--format", "json", "-o", str(out)])
    witness_file = tmp_path / "witness.json"
    witness_file.write_text(json.dumps(read_json(out)["witness"]))
    assert run(["replay", "--witness", str(witness_file), "--spec", NONEX]) == 0
    # replaying against an edited spec must fail with the replay exit code
    spec = load_spec("nonexchange_pairs_5.json")
    spec["closure"]["rules"] = spec["closure"]["rules"][:-2]
    edited = tmp_path / "edited.json"
    edited.write_text(json.dumps(spec))
    assert run(["replay", "--witness", str(witness_file), "--spec", str(edited)]) == 5


def test_validate_corrupted_spec_exits_3(tmp_path):
    bad = {
        "elements": [{"id": 0, "level": 0, "label": "a"},
                     {"id": 1, "level": 0, "label": "b"},
                     {"id": 2, "level": 0, "label": "c"}],
        "maxLevel": 0,
        "closure": {"kind": "table",
                    "entries": [{"set": [0], "closure": [0, 1]},
                                {"set": [0, 1], "closure": [0, 1, 2]}]},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    out = tmp_path / "v.json"
    assert run(["validate", str(path), "--format", "json", "-o", str(out)]) == 3
    report = read_json(out)
    assert report["validation"]["violations"][0]["axiom"] == "idempotent"


def test_parse_error_exits_2(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    assert run(["validate", str(path)]) == 2
    assert run(["rank", EQ, "--A", "zz", "--n", "0"]) == 2  # unknown label
    spec = load_spec("identity_5.json")
    spec["unknownField"] = 1
    bad = tmp_path / "bad_field.json"
    bad.write_text(json.dumps(spec))
    assert run(["validate", str(bad)]) == 2


def test_budget_env_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("GEOCLOSE_BUDGET", "2")
    assert run(["rank", EQ, "--A", "a,b,d,e", "--B", "", "--n", "1"]) == 2


def test_rank_validates_system_first(tmp_path):
    bad = {
        "elements": [{"id": 0, "level": 0}],
        "maxLevel": 0,
        "closure": {"kind": "table", "entries": [{"set": [0], "closure": []}]},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert run(["rank", str(path), "--A", "0", "--n", "0"]) == 3


def test_suite_exit_zero_and_deterministic(tmp_path):
    outs = []
    for i, workers in enumerate((1, 4, 1)):
        out = tmp_path / f"s{i}.json"
        assert run(["suite", TRIVIAL, "--seed", "3", "--workers", str(workers),
                    "--format", "json", "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_suite_on_nonexchange_is_research_output(tmp_path):
    out = tmp_path / "s.json"
    assert run(["suite", NONEX, "--format", "json", "-o", str(out)]) == 0
    report = read_json(out)
    sym = report["sections"]["symmetry"]["0"]
    assert sym["outcome"] == "fail" and sym["witnessesTotal"] > 0
    assert report["sections"]["exchange"]["0"]["passed"] is False


def test_fuzz_deterministic_and_replayable(tmp_path):
    a = tmp_path / "f1.json"
    b = tmp_path / "f2.json"
    args = ["fuzz", "--seed", "42", "--trials", "3", "--universe-size", "6",
            "--format", "json"]
    assert run(args + ["-o", str(a)]) == 0
    assert run(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(["replay", "--fuzzcase", str(a)]) == 0


def test_replay_shipped_fuzzcase():
    assert run(["replay", "--fuzzcase", REPLAY]) == 0


def test_replay_tampered_fuzzcase(tmp_path):
    data = json.loads(open(REPLAY).read())
    data["findings"][0]["witness"]["tuple"] = [0, 2]
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(data))
    assert run(["replay", "--fuzzcase", str(bad)]) == 5


def test_build_example_commands(tmp_path):
    from geoclose.closure import system_from_spec

    for kind, extra in [("equivalence", ["--classes", "3", "--class-size", "3"]),
                        ("equality-quotient", ["--size", "6"]),
                        ("trivial-graph", []),
                        ("linear-gf2", ["--dim", "3"]),
                        ("identity", ["--size", "5"]),
                        ("nonexchange", [])]:
        out = tmp_path / f"{kind}.json"
        assert run(["build-example", "--kind", kind, "-o", str(out)] + extra) == 0
        system_from_spec(read_json(out))


def test_build_example_matches_corpus(tmp_path):
    out = tmp_path / "eq.json"
    run(["build-example", "--kind", "equivalence", "--classes", "3",
         "--class-size", "3", "-o", str(out)])
    assert out.read_bytes() == canonical_bytes(load_spec("equivalence_3x3.json"))


def test_text_format_renders(capsys):
    assert run(["exchange", EQ, "--C", "", "--n", "0"]) == 0
    text = capsys.readouterr().out
    assert "geoclose exchange report" in text and '"passed"' not in text
    assert "passed: true" in text


def test_rank_oracle_disagreement_exits_4(tmp_path, monkeypatch):
    # force the two rank routes apart to exercise the exit-code contract
    import geoclose.cli as cli

    monkeypatch.setattr(cli, "rank_recursive", lambda *a, **k: 99)
    out = tmp_path / "r.json"
    assert cli.main(["rank", EQ, "--A", "a", "--n", "1",
                     "--format", "json", "-o", str(out)]) == 4
    assert read_json(out)["methodsAgree"] is False


def test_suite_theorem_contradiction_exits_4(tmp_path, monkeypatch):
    # claim exchange passed on the non-exchange system: the symmetry suite
    # must escalate its finding to a hard failure
    import geoclose.cli as cli

    monkeypatch.setattr(cli, "exchange_status", lambda *a, **k: (True, None))
    out = tmp_path / "s.json"
    assert cli.main(["suite", NONEX, "--format", "json", "-o", str(out)]) == 4
    report = read_json(out)
    assert report["hardFailure"]["kind"] == "theorem-contradiction"


def test_validate_sampled_mode_beyond_exhaustive_limit(tmp_path):
    spec = {
        "elements": [{"id": i, "level": 0} for i in range(24)],
        "maxLevel": 0,
        "closure": {"kind": "rules", "rules": [{"if": [0], "add": [1]}]},
    }
    path = tmp_path / "big.json"
    path.write_text(json.dumps(spec))
    out = tmp_path / "v.json"
    assert run(["validate", str(path), "--format", "json", "-o", str(out)]) == 0
    report = read_json(out)["validation"]
    assert report["mode"] == "sampled" and report["ok"]
