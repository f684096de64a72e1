"""Tests for job parsing, command dispatch and the JSON report envelope."""

import json

import pytest

from frobthresh.cli import (
    COMMANDS,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_UNRESOLVED,
    build_parser,
    build_spec,
    dumps,
    infer_vars,
    main,
    read_job_file,
    run,
)
from frobthresh.config import Settings
from frobthresh.errors import SpecValidationError


def test_every_command_has_a_subparser():
    parser = build_parser()
    for name in COMMANDS:
        args = parser.parse_args([name, "--p", "2"])
        assert args.command == name


def test_digits_without_a_ring():
    code, report = run("digits", build_spec({"t": "1/2", "q": 2, "n": "1..3"}))
    assert code == EXIT_OK
    assert report["ring"] is None
    result = report["result"]
    assert [row["digit"] for row in result["rows"]] == [0, 1, 1]
    assert result["eventually_constant"] == {"digit": 1, "onset": 2}
    assert "admissible_form" not in result


def test_digits_with_a_ring():
    code, report = run("digits", build_spec({"p": 7, "t": "5/6", "n": "1..2"}))
    assert code == EXIT_OK
    assert report["result"]["q"] == 7
    assert report["result"]["admissible_form"] == {"g": 0, "h": 1}


@pytest.mark.parametrize(
    "values, field",
    [
        ({"p": 4}, "p"),
        ({"p": 2, "bogus": 1}, "bogus"),
        ({"p": 2, "t": "-1/2"}, "t"),
        ({"p": 2, "n": "3..1"}, "n"),
        ({"p": 2, "n": "3"}, "n"),
        ({"p": 2, "e": 0}, "e"),
    ],
)
def test_invalid_specs_name_the_field(values, field):
    with pytest.raises(SpecValidationError) as info:
        build_spec(values)
    assert any(f["field"] == field for f in info.value.fields)


def test_missing_p_is_an_input_error():
    code, report = run("fpt", build_spec({"ideal": "x^3"}))
    assert code == EXIT_INPUT
    assert report["fields"] == [{"field": "p", "message": "p is required"}]


def test_unknown_command():
    code, report = run("nope", build_spec({"p": 2}))
    assert code == EXIT_INPUT
    assert report["fields"][0]["field"] == "command"


def test_star_check_requires_N():
    code, report = run("star-check", build_spec({"p": 5, "ideal": "x", "t": "1/4"}))
    assert code == EXIT_INPUT
    assert report["fields"][0]["field"] == "N"


def test_infer_vars():
    spec = build_spec({"p": 3, "ideal": ["x^2 + y^3"], "I": "(x, y, z)"})
    assert infer_vars(spec) == ["x", "y", "z"]
    assert infer_vars(build_spec({"p": 3})) == ["x"]


def test_fpt_of_cube():
    code, report = run("fpt", build_spec({"p": 2, "ideal": "x^3"}))
    assert code == EXIT_OK
    assert report["result"]["fpt"] == "1/3"
    assert report["ring"]["vars"] == ["x"]
    assert report["provenance"]["uncertified"] is False
    modes = report["provenance"]["certificate_modes"]
    assert "fixed-operator" in modes
    assert modes == sorted(modes)
    assert report["result"]["threshold"]["certificate_modes"] == modes


def test_reports_are_deterministic():
    spec = build_spec({"p": 2, "ideal": "x, y", "t": "2"})
    first = dumps(run("test-ideal", spec)[1])
    second = dumps(run("test-ideal", spec)[1])
    assert first == second


def test_test_ideal_command():
    code, report = run("test-ideal", build_spec({"p": 2, "ideal": "x, y", "t": "2"}))
    assert code == EXIT_OK
    result = report["result"]
    assert result["generators"] == ["x", "y"]
    assert result["colength"] == 1
    assert result["certificate"]["certified"] is True
    assert result["invariants"]["mu_upper"] == 2
    assert result["pair_compatible"] is True


def test_test_ideal_reports_pair_compatibility_with_a_divisor():
    code, report = run("test-ideal", build_spec({"p": 2, "ideal": "x, y", "t": "1", "divisor": "x,1"}))
    assert code in (EXIT_OK, EXIT_UNRESOLVED)
    assert report["result"]["pair_compatible"] is True
    assert report["provenance"]["certificate_modes"]


def test_jumping_numbers_report_their_certificate_modes():
    code, report = run("jumping-numbers", build_spec({"p": 2, "ideal": "x, y", "hi": "3"}))
    assert code == EXIT_OK
    assert report["result"]["jumping_numbers"] == ["2/1", "3/1"]
    assert "fixed-operator" in report["provenance"]["certificate_modes"]


def test_test_ideal_needs_one_exponent_per_ideal():
    code, report = run("test-ideal", build_spec({"p": 2, "ideal": ["x", "y"], "t": ["1"]}))
    assert code == EXIT_INPUT
    assert report["fields"][0]["field"] == "t"


def test_limit_exhaustion_is_unresolved():
    code, report = run("test-ideal", build_spec({"p": 2, "ideal": "x, y", "t": "2"}), Settings(max_chain=1))
    assert code == EXIT_UNRESOLVED
    assert report["result"]["limit"] == "max_chain"
    assert report["provenance"]["uncertified"] is True


def test_read_job_file(tmp_path):
    job = tmp_path / "cube.job"
    job.write_text("# cube over F_2\np = 2\nideal = x^3  # principal\ng-max = 4\n", encoding="utf-8")
    assert read_job_file(str(job)) == {"p": "2", "ideal": ["x^3"], "g_max": "4"}
    with pytest.raises(SpecValidationError):
        read_job_file(str(tmp_path / "missing.job"))
    bad = tmp_path / "bad.job"
    bad.write_text("p 2\n", encoding="utf-8")
    with pytest.raises(SpecValidationError):
        read_job_file(str(bad))


def test_main_with_job_file(tmp_path, capsys):
    job = tmp_path / "cube.job"
    job.write_text("p = 2\nideal = x^3\n", encoding="utf-8")
    assert main(["fpt", "--job", str(job)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "fpt"
    assert report["result"]["fpt"] == "1/3"


def test_main_flags_override_job(tmp_path, capsys):
    job = tmp_path / "digits.job"
    job.write_text("t = 1/2\nq = 3\nn = 1..2\n", encoding="utf-8")
    out = tmp_path / "report.json"
    assert main(["digits", "--job", str(job), "--q", "2", "--output", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["result"]["q"] == 2


def test_main_rejects_extra_keys(tmp_path, capsys):
    job = tmp_path / "bad.job"
    job.write_text("p = 2\nflavour = strange\n", encoding="utf-8")
    assert main(["fpt", "--job", str(job)]) == EXIT_INPUT
    report = json.loads(capsys.readouterr().out)
    assert report["fields"][0]["field"] == "flavour"


def test_main_rejects_composite_p(capsys):
    assert main(["fpt", "--p", "4", "--ideal", "x"]) == EXIT_INPUT
    report = json.loads(capsys.readouterr().out)
    assert report["fields"][0]["field"] == "p"
