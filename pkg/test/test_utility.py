import json
import math

import pytest

from qbcast.utility import (
    CascadeError, InputFileError, NonUnitaryError, ParameterError, RunConfig, UnphysicalStateError,
    VerificationError, exit_code_for, format_float, get_output_dir, get_workers, handle_error_msg,
    load_config, load_env_vars, parse_float_list, rounded, write_csv, write_json,
)


def test_load_env_vars(tmp_path, monkeypatch):
    env = tmp_path / ".env"
    env.write_text("# defaults\nQBCAST_WORKERS=3\n\nQBCAST_OUTPUT_DIR=\"out\"\n")
    monkeypatch.delenv("QBCAST_WORKERS", raising=False)
    monkeypatch.delenv("QBCAST_OUTPUT_DIR", raising=False)
    load_env_vars(str(env))
    assert get_workers() == 3
    with pytest.raises(InputFileError):
        load_env_vars(str(tmp_path / "missing.env"))


def test_get_workers(monkeypatch):
    monkeypatch.setenv("QBCAST_WORKERS", "many")
    with pytest.raises(ParameterError):
        get_workers()
    assert get_workers(2) == 2


def test_get_output_dir_creates_directory(tmp_path, monkeypatch):
    target = tmp_path / "results" / "run"
    monkeypatch.setenv("QBCAST_OUTPUT_DIR", str(target))
    assert get_output_dir() == str(target)
    assert target.is_dir()
    assert get_output_dir(str(tmp_path)) == str(tmp_path)


def test_load_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"eta-b": 0.3, "mu": [1, 5]}))
    assert load_config(str(path)) == {"eta_b": 0.3, "mu": [1, 5]}
    path.write_text("[1, 2]")
    with pytest.raises(InputFileError):
        load_config(str(path))
    path.write_text("{broken")
    with pytest.raises(InputFileError):
        load_config(str(path))
    with pytest.raises(InputFileError):
        load_config(str(tmp_path / "missing.json"))


def test_parse_float_list():
    assert parse_float_list("0.2, 0.3") == (0.2, 0.3)
    assert parse_float_list([1, 5, 20]) == (1.0, 5.0, 20.0)
    assert parse_float_list(0.5) == (0.5,)
    assert parse_float_list(None) == ()
    with pytest.raises(ParameterError):
        parse_float_list("0.2,abc")
    with pytest.raises(ParameterError):
        parse_float_list("nan")


def test_format_float():
    assert format_float(math.log2(1.4)) == "0.485426827"
    assert format_float(1.0) == "1.0"
    assert format_float(0.0) == "0.0"
    assert format_float(3) == "3"
    assert format_float(math.inf) == "inf"
    assert format_float(0.152003093445, 4) == "0.152"


def test_rounded():
    assert rounded({1.5: [math.log2(1.6), math.inf, 2]}, 6) == {"1.5": [0.678072, "inf", 2]}


def test_writers_are_deterministic(tmp_path):
    rows = [[1, math.log2(1.4)], [2, 1 / 3]]
    a = write_csv(str(tmp_path / "a.csv"), ["m", "rate"], rows)
    b = write_csv(str(tmp_path / "b.csv"), ["m", "rate"], rows)
    assert open(a).read() == open(b).read() == "m,rate\n1,0.485426827\n2,0.333333333\n"
    path = write_json(str(tmp_path / "a.json"), {"rate": 1 / 3})
    assert json.load(open(path)) == {"rate": 0.333333333}


def test_run_config_validation():
    with pytest.raises(ParameterError):
        RunConfig("region", fmt="xml")
    with pytest.raises(ParameterError):
        RunConfig("region", precision=0)
    with pytest.raises(ParameterError):
        RunConfig("region", workers=0)


@pytest.mark.parametrize("exc,code,message", [
    (ParameterError("x"), 2, "Invalid Parameters"),
    (CascadeError("x"), 2, "Invalid Cascade Ordering"),
    (UnphysicalStateError("x"), 2, "Unphysical State"),
    (InputFileError("x"), 3, "Invalid Input File"),
    (NonUnitaryError("x"), 3, "Non-Unitary Network"),
    (VerificationError("x"), 4, "Verification Failed"),
    (RuntimeError(), 1, "Unknown error"),
])
def test_error_mapping(exc, code, message):
    assert exit_code_for(exc) == code
    error = handle_error_msg(exc)
    assert error['errorCode'] == code
    assert error['message'] == message
