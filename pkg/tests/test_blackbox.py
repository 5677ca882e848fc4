import stat
import sys

import numpy as np
import pytest

from sboc.blackbox import (
    BlackBoxEvaluator,
    NonNumericOutput,
    NonZeroExit,
    Timeout,
    format_arguments,
    parse_value,
)
from sboc.core import InvalidConfig


def write_script(directory, name, body):
    path = directory / name
    path.write_text(f"#!{sys.executable}\nimport sys\n{body}\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


SUM = "print(sum(float(a) for a in sys.argv[1:]))"
PERSISTENT_SUM = (
    "for line in sys.stdin:\n"
    "    print(sum(float(a) for a in line.split()), flush=True)"
)


def test_sum_per_call(tmp_path):
    evaluator = BlackBoxEvaluator(write_script(tmp_path, "sum", SUM))
    assert evaluator(np.array([1.5, 2.5])) == 4.0
    assert evaluator.calls == 1


def test_arguments_roundtrip_exactly(tmp_path):
    echo = write_script(tmp_path, "echo", "print(sys.argv[1])")
    evaluator = BlackBoxEvaluator(echo)
    for value in (0.1, 1e-300, -123456.789, 1 / 3):
        assert evaluator([value]) == value


def test_nan_is_rejected(tmp_path):
    evaluator = BlackBoxEvaluator(write_script(tmp_path, "nan", "print('NaN')"))
    with pytest.raises(NonNumericOutput):
        evaluator([0.5])
    assert evaluator.calls == 0
    assert len(evaluator.argument_log) == 1


def test_text_output(tmp_path):
    evaluator = BlackBoxEvaluator(write_script(tmp_path, "text", "print('fertig')"))
    with pytest.raises(NonNumericOutput):
        evaluator([0.5])


def test_timeout(tmp_path):
    sleeper = write_script(tmp_path, "sleep", "import time\ntime.sleep(5)\nprint(1.0)")
    with pytest.raises(Timeout):
        BlackBoxEvaluator(sleeper, timeout=0.5)([0.5])


def test_nonzero_exit(tmp_path):
    evaluator = BlackBoxEvaluator(write_script(tmp_path, "crash", "sys.exit(3)"))
    with pytest.raises(NonZeroExit, match="Exit-Code 3"):
        evaluator([0.5])


def test_missing_executable(tmp_path):
    with pytest.raises(NonZeroExit):
        BlackBoxEvaluator(tmp_path / "gibt-es-nicht")([0.5])


def test_persistent_mode(tmp_path):
    script = write_script(tmp_path, "server", PERSISTENT_SUM)
    with BlackBoxEvaluator(script, mode="persistent") as evaluator:
        assert evaluator([1.5, 2.5]) == 4.0
        assert evaluator([1.0, -3.0]) == -2.0
        assert evaluator.calls == 2


def test_persistent_process_exits(tmp_path):
    script = write_script(tmp_path, "once", "sys.stdin.readline()\nsys.exit(0)")
    with BlackBoxEvaluator(script, mode="persistent") as evaluator:
        with pytest.raises(NonZeroExit):
            evaluator([0.5])


def test_invalid_mode():
    with pytest.raises(InvalidConfig):
        BlackBoxEvaluator("/bin/true", mode="batch")


def test_format_and_parse():
    assert format_arguments([0.1, 2.0]) == ["0.1", "2.0"]
    assert parse_value(" 4.0\n") == 4.0
    with pytest.raises(NonNumericOutput):
        parse_value("1 2")
    with pytest.raises(NonNumericOutput):
        parse_value("inf")
