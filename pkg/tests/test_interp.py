"""Reference interpreter behavior, including C-flavored integer semantics."""

import numpy as np
import pytest

from stml.errors import OutOfBounds, StepBudgetExceeded, UnboundVariable
from stml.interp import evaluate
from stml.parser import parse_c


def run(source, **inputs):
    return evaluate(parse_c(source), inputs)


def test_scalar_arithmetic():
    env = run("int x, y;\nx = 3;\ny = x * 4 + 1;\n")
    assert env["y"] == 13


def test_float_decl_initializer():
    env = run("float x = 2.5;\nfloat y = x * 2;\n")
    assert env["y"] == pytest.approx(5.0)


def test_for_loop_array_fill():
    env = run(
        "int v[N];\nfor (int i = 0; i < N; i++) {\n    v[i] = i * i;\n}\n",
        v=[0] * 5,
    )
    assert list(env["v"]) == [0, 1, 4, 9, 16]


def test_symbolic_dim_bound_from_input():
    env = run(
        "float v[N], w[N];\n"
        "for (int i = 0; i < N; i++) {\n    w[i] = 2 * v[i];\n}\n",
        v=[1.0, 2.0, 3.0],
        w=[0.0, 0.0, 0.0],
    )
    assert env["N"] == 3
    assert list(env["w"]) == [2.0, 4.0, 6.0]


def test_while_and_augassign():
    env = run("int n, s;\ns = 0;\nwhile (n > 0) {\n    s += n;\n    n = n - 1;\n}\n", n=4)
    assert env["s"] == 10


def test_if_else_branches():
    src = "int x, y;\nif (x > 0) {\n    y = 1;\n} else {\n    y = -1;\n}\n"
    assert run(src, x=5)["y"] == 1
    assert run(src, x=-5)["y"] == -1


def test_pre_and_post_increment():
    env = run("int i, a, b;\ni = 3;\na = i++;\nb = ++i;\n")
    assert (env["a"], env["b"], env["i"]) == (3, 5, 5)


def test_c_integer_division_truncates_toward_zero():
    env = run("int a, b;\na = -7 / 2;\nb = -7 % 2;\n")
    assert env["a"] == -3
    assert env["b"] == -1


def test_int64_wraparound():
    env = run("int x;\nx = 9223372036854775807 + 1;\n")
    assert env["x"] == -9223372036854775808


def test_out_of_bounds_read():
    with pytest.raises(OutOfBounds):
        run("int v[N], x;\nx = v[N];\n", v=[1, 2, 3])


def test_unbound_read_rejected():
    with pytest.raises(UnboundVariable):
        run("int x;\nx = nowhere;\n")


def test_step_budget():
    src = "int i;\ni = 0;\nwhile (i < 100000) {\n    i = i + 1;\n}\n"
    with pytest.raises(StepBudgetExceeded):
        evaluate(parse_c(src), {}, step_budget=1000)


def test_int_array_stays_integer():
    env = run(
        "int v[N];\nfor (int i = 0; i < N; i++) {\n    v[i] = v[i] / 2;\n}\n",
        v=[5, 7, 9],
    )
    assert env["v"].dtype == np.int64
    assert list(env["v"]) == [2, 3, 4]
