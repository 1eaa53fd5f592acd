import random

import pytest

from wreathkit.conjugacy import Ambient, are_conjugate
from wreathkit.recursion import (
    GroupWord,
    NamedFamily,
    SystemParseError,
    builtin,
    check_fixed_point,
    eval_word,
    format_system,
    mper_system,
    mpre_system,
    odometer_system,
    parse_system,
    parse_word,
    solve,
    worked_example_system,
)
from wreathkit.model_groups import ModelParams
from wreathkit.tree_core import TreeShape, act, compose, odometer, random_portrait


def interpret(word, gen):
    """Act on a word directly from the defining rules, child chosen by the image letter:
    x1(i w) = s(i) . h_{s(i)}(w) with h = (1, x1, x2); x2(i w) = (2 3)(i) . h_{..}(w) with h = (x1 x2, 1, 1)."""
    if not word:
        return ()
    i, rest = word[0], word[1:]
    if gen == "x1":
        j = i % 3 + 1
        kids = {1: [], 2: ["x1"], 3: ["x2"]}
    else:
        j = {1: 1, 2: 3, 3: 2}[i]
        kids = {1: ["x1", "x2"], 2: [], 3: []}
    for g in reversed(kids[j]):
        rest = interpret(rest, g)
    return (j,) + rest


def test_worked_example_against_direct_interpreter():
    sol = solve(worked_example_system("image"), 5)
    assert act(sol["x1"], "21131") == (3, 1, 2, 1, 1)
    rng = random.Random(0)
    for _ in range(100):
        w = tuple(rng.randint(1, 3) for _ in range(5))
        for g in ("x1", "x2"):
            assert act(sol[g], w) == interpret(w, g)


def test_source_indexed_reading_differs():
    sol = solve(worked_example_system("source"), 5)
    assert act(sol["x1"], "21131") == (3, 2, 1, 3, 1)


def test_levelwise_matches_fixed_point():
    for sys in [worked_example_system(), mper_system(2, 3), mpre_system(3, 1, 2, 1)]:
        a = solve(sys, 4)
        b = solve(sys, 4, method="fixed_point")
        assert a == b
        assert check_fixed_point(sys, a)


def test_odometer_system():
    for d in (2, 3):
        assert solve(odometer_system(d), 4)["c"] == odometer(d, 4)


def test_word_parsing_and_eval():
    w = parse_word("x1*x2^-1*(x1*x2)^2")
    assert w.names() == {"x1", "x2"}
    sol = solve(worked_example_system(), 3)
    x1, x2 = sol["x1"], sol["x2"]
    i2 = x2 ** -1
    expect = compose(x1, i2, x1, x2, x1, x2)
    assert eval_word(sol, w, 3) == expect
    assert w.exponent_sums(["x1", "x2"]) == (3, 1)


def test_system_text_roundtrip():
    sys = mpre_system(2, 2, 3, 1)
    again = parse_system(format_system(sys))
    assert solve(again, 4) == solve(sys, 4)


def test_parse_errors_have_positions():
    with pytest.raises(SystemParseError) as e:
        parse_system("d=2\nc = s (1, c\n")
    assert e.value.line == 2
    with pytest.raises(ValueError):
        parse_system("d=2\nc = s (1, y)\n")
    with pytest.raises(ValueError):
        parse_system("d=2\nc = s (1, c, c)\n")


def test_builtin_families():
    p = ModelParams.periodic(2, 1)
    g = builtin(NamedFamily("mper", p), 4)
    assert g["a1"] == odometer(2, 4)
    assert builtin(NamedFamily("odometer", d=3), 3)["c"] == odometer(3, 3)


def test_conjugated_system_solutions_are_conjugate():
    rng = random.Random(9)
    sys = mper_system(2, 2)
    base = solve(sys, 5)
    for _ in range(5):
        r = random_portrait(TreeShape(2, 5), rng)
        new = solve(sys.conjugated("a1", r), 5)
        assert all(are_conjugate(base[x], new[x], Ambient.CYCLIC) for x in base)


def test_groupword_inverse():
    w = GroupWord.gen("a") * GroupWord.gen("b", 2)
    assert str(w.inverse().expand()).replace(" ", "") in ("b^-2*a^-1", "b^-1*b^-1*a^-1")
