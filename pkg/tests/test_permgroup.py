import random

import numpy as np
import pytest

from wreathkit.permgroup import (
    GroupError,
    SchreierSimsChain,
    group_from_portraits,
    index,
    normal_closure,
    random_word_element,
)
from wreathkit.recursion import GroupWord
from wreathkit.tree_core import TreeShape, odometer, random_portrait


def closure_size(gens):
    """Plain orbit enumeration of the group generated by tuples."""
    n = len(gens[0])
    e = tuple(range(n))
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(g[i] for i in x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def test_wreath_product_order():
    gens = [odometer(2, 3)]
    rng = random.Random(0)
    gens += [random_portrait(TreeShape(2, 3), rng) for _ in range(8)]
    G = group_from_portraits(gens)
    assert G.order().value == len(closure_size([g.perm for g in gens]))


@pytest.mark.parametrize("d,l,k", [(2, 4, 3), (3, 2, 2), (3, 3, 2), (4, 2, 2)])
def test_engines_agree_with_enumeration(d, l, k):
    rng = random.Random(d + l + k)
    for _ in range(4):
        gens = [random_portrait(TreeShape(d, l), rng) for _ in range(k)]
        exact = closure_size([g.perm for g in gens]) if d ** l <= 16 else None
        tree = group_from_portraits(gens, method="tree")
        ss = group_from_portraits(gens, method="schreier-sims")
        assert tree.order().value == ss.order().value
        if exact is not None:
            assert tree.order().value == len(exact)


def test_membership_and_words():
    rng = random.Random(1)
    gens = [random_portrait(TreeShape(2, 4), rng) for _ in range(3)]
    G = group_from_portraits({"x": gens[0], "y": gens[1], "z": gens[2]})
    elems = closure_size([g.perm for g in gens])
    for _ in range(40):
        a, word = random_word_element(G, 12, rng)
        assert G.contains(a)
        w = G.contains_with_word(a)
        assert w is not None
        assert np.array_equal(G.eval_word(w), a)
    outside = [p for p in (random_portrait(TreeShape(2, 4), rng).perm for _ in range(200)) if p not in elems]
    assert outside
    for p in outside[:20]:
        assert not G.contains(p)


def test_sympy_oracle():
    combinatorics = pytest.importorskip("sympy.combinatorics")
    rng = random.Random(2)
    for d, l in [(2, 5), (3, 3)]:
        gens = [random_portrait(TreeShape(d, l), rng, cyclic=False) for _ in range(2)]
        ref = combinatorics.PermutationGroup([combinatorics.Permutation(list(g.perm)) for g in gens]).order()
        assert group_from_portraits(gens, method="schreier-sims").order().value == ref


def test_normal_closure_and_index():
    c = odometer(2, 3)
    G = group_from_portraits({"c": c})
    H = normal_closure(G, [GroupWord.gen("c", 2)])
    assert H.order().value == 4
    assert index(G, H).value == 2
    K = group_from_portraits({"c": c}, method="schreier-sims")
    with pytest.raises(GroupError):
        index(H, K)


def test_schreier_sims_chain_direct():
    ch = SchreierSimsChain(4, track_words=False)
    ch.extend([(np.array([1, 2, 3, 0]), None), (np.array([1, 0, 2, 3]), None)])
    assert int(ch.order()) == 24
