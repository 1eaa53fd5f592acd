import random
from fractions import Fraction

import pytest

from wreathkit.model_groups import (
    CaseTag,
    ModelParams,
    ParamError,
    WordElement,
    assemble,
    branch_subgroup_N,
    classify_case,
    closed_form_log_order,
    delta_epsilon,
    embed_generators,
    generator_order_formula,
    hausdorff_dimension,
    heisenberg_commutator,
    heisenberg_elements,
    heisenberg_identity,
    kappa,
    model_generators,
    model_group,
    N_power_d,
    power_conjugator,
    psi_A,
    psi_B,
    quotient_by_N,
    stabilizer_membership_predicate,
    tau,
    word_sections,
)
from wreathkit.permgroup import index, random_word_element
from wreathkit.recursion import NamedFamily, builtin
from wreathkit.tree_core import Portrait, compose, inverse, order, perm_identity, power

pre = ModelParams.preperiodic
per = ModelParams.periodic


@pytest.mark.parametrize("q,tag", [
    ((3, 1, 2, 1), CaseTag.A1), ((2, 2, 4, 1), CaseTag.A2), ((2, 3, 4, 1), CaseTag.A3),
    ((4, 1, 2, 2), CaseTag.B1), ((2, 1, 3, 1), CaseTag.B2), ((2, 2, 3, 1), CaseTag.C),
    ((2, 1, 2, 1), CaseTag.D), ((4, 2, 3, 2), CaseTag.A2), ((6, 1, 3, 3), CaseTag.B1),
])
def test_case_classification(q, tag):
    assert classify_case(pre(*q)) is tag


def test_param_validation():
    with pytest.raises(ParamError):
        pre(2, 2, 2, 1)
    with pytest.raises(ParamError):
        pre(3, 1, 2, 3)
    with pytest.raises(ParamError):
        per(1, 2)


def test_sympy_order_oracle():
    combinatorics = pytest.importorskip("sympy.combinatorics")
    for p, l in [(pre(2, 2, 3, 1), 5), (pre(3, 1, 2, 1), 3), (per(2, 2), 5), (pre(2, 1, 3, 1), 5)]:
        gens = model_generators(p, l)
        ref = combinatorics.PermutationGroup(
            [combinatorics.Permutation(list(g.perm)) for g in gens.values()]).order()
        assert model_group(p, l)[1].order().value == ref


def test_closed_form_values():
    assert closed_form_log_order(pre(2, 2, 3, 1), 4) == 13
    assert closed_form_log_order(pre(2, 1, 2, 1), 1) == 1
    for l in range(2, 7):
        assert closed_form_log_order(pre(2, 1, 2, 1), l) == l + 1
    assert closed_form_log_order(per(2, 1), 5) == 5


def test_orders_match_closed_form_small():
    for p in [per(2, 2), per(3, 1), pre(2, 1, 3, 1), pre(3, 1, 2, 1), pre(2, 2, 3, 1), pre(2, 1, 2, 1)]:
        for l in range(1, 5):
            assert model_group(p, l)[1].order().log_d == closed_form_log_order(p, l), (p, l)


def test_generator_orders():
    for p in [per(2, 2), per(3, 2), pre(2, 1, 3, 1)]:
        gens = model_generators(p, 5 if p.d == 2 else 3)
        for i, name in enumerate(p.names, start=1):
            lv = gens[name].level
            if lv >= i:
                assert order(gens[name]) == generator_order_formula(p, i, lv)


def test_hausdorff_and_kappa_values():
    assert hausdorff_dimension(pre(2, 2, 3, 1)) == Fraction(11, 16)
    assert hausdorff_dimension(per(2, 2)) == Fraction(2, 3)
    assert hausdorff_dimension(per(2, 1)) == 0
    assert hausdorff_dimension(pre(2, 1, 2, 1)) == 0
    assert hausdorff_dimension(pre(3, 1, 2, 1)) == Fraction(2, 3)
    assert kappa(pre(3, 1, 2, 1)) == 9
    assert kappa(pre(2, 2, 4, 1)) == 4
    assert kappa(pre(4, 1, 2, 2)) == 16
    assert kappa(pre(2, 1, 3, 1)) == 8
    with pytest.raises(ParamError):
        kappa(pre(2, 1, 2, 1))
    assert delta_epsilon(pre(3, 1, 2, 1)) == (2, 4)
    assert delta_epsilon(pre(2, 1, 3, 1)) == (3, 4)


def test_branch_subgroup_indices():
    p = pre(2, 2, 3, 1)
    G3, G4, G5 = (model_group(p, l)[1] for l in (3, 4, 5))
    assert index(G3, branch_subgroup_N(p, 3)).value == 4
    assert index(G4, branch_subgroup_N(p, 4)).value == 8
    assert index(G4, N_power_d(p, 4)).value == 8
    assert index(G5, N_power_d(p, 5)).value == 16


@pytest.mark.parametrize("d", [2, 3, 4])
def test_heisenberg(d):
    E = heisenberg_elements(d)
    e = heisenberg_identity(d)
    g1, g2 = embed_generators(d)
    assert len(set(E)) == d ** 3
    assert all(x * x.inverse() == e for x in E)
    c = heisenberg_commutator(g1, g2)
    assert c != e
    assert heisenberg_commutator(g1, c) == e and heisenberg_commutator(g2, c) == e
    assert tau(g1) == g2 and all(tau(tau(x)) == x for x in E)
    # g1, g2 generate
    seen = {e}
    frontier = [e]
    while frontier:
        frontier = [y for x in frontier for y in (x * g1, x * g2) if y not in seen and not seen.add(y)]
    assert len(seen) == d ** 3


def _portrait(G, a, p, l):
    return Portrait(p.d, l, [int(x) for x in a], check=False)


def test_psi_B_homomorphism_and_kernel():
    p = pre(2, 1, 3, 1)
    l = 5
    rng = random.Random(0)
    _, G = model_group(p, l)
    for _ in range(50):
        a, _ = random_word_element(G, 8, rng)
        b, _ = random_word_element(G, 8, rng)
        A, B = _portrait(G, a, p, l), _portrait(G, b, p, l)
        assert psi_B(A * B, p) == psi_B(A, p) * psi_B(B, p)
    N = branch_subgroup_N(p, l)
    assert all(psi_B(_portrait(G, g, p, l), p) == heisenberg_identity(2) for g in N.generators)
    assert index(G, N).value == 8


def test_psi_A_homomorphism():
    p = pre(3, 1, 2, 1)
    l = 4
    rng = random.Random(1)
    _, G = model_group(p, l)
    for _ in range(50):
        a, _ = random_word_element(G, 8, rng)
        b, _ = random_word_element(G, 8, rng)
        A, B = _portrait(G, a, p, l), _portrait(G, b, p, l)
        x, y = psi_A(A, p), psi_A(B, p)
        assert psi_A(A * B, p) == ((x[0] + y[0]) % 3, (x[1] + y[1]) % 3)


def test_quotient_by_N_is_well_defined_on_elements():
    p = pre(2, 2, 3, 1)
    l = 5
    rng = random.Random(2)
    _, G = model_group(p, l)
    N = branch_subgroup_N(p, l)
    seen = {}
    for _ in range(300):
        a, w = random_word_element(G, 10, rng)
        img = quotient_by_N(w, p)
        seen.setdefault(tuple(int(x) for x in a), img)
        assert seen[tuple(int(x) for x in a)] == img
        if img == heisenberg_identity(2):
            assert N.contains(a)
    assert len(set(seen.values())) == 8


@pytest.mark.parametrize("p,l", [
    (pre(3, 1, 2, 1), 4), (pre(2, 2, 4, 1), 6), (pre(2, 1, 3, 1), 5), (pre(2, 2, 3, 1), 5),
    (pre(2, 1, 2, 1), 4), (pre(4, 1, 2, 2), 4), (per(2, 2), 5), (per(3, 2), 4), (per(2, 1), 5),
])
def test_stabilizer_predicate_matches_membership(p, l):
    rng = random.Random(l * 31 + p.d)
    _, G = model_group(p, l)
    _, Gs = model_group(p, l - 1)
    pos = 0
    for t in range(40):
        comps = []
        for i in range(p.d):
            a, w = random_word_element(Gs, 6, rng)
            comps.append(WordElement(w, Portrait(p.d, l - 1, [int(x) for x in a], check=False)))
        if t % 2:
            # force a member: sections of a random element fixing the first level
            while True:
                a, w = random_word_element(G, 10, rng)
                root, kids = word_sections(w, p)
                if root == perm_identity(p.d):
                    break
            comps = [WordElement(k, Portrait(p.d, l - 1, [int(x) for x in Gs.eval_word(k)], check=False))
                     for k in kids]
        expected = G.contains(assemble(comps).perm)
        pos += expected
        assert stabilizer_membership_predicate(comps, p, l - 1) == expected
    assert pos > 0


def test_word_sections_match_portrait():
    p = pre(2, 1, 3, 1)
    rng = random.Random(3)
    _, G = model_group(p, 5)
    _, Gs = model_group(p, 4)
    for _ in range(20):
        a, w = random_word_element(G, 10, rng)
        u = Portrait(2, 5, [int(x) for x in a], check=False)
        root, kids = word_sections(w, p)
        assert u.root == root
        for i in range(2):
            assert [int(x) for x in Gs.eval_word(kids[i])] == list(u.children[i].perm)


@pytest.mark.parametrize("q", [(2, 2, 3, 1), (3, 1, 2, 1), (2, 1, 3, 1)])
def test_power_conjugator_conjugates_b_inf(q):
    p = pre(*q)
    b = builtin(NamedFamily("b_inf", p), 5)["b_inf"]
    for e in range(3):
        c = power_conjugator(p, 5, e)
        assert compose(c, b, inverse(c)) == power(b, 1 + p.d * e)


@pytest.mark.parametrize("q,l", [((2, 1, 3, 1), 4), ((2, 2, 3, 1), 4), ((3, 1, 2, 1), 3)])
def test_power_conjugator_membership_by_enumeration(q, l):
    p = pre(*q)
    gens, G = model_group(p, l)
    elems = {tuple(range(p.d ** l))}
    frontier = list(elems)
    while frontier:
        frontier = [y for x in frontier for g in gens.values()
                    for y in [tuple(g.perm[i] for i in x)] if y not in elems and not elems.add(y)]
    assert len(elems) == G.order().value
    for e in range(2 * kappa(p) // p.d):
        c = power_conjugator(p, l, e)
        assert (c.perm in elems) == G.contains(c.perm)
