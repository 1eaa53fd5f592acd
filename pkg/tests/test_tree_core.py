import random

import pytest

from wreathkit.tree_core import (
    NotCyclicError,
    Portrait,
    ShapeError,
    TreeShape,
    act,
    bracket,
    chi,
    chi_prime,
    compose,
    enumerate_portraits,
    extend,
    format_portrait,
    inverse,
    odometer,
    order,
    parse_portrait,
    power,
    random_portrait,
    sigma_power,
    truncate,
)


def naive_action(labels_by_prefix, d, word):
    """Act letter by letter, looking up the label at each visited vertex."""
    out = []
    prefix = ()
    for c in word:
        lab = labels_by_prefix[prefix]
        out.append(lab[c - 1] + 1)
        prefix = prefix + (c,)
    return tuple(out)


def label_map(u):
    d = u.d
    m = {}
    labels = u.labels
    # BFS order: prefixes sorted by length then lexicographically
    prefixes = [()]
    for _ in range(u.level - 1):
        prefixes += [p + (c,) for p in prefixes if len(p) == len(prefixes[-1]) for c in range(1, d + 1)]
    for p, lab in zip(prefixes, labels):
        m[p] = lab
    return m


def test_bracket():
    assert bracket(3, 2) == 7
    assert bracket(1, 5) == 1
    assert bracket(0, 3) == 0


def test_identity_and_shape_checks():
    e = Portrait.identity(3, 2)
    assert e.is_identity()
    with pytest.raises(ShapeError):
        Portrait(2, 2, (0, 1, 2))
    with pytest.raises(ValueError):
        Portrait(2, 2, (0, 2, 1, 3))  # not a tree automorphism


def test_action_matches_label_walk():
    rng = random.Random(1)
    for d, l in [(2, 4), (3, 3)]:
        for _ in range(20):
            u = random_portrait(TreeShape(d, l), rng, cyclic=False)
            lm = label_map(u)
            for _ in range(10):
                w = tuple(rng.randint(1, d) for _ in range(l))
                assert act(u, w) == naive_action(lm, d, w)


def test_product_right_factor_first():
    rng = random.Random(2)
    shape = TreeShape(3, 3)
    u, v = random_portrait(shape, rng, False), random_portrait(shape, rng, False)
    w = (2, 1, 3)
    assert act(compose(u, v), w) == act(u, act(v, w))


def test_inverse_power_order():
    rng = random.Random(3)
    u = random_portrait(TreeShape(2, 5), rng)
    assert compose(u, inverse(u)).is_identity()
    k = order(u)
    assert power(u, k).is_identity()
    assert 32 % k == 0
    assert power(u, -1) == inverse(u)


def test_truncate_extend_roundtrip():
    rng = random.Random(4)
    u = random_portrait(TreeShape(3, 2), rng, False)
    assert truncate(extend(u, 4), 2) == u
    big = random_portrait(TreeShape(2, 4), rng)
    assert truncate(big, 2) == truncate(truncate(big, 3), 2)


def test_from_labels_and_parts_agree():
    s = sigma_power(2, 1)
    e = (0, 1)
    u = Portrait.from_labels(2, 2, [s, e, s])
    v = Portrait.from_parts(s, [Portrait.identity(2, 1), Portrait.from_root(s, 1)])
    assert u == v


def test_chi_additive():
    rng = random.Random(5)
    shape = TreeShape(3, 3)
    for _ in range(30):
        u, v = random_portrait(shape, rng), random_portrait(shape, rng)
        for k in (1, 2, 3):
            assert chi(compose(u, v), k) == (chi(u, k) + chi(v, k)) % 3


def test_chi_rejects_non_cyclic():
    u = Portrait.from_root((1, 0, 2), 1)
    with pytest.raises(NotCyclicError):
        chi(u, 1)


def test_chi_prime_weights_children():
    # only child 2 carries sigma at depth 1 -> chi' = 2 * 1
    s = sigma_power(3, 1)
    e = Portrait.identity(3, 1)
    u = Portrait.from_parts((0, 1, 2), [e, Portrait.from_root(s, 1), e])
    assert chi_prime(u, 2) == 2


def test_literal_roundtrip():
    rng = random.Random(6)
    for d, l in [(2, 3), (3, 2)]:
        for _ in range(20):
            u = random_portrait(TreeShape(d, l), rng, cyclic=False)
            assert parse_portrait(format_portrait(u), d, l) == u


def test_literal_examples():
    assert format_portrait(odometer(2, 3)) == "s(1,s(1,s))"
    assert parse_portrait("s^0", 2, 1).is_identity()
    with pytest.raises(ValueError):
        parse_portrait("s(1,s", 2)
    with pytest.raises(ValueError):
        parse_portrait("s(1,1,1)", 2)


def test_odometer_single_cycle():
    for d in (2, 3):
        for l in range(1, 5):
            c = odometer(d, l)
            assert order(c) == d ** l


def test_enumeration_size():
    assert sum(1 for _ in enumerate_portraits(TreeShape(2, 3), True)) == 128
    assert sum(1 for _ in enumerate_portraits(TreeShape(3, 1), False)) == 6
