import random

import pytest

from wreathkit.conjugacy import (
    Ambient,
    EnumerationCapExceeded,
    ambient_perms,
    are_conjugate,
    brute_force_centralizer,
    brute_force_classes,
    brute_force_conjugator,
    conjugator,
    is_odometer,
    pi_product,
    sigma_normal_form,
)
from wreathkit.tree_core import (
    Portrait,
    ShapeError,
    TreeShape,
    compose,
    inverse,
    odometer,
    parse_portrait,
    random_portrait,
    sigma_power,
)


def test_small_examples():
    u = parse_portrait("s(1,s)", 2)
    v = parse_portrait("s(s,1)", 2)
    w = conjugator(u, v, Ambient.CYCLIC)
    assert w is not None and compose(inverse(w), u, w) == v
    assert not are_conjugate(parse_portrait("s", 2), parse_portrait("s^0", 2, 1), Ambient.FULL)


def test_all_pairs_c2_cubed():
    shape = TreeShape(2, 3)
    cls = brute_force_classes(shape, Ambient.CYCLIC)
    elems = [Portrait(2, 3, p, check=False) for p in cls]
    for u in elems:
        for v in elems:
            assert are_conjugate(u, v, Ambient.CYCLIC) == (cls[u.perm] == cls[v.perm])


@pytest.mark.parametrize("d,l,amb", [(3, 2, Ambient.CYCLIC), (2, 3, Ambient.FULL), (3, 2, Ambient.FULL)])
def test_random_pairs_against_classes(d, l, amb):
    rng = random.Random(d * 10 + l)
    shape = TreeShape(d, l)
    cls = brute_force_classes(shape, amb)
    elems = [Portrait(d, l, p, check=False) for p in cls]
    for i in range(300):
        u = rng.choice(elems)
        v = rng.choice(elems)
        if i % 2:
            w = rng.choice(elems)
            v = compose(inverse(w), u, w)
        assert are_conjugate(u, v, amb) == (cls[u.perm] == cls[v.perm])


def test_brute_force_conjugator_agrees():
    rng = random.Random(5)
    shape = TreeShape(2, 3)
    for _ in range(30):
        u, v = random_portrait(shape, rng), random_portrait(shape, rng)
        assert (brute_force_conjugator(u, v, Ambient.CYCLIC) is None) == (conjugator(u, v, Ambient.CYCLIC) is None)


def test_pi_product_cyclic_shift():
    rng = random.Random(6)
    for _ in range(20):
        u = random_portrait(TreeShape(3, 3), rng, cyclic=False)
        g = u.root
        for i in range(1, 4):
            assert are_conjugate(pi_product(u, g[i - 1] + 1), pi_product(u, i), Ambient.FULL)


def test_sigma_normal_form():
    rng = random.Random(7)
    for _ in range(10):
        u = random_portrait(TreeShape(3, 3), rng)
        u = Portrait.from_parts(sigma_power(3, 1), list(u.children))
        n, w = sigma_normal_form(u)
        assert compose(inverse(w), u, w) == n
        assert all(c.is_identity() for c in n.children[:-1])


def test_odometer_criterion():
    rng = random.Random(8)
    shape = TreeShape(2, 4)
    c = odometer(2, 4)
    for _ in range(100):
        u = random_portrait(shape, rng)
        assert is_odometer(u) == are_conjugate(u, c, Ambient.CYCLIC)
    assert is_odometer(c, Ambient.FULL)


def test_centralizer_of_odometer():
    c = odometer(2, 3)
    cent = brute_force_centralizer(c, Ambient.FULL)
    powers = {compose(*([c] * k)) if k else Portrait.identity(2, 3) for k in range(8)}
    assert set(cent) == powers


def test_errors():
    with pytest.raises(ShapeError):
        are_conjugate(odometer(2, 2), odometer(2, 3))
    with pytest.raises(ValueError):
        are_conjugate(Portrait.from_root((1, 0, 2), 1), odometer(3, 1), Ambient.CYCLIC)
    with pytest.raises(EnumerationCapExceeded):
        next(ambient_perms(TreeShape(2, 5), Ambient.FULL, cap=1000))
