import cmath
import math
import random
from fractions import Fraction

import pytest

from wreathkit import arithmetic as ar
from wreathkit.model_groups import CaseTag

Z = ar.CyclotomicNumber


def approx(x, k=1):
    """Value under zeta_N -> exp(2 pi i k / N)."""
    z = cmath.exp(2j * math.pi * k / x.N)
    return sum(float(c) * z ** i for i, c in enumerate(x.coeffs))


def rand_elem(rng, N):
    return Z(N, [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(ar.euler_phi(N))])


def test_cyclotomic_polynomials_against_sympy():
    sympy = pytest.importorskip("sympy")
    x = sympy.Symbol("x")
    for n in range(1, 25):
        ref = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()[::-1]
        assert list(ar.cyclotomic_polynomial(n)) == [int(c) for c in ref]


def test_field_ops_match_complex_values():
    rng = random.Random(0)
    for N in (3, 4, 5, 8, 12):
        for _ in range(20):
            x, y = rand_elem(rng, N), rand_elem(rng, N)
            assert abs(approx(x + y) - approx(x) - approx(y)) < 1e-9
            assert abs(approx(x * y) - approx(x) * approx(y)) < 1e-6
            if not x.is_zero():
                assert x * x.inverse() == Z.rational(N, 1)
                assert abs(approx(y / x) - approx(y) / approx(x)) < 1e-6


def test_known_values():
    i = Z.zeta(4)
    assert i * i == Z.rational(4, -1)
    w = Z.zeta(3)
    assert (1 + w).inverse() == -w
    assert ar.root_of_unity_log(Z.rational(2, -1), 2) == 1
    assert ar.root_of_unity_log(Z.zeta(12, 4), 3) == 1
    with pytest.raises(ar.NotRootOfUnity):
        ar.root_of_unity_log(Z.rational(3, 2), 3)


def test_embed_preserves_value():
    x = ar.parse_cyclotomic("1/2*z^2 - 3", 6)
    y = x.embed(12)
    assert abs(approx(x) - approx(y)) < 1e-9


def test_parser():
    x = ar.parse_cyclotomic("(1+z)^2 - 2*z", 5)
    assert x == ar.parse_cyclotomic("1 + z**2", 5)
    assert ar.parse_cyclotomic("z/2", 4) == Z.zeta(4) * Fraction(1, 2)
    with pytest.raises(ar.CyclotomicParseError):
        ar.parse_cyclotomic("1 + * z", 4)
    with pytest.raises(ar.CyclotomicParseError):
        ar.parse_cyclotomic("(1 + z", 4)


def classify(d, a, b, N=None, bound=64):
    N = N or d
    return ar.classify_orbit(d, ar.parse_cyclotomic(a, N), ar.parse_cyclotomic(b, N), bound)


def test_orbit_classification_examples():
    assert str(classify(2, "1", "-1")) == "Periodic(2)"
    assert str(classify(2, "1", "0")) == "Periodic(1)"
    c = classify(2, "1", "-2")
    assert str(c) == "Preperiodic(1,2,1)"
    assert ar.orbit_case(c, 2) is CaseTag.D
    c = classify(2, "1", "z", N=4)
    assert (c.m, c.n, c.omega) == (1, 3, 1)
    assert ar.orbit_case(c, 2) is CaseTag.B2
    c = classify(2, "1", "1", bound=50)
    assert str(c) == "PCIUpToBound(50)" and c.proven_infinite


def test_bounded_but_unresolved_orbit_is_capped():
    c = ar.classify_orbit(2, Z.rational(2, 1), Z.rational(2, Fraction(-1, 2)), 50, max_bits=2000)
    assert c.kind == "pci" and not c.proven_infinite


def test_constant_field_conductors():
    c = classify(2, "1", "-2")
    for l in range(3, 8):
        ans = ar.constant_field_conductor(c, 2, l)
        assert ans.conductor == 2 ** l and ans.real_subfield
    c = classify(2, "1", "z", N=4)
    assert [ar.constant_field_conductor(c, 2, l).conductor for l in range(1, 7)] == [2, 2, 2, 8, 8, 8]
    c = classify(2, "1", "-1")
    assert [ar.constant_field_conductor(c, 2, l).conductor for l in range(1, 6)] == [2, 2, 4, 4, 8]
    assert ar.constant_field_conductor(c, 2, ar.INFINITY).conductor == ar.INFINITY
    c = classify(2, "1", "1", bound=20)
    ans = ar.constant_field_conductor(c, 2, 4)
    assert ans.conductor == 2 and not ans.conditional
    with pytest.raises(ValueError):
        ar.constant_field_conductor(c, 2, 0)
