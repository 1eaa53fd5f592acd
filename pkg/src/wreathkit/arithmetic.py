"""Exact arithmetic in Q(zeta_N), critical orbits of a*x^d + b, and the
cyclotomic conductor of the constant field extension."""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

from .model_groups import CaseTag, ModelParams, classify_case, kappa

Number = Union[int, Fraction, "CyclotomicNumber"]


# ---------------------------------------------------------------------------
# polynomials over Q as coefficient lists, lowest degree first
# ---------------------------------------------------------------------------

def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _pdivmod(p: Sequence, q: Sequence) -> tuple[list, list]:
    r = [Fraction(x) for x in p]
    _trim(r)
    q = list(q)
    dq = len(q) - 1
    lead = Fraction(q[-1])
    quo = [Fraction(0)] * max(len(r) - dq, 1)
    while len(r) - 1 >= dq and r:
        c = r[-1] / lead
        k = len(r) - 1 - dq
        quo[k] = c
        for i, b in enumerate(q):
            r[k + i] -= c * b
        _trim(r)
    return _trim(quo), r


def _psub(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    out = [(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)]
    return _trim([Fraction(x) for x in out])


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for k in range(1, n):
        if n % k == 0:
            num, rem = _pdivmod(num, cyclotomic_polynomial(k))
            assert not rem
    return tuple(int(c) for c in num)


def euler_phi(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


class NotRootOfUnity(ValueError):
    pass


class CyclotomicNumber:
    """An element of Q(zeta_N) as a polynomial in zeta of degree < phi(N)."""

    __slots__ = ("N", "coeffs")

    def __init__(self, N: int, coeffs: Sequence = ()):
        phi = cyclotomic_polynomial(N)
        c = [Fraction(x) for x in coeffs]
        if len(c) >= len(phi):
            _, c = _pdivmod(c, phi)
        c = c + [Fraction(0)] * (len(phi) - 1 - len(c))
        self.N = N
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def rational(cls, N: int, q) -> "CyclotomicNumber":
        return cls(N, [Fraction(q)])

    @classmethod
    def zeta(cls, N: int, k: int = 1) -> "CyclotomicNumber":
        k %= N
        return cls(N, [0] * k + [1])

    def _coerce(self, o: Number) -> "CyclotomicNumber":
        if isinstance(o, CyclotomicNumber):
            if o.N != self.N:
                raise ValueError("elements of different cyclotomic fields")
            return o
        return CyclotomicNumber.rational(self.N, o)

    def __add__(self, o: Number) -> "CyclotomicNumber":
        o = self._coerce(o)
        return CyclotomicNumber(self.N, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "CyclotomicNumber":
        return CyclotomicNumber(self.N, [-a for a in self.coeffs])

    def __sub__(self, o: Number) -> "CyclotomicNumber":
        return self + (-self._coerce(o))

    def __rsub__(self, o: Number) -> "CyclotomicNumber":
        return self._coerce(o) - self

    def __mul__(self, o: Number) -> "CyclotomicNumber":
        o = self._coerce(o)
        return CyclotomicNumber(self.N, _pmul(list(self.coeffs), list(o.coeffs)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CyclotomicNumber":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        acc = CyclotomicNumber.rational(self.N, 1)
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid: s*self + t*phi = g, with g a nonzero constant
        phi = [Fraction(x) for x in cyclotomic_polynomial(self.N)]
        r0, r1 = phi, _trim(list(self.coeffs))
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
        c = r1[0]
        return CyclotomicNumber(self.N, [x / c for x in s1])

    def __truediv__(self, o: Number) -> "CyclotomicNumber":
        return self * self._coerce(o).inverse()

    def __rtruediv__(self, o: Number) -> "CyclotomicNumber":
        return self._coerce(o) * self.inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, o: object) -> bool:
        if isinstance(o, (int, Fraction)):
            o = CyclotomicNumber.rational(self.N, o)
        if not isinstance(o, CyclotomicNumber):
            return NotImplemented
        return self.N == o.N and self.coeffs == o.coeffs

    def __hash__(self) -> int:
        return hash((self.N, self.coeffs))

    def embed(self, M: int) -> "CyclotomicNumber":
        """Image in Q(zeta_M) for N | M, sending zeta_N to zeta_M^(M/N)."""
        if M % self.N:
            raise ValueError(f"Q(zeta_{self.N}) is not inside Q(zeta_{M})")
        step = M // self.N
        out = [Fraction(0)] * (step * len(self.coeffs))
        for i, c in enumerate(self.coeffs):
            out[i * step] = c
        return CyclotomicNumber(M, out)

    def complex_embeddings(self) -> list[complex]:
        """Approximate values under every embedding into C."""
        vals = []
        for k in range(1, self.N + 1):
            if math.gcd(k, self.N) == 1:
                z = cmath.exp(2j * math.pi * k / self.N)
                vals.append(sum(float(c) * z ** i for i, c in enumerate(self.coeffs)))
        return vals

    def l1_norm(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs), Fraction(0))

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"CyclotomicNumber({self.N}, {str(self)!r})"


def cyc_add(x: CyclotomicNumber, y: CyclotomicNumber) -> CyclotomicNumber:
    return x + y


def cyc_mul(x: CyclotomicNumber, y: CyclotomicNumber) -> CyclotomicNumber:
    return x * y


def cyc_inv(x: CyclotomicNumber) -> CyclotomicNumber:
    return x.inverse()


def cyc_eq(x: CyclotomicNumber, y: CyclotomicNumber) -> bool:
    return x == y


def root_of_unity_log(x: CyclotomicNumber, d: int) -> int:
    """The k in [0, d) with x = zeta_d^k, where zeta_d = zeta_N^(N/d)."""
    N = x.N
    if N % d:
        raise ValueError(f"zeta_{d} is not in Q(zeta_{N})")
    for k in range(d):
        if x == CyclotomicNumber.zeta(N, k * (N // d)):
            return k
    raise NotRootOfUnity(f"{x} is not a {d}-th root of unity")


# ---------------------------------------------------------------------------
# literal parsing
# ---------------------------------------------------------------------------

class CyclotomicParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos + 1} in {text!r}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|(z)|(\*\*|[-+*/^()]))")


def parse_cyclotomic(text: str, N: int) -> CyclotomicNumber:
    """Parse a polynomial in z with rational coefficients, e.g. "1/2*z^2 - 3";
    z is the residue class of zeta_N."""
    toks: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise CyclotomicParseError("unexpected character", text, pos)
        if m.group(1):
            toks.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            toks.append(("z", "z", m.start(2)))
        else:
            op = m.group(3)
            toks.append(("op", "^" if op == "**" else op, m.start(3)))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def expect(val):
        nonlocal i
        t = peek()
        if t is None or t[1] != val:
            raise CyclotomicParseError(f"expected {val!r}", text, t[2] if t else len(text))
        i += 1

    def expr():
        nonlocal i
        v = term()
        while peek() and peek()[1] in "+-" and peek()[0] == "op":
            op = peek()[1]
            i += 1
            w = term()
            v = v + w if op == "+" else v - w
        return v

    def term():
        nonlocal i
        v = unary()
        while peek() and peek()[0] == "op" and peek()[1] in "*/":
            op = peek()[1]
            i += 1
            w = unary()
            if op == "*":
                v = v * w
            else:
                if w.is_zero():
                    raise CyclotomicParseError("division by zero", text, toks[i - 1][2])
                v = v / w
        return v

    def unary():
        nonlocal i
        t = peek()
        if t and t[0] == "op" and t[1] in "+-":
            i += 1
            v = unary()
            return -v if t[1] == "-" else v
        return power()

    def power():
        nonlocal i
        v = atom()
        t = peek()
        if t and t[0] == "op" and t[1] == "^":
            i += 1
            sign = 1
            t2 = peek()
            if t2 and t2[1] == "-":
                sign = -1
                i += 1
                t2 = peek()
            if not t2 or t2[0] != "num":
                raise CyclotomicParseError("expected integer exponent", text, t2[2] if t2 else len(text))
            i += 1
            v = v ** (sign * int(t2[1]))
        return v

    def atom():
        nonlocal i
        t = peek()
        if t is None:
            raise CyclotomicParseError("unexpected end of input", text, len(text))
        if t[0] == "num":
            i += 1
            return CyclotomicNumber.rational(N, int(t[1]))
        if t[0] == "z":
            i += 1
            return CyclotomicNumber.zeta(N)
        if t[1] == "(":
            i += 1
            v = expr()
            expect(")")
            return v
        raise CyclotomicParseError(f"unexpected {t[1]!r}", text, t[2])

    if not toks:
        raise CyclotomicParseError("empty literal", text, 0)
    v = expr()
    if i != len(toks):
        raise CyclotomicParseError(f"unexpected {toks[i][1]!r}", text, toks[i][2])
    return v


# ---------------------------------------------------------------------------
# critical orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitClassification:
    """kind is "pci" (no repeat found), "periodic" or "preperiodic"."""

    kind: str
    n: int | None = None
    m: int | None = None
    omega: int | None = None
    bound: int | None = None
    escaped_at: int | None = None
    checked: int | None = None
    orbit: tuple[CyclotomicNumber, ...] = ()

    def __str__(self) -> str:
        if self.kind == "periodic":
            return f"Periodic({self.n})"
        if self.kind == "preperiodic":
            return f"Preperiodic({self.m},{self.n},{self.omega})"
        return f"PCIUpToBound({self.bound})"

    @property
    def truncated(self) -> bool:
        """True when coefficient growth stopped the search before the bound."""
        return self.kind == "pci" and self.checked is not None and self.checked < (self.bound or 0) \
            and self.escaped_at is None

    @property
    def proven_infinite(self) -> bool:
        """True when some embedding of the orbit left the escape disc."""
        return self.kind == "pci" and self.escaped_at is not None


class OrbitError(ValueError):
    pass


def _escapes(p: CyclotomicNumber, a: CyclotomicNumber, b: CyclotomicNumber, d: int) -> bool:
    """Some embedding has |p| > max(|b|, (2/|a|)^(1/(d-1))), which forces the
    absolute values to grow strictly from here on.  Floating error is bounded
    by a margin proportional to the coefficient l1 norms."""
    try:
        ps, as_, bs = p.complex_embeddings(), a.complex_embeddings(), b.complex_embeddings()
        slack = 1e-9 * float(max(p.l1_norm(), a.l1_norm(), b.l1_norm(), Fraction(1)))
    except OverflowError:
        return False
    for x, y, z in zip(ps, as_, bs):
        if abs(y) <= slack:
            continue
        radius = max(abs(z) + slack, (2 / (abs(y) - slack)) ** (1 / (d - 1)))
        if abs(x) - slack > radius:
            return True
    return False


def _bit_size(p: CyclotomicNumber) -> int:
    return sum(c.numerator.bit_length() + c.denominator.bit_length() for c in p.coeffs)


MAX_BITS = 200_000


def classify_orbit(d: int, a: CyclotomicNumber, b: CyclotomicNumber, bound: int = 64,
                   max_bits: int = MAX_BITS) -> OrbitClassification:
    """Iterate p_(i+1) = a p_i^d + b from p_0 = 0 with exact arithmetic.

    The search stops early, still reporting PCIUpToBound, when an embedding
    of the orbit provably escapes to infinity (``escaped_at``) or when the
    coefficients outgrow ``max_bits`` (``checked`` then counts the iterates
    actually compared).

    omega is reported relative to zeta_d = zeta_L^(L/d) with L = lcm(N, d),
    where z = zeta_N is the generator of the input field.
    """
    if d < 2:
        raise OrbitError("degree must be at least 2")
    if bound < 1:
        raise OrbitError("bound must be >= 1")
    if a.N != b.N:
        raise OrbitError("a and b must lie in the same field")
    if a.is_zero():
        raise OrbitError("leading coefficient is zero")
    L = a.N * d // math.gcd(a.N, d)
    a, b = a.embed(L), b.embed(L)
    p = CyclotomicNumber.rational(L, 0)
    seen = {p: 0}
    orbit = [p]
    for j in range(1, bound + 1):
        p = a * p ** d + b
        if p in seen:
            i = seen[p]
            if i == 0:
                return OrbitClassification("periodic", n=j, orbit=tuple(orbit))
            m, n = i - 1, j - 1
            ratio = orbit[n] / orbit[m]
            try:
                w = root_of_unity_log(ratio, d)
            except NotRootOfUnity as exc:
                raise OrbitError("orbit ratio is not a root of unity") from exc
            return OrbitClassification("preperiodic", n=n, m=m, omega=w, orbit=tuple(orbit))
        seen[p] = j
        orbit.append(p)
        if _escapes(p, a, b, d):
            return OrbitClassification("pci", bound=bound, escaped_at=j, checked=j, orbit=tuple(orbit))
        if _bit_size(p) > max_bits:
            return OrbitClassification("pci", bound=bound, checked=j, orbit=tuple(orbit))
    return OrbitClassification("pci", bound=bound, checked=bound, orbit=tuple(orbit))


def orbit_case(cls: OrbitClassification, d: int) -> CaseTag:
    if cls.kind == "pci":
        return CaseTag.PCI
    if cls.kind == "periodic":
        return CaseTag.PERIODIC
    return classify_case(ModelParams.preperiodic(d, cls.m, cls.n, cls.omega))


# ---------------------------------------------------------------------------
# constant field
# ---------------------------------------------------------------------------

INFINITY = "inf"


@dataclass(frozen=True)
class ConstantFieldAnswer:
    """The constant field is K(zeta_conductor), or K(zeta + zeta^-1) when
    real_subfield is set.  conductor "inf" stands for zeta_(d^infinity)."""

    conductor: Union[int, str]
    real_subfield: bool = False
    conditional: bool = False
    case: CaseTag | None = None

    def __str__(self) -> str:
        c = self.conductor
        s = (f"K(zeta_{c} + zeta_{c}^-1)" if self.real_subfield else f"K(zeta_{c})")
        if c == INFINITY:
            s = "K(zeta_{d^inf})" if not self.real_subfield else "K(zeta_{2^inf} + zeta_{2^inf}^-1)"
        if self.conditional:
            s += " (conditional on PCI)"
        return s


def constant_field_conductor(cls: OrbitClassification, d: int,
                             level: Union[int, str]) -> ConstantFieldAnswer:
    inf = level == INFINITY or level == math.inf
    if not inf and (not isinstance(level, int) or level < 1):
        raise ValueError("level must be a positive integer or 'inf'")
    if cls.kind == "pci":
        return ConstantFieldAnswer(d, conditional=not cls.proven_infinite, case=CaseTag.PCI)
    if cls.kind == "periodic":
        if inf:
            return ConstantFieldAnswer(INFINITY, case=CaseTag.PERIODIC)
        return ConstantFieldAnswer(d ** ((level - 1) // cls.n + 1), case=CaseTag.PERIODIC)
    p = ModelParams.preperiodic(d, cls.m, cls.n, cls.omega)
    tag = classify_case(p)
    if not inf and level <= cls.n:
        return ConstantFieldAnswer(d, case=tag)
    if tag is CaseTag.D:
        return ConstantFieldAnswer(INFINITY if inf else 2 ** level, real_subfield=True, case=tag)
    k = kappa(p)
    return ConstantFieldAnswer(d * k // math.gcd(d, k), case=tag)
