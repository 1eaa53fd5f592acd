"""The periodic and preperiodic model groups and their invariants.

M_per(d, n) is generated by a_1 = s(1, ..., 1, a_n) and a_i = (1, ..., 1, a_{i-1}).
M_pre(d, m, n, w) is generated by b_1 = s, b_{m+1} with b_n in component w and
b_m in component d, and b_i = (1, ..., 1, b_{i-1}) otherwise.

Closed forms (orders, Hausdorff dimension, the conjugacy modulus kappa) are
pure arithmetic; everything else is computed from stabilizer chains of the
level-l truncations.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .permgroup import (
    PermutationGroup,
    group_from_portraits,
    normal_closure,
)
from .recursion import (
    GroupWord,
    NamedFamily,
    RecursionSystem,
    builtin,
    mper_system,
    mpre_system,
)
from .tree_core import Portrait, bracket, chi, chi_prime, perm_identity


class Family(str, Enum):
    PERIODIC = "periodic"
    PREPERIODIC = "preperiodic"


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    family: Family
    d: int
    n: int
    m: int | None = None
    omega: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.d < 2 or self.n < 1:
            raise ParamError("need d >= 2 and n >= 1")
        if self.family is Family.PREPERIODIC:
            if self.m is None or self.omega is None:
                raise ParamError("preperiodic parameters need m and omega")
            if not 1 <= self.m < self.n:
                raise ParamError("need 1 <= m < n")
            if not 1 <= self.omega < self.d:
                raise ParamError("need 1 <= omega < d")
        elif self.m is not None or self.omega is not None:
            raise ParamError("periodic parameters take no m or omega")

    @classmethod
    def periodic(cls, d: int, n: int) -> "ModelParams":
        return cls(Family.PERIODIC, d, n)

    @classmethod
    def preperiodic(cls, d: int, m: int, n: int, omega: int) -> "ModelParams":
        return cls(Family.PREPERIODIC, d, n, m, omega)

    @property
    def is_periodic(self) -> bool:
        return self.family is Family.PERIODIC

    @property
    def prefix(self) -> str:
        return "a" if self.is_periodic else "b"

    @property
    def names(self) -> list[str]:
        return [f"{self.prefix}{i}" for i in range(1, self.n + 1)]

    def system(self) -> RecursionSystem:
        if self.is_periodic:
            return mper_system(self.d, self.n)
        return mpre_system(self.d, self.m, self.n, self.omega)

    def __str__(self) -> str:
        if self.is_periodic:
            return f"periodic(d={self.d}, n={self.n})"
        return f"preperiodic(d={self.d}, m={self.m}, n={self.n}, omega={self.omega})"


class CaseTag(str, Enum):
    PCI = "PCI"
    PERIODIC = "Periodic"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    B1 = "B1"
    B2 = "B2"
    C = "C"
    D = "D"


def classify_case(p: ModelParams) -> CaseTag:
    if p.is_periodic:
        return CaseTag.PERIODIC
    d, m, n, w = p.d, p.m, p.n, p.omega
    if 2 * w != d:
        return CaseTag.A1
    if m > 1 and (d, n) != (2, m + 1):
        return CaseTag.A2
    if d == 2 and m > 2 and n == m + 1:
        return CaseTag.A3
    if d > 2 and m == 1:
        return CaseTag.B1
    if d == 2 and m == 1 and n > 2:
        return CaseTag.B2
    if (d, m, n) == (2, 2, 3):
        return CaseTag.C
    if (d, m, n) == (2, 1, 2):
        return CaseTag.D
    raise AssertionError(f"unclassified parameters {p}")


def _letter(p: ModelParams) -> str:
    return classify_case(p).value[0]


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

def model_generators(p: ModelParams, level: int) -> dict[str, Portrait]:
    fam = NamedFamily("mper" if p.is_periodic else "mpre", p)
    return builtin(fam, level)


@functools.lru_cache(maxsize=64)
def _model_group(p: ModelParams, level: int) -> tuple[tuple[tuple[str, Portrait], ...], PermutationGroup]:
    gens = model_generators(p, level)
    return tuple(gens.items()), group_from_portraits(gens)


def model_group(p: ModelParams, level: int) -> tuple[dict[str, Portrait], PermutationGroup]:
    """Named generators at level l and the group they generate."""
    if level < 1:
        raise ParamError("level must be >= 1")
    items, G = _model_group(p, level)
    return dict(items), G


def hat_subgroup(p: ModelParams, level: int, excluded: Sequence[int]) -> PermutationGroup:
    """Normal closure of the generators whose index is not excluded."""
    _, G = model_group(p, level)
    seeds = [GroupWord.gen(x) for i, x in enumerate(p.names, 1) if i not in excluded]
    return normal_closure(G, seeds)


def _comm(x: GroupWord, y: GroupWord) -> GroupWord:
    return GroupWord([(x, -1), (y, -1), (x, 1), (y, 1)])


def branch_seeds(p: ModelParams) -> list[GroupWord]:
    """Words whose normal closure is the branch subgroup N."""
    if p.is_periodic:
        raise ParamError("branch subgroup is defined for the preperiodic family")
    letter = _letter(p)
    bm, bn = GroupWord.gen(f"b{p.m}"), GroupWord.gen(f"b{p.n}")
    if letter == "D":
        return []
    seeds = [GroupWord.gen(x) for i, x in enumerate(p.names, 1) if i not in (p.m, p.n)]
    if letter == "A":
        seeds.append(_comm(bm, bn))
    else:
        c = _comm(bm, bn)
        seeds += [_comm(bm, c), _comm(bn, c)]
    return seeds


def branch_subgroup_N(p: ModelParams, level: int) -> PermutationGroup:
    _, G = model_group(p, level)
    return normal_closure(G, branch_seeds(p))


def N_power_d(p: ModelParams, level: int) -> PermutationGroup:
    """N x ... x N (d copies) at level l, built from N at level l-1."""
    if _letter(p) == "D":
        raise ParamError("N^d is not used in case D (N is trivial)")
    if level < 2:
        raise ParamError("N^d needs level >= 2")
    _, G = model_group(p, level)
    N = branch_subgroup_N(p, level - 1)
    one = Portrait.identity(p.d, level - 1)
    ident = perm_identity(p.d)
    gens = []
    for a in N.generators:
        u = Portrait(p.d, level - 1, [int(x) for x in a], check=False)
        for j in range(p.d):
            kids = [one] * p.d
            kids[j] = u
            gens.append(Portrait.from_parts(ident, kids))
    if not gens:
        return PermutationGroup(G.degree, [], [], G.tree, "tree")
    return group_from_portraits(gens)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def delta_epsilon(p: ModelParams) -> tuple[int, int]:
    """(log_d [M:N], log_d [M:N^d]) for cases A and B."""
    letter = _letter(p)
    if letter == "A":
        return 2, p.d + 1
    if letter in "BC":
        return 3, 3 * p.d // 2 + 1
    raise ParamError("no branch quotient in case D")


def closed_form_log_order(p: ModelParams, level: int) -> int:
    """log_d of the order of the level-l truncation."""
    if level < 0:
        raise ParamError("level must be >= 0")
    d, n, l = p.d, p.n, level
    if p.is_periodic:
        q, r = divmod(l, n)
        return bracket(l, d) - d ** r * bracket(q, d ** n) + q
    if l <= n:
        return bracket(l, d)
    tag = classify_case(p)
    if tag is CaseTag.C:
        return 13 if l == 4 else 11 * 2 ** (l - 4) + 2
    if tag is CaseTag.D:
        return l + 1
    delta, eps = delta_epsilon(p)
    return bracket(l, d) + (eps - 1) * bracket(l - n, d) - delta * bracket(l - n + 1, d) + delta


def hausdorff_dimension(p: ModelParams) -> Fraction:
    d, n = p.d, p.n
    if p.is_periodic:
        return 1 - Fraction(d - 1, d ** n - 1)
    letter = _letter(p)
    if letter == "A":
        return 1 - Fraction(1, d ** (n - 1))
    if letter == "B":
        return 1 - Fraction(3, 2 * d ** (n - 1))
    if letter == "C":
        return Fraction(11, 16)
    return Fraction(0)


def kappa(p: ModelParams) -> int:
    """Modulus with b_inf conjugate to b_inf^eps iff eps = 1 mod kappa."""
    if p.is_periodic:
        raise ParamError("kappa is defined for the preperiodic family")
    d, m, w = p.d, p.m, p.omega
    letter = _letter(p)
    if letter == "A":
        if m > 1 or d % 2:
            return d * d // math.gcd(d, w)
        return d * d // math.gcd(d, w + d // 2)
    if letter in "BC":
        return 4 * d
    raise ParamError("case D has no finite kappa (b_inf ~ b_inf^eps iff eps = +-1 mod 2^l)")


def periodic_modulus(p: ModelParams, level: int) -> int:
    """d^(floor((l-1)/n) + 1): the periodic analogue of kappa at level l."""
    return p.d ** ((level - 1) // p.n + 1)


def power_conjugator(p: ModelParams, level: int, e: int) -> Portrait:
    """c_eps with eps = 1 + d*e, conjugating the product of the generators
    to its eps-th power."""
    tag = "power_conjugator_per" if p.is_periodic else "power_conjugator_pre"
    return builtin(NamedFamily(tag, p, e), level)["c_eps"]


def generator_product(p: ModelParams, level: int) -> Portrait:
    tag = "a_inf" if p.is_periodic else "b_inf"
    return next(iter(builtin(NamedFamily(tag, p), level).values()))


# ---------------------------------------------------------------------------
# Heisenberg group
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeisenbergElement:
    """s^r (s, t) in <s> x| (Z/d)^2, all residues mod d."""

    r: int
    s: int
    t: int
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", self.r % self.d)
        object.__setattr__(self, "s", self.s % self.d)
        object.__setattr__(self, "t", self.t % self.d)

    def __mul__(self, o: "HeisenbergElement") -> "HeisenbergElement":
        if o.d != self.d:
            raise ValueError("mixed moduli")
        return HeisenbergElement(self.r + o.r, self.s + o.s + o.r * self.t, self.t + o.t, self.d)

    def inverse(self) -> "HeisenbergElement":
        # s^r(s,t) * s^-r(s',t') = 1 forces t' = -t and s' = -s + r t
        return HeisenbergElement(-self.r, -self.s + self.r * self.t, -self.t, self.d)

    def __pow__(self, k: int) -> "HeisenbergElement":
        x = self if k >= 0 else self.inverse()
        acc = heisenberg_identity(self.d)
        for _ in range(abs(k)):
            acc = acc * x
        return acc

    def as_tuple(self) -> tuple[int, int, int]:
        return self.r, self.s, self.t


def heisenberg_identity(d: int) -> HeisenbergElement:
    return HeisenbergElement(0, 0, 0, d)


def heisenberg_mul(x: HeisenbergElement, y: HeisenbergElement) -> HeisenbergElement:
    return x * y


def heisenberg_inverse(x: HeisenbergElement) -> HeisenbergElement:
    return x.inverse()


def heisenberg_commutator(x: HeisenbergElement, y: HeisenbergElement) -> HeisenbergElement:
    return x.inverse() * y.inverse() * x * y


def tau(x: HeisenbergElement) -> HeisenbergElement:
    """The involution exchanging the two standard generators."""
    return HeisenbergElement(x.t, x.r * x.t - x.s, x.r, x.d)


def embed_generators(d: int) -> tuple[HeisenbergElement, HeisenbergElement]:
    return HeisenbergElement(1, 0, 0, d), HeisenbergElement(0, 0, 1, d)


def heisenberg_elements(d: int) -> list[HeisenbergElement]:
    return [HeisenbergElement(r, s, t, d) for r in range(d) for s in range(d) for t in range(d)]


# ---------------------------------------------------------------------------
# abelian and Heisenberg quotient maps
# ---------------------------------------------------------------------------

def psi_A(u: Portrait, p: ModelParams) -> tuple[int, int]:
    if u.level < p.n:
        raise ParamError(f"psi_A needs level >= {p.n}")
    return chi(u, p.m), chi(u, p.n)


def psi_B(u: Portrait, p: ModelParams) -> HeisenbergElement:
    if p.m != 1:
        raise ParamError("psi_B needs m = 1")
    if u.level < p.n:
        raise ParamError(f"psi_B needs level >= {p.n}")
    return HeisenbergElement(-chi(u, 1), chi_prime(u, p.n), chi(u, p.n), p.d)


def quotient_by_N(word: GroupWord, p: ModelParams):
    """Image of a word in M_pre / N.

    Case A: (exponent sum of b_m, exponent sum of b_n) mod d.
    Cases B, C: b_m -> g_1, b_n -> g_2, other generators -> 1 in H_d.
    Case D: N is trivial, so the quotient is the group itself; returns None.
    """
    letter = _letter(p)
    bm, bn = f"b{p.m}", f"b{p.n}"
    if letter == "A":
        sums = word.exponent_sums(p.names)
        return sums[p.m - 1] % p.d, sums[p.n - 1] % p.d
    if letter in "BC":
        g1, g2 = embed_generators(p.d)
        one = heisenberg_identity(p.d)

        def leaf(b):
            if b == bm:
                return g1
            if b == bn:
                return g2
            if isinstance(b, str) and b in p.names:
                return one
            raise KeyError(f"unknown generator {b!r}")
        return word.fold(leaf, lambda x, y: x * y, lambda x: x.inverse(), one,
                         lambda x, k: x ** k)
    return None


@dataclass(frozen=True)
class WordElement:
    """A group element together with a word over the model generators."""

    word: GroupWord
    portrait: Portrait


class MissingWordError(ValueError):
    pass


def _swap_word(word: GroupWord, a: str, b: str) -> GroupWord:
    memo: dict[int, GroupWord] = {}

    def rec(w: GroupWord) -> GroupWord:
        if id(w) in memo:
            return memo[id(w)]
        out = []
        for base, e in w.factors:
            if isinstance(base, GroupWord):
                out.append((rec(base), e))
            elif base == a:
                out.append((b, e))
            elif base == b:
                out.append((a, e))
            else:
                out.append((base, e))
        memo[id(w)] = GroupWord(out)
        return memo[id(w)]
    return rec(word)


def eval_model_word(word: GroupWord, p: ModelParams, level: int) -> Portrait:
    gens, G = model_group(p, level)
    a = G.eval_word(word)
    return Portrait(p.d, level, [int(x) for x in a], check=False)


def eta_exponent_sums(word: GroupWord, p: ModelParams) -> tuple[int, ...]:
    """Signed exponent sum of each a_i: an integer lift of eta."""
    if not p.is_periodic:
        raise ParamError("eta is defined for the periodic family")
    return word.exponent_sums(p.names)


@functools.lru_cache(maxsize=64)
def eta_modulus(p: ModelParams, level: int) -> int:
    """Order of the image of a_n in the level-l quotient by the closure of
    the other generators; eta_n is well defined modulo this."""
    _, G = model_group(p, level)
    H = hat_subgroup(p, level, [p.n])
    return G.order().value // H.order().value


def _word_of(x) -> GroupWord:
    if isinstance(x, WordElement):
        return x.word
    if isinstance(x, GroupWord):
        return x
    raise MissingWordError("this criterion is evaluated on generator words")


def stabilizer_membership_predicate(components: Sequence, p: ModelParams,
                                    level: int | None = None) -> bool:
    """Whether the tuple (g_1, ..., g_d) lies in the first-level stabilizer.

    Components may be Portraits (case A only), GroupWords or WordElements.
    ``level`` is the depth of the components (one less than the depth at
    which the tuple acts); it is needed when only words are given.
    """
    d = p.d
    if len(components) != d:
        raise ParamError(f"need {d} components")
    if level is None:
        for x in components:
            if isinstance(x, (Portrait, WordElement)):
                level = (x if isinstance(x, Portrait) else x.portrait).level
                break
    if p.is_periodic:
        if level is None:
            raise ParamError("level needed")
        mod = eta_modulus(p, level)
        ks = [eta_exponent_sums(_word_of(x), p)[p.n - 1] % mod for x in components]
        return all(k == ks[0] for k in ks)
    w = p.omega
    letter = _letter(p)
    if letter == "A":
        vals = []
        for x in components:
            if isinstance(x, Portrait) or isinstance(x, WordElement):
                u = x if isinstance(x, Portrait) else x.portrait
                vals.append(psi_A(u, p))
            else:
                vals.append(quotient_by_N(x, p))
        return all(vals[i][0] == vals[(i + w) % d][1] for i in range(d))
    if letter in "BC":
        imgs = [quotient_by_N(_word_of(x), p) for x in components]
        return all(tau(imgs[i]) == imgs[(i + w) % d] for i in range(d))
    # case D: N is trivial, tau swaps b_1 and b_2 exactly
    if level is None:
        raise ParamError("level needed")
    words = [_word_of(x) for x in components]
    vals = [eval_model_word(wd, p, level) for wd in words]
    swapped = [eval_model_word(_swap_word(wd, "b1", "b2"), p, level) for wd in words]
    return all(swapped[i] == vals[(i + w) % d] for i in range(d))


def assemble(components: Sequence) -> Portrait:
    """The level-one stabilizer element with the given sections."""
    us = [x.portrait if isinstance(x, WordElement) else x for x in components]
    return Portrait.from_parts(perm_identity(us[0].d), us)


def generator_order_formula(p: ModelParams, i: int, level: int) -> int:
    """Order of the i-th generator at level l >= i."""
    if p.is_periodic:
        return p.d ** ((level - i) // p.n + 1)
    return p.d


def word_sections(word: GroupWord, p: ModelParams, limit: int = 100_000):
    """Root label and the d section words of a word over the generators,
    read off the defining recursion: (xy)_i = x_{y(i)} y_i."""
    sys = p.system()
    d = p.d
    flat = word.expand(limit)
    root = tuple(range(d))
    kids: list[list[tuple[str, int]]] = [[] for _ in range(d)]
    for name, e in flat.factors:
        if not isinstance(name, str) or name not in sys.equations:
            raise KeyError(f"unknown generator {name!r}")
        eq = sys.equations[name]
        g, h = eq.root, [w.expand(limit).factors for w in eq.children]
        for _ in range(abs(e)):
            if e > 0:
                yr, yk = g, h
            else:
                gi = [0] * d
                for i, x in enumerate(g):
                    gi[x] = i
                yr = tuple(gi)
                yk = [GroupWord(h[gi[i]]).inverse().factors for i in range(d)]
            kids = [kids[yr[i]] + list(yk[i]) for i in range(d)]
            root = tuple(root[yr[i]] for i in range(d))
    return root, [GroupWord(k) for k in kids]
