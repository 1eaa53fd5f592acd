"""Conjugacy in [S_d]^l and [C_d]^l by recursion over levels.

u = g(h) and v = g'(h') are conjugate iff some root label a with
a^-1 g a = g' matches orbit products: pi_{v,i} ~ pi_{u,a(i)} one level down,
for a representative i of each g'-orbit.  A witness w = a(b_1..b_d) is then
propagated along each orbit from b_{g'(j)} = h_{a(j)} b_j h'_j^-1.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterator

from .tree_core import (
    Perm,
    Portrait,
    NotCyclicError,
    ShapeError,
    TreeShape,
    bracket,
    chi,
    compose,
    inverse,
    label_group,
    odometer,
    perm_identity,
    perm_inverse,
    perm_mul,
    sigma_power,
)


class Ambient(str, Enum):
    FULL = "full"
    CYCLIC = "cyclic"


def _ambient(amb: Ambient | str) -> Ambient:
    return Ambient(amb)


def _check(u: Portrait, v: Portrait, amb: Ambient) -> None:
    if u.d != v.d or u.level != v.level:
        raise ShapeError("conjugacy needs portraits of the same shape")
    if amb is Ambient.CYCLIC and not (u.is_cyclic and v.is_cyclic):
        raise NotCyclicError("cyclic ambient needs portraits with labels in C_d")


def orbit(g: Perm, i: int) -> list[int]:
    out = [i]
    j = g[i]
    while j != i:
        out.append(j)
        j = g[j]
    return out


def _pi(u: Portrait, i: int) -> Portrait:
    kids = u.children
    orb = orbit(u.root, i)
    return compose(*[kids[j] for j in reversed(orb)])


def pi_product(u: Portrait, i: int) -> Portrait:
    """pi_{u,i} = h_{g^(n-1)(i)} ... h_{g(i)} h_i for 1-based i."""
    if u.level < 1:
        raise ValueError("orbit products need level >= 1")
    if not 1 <= i <= u.d:
        raise ValueError(f"position {i} out of range 1..{u.d}")
    return _pi(u, i - 1)


def _orbit_reps(g: Perm) -> list[int]:
    seen: set[int] = set()
    reps = []
    for i in range(len(g)):
        if i not in seen:
            reps.append(i)
            seen.update(orbit(g, i))
    return reps


class _Solver:
    def __init__(self, amb: Ambient):
        self.amb = amb
        self.memo: dict[tuple, Portrait | None] = {}

    def candidates(self, d: int) -> list[Perm]:
        return label_group(d, self.amb is Ambient.CYCLIC)

    def conj(self, u: Portrait, v: Portrait) -> Portrait | None:
        """Some w with w^-1 u w = v, or None."""
        if u.level == 0:
            return u
        key = (u.perm, v.perm)
        if key in self.memo:
            return self.memo[key]
        d = u.d
        g, g2 = u.root, v.root
        h, h2 = u.children, v.children
        found = None
        for a in self.candidates(d):
            if perm_mul(perm_inverse(a), perm_mul(g, a)) != g2:
                continue
            b: list[Portrait | None] = [None] * d
            ok = True
            for i in _orbit_reps(g2):
                w = self.conj(_pi(u, a[i]), _pi(v, i))
                if w is None:
                    ok = False
                    break
                b[i] = w
                j = i
                for _ in range(len(orbit(g2, i)) - 1):
                    nj = g2[j]
                    b[nj] = compose(h[a[j]], b[j], inverse(h2[j]))
                    j = nj
            if ok:
                found = Portrait.from_parts(a, b)  # type: ignore[arg-type]
                break
        self.memo[key] = found
        return found


def conjugator(u: Portrait, v: Portrait, amb: Ambient | str = Ambient.FULL) -> Portrait | None:
    """A validated w with w^-1 u w = v, or None if u and v are not conjugate."""
    amb = _ambient(amb)
    _check(u, v, amb)
    w = _Solver(amb).conj(u, v)
    if w is not None and compose(inverse(w), u, w) != v:
        raise AssertionError("conjugator failed validation")
    return w


def are_conjugate(u: Portrait, v: Portrait, amb: Ambient | str = Ambient.FULL) -> bool:
    return conjugator(u, v, amb) is not None


def sigma_normal_form(u: Portrait) -> tuple[Portrait, Portrait]:
    """(n, w) with n = sigma(1, ..., 1, h_d ... h_1) and w^-1 u w = n."""
    d = u.d
    if u.level < 1 or u.root != sigma_power(d, 1):
        raise ValueError("root label must be the d-cycle sigma")
    h = u.children
    pi = compose(*reversed(h))
    one = Portrait.identity(d, u.level - 1)
    h2 = [one] * (d - 1) + [pi]
    b = [one] * d
    for j in range(d - 1):
        b[j + 1] = compose(h[j], b[j], inverse(h2[j]))
    w = Portrait.from_parts(perm_identity(d), b)
    n = Portrait.from_parts(sigma_power(d, 1), h2)
    if compose(inverse(w), u, w) != n:
        raise AssertionError("normal-form witness failed validation")
    return n, w


def is_odometer(u: Portrait, amb: Ambient | str = Ambient.CYCLIC) -> bool:
    """Cyclic ambient: chi_k(u) = 1 for every k <= level.
    Full ambient: u is conjugate in [S_d]^l to the standard odometer."""
    amb = _ambient(amb)
    if amb is Ambient.CYCLIC:
        if not u.is_cyclic:
            raise NotCyclicError("cyclic ambient needs a cyclic portrait")
        return all(chi(u, k) == 1 for k in range(1, u.level + 1))
    return are_conjugate(u, odometer(u.d, u.level), Ambient.FULL)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

DEFAULT_CAP = 2 ** 20


class EnumerationCapExceeded(RuntimeError):
    pass


def ambient_size(shape: TreeShape, amb: Ambient | str) -> int:
    amb = _ambient(amb)
    base = shape.d if amb is Ambient.CYCLIC else len(label_group(shape.d, False))
    return base ** bracket(shape.level, shape.d)


def ambient_perms(shape: TreeShape, amb: Ambient | str, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """Leaf permutations of every ambient element, lexicographic in the labels."""
    amb = _ambient(amb)
    size = ambient_size(shape, amb)
    if size > cap:
        raise EnumerationCapExceeded(f"{size} elements exceeds cap {cap}")
    labs = label_group(shape.d, amb is Ambient.CYCLIC)
    for combo in itertools.product(labs, repeat=shape.nodes):
        yield Portrait.from_labels(shape.d, shape.level, combo).perm


def brute_force_conjugator(u: Portrait, v: Portrait, amb: Ambient | str = Ambient.FULL,
                           cap: int = DEFAULT_CAP) -> Portrait | None:
    amb = _ambient(amb)
    _check(u, v, amb)
    up, vp = u.perm, v.perm
    rng = range(len(up))
    for wp in ambient_perms(u.shape, amb, cap):
        # w^-1 u w = v  <=>  u w = w v
        if all(up[wp[x]] == wp[vp[x]] for x in rng):
            return Portrait(u.d, u.level, wp, check=False)
    return None


def brute_force_classes(shape: TreeShape, amb: Ambient | str,
                        cap: int = DEFAULT_CAP) -> dict[tuple[int, ...], int]:
    """Conjugacy class index of every ambient element, by exhaustive orbits."""
    elems = list(ambient_perms(shape, amb, cap))
    inv = {p: tuple(sorted(range(len(p)), key=p.__getitem__)) for p in elems}
    cls: dict[tuple[int, ...], int] = {}
    k = 0
    for u in elems:
        if u in cls:
            continue
        for w in elems:
            wi = inv[w]
            c = tuple(wi[u[w[x]]] for x in range(len(u)))
            cls[c] = k
        k += 1
    return cls


def brute_force_centralizer(u: Portrait, amb: Ambient | str = Ambient.FULL,
                            cap: int = DEFAULT_CAP) -> list[Portrait]:
    up = u.perm
    rng = range(len(up))
    return [Portrait(u.d, u.level, wp, check=False)
            for wp in ambient_perms(u.shape, amb, cap)
            if all(up[wp[x]] == wp[up[x]] for x in rng)]
