"""Stabilizer chains for permutation groups on the leaves of a d-ary tree.

Two deterministic engines sit behind one ``PermutationGroup`` interface.

``TreeChain`` handles groups of cyclic tree automorphisms (labels in C_d).
Its base is the list of internal vertices in breadth-first order: chain
position p holds the elements whose labels vanish at every vertex before p.
Those subgroups form a subnormal series with cyclic factors Z/d, the label at
vertex p being additive on each term.  Every basic orbit is a set of
siblings, so the transversal at p is the powers of one strong generator whose
label there is the gcd of all reachable labels.  The chain is closed under
powers and commutators, which makes the set of normal forms
x_1^t_1 ... x_r^t_r a group; its order is the product of the relative orders.

``SchreierSimsChain`` is the textbook algorithm with base points in leaf
order and explicit transversals.  It accepts arbitrary permutations and
serves as an independent check of ``TreeChain`` at small degree.

Both engines can carry words over named generators.  Words are straight-line
programs (shared ``GroupWord`` nodes) and may be very long when expanded.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .recursion import GroupWord
from .tree_core import Portrait, bracket

Perm = tuple[int, ...]


def _as_array(p) -> np.ndarray:
    if isinstance(p, Portrait):
        p = p.perm
    return np.asarray(p, dtype=np.int64)


def _inv(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = np.arange(a.size, dtype=a.dtype)
    return out


def _pow(a: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        a, k = _inv(a), -k
    acc = np.arange(a.size, dtype=a.dtype)
    while k:
        if k & 1:
            acc = acc[a]
        k >>= 1
        if k:
            a = a[a]
    return acc


def _is_identity(a: np.ndarray) -> bool:
    return bool(np.all(a == np.arange(a.size)))


@dataclass(frozen=True)
class GroupOrder:
    value: int
    d: int | None = None

    @property
    def log_d(self) -> int | None:
        """Exact log base d when the order is a power of d."""
        if self.d is None:
            return None
        v, k = self.value, 0
        while v % self.d == 0:
            v //= self.d
            k += 1
        return k if v == 1 else None

    def __int__(self) -> int:
        return self.value


# ---------------------------------------------------------------------------
# tree chain
# ---------------------------------------------------------------------------

class _Entry:
    __slots__ = ("elem", "inv", "lead", "rel", "inv_pows", "word", "stamp")

    def __init__(self, elem: np.ndarray, lead: int, d: int, word: GroupWord | None):
        self.elem = elem
        self.inv = _inv(elem)
        self.lead = lead
        self.rel = d // lead
        pows = [np.arange(elem.size, dtype=elem.dtype)]
        for _ in range(1, self.rel):
            pows.append(pows[-1][self.inv])
        self.inv_pows = pows
        self.word = word
        self.stamp = 0


def _is_cyclic_tree_perm(a: np.ndarray, d: int, level: int) -> bool:
    n = d ** level
    if a.size != n or not np.array_equal(np.sort(a), np.arange(n)):
        return False
    for k in range(level):
        size = d ** (level - k - 1)
        blocks = a.reshape(d ** (k + 1), size)
        img = blocks // size
        if not np.all(img == img[:, :1]):
            return False
        node_img = img[:, 0].reshape(d ** k, d)
        shift = (node_img - node_img[:, :1]) % d
        if not np.all(shift == np.arange(d)):
            return False
        if not np.all(node_img // d == node_img[:, :1] // d):
            return False
    return True


class TreeChain:
    """Induced polycyclic chain of a subgroup of [C_d]^level."""

    def __init__(self, d: int, level: int, track_words: bool = True):
        self.d = d
        self.level = level
        self.n = d ** level
        self.track = track_words
        self.entries: dict[int, _Entry] = {}
        self._offsets = [bracket(k, d) for k in range(level + 1)]
        # label at BFS position p is (a[_idx[p]] // _div[p]) % d
        idx, div = [], []
        for k in range(level):
            stride = d ** (level - k)
            idx.extend(range(0, self.n, stride))
            div.extend([stride // d] * d ** k)
        self._idx = np.asarray(idx, dtype=np.int64)
        self._div = np.asarray(div, dtype=np.int64)
        self._clock = 0
        self._replaced_at = -1

    # leading vertex of an element, scanning BFS positions from p0
    def _leading(self, a: np.ndarray, p0: int = 0) -> tuple[int, int] | None:
        labs = (a[self._idx[p0:]] // self._div[p0:]) % self.d
        j = int(np.argmax(labs != 0))
        if labs[j] == 0:
            return None
        return p0 + j, int(labs[j])

    def sift(self, a: np.ndarray, word: GroupWord | None = None):
        """Reduce a through the chain.

        Returns (residue, residue_word, position, label, factors) where
        position is None when the residue is the identity and factors lists
        (entry, t) with a = residue * x_r^t_r ... x_1^t_1 read right to left.
        """
        factors: list[tuple[_Entry, int]] = []
        pos = 0
        while True:
            lead = self._leading(a, pos)
            if lead is None:
                return a, None, None, 0, factors
            pos, c = lead
            ent = self.entries.get(pos)
            if ent is None or c % ent.lead:
                rw = None
                if self.track and word is not None:
                    rw = GroupWord([(word, 1)] + [(e.word, -t) for e, t in factors])
                return a, rw, pos, c, factors
            t = c // ent.lead
            a = a[ent.inv_pows[t]]
            factors.append((ent, t))

    def _unit_for(self, c: int) -> tuple[int, int]:
        """(u, g) with u a unit mod d and c*u = g = gcd(c, d) mod d."""
        d = self.d
        g = math.gcd(c, d)
        for u in range(1, d):
            if math.gcd(u, d) == 1 and (c * u) % d == g:
                return u, g
        raise AssertionError("no normalizing unit")

    def _word(self, parts: Sequence[tuple[GroupWord | None, int]]) -> GroupWord | None:
        if not self.track or any(w is None for w, _ in parts):
            return None
        return GroupWord([(w, e) for w, e in parts])

    def _install(self, pos: int, elem: np.ndarray, lead: int, word: GroupWord | None,
                 queue: list) -> None:
        ent = _Entry(elem, lead, self.d, word)
        self._clock += 1
        ent.stamp = self._clock
        self.entries[pos] = ent
        queue.append((_pow(elem, ent.rel), self._word([(word, ent.rel)])))
        for other in list(self.entries.values()):
            if other is ent:
                continue
            comm = ent.inv[other.inv[elem[other.elem]]]
            queue.append((comm, self._word([(word, -1), (other.word, -1),
                                            (word, 1), (other.word, 1)])))

    def _process(self, queue: list) -> bool:
        changed = False
        d = self.d
        while queue:
            a, w = queue.pop()
            res, rw, pos, c, _ = self.sift(a, w)
            if pos is None:
                continue
            changed = True
            old = self.entries.get(pos)
            if old is None:
                u, g = self._unit_for(c)
                self._install(pos, _pow(res, u), g, self._word([(rw, u)]), queue)
                continue
            # combine: s*old.lead + t*c = gcd(old.lead, c) mod d
            g = math.gcd(old.lead, c)
            s_t = next((s, t) for s in range(d) for t in range(d)
                       if (s * old.lead + t * c) % d == g)
            s, t = s_t
            y = _pow(old.elem, s)[_pow(res, t)]
            del self.entries[pos]
            self._replaced_at = self._clock
            self._install(pos, y, g, self._word([(old.word, s), (rw, t)]), queue)
            queue.append((old.elem, old.word))
            queue.append((res, rw))
        return changed

    def extend(self, gens: Iterable[tuple[np.ndarray, GroupWord | None]]) -> None:
        queue = [(a, w) for a, w in gens]
        self._process(queue)
        # A replacement can invalidate closure checks made before it.  Checks
        # queued at an install later than the last replacement are sound.
        while self._replaced_at >= 0:
            cutoff, self._replaced_at = self._replaced_at, -1
            ents = [e for e in self.entries.values() if e.stamp <= cutoff]
            queue = []
            for i, x in enumerate(ents):
                queue.append((_pow(x.elem, x.rel), self._word([(x.word, x.rel)])))
                for y in ents[i + 1:]:
                    comm = x.inv[y.inv[x.elem[y.elem]]]
                    queue.append((comm, self._word([(x.word, -1), (y.word, -1),
                                                    (x.word, 1), (y.word, 1)])))
            self._process(queue)

    def order(self) -> int:
        out = 1
        for e in self.entries.values():
            out *= e.rel
        return out

    def contains(self, a: np.ndarray) -> bool:
        return self.sift(a)[2] is None

    def word_for(self, a: np.ndarray) -> GroupWord | None:
        res, _, pos, _, factors = self.sift(a)
        if pos is not None:
            return None
        if any(e.word is None for e, _ in factors):
            raise ValueError("chain built without words")
        return GroupWord([(e.word, t) for e, t in reversed(factors)])

    def strong_generators(self) -> list[np.ndarray]:
        return [self.entries[p].elem for p in sorted(self.entries)]

    def base(self) -> list[int]:
        return sorted(self.entries)


# ---------------------------------------------------------------------------
# generic Schreier-Sims
# ---------------------------------------------------------------------------

class SchreierSimsChain:
    """Deterministic Schreier-Sims; base points taken in increasing order."""

    def __init__(self, degree: int, track_words: bool = True):
        self.n = degree
        self.track = track_words
        self.base: list[int] = []
        self.strong: list[list[tuple[np.ndarray, GroupWord | None]]] = []
        self.trans: list[dict[int, tuple[np.ndarray, GroupWord | None]]] = []

    def _orbit(self, i: int) -> None:
        b = self.base[i]
        ident = np.arange(self.n)
        tr = {b: (ident, GroupWord() if self.track else None)}
        todo = [b]
        while todo:
            x = todo.pop()
            px, wx = tr[x]
            for s, ws in self.strong[i]:
                y = int(s[x])
                if y not in tr:
                    w = GroupWord([(ws, 1), (wx, 1)]) if self.track and ws is not None and wx is not None else None
                    tr[y] = (s[px], w)
                    todo.append(y)
        self.trans[i] = tr

    def _strip(self, a: np.ndarray, w: GroupWord | None, start: int = 0):
        factors = []
        for i in range(start, len(self.base)):
            b = self.base[i]
            y = int(a[b])
            if y not in self.trans[i]:
                return a, w, i, factors
            u, uw = self.trans[i][y]
            a = _inv(u)[a]
            if w is not None and uw is not None:
                w = GroupWord([(uw, -1), (w, 1)])
            factors.append(uw)
        return a, w, len(self.base), factors

    def _add_base_point(self, a: np.ndarray) -> None:
        moved = np.flatnonzero(a != np.arange(self.n))
        for p in moved:
            if int(p) not in self.base:
                self.base.append(int(p))
                self.strong.append([])
                self.trans.append({})
                return
        raise AssertionError("residue fixes the base but is not the identity")

    def extend(self, gens: Iterable[tuple[np.ndarray, GroupWord | None]]) -> None:
        for a, w in gens:
            if _is_identity(a):
                continue
            res, rw, j, _ = self._strip(a, w)
            if j == len(self.base) and _is_identity(res):
                continue
            self._insert(res, rw, j)

    def _insert(self, a: np.ndarray, w: GroupWord | None, j: int) -> None:
        if j == len(self.base):
            self._add_base_point(a)
        for i in range(j + 1):
            self.strong[i].append((a, w))
        for i in range(j, -1, -1):
            self._orbit(i)
        self._close(j)

    def _close(self, top: int) -> None:
        i = top
        while i >= 0:
            restart = None
            for x, (ux, uwx) in list(self.trans[i].items()):
                for s, ws in list(self.strong[i]):
                    y = int(s[ux[self.base[i]]])
                    uy, uwy = self.trans[i][y]
                    sg = _inv(uy)[s[ux]]
                    sw = None
                    if self.track and None not in (ws, uwx, uwy):
                        sw = GroupWord([(uwy, -1), (ws, 1), (uwx, 1)])
                    res, rw, j, _ = self._strip(sg, sw, i + 1)
                    if j == len(self.base) and _is_identity(res):
                        continue
                    if j == len(self.base):
                        self._add_base_point(res)
                    for k in range(i + 1, j + 1):
                        self.strong[k].append((res, rw))
                    for k in range(j, i, -1):
                        self._orbit(k)
                    restart = j
                    break
                if restart is not None:
                    break
            if restart is not None:
                i = restart
                continue
            i -= 1

    def order(self) -> int:
        out = 1
        for tr in self.trans:
            out *= len(tr)
        return out

    def contains(self, a: np.ndarray) -> bool:
        res, _, j, _ = self._strip(a, None)
        return j == len(self.base) and _is_identity(res)

    def word_for(self, a: np.ndarray) -> GroupWord | None:
        res, _, j, factors = self._strip(a, None)
        if not (j == len(self.base) and _is_identity(res)):
            return None
        if any(f is None for f in factors):
            raise ValueError("chain built without words")
        # a = u_1 u_2 ... u_k
        return GroupWord([(f, 1) for f in factors])


# ---------------------------------------------------------------------------
# public interface
# ---------------------------------------------------------------------------

class GroupError(ValueError):
    pass


class PermutationGroup:
    """A permutation group on ``degree`` points with a stabilizer chain."""

    def __init__(self, degree: int, generators: Sequence, names: Sequence[str] | None = None,
                 tree: tuple[int, int] | None = None, method: str = "auto",
                 track_words: bool = True):
        self.degree = degree
        self.tree = tree
        arrays = [_as_array(g) for g in generators]
        for a in arrays:
            if a.size != degree or not np.array_equal(np.sort(a), np.arange(degree)):
                raise GroupError("generator is not a permutation of the given degree")
        if names is not None and len(names) != len(arrays):
            raise GroupError("one name per generator")
        self.names = list(names) if names is not None else None
        self.generators = arrays
        words = ([GroupWord.gen(x) for x in self.names] if self.names is not None
                 else [None] * len(arrays))
        if method == "auto":
            method = "tree" if tree is not None and all(
                _is_cyclic_tree_perm(a, *tree) for a in arrays) else "schreier-sims"
        self.method = method
        track = track_words and self.names is not None
        if method == "tree":
            if tree is None:
                raise GroupError("tree engine needs (d, level)")
            for a in arrays:
                if not _is_cyclic_tree_perm(a, *tree):
                    raise GroupError("tree engine needs cyclic tree automorphisms")
            self.chain: TreeChain | SchreierSimsChain = TreeChain(tree[0], tree[1], track)
        elif method == "schreier-sims":
            self.chain = SchreierSimsChain(degree, track)
        else:
            raise GroupError(f"unknown method {method!r}")
        self.chain.extend(zip(arrays, words))
        self._gen_words = words

    # -- queries ---------------------------------------------------------
    def order(self) -> GroupOrder:
        return GroupOrder(self.chain.order(), self.tree[0] if self.tree else None)

    def contains(self, perm) -> bool:
        a = _as_array(perm)
        if a.size != self.degree:
            raise GroupError("degree mismatch")
        if self.method == "tree" and not _is_cyclic_tree_perm(a, *self.tree):
            return False
        return self.chain.contains(a)

    def contains_with_word(self, perm) -> GroupWord | None:
        if self.names is None:
            raise GroupError("word recovery needs named generators")
        a = _as_array(perm)
        if self.method == "tree" and not _is_cyclic_tree_perm(a, *self.tree):
            return None
        return self.chain.word_for(a)

    def eval_word(self, word: GroupWord) -> np.ndarray:
        env = dict(zip(self.names or [], self.generators))
        ident = np.arange(self.degree)

        def leaf(b):
            if isinstance(b, str):
                return env[b]
            return _as_array(b)
        return word.fold(leaf, lambda x, y: x[y], _inv, ident, _pow)

    def generator_words(self) -> list[GroupWord | None]:
        return list(self._gen_words)

    def __repr__(self) -> str:
        return f"PermutationGroup(degree={self.degree}, order={self.chain.order()}, method={self.method!r})"


def group_from_generators(perms: Sequence, degree: int, names: Sequence[str] | None = None,
                          tree: tuple[int, int] | None = None,
                          method: str = "auto") -> PermutationGroup:
    """Build a stabilizer chain.  Give ``tree=(d, level)`` to enable the
    tree engine for groups of cyclic tree automorphisms."""
    return PermutationGroup(degree, perms, names, tree, method)


def group_from_portraits(gens: Mapping[str, Portrait] | Sequence[Portrait],
                         method: str = "auto") -> PermutationGroup:
    if isinstance(gens, Mapping):
        names = list(gens)
        us = [gens[x] for x in names]
    else:
        names, us = None, list(gens)
    if not us:
        raise GroupError("need at least one generator to fix the shape")
    d, level = us[0].d, us[0].level
    return PermutationGroup(d ** level, [u.perm for u in us], names, (d, level), method)


def trivial_group(d: int, level: int) -> PermutationGroup:
    return PermutationGroup(d ** level, [], [], (d, level), "tree")


def group_order(G: PermutationGroup) -> GroupOrder:
    return G.order()


def contains(G: PermutationGroup, perm) -> bool:
    return G.contains(perm)


def contains_with_word(G: PermutationGroup, perm) -> GroupWord | None:
    return G.contains_with_word(perm)


def index(G: PermutationGroup, H: PermutationGroup) -> GroupOrder:
    """[G : H] after checking that H's generators lie in G."""
    for a in H.generators:
        if not G.contains(a):
            raise GroupError("H is not a subgroup of G")
    q, r = divmod(G.order().value, H.order().value)
    if r:
        raise AssertionError("subgroup order does not divide group order")
    return GroupOrder(q, G.tree[0] if G.tree else None)


def normal_closure(G: PermutationGroup, seeds: Sequence, seed_words: Sequence[GroupWord] | None = None,
                   names: Sequence[str] | None = None) -> PermutationGroup:
    """Smallest normal subgroup of G containing the seeds.

    Seeds may be portraits, permutations, or (when G has named generators)
    GroupWords over those names.  The result's generators are the seeds and
    the conjugates added during closure; if G is named, every generator of
    the result carries a word over G's names, exposed through ``words``.
    """
    arrays, words = [], []
    for i, s in enumerate(seeds):
        if isinstance(s, GroupWord):
            arrays.append(G.eval_word(s))
            words.append(s)
        else:
            arrays.append(_as_array(s))
            words.append(seed_words[i] if seed_words is not None else None)
    for a in arrays:
        if not G.contains(a):
            raise GroupError("seed is not in G")
    gw = G.generator_words()
    track = G.names is not None and all(w is not None for w in words)
    N = _NamedSubgroup(G, track)
    queue = []
    for a, w in zip(arrays, words):
        if not _is_identity(a) and not N.contains(a):
            N.add(a, w)
            queue.append((a, w))
    while queue:
        a, w = queue.pop()
        for g, wg in zip(G.generators, gw):
            b = _inv(g)[a[g]]
            if N.contains(b):
                continue
            wb = GroupWord([(wg, -1), (w, 1), (wg, 1)]) if track else None
            N.add(b, wb)
            queue.append((b, wb))
    return N.freeze(names)


class _NamedSubgroup:
    def __init__(self, G: PermutationGroup, track: bool):
        self.G = G
        self.track = track
        self.arrays: list[np.ndarray] = []
        self.words: list[GroupWord | None] = []
        if G.method == "tree":
            self.chain: TreeChain | SchreierSimsChain = TreeChain(G.tree[0], G.tree[1], False)
        else:
            self.chain = SchreierSimsChain(G.degree, False)

    def contains(self, a: np.ndarray) -> bool:
        return self.chain.contains(a)

    def add(self, a: np.ndarray, w: GroupWord | None) -> None:
        self.arrays.append(a)
        self.words.append(w)
        self.chain.extend([(a, None)])

    def freeze(self, names: Sequence[str] | None) -> PermutationGroup:
        G = self.G
        if names is None:
            names = [f"n{i + 1}" for i in range(len(self.arrays))]
        H = PermutationGroup.__new__(PermutationGroup)
        H.degree = G.degree
        H.tree = G.tree
        H.method = G.method
        H.generators = self.arrays
        H.names = list(names)
        H._gen_words = [GroupWord.gen(x) for x in H.names]
        H.chain = self.chain
        H.words = self.words  # words over G's generator names
        return H


def random_word_element(G: PermutationGroup, length: int,
                        rng: random.Random) -> tuple[np.ndarray, GroupWord]:
    """A uniformly random word of the given length over the generators and
    their inverses, with its value.  Not uniform on the group."""
    if G.names is None:
        raise GroupError("sampling words needs named generators")
    a = np.arange(G.degree)
    factors = []
    for _ in range(length):
        i = rng.randrange(len(G.names))
        e = rng.choice((1, -1))
        g = G.generators[i]
        a = a[g] if e == 1 else a[_inv(g)]
        factors.append((G.names[i], e))
    return a, GroupWord(factors)
