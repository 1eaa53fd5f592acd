"""Finite-level automorphisms of the rooted d-ary tree.

A level-``l`` automorphism is stored as its permutation of the ``d**l``
leaves, enumerated lexicographically with digit 1 first.  That encoding is
dense and bijective with the labelled portrait; node labels are derived from
it on demand and cached.

Product convention: ``(uv)(w) = u(v(w))``, the right factor acts first.
With ``u = g(h_1, ..., h_d)`` acting by ``u(i w') = g(i) h_i(w')`` this gives

    g(h_1, ..., h_d) * g'(h'_1, ..., h'_d) = gg'(h_{g'(1)} h'_1, ..., h_{g'(d)} h'_d).

Internally digits and label images are 0-based; every text form (literals,
leaf words) is 1-based.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

Perm = tuple[int, ...]


# ---------------------------------------------------------------------------
# labels: permutations of {0, ..., d-1}
# ---------------------------------------------------------------------------

def perm_identity(d: int) -> Perm:
    return tuple(range(d))


def sigma_power(d: int, k: int) -> Perm:
    """The label sigma^k where sigma = (1 2 ... d)."""
    k %= d
    return tuple((i + k) % d for i in range(d))


def perm_mul(p: Perm, q: Perm) -> Perm:
    """p after q."""
    return tuple(p[x] for x in q)


def perm_inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def cyclic_exponent(p: Perm) -> int | None:
    """Return k if p = sigma^k, otherwise None."""
    d = len(p)
    k = p[0]
    for i in range(d):
        if p[i] != (i + k) % d:
            return None
    return k


def perm_from_images(images: Sequence[int]) -> Perm:
    """Build a label from 1-based images, e.g. [1, 3, 2]."""
    p = tuple(x - 1 for x in images)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of 1..{len(p)}: {list(images)}")
    return p


# ---------------------------------------------------------------------------
# shapes and portraits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeShape:
    d: int
    level: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("arity d must be at least 2")
        if self.level < 0:
            raise ValueError("level must be non-negative")

    @property
    def leaves(self) -> int:
        return self.d ** self.level

    @property
    def nodes(self) -> int:
        """Number of internal nodes, [l]_d."""
        return bracket(self.level, self.d)


def bracket(l: int, d: int) -> int:
    """[l]_d = 1 + d + ... + d^(l-1)."""
    return (d ** l - 1) // (d - 1)


class ShapeError(ValueError):
    pass


class NotCyclicError(ValueError):
    pass


class Portrait:
    """Immutable level-``level`` automorphism of the d-ary tree."""

    __slots__ = ("d", "level", "perm", "_labels", "_hash")

    def __init__(self, d: int, level: int, perm: Sequence[int], *, check: bool = True):
        self.d = d
        self.level = level
        self.perm: Perm = tuple(perm)
        self._labels: tuple[Perm, ...] | None = None
        self._hash: int | None = None
        if check:
            if len(self.perm) != d ** level:
                raise ShapeError(f"expected {d ** level} leaf images, got {len(self.perm)}")
            if not _is_tree_permutation(d, level, self.perm):
                raise ValueError("leaf permutation does not preserve the tree structure")

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, d: int, level: int) -> "Portrait":
        return cls(d, level, range(d ** level), check=False)

    @classmethod
    def from_parts(cls, root: Perm, children: Sequence["Portrait"]) -> "Portrait":
        """Assemble g(h_1, ..., h_d) from a root label and d children."""
        d = len(root)
        if len(children) != d:
            raise ShapeError(f"need {d} children, got {len(children)}")
        sub = children[0].level
        for c in children:
            if c.d != d or c.level != sub:
                raise ShapeError("children must share one shape")
        size = d ** sub
        perm = [0] * (d * size)
        for i, c in enumerate(children):
            base = root[i] * size
            off = i * size
            cp = c.perm
            for w in range(size):
                perm[off + w] = base + cp[w]
        return cls(d, sub + 1, perm, check=False)

    @classmethod
    def from_root(cls, root: Perm, level: int) -> "Portrait":
        d = len(root)
        if level == 0:
            return cls.identity(d, 0)
        e = cls.identity(d, level - 1)
        return cls.from_parts(root, [e] * d)

    @classmethod
    def from_labels(cls, d: int, level: int, labels: Sequence[Perm]) -> "Portrait":
        """Build from node labels listed breadth-first (root first)."""
        if len(labels) != bracket(level, d):
            raise ShapeError("wrong number of labels")
        img = [0]
        pos = 0
        for _ in range(level):
            nxt = []
            for j, a in enumerate(img):
                lab = labels[pos + j]
                for c in range(d):
                    nxt.append(a * d + lab[c])
            pos += len(img)
            img = nxt
        return cls(d, level, img, check=False)

    # -- structure ----------------------------------------------------------

    @property
    def shape(self) -> TreeShape:
        return TreeShape(self.d, self.level)

    @property
    def root(self) -> Perm:
        if self.level == 0:
            return perm_identity(self.d)
        size = self.d ** (self.level - 1)
        return tuple(self.perm[i * size] // size for i in range(self.d))

    def child(self, i: int) -> "Portrait":
        """Section at the 0-based child i, one level shallower."""
        size = self.d ** (self.level - 1)
        off = i * size
        base = (self.perm[off] // size) * size
        return Portrait(self.d, self.level - 1,
                        [x - base for x in self.perm[off:off + size]], check=False)

    @property
    def children(self) -> tuple["Portrait", ...]:
        return tuple(self.child(i) for i in range(self.d))

    @property
    def labels(self) -> tuple[Perm, ...]:
        """All node labels, breadth-first."""
        if self._labels is None:
            self._labels = _labels_of(self.d, self.level, self.perm)
        return self._labels

    def labels_at_depth(self, k: int) -> tuple[Perm, ...]:
        start = bracket(k, self.d)
        return self.labels[start:start + self.d ** k]

    @property
    def is_cyclic(self) -> bool:
        return all(cyclic_exponent(p) is not None for p in self.labels)

    def exponents_at_depth(self, k: int) -> list[int]:
        out = []
        for p in self.labels_at_depth(k):
            e = cyclic_exponent(p)
            if e is None:
                raise NotCyclicError("portrait has a label outside C_d")
            out.append(e)
        return out

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.perm))

    # -- dunder -------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Portrait):
            return NotImplemented
        return self.d == other.d and self.level == other.level and self.perm == other.perm

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.d, self.level, self.perm))
        return self._hash

    def __mul__(self, other: "Portrait") -> "Portrait":
        return compose(self, other)

    def __pow__(self, k: int) -> "Portrait":
        return power(self, k)

    def __repr__(self) -> str:
        return f"Portrait(d={self.d}, level={self.level}, {format_portrait(self)!r})"

    def __str__(self) -> str:
        return format_portrait(self)


def _labels_of(d: int, level: int, perm: Perm) -> tuple[Perm, ...]:
    out: list[Perm] = []
    for k in range(level):
        size = d ** (level - k - 1)
        for j in range(d ** k):
            parent = perm[j * d * size] // (d * size)
            out.append(tuple(perm[(j * d + c) * size] // size - parent * d for c in range(d)))
    return tuple(out)


def _is_tree_permutation(d: int, level: int, perm: Perm) -> bool:
    n = d ** level
    if sorted(perm) != list(range(n)):
        return False
    for k in range(1, level):
        size = d ** (level - k)
        for x in range(n):
            if perm[x] // size != perm[(x // size) * size] // size:
                return False
    return True


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------

def identity(shape: TreeShape) -> Portrait:
    return Portrait.identity(shape.d, shape.level)


def _same_shape(u: Portrait, v: Portrait) -> None:
    if u.d != v.d or u.level != v.level:
        raise ShapeError(f"shape mismatch: (d={u.d}, l={u.level}) vs (d={v.d}, l={v.level})")


def compose(*us: Portrait) -> Portrait:
    """Product u_1 u_2 ... u_k; the rightmost factor acts first."""
    if not us:
        raise ValueError("compose needs at least one factor")
    acc = us[-1]
    for u in reversed(us[:-1]):
        _same_shape(u, acc)
        up = u.perm
        acc = Portrait(u.d, u.level, [up[x] for x in acc.perm], check=False)
    return acc


def inverse(u: Portrait) -> Portrait:
    return Portrait(u.d, u.level, perm_inverse(u.perm), check=False)


def conjugate(u: Portrait, w: Portrait) -> Portrait:
    """w^-1 u w."""
    return compose(inverse(w), u, w)


def commutator(a: Portrait, b: Portrait) -> Portrait:
    """[a, b] = a^-1 b^-1 a b."""
    return compose(inverse(a), inverse(b), a, b)


def order(u: Portrait) -> int:
    """Order of u as a permutation of the leaves."""
    seen = bytearray(len(u.perm))
    result = 1
    for start in range(len(u.perm)):
        if seen[start]:
            continue
        n = 0
        x = start
        while not seen[x]:
            seen[x] = 1
            x = u.perm[x]
            n += 1
        result = math.lcm(result, n)
    return result


def power(u: Portrait, k: int) -> Portrait:
    """u^k for any integer k; only k mod ord(u) matters."""
    k %= order(u)
    result = Portrait.identity(u.d, u.level)
    base = u
    while k:
        if k & 1:
            result = compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def truncate(u: Portrait, k: int) -> Portrait:
    """Restriction to the top k levels."""
    if not 0 <= k <= u.level:
        raise ValueError(f"cannot truncate level {u.level} to {k}")
    size = u.d ** (u.level - k)
    return Portrait(u.d, k, [u.perm[x * size] // size for x in range(u.d ** k)], check=False)


def extend(u: Portrait, level: int) -> Portrait:
    """Pad u with identity labels down to a deeper level."""
    if level < u.level:
        raise ValueError("extend only deepens")
    size = u.d ** (level - u.level)
    return Portrait(u.d, level,
                    [u.perm[x // size] * size + x % size for x in range(u.d ** level)],
                    check=False)


def leaf_permutation(u: Portrait) -> Perm:
    """Leaf permutation, 0-based, leaves in lexicographic order."""
    return u.perm


def leaf_index(word: Sequence[int], d: int) -> int:
    x = 0
    for c in word:
        x = x * d + (c - 1)
    return x


def leaf_word(index: int, d: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        index, r = divmod(index, d)
        out.append(r + 1)
    return tuple(reversed(out))


def parse_leaf_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "," in text or " " in text:
        parts = [p for p in re.split(r"[,\s]+", text) if p]
        return tuple(int(p) for p in parts)
    return tuple(int(c) for c in text)


def act(u: Portrait, word: Sequence[int] | str) -> tuple[int, ...]:
    """Image of a leaf word (1-based digits) of length at most the level."""
    if isinstance(word, str):
        word = parse_leaf_word(word)
    k = len(word)
    if k > u.level:
        raise ValueError(f"word of length {k} is longer than level {u.level}")
    for c in word:
        if not 1 <= c <= u.d:
            raise ValueError(f"digit {c} out of range 1..{u.d}")
    pad = u.level - k
    x = leaf_index(word, u.d) * u.d ** pad
    y = u.perm[x] // u.d ** pad
    return leaf_word(y, u.d, k)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

def chi(u: Portrait, k: int) -> int:
    """Level-k character: sum of sigma-exponents at depth k-1, mod d."""
    if not 1 <= k <= u.level:
        raise ValueError(f"chi_{k} undefined at level {u.level}")
    return sum(u.exponents_at_depth(k - 1)) % u.d


def chi_vector(u: Portrait, upto: int | None = None) -> tuple[int, ...]:
    upto = u.level if upto is None else upto
    return tuple(chi(u, k) for k in range(1, upto + 1))


def chi_prime(u: Portrait, n: int) -> int:
    """sum_i i * chi_{n-1}(g_i) over the children g_1..g_d, mod d."""
    if n < 2 or u.level < n:
        raise ValueError(f"chi' needs 2 <= n <= level, got n={n}, level={u.level}")
    exps = u.exponents_at_depth(n - 1)
    block = u.d ** (n - 2)
    total = 0
    for i in range(u.d):
        total += (i + 1) * sum(exps[i * block:(i + 1) * block])
    return total % u.d


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def format_label(p: Perm) -> str:
    k = cyclic_exponent(p)
    if k is None:
        return "[" + ",".join(str(x + 1) for x in p) + "]"
    return "s" if k == 1 else f"s^{k}"


def format_portrait(u: Portrait) -> str:
    """Shortest literal: identity subtrees collapse to "1"."""
    def rec(v: Portrait) -> str:
        if v.is_identity():
            return "1"
        lab = v.root
        kids = v.children if v.level > 1 else ()
        if all(c.is_identity() for c in kids):
            return format_label(lab)
        head = "1" if lab == perm_identity(v.d) else format_label(lab)
        return head + "(" + ",".join(rec(c) for c in kids) + ")"
    return rec(u)


class LiteralError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1}: {text!r}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(s\^-?\d+)|(s)|(\[[\d,\s]*\])|(1)|(\()|(\))|(,))")


class _LiteralParser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.pos = 0

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        return m.group(0).strip() if m else None

    def take(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise LiteralError("unexpected input", self.text, self.pos)
        self.pos = m.end()
        return m.group(0).strip()

    def label(self, tok: str) -> Perm:
        if tok == "1":
            return perm_identity(self.d)
        if tok == "s":
            return sigma_power(self.d, 1)
        if tok.startswith("s^"):
            return sigma_power(self.d, int(tok[2:]))
        images = [int(x) for x in tok[1:-1].split(",") if x.strip()]
        if len(images) != self.d:
            raise LiteralError(f"label needs {self.d} images", self.text, self.pos)
        try:
            return perm_from_images(images)
        except ValueError as e:
            raise LiteralError(str(e), self.text, self.pos) from None

    def node(self) -> tuple:
        start = self.pos
        tok = self.take()
        if tok in ("(", ")", ","):
            raise LiteralError("expected a label", self.text, start)
        lab = self.label(tok)
        kids: list = []
        if self.peek() == "(":
            self.take()
            kids.append(self.node())
            while self.peek() == ",":
                self.take()
                kids.append(self.node())
            if self.take() != ")":
                raise LiteralError("expected ')'", self.text, self.pos)
            if len(kids) != self.d:
                raise LiteralError(f"expected {self.d} children, got {len(kids)}", self.text, start)
        return (lab, kids)


def _depth(tree: tuple) -> int:
    lab, kids = tree
    return 1 + max((_depth(k) for k in kids), default=0)


def literal_depth(text: str, d: int) -> int:
    p = _LiteralParser(text, d)
    tree = p.node()
    return _depth(tree)


def parse_portrait(text: str, d: int, level: int | None = None) -> Portrait:
    """Parse an element literal such as "s(1,s(1,s))".

    Grammar: P ::= "1" | PERM | PERM "(" P {"," P} ")" with exactly d
    children, PERM ::= "s" | "s^" INT | "[" i1,...,id "]".  A node "1(...)"
    is accepted as an identity label with children.  Subtrees the literal
    leaves out are identity.  Without ``level`` the literal's depth is used.
    """
    p = _LiteralParser(text, d)
    tree = p.node()
    if p.pos != len(text) and text[p.pos:].strip():
        raise LiteralError("trailing input", text, p.pos)
    depth = _depth(tree)
    if level is None:
        level = depth
    if depth > level:
        raise LiteralError(f"literal has depth {depth} > level {level}", text, 0)

    def build(node: tuple | None, lv: int) -> Portrait:
        if lv == 0:
            return Portrait.identity(d, 0)
        if node is None:
            return Portrait.identity(d, lv)
        lab, kids = node
        subs = [build(kids[i] if kids else None, lv - 1) for i in range(d)]
        return Portrait.from_parts(lab, subs)

    return build(tree, level)


# ---------------------------------------------------------------------------
# sampling and enumeration
# ---------------------------------------------------------------------------

def random_portrait(shape: TreeShape, rng: random.Random, cyclic: bool = True) -> Portrait:
    d = shape.d
    labels = []
    for _ in range(shape.nodes):
        if cyclic:
            labels.append(sigma_power(d, rng.randrange(d)))
        else:
            p = list(range(d))
            rng.shuffle(p)
            labels.append(tuple(p))
    return Portrait.from_labels(d, shape.level, labels)


def label_group(d: int, cyclic: bool) -> list[Perm]:
    if cyclic:
        return [sigma_power(d, k) for k in range(d)]
    return [tuple(p) for p in itertools.permutations(range(d))]


def enumerate_portraits(shape: TreeShape, cyclic: bool) -> Iterable[Portrait]:
    """Every element of [C_d]^l or [S_d]^l, in lexicographic label order."""
    labs = label_group(shape.d, cyclic)
    for combo in itertools.product(labs, repeat=shape.nodes):
        yield Portrait.from_labels(shape.d, shape.level, combo)


def odometer(d: int, level: int) -> Portrait:
    """c = sigma(1, ..., 1, c): adds one to the word read least-significant first."""
    u = Portrait.identity(d, 0)
    e = Portrait.identity
    s = sigma_power(d, 1)
    for lv in range(1, level + 1):
        u = Portrait.from_parts(s, [e(d, lv - 1)] * (d - 1) + [u])
    return u
