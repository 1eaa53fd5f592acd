"""Wreath recurrences: words, systems, solving, and the named families."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence, Union

from .tree_core import (
    Perm,
    Portrait,
    ShapeError,
    compose,
    inverse,
    perm_from_images,
    perm_identity,
    power,
    sigma_power,
    truncate,
    format_label,
)

Base = Union[str, Portrait, "GroupWord"]


class GroupWord:
    """A product of (base, exponent) factors, evaluated left to right.

    A base is a generator name, a literal Portrait, or another GroupWord.
    Nested words may be shared, so a word is really a straight-line program;
    evaluation memoizes on object identity and never expands the sharing.
    """

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[tuple[Base, int]] = ()):
        self.factors: tuple[tuple[Base, int], ...] = tuple(
            (b, int(e)) for b, e in factors if e != 0)

    @classmethod
    def gen(cls, name: str, exp: int = 1) -> "GroupWord":
        return cls([(name, exp)])

    @classmethod
    def literal(cls, u: Portrait, exp: int = 1) -> "GroupWord":
        return cls([(u, exp)])

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.factors + other.factors)

    def __pow__(self, k: int) -> "GroupWord":
        if k == 1:
            return self
        return GroupWord([(self, k)])

    def inverse(self) -> "GroupWord":
        return GroupWord([(b, -e) for b, e in reversed(self.factors)])

    def is_empty(self) -> bool:
        return not self.factors

    def names(self) -> set[str]:
        out: set[str] = set()
        seen: set[int] = set()

        def walk(w: GroupWord) -> None:
            if id(w) in seen:
                return
            seen.add(id(w))
            for b, _ in w.factors:
                if isinstance(b, str):
                    out.add(b)
                elif isinstance(b, GroupWord):
                    walk(b)
        walk(self)
        return out

    def fold(self, leaf: Callable[[Base], Any], mul: Callable[[Any, Any], Any],
             inv: Callable[[Any], Any], one: Any,
             pw: Callable[[Any, int], Any] | None = None) -> Any:
        """Evaluate in any group given images of names/literals."""
        memo: dict[int, Any] = {}

        def pw_default(x: Any, k: int) -> Any:
            if k < 0:
                x, k = inv(x), -k
            acc = one
            while k:
                if k & 1:
                    acc = mul(acc, x)
                k >>= 1
                if k:
                    x = mul(x, x)
            return acc
        pwf = pw or pw_default

        def ev(w: GroupWord) -> Any:
            key = id(w)
            if key in memo:
                return memo[key]
            acc = one
            for b, e in w.factors:
                x = ev(b) if isinstance(b, GroupWord) else leaf(b)
                acc = mul(acc, x if e == 1 else pwf(x, e))
            memo[key] = acc
            return acc
        return ev(self)

    def exponent_sums(self, names: Sequence[str]) -> tuple[int, ...]:
        idx = {n: i for i, n in enumerate(names)}
        zero = (0,) * len(names)

        def leaf(b: Base) -> tuple[int, ...]:
            if not isinstance(b, str) or b not in idx:
                raise KeyError(f"unknown generator {b!r}")
            v = [0] * len(names)
            v[idx[b]] = 1
            return tuple(v)
        return self.fold(leaf,
                         lambda x, y: tuple(a + b for a, b in zip(x, y)),
                         lambda x: tuple(-a for a in x), zero,
                         lambda x, k: tuple(k * a for a in x))

    def length(self) -> int:
        """Letter count of the fully expanded word (may be astronomically large)."""
        return self.fold(lambda b: 1, lambda x, y: x + y, lambda x: x, 0,
                         lambda x, k: abs(k) * x)

    def expand(self, limit: int = 10_000) -> "GroupWord":
        """Flatten nesting into (name-or-literal, exponent) factors."""
        if self.length() > limit:
            raise ValueError("word too long to expand")
        out: list[tuple[Base, int]] = []

        def walk(w: GroupWord, sign: int) -> None:
            items = w.factors if sign > 0 else tuple(reversed(w.factors))
            for b, e in items:
                e *= sign
                if isinstance(b, GroupWord):
                    s = 1 if e > 0 else -1
                    for _ in range(abs(e)):
                        walk(b, s)
                else:
                    if out and out[-1][0] is b:
                        out[-1] = (b, out[-1][1] + e)
                        if out[-1][1] == 0:
                            out.pop()
                    else:
                        out.append((b, e))
        walk(self, 1)
        return GroupWord(out)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for b, e in self.factors:
            if isinstance(b, str):
                s = b
            elif isinstance(b, Portrait):
                s = "<" + str(b) + ">"
            else:
                s = "(" + str(b) + ")"
            parts.append(s if e == 1 else f"{s}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"GroupWord({str(self)!r})"


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_word(env: Mapping[str, Portrait], w: GroupWord, level: int,
              d: int | None = None) -> Portrait:
    """Evaluate w at the given level; literals deeper than it are truncated."""
    if d is None:
        d = next(iter(env.values())).d if env else _literal_d(w)

    def leaf(b: Base) -> Portrait:
        if isinstance(b, str):
            if b not in env:
                raise KeyError(f"unbound name {b!r}")
            u = env[b]
        else:
            u = b
        if u.level < level:
            raise ShapeError(f"operand of level {u.level} used at level {level}")
        return truncate(u, level) if u.level > level else u
    one = Portrait.identity(d, level)
    return w.fold(leaf, lambda x, y: compose(x, y), inverse, one, power)


def _literal_d(w: GroupWord) -> int:
    for b, _ in w.factors:
        if isinstance(b, Portrait):
            return b.d
        if isinstance(b, GroupWord):
            try:
                return _literal_d(b)
            except ValueError:
                pass
    raise ValueError("cannot infer arity from an empty environment")


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    root: Perm
    children: tuple[GroupWord, ...]


@dataclass
class RecursionSystem:
    """x_i = g_i(w_i1, ..., w_id) for each declared name x_i."""

    d: int
    names: list[str]
    equations: dict[str, Equation] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        declared = set(self.names)
        if len(declared) != len(self.names):
            raise ValueError("duplicate indeterminate")
        for name in self.names:
            if name not in self.equations:
                raise ValueError(f"no equation for {name!r}")
        for name, eq in self.equations.items():
            if name not in declared:
                raise ValueError(f"equation for undeclared name {name!r}")
            if len(eq.root) != self.d or len(eq.children) != self.d:
                raise ShapeError(f"equation for {name!r} has arity mismatch (d={self.d})")
            for w in eq.children:
                bad = w.names() - declared
                if bad:
                    raise ValueError(f"undeclared name(s) {sorted(bad)} in equation for {name!r}")

    def conjugated(self, name: str, r: Portrait) -> "RecursionSystem":
        """Replace the right side R of x = R by r R r^-1, expanded one level."""
        eq = self.equations[name]
        d = self.d
        rho = r.root
        rho_inv = tuple(sorted(range(d), key=lambda i: rho[i]))
        rinv = inverse(r)
        g = eq.root
        new_root = tuple(rho[g[rho_inv[j]]] for j in range(d))
        # (A B C)_j = A_{(BC)(j)} B_{C(j)} C_j with A = r, B = g(h), C = r^-1
        kids = []
        for j in range(d):
            cj = rho_inv[j]
            kids.append(GroupWord([(r.child(g[cj]), 1), (eq.children[cj], 1),
                                   (rinv.child(j), 1)]))
        eqs = dict(self.equations)
        eqs[name] = Equation(new_root, tuple(kids))
        return RecursionSystem(d, list(self.names), eqs)


def solve(sys: RecursionSystem, level: int, method: str = "levelwise",
          order: Sequence[str] | None = None) -> dict[str, Portrait]:
    """Unique level-``level`` solution of a recursion system.

    ``levelwise`` builds A_k from A_{k-1} for k = 1..level, each round one
    level deeper.  ``fixed_point`` starts from identity at full depth and
    substitutes in place (in the given name order) for level+1 sweeps; it
    exists as an independent route to the same answer.
    """
    d = sys.d
    if method == "levelwise":
        sol = {x: Portrait.identity(d, 0) for x in sys.names}
        for k in range(1, level + 1):
            nxt = {}
            for x in sys.names:
                eq = sys.equations[x]
                kids = [eval_word(sol, w, k - 1, d) for w in eq.children]
                nxt[x] = Portrait.from_parts(eq.root, kids)
            sol = nxt
        return sol
    if method == "fixed_point":
        if level == 0:
            return {x: Portrait.identity(d, 0) for x in sys.names}
        sol = {x: Portrait.identity(d, level) for x in sys.names}
        names = list(order) if order is not None else list(sys.names)
        for _ in range(level + 1):
            for x in names:
                eq = sys.equations[x]
                trunc = {y: truncate(u, level - 1) for y, u in sol.items()}
                kids = [eval_word(trunc, w, level - 1, d) for w in eq.children]
                sol[x] = Portrait.from_parts(eq.root, kids)
        return sol
    raise ValueError(f"unknown method {method!r}")


def check_fixed_point(sys: RecursionSystem, sol: Mapping[str, Portrait]) -> bool:
    """Substituting the solution into every right side reproduces it."""
    for x in sys.names:
        u = sol[x]
        if u.level == 0:
            continue
        eq = sys.equations[x]
        trunc = {y: truncate(v, u.level - 1) for y, v in sol.items()}
        kids = [eval_word(trunc, w, u.level - 1, sys.d) for w in eq.children]
        if Portrait.from_parts(eq.root, kids) != u:
            return False
    return True


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

class SystemParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_WORD_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(-?\d+)|(\*)|(\^)|(\()|(\)))")


class _WordParser:
    def __init__(self, text: str, line: int, col0: int):
        self.text = text
        self.pos = 0
        self.line = line
        self.col0 = col0
        self.toks: list[tuple[str, str, int]] = []
        while True:
            m = _WORD_TOKEN.match(text, self.pos)
            if not m or m.end() == self.pos:
                rest = text[self.pos:]
                if rest.strip():
                    self.fail("unexpected character", self.pos + len(rest) - len(rest.lstrip()))
                break
            kind = ["name", "int", "*", "^", "(", ")"][m.lastindex - 1]
            self.toks.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
            self.pos = m.end()
        self.i = 0

    def fail(self, msg: str, pos: int) -> None:
        raise SystemParseError(msg, self.line, self.col0 + pos + 1)

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind: str) -> tuple[str, str, int]:
        if self.peek() != kind:
            pos = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)
            self.fail(f"expected {kind!r}", pos)
        t = self.toks[self.i]
        self.i += 1
        return t

    def word(self) -> GroupWord:
        factors = [self.term()]
        while self.peek() == "*":
            self.take("*")
            factors.append(self.term())
        out: list[tuple[Base, int]] = []
        for f in factors:
            out.extend(f.factors)
        return GroupWord(out)

    def term(self) -> GroupWord:
        kind = self.peek()
        if kind == "name":
            _, name, _ = self.take("name")
            base: GroupWord = GroupWord.gen(name)
        elif kind == "int":
            _, val, pos = self.take("int")
            if val != "1":
                self.fail("only 1 may appear as a constant", pos)
            base = GroupWord()
        elif kind == "(":
            self.take("(")
            base = self.word()
            self.take(")")
        else:
            pos = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)
            self.fail("expected a name, 1 or '('", pos)
        if self.peek() == "^":
            self.take("^")
            _, val, _ = self.take("int")
            k = int(val)
            if len(base.factors) == 1:
                b, e = base.factors[0]
                return GroupWord([(b, e * k)])
            return base ** k if not base.is_empty() else base
        return base


def parse_word(text: str, line: int = 1, col0: int = 0) -> GroupWord:
    p = _WordParser(text, line, col0)
    w = p.word()
    if p.i != len(p.toks):
        p.fail("trailing input", p.toks[p.i][2])
    return w


def _split_top(text: str) -> list[tuple[str, int]]:
    """Split on commas outside parentheses; keep each part's offset."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


_ROOT = re.compile(r"\s*(s\^-?\d+|s|\[[^\]]*\]|1)\s*")


def parse_system(text: str) -> RecursionSystem:
    """Parse the system file format.

        d=3
        x1 = s^1 (1, x1, x2)
        x2 = [1,3,2] (x1*x2, 1, 1)

    An optional header line ``children=image`` declares that child words are
    indexed by the image letter, i.e. x = g(h_1..h_d) acts by
    x(i w) = g(i) h_{g(i)}(w); equations are then rewritten into the
    library's source-indexed form.  ``#`` starts a comment.
    """
    d = None
    image_indexed = False
    names: list[str] = []
    eqs: dict[str, Equation] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = re.fullmatch(r"\s*d\s*=\s*(\d+)\s*", line)
        if m:
            if d is not None:
                raise SystemParseError("duplicate d header", lineno, 1)
            d = int(m.group(1))
            if d < 2:
                raise SystemParseError("d must be at least 2", lineno, m.start(1) + 1)
            continue
        m = re.fullmatch(r"\s*children\s*=\s*(source|image)\s*", line)
        if m:
            image_indexed = m.group(1) == "image"
            continue
        if d is None:
            raise SystemParseError("missing 'd=<int>' header", lineno, 1)
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=", line)
        if not m:
            raise SystemParseError("expected '<name> = ...'", lineno, 1)
        name = m.group(1)
        if name in eqs:
            raise SystemParseError(f"second equation for {name!r}", lineno, m.start(1) + 1)
        pos = m.end()
        rm = _ROOT.match(line, pos)
        if not rm:
            raise SystemParseError("expected a root label", lineno, pos + 1)
        root = _parse_root(rm.group(1), d, lineno, rm.start(1) + 1)
        pos = rm.end()
        rest = line[pos:]
        if rest.strip():
            if not rest.lstrip().startswith("("):
                raise SystemParseError("expected '('", lineno, pos + 1)
            open_at = pos + rest.index("(")
            close_at = line.rstrip().rfind(")")
            if close_at <= open_at or line[close_at + 1:].strip():
                raise SystemParseError("unbalanced parentheses", lineno, open_at + 1)
            inner = line[open_at + 1:close_at]
            parts = _split_top(inner)
            if len(parts) != d:
                raise SystemParseError(f"expected {d} child words, got {len(parts)}",
                                       lineno, open_at + 1)
            kids = tuple(parse_word(p, lineno, open_at + 1 + off) for p, off in parts)
        else:
            kids = tuple(GroupWord() for _ in range(d))
        if image_indexed:
            kids = tuple(kids[root[i]] for i in range(d))
        names.append(name)
        eqs[name] = Equation(root, kids)
    if d is None:
        raise SystemParseError("missing 'd=<int>' header", 1, 1)
    try:
        return RecursionSystem(d, names, eqs)
    except ValueError as e:
        raise SystemParseError(str(e), 1, 1) from None


def _parse_root(tok: str, d: int, line: int, col: int) -> Perm:
    if tok == "1":
        return perm_identity(d)
    if tok == "s":
        return sigma_power(d, 1)
    if tok.startswith("s^"):
        return sigma_power(d, int(tok[2:]))
    try:
        images = [int(x) for x in tok[1:-1].split(",") if x.strip()]
        if len(images) != d:
            raise ValueError(f"root label needs {d} images")
        return perm_from_images(images)
    except ValueError as e:
        raise SystemParseError(str(e), line, col) from None


def format_system(sys: RecursionSystem) -> str:
    lines = [f"d={sys.d}"]
    for x in sys.names:
        eq = sys.equations[x]
        head = "1" if eq.root == perm_identity(sys.d) else format_label(eq.root)
        lines.append(f"{x} = {head} (" + ", ".join(str(w) for w in eq.children) + ")")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------

def _ones(d: int) -> list[GroupWord]:
    return [GroupWord() for _ in range(d)]


def odometer_system(d: int) -> RecursionSystem:
    kids = _ones(d)
    kids[-1] = GroupWord.gen("c")
    return RecursionSystem(d, ["c"], {"c": Equation(sigma_power(d, 1), tuple(kids))})


def mper_system(d: int, n: int) -> RecursionSystem:
    if n < 1:
        raise ValueError("periodic family needs n >= 1")
    names = [f"a{i}" for i in range(1, n + 1)]
    eqs = {}
    for i in range(1, n + 1):
        kids = _ones(d)
        if i == 1:
            kids[-1] = GroupWord.gen(f"a{n}")
            eqs["a1"] = Equation(sigma_power(d, 1), tuple(kids))
        else:
            kids[-1] = GroupWord.gen(f"a{i - 1}")
            eqs[f"a{i}"] = Equation(perm_identity(d), tuple(kids))
    return RecursionSystem(d, names, eqs)


def mpre_system(d: int, m: int, n: int, omega: int) -> RecursionSystem:
    if not (1 <= m < n and 1 <= omega < d):
        raise ValueError("preperiodic family needs 1 <= m < n and 1 <= omega < d")
    names = [f"b{i}" for i in range(1, n + 1)]
    eqs = {}
    for i in range(1, n + 1):
        kids = _ones(d)
        if i == 1:
            eqs["b1"] = Equation(sigma_power(d, 1), tuple(kids))
            continue
        if i == m + 1:
            kids[omega - 1] = GroupWord.gen(f"b{n}")
            kids[-1] = GroupWord.gen(f"b{m}")
        else:
            kids[-1] = GroupWord.gen(f"b{i - 1}")
        eqs[f"b{i}"] = Equation(perm_identity(d), tuple(kids))
    return RecursionSystem(d, names, eqs)


@dataclass(frozen=True)
class NamedFamily:
    """tag in {odometer, mper, mpre, a_inf, b_inf, power_conjugator_per,
    power_conjugator_pre}; params carries d, n and (preperiodic) m, omega;
    e is the exponent in eps = 1 + d*e."""

    tag: str
    params: Any = None
    e: int = 0
    d: int | None = None


def _product(us: Sequence[Portrait]) -> Portrait:
    return compose(*us)


def builtin(fam: NamedFamily, level: int) -> dict[str, Portrait]:
    tag = fam.tag
    p = fam.params
    if tag == "odometer":
        d = fam.d if fam.d is not None else p.d
        return solve(odometer_system(d), level)
    if tag in ("mper", "a_inf", "power_conjugator_per"):
        gens = solve(mper_system(p.d, p.n), level)
        if tag == "mper":
            return gens
        a_inf = _product([gens[f"a{i}"] for i in range(1, p.n + 1)])
        if tag == "a_inf":
            return {"a_inf": a_inf}
        return {"c_eps": power_conjugator(p.d, level, gens[f"a{p.n}"], a_inf,
                                          [1] * p.d, fam.e)}
    if tag in ("mpre", "b_inf", "power_conjugator_pre"):
        gens = solve(mpre_system(p.d, p.m, p.n, p.omega), level)
        if tag == "mpre":
            return gens
        b_inf = _product([gens[f"b{i}"] for i in range(1, p.n + 1)])
        if tag == "b_inf":
            return {"b_inf": b_inf}
        # v = (1, ..., 1, b_n, ..., b_n) with the first b_n in component omega+1
        mask = [0] * p.omega + [1] * (p.d - p.omega)
        return {"c_eps": power_conjugator(p.d, level, gens[f"b{p.n}"], b_inf, mask, fam.e)}
    raise ValueError(f"unknown family {tag!r}")


def power_conjugator(d: int, level: int, h: Portrait, odo: Portrait,
                     mask: Sequence[int], e: int) -> Portrait:
    """Solve c = (k_1, ..., k_d) with k_i = h^{mask_i} odo^{(i-1)e} c h^{-mask_i}.

    For the periodic family h = a_n and every mask entry is 1, since
    a_1^d = (a_n, ..., a_n); for the preperiodic family the mask selects the
    components of v = (1, ..., 1, b_n, ..., b_n).
    """
    if level >= 1:
        mod = d ** level
        e %= mod
    kids = []
    for i in range(d):
        f: list[tuple[Base, int]] = []
        if mask[i]:
            f.append((h, 1))
        f.append((odo, i * e))
        f.append(("c", 1))
        if mask[i]:
            f.append((h, -1))
        kids.append(GroupWord(f))
    sys = RecursionSystem(d, ["c"], {"c": Equation(perm_identity(d), tuple(kids))})
    return solve(sys, level)["c"]


def worked_example_system(children: str = "image") -> RecursionSystem:
    """x1 = s(1, x1, x2), x2 = (2 3)(x1 x2, 1, 1) over S_3."""
    text = (f"d=3\nchildren={children}\n"
            "x1 = s (1, x1, x2)\n"
            "x2 = [1,3,2] (x1*x2, 1, 1)\n")
    return parse_system(text)
