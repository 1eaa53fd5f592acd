"""Verification suites: each check compares an expected value with a computed one."""

from __future__ import annotations

import math
import random
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import arithmetic as ar
from .conjugacy import (
    Ambient,
    are_conjugate,
    brute_force_centralizer,
    brute_force_classes,
    is_odometer,
)
from .model_groups import (
    CaseTag,
    ModelParams,
    N_power_d,
    branch_subgroup_N,
    classify_case,
    closed_form_log_order,
    embed_generators,
    hausdorff_dimension,
    heisenberg_commutator,
    heisenberg_elements,
    heisenberg_identity,
    kappa,
    model_group,
    periodic_modulus,
    power_conjugator,
    psi_A,
    psi_B,
    tau,
)
from .permgroup import group_from_portraits, index, random_word_element
from .recursion import odometer_system, solve, worked_example_system
from .tree_core import (
    Portrait,
    TreeShape,
    act,
    bracket,
    compose,
    inverse,
    odometer,
    order,
    random_portrait,
)

DEFAULT_SEED = 20240611

PERIODIC_GRID = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]
PREPERIODIC_GRID = {
    "A1": (3, 1, 2, 1),
    "A2": (2, 2, 4, 1),
    "A3": (2, 3, 4, 1),
    "B1": (4, 1, 2, 2),
    "B2": (2, 1, 3, 1),
    "C": (2, 2, 3, 1),
    "D": (2, 1, 2, 1),
}


def periodic_params() -> list[ModelParams]:
    return [ModelParams.periodic(d, n) for d, n in PERIODIC_GRID]


def preperiodic_params() -> list[ModelParams]:
    return [ModelParams.preperiodic(*q) for q in PREPERIODIC_GRID.values()]


def max_level(p: ModelParams) -> int:
    if p.is_periodic:
        return 6 if p.d == 2 else 4
    return p.n + 3


@dataclass
class Check:
    id: str
    params: dict
    expected: Any
    computed: Any
    passed: bool
    ms: float
    paper_ref: str

    def as_dict(self) -> dict:
        return {"id": self.id, "params": self.params, "expected": _jsonable(self.expected),
                "computed": _jsonable(self.computed), "pass": self.passed,
                "ms": round(self.ms, 3), "paper_ref": self.paper_ref}


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "pass": self.passed,
                "checks": [c.as_dict() for c in self.checks]}


# A task returns (expected, computed) or (expected, computed, passed).
Task = tuple[str, dict, str, Callable[[], tuple]]


def _run(task: Task) -> Check:
    cid, params, ref, fn = task
    t = time.perf_counter()
    out = fn()
    ms = (time.perf_counter() - t) * 1000
    expected, computed = out[0], out[1]
    passed = out[2] if len(out) > 2 else expected == computed
    return Check(cid, params, expected, computed, bool(passed), ms, ref)


def _pstr(p: ModelParams) -> dict:
    if p.is_periodic:
        return {"family": "periodic", "d": p.d, "n": p.n}
    return {"family": "preperiodic", "d": p.d, "m": p.m, "n": p.n, "omega": p.omega,
            "case": classify_case(p).value}


def _tag(p: ModelParams) -> str:
    if p.is_periodic:
        return f"per{p.d}{p.n}"
    return f"pre{p.d}{p.m}{p.n}{p.omega}"


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def branch_index_tasks(seed: int) -> list[Task]:
    p = ModelParams.preperiodic(2, 2, 3, 1)

    def idx_N(l):
        return lambda: (2 ** {3: 2, 4: 3}[l], index(model_group(p, l)[1], branch_subgroup_N(p, l)).value)

    def idx_Nd(l):
        return lambda: (2 ** {4: 3, 5: 4}[l], index(model_group(p, l)[1], N_power_d(p, l)).value)
    return [
        ("branch-index/N/l3", {"level": 3, **_pstr(p)}, "branch index stabilization", idx_N(3)),
        ("branch-index/N/l4", {"level": 4, **_pstr(p)}, "branch index stabilization", idx_N(4)),
        ("branch-index/Nd/l4", {"level": 4, **_pstr(p)}, "branch index stabilization", idx_Nd(4)),
        ("branch-index/Nd/l5", {"level": 5, **_pstr(p)}, "branch index stabilization", idx_Nd(5)),
    ]


def order_tasks(seed: int) -> list[Task]:
    tasks = []
    for p in periodic_params() + preperiodic_params():
        for l in range(1, max_level(p) + 1):
            def fn(p=p, l=l):
                return closed_form_log_order(p, l), model_group(p, l)[1].order().log_d
            tasks.append((f"orders/{_tag(p)}/l{l}", {"level": l, **_pstr(p)},
                          "finite level order", fn))
    return tasks


def _members(p: ModelParams, l: int, es: range) -> list[int]:
    _, G = model_group(p, l)
    return [1 + p.d * e for e in es if G.contains(power_conjugator(p, l, e))]


def kappa_tasks(seed: int) -> list[Task]:
    tasks = []
    for p in preperiodic_params():
        if classify_case(p) is CaseTag.D:
            continue
        k = kappa(p)
        es = range(2 * k // p.d)
        for l in (p.n + 1, p.n + 2):
            def fn(p=p, l=l, k=k, es=es):
                expected = [1 + p.d * e for e in es if (1 + p.d * e) % k == 1 % k]
                return expected, _members(p, l, es)
            tasks.append((f"kappa/{_tag(p)}/l{l}", {"level": l, "kappa": k, **_pstr(p)},
                          "c_eps membership iff eps = 1 mod kappa", fn))
        for l in range(1, p.n + 1):
            def fn_small(p=p, l=l, es=es):
                return [1 + p.d * e for e in es], _members(p, l, es)
            tasks.append((f"kappa/{_tag(p)}/small-l{l}", {"level": l, **_pstr(p)},
                          "small truncation: every eps conjugates", fn_small))

        def fn_cond(p=p, k=k):
            cls = ar.OrbitClassification("preperiodic", n=p.n, m=p.m, omega=p.omega)
            c = ar.constant_field_conductor(cls, p.d, p.n + 1).conductor
            return p.d * k // math.gcd(p.d, k), c, c == p.d * k // math.gcd(p.d, k) and (2 * p.d * p.d) % c == 0
        tasks.append((f"kappa/{_tag(p)}/conductor", _pstr(p), "conductor is lcm(d, kappa) and divides 2d^2", fn_cond))
    for p in periodic_params():
        for l in range(1, max_level(p) + 1):
            mod = periodic_modulus(p, l)
            es = range(2 * mod // p.d)

            def fn_per(p=p, l=l, mod=mod, es=es):
                expected = [1 + p.d * e for e in es if (1 + p.d * e) % mod == 1 % mod]
                return expected, _members(p, l, es)
            tasks.append((f"kappa/{_tag(p)}/l{l}", {"level": l, "modulus": mod, **_pstr(p)},
                          "periodic c_eps membership iff eps = 1 mod d^(floor((l-1)/n)+1)", fn_per))
    p = ModelParams.preperiodic(*PREPERIODIC_GRID["D"])
    for l in range(3, 6):
        es = range(2 ** (l - 1))

        def fn_d(p=p, l=l, es=es):
            expected = [1 + 2 * e for e in es if (1 + 2 * e) % 2 ** l in (1, 2 ** l - 1)]
            return expected, _members(p, l, es)
        tasks.append((f"kappa/{_tag(p)}/l{l}", {"level": l, **_pstr(p)},
                      "dihedral case: eps = +-1 mod 2^l", fn_d))
    return tasks


def _conj_classes_check(d: int, level: int, cyclic: bool, pairs: int | None, rng: random.Random):
    shape = TreeShape(d, level)
    amb = Ambient.CYCLIC if cyclic else Ambient.FULL
    cls = brute_force_classes(shape, amb)
    elems = [Portrait(d, level, p, check=False) for p in cls]
    bad = 0
    total = 0
    if pairs is None:
        for u in elems:
            for v in elems:
                total += 1
                if are_conjugate(u, v, amb) != (cls[u.perm] == cls[v.perm]):
                    bad += 1
    else:
        for i in range(pairs):
            u = rng.choice(elems)
            if i % 2:
                w = rng.choice(elems)
                v = compose(inverse(w), u, w)
            else:
                v = rng.choice(elems)
            total += 1
            if are_conjugate(u, v, amb) != (cls[u.perm] == cls[v.perm]):
                bad += 1
    return total, bad


def conjugacy_tasks(seed: int) -> list[Task]:
    def mk(d, l, cyclic, pairs):
        def fn():
            rng = random.Random(seed)
            total, bad = _conj_classes_check(d, l, cyclic, pairs, rng)
            return {"disagreements": 0}, {"disagreements": bad, "pairs": total}, bad == 0
        return fn
    name = {True: "C", False: "S"}
    out = []
    for d, l, cyclic, pairs in [(2, 3, True, None), (3, 2, True, 500), (2, 3, False, 500), (3, 2, False, 500)]:
        out.append((f"conjugacy/{name[cyclic]}{d}^{l}", {"d": d, "level": l, "ambient": "cyclic" if cyclic else "full",
                                                          "pairs": "all" if pairs is None else pairs},
                    "orbit-product conjugacy criterion vs exhaustive classes", mk(d, l, cyclic, pairs)))
    return out


def heisenberg_tasks(seed: int) -> list[Task]:
    tasks = []
    for d in (2, 3, 4):
        def fn(d=d):
            E = heisenberg_elements(d)
            e = heisenberg_identity(d)
            g1, g2 = embed_generators(d)
            c = heisenberg_commutator(g1, g2)
            res = {
                "order": len(set(E)),
                "associative": all((x * y) * z == x * (y * z) for x in E for y in E for z in E[:: max(1, len(E) // 9)]),
                "inverses": all(x * x.inverse() == e for x in E),
                "g1^d": g1 ** d == e, "g2^d": g2 ** d == e,
                "[g1,[g1,g2]]": heisenberg_commutator(g1, c) == e,
                "[g2,[g1,g2]]": heisenberg_commutator(g2, c) == e,
                "tau involution": all(tau(tau(x)) == x for x in E),
                "tau(g1)=g2": tau(g1) == g2,
                "tau homomorphism": all(tau(x * y) == tau(x) * tau(y) for x in E for y in E),
            }
            expected = {k: (d ** 3 if k == "order" else True) for k in res}
            return expected, res
        tasks.append((f"heisenberg/H{d}", {"d": d}, "Heisenberg presentation and involution", fn))

    def psi_check(q, l, which):
        def fn():
            p = ModelParams.preperiodic(*q)
            rng = random.Random(seed)
            gens, G = model_group(p, l)
            psi = psi_A if which == "A" else psi_B
            bad = 0
            for _ in range(200):
                a, _ = random_word_element(G, 10, rng)
                b, _ = random_word_element(G, 10, rng)
                A = Portrait(p.d, l, [int(x) for x in a], check=False)
                B = Portrait(p.d, l, [int(x) for x in b], check=False)
                x, y, z = psi(A * B, p), psi(A, p), psi(B, p)
                if which == "A":
                    ok = x == ((y[0] + z[0]) % p.d, (y[1] + z[1]) % p.d)
                else:
                    ok = x == y * z
                bad += not ok
            N = branch_subgroup_N(p, l)
            one = (0, 0) if which == "A" else heisenberg_identity(p.d)
            in_ker = all(psi(Portrait(p.d, l, [int(v) for v in g], check=False), p) == one
                         for g in N.generators)
            img = p.d ** 2 if which == "A" else p.d ** 3
            idx = index(G, N).value
            return ({"hom failures": 0, "N in ker": True, "[M:N]": img},
                    {"hom failures": bad, "N in ker": in_ker, "[M:N]": idx})
        return fn
    for q, l, which in [((3, 1, 2, 1), 4, "A"), ((2, 1, 3, 1), 5, "B")]:
        p = ModelParams.preperiodic(*q)
        tasks.append((f"heisenberg/psi{which}/{_tag(p)}/l{l}", {"level": l, **_pstr(p)},
                      "psi maps are homomorphisms with kernel N", psi_check(q, l, which)))
    return tasks


def _act(u: Portrait, word: str) -> str:
    return "".join(map(str, act(u, word)))


def worked_example_tasks(seed: int) -> list[Task]:
    def fn():
        sol = solve(worked_example_system("image"), 5)
        return "31211", _act(sol["x1"], "21131")

    def fn_src():
        sol = solve(worked_example_system("source"), 5)
        return "32131", _act(sol["x1"], "21131")
    return [("worked-example/image-indexed", {"word": "21131", "gen": "x1", "children": "image"},
             "worked example", fn),
            ("worked-example/source-indexed", {"word": "21131", "gen": "x1", "children": "source"},
             "worked example, standard section convention", fn_src)]


def odometer_tasks(seed: int) -> list[Task]:
    tasks = []
    for d in (2, 3):
        for l in range(1, 6):
            def fn(d=d, l=l):
                c = solve(odometer_system(d), l)["c"]
                perm = c.perm
                seen, x = 0, 0
                while True:
                    x = perm[x]
                    seen += 1
                    if x == 0:
                        break
                return ({"order": d ** l, "single cycle": True, "matches closed form": True},
                        {"order": order(c), "single cycle": seen == d ** l,
                         "matches closed form": c == odometer(d, l)})
            tasks.append((f"odometer/d{d}/l{l}", {"d": d, "level": l}, "odometer order", fn))
    for d, l in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)]:
        def fn_chi(d=d, l=l):
            rng = random.Random(seed + 7 * d + l)
            shape = TreeShape(d, l)
            odo = odometer(d, l)
            bad = pos = 0
            for i in range(200):
                u = random_portrait(shape, rng, True)
                if i % 2:
                    w = random_portrait(shape, rng, True)
                    u = compose(inverse(w), odo, w)
                a = is_odometer(u, Ambient.CYCLIC)
                b = are_conjugate(u, odo, Ambient.CYCLIC)
                pos += b
                bad += a != b
            return {"disagreements": 0}, {"disagreements": bad, "odometers": pos}, bad == 0
        tasks.append((f"odometer/chi-criterion/d{d}/l{l}", {"d": d, "level": l, "samples": 200},
                      "strict odometer character criterion", fn_chi))

    def fn_cent():
        return 8, len(brute_force_centralizer(odometer(2, 3), Ambient.FULL))
    tasks.append(("odometer/centralizer/S2^3", {"d": 2, "level": 3}, "odometers are self-centralizing", fn_cent))
    return tasks


def semirigidity_tasks(seed: int) -> list[Task]:
    tasks = []
    for p in periodic_params() + preperiodic_params():
        l = min(max_level(p), p.n + 2) if p.d == 2 else min(max_level(p), 3)

        def fn(p=p, l=l):
            rng = random.Random(seed + zlib.crc32(_tag(p).encode()) % 1000)
            gens, G = model_group(p, l)
            ref = G.order().value
            shape = TreeShape(p.d, l)
            orders = []
            for _ in range(20):
                conj = []
                for u in gens.values():
                    w = random_portrait(shape, rng, True)
                    conj.append(compose(w, u, inverse(w)))
                orders.append(group_from_portraits(conj).order().value)
            return {"distinct orders": [ref]}, {"distinct orders": sorted(set(orders))}
        tasks.append((f"semirigidity/orders/{_tag(p)}/l{l}", {"level": l, "draws": 20, **_pstr(p)},
                      "semirigidity: conjugated generators give conjugate groups", fn))

        def fn_rec(p=p, l=l):
            rng = random.Random(seed + 1 + zlib.crc32(_tag(p).encode()) % 1000)
            sys = p.system()
            base = solve(sys, l)
            shape = TreeShape(p.d, l)
            bad = 0
            for _ in range(5):
                s2 = sys
                for x in p.names:
                    s2 = s2.conjugated(x, random_portrait(shape, rng, True))
                sol = solve(s2, l)
                bad += not all(are_conjugate(base[x], sol[x], Ambient.CYCLIC) for x in p.names)
            return {"non-conjugate solutions": 0}, {"non-conjugate solutions": bad}
        tasks.append((f"semirigidity/weak-recursion/{_tag(p)}/l{l}", {"level": l, "resolves": 5, **_pstr(p)},
                      "conjugate recurrences have conjugate solutions", fn_rec))
    return tasks


def hausdorff_tasks(seed: int) -> list[Task]:
    tasks = []
    for p in periodic_params() + preperiodic_params():
        def fn(p=p):
            h = hausdorff_dimension(p)
            L = max_level(p)
            errs = [abs(Fraction(model_group(p, l)[1].order().log_d, bracket(l, p.d)) - h)
                    for l in range(1, L + 1)]
            # below level n the group is the whole [C_d]^l, so the error is flat there
            flat = all(errs[i + 1] <= errs[i] for i in range(p.n - 1))
            strict = all(errs[i + 1] < errs[i] for i in range(p.n - 1, len(errs) - 1))
            ok = flat and strict
            return ({"dimension": h, "decreasing from level n": True},
                    {"dimension": h, "decreasing from level n": ok, "errors": [float(e) for e in errs]},
                    ok)
        tasks.append((f"hausdorff/{_tag(p)}", _pstr(p), "Hausdorff dimension", fn))
    p = ModelParams.preperiodic(*PREPERIODIC_GRID["C"])
    for l in range(4, max_level(p) + 1):
        def fn_c(l=l):
            val = Fraction(model_group(p, l)[1].order().log_d, bracket(l, 2))
            tol = Fraction(1, 2 ** (l - 5)) if l >= 5 else Fraction(2 ** (5 - l))
            err = abs(val - Fraction(11, 16))
            return ({"limit": Fraction(11, 16), "within": str(tol)},
                    {"ratio": val, "error": err}, err <= tol)
        tasks.append((f"hausdorff/C/l{l}", {"level": l, **_pstr(p)}, "Hausdorff dimension 11/16", fn_c))
    return tasks


def constant_field_tasks(seed: int) -> list[Task]:
    def run(d, a, b, N):
        return ar.classify_orbit(d, ar.parse_cyclotomic(a, N), ar.parse_cyclotomic(b, N), 64)

    def fn1():
        c = run(2, "1", "-1", 2)
        return "Periodic(2)", str(c)

    def fn2():
        c = run(2, "1", "-2", 2)
        ans = [ar.constant_field_conductor(c, 2, l) for l in range(3, 7)]
        return ({"orbit": "Preperiodic(1,2,1)", "case": "D",
                 "conductors": [[2 ** l, True] for l in range(3, 7)]},
                {"orbit": str(c), "case": ar.orbit_case(c, 2).value,
                 "conductors": [[x.conductor, x.real_subfield] for x in ans]})

    def fn3():
        c = run(2, "1", "z", 4)
        ans = [ar.constant_field_conductor(c, 2, l).conductor for l in range(1, 8)]
        return ({"orbit": "Preperiodic(1,3,1)", "case": "B2", "conductors": [2, 2, 2, 8, 8, 8, 8]},
                {"orbit": str(c), "case": ar.orbit_case(c, 2).value, "conductors": ans})
    return [
        ("constant-field/x^2-1", {"d": 2, "a": "1", "b": "-1"}, "constant field, periodic", fn1),
        ("constant-field/x^2-2", {"d": 2, "a": "1", "b": "-2"}, "constant field, case D", fn2),
        ("constant-field/x^2+i", {"d": 2, "a": "1", "b": "z", "field": 4}, "constant field, case B2", fn3),
    ]


SUITES: dict[str, Callable[[int], list[Task]]] = {
    "appendix-a": branch_index_tasks,
    "orders": order_tasks,
    "kappa": kappa_tasks,
    "conjugacy": conjugacy_tasks,
    "heisenberg": heisenberg_tasks,
    "worked-example": worked_example_tasks,
    "odometer": odometer_tasks,
    "semirigidity": semirigidity_tasks,
    "hausdorff": hausdorff_tasks,
    "constant-field": constant_field_tasks,
}


def run_suite(name: str, seed: int = DEFAULT_SEED, jobs: int = 1) -> Report:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(f"unknown suite {name!r}")
    tasks = [t for n in names for t in SUITES[n](seed)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            checks = list(ex.map(_run, tasks))
    else:
        checks = [_run(t) for t in tasks]
    checks.sort(key=lambda c: c.id)
    return Report(name, checks)


def format_text(rep: Report) -> str:
    lines = []
    for c in rep.checks:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"{mark}  {c.id}  expected={_short(c.expected)}  computed={_short(c.computed)}  ({c.ms:.0f} ms)")
    n_ok = sum(c.passed for c in rep.checks)
    lines.append(f"{rep.suite}: {n_ok}/{len(rep.checks)} checks passed")
    return "\n".join(lines)


def _short(x: Any, width: int = 120) -> str:
    s = str(_jsonable(x))
    return s if len(s) <= width else s[: width - 3] + "..."
