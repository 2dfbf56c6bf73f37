"""DPO rules, pushouts, pushout complements and step application.

Pushouts are computed as quotiented disjoint unions; on simple sorts
the quotient additionally merges parallel duplicates until a fixpoint,
which is the reflection into the subcategory of simple instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .graph import CGraph, ElementRef, validate_instance
from .morphism import (
    Morphism,
    MorphismError,
    classify_monicity,
    compose,
    enumerate_homs,
)


class DpoError(ValueError):
    pass


MATCH_CLASSES = ("unrestricted", "monic", "regular-monic")


@dataclass(frozen=True)
class Framework:
    match_class: str

    def __post_init__(self):
        if self.match_class not in MATCH_CLASSES:
            raise DpoError(f"unknown match class {self.match_class!r}")


UNRESTRICTED = Framework("unrestricted")
MONIC = Framework("monic")
REGULAR_MONIC = Framework("regular-monic")


@dataclass(frozen=True)
class Rule:
    name: str
    l: Morphism
    r: Morphism

    def validate(self) -> None:
        if self.l.dom != self.r.dom:
            raise DpoError(f"rule {self.name}: the two legs have different interfaces")
        self.l.validate()
        self.r.validate()
        mono = classify_monicity(self.l)
        if not mono["monic"]:
            raise DpoError(f"rule {self.name}: left leg must be monic")
        if self.l.dom.sig.has_simple and not mono["regularMonic"]:
            raise DpoError(
                f"rule {self.name}: left leg must be regular monic because the "
                f"signature has simple sorts (add the reflected elements to the "
                f"interface)"
            )

    @property
    def interface(self) -> CGraph:
        return self.l.dom

    @property
    def left(self) -> CGraph:
        return self.l.cod

    @property
    def right(self) -> CGraph:
        return self.r.cod


@dataclass(frozen=True)
class StepDiagram:
    rule: Rule
    m: Morphism
    u: Morphism
    l_prime: Morphism
    w: Morphism
    r_prime: Morphism

    @property
    def G(self) -> CGraph:
        return self.m.cod

    @property
    def C(self) -> CGraph:
        return self.u.cod

    @property
    def H(self) -> CGraph:
        return self.w.cod


@dataclass(frozen=True)
class OrientedSquare:
    """Pushout square with span (alpha: A->B, beta: A->C) and cospan
    (beta_p: B->D, alpha_p: C->D); beta/beta_p vertical."""

    alpha: Morphism
    beta: Morphism
    beta_p: Morphism
    alpha_p: Morphism

    @property
    def A(self) -> CGraph:
        return self.alpha.dom

    @property
    def D(self) -> CGraph:
        return self.beta_p.cod


def left_square(d: StepDiagram) -> OrientedSquare:
    return OrientedSquare(d.rule.l, d.u, d.m, d.l_prime)


def right_square(d: StepDiagram) -> OrientedSquare:
    return OrientedSquare(d.rule.r, d.u, d.w, d.r_prime)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def pushout(f: Morphism, g: Morphism) -> tuple[CGraph, Morphism, Morphism]:
    """Pushout of the span B <-f- A -g-> C.

    Returns (D, inB, inC). Elements of D are classes of B + C under the
    relation generated by f(a) ~ g(a), plus the simple-sort duplicate
    quotient.
    """
    if f.dom != g.dom:
        raise MorphismError("pushout: span legs have different domains")
    A, B, C = f.dom, f.cod, g.cod
    sig = A.sig
    ns = len(sig.objects)
    off = [B.n(s) for s in range(ns)]  # C element i is tagged off[s] + i
    uf = [_UnionFind(B.n(s) + C.n(s)) for s in range(ns)]
    for s in range(ns):
        for a in range(A.n(s)):
            uf[s].union(f.maps[s][a], off[s] + g.maps[s][a])

    def tagged_args(s: int, x: int) -> tuple[tuple[int, int], ...]:
        targets = sig.arg_sorts(s)
        if x < off[s]:
            return tuple((t, B.args[s][x][p]) for p, t in enumerate(targets))
        return tuple(
            (t, off[t] + C.args[s][x - off[s]][p]) for p, t in enumerate(targets)
        )

    def tagged_label(s: int, x: int) -> Optional[str]:
        return B.labels[s][x] if x < off[s] else C.labels[s][x - off[s]]

    changed = True
    while changed:
        changed = False
        for s in range(ns):
            if not sig.objects[s].simple:
                continue
            groups: dict[tuple, int] = {}
            for x in range(B.n(s) + C.n(s)):
                key = (
                    tuple(uf[t].find(a) for t, a in tagged_args(s, x)),
                    tagged_label(s, x),
                )
                if key in groups:
                    if uf[s].union(groups[key], x):
                        changed = True
                else:
                    groups[key] = x

    new_id: list[dict[int, int]] = [{} for _ in range(ns)]
    args: list[list[tuple[int, ...]]] = [[] for _ in range(ns)]
    labels: list[list[Optional[str]]] = [[] for _ in range(ns)]
    for s in sig.topo_order:
        for x in range(B.n(s) + C.n(s)):
            root = uf[s].find(x)
            if root in new_id[s]:
                continue
            new_id[s][root] = len(args[s])
            args[s].append(
                tuple(new_id[t][uf[t].find(a)] for t, a in tagged_args(s, root))
            )
            labels[s].append(tagged_label(s, root))
    D = CGraph(sig, tuple(tuple(a) for a in args), tuple(tuple(l) for l in labels))
    in_b = Morphism(
        B, D, tuple(tuple(new_id[s][uf[s].find(x)] for x in range(B.n(s))) for s in range(ns))
    )
    in_c = Morphism(
        C,
        D,
        tuple(
            tuple(new_id[s][uf[s].find(off[s] + x)] for x in range(C.n(s)))
            for s in range(ns)
        ),
    )
    return D, in_b, in_c


def pushout_complement(
    l: Morphism, m: Morphism
) -> Optional[tuple[CGraph, Morphism, Morphism]]:
    """Complement of K -l-> L -m-> G, or None when the gluing conditions
    (identification and dangling) fail.
    """
    mono = classify_monicity(l)
    if not mono["monic"]:
        raise DpoError("pushout complement requires a monic left leg")
    if l.dom.sig.has_simple and not mono["regularMonic"]:
        raise DpoError(
            "pushout complement requires a regular monic left leg on simple "
            "signatures"
        )
    if l.cod != m.dom:
        raise MorphismError("pushout complement: cod(l) != dom(m)")
    K, L, G = l.dom, l.cod, m.cod
    sig = L.sig
    ns = len(sig.objects)
    in_lk = [set(l.maps[s]) for s in range(ns)]
    # identification: elements merged by m must come from l(K)
    delete: list[set[int]] = [set() for _ in range(ns)]
    for s in range(ns):
        groups: dict[int, list[int]] = {}
        for i in range(L.n(s)):
            groups.setdefault(m.maps[s][i], []).append(i)
        for j, members in groups.items():
            outside = [i for i in members if i not in in_lk[s]]
            if outside and (len(members) > 1):
                return None
            if outside:
                delete[s].add(j)
    # dangling: no surviving element keeps an argument in the deleted part
    for s in range(ns):
        targets = sig.arg_sorts(s)
        for j in range(G.n(s)):
            if j in delete[s]:
                continue
            for pos, t in enumerate(targets):
                if G.args[s][j][pos] in delete[t]:
                    return None
    keep = [sorted(set(range(G.n(s))) - delete[s]) for s in range(ns)]
    new_id = [{j: x for x, j in enumerate(keep[s])} for s in range(ns)]
    args = tuple(
        tuple(
            tuple(
                new_id[t][G.args[s][j][pos]]
                for pos, t in enumerate(sig.arg_sorts(s))
            )
            for j in keep[s]
        )
        for s in range(ns)
    )
    labels = tuple(tuple(G.labels[s][j] for j in keep[s]) for s in range(ns))
    C = CGraph(sig, args, labels)
    u = Morphism(
        K,
        C,
        tuple(
            tuple(new_id[s][m.maps[s][l.maps[s][k]]] for k in range(K.n(s)))
            for s in range(ns)
        ),
    )
    l_prime = Morphism(C, G, tuple(tuple(keep[s]) for s in range(ns)))
    return C, u, l_prime


def enumerate_matches(
    rule: Rule, G: CGraph, fw: Framework
) -> list[tuple[Morphism, StepDiagram]]:
    """All matches of the rule in G admitted by the framework, each with
    its completed double-pushout diagram."""
    mono = fw.match_class in ("monic", "regular-monic")
    out = []
    for m in enumerate_homs(rule.left, G, mono_only=mono):
        if fw.match_class == "regular-monic" and not classify_monicity(m)["regularMonic"]:
            continue
        pc = pushout_complement(rule.l, m)
        if pc is None:
            continue
        C, u, l_prime = pc
        H, w, r_prime = pushout(rule.r, u)
        out.append((m, StepDiagram(rule, m, u, l_prime, w, r_prime)))
    return out


def pullback(f: Morphism, g: Morphism) -> tuple[CGraph, Morphism, Morphism]:
    """Pullback of the cospan B -f-> D <-g- C, computed elementwise."""
    if f.cod != g.cod:
        raise MorphismError("pullback: cospan legs have different codomains")
    B, C = f.dom, g.dom
    sig = B.sig
    ns = len(sig.objects)
    pairs: list[list[tuple[int, int]]] = [[] for _ in range(ns)]
    pair_id: list[dict[tuple[int, int], int]] = [{} for _ in range(ns)]
    for s in range(ns):
        for b in range(B.n(s)):
            for c in range(C.n(s)):
                if f.maps[s][b] == g.maps[s][c]:
                    pair_id[s][(b, c)] = len(pairs[s])
                    pairs[s].append((b, c))
    args = tuple(
        tuple(
            tuple(
                pair_id[t][(B.args[s][b][pos], C.args[s][c][pos])]
                for pos, t in enumerate(sig.arg_sorts(s))
            )
            for b, c in pairs[s]
        )
        for s in range(ns)
    )
    labels = tuple(tuple(B.labels[s][b] for b, _ in pairs[s]) for s in range(ns))
    P = CGraph(sig, args, labels)
    p_b = Morphism(P, B, tuple(tuple(b for b, _ in pairs[s]) for s in range(ns)))
    p_c = Morphism(P, C, tuple(tuple(c for _, c in pairs[s]) for s in range(ns)))
    return P, p_b, p_c


def check_rule_admissibility(
    rule: Rule, fw: Framework, element_domains: Iterable[tuple[CGraph, ElementRef]]
) -> dict:
    """Static weighability check for the rule's left squares and
    boundedness for its right squares, for the given weighted-element
    domains (representable shapes).

    Right squares are always bounded above: representable shapes trace
    along every pushout. Left squares need (a) strong traceability,
    granted by the (regular) monic left leg, (b) matches monic for every
    domain shape, automatic except under unrestricted matching where the
    static condition is that at most one morphism from the shape factors
    through l, and (c) l' monic for the shapes outside u, which holds
    for representable domains.
    """
    diagnostics: list[str] = []
    left_ok = True
    mono = classify_monicity(rule.l)
    if not mono["monic"]:
        left_ok = False
        diagnostics.append("left leg is not monic (no strong traceability)")
    elif rule.left.sig.has_simple and not mono["regularMonic"]:
        left_ok = False
        diagnostics.append(
            "left leg is not regular monic on a simple signature "
            "(no strong traceability)"
        )
    if fw.match_class == "unrestricted":
        K = rule.interface
        for shape, gen in element_domains:
            s, lab = gen.sort, shape.labels[gen.sort][gen.id]
            n = sum(1 for i in range(K.n(s)) if K.labels[s][i] == lab)
            if n > 1:
                left_ok = False
                diagnostics.append(
                    f"unrestricted matches may merge the {n} interface elements "
                    f"of shape {K.sig.objects[s].name}"
                    + (f"[{lab}]" if lab else "")
                )
    return {"leftWeighable": left_ok, "rightBounded": True, "diagnostics": diagnostics}
