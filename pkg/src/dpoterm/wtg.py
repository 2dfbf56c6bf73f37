"""Weighted type graphs: weighing morphisms and objects, rule
classification, context closures and the pushout decomposition check.

A weighted element is a morphism from a representable shape into the
type graph. Because those shapes are free on one generator, occurrence
counting reduces to counting generator preimages, which is the fast
path used everywhere; the generic enumeration is kept for diagnostics
on non-free shapes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import itertools

from . import semiring as sr
from .dpo import Framework, OrientedSquare, Rule
from .graph import CGraph, ElementRef
from .morphism import Morphism, MorphismError, compose, enumerate_homs, factor_through
from .semiring import SemiringDescriptor, Weight
from .signature import representable_shapes


class WtgError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedElement:
    shape: CGraph
    gen: ElementRef
    e: Morphism
    weight: Weight

    @cached_property
    def target(self) -> int:
        return self.e.maps[self.gen.sort][self.gen.id]

    @cached_property
    def gen_label(self) -> Optional[str]:
        return self.shape.labels[self.gen.sort][self.gen.id]

    @cached_property
    def is_free(self) -> bool:
        for shape, gen in representable_shapes(self.shape.sig):
            if shape == self.shape and gen == self.gen:
                return True
        return False


@dataclass(frozen=True)
class WeightedTypeGraph:
    T: CGraph
    elements: tuple[WeightedElement, ...]
    semiring: SemiringDescriptor

    def validate(self) -> None:
        for we in self.elements:
            we.e.validate()
            if we.e.cod != self.T:
                raise WtgError("weighted element does not land in the type graph")
            if we.e.dom != we.shape:
                raise WtgError("weighted element morphism does not start at its shape")
            if not sr.is_legal_element_weight(self.semiring, we.weight):
                raise WtgError(
                    f"illegal weight {we.weight!r} for the {self.semiring.kind} semiring"
                )
            if not we.is_free:
                raise WtgError(
                    "weighted-element domains must be representable shapes; "
                    "got a non-representable graph"
                )


def element_at(
    T: CGraph, sort_name: str, label: Optional[str], target: int, weight: Weight
) -> WeightedElement:
    """The weighted element whose shape generator lands on the given
    type-graph element."""
    sig = T.sig
    s = sig.sort(sort_name)
    for shape, gen in representable_shapes(sig):
        if gen.sort == s and shape.labels[s][gen.id] == label:
            homs = enumerate_homs(shape, T, constraint={(s, gen.id): target})
            if len(homs) != 1:
                raise WtgError(
                    f"no unique embedding of the {sort_name} shape at element {target}"
                )
            return WeightedElement(shape, gen, homs[0], weight)
    raise WtgError(f"no representable shape for {sort_name} with label {label!r}")


def _occurrences(we: WeightedElement, phi: Morphism) -> int:
    G = phi.dom
    s = we.gen.sort
    if we.is_free:
        return sum(
            1
            for y in range(G.n(s))
            if G.labels[s][y] == we.gen_label and phi.maps[s][y] == we.target
        )
    return len(enumerate_homs(we.shape, G, fiber=(phi, we.e)))


def _occurrences_excluding(we: WeightedElement, phi: Morphism, alpha: Morphism) -> int:
    G = phi.dom
    s = we.gen.sort
    if we.is_free:
        excluded = set(alpha.maps[s])
        return sum(
            1
            for y in range(G.n(s))
            if G.labels[s][y] == we.gen_label
            and phi.maps[s][y] == we.target
            and y not in excluded
        )
    taus = enumerate_homs(we.shape, G, fiber=(phi, we.e))
    return sum(1 for tau in taus if not factor_through(tau, alpha))


def weight_of_morphism(wtg: WeightedTypeGraph, phi: Morphism) -> Weight:
    if phi.cod != wtg.T:
        raise MorphismError("weight_of_morphism: morphism does not end in T")
    k = wtg.semiring
    acc = sr.one(k)
    for we in wtg.elements:
        acc = sr.s_mul(k, acc, sr.s_pow(k, we.weight, _occurrences(we, phi)))
    return acc


def weight_of_morphism_excluding(
    wtg: WeightedTypeGraph, phi: Morphism, alpha: Morphism
) -> Weight:
    """Weight of phi counting only occurrences that do not factor
    through alpha: A -> dom(phi)."""
    if phi.cod != wtg.T:
        raise MorphismError("weight: morphism does not end in T")
    if alpha.cod != phi.dom:
        raise MorphismError("weight: exclusion morphism does not end in dom(phi)")
    k = wtg.semiring
    acc = sr.one(k)
    for we in wtg.elements:
        acc = sr.s_mul(
            k, acc, sr.s_pow(k, we.weight, _occurrences_excluding(we, phi, alpha))
        )
    return acc


def weight_of_object(wtg: WeightedTypeGraph, G: CGraph) -> Weight:
    k = wtg.semiring
    return sr.s_sum(
        k, (weight_of_morphism(wtg, phi) for phi in enumerate_homs(G, wtg.T))
    )


def side_homs(
    wtg: WeightedTypeGraph, side: Morphism, t_k: Morphism
) -> list[Morphism]:
    """All t_Y: Y -> T with t_Y ∘ side = t_K, for side: K -> Y."""
    if t_k.cod != wtg.T:
        raise MorphismError("side_homs: t_K does not end in T")
    if t_k.dom != side.dom:
        raise MorphismError("side_homs: t_K and the side share no interface")
    constraint: dict[tuple[int, int], int] = {}
    for s in range(len(side.maps)):
        for kk in range(len(side.maps[s])):
            y, t = side.maps[s][kk], t_k.maps[s][kk]
            if constraint.get((s, y), t) != t:
                return []
            constraint[(s, y)] = t
    return enumerate_homs(side.cod, wtg.T, constraint=constraint)


def side_weight(wtg: WeightedTypeGraph, side: Morphism, t_k: Morphism) -> Weight:
    k = wtg.semiring
    return sr.s_sum(
        k, (weight_of_morphism(wtg, t_y) for t_y in side_homs(wtg, side, t_k))
    )


CLASS_ORDER = ("none", "weak", "closureDecreasing", "uniform")


def classify_rule(
    wtg: WeightedTypeGraph, rule: Rule, closure: Optional[Morphism] = None
) -> str:
    """Strongest of none/weak/closureDecreasing/uniform that holds.

    The closure (when given) is assumed valid for the rule's framework;
    verify_context_closure is the separate check. closureDecreasing is
    only available over a strictly monotonic semiring.
    """
    k = wtg.semiring
    weak = True
    uniform_cmp = True
    strict_at_closure = False
    t_kc = compose(closure, rule.l).maps if closure is not None else None
    for t_k in enumerate_homs(rule.interface, wtg.T):
        ls = side_homs(wtg, rule.l, t_k)
        rs = side_homs(wtg, rule.r, t_k)
        wl = sr.s_sum(k, (weight_of_morphism(wtg, t) for t in ls))
        wr = sr.s_sum(k, (weight_of_morphism(wtg, t) for t in rs))
        if not sr.s_le(k, wr, wl):
            weak = False
        strict = sr.s_lt(k, wr, wl)
        if not (strict or (not ls and not rs)):
            uniform_cmp = False
        if t_kc is not None and t_k.maps == t_kc and strict:
            strict_at_closure = True
    if uniform_cmp and closure is not None:
        return "uniform"
    if weak and closure is not None and k.strictly_monotonic and strict_at_closure:
        return "closureDecreasing"
    return "weak" if weak else "none"


def _flower_base_choices(T: CGraph):
    sig = T.sig
    slots = []
    for s in sig.base_sorts:
        for lab in sig.element_labels(s):
            ids = [i for i in range(T.n(s)) if T.labels[s][i] == lab]
            slots.append(((s, lab), ids))
    for combo in itertools.product(*(ids for _, ids in slots)):
        yield {key: i for (key, _), i in zip(slots, combo)}


def saturation_closure(
    T: CGraph, start: set[tuple[int, int]]
) -> Optional[set[tuple[int, int]]]:
    """Least superset of start closed under realizing every argument
    tuple (per non-base sort and label) by the least matching element of
    T; None when some tuple has no realization.
    """
    sig = T.sig
    sat = set(start)
    changed = True
    while changed:
        changed = False
        for s in sig.topo_order:
            if sig.is_base(s):
                continue
            targets = sig.arg_sorts(s)
            pools = [sorted(i for t2, i in sat if t2 == t) for t in targets]
            for tup in itertools.product(*pools):
                for lab in sig.element_labels(s):
                    ids = T.tuple_index.get((s, tup, lab), ())
                    if not ids:
                        return None
                    e = (s, ids[0])
                    if e not in sat:
                        sat.add(e)
                        changed = True
    return sat


def flower_morphism(
    L: CGraph, T: CGraph, fbase: dict[tuple[int, Optional[str]], int]
) -> Optional[Morphism]:
    """The canonical morphism sending everything onto the flower rooted
    at the chosen base elements; None when T lacks a needed element."""
    sig = L.sig
    maps: list[list[int]] = [[-1] * L.n(s) for s in range(len(sig.objects))]
    for s in sig.topo_order:
        targets = sig.arg_sorts(s)
        for i in range(L.n(s)):
            lab = L.labels[s][i]
            if sig.is_base(s):
                j = fbase.get((s, lab))
                if j is None:
                    return None
            else:
                tup = tuple(maps[t][a] for t, a in zip(targets, L.args[s][i]))
                ids = T.tuple_index.get((s, tup, lab), ())
                if not ids:
                    return None
                j = ids[0]
            maps[s][i] = j
    return Morphism(L, T, tuple(tuple(m) for m in maps))


def verify_context_closure(c: Morphism, rule: Rule, fw: Framework) -> bool:
    """Saturation certificate for c: L -> T being a context closure.

    Any match extends to the type graph by sending matched elements
    along c and everything else into the flower, provided every tuple
    over the image-plus-flower region is realized in T. Unrestricted
    matching additionally requires c to be a canonical flower morphism,
    so merged matches stay well defined.
    """
    if c.dom != rule.left:
        raise MorphismError("closure must start at the rule's left side")
    T = c.cod
    image = {
        (s, j) for s in range(len(c.maps)) for j in c.maps[s]
    }
    for fbase in _flower_base_choices(T):
        start = image | {(s, i) for (s, _), i in fbase.items()}
        if saturation_closure(T, start) is None:
            continue
        if fw.match_class != "unrestricted":
            return True
        fl = flower_morphism(rule.left, T, fbase)
        if fl is not None and fl.maps == c.maps:
            return True
    return False


def verify_decomposition(
    wtg: WeightedTypeGraph, square: OrientedSquare, phi: Morphism
) -> dict:
    """Compare w(phi) against w(phi∘beta') ⊗ w(phi∘alpha' - (beta∘-)).

    exact holds on weighable squares, upper on bounded-above ones; both
    are reported so verified mode can flag a failed assumption.
    """
    if phi.dom != square.D:
        raise MorphismError("verify_decomposition: phi must start at the pushout")
    k = wtg.semiring
    left = weight_of_morphism(wtg, compose(phi, square.beta_p))
    right = weight_of_morphism_excluding(wtg, compose(phi, square.alpha_p), square.beta)
    bound = sr.s_mul(k, left, right)
    w = weight_of_morphism(wtg, phi)
    return {"exact": w == bound, "upper": sr.s_le(k, w, bound), "w": w, "bound": bound}


def detect_collapse_epi(rule: Rule) -> bool:
    """True when some epimorphism e: R -> L satisfies e∘r = l; such
    rules cannot strictly decrease over the arithmetic or arctic
    semiring (every left hom lifts with no fewer occurrences)."""
    K, L, R = rule.interface, rule.left, rule.right
    constraint: dict[tuple[int, int], int] = {}
    for s in range(len(K.sig.objects)):
        for kk in range(K.n(s)):
            y, t = rule.r.maps[s][kk], rule.l.maps[s][kk]
            if constraint.get((s, y), t) != t:
                return False
            constraint[(s, y)] = t
    for e in enumerate_homs(R, L, constraint=constraint):
        if all(set(e.maps[s]) == set(range(L.n(s))) for s in range(len(L.sig.objects))):
            return True
    return False
