"""Homomorphism enumeration, composition, factorization and monicity.

A morphism is a sort-indexed total map commuting with every argument
arrow and preserving labels. Enumeration backtracks over sorts in
topological order (argument targets first), so non-base elements have
their candidate images fully determined by an index lookup.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graph import CGraph


class MorphismError(ValueError):
    """Ill-formed morphism or domain mismatch."""


@dataclass(frozen=True)
class Morphism:
    dom: CGraph
    cod: CGraph
    maps: tuple[tuple[int, ...], ...]

    def __call__(self, s: int, i: int) -> int:
        return self.maps[s][i]

    def validate(self) -> None:
        dom, cod = self.dom, self.cod
        if dom.sig is not cod.sig and dom.sig != cod.sig:
            raise MorphismError("domain and codomain signatures differ")
        sig = dom.sig
        for s in range(len(sig.objects)):
            if len(self.maps[s]) != dom.n(s):
                raise MorphismError(f"map on sort {sig.objects[s].name} is not total")
            targets = sig.arg_sorts(s)
            for i, j in enumerate(self.maps[s]):
                if not 0 <= j < cod.n(s):
                    raise MorphismError(
                        f"{dom.name_of(s, i)} maps outside the codomain"
                    )
                if dom.labels[s][i] != cod.labels[s][j]:
                    raise MorphismError(
                        f"{dom.name_of(s, i)} -> {cod.name_of(s, j)} breaks the label"
                    )
                for pos, t in enumerate(targets):
                    if self.maps[t][dom.args[s][i][pos]] != cod.args[s][j][pos]:
                        raise MorphismError(
                            f"{dom.name_of(s, i)} -> {cod.name_of(s, j)} does not "
                            f"commute with argument {pos}"
                        )


def identity(g: CGraph) -> Morphism:
    return Morphism(g, g, tuple(tuple(range(g.n(s))) for s in range(len(g.sig.objects))))


def compose(f: Morphism, g: Morphism) -> Morphism:
    """f after g."""
    if g.cod != f.dom:
        raise MorphismError("compose: cod(g) != dom(f)")
    return Morphism(
        g.dom,
        f.cod,
        tuple(tuple(f.maps[s][j] for j in g.maps[s]) for s in range(len(g.maps))),
    )


def image_elements(f: Morphism) -> set[tuple[int, int]]:
    return {(s, j) for s in range(len(f.maps)) for j in f.maps[s]}


def enumerate_homs(
    G: CGraph,
    H: CGraph,
    constraint: Optional[dict[tuple[int, int], int]] = None,
    mono_only: bool = False,
    fiber: Optional[tuple[Morphism, Morphism]] = None,
) -> list[Morphism]:
    """All homomorphisms G -> H in a deterministic order.

    constraint pins chosen elements: (sort, dom id) -> cod id.
    fiber = (p, q) with p: H -> Z, q: G -> Z restricts to morphisms h
    with p∘h = q (used for commuting-triangle and factorization counts).
    mono_only keeps only the per-sort injective ones.
    """
    sig = G.sig
    if H.sig != sig:
        raise MorphismError("graphs share no signature")
    if fiber is not None:
        p, q = fiber
        if p.dom != H or q.dom != G or p.cod != q.cod:
            raise MorphismError("fiber constraint does not match the graphs")
    if constraint:
        for (s, i), j in constraint.items():
            if not (0 <= i < G.n(s) and 0 <= j < H.n(s)):
                raise MorphismError("constraint out of range")
            if G.labels[s][i] != H.labels[s][j]:
                return []

    order = [s for s in sig.topo_order]
    maps: list[list[int]] = [[-1] * G.n(s) for s in range(len(sig.objects))]
    used: list[set[int]] = [set() for _ in sig.objects]
    out: list[Morphism] = []

    slots = [(s, i) for s in order for i in range(G.n(s))]

    def candidates(s: int, i: int) -> tuple[int, ...]:
        if sig.is_base(s):
            lab = G.labels[s][i]
            return H.tuple_index.get((s, (), lab), ())
        targets = sig.arg_sorts(s)
        tup = tuple(maps[t][a] for t, a in zip(targets, G.args[s][i]))
        return H.tuple_index.get((s, tup, G.labels[s][i]), ())

    def extend(k: int) -> None:
        if k == len(slots):
            out.append(
                Morphism(G, H, tuple(tuple(m) for m in maps))
            )
            return
        s, i = slots[k]
        pinned = constraint.get((s, i)) if constraint else None
        for j in candidates(s, i):
            if pinned is not None and j != pinned:
                continue
            if mono_only and j in used[s]:
                continue
            if fiber is not None and fiber[0].maps[s][j] != fiber[1].maps[s][i]:
                continue
            maps[s][i] = j
            if mono_only:
                used[s].add(j)
            extend(k + 1)
            if mono_only:
                used[s].discard(j)
            maps[s][i] = -1

    extend(0)
    return out


def classify_monicity(f: Morphism) -> dict[str, bool]:
    """monic: injective on every sort; regularMonic: additionally full
    on simple sorts (an element of a simple sort in the codomain whose
    arguments and label are realized inside the image has a preimage).
    """
    sig = f.dom.sig
    monic = all(len(set(f.maps[s])) == f.dom.n(s) for s in range(len(sig.objects)))
    regular = monic
    if monic and sig.has_simple:
        img = [set(f.maps[s]) for s in range(len(sig.objects))]
        for s, decl in enumerate(sig.objects):
            if not decl.simple or not regular:
                continue
            targets = sig.arg_sorts(s)
            for j in range(f.cod.n(s)):
                if j in img[s]:
                    continue
                if all(
                    f.cod.args[s][j][pos] in img[t] for pos, t in enumerate(targets)
                ):
                    regular = False
                    break
    return {"monic": monic, "regularMonic": regular and monic}


def is_x_monic(f: Morphism, X: CGraph, outside_of: Optional[Morphism] = None) -> bool:
    """f∘g = f∘h implies g = h for g, h: X -> dom(f); when outside_of=u
    is given, g and h range only over morphisms not factoring through u.
    """
    if outside_of is not None and outside_of.cod != f.dom:
        raise MorphismError("outside_of morphism must land in dom(f)")
    homs = enumerate_homs(X, f.dom)
    if outside_of is not None:
        homs = [g for g in homs if not factor_through(g, outside_of)]
    by_comp: dict[tuple, Morphism] = {}
    for g in homs:
        key = compose(f, g).maps
        if key in by_comp and by_comp[key] != g:
            return False
        by_comp[key] = g
    return True


def factor_through(x: Morphism, u: Morphism) -> list[Morphism]:
    """All z: dom(x) -> dom(u) with u∘z = x."""
    if x.cod != u.cod:
        raise MorphismError("factor_through: codomain mismatch")
    return enumerate_homs(x.dom, u.dom, fiber=(u, x))


def count_triangles(e: Morphism, phi: Morphism) -> int:
    """#{a: dom(e) -> dom(phi) | phi∘a = e}."""
    if e.cod != phi.cod:
        raise MorphismError("count_triangles: codomain mismatch")
    return len(enumerate_homs(e.dom, phi.dom, fiber=(phi, e)))
