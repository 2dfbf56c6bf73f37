from __future__ import annotations

import random

import pytest

from dpoterm.graph import CGraph, validate_instance
from dpoterm.morphism import Morphism
from dpoterm.signature import parse_signature

GRAPH_SIG = parse_signature("V edge(V,V)")
LABELLED_SIG = parse_signature("V edge[a,b,c,d](V,V)")
SIMPLE_SIG = parse_signature("V edge(V,V)!")


def graph(sig, nodes, edges=(), sort="edge"):
    """Small builder: nodes is a name list, edges are (name, src, dst)
    or (name, label, src, dst) rows."""
    rows = [("V", n, None, ()) for n in nodes]
    for e in edges:
        if len(e) == 3:
            name, src, dst = e
            label = None
        else:
            name, label, src, dst = e
        rows.append((sort, name, label, (src, dst)))
    return CGraph.build(sig, rows)


def named_map(dom: CGraph, cod: CGraph, assignment: dict[str, str]) -> Morphism:
    """Morphism from element-name pairs; every dom element must appear."""
    cod_ids = {}
    for s in range(len(cod.sig.objects)):
        for i in range(cod.n(s)):
            cod_ids[cod.name_of(s, i)] = (s, i)
    maps = []
    for s in range(len(dom.sig.objects)):
        row = []
        for i in range(dom.n(s)):
            tgt = assignment[dom.name_of(s, i)]
            ts, ti = cod_ids[tgt]
            assert ts == s, f"{dom.name_of(s, i)} mapped across sorts"
            row.append(ti)
        maps.append(tuple(row))
    m = Morphism(dom, cod, tuple(maps))
    m.validate()
    return m


def random_graph(sig, rng: random.Random, max_base=4, max_per_sort=5) -> CGraph:
    args = [[] for _ in sig.objects]
    labels = [[] for _ in sig.objects]
    for s in sig.base_sorts:
        for _ in range(rng.randint(1, max_base)):
            args[s].append(())
            labels[s].append(None)
    for s in sig.topo_order:
        if sig.is_base(s):
            continue
        targets = sig.arg_sorts(s)
        want = rng.randint(0, max_per_sort)
        tries = 0
        while len(args[s]) < want and tries < 40:
            tries += 1
            tup = tuple(rng.randrange(len(args[t])) for t in targets)
            lab = rng.choice(sig.element_labels(s))
            if sig.objects[s].simple and any(
                a == tup and l == lab for a, l in zip(args[s], labels[s])
            ):
                continue
            args[s].append(tup)
            labels[s].append(lab)
    g = CGraph(sig, tuple(tuple(a) for a in args), tuple(tuple(l) for l in labels))
    validate_instance(g)
    return g


def random_host_containing(pattern: CGraph, rng: random.Random, extra_base=2, extra_elems=3) -> CGraph:
    """A random graph that embeds the pattern (its elements come first)."""
    sig = pattern.sig
    args = [list(pattern.args[s]) for s in range(len(sig.objects))]
    labels = [list(pattern.labels[s]) for s in range(len(sig.objects))]
    for s in sig.base_sorts:
        for _ in range(rng.randint(0, extra_base)):
            args[s].append(())
            labels[s].append(None)
    for s in sig.topo_order:
        if sig.is_base(s):
            continue
        targets = sig.arg_sorts(s)
        tries = 0
        want = rng.randint(0, extra_elems)
        added = 0
        while added < want and tries < 30:
            tries += 1
            tup = tuple(rng.randrange(len(args[t])) for t in targets)
            lab = rng.choice(sig.element_labels(s))
            if sig.objects[s].simple and any(
                a == tup and l == lab for a, l in zip(args[s], labels[s])
            ):
                continue
            args[s].append(tup)
            labels[s].append(lab)
            added += 1
    g = CGraph(sig, tuple(tuple(a) for a in args), tuple(tuple(l) for l in labels))
    validate_instance(g)
    return g


@pytest.fixture
def rng():
    return random.Random(0xD1CE)
