from __future__ import annotations

import random

import pytest

from dpoterm.graph import (
    CGraph,
    GraphError,
    canonical_key,
    complete_type_graph,
    validate_instance,
)
from dpoterm.morphism import enumerate_homs
from dpoterm.signature import parse_signature

from conftest import GRAPH_SIG, LABELLED_SIG, SIMPLE_SIG, graph, random_graph


def test_validate_ok():
    g = graph(GRAPH_SIG, ["x", "y"], [("e", "x", "y")])
    validate_instance(g)


def test_validate_dangling():
    g = CGraph(GRAPH_SIG, (((),), ((0, 1),)), ((None,), (None,)))
    with pytest.raises(GraphError, match="dangling"):
        validate_instance(g)


def test_validate_simplicity():
    g = CGraph(
        SIMPLE_SIG,
        (((), ()), ((0, 1), (0, 1))),
        ((None, None), (None, None)),
    )
    with pytest.raises(GraphError, match="simplicity"):
        validate_instance(g)


def test_validate_label():
    g = CGraph(LABELLED_SIG, (((), ()), ((0, 1),)), ((None, None), ("nope",)))
    with pytest.raises(GraphError, match="label"):
        validate_instance(g)


def test_canonical_single_nodes():
    a = graph(GRAPH_SIG, ["x"])
    b = graph(GRAPH_SIG, ["different"])
    assert canonical_key(a) == canonical_key(b)


def test_canonical_path_reversal():
    a = graph(GRAPH_SIG, ["a", "b"], [("e", "a", "b")])
    b = graph(GRAPH_SIG, ["a", "b"], [("e", "b", "a")])
    assert canonical_key(a) == canonical_key(b)


def test_canonical_loop_vs_edge():
    loop = graph(GRAPH_SIG, ["a", "b"], [("e", "a", "a")])
    edge = graph(GRAPH_SIG, ["a", "b"], [("e", "a", "b")])
    assert canonical_key(loop) != canonical_key(edge)


def _permuted(g: CGraph, rng: random.Random) -> CGraph:
    sig = g.sig
    perms = {}
    for s in range(len(sig.objects)):
        p = list(range(g.n(s)))
        rng.shuffle(p)
        perms[s] = p  # perms[s][new] = old
    inv = {s: {old: new for new, old in enumerate(p)} for s, p in perms.items()}
    args = tuple(
        tuple(
            tuple(
                inv[t][g.args[s][old][pos]]
                for pos, t in enumerate(sig.arg_sorts(s))
            )
            for old in perms[s]
        )
        for s in range(len(sig.objects))
    )
    labels = tuple(
        tuple(g.labels[s][old] for old in perms[s]) for s in range(len(sig.objects))
    )
    return CGraph(sig, args, labels)


def _isomorphic(a: CGraph, b: CGraph) -> bool:
    if a.counts != b.counts:
        return False
    return any(
        all(len(set(h.maps[s])) == a.n(s) for s in range(len(a.sig.objects)))
        for h in enumerate_homs(a, b, mono_only=True)
    )


@pytest.mark.parametrize("sig", [GRAPH_SIG, LABELLED_SIG, SIMPLE_SIG])
def test_canonical_respects_iso(sig, rng):
    for _ in range(70):
        g = random_graph(sig, rng, max_base=3, max_per_sort=4)
        h = _permuted(g, rng)
        assert canonical_key(g) == canonical_key(h)


def test_canonical_separates_noniso(rng):
    graphs = [random_graph(GRAPH_SIG, rng, max_base=3, max_per_sort=3) for _ in range(40)]
    for i, a in enumerate(graphs):
        for b in graphs[i + 1 :]:
            same_key = canonical_key(a) == canonical_key(b)
            assert same_key == _isomorphic(a, b)


def test_complete_graph_flower():
    t = complete_type_graph(GRAPH_SIG, {"V": 1})
    assert t.counts == (1, 1)
    assert t.args[1][0] == (0, 0)


def test_complete_graph_two_nodes():
    t = complete_type_graph(GRAPH_SIG, {"V": 2})
    assert t.counts == (2, 4)


def test_complete_graph_labelled():
    sig = parse_signature("V edge[a,b](V,V)")
    t = complete_type_graph(sig, {"V": 2})
    assert t.counts == (2, 8)


def test_complete_graph_count_formula():
    sig = parse_signature("V edge[a,b](V,V) plus(V,V,V)! flag[x,y,z](V)")
    for n in (1, 2, 3):
        t = complete_type_graph(sig, {"V": n})
        # closed form: labels x tuples per non-base sort
        assert t.counts == (n, 2 * n * n, n**3, 3 * n)


def test_builder_errors():
    with pytest.raises(GraphError, match="unknown argument"):
        graph(GRAPH_SIG, ["x"], [("e", "x", "nope")])
    with pytest.raises(GraphError, match="duplicate element name"):
        graph(GRAPH_SIG, ["x", "x"])
