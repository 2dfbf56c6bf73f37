"""Dynamic validation of the static weighability assumptions.

Verified mode replays sampled rewrite steps of a certificate step's
rules against its weighted type graph and checks the decomposition
identity on the actual pushout squares: the left square must be exact,
the right square bounded above. A failure here would mean one of the
static admissibility arguments does not hold for the instance at hand,
so it is reported as a hard error.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .dpo import Framework, Rule, enumerate_matches, left_square, right_square
from .graph import CGraph, validate_instance
from .morphism import enumerate_homs
from .signature import IndexSignature
from .wtg import WeightedTypeGraph, verify_decomposition


@dataclass
class VerifyReport:
    steps_checked: int
    failures: tuple[str, ...]


def random_instance(sig: IndexSignature, rng: random.Random, max_base=4, max_elems=4) -> CGraph:
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
        want = rng.randint(0, max_elems)
        tries = 0
        while len(args[s]) < want and tries < 50:
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


def verify_step_decompositions(
    wtg: WeightedTypeGraph,
    rules: list[Rule],
    fw: Framework,
    seed: int,
    hosts: int = 12,
    max_steps: int = 40,
) -> VerifyReport:
    rng = random.Random(seed)
    sig = wtg.T.sig
    checked = 0
    failures: list[str] = []
    for _ in range(hosts):
        host = random_instance(sig, rng)
        for rule in rules:
            for m, diag in enumerate_matches(rule, host, fw):
                if checked >= max_steps:
                    return VerifyReport(checked, tuple(failures))
                checked += 1
                left = left_square(diag)
                right = right_square(diag)
                for phi in enumerate_homs(diag.G, wtg.T)[:3]:
                    got = verify_decomposition(wtg, left, phi)
                    if not got["exact"]:
                        failures.append(
                            f"left square of {rule.name} not exact: "
                            f"w={got['w']} bound={got['bound']}"
                        )
                for phi in enumerate_homs(diag.H, wtg.T)[:3]:
                    got = verify_decomposition(wtg, right, phi)
                    if not got["upper"]:
                        failures.append(
                            f"right square of {rule.name} not bounded: "
                            f"w={got['w']} bound={got['bound']}"
                        )
    return VerifyReport(checked, tuple(failures))
