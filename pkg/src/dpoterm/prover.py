"""Weighted-type-graph search and the relative-termination removal loop.

The structural candidate at base size n is the saturated graph; every
non-base element additionally ranges over an `absent` value, so the
search space is sparse subgraphs of the saturated graph with weights on
the surviving elements. All hom-sets into the saturated graph are
enumerated once up front; a masked assignment only filters them, which
keeps the inner loop free of graph algorithms.

Assignments are explored depth first inside growing cost tiers
(weights cost their magnitude, absence is free), so sparse low-weight
certificates are found quickly while exhaustion stays complete. Within
the successful tier the search then maximizes the number of removable
rules, which keeps removal loops short.
"""
from __future__ import annotations

import itertools
import re
import time
from dataclasses import dataclass, field
from typing import Optional

from . import semiring as sr
from .certificate import Certificate, CertStep, RuleEntry
from .dpo import Framework, Rule, check_rule_admissibility
from .graph import CGraph, complete_type_graph
from .morphism import Morphism, compose, enumerate_homs
from .semiring import SEMIRINGS, SemiringDescriptor
from .signature import IndexSignature, representable_shapes
from .sysfile import System, system_hash
from .wtg import detect_collapse_epi, flower_morphism, saturation_closure

DEFAULT_STRATEGY = (
    "repeat(arithmetic(size=2,bits=4,timeout=30) | "
    "tropical(size=2,bits=4,timeout=30) | arctic(size=2,bits=4,timeout=30))"
)

ABSENT = -1


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    size: int
    bits: int
    timeout_seconds: int

    def __post_init__(self):
        if self.size < 1 or self.bits < 1:
            raise StrategyError("size and bits must be >= 1")


@dataclass(frozen=True)
class Basic:
    kind: str
    budget: SearchBudget


@dataclass(frozen=True)
class Seq:
    children: tuple


@dataclass(frozen=True)
class Par:
    children: tuple


@dataclass(frozen=True)
class Repeat:
    child: object


_STRAT_TOKEN = re.compile(r"\s*([A-Za-z_]+|\d+|[();|,=])")


def parse_strategy(text: str):
    toks: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        m = _STRAT_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise StrategyError(f"bad strategy syntax at position {pos}")
            break
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    i = 0

    def err(msg: str):
        at = toks[i][1] if i < len(toks) else len(text)
        raise StrategyError(f"{msg} at position {at}")

    def expect(tok: str):
        nonlocal i
        if i >= len(toks) or toks[i][0] != tok:
            err(f"expected {tok!r}")
        i += 1

    def atom():
        nonlocal i
        if i >= len(toks):
            err("expected a strategy")
        t = toks[i][0]
        if t == "(":
            i += 1
            inner = seq()
            expect(")")
            return inner
        if t == "repeat":
            i += 1
            expect("(")
            inner = seq()
            expect(")")
            return Repeat(inner)
        if t in SEMIRINGS:
            i += 1
            expect("(")
            params: dict[str, int] = {}
            while True:
                if i >= len(toks):
                    err("unterminated parameter list")
                key = toks[i][0]
                i += 1
                expect("=")
                if i >= len(toks) or not toks[i][0].isdigit():
                    err("expected a number")
                params[key] = int(toks[i][0])
                i += 1
                if i < len(toks) and toks[i][0] == ",":
                    i += 1
                    continue
                break
            expect(")")
            missing = {"size", "bits", "timeout"} - set(params)
            if missing or set(params) - {"size", "bits", "timeout"}:
                err("basic strategies take size=, bits=, timeout=")
            return Basic(
                t, SearchBudget(params["size"], params["bits"], params["timeout"])
            )
        err(f"unknown strategy {t!r}")

    def par():
        nonlocal i
        node = atom()
        children = [node]
        while i < len(toks) and toks[i][0] == "|":
            i += 1
            children.append(atom())
        return children[0] if len(children) == 1 else Par(tuple(children))

    def seq():
        nonlocal i
        node = par()
        children = [node]
        while i < len(toks) and toks[i][0] == ";":
            i += 1
            children.append(par())
        return children[0] if len(children) == 1 else Seq(tuple(children))

    out = seq()
    if i != len(toks):
        err("trailing input")
    return out


@dataclass
class SearchOutcome:
    status: str  # found | exhausted | timeout
    step: Optional[CertStep] = None
    removed: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()


class _Timeout(Exception):
    pass


class _Budget(Exception):
    """Deterministic node cap for the removal-maximization phase."""


@dataclass
class _Cand:
    maps: tuple
    required: int
    tkc_cid: int
    monic_on_k: bool


class _Problem:
    """Everything precomputed for one (rules, framework, kind, size)."""

    def __init__(self, rules, fw: Framework, kind: SemiringDescriptor, bits: int, n: int):
        self.rules = rules
        self.fw = fw
        self.kind = kind
        self.bits = bits
        sig: IndexSignature = rules[0].left.sig
        self.sig = sig
        self.T = complete_type_graph(sig, {sig.objects[s].name: n for s in sig.base_sorts})
        T = self.T
        ns = len(sig.objects)
        self.offset = [0] * ns
        acc = 0
        for s in range(ns):
            self.offset[s] = acc
            acc += T.n(s)
        self.nvars = acc
        self.gid = lambda s, i: self.offset[s] + i
        # bit positions for maskable (non-base) elements
        self.bitpos = [-1] * acc
        bits_used = 0
        for s in range(ns):
            if sig.is_base(s):
                continue
            for i in range(T.n(s)):
                self.bitpos[self.offset[s] + i] = bits_used
                bits_used += 1
        self.nbits = bits_used

        shapes = representable_shapes(sig)
        self.admissible: dict[tuple[int, Optional[str]], bool] = {}
        for shape, gen in shapes:
            key = (gen.sort, shape.labels[gen.sort][gen.id])
            ok = all(
                check_rule_admissibility(r, fw, [(shape, gen)])["leftWeighable"]
                for r in rules
            )
            self.admissible[key] = ok

        neutral = sr.one(kind)
        weights = list(sr.legal_weight_values(kind, bits))
        self.neutral = neutral
        self.domain: list[list[int]] = []
        self.cost: list[dict[int, int]] = []
        self.wmax: list[int] = []
        for s in range(ns):
            for i in range(T.n(s)):
                adm = self.admissible.get((s, T.labels[s][i]), False)
                vals = list(weights) if adm else [neutral]
                self.wmax.append(max(vals))
                if not sig.is_base(s):
                    vals = vals + [ABSENT]
                self.domain.append(vals)
                self.cost.append(
                    {
                        v: 0
                        if v == ABSENT
                        else (v - 1 if kind.kind == "arithmetic" else v)
                        for v in vals
                    }
                )

        self._build_constraints()
        self._build_candidates()
        self._build_symmetry()
        self.epi = [detect_collapse_epi(r) for r in rules]
        # base weights first (they gate arithmetic growth arguments),
        # then non-base elements most-constrained first: occurrence count
        # over supports and exponents localizes refutations
        occurrence = [0] * self.nvars
        for c in self.constraints:
            for g in self._mask_gids(c[1]):
                occurrence[g] += 1
            for terms in (c[2], c[3]):
                for sup, exps in terms:
                    for g in self._mask_gids(sup):
                        occurrence[g] += 1
                    for g, _ in exps:
                        occurrence[g] += 1
        branchable = [v for v in range(self.nvars) if len(self.domain[v]) > 1]
        sort_of = [0] * self.nvars
        for s in range(len(sig.objects)):
            for i in range(T.n(s)):
                sort_of[self.offset[s] + i] = s
        self.var_order = sorted(
            branchable,
            key=lambda v: (not sig.is_base(sort_of[v]), -occurrence[v], v),
        )
        self.max_cost = sum(max(self.cost[v].values()) for v in branchable)

    def _build_symmetry(self):
        """One gid permutation per adjacent transposition of base
        elements; the DFS keeps only lex-leading assignments. Saturated
        graphs have exactly one element per (tuple, label), so the
        induced permutation always exists."""
        sig, T = self.sig, self.T
        self.sym_perms: list[tuple[int, ...]] = []
        for s in sig.base_sorts:
            for i in range(T.n(s) - 1):
                elem_map: dict[int, list[int]] = {}
                for t in sig.topo_order:
                    if sig.is_base(t):
                        elem_map[t] = list(range(T.n(t)))
                        if t == s:
                            elem_map[t][i], elem_map[t][i + 1] = i + 1, i
                        continue
                    targets = sig.arg_sorts(t)
                    elem_map[t] = [
                        T.tuple_index[
                            (
                                t,
                                tuple(
                                    elem_map[u][a]
                                    for u, a in zip(targets, T.args[t][j])
                                ),
                                T.labels[t][j],
                            )
                        ][0]
                        for j in range(T.n(t))
                    ]
                perm = [0] * self.nvars
                for t in range(len(sig.objects)):
                    for j in range(T.n(t)):
                        perm[self.offset[t] + j] = self.offset[t] + elem_map[t][j]
                self.sym_perms.append(tuple(perm))

    def _mask_gids(self, mask: int):
        out = []
        while mask:
            low = mask & -mask
            b = low.bit_length() - 1
            out.append(self._bit_to_gid[b])
            mask ^= low
        return out

    def _image_mask(self, mor: Morphism) -> int:
        m = 0
        for s in range(len(self.sig.objects)):
            for j in mor.maps[s]:
                b = self.bitpos[self.offset[s] + j]
                if b >= 0:
                    m |= 1 << b
        return m

    def _build_constraints(self):
        sig, T = self.sig, self.T
        self._bit_to_gid = [0] * self.nbits
        for g in range(self.nvars):
            if self.bitpos[g] >= 0:
                self._bit_to_gid[self.bitpos[g]] = g
        # constraint: (rule_idx, tk_support, L_terms, R_terms, tk_maps)
        self.constraints: list[tuple] = []
        self.rule_cids: list[list[int]] = []
        self.tk_index: list[dict[tuple, int]] = []
        for ri, rule in enumerate(self.rules):
            cids = []
            index = {}
            for t_k in enumerate_homs(rule.interface, T):
                tk_sup = self._image_mask(t_k)
                terms_by_side = []
                for side in (rule.l, rule.r):
                    constraint = {}
                    ok = True
                    for s in range(len(sig.objects)):
                        for kk in range(rule.interface.n(s)):
                            y, t = side.maps[s][kk], t_k.maps[s][kk]
                            if constraint.get((s, y), t) != t:
                                ok = False
                            constraint[(s, y)] = t
                    terms = []
                    if ok:
                        for t_y in enumerate_homs(side.cod, T, constraint=constraint):
                            sup = self._image_mask(t_y)
                            exps: dict[int, int] = {}
                            for s in range(len(sig.objects)):
                                lab_row = side.cod.labels[s]
                                for i, j in enumerate(t_y.maps[s]):
                                    g = self.offset[s] + j
                                    if self.admissible.get((s, lab_row[i]), False):
                                        exps[g] = exps.get(g, 0) + 1
                            terms.append((sup, tuple(sorted(exps.items()))))
                    terms_by_side.append(tuple(terms))
                cid = len(self.constraints)
                self.constraints.append(
                    (ri, tk_sup, terms_by_side[0], terms_by_side[1], t_k.maps)
                )
                cids.append(cid)
                index[t_k.maps] = cid
            self.rule_cids.append(cids)
            self.tk_index.append(index)

    def _build_candidates(self):
        sig, T = self.sig, self.T
        fbases = []
        slots = []
        for s in sig.base_sorts:
            for lab in sig.element_labels(s):
                ids = [i for i in range(T.n(s)) if T.labels[s][i] == lab]
                slots.append(((s, lab), ids))
        for combo in itertools.product(*(ids for _, ids in slots)):
            fbases.append({key: i for (key, _), i in zip(slots, combo)})
        self.cands: list[list[_Cand]] = []
        for ri, rule in enumerate(self.rules):
            cands: dict[tuple, _Cand] = {}
            if self.fw.match_class == "unrestricted":
                cs = []
                for fb in fbases:
                    c = flower_morphism(rule.left, T, fb)
                    if c is not None:
                        cs.append((c, fb))
            else:
                cs = [(c, None) for c in enumerate_homs(rule.left, T)]
            for c, fb in cs:
                image = {
                    (s, j) for s in range(len(sig.objects)) for j in c.maps[s]
                }
                best_req = None
                for fb2 in [fb] if fb is not None else fbases:
                    start = image | {(s, i) for (s, _), i in fb2.items()}
                    sat = saturation_closure(T, start)
                    if sat is None:
                        continue
                    req = 0
                    for s, i in sat:
                        b = self.bitpos[self.offset[s] + i]
                        if b >= 0:
                            req |= 1 << b
                    if best_req is None or bin(req).count("1") < bin(best_req).count("1"):
                        best_req = req
                if best_req is None:
                    continue
                tkc = compose(c, rule.l).maps
                cid = self.tk_index[ri].get(tkc)
                if cid is None:
                    continue
                lk_monic = all(
                    len({c.maps[s][rule.l.maps[s][k]] for k in range(rule.interface.n(s))})
                    == rule.interface.n(s)
                    for s in range(len(sig.objects))
                )
                key = (c.maps, best_req)
                if key not in cands:
                    cands[key] = _Cand(c.maps, best_req, cid, lk_monic)
            ordered = sorted(
                cands.values(), key=lambda cd: (not cd.monic_on_k, cd.maps)
            )
            self.cands.append(ordered)


# constraint state tuple: (weak_p, strict_p, both_p, def_active, dead)
_VACUOUS = (True, True, True, False, True)


class _Search:
    def __init__(self, problem: _Problem, deadline: Optional[float]):
        self.p = problem
        self.deadline = deadline
        self.kindcode = {"arithmetic": 0, "tropical": 1, "arctic": 2}[problem.kind.kind]
        self.val: list[Optional[int]] = [None] * problem.nvars
        for v in range(problem.nvars):
            if len(problem.domain[v]) == 1:
                self.val[v] = problem.domain[v][0]
        self.absent_mask = 0
        self.undecided_mask = 0
        for g in range(problem.nvars):
            b = problem.bitpos[g]
            if b >= 0 and self.val[g] is None:
                self.undecided_mask |= 1 << b
        # flat constraint table: (rule, tk support, L terms, R terms) with
        # term = (support, exp gids, exp coeffs, undecided max part)
        self.cons = []
        for ri, tk_sup, lterms, rterms, _tk in problem.constraints:
            self.cons.append(
                (ri, tk_sup, self._compile_terms(lterms), self._compile_terms(rterms))
            )
        self.var_cids: list[list[int]] = [[] for _ in range(problem.nvars)]
        # occurrences for the relevance test: (cid, None) when the var is
        # in the t_K support, else (cid, term support mask)
        self.var_occ: list[list[tuple]] = [[] for _ in range(problem.nvars)]
        for cid, c in enumerate(problem.constraints):
            touched = set(problem._mask_gids(c[1]))
            for g in touched:
                self.var_occ[g].append((cid, None))
            for terms in (c[2], c[3]):
                for sup, exps in terms:
                    term_gids = set(problem._mask_gids(sup))
                    term_gids.update(g for g, _ in exps)
                    for g in term_gids:
                        self.var_occ[g].append((cid, sup))
                    touched.update(term_gids)
            for g in touched:
                self.var_cids[g].append(cid)
        self.var_cands: list[list] = [[] for _ in range(problem.nvars)]
        for ri, cands in enumerate(problem.cands):
            for cand in cands:
                for g in problem._mask_gids(cand.required):
                    self.var_cands[g].append(cand)
        self.cstate = [None] * len(problem.constraints)
        nr = len(problem.rules)
        self.weak_blocked = [0] * nr
        self.uniform_blocked = [0] * nr
        for cid in range(len(problem.constraints)):
            self._set_state(cid, self._eval(cid))
        self.nodes = 0

    def _compile_terms(self, terms):
        out = []
        for sup, exps in terms:
            gids = tuple(g for g, _ in exps)
            coeffs = tuple(e for _, e in exps)
            out.append((sup, gids, coeffs))
        return tuple(out)

    # --- constraint evaluation ---------------------------------------

    def _side(self, terms, absent, undecided, val, kc, wmax):
        """(minpos, maxpos, emptyable) over the side's live terms."""
        INF = sr.POS_INF
        if kc == 0:
            minpos = 0
            maxpos = 0
        elif kc == 1:
            minpos = INF
            maxpos = INF
        else:
            minpos = -INF
            maxpos = -INF
        emptyable = True
        for sup, gids, coeffs in terms:
            if sup & absent:
                continue
            tdef = not (sup & undecided)
            if tdef:
                emptyable = False
            if kc == 0:
                lo = 1
                hi = 1
                for i, g in enumerate(gids):
                    v = val[g]
                    if v is None:
                        hi *= wmax[g] ** coeffs[i]
                    else:
                        w = v ** coeffs[i]
                        lo *= w
                        hi *= w
                maxpos += hi
                if tdef:
                    minpos += lo
            else:
                lo = 0
                hi = 0
                for i, g in enumerate(gids):
                    v = val[g]
                    if v is None:
                        hi += wmax[g] * coeffs[i]
                    else:
                        w = v * coeffs[i]
                        lo += w
                        hi += w
                if kc == 1:
                    if lo < minpos:
                        minpos = lo
                    if tdef and hi < maxpos:
                        maxpos = hi
                else:
                    if tdef and lo > minpos:
                        minpos = lo
                    if hi > maxpos:
                        maxpos = hi
        return minpos, maxpos, emptyable

    def _eval(self, cid):
        val = self.val
        absent = self.absent_mask
        undecided = self.undecided_mask
        ri, tk_sup, lterms, rterms = self.cons[cid]
        if tk_sup & absent:
            return _VACUOUS
        def_active = not (tk_sup & undecided)
        kc = self.kindcode
        wmax = self.p.wmax
        INF = sr.POS_INF
        lmin, lmax, lempty = self._side(lterms, absent, undecided, val, kc, wmax)
        rmin, rmax, rempty = self._side(rterms, absent, undecided, val, kc, wmax)
        if kc == 0:
            l_top, r_bot = lmax, rmin
        elif kc == 1:
            l_top = INF if lempty else lmax
            r_bot = rmin
        else:
            l_top = lmax
            r_bot = -INF if rempty else rmin
        return (l_top >= r_bot, l_top > r_bot, lempty and rempty, def_active, False)

    def _set_state(self, cid, state):
        old = self.cstate[cid]
        ri = self.p.constraints[cid][0]
        if old is not None:
            if old[3] and not old[0]:
                self.weak_blocked[ri] -= 1
            if old[3] and not (old[1] or old[2]):
                self.uniform_blocked[ri] -= 1
        self.cstate[cid] = state
        if state[3] and not state[0]:
            self.weak_blocked[ri] += 1
        if state[3] and not (state[1] or state[2]):
            self.uniform_blocked[ri] += 1

    # --- rule feasibility ---------------------------------------------

    def _removable_possible(self, ri) -> bool:
        p = self.p
        if p.epi[ri] and p.kind.kind in ("arithmetic", "arctic"):
            return False
        uniform_ok = self.uniform_blocked[ri] == 0
        weak_ok = self.weak_blocked[ri] == 0
        closure_dec_ok = weak_ok and p.kind.strictly_monotonic
        if not (uniform_ok or closure_dec_ok):
            return False
        absent = self.absent_mask
        for cand in p.cands[ri]:
            if cand.required & absent:
                continue
            if self.cstate[cand.tkc_cid][1]:
                return True
        return False

    def _prune(self, target: int) -> bool:
        removable = 0
        for ri in range(len(self.p.rules)):
            if self._removable_possible(ri):
                removable += 1
            elif self.weak_blocked[ri] > 0:
                return True
        return removable < target

    # --- leaf extraction ------------------------------------------------

    def _leaf(self, target: int):
        p = self.p
        entries = []
        removed = []
        for ri, rule in enumerate(p.rules):
            uniform_ok = self.uniform_blocked[ri] == 0
            weak_ok = self.weak_blocked[ri] == 0
            blocked = p.epi[ri] and p.kind.kind in ("arithmetic", "arctic")
            chosen = None
            if not blocked:
                for cand in p.cands[ri]:
                    if cand.required & self.absent_mask:
                        continue
                    if not self.cstate[cand.tkc_cid][1]:
                        continue
                    if uniform_ok:
                        chosen = (cand, "uniform")
                        break
                    if weak_ok and p.kind.strictly_monotonic:
                        chosen = (cand, "closureDecreasing")
                        break
            if chosen is not None:
                removed.append(ri)
                entries.append((rule.name, chosen[1], chosen[0]))
            elif weak_ok:
                entries.append((rule.name, "weak", None))
            else:
                return None
        if len(removed) < max(1, target):
            return None
        return entries, removed

    # --- DFS -------------------------------------------------------------

    def run(self, tier: int, target: int, node_limit: Optional[int] = None):
        self.found = None
        self.node_stop = self.nodes + node_limit if node_limit else None
        self._dfs(0, 0, tier, target)
        return self.found

    def _sym_ok(self) -> bool:
        """Lex-leader pruning: the assignment, read along the variable
        order, must not be strictly above any of its transposition
        images (undecided positions end the comparison)."""
        val = self.val
        order = self.p.var_order
        for perm in self.p.sym_perms:
            for v in order:
                a = val[v]
                b = val[perm[v]]
                if a is None or b is None:
                    break
                if a == b:
                    continue
                # absent ranks above every weight
                ka = (a == ABSENT, a)
                kb = (b == ABSENT, b)
                if ka > kb:
                    return False
                break
        return True

    def _relevant(self, v: int) -> bool:
        """A variable whose every occurrence sits in a dead term or a
        vacuous constraint, and that no feasible closure still requires,
        cannot influence anything; it is fixed without branching."""
        cstate = self.cstate
        absent = self.absent_mask
        for cid, tsup in self.var_occ[v]:
            if cstate[cid][4]:
                continue
            if tsup is None or not (tsup & absent):
                return True
        for cand in self.var_cands[v]:
            if not cand.required & absent:
                return True
        return False

    def _dfs(self, depth: int, cost: int, tier: int, target: int):
        if self.found is not None:
            return
        self.nodes += 1
        if self.node_stop is not None and self.nodes > self.node_stop:
            raise _Budget
        if self.nodes % 2048 == 0 and self.deadline is not None:
            if time.monotonic() > self.deadline:
                raise _Timeout
        p = self.p
        if depth == len(p.var_order):
            got = self._leaf(target)
            if got is not None:
                self.found = (got[0], got[1], list(self.val))
            return
        v = p.var_order[depth]
        bit = p.bitpos[v]
        if not self._relevant(v):
            values = (ABSENT,) if bit >= 0 else (p.neutral,)
        else:
            values = p.domain[v]
        for value in values:
            extra = p.cost[v][value]
            if cost + extra > tier:
                continue
            self.val[v] = value
            if bit >= 0:
                self.undecided_mask &= ~(1 << bit)
                if value == ABSENT:
                    self.absent_mask |= 1 << bit
            saved = []
            for cid in self.var_cids[v]:
                saved.append((cid, self.cstate[cid]))
                self._set_state(cid, self._eval(cid))
            if self._sym_ok() and not self._prune(target):
                self._dfs(depth + 1, cost + extra, tier, target)
            for cid, old in reversed(saved):
                self._set_state(cid, old)
            self.val[v] = None
            if bit >= 0:
                self.undecided_mask |= 1 << bit
                if value == ABSENT:
                    self.absent_mask &= ~(1 << bit)
            if self.found is not None:
                return


def _tiers(max_cost: int):
    # small tiers find the sparse published-style certificates quickly;
    # anything heavier is rare enough that one unbounded walk beats
    # re-walking an almost-full tree per tier on unsatisfiable instances
    out = [0, 1, 2, 3, 4, 5, 6, 8, max_cost]
    return [b for i, b in enumerate(out) if b <= max_cost and (i == 0 or b > out[i - 1])]


def _masked_step(problem: _Problem, entries, removed, val) -> CertStep:
    """Materialize the pruned type graph and certificate entries."""
    p = problem
    sig, T = p.sig, p.T
    keep = []
    new_id: list[dict[int, int]] = [dict() for _ in sig.objects]
    args: list[list[tuple[int, ...]]] = [[] for _ in sig.objects]
    labels: list[list[Optional[str]]] = [[] for _ in sig.objects]
    for s in range(len(sig.objects)):
        for i in range(T.n(s)):
            if val[p.offset[s] + i] == ABSENT:
                continue
            new_id[s][i] = len(args[s])
            args[s].append(
                tuple(
                    new_id[t][a]
                    for t, a in zip(sig.arg_sorts(s), T.args[s][i])
                )
            )
            labels[s].append(T.labels[s][i])
    masked = CGraph(
        sig, tuple(tuple(a) for a in args), tuple(tuple(l) for l in labels)
    )
    elements = []
    for s in range(len(sig.objects)):
        for i in range(T.n(s)):
            v = val[p.offset[s] + i]
            if v in (ABSENT, None, p.neutral):
                continue
            elements.append(
                (sig.objects[s].name, masked.name_of(s, new_id[s][i]), v)
            )
    rule_entries = []
    removed_names = []
    for name, classification, cand in entries:
        closure = None
        if cand is not None:
            rule = next(r for r in p.rules if r.name == name)
            pairs = []
            for s in range(len(sig.objects)):
                for i in range(rule.left.n(s)):
                    pairs.append(
                        (
                            rule.left.name_of(s, i),
                            masked.name_of(s, new_id[s][cand.maps[s][i]]),
                        )
                    )
            closure = tuple(sorted(pairs))
            removed_names.append(name)
        rule_entries.append(RuleEntry(name, classification, closure))
    return CertStep(
        p.kind.kind, masked, tuple(elements), tuple(rule_entries), tuple(removed_names)
    )


def search_wtg(
    rules, fw: Framework, kind: SemiringDescriptor, budget: SearchBudget
) -> SearchOutcome:
    """Search saturated type graphs of base size 1..budget.size for an
    assignment removing at least one rule; deterministic and complete
    within the budget."""
    if not rules:
        return SearchOutcome("exhausted")
    warnings = []
    for r in rules:
        if detect_collapse_epi(r):
            warnings.append(
                f"rule {r.name} folds its right side onto its left "
                f"(e∘r = l for an epimorphism e); it cannot decrease strictly "
                f"over the arithmetic or arctic semiring"
            )
    deadline = time.monotonic() + budget.timeout_seconds
    timed_out = False
    for n in range(1, budget.size + 1):
        problem = _Problem(rules, fw, kind, budget.bits, n)
        search = _Search(problem, deadline)
        try:
            best = None
            for tier in _tiers(problem.max_cost):
                found = search.run(tier, target=1)
                if found is not None:
                    best = found
                    # prefer removing more rules per step; allow slightly
                    # heavier certificates for that, bounded by a node
                    # budget so the outcome stays deterministic
                    cap = min(tier + 2, problem.max_cost)
                    target = len(found[1]) + 1
                    try:
                        while target <= len(rules):
                            more = search.run(cap, target=target, node_limit=400_000)
                            if more is None:
                                break
                            best = more
                            target = len(more[1]) + 1
                    except (_Budget, _Timeout):
                        pass
                    break
            if best is not None:
                entries, removed, val = best
                step = _masked_step(problem, entries, removed, val)
                return SearchOutcome(
                    "found", step, step.removed, tuple(warnings)
                )
        except _Timeout:
            timed_out = True
            break
    return SearchOutcome("timeout" if timed_out else "exhausted", warnings=tuple(warnings))


# --- strategy interpretation ---------------------------------------------


@dataclass
class ProveResult:
    certificate: Certificate
    warnings: tuple[str, ...]


def _s1_done(system: System, remaining) -> bool:
    rel = system.relative
    return all(r.name in rel for r in remaining)


def _interp(node, system: System, remaining, steps, warnings) -> tuple[bool, list]:
    """Returns (success, remaining) and appends certificate steps."""
    if _s1_done(system, remaining):
        return False, remaining
    if isinstance(node, Basic):
        outcome = search_wtg(
            tuple(remaining), system.framework, SEMIRINGS[node.kind], node.budget
        )
        warnings.extend(w for w in outcome.warnings if w not in warnings)
        if outcome.status != "found":
            return False, remaining
        steps.append(outcome.step)
        left = [r for r in remaining if r.name not in outcome.removed]
        return True, left
    if isinstance(node, Seq):
        ok = False
        for child in node.children:
            good, remaining = _interp(child, system, remaining, steps, warnings)
            ok = ok or good
        return ok, remaining
    if isinstance(node, Par):
        for child in node.children:
            good, after = _interp(child, system, remaining, steps, warnings)
            if good:
                return True, after
        return False, remaining
    if isinstance(node, Repeat):
        ok = False
        while True:
            good, remaining = _interp(node.child, system, remaining, steps, warnings)
            if not good:
                return ok, remaining
            ok = True
            if _s1_done(system, remaining):
                return ok, remaining
    raise StrategyError(f"unknown strategy node {node!r}")


def run_strategy(system: System, strategy) -> ProveResult:
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy)
    steps: list[CertStep] = []
    warnings: list[str] = []
    remaining = list(system.rules)
    _, remaining = _interp(strategy, system, remaining, steps, warnings)
    left_names = tuple(sorted(r.name for r in remaining))
    if not remaining:
        verdict = "terminating"
    elif all(r.name in system.relative for r in remaining):
        verdict = "relatively-terminating"
    else:
        verdict = "failed"
    cert = Certificate(system_hash(system), tuple(steps), verdict, left_names)
    return ProveResult(cert, tuple(warnings))


# --- SMT-LIB export --------------------------------------------------------


def emit_smtlib(rules, fw: Framework, kind: SemiringDescriptor, size: int, bits: int = 4) -> str:
    """Solver-agnostic encoding of one search level: presence booleans
    per non-base element, integer weights per admissible element, weak
    decrease everywhere and strict decrease at some closure t_K."""
    if not rules:
        return "(set-logic ALL)\n(check-sat)\n"
    problem = _Problem(tuple(rules), fw, kind, bits, size)
    p = problem
    out = ["(set-logic ALL)"]
    pres: dict[int, str] = {}
    wvar: dict[int, str] = {}
    for g in range(p.nvars):
        if p.bitpos[g] >= 0:
            pres[g] = f"p{g}"
            out.append(f"(declare-const p{g} Bool)")
        if len([v for v in p.domain[g] if v != ABSENT]) > 1:
            wvar[g] = f"w{g}"
            out.append(f"(declare-const w{g} Int)")
            lo = 1 if kind.kind == "arithmetic" else 0
            hi = 2**bits if kind.kind == "arithmetic" else 2**bits - 1
            out.append(f"(assert (and (>= w{g} {lo}) (<= w{g} {hi})))")

    def weight(g: int) -> str:
        return wvar.get(g, str(p.neutral))

    def term_active(sup: int) -> str:
        bits_on = [f"p{g}" for g in p._mask_gids(sup)]
        return "(and true " + " ".join(bits_on) + ")" if bits_on else "true"

    def term_value(exps) -> str:
        if kind.kind == "arithmetic":
            parts = []
            for g, e in exps:
                parts.extend([weight(g)] * e)
            return "(* 1 " + " ".join(parts) + ")" if parts else "1"
        parts = [f"(* {e} {weight(g)})" for g, e in exps]
        return "(+ 0 " + " ".join(parts) + ")" if parts else "0"

    def side_cmp(lterms, rterms, strict: bool) -> str:
        op = ">" if strict else ">="
        if kind.kind == "arithmetic":
            def total(terms):
                parts = [
                    f"(ite {term_active(sup)} {term_value(exps)} 0)"
                    for sup, exps in terms
                ]
                return "(+ 0 " + " ".join(parts) + ")" if parts else "0"

            return f"({op} {total(lterms)} {total(rterms)})"
        # tropical: min-plus; arctic: max-plus, encoded by witnesses
        def empty(terms):
            if not terms:
                return "true"
            return "(and " + " ".join(f"(not {term_active(s)})" for s, _ in terms) + ")"

        if kind.kind == "tropical":
            # min_L > min_R  iff  exists active r below every active l
            # weak: min_L >= min_R iff L empty or such an r with <=
            cmps = []
            for rs, rexp in rterms:
                inner = [
                    f"(=> {term_active(ls)} ({'<' if strict else '<='} {term_value(rexp)} {term_value(lexp)}))"
                    for ls, lexp in lterms
                ]
                body = "(and true " + " ".join(inner) + ")"
                cmps.append(f"(and {term_active(rs)} {body})")
            witness = "(or false " + " ".join(cmps) + ")" if cmps else "false"
            if strict:
                return f"(or (and {empty(lterms)} (not {empty(rterms)})) {witness})"
            return f"(or {empty(lterms)} {witness})"
        # arctic: max_L >= max_R iff R empty or exists active l above all r
        cmps = []
        for ls, lexp in lterms:
            inner = [
                f"(=> {term_active(rs)} ({'>' if strict else '>='} {term_value(lexp)} {term_value(rexp)}))"
                for rs, rexp in rterms
            ]
            body = "(and true " + " ".join(inner) + ")"
            cmps.append(f"(and {term_active(ls)} {body})")
        witness = "(or false " + " ".join(cmps) + ")" if cmps else "false"
        if strict:
            return f"(and (not {empty(lterms)}) (or {empty(rterms)} {witness}))"
        return f"(or {empty(rterms)} {witness})"

    for ri, tk_sup, lterms, rterms, _tk in p.constraints:
        guard = term_active(tk_sup)
        out.append(f"(assert (=> {guard} {side_cmp(lterms, rterms, False)}))")
    strict_opts = []
    for ri in range(len(p.rules)):
        for cand in p.cands[ri]:
            req = term_active(cand.required)
            _, tk_sup, lterms, rterms, _tk = p.constraints[cand.tkc_cid]
            strict_opts.append(
                f"(and {req} {side_cmp(lterms, rterms, True)})"
            )
    out.append(
        "(assert (or false " + " ".join(strict_opts) + "))"
        if strict_opts
        else "(assert false)"
    )
    out.append("(check-sat)")
    out.append("(get-model)")
    return "\n".join(out) + "\n"
