"""System files: the textual input format and its round-trip.

Grammar (line oriented, '#' comments, blank lines ignored):

    signature
      V
      edge[a,b](V, V)!
    end

    graph NAME
      SORT name [label] (arg, ...)      # [label] and (args) when the sort has them
    end

    rule NAME
      L = GRAPHNAME
      K = GRAPHNAME
      R = GRAPHNAME
      l = { kelem -> lelem, ... }
      r = { kelem -> relem, ... }
    end

    framework unrestricted|monic|regular-monic
    relative { rulename ... }           # optional: rules proved only weakly decreasing
    strategy "..."                      # optional
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from .dpo import Framework, MATCH_CLASSES, Rule
from .graph import CGraph, canonical_key
from .morphism import Morphism, MorphismError
from .signature import IndexSignature, parse_signature


class SystemParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass
class System:
    sig: IndexSignature
    graphs: dict[str, CGraph]
    rules: tuple[Rule, ...]
    framework: Framework
    relative: frozenset[str] = frozenset()
    strategy: Optional[str] = None

    def s1_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rules if r.name not in self.relative)


_ELEM = re.compile(
    r"^(?P<sort>[\w'-]+)\s+(?P<name>[\w'-]+)"
    r"(?:\s*\[(?P<label>[\w'-]+)\])?"
    r"(?:\s*\((?P<args>[^)]*)\))?\s*$"
)
_MAP_PAIR = re.compile(r"([\w'-]+)\s*(?:->|↦)\s*([\w'-]+)")


def _parse_graph_block(sig, lines, start) -> CGraph:
    rows = []
    for text, lineno in lines:
        m = _ELEM.match(text)
        if not m:
            raise SystemParseError(f"bad element line {text!r}", lineno)
        args = tuple(a for a in re.split(r"[,\s]+", m.group("args") or "") if a)
        try:
            sig.sort(m.group("sort"))
        except Exception:
            raise SystemParseError(f"unknown sort {m.group('sort')!r}", lineno)
        rows.append((m.group("sort"), m.group("name"), m.group("label"), args))
    try:
        return CGraph.build(sig, rows)
    except Exception as e:
        raise SystemParseError(str(e), start)


def _parse_map(text: str, lineno: int) -> dict[str, str]:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise SystemParseError("map must be written as { a -> b, ... }", lineno)
    inner = body[1:-1].strip()
    out: dict[str, str] = {}
    if not inner:
        return out
    consumed = 0
    for m in _MAP_PAIR.finditer(inner):
        out[m.group(1)] = m.group(2)
        consumed += 1
    if consumed != len([p for p in inner.split(",") if p.strip()]):
        raise SystemParseError(f"bad map syntax in {text!r}", lineno)
    return out


def _names_to_morphism(dom: CGraph, cod: CGraph, pairs: dict[str, str], lineno: int) -> Morphism:
    cod_ids: dict[str, tuple[int, int]] = {}
    for s in range(len(cod.sig.objects)):
        for i in range(cod.n(s)):
            cod_ids[cod.name_of(s, i)] = (s, i)
    maps = []
    for s in range(len(dom.sig.objects)):
        row = []
        for i in range(dom.n(s)):
            name = dom.name_of(s, i)
            if name not in pairs:
                raise SystemParseError(f"map misses interface element {name!r}", lineno)
            tgt = pairs[name]
            if tgt not in cod_ids:
                raise SystemParseError(f"map target {tgt!r} does not exist", lineno)
            ts, ti = cod_ids[tgt]
            if ts != s:
                raise SystemParseError(
                    f"{name!r} is mapped across sorts to {tgt!r}", lineno
                )
            row.append(ti)
        maps.append(tuple(row))
    mor = Morphism(dom, cod, tuple(maps))
    try:
        mor.validate()
    except MorphismError as e:
        raise SystemParseError(str(e), lineno)
    return mor


def parse_system_file(text: str) -> System:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            lines.append((body.strip(), lineno))

    sig: Optional[IndexSignature] = None
    graphs: dict[str, CGraph] = {}
    rules: list[Rule] = []
    framework: Optional[Framework] = None
    relative: frozenset[str] = frozenset()
    strategy: Optional[str] = None

    i = 0

    def block(i: int) -> tuple[list[tuple[str, int]], int]:
        body = []
        while i < len(lines) and lines[i][0] != "end":
            body.append(lines[i])
            i += 1
        if i == len(lines):
            raise SystemParseError("unterminated block", body[0][1] if body else 1)
        return body, i + 1

    while i < len(lines):
        text_i, lineno = lines[i]
        head = text_i.split()
        if head[0] == "signature":
            body, i = block(i + 1)
            try:
                sig = parse_signature("\n".join(t for t, _ in body))
            except Exception as e:
                raise SystemParseError(str(e), body[0][1] if body else lineno)
        elif head[0] == "graph":
            if sig is None:
                raise SystemParseError("graph before signature", lineno)
            if len(head) != 2:
                raise SystemParseError("graph needs exactly one name", lineno)
            body, i = block(i + 1)
            if head[1] in graphs:
                raise SystemParseError(f"duplicate graph {head[1]!r}", lineno)
            graphs[head[1]] = _parse_graph_block(sig, body, lineno)
        elif head[0] == "rule":
            if sig is None:
                raise SystemParseError("rule before signature", lineno)
            if len(head) != 2:
                raise SystemParseError("rule needs exactly one name", lineno)
            body, i = block(i + 1)
            parts: dict[str, tuple[str, int]] = {}
            for t, ln in body:
                if "=" not in t:
                    raise SystemParseError(f"bad rule line {t!r}", ln)
                key, val = t.split("=", 1)
                parts[key.strip()] = (val.strip(), ln)
            missing = {"L", "K", "R", "l", "r"} - set(parts)
            if missing:
                raise SystemParseError(
                    f"rule {head[1]} misses {sorted(missing)}", lineno
                )
            def graph_of(key: str) -> CGraph:
                name, ln = parts[key]
                if name not in graphs:
                    raise SystemParseError(f"unknown graph {name!r}", ln)
                return graphs[name]
            L, K, R = graph_of("L"), graph_of("K"), graph_of("R")
            lmor = _names_to_morphism(K, L, _parse_map(*parts["l"]), parts["l"][1])
            rmor = _names_to_morphism(K, R, _parse_map(*parts["r"]), parts["r"][1])
            rule = Rule(head[1], lmor, rmor)
            try:
                rule.validate()
            except Exception as e:
                raise SystemParseError(str(e), lineno)
            if any(r.name == rule.name for r in rules):
                raise SystemParseError(f"duplicate rule {rule.name!r}", lineno)
            rules.append(rule)
        elif head[0] == "framework":
            if len(head) != 2 or head[1] not in MATCH_CLASSES:
                raise SystemParseError(
                    f"framework must be one of {', '.join(MATCH_CLASSES)}", lineno
                )
            framework = Framework(head[1])
            i += 1
        elif head[0] == "relative":
            names = re.findall(r"[\w'-]+", text_i[len("relative"):].replace("{", " ").replace("}", " "))
            relative = frozenset(names)
            i += 1
        elif head[0] == "strategy":
            m = re.match(r'strategy\s+"(.*)"\s*$', text_i)
            if not m:
                raise SystemParseError('strategy must be quoted: strategy "..."', lineno)
            strategy = m.group(1)
            i += 1
        else:
            raise SystemParseError(f"unknown directive {head[0]!r}", lineno)

    if sig is None:
        raise SystemParseError("missing signature block", 1)
    if framework is None:
        raise SystemParseError("missing framework line", 1)
    for name in relative:
        if all(r.name != name for r in rules):
            raise SystemParseError(f"relative names unknown rule {name!r}", 1)
    return System(sig, graphs, tuple(rules), framework, relative, strategy)


def print_signature(sig: IndexSignature) -> str:
    out = []
    for o in sig.objects:
        s = o.name
        if o.labels:
            s += "[" + ",".join(o.labels) + "]"
        if o.args:
            s += "(" + ",".join(o.args) + ")"
        if o.simple:
            s += "!"
        out.append(s)
    return "\n".join("  " + s for s in out)


def print_graph_block(g: CGraph, indent: str = "  ") -> str:
    sig = g.sig
    out = []
    for s in range(len(sig.objects)):
        for i in range(g.n(s)):
            line = f"{sig.objects[s].name} {g.name_of(s, i)}"
            if g.labels[s][i] is not None:
                line += f" [{g.labels[s][i]}]"
            if g.args[s][i]:
                targets = sig.arg_sorts(s)
                line += " (" + ", ".join(
                    g.name_of(t, a) for t, a in zip(targets, g.args[s][i])
                ) + ")"
            out.append(indent + line)
    return "\n".join(out)


def _print_map(dom: CGraph, cod: CGraph, mor: Morphism) -> str:
    pairs = []
    for s in range(len(dom.sig.objects)):
        for i in range(dom.n(s)):
            pairs.append(f"{dom.name_of(s, i)} -> {cod.name_of(s, mor.maps[s][i])}")
    return "{ " + ", ".join(pairs) + " }"


def print_system(system: System) -> str:
    out = ["signature", print_signature(system.sig), "end", ""]
    rule_graphs = {}
    for r in system.rules:
        for tag, g in (("L", r.left), ("K", r.interface), ("R", r.right)):
            rule_graphs.setdefault(id(g), None)
    names_by_graph: dict[int, str] = {}
    for name, g in system.graphs.items():
        names_by_graph.setdefault(id(g), name)
        out += [f"graph {name}", print_graph_block(g), "end", ""]
    for r in system.rules:
        out.append(f"rule {r.name}")
        for tag, g in (("L", r.left), ("K", r.interface), ("R", r.right)):
            gname = names_by_graph.get(id(g))
            if gname is None:
                raise ValueError(f"rule {r.name}: {tag} graph is not a named graph")
            out.append(f"  {tag} = {gname}")
        out.append(f"  l = {_print_map(r.interface, r.left, r.l)}")
        out.append(f"  r = {_print_map(r.interface, r.right, r.r)}")
        out += ["end", ""]
    out.append(f"framework {system.framework.match_class}")
    if system.relative:
        out.append("relative { " + " ".join(sorted(system.relative)) + " }")
    if system.strategy:
        out.append(f'strategy "{system.strategy}"')
    out.append("")
    return "\n".join(out)


def system_hash(system: System) -> str:
    h = hashlib.sha256()
    h.update(print_signature(system.sig).encode())
    h.update(system.framework.match_class.encode())
    h.update(" ".join(sorted(system.relative)).encode())
    for r in sorted(system.rules, key=lambda r: r.name):
        h.update(r.name.encode())
        for g in (r.left, r.interface, r.right):
            h.update(canonical_key(g))
        h.update(repr(r.l.maps).encode())
        h.update(repr(r.r.maps).encode())
    return h.hexdigest()
