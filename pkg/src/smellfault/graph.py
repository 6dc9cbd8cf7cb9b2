"""Cell dependency graph of a workbook and the structural queries smells need."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field

from .corpus import Workbook
from .formula import DEFAULT_ENUMERATION_CAP, CellRef, a1, extract_references

DEFAULT_CYCLE_BUDGET = 100_000


@dataclass
class SheetCoupling:
    refs_to: dict = field(default_factory=dict)
    refs_from: dict = field(default_factory=dict)
    formulas_referencing_other: int = 0
    sheets_referencing_this: int = 0
    pass_through: int = 0

    def intimacy(self) -> int:
        others = set(self.refs_to) | set(self.refs_from)
        return max((self.refs_to.get(o, 0) + self.refs_from.get(o, 0) for o in others), default=0)


class DependencyGraph:
    """Directed graph formula-cell -> referenced cell, keyed by ``(sheet, row, col)``.

    ``nodes`` maps every non-empty cell and every referenced-but-empty cell
    to one of ``"formula"``, ``"value"`` or ``"ghost"``.  Formulas that failed
    to parse are ``"value"`` nodes without edges.
    """

    def __init__(self, sheets, nodes, edges, occurrences, pass_through, cycle_budget, warnings):
        self.sheets = sheets
        self.nodes = nodes
        self.edges = edges
        self.occurrences = occurrences
        self.pass_through = pass_through
        self.cycle_budget = cycle_budget
        self.warnings = warnings
        self.referrers = defaultdict(set)
        for src, targets in edges.items():
            for dst in targets:
                self.referrers[dst].add(src)
        self._chains = None
        self._cyclic = None
        self._coupling = None

    def is_empty(self, key) -> bool:
        return self.nodes.get(key, "ghost") == "ghost"

    def edge_count(self) -> int:
        return sum(len(t) for t in self.edges.values())

    # -- chains ------------------------------------------------------------

    def _compute_chains(self):
        order = _scc_order(self.edges)
        comp_of = {}
        for i, comp in enumerate(order):
            for node in comp:
                comp_of[node] = i
        tainted = set()
        chains = {}
        # sinks come first in Tarjan's emission order
        for i, comp in enumerate(order):
            cyclic = len(comp) > 1 or comp[0] in self.edges.get(comp[0], ())
            succ_comps = {comp_of[d] for n in comp for d in self.edges.get(n, ()) if comp_of[d] != i}
            if cyclic or any(c in tainted for c in succ_comps):
                tainted.add(i)
                continue
            node = comp[0]
            targets = self.edges.get(node, ())
            chains[node] = 1 + max(chains[d] for d in targets) if targets else 0
        cyclic_nodes = {n for i in tainted for n in order[i]}
        for node in sorted(cyclic_nodes):
            chains[node] = self._longest_simple_path(node, chains, cyclic_nodes)
        self._chains = chains
        self._cyclic = cyclic_nodes

    def _longest_simple_path(self, start, chains, cyclic_nodes) -> int:
        best = 0
        budget = self.cycle_budget
        on_path = {start}
        stack = [(start, iter(sorted(self.edges.get(start, ()))))]
        while stack and budget > 0:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(node)
                continue
            depth = len(stack)
            if nxt in on_path:
                continue
            if nxt not in cyclic_nodes:
                # acyclic tails cannot revisit the path
                best = max(best, depth + chains.get(nxt, 0))
                continue
            budget -= 1
            best = max(best, depth)
            on_path.add(nxt)
            stack.append((nxt, iter(sorted(self.edges.get(nxt, ())))))
        return best

    def longest_chain(self, key) -> int:
        if self._chains is None:
            self._compute_chains()
        return self._chains.get(key, 0)

    def is_cyclic(self, key) -> bool:
        if self._cyclic is None:
            self._compute_chains()
        return key in self._cyclic

    # -- fan-in ------------------------------------------------------------

    def fan_in(self, key) -> tuple:
        same = other = 0
        sheet = key[0].casefold()
        for src in self.referrers.get(key, ()):
            if src[0].casefold() == sheet:
                same += 1
            else:
                other += 1
        return same, other

    # -- worksheet coupling --------------------------------------------------

    def _compute_coupling(self):
        records = {s: SheetCoupling() for s in self.sheets}
        referencing = defaultdict(set)
        for src, occs in self.occurrences.items():
            here = src[0]
            rec = records.setdefault(here, SheetCoupling())
            crossing = False
            for occ in occs:
                if not occ.cross_sheet:
                    continue
                crossing = True
                rec.refs_to[occ.sheet] = rec.refs_to.get(occ.sheet, 0) + 1
                there = records.setdefault(occ.sheet, SheetCoupling())
                there.refs_from[here] = there.refs_from.get(here, 0) + 1
                referencing[occ.sheet].add(here)
            rec.formulas_referencing_other += crossing
        for sheet, srcs in referencing.items():
            records[sheet].sheets_referencing_this = len(srcs)
        for key in self.pass_through:
            records[key[0]].pass_through += 1
        self._coupling = records

    def sheet_coupling(self, sheet: str) -> SheetCoupling:
        if self._coupling is None:
            self._compute_coupling()
        return self._coupling.get(sheet, SheetCoupling())

    def dump_edges(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["from_sheet", "from_cell", "to_sheet", "to_cell"])
        for src in sorted(self.edges):
            for dst in sorted(self.edges[src]):
                writer.writerow([src[0], a1(src[1], src[2]), dst[0], a1(dst[1], dst[2])])
        return buf.getvalue()


def _scc_order(edges: dict) -> list:
    """Tarjan's algorithm, iterative; components in reverse topological order."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    result = []
    counter = 0
    nodes = sorted(set(edges) | {d for t in edges.values() for d in t})
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            child = next(it, None)
            if child is not None:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(edges.get(child, ())))))
                elif child in on_stack:
                    low[node] = min(low[node], index[child])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                result.append(sorted(comp))
    return result


def build_graph(
    workbook: Workbook,
    cap: int = DEFAULT_ENUMERATION_CAP,
    cycle_budget: int = DEFAULT_CYCLE_BUDGET,
) -> DependencyGraph:
    sheets = [ws.name for ws in workbook.worksheets]
    names = workbook.sheet_names
    nodes = {}
    edges = {}
    occurrences = {}
    pass_through = set()
    warnings = []
    for ws in workbook.worksheets:
        for (row, col), cell in ws.cells.items():
            if cell.is_empty:
                continue
            key = (ws.name, row, col)
            if cell.is_formula and cell.ast is not None:
                nodes[key] = "formula"
                refs = extract_references(cell.ast, ws.name, names, cap)
                edges[key] = refs.cells
                occurrences[key] = refs.occurrences
                warnings.extend(f"{ws.name}!{a1(row, col)}: {w}" for w in refs.warnings)
                if isinstance(cell.ast, CellRef):
                    pass_through.add(key)
            else:
                nodes[key] = "value"
    for targets in edges.values():
        for dst in targets:
            nodes.setdefault(dst, "ghost")
    return DependencyGraph(sheets, nodes, edges, occurrences, pass_through, cycle_budget, warnings)


def longest_chain(graph: DependencyGraph, key) -> int:
    return graph.longest_chain(key)


def fan_in(graph: DependencyGraph, key) -> tuple:
    return graph.fan_in(key)


def sheet_coupling(graph: DependencyGraph, sheet: str) -> SheetCoupling:
    return graph.sheet_coupling(sheet)
