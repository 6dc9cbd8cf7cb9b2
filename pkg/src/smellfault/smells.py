"""Smell strengths for formula cells and the feature-matrix encoding.

Every strength is a raw, non-negative count. Worksheet-level smells give the
same value to every formula of a sheet. Definitions are listed in
``docs/smells.md``.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corpus import Corpus, Workbook, Worksheet
from .formula import (
    DEFAULT_ENUMERATION_CAP,
    Binary,
    Call,
    Unary,
    a1,
    normalize_relative,
    resolve_absolute,
    subtrees,
    walk,
)
from .graph import DEFAULT_CYCLE_BUDGET, DependencyGraph, build_graph

DEFAULT_CONDITIONALS = (
    "IF",
    "IFS",
    "IFERROR",
    "IFNA",
    "SUMIF",
    "SUMIFS",
    "COUNTIF",
    "COUNTIFS",
    "AVERAGEIF",
    "AVERAGEIFS",
)


@dataclass(frozen=True)
class SmellId:
    index: int
    name: str
    target: str


SMELLS = (
    SmellId(0, "Column-wise Pattern Finder", "cell"),
    SmellId(1, "Row-wise Pattern Finder", "cell"),
    SmellId(2, "Reference to empty cells", "cell"),
    SmellId(3, "Changing Formulas", "cell"),
    SmellId(4, "Changing Worksheets", "cell"),
    SmellId(5, "Duplicated Calculations", "cell"),
    SmellId(6, "Duplicated Formulas", "cell"),
    SmellId(7, "Feature Envy", "cell"),
    SmellId(8, "Long Calculation Chain", "cell"),
    SmellId(9, "Conditional Complexity", "cell"),
    SmellId(10, "Multiple Operations", "cell"),
    SmellId(11, "Multiple References", "cell"),
    SmellId(12, "Inappropriate Intimacy", "worksheet"),
    SmellId(13, "Middle Man", "worksheet"),
    SmellId(14, "Shotgun Surgery (Formulas)", "worksheet"),
    SmellId(15, "Shotgun Surgery (Worksheets)", "worksheet"),
    SmellId(16, "Inconsistent Formula Group Reference", "worksheet"),
    SmellId(17, "Missing Header", "worksheet"),
    SmellId(18, "Overburdened Worksheet", "worksheet"),
)
N_SMELLS = len(SMELLS)
WORKSHEET_SMELLS = tuple(s.index for s in SMELLS if s.target == "worksheet")


@dataclass(frozen=True)
class SmellConfig:
    conditional_functions: tuple = DEFAULT_CONDITIONALS
    subtree_min_size: int = 3
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    cycle_budget: int = DEFAULT_CYCLE_BUDGET


class _SheetCache:
    def __init__(self, ws: Worksheet, names: dict, config: SmellConfig):
        self.ws = ws
        parsed = [c for c in ws.formulas() if c.ast is not None]
        self.normalized = {(c.row, c.col): normalize_relative(c.ast, c.row, c.col) for c in parsed}
        self.resolved = {(c.row, c.col): resolve_absolute(c.ast, ws.name, names) for c in parsed}

        self.column_break = {k: self._breaks(k, (1, 0)) for k in self.normalized}
        self.row_break = {k: self._breaks(k, (0, 1)) for k in self.normalized}

        owners = defaultdict(set)
        shapes = {}
        for key, tree in self.resolved.items():
            shapes[key] = subtrees(tree, config.subtree_min_size)
            for sub in shapes[key]:
                owners[sub].add(key)
        self.duplicated_formulas = {}
        for key, subs in shapes.items():
            sharing = set()
            for sub in subs:
                sharing |= owners[sub]
            own = self.normalized[key]
            self.duplicated_formulas[key] = sum(1 for k in sharing if k != key and self.normalized[k] != own)

        columns = defaultdict(list)
        for (row, col), cell in ws.cells.items():
            if not cell.is_empty:
                columns[col].append((row, cell))
        self.missing_header = sum(1 for cells in columns.values() if min(cells, key=lambda rc: rc[0])[1].kind != "text")
        self.overburdened = sum(len(cells) for cells in columns.values())
        self.inconsistent = sum(1 for k in self.normalized if self.column_break[k] or self.row_break[k])

    def _breaks(self, key, step) -> int:
        (row, col), (dr, dc) = key, step
        before = self.normalized.get((row - dr, col - dc))
        after = self.normalized.get((row + dr, col + dc))
        return int(before is not None and before == after and before != self.normalized[key])


class SmellContext:
    """Workbook-wide state: dependency graph plus per-sheet caches."""

    def __init__(self, workbook: Workbook, config: Optional[SmellConfig] = None):
        self.config = config or SmellConfig()
        self.workbook = workbook
        self.graph: DependencyGraph = build_graph(workbook, self.config.enumeration_cap, self.config.cycle_budget)
        names = workbook.sheet_names
        self.sheets = {ws.name: _SheetCache(ws, names, self.config) for ws in workbook.worksheets}
        self.calc_counts = Counter(tree for cache in self.sheets.values() for tree in cache.resolved.values())
        self._conditionals = frozenset(self.config.conditional_functions)
        self._sheet_vectors = {}

    def sheet_vector(self, sheet: str) -> dict:
        if sheet not in self._sheet_vectors:
            cache = self.sheets[sheet]
            coupling = self.graph.sheet_coupling(sheet)
            self._sheet_vectors[sheet] = {
                12: coupling.intimacy(),
                13: coupling.pass_through,
                14: coupling.formulas_referencing_other,
                15: coupling.sheets_referencing_this,
                16: cache.inconsistent,
                17: cache.missing_header,
                18: cache.overburdened,
            }
        return self._sheet_vectors[sheet]

    def cell_value(self, index: int, sheet: str, row: int, col: int) -> float:
        cache = self.sheets[sheet]
        key = (sheet, row, col)
        if index in WORKSHEET_SMELLS:
            return float(self.sheet_vector(sheet)[index])
        if index == 0:
            return float(cache.column_break[(row, col)])
        if index == 1:
            return float(cache.row_break[(row, col)])
        if index == 2:
            return float(sum(1 for dst in self.graph.edges[key] if self.graph.is_empty(dst)))
        if index == 3:
            return float(self.graph.fan_in(key)[0])
        if index == 4:
            return float(self.graph.fan_in(key)[1])
        if index == 5:
            return float(self.calc_counts[cache.resolved[(row, col)]] - 1)
        if index == 6:
            return float(cache.duplicated_formulas[(row, col)])
        if index == 7:
            return float(sum(1 for o in self.graph.occurrences[key] if o.cross_sheet))
        if index == 8:
            return float(self.graph.longest_chain(key))
        ast = cache.ws.get(row, col).ast
        if index == 9:
            return float(sum(1 for n in walk(ast) if isinstance(n, Call) and n.name in self._conditionals))
        if index == 10:
            return float(sum(1 for n in walk(ast) if isinstance(n, (Unary, Binary, Call))))
        if index == 11:
            return float(len(self.graph.occurrences[key]))
        raise IndexError(f"no smell with index {index}")

    def vector(self, sheet: str, row: int, col: int) -> list:
        return [self.cell_value(s.index, sheet, row, col) for s in SMELLS]


def compute_smell(smell, sheet: str, row: int, col: int, ctx: SmellContext) -> float:
    """Strength of one smell (SmellId or index) for the formula at ``sheet!row,col``."""
    index = smell.index if isinstance(smell, SmellId) else int(smell)
    cell = ctx.workbook.sheet(sheet).get(row, col) if ctx.workbook.sheet(sheet) else None
    if cell is None or cell.ast is None:
        raise ValueError(f"{sheet}!{a1(row, col)} is not a parsed formula cell")
    return ctx.cell_value(index, ctx.workbook.sheet(sheet).name, row, col)


# --- feature matrix --------------------------------------------------------


@dataclass
class FeatureMatrix:
    """One row per labeled formula cell: 19 strengths and a +1 (faulty) / -1 label."""

    keys: list
    X: np.ndarray
    y: np.ndarray
    excluded: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64).reshape(len(self.keys), N_SMELLS)
        self.y = np.asarray(self.y, dtype=np.int64).reshape(len(self.keys))

    def __len__(self):
        return len(self.keys)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["cell"] + [s.name for s in SMELLS] + ["label"])
        for key, row, label in zip(self.keys, self.X, self.y):
            writer.writerow([key] + [_format_strength(v) for v in row] + ["faulty" if label > 0 else "correct"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureMatrix":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        expected = ["cell"] + [s.name for s in SMELLS] + ["label"]
        if header != expected:
            raise ValueError("feature matrix header does not match the smell catalog")
        keys, rows, labels = [], [], []
        for lineno, fields in enumerate(reader, start=2):
            if len(fields) != len(expected):
                raise ValueError(f"line {lineno}: expected {len(expected)} fields")
            if fields[-1] not in ("faulty", "correct"):
                raise ValueError(f"line {lineno}: unknown label {fields[-1]!r}")
            keys.append(fields[0])
            rows.append([float(v) for v in fields[1:-1]])
            labels.append(1 if fields[-1] == "faulty" else -1)
        return cls(keys, np.array(rows, dtype=np.float64).reshape(len(keys), N_SMELLS), np.array(labels, dtype=np.int64))


def _format_strength(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def workbook_rows(workbook: Workbook, config: Optional[SmellConfig] = None) -> tuple:
    """``(keys, vectors, labels, excluded)`` for one workbook's labeled formula cells."""
    ctx = SmellContext(workbook, config)
    keys, vectors, labels, excluded = [], [], [], []
    for ws in workbook.worksheets:
        for cell in ws.formulas():
            key = f"{workbook.name}!{ws.name}!{cell.address}"
            if cell.ast is None:
                excluded.append((key, cell.error))
                continue
            keys.append(key)
            vectors.append(ctx.vector(ws.name, cell.row, cell.col))
            labels.append(1 if cell.label == "faulty" else -1)
    return keys, vectors, labels, excluded


def build_feature_matrix(corpus, config: Optional[SmellConfig] = None) -> FeatureMatrix:
    """Rows ordered by workbook name, sheet position, row, column.

    Unparsed formulas are left out and listed in ``excluded``.
    """
    workbooks = corpus.workbooks if isinstance(corpus, Corpus) else list(corpus)
    keys, vectors, labels, excluded = [], [], [], []
    for wb in sorted(workbooks, key=lambda w: w.name):
        k, v, lab, ex = workbook_rows(wb, config)
        keys += k
        vectors += v
        labels += lab
        excluded += ex
    X = np.array(vectors, dtype=np.float64).reshape(len(keys), N_SMELLS)
    return FeatureMatrix(keys, X, np.array(labels, dtype=np.int64), excluded)
