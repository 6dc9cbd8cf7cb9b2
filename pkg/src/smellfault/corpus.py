"""Spreadsheet object model, interchange-format I/O and fault labels.

Workbook files are JSON documents (``docs/interchange.md``); label files are
CSV with the header ``workbook,worksheet,cell,label``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from .formula import FormulaError, Node, a1, parse_a1, parse_formula

logger = logging.getLogger(__name__)

CELL_KINDS = ("number", "text", "bool", "formula", "empty")
LABELS = ("correct", "faulty")


class CorpusError(ValueError):
    """Malformed workbook or label input."""


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    kind: str
    value: object = None
    ast: Optional[Node] = None
    error: Optional[str] = None
    label: Optional[str] = None

    @property
    def is_formula(self) -> bool:
        return self.kind == "formula"

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    @property
    def address(self) -> str:
        return a1(self.row, self.col)


@dataclass
class Worksheet:
    name: str
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        for (row, col), cell in self.cells.items():
            if row < 1 or col < 1:
                raise CorpusError(f"sheet {self.name!r}: coordinate ({row}, {col}) below (1, 1)")
            if (cell.row, cell.col) != (row, col):
                raise CorpusError(f"sheet {self.name!r}: cell keyed at ({row}, {col}) claims ({cell.row}, {cell.col})")

    def get(self, row: int, col: int) -> Optional[Cell]:
        return self.cells.get((row, col))

    def formulas(self) -> list:
        return [self.cells[k] for k in sorted(self.cells) if self.cells[k].is_formula]

    def non_empty(self) -> list:
        return [self.cells[k] for k in sorted(self.cells) if not self.cells[k].is_empty]


@dataclass
class Workbook:
    name: str
    worksheets: list

    def __post_init__(self):
        if not self.worksheets:
            raise CorpusError(f"workbook {self.name!r} has no worksheets")
        seen = set()
        for ws in self.worksheets:
            key = ws.name.casefold()
            if key in seen:
                raise CorpusError(f"workbook {self.name!r}: duplicate worksheet {ws.name!r}")
            seen.add(key)

    @property
    def sheet_names(self) -> dict:
        """Casefolded name -> canonical name."""
        return {ws.name.casefold(): ws.name for ws in self.worksheets}

    def sheet(self, name: str) -> Optional[Worksheet]:
        key = name.casefold()
        for ws in self.worksheets:
            if ws.name.casefold() == key:
                return ws
        return None

    def parse_errors(self) -> list:
        """``(sheet, address, message)`` for every formula that failed to parse."""
        return [
            (ws.name, cell.address, cell.error)
            for ws in self.worksheets
            for cell in ws.formulas()
            if cell.error is not None
        ]


@dataclass(frozen=True)
class LabelEntry:
    workbook: str
    worksheet: str
    row: int
    col: int
    label: str


@dataclass
class LabelSet:
    entries: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.workbook, e.worksheet.casefold(), e.row, e.col)
            if key in seen:
                raise CorpusError(f"duplicate label entry for {e.workbook}!{e.worksheet}!{a1(e.row, e.col)}")
            seen.add(key)

    def __len__(self):
        return len(self.entries)


@dataclass
class Corpus:
    """Workbooks with labels attached, plus the entries that matched nothing."""

    workbooks: list
    dangling: list = field(default_factory=list)


@dataclass(frozen=True)
class CorpusStats:
    workbooks: int
    formulas: int
    faulty: int

    @property
    def fault_rate(self) -> float:
        return self.faulty / self.formulas if self.formulas else 0.0


# --- workbook interchange format -----------------------------------------


def _make_cell(row: int, col: int, kind: str, value) -> Cell:
    if kind != "formula":
        return Cell(row, col, kind, value)
    try:
        return Cell(row, col, kind, value, ast=parse_formula(value))
    except FormulaError as exc:
        return Cell(row, col, kind, value, error=str(exc))


def _check_value(kind: str, value, where: str):
    ok = {
        "number": isinstance(value, (int, float)) and not isinstance(value, bool),
        "text": isinstance(value, str),
        "bool": isinstance(value, bool),
        "formula": isinstance(value, str) and value.startswith("="),
        "empty": value is None,
    }[kind]
    if not ok:
        raise CorpusError(f"{where}.value: invalid value {value!r} for kind {kind!r}")


def workbook_from_dict(doc: dict, source: str = "<workbook>") -> Workbook:
    def need(obj, key, typ, where):
        if not isinstance(obj, dict) or key not in obj:
            raise CorpusError(f"{source}: {where}: missing field {key!r}")
        if not isinstance(obj[key], typ) or (typ is int and isinstance(obj[key], bool)):
            raise CorpusError(f"{source}: {where}.{key}: expected {typ.__name__}")
        return obj[key]

    name = need(doc, "name", str, "$")
    sheets = []
    for i, sdoc in enumerate(need(doc, "worksheets", list, "$")):
        where = f"worksheets[{i}]"
        sname = need(sdoc, "name", str, where)
        cells = {}
        for j, cdoc in enumerate(need(sdoc, "cells", list, where)):
            cwhere = f"{where}.cells[{j}]"
            row = need(cdoc, "row", int, cwhere)
            col = need(cdoc, "col", int, cwhere)
            kind = need(cdoc, "kind", str, cwhere)
            if kind not in CELL_KINDS:
                raise CorpusError(f"{source}: {cwhere}.kind: unknown kind {kind!r}")
            if row < 1 or col < 1:
                raise CorpusError(f"{source}: {cwhere}: coordinate ({row}, {col}) below (1, 1)")
            if (row, col) in cells:
                raise CorpusError(f"{source}: {cwhere}: duplicate coordinate ({row}, {col})")
            value = cdoc.get("value")
            try:
                _check_value(kind, value, cwhere)
            except CorpusError as exc:
                raise CorpusError(f"{source}: {exc}") from None
            cells[(row, col)] = _make_cell(row, col, kind, value)
        sheets.append(Worksheet(sname, cells))
    try:
        return Workbook(name, sheets)
    except CorpusError as exc:
        raise CorpusError(f"{source}: {exc}") from None


def loads_workbook(text: str, source: str = "<workbook>") -> Workbook:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return workbook_from_dict(doc, source)


def load_workbook(path) -> Workbook:
    """Read one workbook file; formulas that fail to parse keep an error marker."""
    path = Path(path)
    wb = loads_workbook(path.read_text(encoding="utf-8"), str(path))
    for sheet, address, message in wb.parse_errors():
        logger.warning("%s: %s!%s not parsed: %s", path, sheet, address, message)
    return wb


def dumps_workbook(wb: Workbook) -> str:
    """Canonical text: one cell object per line, cells in row-major order."""
    out = ["{", f'  "name": {json.dumps(wb.name)},', '  "worksheets": [']
    for i, ws in enumerate(wb.worksheets):
        out.append("    {")
        out.append(f'      "name": {json.dumps(ws.name)},')
        keys = sorted(ws.cells)
        if not keys:
            out.append('      "cells": []')
        else:
            out.append('      "cells": [')
            for j, key in enumerate(keys):
                c = ws.cells[key]
                obj = json.dumps({"row": c.row, "col": c.col, "kind": c.kind, "value": c.value}, ensure_ascii=False)
                out.append(f"        {obj}" + ("," if j < len(keys) - 1 else ""))
            out.append("      ]")
        out.append("    }" + ("," if i < len(wb.worksheets) - 1 else ""))
    out.append("  ]")
    out.append("}")
    return "\n".join(out) + "\n"


def save_workbook(wb: Workbook, path) -> None:
    Path(path).write_text(dumps_workbook(wb), encoding="utf-8")


def workbook_paths(paths: Iterable) -> list:
    """Expand directories to their ``*.json`` files, sorted by name."""
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(p.glob("*.json")))
        else:
            found.append(p)
    return found


# --- labels ----------------------------------------------------------------

LABEL_HEADER = ["workbook", "worksheet", "cell", "label"]


def loads_labels(text: str, source: str = "<labels>") -> LabelSet:
    if not text.strip():
        return LabelSet([])
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip().lower() for h in header] != LABEL_HEADER:
        raise CorpusError(f"{source}: line 1: expected header {','.join(LABEL_HEADER)}")
    entries = []
    seen = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 4:
            raise CorpusError(f"{source}: line {lineno}: expected 4 fields, got {len(row)}")
        wb, ws, cell, label = (f.strip() for f in row)
        label = label.lower()
        if label not in LABELS:
            raise CorpusError(f"{source}: line {lineno}: unknown label {label!r}")
        try:
            r, c = parse_a1(cell)
        except ValueError as exc:
            raise CorpusError(f"{source}: line {lineno}: {exc}") from None
        key = (wb, ws.casefold(), r, c)
        if key in seen:
            raise CorpusError(f"{source}: line {lineno}: duplicate entry for {wb}!{ws}!{cell} (first on line {seen[key]})")
        seen[key] = lineno
        entries.append(LabelEntry(wb, ws, r, c, label))
    return LabelSet(entries)


def load_labels(path) -> LabelSet:
    path = Path(path)
    return loads_labels(path.read_text(encoding="utf-8"), str(path))


def dumps_labels(labels: LabelSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LABEL_HEADER)
    for e in labels.entries:
        writer.writerow([e.workbook, e.worksheet, a1(e.row, e.col), e.label])
    return buf.getvalue()


def attach_labels(workbooks: list, labels: LabelSet) -> Corpus:
    """Label every formula cell: listed label if present, else ``correct``.

    Entries pointing at missing sheets/cells or at non-formula cells are
    returned in ``Corpus.dangling`` and otherwise ignored.
    """
    index = {}
    dangling = []
    by_name = {wb.name: wb for wb in workbooks}
    for e in labels.entries:
        wb = by_name.get(e.workbook)
        ws = wb.sheet(e.worksheet) if wb else None
        cell = ws.get(e.row, e.col) if ws else None
        if cell is None or not cell.is_formula:
            dangling.append(e)
            continue
        index[(wb.name, ws.name, e.row, e.col)] = e.label
    for e in dangling:
        logger.warning("dangling label entry %s!%s!%s", e.workbook, e.worksheet, a1(e.row, e.col))

    labeled = []
    for wb in workbooks:
        sheets = []
        for ws in wb.worksheets:
            cells = {
                key: replace(cell, label=index.get((wb.name, ws.name) + key, "correct")) if cell.is_formula else cell
                for key, cell in ws.cells.items()
            }
            sheets.append(Worksheet(ws.name, cells))
        labeled.append(Workbook(wb.name, sheets))
    return Corpus(labeled, dangling)


def load_corpus(paths: Iterable, labels_path=None) -> Corpus:
    workbooks = [load_workbook(p) for p in workbook_paths(paths)]
    names = [wb.name for wb in workbooks]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise CorpusError(f"duplicate workbook names: {', '.join(dupes)}")
    labels = load_labels(labels_path) if labels_path else LabelSet([])
    return attach_labels(workbooks, labels)


def corpus_summary(corpus) -> CorpusStats:
    workbooks = corpus.workbooks if isinstance(corpus, Corpus) else list(corpus)
    formulas = faulty = 0
    for wb in workbooks:
        for ws in wb.worksheets:
            for cell in ws.formulas():
                formulas += 1
                faulty += cell.label == "faulty"
    return CorpusStats(len(workbooks), formulas, faulty)
