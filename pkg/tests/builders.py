"""Compact workbook construction for tests: ``{"Sheet1": {"A1": 5, "A2": "=A1*2"}}``."""

from smellfault.corpus import LabelEntry, LabelSet, attach_labels, workbook_from_dict
from smellfault.formula import parse_a1


def _kind(value):
    if value is None:
        return "empty"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if value.startswith("="):
        return "formula"
    return "text"


def workbook_doc(name, sheets):
    worksheets = []
    for sheet, cells in sheets.items():
        entries = []
        for address, value in cells.items():
            row, col = parse_a1(address)
            entries.append({"row": row, "col": col, "kind": _kind(value), "value": value})
        worksheets.append({"name": sheet, "cells": entries})
    return {"name": name, "worksheets": worksheets}


def workbook(sheets, name="wb"):
    return workbook_from_dict(workbook_doc(name, sheets))


def labeled(workbooks, faulty=()):
    """Attach labels; ``faulty`` holds ``(workbook, sheet, "A1")`` triples."""
    entries = [LabelEntry(wb, ws, *parse_a1(cell), "faulty") for wb, ws, cell in faulty]
    return attach_labels(list(workbooks), LabelSet(entries))
