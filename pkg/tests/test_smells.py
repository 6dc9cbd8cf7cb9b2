import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smellfault.formula import a1, parse_a1, parse_formula, print_formula, translate
from smellfault.smells import (SMELLS, WORKSHEET_SMELLS, FeatureMatrix, SmellConfig, SmellContext,
                               build_feature_matrix, compute_smell)

from builders import labeled, workbook


def smell(sheets, index, address, sheet="S", config=None):
    ctx = SmellContext(workbook(sheets), config)
    row, col = parse_a1(address)
    return compute_smell(index, sheet, row, col, ctx)


def test_catalog_shape():
    assert [s.index for s in SMELLS] == list(range(19))
    assert WORKSHEET_SMELLS == tuple(range(12, 19))


def test_multiple_references_counts_a_range_once():
    assert smell({"S": {"C1": "=SUM(A1:A5)+B1"}}, 11, "C1") == 2


def test_conditional_complexity_counts_nested_ifs():
    assert smell({"S": {"C1": "=IF(A1>0,IF(B1>0,1,2),3)"}}, 9, "C1") == 2


def test_conditional_set_is_configurable():
    config = SmellConfig(conditional_functions=("CHOOSE",))
    assert smell({"S": {"C1": "=IF(A1,CHOOSE(1,2),3)"}}, 9, "C1", config=config) == 1


def test_reference_to_empty_cells():
    sheets = {"S": {"A1": 1, "A2": None, "A4": 2, "C1": "=SUM(A1:A5)"}}
    assert smell(sheets, 2, "C1") == 3


def test_middle_man_broadcasts():
    sheets = {"S": {"A1": 1, "B1": "=A1", "B2": "=A1*2", "B3": "=SUM(A1:A2)"}}
    for address in ["B1", "B2", "B3"]:
        assert smell(sheets, 13, address) == 1


def test_multiple_operations():
    assert smell({"S": {"B1": "=-SUM(A1,2)*3+(A2)"}}, 10, "B1") == 4


def test_changing_formulas_and_worksheets():
    sheets = {"S": {"A1": "=1", "B1": "=A1", "B2": "=A1+1"}, "T": {"A1": "=S!A1"}}
    assert smell(sheets, 3, "A1") == 2
    assert smell(sheets, 4, "A1") == 1
    assert smell(sheets, 7, "A1", sheet="T") == 1


def test_duplicated_calculations_are_workbook_wide():
    sheets = {"S": {"B1": "=T!A1+1", "B2": "=T!A1+1"}, "T": {"B1": "=A1+1", "C1": "=$A$1+1"}}
    assert smell(sheets, 5, "B1") == 3
    assert smell(sheets, 5, "B1", sheet="T") == 3


def test_duplicated_formulas_skip_copies():
    sheets = {"S": {"C1": "=A1*B1+1", "C2": "=A2*B2+1", "D1": "=(A1*B1)/2", "D2": "=5"}}
    # C1 shares A1*B1 with D1; C2 is a copy of C1 and does not count
    assert smell(sheets, 6, "C1") == 1
    assert smell(sheets, 6, "D1") == 1
    assert smell(sheets, 6, "C2") == 0


def test_pattern_finders_flag_breaks_only():
    sheets = {"S": {"B1": "=A1*2", "B2": "=A2*2", "B3": "=A3+9", "B4": "=A4*2", "B5": "=A5*2"}}
    assert [smell(sheets, 0, f"B{r}") for r in range(1, 6)] == [0, 0, 1, 0, 0]
    assert smell(sheets, 16, "B1") == 1
    row_sheets = {"S": {"A2": "=A1+1", "B2": "=B1", "C2": "=C1+1"}}
    assert smell(row_sheets, 1, "B2") == 1 and smell(row_sheets, 0, "B2") == 0


def test_long_chain():
    assert smell({"S": {"A1": 1, "A2": "=A1", "A3": "=A2+1"}}, 8, "A3") == 2


def test_missing_header_and_overburdened():
    sheets = {"S": {"A1": "Name", "A2": 3, "B2": 4, "C1": None, "C3": "=A2+B2"}}
    assert smell(sheets, 17, "C3") == 2
    assert smell(sheets, 18, "C3") == 4


def test_coupling_smells():
    sheets = {"S": {"A1": "=T!A1+T!A2", "A2": "=1"}, "T": {"A1": 1, "A2": "=S!A2"}, "U": {"A1": "=S!A1"}}
    assert [smell(sheets, i, "A1") for i in (12, 14, 15)] == [3, 1, 2]


def test_non_formula_cell_is_rejected():
    with pytest.raises(ValueError):
        smell({"S": {"A1": 1}}, 0, "A1")


def test_formula_without_references_has_zero_reference_smells():
    sheets = {"S": {"A1": "=1+2*3", "A2": "=IF(TRUE,1,2)"}}
    for address in ["A1", "A2"]:
        for index in (2, 4, 7, 8, 11):
            assert smell(sheets, index, address) == 0


def test_literal_only_corpus_is_empty():
    m = build_feature_matrix(labeled([workbook({"S": {"A1": 1, "B1": "x"}})]))
    assert len(m) == 0 and m.X.shape == (0, 19)


def test_single_sheet_has_no_cross_sheet_strengths():
    sheets = {"S": {"A1": 1, "A2": "=A1", "B1": "=A1+A2", "B2": "=SUM(A1:A2)"}}
    m = build_feature_matrix(labeled([workbook(sheets)]))
    assert not m.X[:, [4, 7, 12, 14, 15]].any()


def test_parse_failures_are_excluded():
    m = build_feature_matrix(labeled([workbook({"S": {f"A{i}": "=1" for i in range(1, 10)} | {"A10": "=SUM("}})]))
    assert len(m) == 9
    assert [k for k, _ in m.excluded] == ["wb!S!A10"]


def test_row_order_and_labels():
    wbs = [workbook({"Z": {"B1": "=1", "A2": "=1"}, "A": {"A1": "=1"}}, "b"), workbook({"S": {"A1": "=1"}}, "a")]
    m = build_feature_matrix(labeled(wbs, [("b", "A", "A1")]))
    assert m.keys == ["a!S!A1", "b!Z!B1", "b!Z!A2", "b!A!A1"]
    assert m.y.tolist() == [-1, -1, -1, 1]


def test_csv_round_trip():
    m = build_feature_matrix(labeled([workbook({"S": {"A1": 1, "B1": "=A1*2", "B2": "=B1"}})], [("wb", "S", "B2")]))
    again = FeatureMatrix.from_csv(m.to_csv())
    assert again.keys == m.keys and np.array_equal(again.X, m.X) and np.array_equal(again.y, m.y)


def test_csv_header_is_checked():
    with pytest.raises(ValueError):
        FeatureMatrix.from_csv("cell,label\n")


# --- properties ------------------------------------------------------------

CELL_FORMULAS = ["=A{r}", "=A{r}*2", "=SUM(A1:A{r})", "=IF(A{r}>1,B1,0)", "=Other!A{r}+A{r}", "=$A$1+A{r}"]


@st.composite
def two_sheet_workbooks(draw):
    n = draw(st.integers(2, 8))
    main = {"A1": "Head", "B1": draw(st.sampled_from(["Calc", 2]))}
    for r in range(2, n + 1):
        main[f"A{r}"] = draw(st.integers(0, 9))
        if draw(st.booleans()):
            main[f"B{r}"] = draw(st.sampled_from(CELL_FORMULAS)).format(r=r)
        if draw(st.booleans()):
            main[f"C{r}"] = draw(st.sampled_from(CELL_FORMULAS)).format(r=r - 1)
    other = {"A1": 5, "A2": "=Main!B2", "B2": "=A1"}
    return {"Main": main, "Other": other}


def shifted(sheets, drow, dcol):
    out = {}
    for name, cells in sheets.items():
        moved = {}
        for address, value in cells.items():
            row, col = parse_a1(address)
            if isinstance(value, str) and value.startswith("="):
                value = print_formula(translate(parse_formula(value), drow, dcol))
            moved[a1(row + drow, col + dcol)] = value
        out[name] = moved
    return out


def matrix(sheets):
    return build_feature_matrix(labeled([workbook(sheets)]))


@settings(max_examples=60, deadline=None)
@given(two_sheet_workbooks())
def test_worksheet_smells_broadcast(sheets):
    m = matrix(sheets)
    by_sheet = {}
    for key, row in zip(m.keys, m.X):
        sheet = key.split("!")[1]
        by_sheet.setdefault(sheet, set()).add(tuple(row[list(WORKSHEET_SMELLS)]))
    assert all(len(v) == 1 for v in by_sheet.values())


@settings(max_examples=60, deadline=None)
@given(two_sheet_workbooks(), st.integers(0, 20), st.integers(0, 5))
def test_translation_leaves_strengths_unchanged(sheets, drow, dcol):
    base, moved = matrix(sheets), matrix(shifted(sheets, drow, dcol))
    assert np.array_equal(base.X, moved.X)


@settings(max_examples=60, deadline=None)
@given(two_sheet_workbooks())
def test_strengths_are_finite_non_negative_and_deterministic(sheets):
    first, second = matrix(sheets), matrix(sheets)
    assert np.isfinite(first.X).all() and (first.X >= 0).all()
    assert first.to_csv() == second.to_csv()
