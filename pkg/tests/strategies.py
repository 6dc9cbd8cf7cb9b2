"""Hypothesis strategies shared by the test modules."""

import string

import numpy as np
from hypothesis import strategies as st

from smellfault.formula import (COMPARISON_OPS, MAX_COL, MAX_ROW, Binary, Boolean, Call, CellRef, Group, Number,
                                RangeRef, Text, Unary, make_range)

# operator levels as the parser sees them; higher binds tighter
LEVEL = {"^": 6, "*": 4, "/": 4, "+": 3, "-": 3, "&": 2, **{op: 1 for op in COMPARISON_OPS}}
UNARY_LEVEL = 5
ATOM_LEVEL = 7


def level(node):
    if isinstance(node, Binary):
        return LEVEL[node.op]
    if isinstance(node, Unary):
        return UNARY_LEVEL
    return ATOM_LEVEL


def signed_atom(node):
    while isinstance(node, Unary):
        node = node.operand
    return level(node) == ATOM_LEVEL


def grouped(node, needs):
    return Group(node) if needs else node


def canonical(node):
    """Insert the Group nodes a parser would need to rebuild this exact tree."""
    if isinstance(node, Group):
        return Group(canonical(node.inner))
    if isinstance(node, Call):
        return Call(node.name, tuple(canonical(a) for a in node.args))
    if isinstance(node, Unary):
        inner = canonical(node.operand)
        return Unary(node.op, grouped(inner, level(inner) < UNARY_LEVEL))
    if isinstance(node, Binary):
        left, right = canonical(node.left), canonical(node.right)
        prec = LEVEL[node.op]
        left = grouped(left, level(left) < prec)
        if node.op == "^":
            right = grouped(right, not signed_atom(right))
        else:
            right = grouped(right, level(right) <= prec)
        return Binary(node.op, left, right)
    return node


sheet_names = st.one_of(
    st.sampled_from(["Sheet1", "Sheet2", "data", "A1", "R1C1", "TRUE", "x.y"]),
    st.text(alphabet=string.ascii_letters + string.digits + " _'!-.", min_size=1, max_size=8),
)
optional_sheet = st.none() | sheet_names
rows = st.integers(1, MAX_ROW)
cols = st.integers(1, MAX_COL)
small_rows = st.integers(1, 30)
small_cols = st.integers(1, 8)


@st.composite
def cell_refs(draw, sheet=optional_sheet, row=rows, col=cols):
    return CellRef(draw(row), draw(col), draw(st.booleans()), draw(st.booleans()), draw(sheet))


@st.composite
def range_refs(draw, sheet=optional_sheet, row=rows, col=cols):
    s = draw(sheet)
    first = draw(cell_refs(st.just(s), row, col))
    second = draw(cell_refs(st.just(s), row, col))
    return make_range(first, second)


numbers = st.one_of(
    st.integers(0, 10**6).map(float),
    st.floats(min_value=0, allow_nan=False, allow_infinity=False),
)
texts = st.text(max_size=6)
function_names = st.one_of(
    st.sampled_from(["SUM", "IF", "MAX", "VLOOKUP", "LOG10", "A1", "NOW"]),
    st.from_regex(r"[A-Z][A-Z0-9_.]{0,6}", fullmatch=True).filter(lambda n: n not in ("TRUE", "FALSE")),
)
binary_ops = st.sampled_from(sorted(LEVEL))


def leaves(sheet=optional_sheet, row=rows, col=cols):
    return st.one_of(
        numbers.map(Number),
        texts.map(Text),
        st.booleans().map(Boolean),
        cell_refs(sheet, row, col),
        range_refs(sheet, row, col),
    )


def raw_trees(sheet=optional_sheet, row=rows, col=cols, max_leaves=25):
    return st.recursive(
        leaves(sheet, row, col),
        lambda kids: st.one_of(
            st.builds(Binary, binary_ops, kids, kids),
            st.builds(Unary, st.sampled_from(["-", "+"]), kids),
            st.builds(Group, kids),
            st.builds(Call, function_names, st.lists(kids, max_size=3).map(tuple)),
        ),
        max_leaves=max_leaves,
    )


def formula_asts(**kwargs):
    """ASTs in the image of the parser (every tree prints and parses back to itself)."""
    return raw_trees(**kwargs).map(canonical)


# --- small numeric datasets ------------------------------------------------


@st.composite
def labeled_data(draw, min_rows=4, max_rows=40, n_features=3, min_per_class=1):
    n = draw(st.integers(min_rows, max_rows))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 5, size=(n, n_features)).astype(float)
    n_pos = draw(st.integers(min_per_class, n - min_per_class))
    y = np.full(n, -1)
    y[rng.permutation(n)[:n_pos]] = 1
    return X, y
