"""Lexer, parser, printer and reference analysis for A1-style formulas.

The grammar is documented in ``docs/grammar.md``. Parsing yields a tree of
frozen dataclasses; printing that tree gives the canonical text, and
``parse_formula(print_formula(ast)) == ast`` for every tree the parser can
produce.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

MAX_ROW = 1048576
MAX_COL = 16384
DEFAULT_ENUMERATION_CAP = 65536


class FormulaError(ValueError):
    """Lexical or syntactic error, with the 0-based offset into the text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Boolean:
    value: bool


@dataclass(frozen=True)
class CellRef:
    row: int
    col: int
    row_abs: bool = False
    col_abs: bool = False
    sheet: Optional[str] = None


@dataclass(frozen=True)
class RangeRef:
    start: CellRef
    end: CellRef

    @property
    def sheet(self) -> Optional[str]:
        return self.start.sheet

    @property
    def size(self) -> int:
        return (self.end.row - self.start.row + 1) * (self.end.col - self.start.col + 1)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Group:
    inner: "Node"


Node = Union[Number, Text, Boolean, CellRef, RangeRef, Call, Unary, Binary, Group]

COMPARISON_OPS = ("=", "<>", "<", ">", "<=", ">=")
BINARY_PRECEDENCE = {"^": 6, "*": 4, "/": 4, "+": 3, "-": 3, "&": 2}
BINARY_PRECEDENCE.update({op: 1 for op in COMPARISON_OPS})
UNARY_PRECEDENCE = 5
ATOM_PRECEDENCE = 7


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        if isinstance(current, Call):
            stack.extend(reversed(current.args))
        elif isinstance(current, Unary):
            stack.append(current.operand)
        elif isinstance(current, Binary):
            stack.append(current.right)
            stack.append(current.left)
        elif isinstance(current, Group):
            stack.append(current.inner)


# --- A1 helpers ------------------------------------------------------------


def column_index(letters: str) -> int:
    index = 0
    for ch in letters.upper():
        index = index * 26 + (ord(ch) - 64)
    return index


def column_letters(index: int) -> str:
    letters = ""
    while index > 0:
        index, rem = divmod(index - 1, 26)
        letters = chr(65 + rem) + letters
    return letters


def a1(row: int, col: int) -> str:
    return f"{column_letters(col)}{row}"


_A1_RE = re.compile(r"\$?([A-Za-z]{1,3})\$?([0-9]+)")


def parse_a1(text: str) -> tuple[int, int]:
    """``"B3"`` -> ``(3, 2)``; ``$`` anchors are accepted and ignored."""
    m = _A1_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"not an A1 cell address: {text!r}")
    row, col = int(m.group(2)), column_index(m.group(1))
    if not (1 <= row <= MAX_ROW and 1 <= col <= MAX_COL):
        raise ValueError(f"cell address out of bounds: {text!r}")
    return row, col


# --- lexer -----------------------------------------------------------------

_WS_RE = re.compile(r"\s+")
_STRING_RE = re.compile(r'"((?:[^"]|"")*)"', re.DOTALL)
_NUMBER_RE = re.compile(r"(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_CELL_RE = re.compile(r"(\$?)([A-Za-z]{1,3})(\$?)([0-9]+)(?![A-Za-z0-9_.(!$])")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_QUOTED_SHEET_RE = re.compile(r"'((?:[^']|'')+)'!")
_OPERATORS = ("<=", ">=", "<>", "+", "-", "*", "/", "^", "&", "=", "<", ">")
_DIGITS = "0123456789"
_PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", ":": "COLON"}


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    pos: int


def _cell_token(text: str, pos: int, sheet: Optional[str], start: int) -> tuple[Token, int]:
    m = _CELL_RE.match(text, pos)
    if not m:
        raise FormulaError("expected cell reference", pos)
    col = column_index(m.group(2))
    row = int(m.group(4))
    if not (1 <= row <= MAX_ROW and 1 <= col <= MAX_COL):
        raise FormulaError("cell reference out of bounds", pos)
    ref = CellRef(row, col, row_abs=bool(m.group(3)), col_abs=bool(m.group(1)), sheet=sheet)
    return Token("REF", ref, start), m.end()


def tokenize(text: str, start: int = 0) -> list[Token]:
    tokens = []
    pos = start
    n = len(text)
    while pos < n:
        m = _WS_RE.match(text, pos)
        if m:
            pos = m.end()
            continue
        ch = text[pos]
        if ch == '"':
            m = _STRING_RE.match(text, pos)
            if not m:
                raise FormulaError("unterminated string", pos)
            tokens.append(Token("STR", m.group(1).replace('""', '"'), pos))
            pos = m.end()
            continue
        if ch == "'":
            m = _QUOTED_SHEET_RE.match(text, pos)
            if not m:
                raise FormulaError("malformed quoted sheet name", pos)
            token, pos = _cell_token(text, m.end(), m.group(1).replace("''", "'"), pos)
            tokens.append(token)
            continue
        if ch in _DIGITS or (ch == "." and pos + 1 < n and text[pos + 1] in _DIGITS):
            m = _NUMBER_RE.match(text, pos)
            tokens.append(Token("NUM", float(m.group(0)), pos))
            pos = m.end()
            continue
        if ch == "$" or ch == "_" or ("A" <= ch.upper() <= "Z" and ch.isascii()):
            m = _CELL_RE.match(text, pos)
            if m:
                token, pos = _cell_token(text, pos, None, pos)
                tokens.append(token)
                continue
            m = _WORD_RE.match(text, pos)
            if not m:
                raise FormulaError(f"unexpected character {ch!r}", pos)
            word, end = m.group(0), m.end()
            if end < n and text[end] == "!":
                token, pos = _cell_token(text, end + 1, word, pos)
                tokens.append(token)
                continue
            after = _WS_RE.match(text, end)
            look = after.end() if after else end
            if look < n and text[look] == "(":
                tokens.append(Token("FUNC", word.upper(), pos))
                pos = end
                continue
            if word.upper() in ("TRUE", "FALSE"):
                tokens.append(Token("BOOL", word.upper() == "TRUE", pos))
                pos = end
                continue
            raise FormulaError(f"unsupported name {word!r}", pos)
        for op in _OPERATORS:
            if text.startswith(op, pos):
                tokens.append(Token("OP", op, pos))
                pos += len(op)
                break
        else:
            if ch in _PUNCT:
                tokens.append(Token(_PUNCT[ch], ch, pos))
                pos += 1
            else:
                raise FormulaError(f"unexpected character {ch!r}", pos)
    tokens.append(Token("EOF", None, n))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.value in ops

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise FormulaError(f"expected {_TOKEN_TEXT[kind]}, found {_describe(self.tok)}", self.tok.pos)
        return self.advance()

    def binary_level(self, ops, operand):
        left = operand()
        while self.at_op(*ops):
            op = self.advance().value
            left = Binary(op, left, operand())
        return left

    def comparison(self) -> Node:
        return self.binary_level(COMPARISON_OPS, self.concat)

    def concat(self) -> Node:
        return self.binary_level(("&",), self.additive)

    def additive(self) -> Node:
        return self.binary_level(("+", "-"), self.multiplicative)

    def multiplicative(self) -> Node:
        return self.binary_level(("*", "/"), self.unary)

    def unary(self) -> Node:
        if self.at_op("+", "-"):
            op = self.advance().value
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        left = self.primary()
        while self.at_op("^"):
            self.advance()
            left = Binary("^", left, self.signed_primary())
        return left

    def signed_primary(self) -> Node:
        # exponent operands may carry a sign: 2^-1
        if self.at_op("+", "-"):
            op = self.advance().value
            return Unary(op, self.signed_primary())
        return self.primary()

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "NUM":
            self.advance()
            return Number(tok.value)
        if tok.kind == "STR":
            self.advance()
            return Text(tok.value)
        if tok.kind == "BOOL":
            self.advance()
            return Boolean(tok.value)
        if tok.kind == "REF":
            self.advance()
            if self.tok.kind == "COLON":
                self.advance()
                end_tok = self.tok
                if end_tok.kind != "REF" or end_tok.value.sheet is not None:
                    raise FormulaError("expected cell reference after ':'", end_tok.pos)
                self.advance()
                return make_range(tok.value, end_tok.value)
            return tok.value
        if tok.kind == "FUNC":
            self.advance()
            self.expect("LPAREN")
            args = []
            if self.tok.kind != "RPAREN":
                args.append(self.comparison())
                while self.tok.kind == "COMMA":
                    self.advance()
                    args.append(self.comparison())
            self.expect("RPAREN")
            return Call(tok.value, tuple(args))
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.comparison()
            self.expect("RPAREN")
            return Group(inner)
        if tok.kind == "EOF":
            raise FormulaError("unexpected end of formula", tok.pos)
        raise FormulaError(f"unexpected {_describe(tok)}", tok.pos)


_TOKEN_TEXT = {"LPAREN": "'('", "RPAREN": "')'", "COMMA": "','", "COLON": "':'", "EOF": "end of formula"}


def _describe(tok: Token) -> str:
    if tok.kind in _TOKEN_TEXT:
        return _TOKEN_TEXT[tok.kind]
    if tok.kind == "REF":
        return "reference " + sheet_prefix(tok.value.sheet) + _cell_text(tok.value)
    if tok.kind == "NUM":
        return "number " + format_number(tok.value)
    return repr(tok.value)


def make_range(first: CellRef, second: CellRef) -> RangeRef:
    """Build a range normalized so start is the top-left corner."""
    if first.row <= second.row:
        top, top_abs, bottom, bottom_abs = first.row, first.row_abs, second.row, second.row_abs
    else:
        top, top_abs, bottom, bottom_abs = second.row, second.row_abs, first.row, first.row_abs
    if first.col <= second.col:
        left, left_abs, right, right_abs = first.col, first.col_abs, second.col, second.col_abs
    else:
        left, left_abs, right, right_abs = second.col, second.col_abs, first.col, first.col_abs
    sheet = first.sheet
    return RangeRef(
        CellRef(top, left, top_abs, left_abs, sheet),
        CellRef(bottom, right, bottom_abs, right_abs, sheet),
    )


def parse_formula(text: str) -> Node:
    """Parse formula text (starting with ``=``) into its AST root.

    Raises FormulaError with the 0-based offset of the offending token.
    """
    if not text.startswith("="):
        raise FormulaError("formula must start with '='", 0)
    parser = _Parser(tokenize(text, 1))
    root = parser.comparison()
    if parser.tok.kind != "EOF":
        raise FormulaError(f"unexpected {_describe(parser.tok)}", parser.tok.pos)
    return root


# --- printer ---------------------------------------------------------------

_PLAIN_SHEET_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


def sheet_prefix(sheet: Optional[str]) -> str:
    if sheet is None:
        return ""
    if _PLAIN_SHEET_RE.fullmatch(sheet) and not _A1_RE.fullmatch(sheet):
        return sheet + "!"
    return "'" + sheet.replace("'", "''") + "'!"


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _cell_text(ref: CellRef) -> str:
    return (
        ("$" if ref.col_abs else "")
        + column_letters(ref.col)
        + ("$" if ref.row_abs else "")
        + str(ref.row)
    )


def _precedence(node: Node) -> int:
    if isinstance(node, Binary):
        return BINARY_PRECEDENCE[node.op]
    if isinstance(node, Unary):
        return UNARY_PRECEDENCE
    return ATOM_PRECEDENCE


def _is_signed_primary(node: Node) -> bool:
    while isinstance(node, Unary):
        node = node.operand
    return _precedence(node) == ATOM_PRECEDENCE


def _render(node: Node, ref_text) -> str:
    def sub(child: Node, min_prec: int) -> str:
        text = _render(child, ref_text)
        # hand-built trees may lack Group nodes where precedence requires them
        return f"({text})" if _precedence(child) < min_prec else text

    if isinstance(node, Number):
        return format_number(node.value)
    if isinstance(node, Text):
        return '"' + node.value.replace('"', '""') + '"'
    if isinstance(node, Boolean):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, (CellRef, RangeRef)):
        return ref_text(node)
    if isinstance(node, Call):
        return node.name + "(" + ",".join(_render(a, ref_text) for a in node.args) + ")"
    if isinstance(node, Group):
        return "(" + _render(node.inner, ref_text) + ")"
    if isinstance(node, Unary):
        return node.op + sub(node.operand, UNARY_PRECEDENCE)
    if isinstance(node, Binary):
        prec = BINARY_PRECEDENCE[node.op]
        left = sub(node.left, prec)
        if node.op == "^" and _is_signed_primary(node.right):
            right = _render(node.right, ref_text)
        else:
            right = sub(node.right, prec + 1)
        return left + node.op + right
    raise TypeError(f"not a formula node: {node!r}")


def _a1_text(node) -> str:
    if isinstance(node, CellRef):
        return sheet_prefix(node.sheet) + _cell_text(node)
    return sheet_prefix(node.sheet) + _cell_text(node.start) + ":" + _cell_text(node.end)


def print_formula(ast: Node) -> str:
    """Canonical text of an AST, including the leading ``=``."""
    return "=" + _render(ast, _a1_text)


# --- references ------------------------------------------------------------


@dataclass(frozen=True)
class Occurrence:
    """One textual reference (a cell or a whole range) inside a formula."""

    node: Union[CellRef, RangeRef]
    sheet: str
    cross_sheet: bool


@dataclass
class References:
    cells: frozenset
    occurrences: tuple
    warnings: tuple = ()


def resolve_sheet(name: Optional[str], origin_sheet: str, sheets: Optional[Mapping[str, str]]) -> str:
    """Canonical sheet name for a reference; ``sheets`` maps casefolded names to canonical ones."""
    if name is None:
        return origin_sheet
    if sheets is not None:
        return sheets.get(name.casefold(), name)
    return name


def references(ast: Node) -> list:
    """Cell and range reference nodes in textual order."""
    return [n for n in walk(ast) if isinstance(n, (CellRef, RangeRef))]


def extract_references(
    ast: Node,
    origin_sheet: str,
    sheets: Optional[Mapping[str, str]] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> References:
    """Absolute cells referenced by a formula plus its reference occurrences.

    Ranges are enumerated cell by cell into ``cells`` (row-major, at most
    ``cap`` cells per range); each range still counts as one occurrence.
    Cell keys are ``(sheet, row, col)`` with canonical sheet names.
    """
    origin_key = origin_sheet.casefold()
    cells = set()
    occurrences = []
    warnings = []
    for ref in references(ast):
        sheet = resolve_sheet(ref.sheet, origin_sheet, sheets)
        occurrences.append(Occurrence(ref, sheet, sheet.casefold() != origin_key))
        if isinstance(ref, CellRef):
            cells.add((sheet, ref.row, ref.col))
            continue
        if ref.size > cap:
            warnings.append(f"range {_a1_text(ref)} has {ref.size} cells; enumerated first {cap}")
        count = 0
        for row in range(ref.start.row, ref.end.row + 1):
            if count >= cap:
                break
            for col in range(ref.start.col, ref.end.col + 1):
                if count >= cap:
                    break
                cells.add((sheet, row, col))
                count += 1
    return References(frozenset(cells), tuple(occurrences), tuple(warnings))


# --- normalized forms ------------------------------------------------------


def _r1c1_part(axis: str, value: int, origin: int, absolute: bool) -> str:
    if absolute:
        return f"{axis}{value}"
    offset = value - origin
    return axis if offset == 0 else f"{axis}[{offset}]"


def normalize_relative(ast: Node, origin_row: int, origin_col: int) -> str:
    """R1C1-style canonical text of a formula at a given origin.

    Relative parts become offsets (``R[-1]C``), absolute parts stay indices
    (``R1C1``); copy-equivalent formulas map to the same string.
    """

    def cell(ref: CellRef) -> str:
        return _r1c1_part("R", ref.row, origin_row, ref.row_abs) + _r1c1_part(
            "C", ref.col, origin_col, ref.col_abs
        )

    def ref_text(node) -> str:
        prefix = sheet_prefix(node.sheet.casefold()) if node.sheet is not None else ""
        if isinstance(node, CellRef):
            return prefix + cell(node)
        return prefix + cell(node.start) + ":" + cell(node.end)

    return "=" + _render(ast, ref_text)


def resolve_absolute(
    ast: Node, origin_sheet: str, sheets: Optional[Mapping[str, str]] = None
) -> tuple:
    """Hashable tree with every reference resolved to absolute coordinates.

    Parenthesized groups are dropped: they never change what is calculated.
    """
    if isinstance(ast, Group):
        return resolve_absolute(ast.inner, origin_sheet, sheets)
    if isinstance(ast, Number):
        return ("num", ast.value)
    if isinstance(ast, Text):
        return ("text", ast.value)
    if isinstance(ast, Boolean):
        return ("bool", ast.value)
    if isinstance(ast, CellRef):
        sheet = resolve_sheet(ast.sheet, origin_sheet, sheets).casefold()
        return ("ref", sheet, ast.row, ast.col)
    if isinstance(ast, RangeRef):
        sheet = resolve_sheet(ast.sheet, origin_sheet, sheets).casefold()
        return ("range", sheet, ast.start.row, ast.start.col, ast.end.row, ast.end.col)
    if isinstance(ast, Call):
        return ("call", ast.name) + tuple(resolve_absolute(a, origin_sheet, sheets) for a in ast.args)
    if isinstance(ast, Unary):
        return ("unary", ast.op, resolve_absolute(ast.operand, origin_sheet, sheets))
    if isinstance(ast, Binary):
        return (
            "binary",
            ast.op,
            resolve_absolute(ast.left, origin_sheet, sheets),
            resolve_absolute(ast.right, origin_sheet, sheets),
        )
    raise TypeError(f"not a formula node: {ast!r}")


def _resolved_children(node: tuple) -> tuple:
    kind = node[0]
    if kind == "call":
        return node[2:]
    if kind == "unary":
        return (node[2],)
    if kind == "binary":
        return node[2:]
    return ()


def subtrees(resolved: tuple, min_size: int) -> set:
    """All subtrees of a resolved tree having at least ``min_size`` nodes."""
    found = set()

    def visit(node: tuple) -> int:
        size = 1 + sum(visit(child) for child in _resolved_children(node))
        if size >= min_size:
            found.add(node)
        return size

    visit(resolved)
    return found


def translate(ast: Node, drow: int, dcol: int) -> Node:
    """Shift every reference, absolute or not, as a cut-and-paste move would."""
    if isinstance(ast, CellRef):
        return CellRef(ast.row + drow, ast.col + dcol, ast.row_abs, ast.col_abs, ast.sheet)
    if isinstance(ast, RangeRef):
        return RangeRef(translate(ast.start, drow, dcol), translate(ast.end, drow, dcol))
    if isinstance(ast, Call):
        return Call(ast.name, tuple(translate(a, drow, dcol) for a in ast.args))
    if isinstance(ast, Unary):
        return Unary(ast.op, translate(ast.operand, drow, dcol))
    if isinstance(ast, Binary):
        return Binary(ast.op, translate(ast.left, drow, dcol), translate(ast.right, drow, dcol))
    if isinstance(ast, Group):
        return Group(translate(ast.inner, drow, dcol))
    return ast
