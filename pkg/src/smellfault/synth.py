"""Synthetic labeled corpora with planted faults.

Each sheet holds a data block (text headers over numeric cells, a few
blanks), a vertical copy run, a horizontal totals run and a region of
standalone calculations that reference data, each other and other sheets.
Faults are planted by mutating standalone formulas; where they land is
steered by the strengths of a chosen subset of smells.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Cell, Corpus, LabelEntry, LabelSet, Workbook, Worksheet, attach_labels, dumps_labels, dumps_workbook
from .formula import a1, Binary, Call, CellRef, Group, Node, Number, RangeRef, parse_formula, print_formula, walk
from .smells import build_feature_matrix

OP_NOISE = (0.0, 0.0, 1.0, 8.0)
MUTATIONS = ("shift", "drop", "constant")
MUTATION_WEIGHTS = (0.8, 0.1, 0.1)
PROPENSITY_RIDGE = 1.0
PROPENSITY_FLOOR = 0.05


@dataclass(frozen=True)
class SynthConfig:
    workbooks: int = 10
    sheets: int = 3
    formulas: int = 5000
    fault_rate: float = 0.03
    signal_smells: tuple = (8, 9, 11)
    signal_strength: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.fault_rate < 1.0:
            raise ValueError("fault_rate must lie in (0, 1)")
        if not self.signal_smells:
            raise ValueError("signal_smells must not be empty")
        if any(not 0 <= s < 19 for s in self.signal_smells):
            raise ValueError("signal smell indices must lie in [0, 18]")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0, 1]")
        if self.workbooks < 1 or self.sheets < 1:
            raise ValueError("need at least one workbook and one sheet")
        if self.formulas < 12 * self.workbooks * self.sheets:
            raise ValueError("need at least 12 formulas per sheet")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["signal_smells"] = list(self.signal_smells)
        return doc


@dataclass
class SynthCorpus:
    workbooks: list
    labels: LabelSet
    config: SynthConfig

    @property
    def corpus(self) -> Corpus:
        return attach_labels(self.workbooks, self.labels)


@dataclass
class _Sheet:
    name: str
    cells: dict = field(default_factory=dict)
    data_rows: tuple = (2, 2)
    data_cols: int = 0
    # standalone formulas: position -> (ast, fault-candidate flag)
    calc: dict = field(default_factory=dict)

    def numeric(self, row: int, col: int) -> bool:
        cell = self.cells.get((row, col))
        return cell is not None and cell[0] == "number"


def _ref(row, col, sheet=None, absolute=False) -> CellRef:
    return CellRef(row, col, absolute, absolute, sheet)


def _sheet_name(i: int) -> str:
    return f"Sheet{i + 1}" if i % 3 != 2 else f"Summary {i + 1}"


def _sheet_budgets(config: SynthConfig) -> list:
    n = config.workbooks * config.sheets
    base, extra = divmod(config.formulas, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


class _Builder:
    def __init__(self, config: SynthConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng

    def chance(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    # -- layout --------------------------------------------------------------

    def layout(self, sheet: _Sheet, budget: int):
        rng = self.rng
        m = int(rng.integers(3, 7))
        run = max(3, round(0.2 * budget))
        first, last = 2, run + 1
        sheet.data_rows, sheet.data_cols = (first, last), m
        for col in range(1, m + 1):
            if self.chance(0.8):
                sheet.cells[(1, col)] = ("text", f"Item {col}")
            for row in range(first, last + 1):
                u = rng.random()
                if u < 0.05:
                    continue
                if u < 0.07:
                    sheet.cells[(row, col)] = ("empty", None)
                else:
                    sheet.cells[(row, col)] = ("number", int(rng.integers(1, 100)))

        templates = [
            lambda r: Binary("*", _ref(r, 1), _ref(r, 2)),
            lambda r: Call("SUM", (RangeRef(_ref(r, 1), _ref(r, m)),)),
            lambda r: Binary("-", Binary("+", _ref(r, 1), _ref(r, 2)), _ref(r, 3)),
            lambda r: Binary("/", _ref(r, 2), Number(float(int(rng.integers(2, 10))))),
        ]
        run_col = m + 2
        choice = int(rng.integers(len(templates)))
        sheet.cells[(1, run_col)] = ("text", "Line total")
        for row in range(first, last + 1):
            t = choice
            if first < row < last and self.chance(0.06):
                t = (choice + 1 + int(rng.integers(len(templates) - 1))) % len(templates)
            sheet.cells[(row, run_col)] = ("formula", print_formula(templates[t](row)))

        totals_row = last + 2
        sheet.cells[(totals_row, 1)] = ("text", "Totals")
        for col in range(2, m + 1):
            fn = "AVERAGE" if 2 < col < m and self.chance(0.1) else "SUM"
            sheet.cells[(totals_row, col)] = ("formula", print_formula(Call(fn, (RangeRef(_ref(first, col), _ref(last, col)),))))
        used = run + (m - 1)
        return budget - used

    # -- standalone formulas -------------------------------------------------

    def data_ref(self, wb_sheets, sheet: _Sheet) -> Node:
        # cross-sheet data flows from earlier sheets to later ones only, so
        # sheets differ in how many others reference them
        target = sheet
        earlier = wb_sheets[:wb_sheets.index(sheet)]
        if earlier and self.chance(0.25):
            target = self.pick(earlier)
        first, last = target.data_rows
        row = int(self.rng.integers(first, last + 1))
        col = int(self.rng.integers(1, target.data_cols + 1))
        return _ref(row, col, None if target is sheet else target.name, self.chance(0.1))

    def calc_ref(self, calcs, sheet: _Sheet) -> Node:
        if self.chance(0.7):
            owner, (row, col) = calcs[-1 - int(self.rng.integers(min(4, len(calcs))))]
        else:
            owner, (row, col) = self.pick(calcs)
        return _ref(row, col, None if owner is sheet else owner.name)

    def term(self, wb_sheets, sheet, calcs) -> Node:
        u = self.rng.random()
        if u < 0.35 and calcs:
            return self.calc_ref(calcs, sheet)
        if u < 0.47:
            first, last = sheet.data_rows
            a = int(self.rng.integers(first, last + 1))
            b = min(last + 1, a + int(self.rng.integers(1, 6)))
            col = int(self.rng.integers(1, sheet.data_cols + 1))
            return Call(self.pick(["SUM", "MAX", "MIN"]), (RangeRef(_ref(a, col), _ref(b, col)),))
        if u < 0.55:
            return Number(float(int(self.rng.integers(1, 20))))
        return self.data_ref(wb_sheets, sheet)

    def expression(self, wb_sheets, sheet, calcs) -> Node:
        n_terms = 1 + int(self.rng.poisson(1.2))
        if n_terms > 1 and self.chance(0.5):
            return self.wrap(Call("SUM", tuple(self.term(wb_sheets, sheet, calcs) for _ in range(n_terms))),
                             wb_sheets, sheet, calcs)
        expr = self.term(wb_sheets, sheet, calcs)
        for _ in range(n_terms - 1):
            op = self.pick(["+", "-", "*", "+"])
            rhs = self.term(wb_sheets, sheet, calcs)
            expr = Binary(op, Group(expr) if op == "*" and isinstance(expr, Binary) else expr, rhs)
        return self.wrap(expr, wb_sheets, sheet, calcs)

    def wrap(self, expr, wb_sheets, sheet, calcs) -> Node:
        # operator noise not tied to references or conditionals
        for _ in range(int(self.rng.poisson(self.rng.choice(OP_NOISE)))):
            expr = Call(self.pick(["ROUND", "ABS", "INT"]), (expr,) if self.chance(0.5) else (expr, Number(2.0)))
        depth = 0
        while depth < 3 and self.chance(0.3 if depth == 0 else 0.45):
            if self.chance(0.6):
                expr = Call("IFERROR", (expr, Number(0.0)))
            else:
                cond = Binary(self.pick([">", "<", ">="]), self.data_ref(wb_sheets, sheet),
                              Number(float(int(self.rng.integers(1, 100)))))
                other = self.term(wb_sheets, sheet, calcs) if self.chance(0.6) else Number(0.0)
                expr = Call("IF", (cond, expr, other))
            depth += 1
        return expr

    def standalone(self, wb_sheets, sheet: _Sheet, calcs, count: int):
        first, _ = sheet.data_rows
        start_col = sheet.data_cols + 4
        height = max(12, sheet.data_rows[1] - first + 1)
        own = []
        for i in range(count):
            col = start_col + i // height
            row = first + i % height
            if i % height == 0 and self.chance(0.5):
                sheet.cells[(1, col)] = ("text", f"Calc {col}")
            u = self.rng.random()
            candidate = True
            if u < 0.06:
                ast = self.calc_ref(calcs, sheet) if calcs else self.data_ref(wb_sheets, sheet)
            elif u < 0.10 and own:
                # same calculation written again elsewhere on the sheet
                ast = sheet.calc[self.pick(own)][0]
                candidate = False
            else:
                ast = self.expression(wb_sheets, sheet, calcs)
                if own and self.chance(0.08):
                    donor = sheet.calc[self.pick(own)][0]
                    shared = [n for n in walk(donor) if isinstance(n, Binary)]
                    if shared:
                        ast = Binary("+", ast, Group(self.pick(shared)))
                        candidate = False
            sheet.cells[(row, col)] = ("formula", print_formula(ast))
            sheet.calc[(row, col)] = (ast, candidate)
            own.append((row, col))
            calcs.append((sheet, (row, col)))


# --- mutations ---------------------------------------------------------------


def _replace(node: Node, target_index: int, replacement: Node) -> Node:
    counter = [-1]

    def rebuild(n):
        counter[0] += 1
        if counter[0] == target_index:
            return replacement
        if isinstance(n, Call):
            return Call(n.name, tuple(rebuild(a) for a in n.args))
        if isinstance(n, Binary):
            return Binary(n.op, rebuild(n.left), rebuild(n.right))
        if isinstance(n, Group):
            return Group(rebuild(n.inner))
        if hasattr(n, "operand"):
            return type(n)(n.op, rebuild(n.operand))
        return n

    return rebuild(node)


def _shiftable(ast: Node, sheet: _Sheet, sheets: dict) -> list:
    found = []
    for i, n in enumerate(walk(ast)):
        if not isinstance(n, CellRef):
            continue
        owner = sheets.get(n.sheet, sheet) if n.sheet else sheet
        first, last = owner.data_rows
        if not (first <= n.row <= last and n.col <= owner.data_cols and owner.numeric(n.row, n.col)):
            continue
        for d in (1, -1):
            if first <= n.row + d <= last and owner.numeric(n.row + d, n.col):
                found.append((i, n, d, owner))
                break
    return found


def _mutate(ast: Node, kind: str, sheet: _Sheet, sheets: dict, rng) -> Node:
    shiftable = _shiftable(ast, sheet, sheets)
    if kind == "drop":
        binaries = [(i, n) for i, n in enumerate(walk(ast)) if isinstance(n, Binary)]
        if binaries:
            i, n = binaries[int(rng.integers(len(binaries)))]
            return _replace(ast, i, n.left)
    if kind == "constant" and shiftable:
        i, n, _, owner = shiftable[int(rng.integers(len(shiftable)))]
        return _replace(ast, i, Number(float(owner.cells[(n.row, n.col)][1])))
    i, n, d, _ = shiftable[int(rng.integers(len(shiftable)))]
    return _replace(ast, i, CellRef(n.row + d, n.col, n.row_abs, n.col_abs, n.sheet))


# --- generation --------------------------------------------------------------


def _to_workbook(name: str, sheets: list) -> Workbook:
    worksheets = []
    for s in sheets:
        cells = {}
        for (row, col), (kind, value) in s.cells.items():
            ast = parse_formula(value) if kind == "formula" else None
            cells[(row, col)] = Cell(row, col, kind, value, ast=ast)
        worksheets.append(Worksheet(s.name, cells))
    return Workbook(name, worksheets)


def _candidate_log_weights(X: np.ndarray, is_candidate: np.ndarray) -> np.ndarray:
    """-log P(candidate | smells) for every candidate row.

    Adding this to the sampling keys makes planting follow the smell
    distribution of all formulas rather than that of the mutable subset.
    The propensity is a ridge-regularized logistic fit on standardized
    smells, clipped below at PROPENSITY_FLOOR.
    """
    spread = X.std(axis=0)
    Z = np.column_stack([np.ones(len(X)), (X - X.mean(axis=0)) / np.where(spread > 0, spread, 1.0)])
    t = is_candidate.astype(np.float64)
    beta = np.zeros(Z.shape[1])
    ridge = PROPENSITY_RIDGE * np.eye(Z.shape[1])
    ridge[0, 0] = 0.0
    for _ in range(50):
        p = 1.0 / (1.0 + np.exp(-(Z @ beta)))
        hessian = (Z * (p * (1.0 - p))[:, None]).T @ Z + ridge
        step = np.linalg.solve(hessian, Z.T @ (t - p) - ridge @ beta)
        beta += step
        if np.abs(step).max() < 1e-8:
            break
    p = 1.0 / (1.0 + np.exp(-(Z[is_candidate] @ beta)))
    return -np.log(np.maximum(p, PROPENSITY_FLOOR))


def _fault_temperature(strength: float) -> float:
    return math.inf if strength <= 0 else (1.0 - strength) / strength


def generate(config: SynthConfig) -> SynthCorpus:
    """Build a corpus for ``config``; identical seeds give identical corpora.

    Fault locations are drawn without replacement (Gumbel top-k) with
    probability proportional to exp(score / T), where score is the sum of
    the signal smells standardized over all formulas and
    T = (1 - strength) / strength: strength 0 is uniform, strength 1 picks
    the highest scores. Only some formulas can be mutated safely, so each
    candidate's key also carries an inverse-propensity term; without it even
    uniform planting would favour the smell profile of the mutable subset.
    """
    rng = np.random.default_rng(config.seed)
    builder = _Builder(config, rng)
    budgets = iter(_sheet_budgets(config))
    books = []
    for w in range(config.workbooks):
        sheets = [_Sheet(_sheet_name(i)) for i in range(config.sheets)]
        remaining = [builder.layout(s, next(budgets)) for s in sheets]
        calcs = []
        for s, count in zip(sheets, remaining):
            builder.standalone(sheets, s, calcs, count)
        books.append((f"wb{w:03d}", sheets))

    clean = [_to_workbook(name, sheets) for name, sheets in books]
    matrix = build_feature_matrix(clean)
    n_faults = round(config.fault_rate * len(matrix))
    if n_faults < 1:
        raise ValueError("configuration plants no faults; raise formulas or fault_rate")

    index = {key: i for i, key in enumerate(matrix.keys)}
    candidates = []
    for name, sheets in books:
        lookup = {s.name: s for s in sheets}
        for s in sheets:
            for (row, col), (ast, ok) in sorted(s.calc.items()):
                if ok and _shiftable(ast, s, lookup):
                    candidates.append((name, s, row, col, index[f"{name}!{s.name}!{a1(row, col)}"]))
    if len(candidates) < n_faults:
        raise ValueError(f"only {len(candidates)} fault candidates for {n_faults} faults")

    signal = matrix.X[:, list(config.signal_smells)]
    spread = signal.std(axis=0)
    z = (signal - signal.mean(axis=0)) / np.where(spread > 0, spread, 1.0)
    rows = [c[4] for c in candidates]
    is_candidate = np.zeros(len(matrix), dtype=bool)
    is_candidate[rows] = True
    score = z.sum(axis=1)[rows]
    noise = rng.gumbel(size=len(candidates)) + _candidate_log_weights(matrix.X, is_candidate)
    temperature = _fault_temperature(config.signal_strength)
    if math.isinf(temperature):
        keys = noise
    elif temperature == 0:
        keys = score * 1e6 + noise
    else:
        keys = score / temperature + noise
    chosen = sorted(np.argsort(-keys, kind="stable")[:n_faults].tolist())

    entries = []
    book_sheets = dict(books)
    for i in chosen:
        name, s, row, col, _ = candidates[i]
        lookup = {sh.name: sh for sh in book_sheets[name]}
        kind = MUTATIONS[int(rng.choice(len(MUTATIONS), p=MUTATION_WEIGHTS))]
        mutated = _mutate(s.calc[(row, col)][0], kind, s, lookup, rng)
        s.cells[(row, col)] = ("formula", print_formula(mutated))
        entries.append(LabelEntry(name, s.name, row, col, "faulty"))
    workbooks = [_to_workbook(name, sheets) for name, sheets in books]
    return SynthCorpus(workbooks, LabelSet(entries), config)


def write_corpus(synth: SynthCorpus, outdir) -> list:
    """Write ``<name>.json`` per workbook plus ``labels.csv``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for wb in synth.workbooks:
        path = outdir / f"{wb.name}.json"
        path.write_text(dumps_workbook(wb), encoding="utf-8")
        paths.append(path)
    labels = outdir / "labels.csv"
    labels.write_text(dumps_labels(synth.labels), encoding="utf-8")
    return paths + [labels]
