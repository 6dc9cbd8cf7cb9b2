"""Command-line driver: ingest, smells, evaluate, synth, report, config.

Settings come from built-in defaults, then a JSON config file
(``--config`` or ``SMELLFAULT_CONFIG``), then ``SMELLFAULT_*`` environment
variables, then command-line flags; later sources win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .corpus import CorpusError, corpus_summary, load_corpus
from .evaluation.cv import MODES, Protocol
from .evaluation.report import dumps_results, iso_f1_csv, plot_points_csv, results_document, summary_table
from .formula import FormulaError, a1
from .learn.families import (DEFAULT_ALPHA_GRID, DEFAULT_DEPTH, DEFAULT_EPOCHS, DEFAULT_TREE_GRID, ROSTER_IDS,
                             make_family)
from .learn.svm import TrainingError
from .learn.threshold import DEFAULT_PERCENTS
from .smells import FeatureMatrix, build_feature_matrix
from .synth import SynthConfig, generate, write_corpus

ENV_PREFIX = "SMELLFAULT_"
RESULTS_FILE = "results.json"
PLOT_FILE = "plot.csv"
ISO_FILE = "iso_f1.csv"


class CliError(Exception):
    """Invalid configuration or input; reported with a nonzero exit code."""


@dataclass
class RunConfig:
    corpus: list = field(default_factory=list)
    labels: str = None
    matrix: str = None
    out: str = "results"
    folds: int = 10
    seed: int = 0
    classifiers: list = field(default_factory=lambda: list(ROSTER_IDS))
    percents: list = field(default_factory=lambda: list(DEFAULT_PERCENTS))
    trees: list = field(default_factory=lambda: list(DEFAULT_TREE_GRID))
    alphas: list = field(default_factory=lambda: list(DEFAULT_ALPHA_GRID))
    max_depth: int = DEFAULT_DEPTH
    epochs: int = DEFAULT_EPOCHS
    mode: str = "nested"
    aggregation: str = "pooled"
    standardization: str = "fold"
    synth: dict = field(default_factory=lambda: SynthConfig().to_dict())

    # keys naming files; they do not enter the config hash
    PATH_KEYS = ("corpus", "labels", "matrix", "out")

    def validate(self, need_paths=True):
        if self.folds < 2:
            raise CliError(f"folds must be at least 2, got {self.folds}")
        unknown = [c for c in self.classifiers if c not in ROSTER_IDS]
        if unknown:
            raise CliError(f"unknown classifiers: {', '.join(unknown)}")
        if not self.classifiers:
            raise CliError("the classifier roster is empty")
        if self.mode not in MODES:
            raise CliError(f"mode must be one of {', '.join(MODES)}")
        if self.aggregation not in ("pooled", "macro"):
            raise CliError("aggregation must be 'pooled' or 'macro'")
        if self.standardization not in ("fold", "global"):
            raise CliError("standardization must be 'fold' or 'global'")
        for name in ("percents", "trees", "alphas"):
            if not getattr(self, name):
                raise CliError(f"grid {name!r} is empty")
        if need_paths:
            for p in list(self.corpus) + [x for x in (self.labels, self.matrix) if x]:
                if not Path(p).exists():
                    raise CliError(f"path does not exist: {p}")

    def hash(self) -> str:
        doc = {k: v for k, v in asdict(self).items() if k not in self.PATH_KEYS and k != "synth"}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode("utf-8")).hexdigest()


_FIELDS = {f.name for f in fields(RunConfig)}


def _apply(config: RunConfig, doc: dict, source: str) -> RunConfig:
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        raise CliError(f"{source}: unknown keys {', '.join(unknown)}")
    if "synth" in doc:
        try:
            SynthConfig(**{**config.synth, **doc["synth"]})
        except (TypeError, ValueError) as exc:
            raise CliError(f"{source}: synth: {exc}") from None
        doc = dict(doc, synth={**config.synth, **doc["synth"]})
    return replace(config, **doc)


def _env_overrides(environ) -> dict:
    doc = {}
    conversions = {
        "SEED": ("seed", int),
        "FOLDS": ("folds", int),
        "OUT": ("out", str),
        "FROM_MATRIX": ("matrix", str),
        "LABELS": ("labels", str),
        "CLASSIFIERS": ("classifiers", lambda v: [c.strip() for c in v.split(",") if c.strip()]),
        "PAPER_MODE": ("mode", lambda v: "paper" if v.strip().lower() in ("1", "true", "yes") else "nested"),
    }
    for suffix, (key, convert) in conversions.items():
        value = environ.get(ENV_PREFIX + suffix)
        if value is not None:
            try:
                doc[key] = convert(value)
            except ValueError:
                raise CliError(f"{ENV_PREFIX}{suffix}: cannot parse {value!r}") from None
    return doc


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    config = RunConfig()
    config_path = getattr(args, "config", None) or environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"cannot read config {config_path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"{config_path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise CliError(f"{config_path}: top level must be an object")
        config = _apply(config, doc, config_path)
    config = _apply(config, _env_overrides(environ), "environment")
    flags = {}
    for key in ("seed", "folds", "out", "labels"):
        if getattr(args, key, None) is not None:
            flags[key] = getattr(args, key)
    if getattr(args, "from_matrix", None):
        flags["matrix"] = args.from_matrix
    if getattr(args, "classifiers", None):
        flags["classifiers"] = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    if getattr(args, "paper_mode", False):
        flags["mode"] = "paper"
    if getattr(args, "paths", None):
        flags["corpus"] = list(args.paths)
    return _apply(config, flags, "command line")


# --- atomic output ------------------------------------------------------------


def write_outputs(outputs: dict):
    """Write ``{path: text}`` all-or-nothing: temp files first, then renames."""
    staged = []
    try:
        for path, text in outputs.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            Path(tmp).unlink(missing_ok=True)
        raise
    done = []
    try:
        for tmp, path in staged:
            os.replace(tmp, path)
            done.append(path)
    except BaseException:
        for tmp, _ in staged:
            Path(tmp).unlink(missing_ok=True)
        for path in done:
            path.unlink(missing_ok=True)
        raise


# --- commands -----------------------------------------------------------------


def _load(config: RunConfig):
    if not config.corpus:
        raise CliError("no corpus paths given")
    return load_corpus(config.corpus, config.labels)


def load_report(corpus) -> dict:
    stats = corpus_summary(corpus)
    return {
        "workbooks": stats.workbooks,
        "formulas": stats.formulas,
        "faulty": stats.faulty,
        "fault_rate": stats.fault_rate,
        "unparsed": [
            {"cell": f"{wb.name}!{sheet}!{address}", "error": message}
            for wb in corpus.workbooks
            for sheet, address, message in wb.parse_errors()
        ],
        "dangling_labels": [f"{e.workbook}!{e.worksheet}!{a1(e.row, e.col)}" for e in corpus.dangling],
    }


def cmd_ingest(config: RunConfig, out=None) -> str:
    text = json.dumps(load_report(_load(config)), indent=2) + "\n"
    if out:
        write_outputs({out: text})
    return text


def cmd_smells(config: RunConfig, out) -> FeatureMatrix:
    matrix = build_feature_matrix(_load(config))
    write_outputs({out: matrix.to_csv()})
    return matrix


def evaluate_matrix(matrix: FeatureMatrix, csv_text: str, config: RunConfig) -> dict:
    """Run the protocol for every roster member; returns the results document."""
    protocol = Protocol(matrix.X, matrix.y, config.folds, config.seed, mode=config.mode,
                        aggregation=config.aggregation, standardization=config.standardization)
    entries = []
    for cid in config.classifiers:
        family = make_family(cid, tuple(config.percents), tuple(config.trees), tuple(config.alphas),
                             config.max_depth, config.epochs)
        entries.append(protocol.evaluate(family))
    corpus_id = "sha256:" + hashlib.sha256(csv_text.encode("utf-8")).hexdigest()
    return results_document(entries, corpus_id, config.seed, config.hash())


def cmd_evaluate(config: RunConfig) -> dict:
    if config.matrix:
        csv_text = Path(config.matrix).read_text(encoding="utf-8")
        matrix = FeatureMatrix.from_csv(csv_text)
    else:
        matrix = build_feature_matrix(_load(config))
        csv_text = matrix.to_csv()
    if len(matrix) == 0:
        raise CliError("the feature matrix is empty")
    doc = evaluate_matrix(matrix, csv_text, config)
    out = Path(config.out)
    write_outputs({
        out / RESULTS_FILE: dumps_results(doc),
        out / PLOT_FILE: plot_points_csv(doc),
        out / ISO_FILE: iso_f1_csv(),
    })
    return doc


def cmd_synth(config: RunConfig) -> list:
    synth = generate(SynthConfig(**{**config.synth, "signal_smells": tuple(config.synth["signal_smells"])}))
    out = Path(config.out)
    existed = out.exists()
    try:
        return write_corpus(synth, out)
    except BaseException:
        if not existed:
            for p in out.glob("*"):
                p.unlink()
            out.rmdir()
        raise


def cmd_report(results_path) -> str:
    try:
        doc = json.loads(Path(results_path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {results_path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{results_path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return summary_table(doc)
    except (KeyError, TypeError) as exc:
        raise CliError(f"{results_path}: malformed results document ({exc})") from None


def default_config_text() -> str:
    doc = asdict(RunConfig())
    return json.dumps(doc, indent=2) + "\n"


# --- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output file or directory")

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("paths", nargs="*", help="workbook files or directories of *.json")
    corpus.add_argument("--labels", help="label CSV")

    parser = argparse.ArgumentParser(prog="smellfault", description="Smell-based spreadsheet fault prediction.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common, corpus], help="load a corpus and print the load report")
    sub.add_parser("smells", parents=[common, corpus], help="write the feature matrix CSV")

    ev = sub.add_parser("evaluate", parents=[common, corpus], help="cross-validate the classifier roster")
    ev.add_argument("--folds", type=int, help="number of folds k")
    ev.add_argument("--classifiers", help="comma-separated classifier ids")
    ev.add_argument("--from-matrix", help="feature matrix CSV instead of a corpus")
    ev.add_argument("--paper-mode", action="store_true", help="single-level grid search reported on the same folds")

    sy = sub.add_parser("synth", parents=[common], help="generate a labeled synthetic corpus")
    sy.add_argument("--formulas", type=int)
    sy.add_argument("--workbooks", type=int)
    sy.add_argument("--sheets", type=int)
    sy.add_argument("--fault-rate", type=float)
    sy.add_argument("--signal-smells", help="comma-separated smell indices")
    sy.add_argument("--signal-strength", type=float)

    rp = sub.add_parser("report", help="print the summary table of a results file")
    rp.add_argument("results", help="results.json")

    cf = sub.add_parser("config", help="configuration utilities")
    cf.add_argument("--dump-defaults", action="store_true", help="print the default config as JSON")
    return parser


def _synth_flags(args) -> dict:
    doc = {}
    for key in ("formulas", "workbooks", "sheets", "fault_rate", "signal_strength"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.signal_smells:
        try:
            doc["signal_smells"] = [int(s) for s in args.signal_smells.split(",")]
        except ValueError:
            raise CliError(f"--signal-smells: not a list of integers: {args.signal_smells!r}") from None
    if args.seed is not None:
        doc["seed"] = args.seed
    return doc


def run(argv=None, environ=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command == "config":
        if not args.dump_defaults:
            raise CliError("config: nothing to do (try --dump-defaults)")
        stdout.write(default_config_text())
        return 0
    if args.command == "report":
        stdout.write(cmd_report(args.results))
        return 0
    config = resolve_config(args, environ)
    if args.command == "synth":
        if not args.out:
            raise CliError("synth: --out is required")
        config = _apply(config, {"synth": _synth_flags(args)}, "command line")
        for path in cmd_synth(config):
            stdout.write(f"{path}\n")
        return 0
    config.validate()
    if args.command == "ingest":
        stdout.write(cmd_ingest(config, args.out))
    elif args.command == "smells":
        if not args.out:
            raise CliError("smells: --out is required")
        matrix = cmd_smells(config, args.out)
        stdout.write(f"{len(matrix)} formulas, {len(matrix.excluded)} excluded -> {args.out}\n")
    elif args.command == "evaluate":
        doc = cmd_evaluate(config)
        stdout.write(summary_table(doc))
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except (CliError, CorpusError, FormulaError, TrainingError, ValueError, OSError) as exc:
        kind = type(exc).__name__
        sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
