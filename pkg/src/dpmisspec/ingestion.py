"""File formats and keyword labeling functions.

File layouts (UTF-8, ``\\n`` line endings, no headers unless noted):

* votes CSV: one row per example, ``m`` comma-separated integers in {-1, 0, 1}
* truth CSV: one label in {-1, 1} per line
* features / posteriors CSV: comma-separated floats, one row per example
* lfs JSON: ``[{"name": str, "pattern": str, "emit": -1 | 1}, ...]``
* model JSON: ``{"m": int, "mu1": [...], "deps": [{"j", "k", "kind"}], "mu2": [...]}``
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyCorpus, ParseError, RangeError, ValidationError
from .model import ModelParams

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class KeywordLF:
    """Votes ``emit`` when a word or an ordered two-word phrase occurs, else abstains.

    Each pattern word is tokenized like the documents, so ``"don't waste"``
    matches the token run ``don t waste``.
    """

    name: str
    pattern: str
    emit: int

    def __post_init__(self):
        words = self.pattern.split()
        if not 1 <= len(words) <= 2 or self.pattern != self.pattern.lower():
            raise ValidationError(
                f"LF {self.name!r}: pattern must be one or two lowercase words, got {self.pattern!r}")
        if not tokenize(self.pattern):
            raise ValidationError(f"LF {self.name!r}: pattern has no alphanumeric content")
        if self.emit not in (-1, 1):
            raise ValidationError(f"LF {self.name!r}: emit must be -1 or +1, got {self.emit!r}")

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tokenize(self.pattern))

    def matches(self, tokens: Sequence[str]) -> bool:
        pat = self.tokens
        k = len(pat)
        return any(tuple(tokens[i:i + k]) == pat for i in range(len(tokens) - k + 1))

    def to_dict(self) -> dict:
        return {"name": self.name, "pattern": self.pattern, "emit": self.emit}


@dataclass
class TextCorpus:
    documents: list
    truth: Optional[np.ndarray] = None


def apply_keyword_lfs(corpus, lfs: Sequence[KeywordLF]) -> np.ndarray:
    """Label matrix of shape ``(n_documents, n_lfs)``."""
    docs = corpus.documents if isinstance(corpus, TextCorpus) else list(corpus)
    if not docs:
        raise EmptyCorpus("cannot apply labeling functions to an empty corpus")
    if not lfs:
        raise ValidationError("need at least one labeling function")
    out = np.zeros((len(docs), len(lfs)), dtype=np.int8)
    for i, doc in enumerate(docs):
        tokens = tokenize(doc)
        for j, lf in enumerate(lfs):
            if lf.matches(tokens):
                out[i, j] = lf.emit
    return out


def _read_lines(path):
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return path, lines


def _parse_int_table(path, allowed, ncols=None):
    path, lines = _read_lines(path)
    rows = []
    for lineno, line in enumerate(lines, start=1):
        cells = line.rstrip("\r").split(",")
        if ncols is not None and len(cells) != ncols:
            raise ParseError(path, lineno, 1, f"expected {ncols} columns, found {len(cells)}")
        ncols = len(cells)
        row = []
        col = 1
        for cell in cells:
            token = cell.strip()
            try:
                value = int(token)
            except ValueError:
                raise ParseError(path, lineno, col, f"not an integer: {token!r}") from None
            if value not in allowed:
                raise RangeError(path, lineno, col, value, sorted(allowed))
            row.append(value)
            col += len(cell) + 1
        rows.append(row)
    if not rows:
        return np.zeros((0, ncols or 0), dtype=np.int8)
    return np.array(rows, dtype=np.int8)


def load_votes_csv(path) -> np.ndarray:
    return _parse_int_table(path, {-1, 0, 1})


def load_truth_csv(path) -> np.ndarray:
    return _parse_int_table(path, {-1, 1}, ncols=1).reshape(-1)


def _write_int_rows(path, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(str(int(v)) for v in row) + "\n")
    return path


def save_votes_csv(votes, path):
    votes = np.asarray(votes)
    if votes.size and not np.all(np.isin(votes, (-1, 0, 1))):
        raise ValidationError("votes must be in {-1, 0, 1}")
    return _write_int_rows(path, votes)


def save_truth_csv(truth, path):
    truth = np.asarray(truth).reshape(-1, 1)
    if truth.size and not np.all(np.isin(truth, (-1, 1))):
        raise ValidationError("truth labels must be -1 or +1")
    return _write_int_rows(path, truth)


def load_float_csv(path) -> np.ndarray:
    path, lines = _read_lines(path)
    rows = []
    for lineno, line in enumerate(lines, start=1):
        row = []
        col = 1
        for cell in line.rstrip("\r").split(","):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(path, lineno, col, f"not a number: {cell.strip()!r}") from None
            if not np.isfinite(value):
                raise RangeError(path, lineno, col, value, "finite reals")
            row.append(value)
            col += len(cell) + 1
        if rows and len(row) != len(rows[0]):
            raise ParseError(path, lineno, 1, f"expected {len(rows[0])} columns, found {len(row)}")
        rows.append(row)
    return np.array(rows, dtype=float)


def save_float_csv(values, path):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


load_features_csv = load_float_csv
save_features_csv = save_float_csv


def load_posteriors_csv(path) -> np.ndarray:
    values = load_float_csv(path).reshape(-1)
    if values.size and (values.min() < 0 or values.max() > 1):
        raise ValidationError(f"{path}: posteriors must lie in [0, 1]")
    return values


save_posteriors_csv = save_float_csv


def _load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.colno, exc.msg) from None


def write_json(obj, path):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_model_json(path) -> ModelParams:
    return ModelParams.from_dict(_load_json(path))


def save_model_json(params: ModelParams, path):
    return write_json(params.to_dict(), path)


def load_lfs_json(path) -> list[KeywordLF]:
    raw = _load_json(path)
    if not isinstance(raw, list):
        raise ValidationError(f"{path}: expected a JSON list of labeling functions")
    try:
        return [KeywordLF(str(d["name"]), str(d["pattern"]), int(d["emit"])) for d in raw]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed labeling function entry: {exc}") from None


def save_lfs_json(lfs: Sequence[KeywordLF], path):
    path = Path(path)
    path.write_text(json.dumps([lf.to_dict() for lf in lfs], indent=2) + "\n", encoding="utf-8")
    return path


def load_corpus(path, truth_path=None) -> TextCorpus:
    """Plain-text corpus, one document per line."""
    _, lines = _read_lines(path)
    truth = load_truth_csv(truth_path) if truth_path else None
    if truth is not None and truth.size != len(lines):
        raise ValidationError(f"{len(lines)} documents but {truth.size} truth labels")
    return TextCorpus(lines, truth)


def save_dataset(dataset, directory):
    """Write ``votes.csv``, ``truth.csv`` and ``dataset.json`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_votes_csv(dataset.labels, directory / "votes.csv")
    save_truth_csv(dataset.truth, directory / "truth.csv")
    write_json({"seed": dataset.seed, "n": dataset.n, "source_params": dataset.source_params.to_dict()},
               directory / "dataset.json")
    return directory


def load_dataset(directory):
    from .sampling import SyntheticDataset

    directory = Path(directory)
    meta = _load_json(directory / "dataset.json")
    params = ModelParams.from_dict(meta["source_params"])
    votes = load_votes_csv(directory / "votes.csv")
    truth = load_truth_csv(directory / "truth.csv")
    if votes.size == 0:
        votes = np.zeros((0, params.m), dtype=np.int8)
    return SyntheticDataset(votes, truth.astype(np.int8), params, int(meta["seed"]))
