"""Numeric matrices, tagged term lists and term-feature occurrence matrices.

Row names may carry a class tag as an integer prefix separated by
whitespace: ``"4   coat protein"`` is term ``"coat protein"`` in class 4.
Rows without such a prefix are untagged (stored as tag 0).
"""
from __future__ import annotations

import csv
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DataMatrix",
    "TermDataset",
    "FormatError",
    "ParseError",
    "LANGUAGE_MODELS",
    "parse_tag",
    "normalize_term",
    "load_matrix",
    "save_matrix",
    "load_terms",
    "load_features",
    "tokenize_term",
    "build_feature_matrix",
]

LANGUAGE_MODELS = ("TM-TM", "TM-RD", "TM-BG", "TM-TG")

_TAG_RE = re.compile(r"^\s*(\d+)\s+(\S.*?)\s*$")


class FormatError(ValueError):
    """Input table is not rectangular or otherwise malformed."""


class ParseError(ValueError):
    """A cell could not be read as a number."""

    def __init__(self, message, row, col):
        super().__init__(f"{message} (row {row}, column {col})")
        self.row = row
        self.col = col


def parse_tag(name: str) -> tuple[int, str]:
    """Split ``"TAG rest"`` into ``(TAG, rest)``; untagged names give tag 0."""
    m = _TAG_RE.match(name)
    if m is None:
        return 0, name.strip()
    tag = int(m.group(1))
    if tag < 1:
        return 0, name.strip()
    return tag, m.group(2)


def normalize_term(term: str) -> str:
    """Lowercase and collapse whitespace runs to single spaces."""
    return " ".join(term.lower().split())


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """N x d numeric attribute matrix with row names and optional class tags.

    ``class_tags`` is ``None`` when no row carries a tag; otherwise an integer
    array with 0 marking untagged rows.
    """

    values: np.ndarray
    row_names: tuple[str, ...]
    col_names: tuple[str, ...] = ()
    class_tags: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise FormatError(f"expected a non-empty 2-D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ParseError("non-finite value", int(bad[0]) + 1, int(bad[1]) + 1)
        object.__setattr__(self, "values", _frozen(values))
        names = tuple(self.row_names) if self.row_names else tuple(str(i + 1) for i in range(len(values)))
        if len(names) != values.shape[0]:
            raise FormatError("row_names length does not match the number of rows")
        object.__setattr__(self, "row_names", names)
        cols = tuple(self.col_names) if self.col_names else tuple(f"V{j + 1}" for j in range(values.shape[1]))
        if len(cols) != values.shape[1]:
            raise FormatError("col_names length does not match the number of columns")
        object.__setattr__(self, "col_names", cols)
        if self.class_tags is not None:
            tags = np.asarray(self.class_tags, dtype=int)
            if tags.shape != (values.shape[0],):
                raise FormatError("class_tags must have one entry per row")
            if np.any(tags < 0):
                raise ValueError("class tags must be positive integers (0 = untagged)")
            object.__setattr__(self, "class_tags", _frozen(tags))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def labels(self) -> tuple[str, ...]:
        """Row names with any class-tag prefix removed."""
        return tuple(parse_tag(n)[1] for n in self.row_names)

    @classmethod
    def from_rows(cls, values, row_names: Sequence[str], col_names: Sequence[str] = ()):
        """Build a matrix, parsing class tags out of ``row_names``."""
        tags = np.array([parse_tag(n)[0] for n in row_names], dtype=int)
        return cls(values, tuple(row_names), tuple(col_names), tags if tags.any() else None)

    def take(self, index) -> "DataMatrix":
        """Row subset, keeping names and tags aligned."""
        index = np.asarray(index)
        tags = None if self.class_tags is None else self.class_tags[index]
        return DataMatrix(self.values[index], tuple(self.row_names[i] for i in index), self.col_names, tags)


def _sniff_delimiter(path: Path, fmt: str | None) -> str:
    if fmt == "csv":
        return ","
    if fmt == "tsv":
        return "\t"
    if fmt is not None:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'tsv'")
    return "\t" if path.suffix.lower() in (".tsv", ".tab") else ","


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_matrix(path, format: str | None = None) -> DataMatrix:
    """Read a numeric CSV/TSV table.

    The first column holds row names when it is not numeric (or when the
    header's first cell is empty).  A first line with non-numeric cells is
    taken as the header.

    Raises
    ------
    FormatError
        Ragged rows or an empty table.
    ParseError
        A non-numeric data cell; the message carries 1-based row/column.
    """
    path = Path(path)
    delim = _sniff_delimiter(path, format)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delim) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: empty table")

    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise FormatError(f"{path}: row {i + 1} has {len(r)} cells, expected {width}")

    header = None
    first = rows[0]
    if first[0].strip() == "" or not all(_is_number(c) for c in first[1:]):
        header, rows = first, rows[1:]
        if not rows:
            raise FormatError(f"{path}: header without data rows")
    named = (header is not None and header[0].strip() == "") or any(not _is_number(r[0]) for r in rows)

    start = 1 if named else 0
    offset = 2 if header is not None else 1
    values = np.empty((len(rows), width - start))
    for i, r in enumerate(rows):
        for j in range(start, width):
            try:
                values[i, j - start] = float(r[j])
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {r[j]!r}", i + offset, j + 1) from None
    if values.shape[1] == 0:
        raise FormatError(f"{path}: no numeric columns")
    names = [r[0].strip() for r in rows] if named else [str(i + 1) for i in range(len(rows))]
    cols = [c.strip() for c in header[start:]] if header is not None else []
    return DataMatrix.from_rows(values, names, cols)


def save_matrix(matrix: DataMatrix, path, format: str | None = None) -> None:
    """Write ``matrix`` so that :func:`load_matrix` reads it back bit-exactly."""
    path = Path(path)
    delim = _sniff_delimiter(path, format)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delim, lineterminator="\n")
        w.writerow([""] + list(matrix.col_names))
        for name, row in zip(matrix.row_names, matrix.values):
            w.writerow([name] + [repr(float(v)) for v in row])


# -- terms -----------------------------------------------------------------


@dataclass(frozen=True)
class TermDataset:
    """Terms described by a feature list under one language model.

    ``terms`` are stored normalised (lowercase, single spaces); ``tags`` holds
    the class tag per term (0 when untagged).
    """

    terms: tuple[str, ...]
    features: tuple[str, ...]
    model: str = "TM-RD"
    tags: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.model not in LANGUAGE_MODELS:
            raise ValueError(f"unknown language model {self.model!r}; expected one of {LANGUAGE_MODELS}")
        terms = tuple(normalize_term(t) for t in self.terms)
        if not terms or any(not t for t in terms):
            raise ValueError("terms must be non-empty strings")
        seen, dupes = set(), []
        for t in terms:
            if t in seen:
                dupes.append(t)
            seen.add(t)
        if dupes:
            raise ValueError(f"duplicate terms after normalisation: {dupes[:5]}")
        features = tuple(normalize_term(f) for f in self.features)
        if not features or any(not f for f in features):
            raise ValueError("feature list must be non-empty")
        if len(set(features)) != len(features):
            raise ValueError("duplicate features")
        tags = tuple(int(t) for t in self.tags) if self.tags else (0,) * len(terms)
        if len(tags) != len(terms):
            raise ValueError("tags must have one entry per term")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "tags", tags)

    def __len__(self):
        return len(self.terms)

    @property
    def token_sets(self) -> list[frozenset[str]]:
        """Per-term set of features it contains."""
        feats = set(self.features)
        return [frozenset(tokenize_term(t, self.model, self.features) & feats) for t in self.terms]

    @property
    def row_names(self) -> tuple[str, ...]:
        return tuple(f"{g} {t}" if g else t for g, t in zip(self.tags, self.terms))

    @classmethod
    def from_tagged(cls, lines: Iterable[str], features: Sequence[str] | None = None, model: str = "TM-RD"):
        """Build from ``"TAG<ws>term"`` lines.

        When ``features`` is omitted for the word-based models, the feature
        list is every token seen across the terms (in first-seen order).
        """
        tags, terms = [], []
        for line in lines:
            if not line.strip():
                continue
            tag, term = parse_tag(line)
            tags.append(tag)
            terms.append(term)
        if features is None:
            if model == "TM-RD":
                raise ValueError("TM-RD needs a radical dictionary")
            vocab: dict[str, None] = {}
            for t in terms:
                for tok in _word_ngrams(normalize_term(t).split(), _NGRAM[model]):
                    vocab.setdefault(tok)
            features = list(vocab)
        return cls(tuple(terms), tuple(features), model, tuple(tags))


def load_terms(path, features_path=None, model: str = "TM-RD") -> TermDataset:
    """Read a term list (one ``[TAG ]term`` per line) and a feature dictionary."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    features = load_features(features_path) if features_path is not None else None
    return TermDataset.from_tagged(lines, features, model)


def load_features(path) -> list[str]:
    """One token per line; blank lines ignored."""
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


_NGRAM = {"TM-TM": 1, "TM-BG": 2, "TM-TG": 3}


def _word_ngrams(words, n):
    return [" ".join(words[i:i + n]) for i in range(len(words) - n + 1)]


def tokenize_term(term: str, model: str, radicals: Iterable[str] = ()) -> set[str]:
    """Token set of ``term`` under a language model.

    TM gives the words, BG adjacent word pairs, TG adjacent word triples and
    RD the radicals from ``radicals`` that occur as substrings.  Terms are
    case-folded and split on whitespace; punctuation stays inside tokens.

    >>> sorted(tokenize_term("prespore development", "TM-RD", ["sept", "prespore"]))
    ['prespore']
    """
    text = normalize_term(term)
    if model == "TM-RD":
        return {r for r in (normalize_term(x) for x in radicals) if r and r in text}
    try:
        n = _NGRAM[model]
    except KeyError:
        raise ValueError(f"unknown language model {model!r}") from None
    return set(_word_ngrams(text.split(), n))


def build_feature_matrix(dataset: TermDataset) -> DataMatrix:
    """Binary term x feature occurrence matrix; rows keep the class tags."""
    index = {f: j for j, f in enumerate(dataset.features)}
    values = np.zeros((len(dataset), len(dataset.features)))
    for i, tokens in enumerate(dataset.token_sets):
        for tok in tokens:
            values[i, index[tok]] = 1.0
    if not values.any():
        warnings.warn("feature matrix is all zero; correspondence analysis is undefined", RuntimeWarning, stacklevel=2)
    tags = np.array(dataset.tags, dtype=int)
    return DataMatrix(values, dataset.row_names, dataset.features, tags if tags.any() else None)
