"""Bundled and generated datasets.

``load_iris`` reads Fisher's iris measurements (150 x 4, row names
``"<class> <index>"``).  ``sporulation_terms`` generates a stand-in for a
1893-term sporulation terminology: six overlapping classes described by 38
morphological radicals.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .data import DataMatrix, TermDataset, load_matrix

__all__ = [
    "load_iris",
    "IRIS_CLASSES",
    "SAMPLE_TERMS",
    "SAMPLE_RADICALS",
    "SAMPLE_BIGRAMS",
    "SAMPLE_TRIGRAMS",
    "sample_terms",
    "SPORULATION_RADICALS",
    "SPORULATION_CLASS_SIZES",
    "sporulation_terms",
    "BUILTIN_DATASETS",
    "load_builtin",
]

IRIS_CLASSES = ("setosa", "versicolor", "virginica")


def load_iris() -> DataMatrix:
    """Iris as a 150 x 4 matrix with class tags 1..3."""
    with resources.as_file(resources.files("svcgrid") / "data" / "iris.csv") as path:
        return load_matrix(path)


# A few tagged terms per class, with radical, bigram and trigram examples.
SAMPLE_TERMS = (
    "1 insertion into the septum",
    "1 integrity of the septum",
    "1 septal compartment",
    "1 septal localization of the division",
    "1 septal peptidoglycan during cell division",
    "2 prespore development",
    "2 prespore gene expression",
    "2 prespore programme of gene expression",
    "2 prespore-like cells",
    "2 prespore-specific",
    "3 cortex layer , synthesized between , the forespore inner and , outer membranes",
    "3 cortex peptidoglycan in spores",
    "3 cortex structure",
    "3 cortexless spores",
    "3 cortical or vegetative peptidoglycan synthesis",
    "4 coat, encases the spore",
    "4 coats",
    "4 coats of wild-type spores",
    "4 compartment",
    "4 compartment-specific",
)
SAMPLE_RADICALS = ("init", "sept", "prespore", "endospore", "engulfment")
SAMPLE_BIGRAMS = ("cell specific", "spore coat", "during sporulation", "and sporulation", "of sporulation")
SAMPLE_TRIGRAMS = ("the mother cell", "mother cell specific", "in the mother", "mother cell compartment",
                   "growth and sporulation")


def sample_terms(model: str = "TM-RD") -> TermDataset:
    """The sample terms under one language model."""
    features = {"TM-RD": SAMPLE_RADICALS, "TM-BG": SAMPLE_BIGRAMS, "TM-TG": SAMPLE_TRIGRAMS}.get(model)
    return TermDataset.from_tagged(SAMPLE_TERMS, features, model)


SPORULATION_RADICALS = (
    "sept", "spore", "prespore", "forespore", "endospore", "engulf", "cortex", "cort", "coat",
    "mother", "compartment", "sigma", "germin", "division", "membrane", "polar", "asymmetr",
    "transcri", "activat", "express", "synthes", "assembl", "matur", "lysis", "dipicolin",
    "peptidoglycan", "vegetat", "onset", "init", "late", "early", "stage", "phase", "format",
    "localiz", "regulat", "protein", "cell",
)
SPORULATION_CLASS_SIZES = (227, 360, 379, 379, 303, 245)
_SUFFIXES = ("", "s", "al", "ation", "-specific", "ed", "ing")
_FILLERS = ("of", "the", "during", "in", "and", "at", "from", "after", "before", "into")


def sporulation_terms(seed: int = 0, sizes=SPORULATION_CLASS_SIZES) -> TermDataset:
    """Synthetic tagged terms built from :data:`SPORULATION_RADICALS`.

    Class ``c`` draws radicals from a Gaussian window (width 5, plus a
    small floor) centred at an evenly spaced position along the radical
    list, so neighbouring classes share vocabulary.  A term has one to three
    radical-based words, each with a random suffix, and with probability 0.6
    a filler word after the first word.  Terms are unique.
    """
    rng = np.random.default_rng(seed)
    nr = len(SPORULATION_RADICALS)
    centres = np.linspace(0, nr - 1, len(sizes))
    pos = np.arange(nr)
    terms, tags, seen = [], [], set()
    for c, count in enumerate(sizes):
        w = np.exp(-0.5 * ((pos - centres[c]) / 5.0) ** 2) + 0.02
        w /= w.sum()
        made = 0
        while made < count:
            n_words = int(rng.integers(1, 4))
            words = [SPORULATION_RADICALS[rng.choice(nr, p=w)] + _SUFFIXES[rng.integers(len(_SUFFIXES))]
                     for _ in range(n_words)]
            if n_words > 1 and rng.random() < 0.6:
                words.insert(1, _FILLERS[rng.integers(len(_FILLERS))])
            term = " ".join(words)
            if term in seen:
                continue
            seen.add(term)
            terms.append(term)
            tags.append(c + 1)
            made += 1
    return TermDataset(tuple(terms), SPORULATION_RADICALS, "TM-RD", tuple(tags))


BUILTIN_DATASETS = ("iris", "sporulation-terms", "sample-terms")


def load_builtin(name: str):
    """``iris`` gives a DataMatrix; the term sets give a TermDataset."""
    if name == "iris":
        return load_iris()
    if name == "sporulation-terms":
        return sporulation_terms()
    if name == "sample-terms":
        return sample_terms()
    raise KeyError(name)
