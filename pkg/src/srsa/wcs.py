"""World Color Survey naming data: parsing, count matrices, major terms."""
from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .color import WCS_CHART_SIZE, MunsellChart, perceptual_similarity
from .errors import MalformedLine, NoMajorTerms, UnknownLanguage
from .game import StructuredGame

log = logging.getLogger(__name__)

MAJOR_TERM_MIN_CHIPS = 10


@dataclass(frozen=True)
class NamingRecord:
    language_id: int
    speaker_id: int
    chip_id: int
    term: str


@dataclass
class WcsDataset:
    languages: dict = field(default_factory=dict)  # id -> name
    records: list = field(default_factory=list)
    glosses: dict = field(default_factory=dict)  # (lang, term) -> gloss
    malformed: list = field(default_factory=list)  # (path, lineno, line, reason)

    def language_ids(self) -> list:
        ids = set(self.languages) | {r.language_id for r in self.records}
        return sorted(ids)

    def records_for(self, language_id: int) -> list:
        return [r for r in self.records if r.language_id == language_id]

    def find_language(self, name: str) -> int:
        """Language id by name, ignoring case and diacritics."""
        key = _fold(name)
        for lid, lname in self.languages.items():
            if _fold(lname) == key:
                return lid
        raise UnknownLanguage(name)


def _fold(s: str) -> str:
    s = unicodedata.normalize("NFKD", s)
    return "".join(c for c in s if not unicodedata.combining(c)).strip().lower()


def _read_rows(path, ncols, strict, report):
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8", errors="replace").splitlines(), 1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) < ncols:
            reason = f"expected {ncols} tab-separated fields, got {len(parts)}"
            if strict:
                raise MalformedLine(str(path), lineno, line, reason)
            report.append((str(path), lineno, line, reason))
            continue
        yield lineno, line, parts


def parse_wcs(term_file, dict_file=None, lang_file=None, strict: bool = False,
              n_chips: int = WCS_CHART_SIZE) -> WcsDataset:
    """Parse WCS ``term.txt`` (lang, speaker, chip, term) plus optional name files.

    Malformed lines are collected in ``dataset.malformed``; with ``strict``
    the first one raises :class:`MalformedLine`. A leading header row with a
    non-numeric language field is skipped silently.
    """
    ds = WcsDataset()
    term_file = Path(term_file)
    if not term_file.exists():
        raise FileNotFoundError(term_file)
    for lineno, line, parts in _read_rows(term_file, 4, strict, ds.malformed):
        try:
            rec = NamingRecord(int(parts[0]), int(parts[1]), int(parts[2]), parts[3])
        except ValueError:
            if lineno == 1:
                continue
            reason = "non-integer language/speaker/chip field"
            if strict:
                raise MalformedLine(str(term_file), lineno, line, reason) from None
            ds.malformed.append((str(term_file), lineno, line, reason))
            continue
        if not 1 <= rec.chip_id <= n_chips or rec.language_id < 1:
            reason = f"chip id outside [1, {n_chips}] or bad language id"
            if strict:
                raise MalformedLine(str(term_file), lineno, line, reason)
            ds.malformed.append((str(term_file), lineno, line, reason))
            continue
        ds.records.append(rec)
    if lang_file is not None:
        for lineno, line, parts in _read_rows(lang_file, 2, strict, ds.malformed):
            if parts[0].isdigit():
                ds.languages[int(parts[0])] = parts[1]
    if dict_file is not None:
        for lineno, line, parts in _read_rows(dict_file, 4, strict, ds.malformed):
            if parts[0].isdigit():
                # lang, term number, gloss, abbreviation
                ds.glosses[(int(parts[0]), parts[3])] = parts[2]
    for lid in {r.language_id for r in ds.records}:
        ds.languages.setdefault(lid, f"lang{lid}")
    if ds.malformed:
        log.warning("%d malformed WCS lines skipped", len(ds.malformed))
    return ds


def load_wcs_dir(wcs_dir, strict: bool = False) -> WcsDataset:
    """Load ``term.txt`` with ``lang.txt`` / ``dict.txt`` when present."""
    d = Path(wcs_dir)
    lang = d / "lang.txt"
    dct = d / "dict.txt"
    return parse_wcs(d / "term.txt", dct if dct.exists() else None,
                     lang if lang.exists() else None, strict=strict)


@dataclass
class NamingMatrix:
    language_id: int
    terms: list
    counts: np.ndarray  # [n_terms, n_chips]

    def to_json(self) -> dict:
        return {"language_id": self.language_id, "terms": list(self.terms),
                "counts": self.counts.astype(int).tolist()}

    @classmethod
    def from_json(cls, obj) -> "NamingMatrix":
        return cls(int(obj["language_id"]), list(obj["terms"]),
                   np.array(obj["counts"], dtype=np.int64).reshape(len(obj["terms"]), -1))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "NamingMatrix":
        return cls.from_json(json.loads(text))


def naming_matrix(ds: WcsDataset, language_id: int, chip_ids=None) -> NamingMatrix:
    """Count matrix D(w, m): speakers of the language naming chip m with term w.

    ``chip_ids`` fixes the column order (default 1..330).
    """
    recs = ds.records_for(language_id)
    if not recs and language_id not in ds.languages:
        raise UnknownLanguage(language_id)
    chip_ids = list(range(1, WCS_CHART_SIZE + 1)) if chip_ids is None else list(chip_ids)
    col = {c: i for i, c in enumerate(chip_ids)}
    terms = sorted({r.term for r in recs})
    row = {t: i for i, t in enumerate(terms)}
    counts = np.zeros((len(terms), len(chip_ids)), dtype=np.int64)
    for r in recs:
        if r.chip_id in col:
            counts[row[r.term], col[r.chip_id]] += 1
    return NamingMatrix(language_id, terms, counts)


def chip_modes(counts: np.ndarray) -> np.ndarray:
    """Modal term per chip; ties go to the term with more total uses, then lower index.

    Chips with no responses get -1.
    """
    n_terms = counts.shape[0]
    totals = counts.sum(axis=1)
    # lexicographic key: count, total uses, -index
    key = (counts.astype(float) * (totals.max() + 1) + totals[:, None]) * (n_terms + 1) \
        + (n_terms - np.arange(n_terms))[:, None]
    modes = np.argmax(key, axis=0)
    modes[counts.sum(axis=0) == 0] = -1
    return modes


def major_terms(nm: NamingMatrix, min_chips: int = MAJOR_TERM_MIN_CHIPS) -> NamingMatrix:
    """Keep terms that are the modal term for at least ``min_chips`` chips."""
    modes = chip_modes(nm.counts)
    wins = np.bincount(modes[modes >= 0], minlength=len(nm.terms))
    keep = np.flatnonzero(wins >= min_chips)
    if len(keep) == 0:
        raise NoMajorTerms(f"language {nm.language_id}: no term is modal for {min_chips}+ chips")
    return NamingMatrix(nm.language_id, [nm.terms[i] for i in keep], nm.counts[keep].copy())


def wcs_game(nm: NamingMatrix, chart: MunsellChart, sim=None) -> tuple[StructuredGame, np.ndarray]:
    """Full-chart game whose meaning function is the per-chip naming distribution.

    Returns the game and a mask of chips with no responses (given uniform rows).
    """
    counts = nm.counts.T.astype(float)  # [n_chips, n_terms]
    if counts.shape[0] != len(chart):
        raise ValueError(f"naming matrix has {counts.shape[0]} chips, chart has {len(chart)}")
    totals = counts.sum(axis=1, keepdims=True)
    empty = totals[:, 0] == 0
    mf = np.where(empty[:, None], 1.0 / counts.shape[1], counts / np.where(empty[:, None], 1, totals))
    if empty.any():
        log.info("language %s: %d chips without responses", nm.language_id, int(empty.sum()))
    if sim is None:
        sim = perceptual_similarity(chart)
    n = len(chart)
    return StructuredGame(tuple(chart.ids), mf, sim, np.full(n, 1.0 / n)), empty
