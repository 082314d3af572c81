"""Synthetic naming data in the WCS file layout.

Real WCS files are not bundled. These generators produce languages with
prototype-based naming (each term has a focal chip; speakers pick terms by
a noisy softmax over distance to the foci) so the ingest, analysis and CLI
paths can be exercised end to end.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .color import MunsellChart, squared_distances


@dataclass(frozen=True)
class SyntheticLanguage:
    name: str
    n_terms: int
    n_speakers: int = 25
    sharpness: float = 0.02     # inverse temperature on squared CIELAB distance
    speaker_noise: float = 0.0  # per-speaker jitter of the foci (fraction of chips re-drawn)


def _foci(rng, d2, k):
    # farthest-point sampling from a random first chip
    n = len(d2)
    foci = [int(rng.integers(n))]
    while len(foci) < k:
        far = d2[:, foci].min(axis=1)
        probs = far ** 2 / (far ** 2).sum()
        foci.append(int(rng.choice(n, p=probs)))
    return np.array(foci)


def speaker_naming(rng, d2, foci, sharpness) -> np.ndarray:
    """One speaker's term index per chip."""
    logits = -sharpness * d2[:, foci]
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    u = rng.random(len(p))[:, None]
    return np.minimum((np.cumsum(p, axis=1) < u).sum(axis=1), len(foci) - 1)


def generate(chart: MunsellChart, languages, rng) -> list:
    """Records ``(lang_id, speaker_id, chip_id, term)`` for each language in order."""
    rng = np.random.default_rng(rng)
    d2 = squared_distances(chart)
    ids = np.array(chart.ids)
    records = []
    for lid, lang in enumerate(languages, start=1):
        foci = _foci(rng, d2, lang.n_terms)
        for sid in range(1, lang.n_speakers + 1):
            f = foci.copy()
            if lang.speaker_noise > 0:
                redraw = rng.random(len(f)) < lang.speaker_noise
                f[redraw] = rng.integers(len(chart), size=int(redraw.sum()))
            terms = speaker_naming(rng, d2, f, lang.sharpness)
            for chip, t in zip(ids, terms):
                records.append((lid, sid, int(chip), f"t{t}"))
    return records


def default_languages(n: int, rng) -> list:
    """A mix of 3 to 11 term languages with varying speaker agreement."""
    rng = np.random.default_rng(rng)
    out = []
    for i in range(n):
        out.append(SyntheticLanguage(
            name=f"syn{i + 1:03d}",
            n_terms=int(rng.integers(3, 12)),
            n_speakers=int(rng.integers(15, 30)),
            sharpness=float(rng.uniform(0.005, 0.05)),
            speaker_noise=float(rng.choice([0.0, 0.1, 0.3])),
        ))
    return out


def write_wcs_dir(out_dir, chart: MunsellChart, languages, rng) -> Path:
    """Write ``term.txt``, ``lang.txt`` and ``dict.txt`` with WCS tab layout."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = generate(chart, languages, rng)
    with open(out / "term.txt", "w", encoding="utf-8") as fh:
        for r in records:
            fh.write("\t".join(map(str, r)) + "\n")
    with open(out / "lang.txt", "w", encoding="utf-8") as fh:
        for lid, lang in enumerate(languages, start=1):
            fh.write(f"{lid}\t{lang.name}\n")
    with open(out / "dict.txt", "w", encoding="utf-8") as fh:
        for lid, lang in enumerate(languages, start=1):
            for t in range(lang.n_terms):
                fh.write(f"{lid}\t{t + 1}\tterm {t}\tt{t}\n")
    return out
