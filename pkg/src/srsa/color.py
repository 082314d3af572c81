"""Munsell chip universe, CIELAB geometry and the two color kernels."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ContextTooLarge, MalformedLine

WCS_CHART_SIZE = 330
GRID_ROWS = "ABCDEFGHIJ"

# column indices (id, row letter, column, L*, a*, b*)
DEFAULT_COLUMNS = (0, 1, 2, 3, 4, 5)
# WCS cnum-vhcm-lab-new.txt: #cnum V H C MunH MunV L* a* b*
WCS_COLUMNS = (0, 1, 2, 6, 7, 8)


@dataclass(frozen=True)
class ColorChip:
    id: int
    grid_row: str
    grid_col: int
    lab: tuple


class MunsellChart:
    """Ordered collection of chips; ``labs`` is the ``[N, 3]`` CIELAB array."""

    def __init__(self, chips):
        chips = sorted(chips, key=lambda c: c.id)
        ids = [c.id for c in chips]
        if len(set(ids)) != len(ids):
            raise ValueError("chip ids must be unique")
        self.chips = tuple(chips)
        self.labs = np.array([c.lab for c in chips], dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(self.labs)):
            raise ValueError("chip CIELAB coordinates must be finite")
        self._index = {cid: i for i, cid in enumerate(ids)}

    def __len__(self):
        return len(self.chips)

    @property
    def ids(self) -> list:
        return [c.id for c in self.chips]

    def index_of(self, chip_id: int) -> int:
        return self._index[chip_id]

    def subset(self, chip_ids) -> "MunsellChart":
        return MunsellChart([self.chips[self._index[c]] for c in chip_ids])

    @classmethod
    def from_labs(cls, labs, rows=None, cols=None) -> "MunsellChart":
        labs = np.asarray(labs, dtype=float)
        n = len(labs)
        rows = rows if rows is not None else ["A"] * n
        cols = cols if cols is not None else list(range(n))
        return cls([ColorChip(i + 1, rows[i], int(cols[i]), tuple(labs[i])) for i in range(n)])


def load_chart(path, columns=DEFAULT_COLUMNS, expect_size: int | None = None) -> MunsellChart:
    """Read a tab-separated chart file.

    Lines starting with ``#`` and lines whose id field is not an integer
    (header rows) are skipped. ``expect_size`` validates the chip count.
    """
    path = Path(path)
    i_id, i_row, i_col, i_l, i_a, i_b = columns
    chips = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if not parts[i_id].strip().lstrip("-").isdigit():
            continue
        try:
            chip = ColorChip(int(parts[i_id]), parts[i_row].strip(), int(parts[i_col]),
                             (float(parts[i_l]), float(parts[i_a]), float(parts[i_b])))
        except (IndexError, ValueError) as exc:
            raise MalformedLine(str(path), lineno, line, str(exc)) from None
        chips.append(chip)
    chart = MunsellChart(chips)
    if expect_size is not None and len(chart) != expect_size:
        raise ValueError(f"{path}: expected {expect_size} chips, found {len(chart)}")
    return chart


def approximate_chart() -> MunsellChart:
    """Bundled 330-chip chart rebuilt from Munsell renotation data.

    Layout follows the WCS grid, but chip ids are row-major, not WCS cnums.
    """
    ref = resources.files("srsa") / "data" / "munsell_chart_approx.tsv"
    with resources.as_file(ref) as path:
        return load_chart(path, expect_size=WCS_CHART_SIZE)


def _sq_dists(labs: np.ndarray) -> np.ndarray:
    g = labs @ labs.T
    sq = np.diag(g)
    d = sq[:, None] + sq[None, :] - 2 * g
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def squared_distances(chart_or_labs) -> np.ndarray:
    labs = chart_or_labs.labs if isinstance(chart_or_labs, MunsellChart) else np.asarray(chart_or_labs, float)
    return _sq_dists(labs)


def meaning_distribution(chart, width: float = 64.0) -> np.ndarray:
    """Rows m(u) proportional to exp(-||x_m - x_u||^2 / width)."""
    logits = -squared_distances(chart) / width
    logits -= logits.max(axis=1, keepdims=True)
    rows = np.exp(logits)
    return rows / rows.sum(axis=1, keepdims=True)


def perceptual_similarity(chart, scale: float = 0.001) -> np.ndarray:
    """sim(m, m') = exp(-scale * ||x_m - x_m'||^2)."""
    z = np.exp(-scale * squared_distances(chart))
    np.fill_diagonal(z, 1.0)
    return z


def sample_context(chart: MunsellChart, n: int, rng, replace: bool = False) -> list:
    """Draw ``n`` chip ids uniformly; distinct unless ``replace``."""
    if n < 1:
        raise ValueError("context size must be >= 1")
    if not replace and n > len(chart):
        raise ContextTooLarge(f"cannot draw {n} distinct chips from {len(chart)}")
    rng = np.random.default_rng(rng)
    idx = rng.choice(len(chart), size=n, replace=replace)
    ids = chart.ids
    return [ids[i] for i in idx]
