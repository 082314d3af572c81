"""Generate an approximate 330-chip WCS-layout Munsell chart.

The published WCS coordinate file is not redistributed here. This script
rebuilds the grid from the Munsell renotation data shipped with
``colour-science``: rows B-I are values 9..2, columns 1-40 the forty hue
pages starting at 2.5R, each chip at the highest chroma of the 1929 Munsell
Book of Color samples (physical chips, close to what the WCS stimuli were
cut from). Value 9 is missing from that set; there the highest "real"
renotation chroma is used, capped at the value-8 book chroma of the same
hue. Column 0 holds the ten neutrals N9.5 .. N1.5.

Chip ids are assigned row-major over the grid (A0, B0, B1, ..., J0) and do
NOT match the WCS ``cnum`` numbering. To analyse real WCS naming data, pass
the original ``cnum-vhcm-lab-new.txt`` with ``--chart`` instead.

Requires ``pip install colour-science`` (not a runtime dependency).
"""
import argparse
from pathlib import Path

import colour
import numpy as np
from colour.notation import datasets

FAMILIES = ["R", "YR", "Y", "GY", "G", "BG", "B", "PB", "P", "RP"]
HUE_STEPS = ["2.5", "5", "7.5", "10"]
ROWS = "ABCDEFGHIJ"
NEUTRAL_VALUES = [9.5, 9, 8, 7, 6, 5, 4, 3, 2, 1.5]


def _max_chroma(data):
    best = {}
    for (hue, value, chroma), _ in data:
        key = (hue, float(value))
        best[key] = max(best.get(key, 0.0), float(chroma))
    return best


def _chart_chroma():
    book = _max_chroma(datasets.MUNSELL_COLOURS_1929)
    real = _max_chroma(datasets.MUNSELL_COLOURS_REAL)
    out = dict(book)
    for (hue, value), c in real.items():
        if value == 9.0 and (hue, 8.0) in book:
            out[(hue, 9.0)] = min(c, book[(hue, 8.0)])
    return out


def _lab(notation):
    xyY = colour.munsell_colour_to_xyY(notation)
    XYZ = colour.xyY_to_XYZ(xyY)
    white = colour.CCS_ILLUMINANTS["CIE 1931 2 Degree Standard Observer"]["C"]
    return colour.XYZ_to_Lab(XYZ, white)


def build():
    chroma = _chart_chroma()
    pages = [f"{step}{fam}" for fam in FAMILIES for step in HUE_STEPS]
    cells = {}
    for r, value in zip(ROWS, NEUTRAL_VALUES):
        cells[(r, 0)] = _lab(f"N{value:g}")
    for i, r in enumerate(ROWS[1:9]):
        value = 9 - i
        for col, page in enumerate(pages, start=1):
            c = chroma[(page, float(value))]
            cells[(r, col)] = _lab(f"{page} {value}/{c:g}")
    rows = []
    for r in ROWS:
        for col in range(41):
            if (r, col) in cells:
                rows.append((r, col, cells[(r, col)]))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src/srsa/data/munsell_chart_approx.tsv"
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args()
    rows = build()
    assert len(rows) == 330
    with open(args.out, "w") as fh:
        fh.write("#id\trow\tcol\tL*\ta*\tb*\n")
        for cid, (r, col, lab) in enumerate(rows, start=1):
            lab = np.round(lab, 4) + 0.0
            fh.write(f"{cid}\t{r}\t{col}\t{lab[0]:.4f}\t{lab[1]:.4f}\t{lab[2]:.4f}\n")
    print(f"wrote {len(rows)} chips to {args.out}")


if __name__ == "__main__":
    main()
