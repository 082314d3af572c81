"""Efficiency and well-formedness of WCS base, RSA and sRSA agents.

Runs the IB and well-formedness frontiers, then ``analyze-wcs`` at depths
0..5 and the limit, and prints mean frontier distance per (variant, depth),
the share of languages whose well-formedness sRSA improves, and the
Karaja case when that language is present.

    python scripts/reproduce_wcs.py --wcs-dir WCS --chart WCS/cnum-vhcm-lab-new.txt --out runs/wcs

Without the real data, ``--synthetic 110`` writes prototype-based languages
first so the pipeline can be dry-run end to end (numbers are meaningless).
"""
import argparse
from collections import defaultdict
from pathlib import Path

import numpy as np

from srsa import cli, wcs
from srsa.errors import UnknownLanguage


def run(argv):
    code = cli.main(argv)
    if code != 0:
        raise SystemExit(f"srsa {' '.join(argv)} exited with {code}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wcs-dir", type=Path)
    ap.add_argument("--chart", type=Path, help="cnum-vhcm-lab-new.txt (WCS column layout)")
    ap.add_argument("--synthetic", type=int, default=0, help="generate N synthetic languages instead")
    ap.add_argument("--out", type=Path, default=Path("runs/wcs"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--k-max", type=int, default=20)
    ap.add_argument("--highlight", default="karaja")
    args = ap.parse_args()

    chart = ["--chart", str(args.chart), "--chart-columns", "wcs"] if args.chart else []
    wcs_dir = args.wcs_dir
    if args.synthetic:
        wcs_dir = args.out / "synthetic"
        run(["synth-wcs", "--languages", str(args.synthetic), "--out-dir", str(wcs_dir)] + chart)
    if wcs_dir is None:
        ap.error("give --wcs-dir or --synthetic N")

    if not (args.out / "ib_frontier.csv").exists():
        run(["frontier", "ib", "--out-dir", str(args.out)] + chart)
    if not (args.out / "cc_frontier.csv").exists():
        run(["frontier", "cc", "--k-max", str(args.k_max), "--out-dir", str(args.out)] + chart)
    hl = []
    try:
        wcs.load_wcs_dir(wcs_dir).find_language(args.highlight)
        hl = ["--highlight", args.highlight]
    except UnknownLanguage:
        print(f"language {args.highlight!r} not in the data; no highlight")
    run(["analyze-wcs", "--wcs-dir", str(wcs_dir), "--depths", "0,1,2,3,4,5,limit", *hl,
         "--ib-frontier", str(args.out / "ib_frontier.csv"), "--cc-frontier", str(args.out / "cc_frontier.csv"),
         "--mode-maps", "--svg", "--threads", str(args.threads), "--out-dir", str(args.out)] + chart)

    rows = cli.read_table(args.out / "wcs_points.csv")
    groups = defaultdict(list)
    for r in rows:
        groups[(r["variant"], str(r["depth"]))].append(r)
    print(f"\n{'agent':<14}{'n':>5}{'frontier_dist':>15}{'wellformed/pair':>17}")
    for (variant, depth), rs in sorted(groups.items()):
        fd = np.mean([float(r["frontier_distance"]) for r in rs])
        wf = np.mean([float(r["wellformedness_per_pair"]) for r in rs])
        print(f"{variant + '(' + depth + ')':<14}{len(rs):>5}{fd:>15.4f}{wf:>17.4f}")

    base = {r["language_id"]: float(r["wellformedness"]) for r in groups["base", "0"]}
    s1 = {r["language_id"]: float(r["wellformedness"]) for r in groups["srsa", "1"]}
    if base and s1:
        share = np.mean([s1[k] > base[k] for k in base])
        print(f"\nsRSA(1) well-formedness above base for {share:.0%} of languages")
    hl = [r for r in rows if r["highlight"] in ("1", 1)]
    if hl:
        print("\nhighlighted language:")
        for r in hl:
            print(f"  {r['label']:<16} frontier_distance {float(r['frontier_distance']):.4f}")


if __name__ == "__main__":
    main()
