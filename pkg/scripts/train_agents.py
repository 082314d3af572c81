"""Train RSA, sRSA and RL-baseline agent pairs and summarise them.

Presets:
    desk  10 seeds x 2000 updates (default; 20-40 minutes on one core)
    full  100 seeds x 10000 updates (days on one core; use --threads)

    python scripts/train_agents.py --preset desk --out runs/train
"""
import argparse
from pathlib import Path

from srsa import cli

PRESETS = {"desk": (10, 2000), "full": (100, 10000)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    ap.add_argument("--depth", default="2", help="comma list, e.g. 0,1,2,3,4,5")
    ap.add_argument("--out", type=Path, default=Path("runs/train"))
    ap.add_argument("--ib-frontier", type=Path, default=None)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    seeds, updates = PRESETS[args.preset]
    argv = ["train", "--variant", "all", "--depth", args.depth, "--seeds", str(seeds), "--updates",
            str(updates), "--batch", "100", "--vocab", "100", "--alpha", "5", "--threads", str(args.threads),
            "--out-dir", str(args.out)]
    if args.ib_frontier:
        argv += ["--ib-frontier", str(args.ib_frontier)]
    code = cli.main(argv)
    if code != 0:
        raise SystemExit(code)

    rows = cli.read_table(args.out / "summary.csv")
    print(f"\n{'variant':<8}{'depth':>6}{'point':>12}{'reward':>9}{'complexity':>12}{'accuracy':>10}{'dist':>9}")
    for r in rows:
        print(f"{r['variant']:<8}{r['depth']:>6}{r['point']:>12}{float(r['final_reward_mean']):>9.3f}"
              f"{float(r['complexity_nats_mean']):>12.3f}{float(r['accuracy_nats_mean']):>10.3f}"
              f"{float(r['frontier_distance_mean']):>9.4f}")


if __name__ == "__main__":
    main()
