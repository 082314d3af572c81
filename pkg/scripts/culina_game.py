"""Six-colour Culina context: where RSA and sRSA put the two blue words.

Runs the bundled example game and prints, for each variant and depth, the
mode word of every colour. RSA names light blue with the green word, while
sRSA groups it with the perceptually closer blues.

    python scripts/culina_game.py [--alpha 5] [--depth 1]
"""
import argparse
import json

from srsa import cli
from srsa.game import load_game


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=5.0)
    ap.add_argument("--depth", type=int, default=1)
    args = ap.parse_args()
    path = cli.example_game_path()
    game, raw = load_game(path)
    rep = cli.game_report(game, raw, ["rsa", "srsa"], args.alpha, args.depth)
    width = max(len(m) for m in rep["meanings"]) + 2
    print(" " * 16 + "".join(f"{m:<{width}}" for m in rep["meanings"]))
    for r in rep["results"]:
        tag = f"{r['variant']}({r['depth']})"
        print(f"{tag:<16}" + "".join(f"{w:<{width}}" for w in r["mode_words"]))
    print("\nfull report: srsa game --format json")
    return json.dumps(rep)


if __name__ == "__main__":
    main()
