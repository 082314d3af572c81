"""Command-line driver: WCS analysis, frontiers, agent training and toy games.

Every command that writes files writes a ``manifest_<command>.json`` next to
its outputs (argv, config echo, input digests, seeds, output digests,
wall-clock time and library version). ``srsa rerun MANIFEST`` replays one.

Exit codes: 0 success, 1 input error, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, frontiers, metrics, rl, wcs
from .color import DEFAULT_COLUMNS, WCS_COLUMNS, approximate_chart, load_chart, meaning_distribution, \
    perceptual_similarity
from .errors import MalformedLine, NoMajorTerms, NonFiniteGradient, NotAJoint, OutsideRange, SrsaError, \
    UnknownLanguage
from .game import LIMIT, Endpoint, RecursionConfig, Start, StructuredGame, listener_step, literal_sender, \
    load_game, run_recursion, sim_surprisal
from .plots import mode_map_grid, svg_scatter, term_symbols

log = logging.getLogger("srsa")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

POINT_COLUMNS = ["label", "n_terms", "complexity_nats", "accuracy_nats", "wellformedness", "depth",
                 "variant", "alpha"]
WCS_COLUMNS_OUT = ["language_id", "language", *POINT_COLUMNS, "wellformedness_per_pair",
                   "frontier_distance", "cc_frontier_wellformedness", "status", "iters", "highlight"]
IB_COLUMNS = ["beta", "complexity_nats", "accuracy_nats"]
CC_COLUMNS = ["k", "wellformedness", "wellformedness_per_pair"]
LOG_COLUMNS = ["update_idx", "mean_reward", "seed", "variant", "depth"]
EVAL_COLUMNS = ["seed", "variant", "depth", "alpha", "vocab", "point", "n_terms", "complexity_nats",
                "accuracy_nats", "wellformedness", "frontier_distance", "final_reward", "skipped_updates"]
SUMMARY_METRICS = ["complexity_nats", "accuracy_nats", "wellformedness", "frontier_distance", "final_reward"]

EXAMPLE_GAME = "culina_game.json"


class InputError(SrsaError):
    pass


# --- small IO helpers ------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return "" if not np.isfinite(v) and np.isnan(v) else f"{float(v):.12g}"
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_table(rows, columns, path: Path, fmt: str = "csv") -> Path:
    """Write ``rows`` (dicts) with a fixed column order as CSV or JSON."""
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        data = [{c: _fmt(r.get(c, "")) for c in columns} for r in rows]
        path.write_text(json.dumps(data, indent=1) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
        path.write_text(buf.getvalue())
    return path


def read_table(path) -> list:
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text())
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_ib_frontier(path) -> frontiers.FrontierCurve:
    rows = read_table(path)
    if not rows or any(k not in rows[0] for k in IB_COLUMNS):
        raise InputError(f"{path}: expected columns {IB_COLUMNS}")
    arr = np.array([[float(r[k]) for k in IB_COLUMNS] for r in rows])
    order = np.argsort(arr[:, 1], kind="stable")
    return frontiers.FrontierCurve(arr[order, 0], arr[order, 1], arr[order, 2])


def read_cc_frontier(path) -> frontiers.WellformednessFrontier:
    rows = read_table(path)
    if not rows or any(k not in rows[0] for k in ("k", "wellformedness")):
        raise InputError(f"{path}: expected columns k, wellformedness")
    return frontiers.WellformednessFrontier([int(r["k"]) for r in rows],
                                            [float(r["wellformedness"]) for r in rows])


def ib_rows(curve):
    return [dict(zip(IB_COLUMNS, r)) for r in curve.rows()]


def cc_rows(front, n):
    pairs = n * (n - 1) / 2
    return [{"k": k, "wellformedness": v, "wellformedness_per_pair": v / pairs}
            for k, v in zip(front.ks, front.values)]


@dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    inputs: dict = field(default_factory=dict)   # path -> sha256
    seeds: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)  # path -> sha256
    errors: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    version: str = __version__

    def add_input(self, path):
        if path is not None and Path(path).is_file():
            self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path):
        self.outputs[str(path)] = sha256_file(path)

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / f"manifest_{self.command.replace('-', '_')}.json"
        path.write_text(json.dumps(asdict(self), indent=1, default=str) + "\n")
        return path


def _config_echo(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
            if k not in ("func",)}


def _pool_map(fn, items, threads: int, initializer=None, initargs=()):
    """Ordered map, serial for one worker; output order never depends on workers."""
    if threads <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads, initializer=initializer, initargs=initargs) as ex:
        return list(ex.map(fn, items))


def _load_chart_arg(args):
    if args.chart is None:
        log.warning("no --chart given; using the bundled approximate chart (ids are not WCS cnums)")
        return approximate_chart(), None
    cols = WCS_COLUMNS if args.chart_columns == "wcs" else DEFAULT_COLUMNS
    return load_chart(args.chart, columns=cols), args.chart


def _parse_depths(text) -> list:
    out = []
    for tok in str(text).split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok in ("limit", "inf", "infinity"):
            out.append(LIMIT)
        else:
            d = int(tok)
            if d < 0:
                raise InputError(f"negative depth {d}")
            out.append(d)
    return out


def _depth_str(d) -> str:
    return "limit" if d == LIMIT else str(d)


# --- analyze-wcs -----------------------------------------------------------------

_CTX = {}


def _init_ctx(ctx):
    _CTX.clear()
    _CTX.update(ctx)


def _point_row(point, lid, lname, variant, depth, alpha, n_pairs, curve, ccf, status, iters, hl):
    fd = float("nan")
    if curve is not None:
        fd = metrics.frontier_distance(point, curve)
    cc = float("nan")
    if ccf is not None:
        try:
            cc = ccf.value_at(point.n_terms)
        except KeyError:
            pass
    return {"language_id": lid, "language": lname, "label": point.label, "n_terms": point.n_terms,
            "complexity_nats": point.complexity, "accuracy_nats": point.accuracy,
            "wellformedness": point.wellformedness, "depth": depth, "variant": variant,
            "alpha": alpha, "wellformedness_per_pair": point.wellformedness / n_pairs,
            "frontier_distance": fd, "cc_frontier_wellformedness": cc, "status": status,
            "iters": iters, "highlight": hl}


def analyze_language(task):
    """All efficiency points for one language; returns (rows, mode maps, error)."""
    lid, lname, nm_json, hl = task
    c = _CTX
    try:
        nm = wcs.major_terms(wcs.NamingMatrix.from_json(nm_json))
        game, empty = wcs.wcs_game(nm, c["chart"], c["sim"])
    except (NoMajorTerms, ValueError) as exc:
        return [], {}, f"language {lid} ({lname}): {exc}"
    n = game.n
    n_pairs = n * (n - 1) / 2
    prior, meanings, sim = game.prior, c["meanings"], game.similarity
    rows, maps = [], {}
    base = literal_sender(game).with_flags(empty)
    pt = metrics.efficiency_point(base, prior, meanings, sim, label="base")
    rows.append(_point_row(pt, lid, lname, "base", 0, "", n_pairs, c["curve"], c["ccf"],
                           "fixed_depth", 0, hl))
    maps["base"] = metrics.mode_map(base)
    for variant in c["variants"]:
        for depth in c["depths"]:
            cfg = RecursionConfig(variant=variant, alpha=c["alpha"], depth=depth,
                                  endpoint=Endpoint.FINAL_SENDER, start=Start.LITERAL_SENDER)
            res = run_recursion(game, cfg)
            label = f"{variant}({_depth_str(depth)},{c['alpha']:g})"
            sender = res.sender.with_flags(empty) if depth == 0 else res.sender
            pt = metrics.efficiency_point(sender, prior, meanings, sim, label=label)
            rows.append(_point_row(pt, lid, lname, variant, _depth_str(depth), c["alpha"], n_pairs,
                                   c["curve"], c["ccf"], res.status, res.iters, hl))
            maps[label] = metrics.mode_map(sender)
    return rows, maps, None


def _select_languages(ds, selection):
    if selection is None:
        return ds.language_ids()
    out = []
    for tok in selection.split(","):
        tok = tok.strip()
        if not tok:
            continue
        lid = int(tok) if tok.isdigit() else ds.find_language(tok)
        if lid not in ds.language_ids():
            raise UnknownLanguage(tok)
        out.append(lid)
    return out


def cmd_analyze_wcs(args, man: RunManifest) -> int:
    out = Path(args.out_dir)
    ds = wcs.load_wcs_dir(args.wcs_dir, strict=args.strict)
    for name in ("term.txt", "lang.txt", "dict.txt"):
        man.add_input(Path(args.wcs_dir) / name)
    chart, chart_path = _load_chart_arg(args)
    man.add_input(chart_path)
    depths = _parse_depths(args.depths)
    variants = ["rsa", "srsa"] if args.variant == "both" else [args.variant]
    langs = _select_languages(ds, args.languages)
    highlight = ds.find_language(args.highlight) if args.highlight else None

    prior = np.full(len(chart), 1.0 / len(chart))
    meanings = meaning_distribution(chart)
    sim = perceptual_similarity(chart)
    curve = None
    if args.ib_frontier:
        curve = read_ib_frontier(args.ib_frontier)
        man.add_input(args.ib_frontier)
    elif not args.no_frontier and langs:
        log.info("computing IB frontier (pass --ib-frontier to reuse a cached one)")
        curve = frontiers.ib_frontier(prior, meanings)
        p = write_table(ib_rows(curve), IB_COLUMNS, out / "ib_frontier", args.format)
        man.add_output(p)
    ccf = None
    if args.cc_frontier:
        ccf = read_cc_frontier(args.cc_frontier)
        man.add_input(args.cc_frontier)

    tasks = []
    for lid in langs:
        nm = wcs.naming_matrix(ds, lid, chart.ids)
        tasks.append((lid, ds.languages.get(lid, str(lid)), nm.to_json(), int(lid == highlight)))
        if args.dump_matrices:
            p = out / "matrices" / f"{lid}.json"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(nm.dumps() + "\n")
            man.add_output(p)
    ctx = dict(chart=chart, sim=sim, meanings=meanings, curve=curve, ccf=ccf, variants=variants,
               depths=depths, alpha=args.alpha)
    results = _pool_map(analyze_language, tasks, args.threads, _init_ctx, (ctx,))

    rows = []
    for (lid, lname, _, hl), (lrows, maps, err) in zip(tasks, results):
        if err:
            log.error(err)
            man.errors.append(err)
            continue
        rows.extend(lrows)
        if args.mode_maps:
            p = out / "modemaps" / f"{lid}.txt"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(_mode_map_text(chart, lname, maps))
            man.add_output(p)
    p = write_table(rows, WCS_COLUMNS_OUT, out / "wcs_points", args.format)
    man.add_output(p)
    if args.svg and rows:
        for q in _wcs_svgs(rows, curve, out):
            man.add_output(q)
    print(f"{len(rows)} rows for {len(langs) - len(man.errors)} languages -> {p}")
    return EXIT_INPUT if man.errors else EXIT_OK


def _mode_map_text(chart, lname, maps) -> str:
    parts = []
    for label, assignment in maps.items():
        symbols = term_symbols(assignment)
        parts.append(f"# {lname}: {label} ({len(symbols)} terms)\n" + mode_map_grid(chart, assignment, symbols))
    return "\n".join(parts)


def _wcs_svgs(rows, curve, out):
    paths = []
    frontier = None if curve is None else (np.r_[0.0, curve.complexities], np.r_[0.0, curve.accuracies])
    labels = sorted({(r["variant"], str(r["depth"])) for r in rows if r["variant"] != "base"})
    base = [r for r in rows if r["variant"] == "base"]
    for variant, depth in labels:
        sel = [r for r in rows if r["variant"] == variant and str(r["depth"]) == depth]
        series = [("base", [r["complexity_nats"] for r in base], [r["accuracy_nats"] for r in base],
                   {"color": "#888888"}),
                  (f"{variant}({depth})", [r["complexity_nats"] for r in sel],
                   [r["accuracy_nats"] for r in sel], {})]
        hl = [r for r in base + sel if r["highlight"]]
        if hl:
            series.append(("highlight", [r["complexity_nats"] for r in hl], [r["accuracy_nats"] for r in hl],
                           {"color": "black", "marker": "square", "size": 4}))
        p = out / "svg" / f"wcs_{variant}_{depth}.svg"
        p.parent.mkdir(parents=True, exist_ok=True)
        svg_scatter(series, frontier, p, title=f"{variant} depth {depth}")
        paths.append(p)
    return paths


# --- frontier --------------------------------------------------------------------

def cmd_frontier(args, man: RunManifest) -> int:
    out = Path(args.out_dir)
    chart, chart_path = _load_chart_arg(args)
    man.add_input(chart_path)
    man.seeds = [args.seed]
    n = len(chart)
    if args.kind == "ib":
        if args.beta_steps is None:
            schedule = frontiers.default_schedule()
        else:
            schedule = frontiers.log_beta_schedule(args.beta_min, args.beta_max, args.beta_steps)
        prior = np.full(n, 1.0 / n)
        curve = frontiers.ib_frontier(prior, meaning_distribution(chart), schedule, args.restarts,
                                      args.tol, args.max_iters, direction=args.direction,
                                      rng_seed=args.seed, keep_encoders=args.store)
        p = write_table(ib_rows(curve), IB_COLUMNS, out / "ib_frontier", args.format)
        man.add_output(p)
        if args.store:
            q = out / "ib_encoders.json"
            q.write_text(json.dumps([{"beta": b, "encoder": e.tolist()}
                                     for b, e in zip(curve.betas.tolist(), curve.encoders)]) + "\n")
            man.add_output(q)
        print(f"{len(curve)} frontier points -> {p}")
    else:
        ks = range(args.k_min, args.k_max + 1)
        front = frontiers.cc_frontier(perceptual_similarity(chart), ks, args.restarts, args.seed)
        p = write_table(cc_rows(front, n), CC_COLUMNS, out / "cc_frontier", args.format)
        man.add_output(p)
        if args.store:
            q = out / "cc_partitions.json"
            q.write_text(json.dumps({str(k): v.tolist() for k, v in front.partitions.items()}) + "\n")
            man.add_output(q)
        print(f"{len(front.ks)} K values -> {p}")
    return EXIT_OK


# --- train -----------------------------------------------------------------------

def _variants_arg(v) -> list:
    v = v.lower().replace("rl-baseline", "rl").replace("rl_baseline", "rl")
    return list(rl.VARIANTS) if v == "all" else [v]


def train_job(task):
    """One (variant, depth, seed) run: logs, checkpoint and efficiency points."""
    cfg = task
    c = _CTX
    try:
        res = rl.train(cfg, c["chart"], c["sim"])
        pts = rl.evaluate(res.agent_a, c["chart"], cfg, c["meanings"], c["sim"])
    except (NonFiniteGradient, FloatingPointError, OutsideRange, NotAJoint) as exc:
        return cfg, None, f"seed {cfg.seed} {cfg.variant} depth {cfg.depth}: {type(exc).__name__}: {exc}"
    return cfg, (res, pts), None


def final_reward(rewards, window: int = 100) -> float:
    """Mean reward over the last ``window`` updates."""
    rewards = np.asarray(rewards, dtype=float)
    return float(rewards[-min(window, len(rewards)):].mean())


def ci95_half_width(values) -> float:
    """Student-t 95% half-width of the mean over per-seed values."""
    from scipy import stats
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if len(v) < 2:
        return float("nan")
    return float(stats.t.ppf(0.975, len(v) - 1) * v.std(ddof=1) / np.sqrt(len(v)))


def summarize(eval_rows) -> list:
    groups = {}
    for r in eval_rows:
        groups.setdefault((r["variant"], r["depth"], r["point"]), []).append(r)
    out = []
    for (variant, depth, point), rows in groups.items():
        row = {"variant": variant, "depth": depth, "point": point, "n_seeds": len(rows)}
        for m in SUMMARY_METRICS:
            vals = np.array([float(r[m]) for r in rows], dtype=float)
            fin = vals[np.isfinite(vals)]
            row[f"{m}_mean"] = float(fin.mean()) if len(fin) else float("nan")
            row[f"{m}_ci95"] = ci95_half_width(vals)
        out.append(row)
    return out


def summary_columns():
    return ["variant", "depth", "point", "n_seeds"] + [f"{m}_{s}" for m in SUMMARY_METRICS
                                                      for s in ("mean", "ci95")]


def cmd_train(args, man: RunManifest) -> int:
    out = Path(args.out_dir)
    chart, chart_path = _load_chart_arg(args)
    man.add_input(chart_path)
    seeds = [args.seed + i for i in range(args.seeds)] if args.seed_list is None else \
        [int(s) for s in args.seed_list.split(",") if s.strip()]
    man.seeds = seeds
    depths = [d for d in _parse_depths(args.depth)]
    if any(d == LIMIT or d > 5 for d in depths):
        raise InputError("training depth must be an integer in [0, 5]")
    base = rl.TrainConfig(alpha=args.alpha, context_size=args.context_size, lr=args.lr,
                          updates=args.updates, batch=args.batch, vocab=args.vocab, hidden=args.hidden,
                          init_scale=args.init_scale, aggregate=args.aggregate,
                          with_replacement=args.with_replacement)
    tasks = [replace(base, variant=v, depth=d, seed=s)
             for v in _variants_arg(args.variant) for d in depths for s in seeds]

    n = len(chart)
    meanings = meaning_distribution(chart)
    sim = perceptual_similarity(chart)
    curve = None
    if args.ib_frontier:
        curve = read_ib_frontier(args.ib_frontier)
        man.add_input(args.ib_frontier)
    elif not args.no_frontier:
        log.info("computing IB frontier (pass --ib-frontier to reuse a cached one)")
        curve = frontiers.ib_frontier(np.full(n, 1.0 / n), meanings)
        man.add_output(write_table(ib_rows(curve), IB_COLUMNS, out / "ib_frontier", args.format))

    ctx = dict(chart=chart, sim=sim, meanings=meanings)
    results = _pool_map(train_job, tasks, args.threads, _init_ctx, (ctx,))

    eval_rows = []
    for cfg, res, err in results:
        tag = f"{cfg.variant}_d{cfg.depth}_s{cfg.seed}"
        if err:
            log.error(err)
            man.errors.append(err)
            continue
        tr, (agent_pt, mfn_pt) = res
        logs = [{"update_idx": i, "mean_reward": r, "seed": cfg.seed, "variant": cfg.variant,
                 "depth": cfg.depth} for i, r in enumerate(tr.rewards.tolist())]
        man.add_output(write_table(logs, LOG_COLUMNS, out / "logs" / f"train_log_{tag}", args.format))
        ck = out / "checkpoints" / f"{tag}.json"
        ck.parent.mkdir(parents=True, exist_ok=True)
        ck.write_text(json.dumps({"config": rl.config_dict(cfg), "agent_a": tr.agent_a.to_json(),
                                  "agent_b": tr.agent_b.to_json()}) + "\n")
        man.add_output(ck)
        fr = final_reward(tr.rewards)
        for name, pt in (("agent", agent_pt), ("meaning_fn", mfn_pt)):
            fd = float("nan")
            if curve is not None:
                try:
                    fd = metrics.frontier_distance(pt, curve)
                except OutsideRange as exc:
                    log.warning("%s %s: %s", tag, name, exc)
            eval_rows.append({"seed": cfg.seed, "variant": cfg.variant, "depth": cfg.depth,
                              "alpha": cfg.alpha, "vocab": cfg.vocab, "point": name,
                              "n_terms": pt.n_terms, "complexity_nats": pt.complexity,
                              "accuracy_nats": pt.accuracy, "wellformedness": pt.wellformedness,
                              "frontier_distance": fd, "final_reward": fr,
                              "skipped_updates": tr.skipped})
    p = write_table(eval_rows, EVAL_COLUMNS, out / "evaluation", args.format)
    man.add_output(p)
    man.add_output(write_table(summarize(eval_rows), summary_columns(), out / "summary", args.format))
    print(f"{len(tasks) - len(man.errors)}/{len(tasks)} runs finished -> {p}")
    return EXIT_NUMERIC if man.errors else EXIT_OK


# --- game ------------------------------------------------------------------------

def example_game_path():
    return resources.files("srsa") / "data" / EXAMPLE_GAME


def game_report(game: StructuredGame, raw: dict, variants, alpha, depth) -> dict:
    """Sender/listener at ``depth`` and in the limit, plus sim-surprisal per meaning."""
    mlabels = raw.get("labels") or [str(c) for c in game.context]
    wlabels = raw.get("words") or [f"w{i}" for i in range(game.n_words)]
    report = {"meanings": mlabels, "words": wlabels, "alpha": alpha, "results": []}
    for variant in variants:
        for d in (depth, LIMIT):
            res = run_recursion(game, RecursionConfig(variant=variant, alpha=alpha, depth=d))
            modes = metrics.mode_map(res.sender)
            # the listener a depth-d sender best-responds to, or the limit listener
            listener = res.listener if d != LIMIT else listener_step(res.sender, game)
            surpr = [sim_surprisal(listener, game, m, int(w)) for m, w in enumerate(modes)]
            report["results"].append({
                "variant": variant, "depth": _depth_str(d), "status": res.status, "iters": res.iters,
                "sender": res.sender.probs.tolist(), "listener": res.listener.probs.tolist(),
                "mode_words": [wlabels[int(w)] for w in modes],
                "sim_surprisal_nats": surpr,
            })
    return report


def _matrix_text(mat, rows, cols) -> str:
    width = max(6, *(len(c) for c in cols))
    head = " " * 14 + "".join(f"{c:>{width + 1}}" for c in cols)
    lines = [head]
    for name, row in zip(rows, mat):
        lines.append(f"{name[:13]:<14}" + "".join(f"{v:>{width + 1}.3f}" for v in row))
    return "\n".join(lines)


def cmd_game(args, man: RunManifest) -> int:
    path = example_game_path() if args.game_json is None else Path(args.game_json)
    with resources.as_file(path) if args.game_json is None else _nullctx(path) as p:
        try:
            game, raw = load_game(p)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"{p}: invalid game JSON: {exc}") from None
        except ValueError as exc:
            raise InputError(f"{p}: {exc}") from None
        man.add_input(p)
    variants = ["rsa", "srsa"] if args.variant == "both" else [args.variant]
    rep = game_report(game, raw, variants, args.alpha, args.depth)
    if args.format == "json":
        text = json.dumps(rep, indent=1) + "\n"
    else:
        parts = []
        for r in rep["results"]:
            parts.append(f"== {r['variant']} depth {r['depth']} ({r['status']}, {r['iters']} iters)")
            parts.append("sender S(w|m)\n" + _matrix_text(r["sender"], rep["meanings"], rep["words"]))
            parts.append("listener L(m|w)\n" + _matrix_text(r["listener"], rep["words"], rep["meanings"]))
            parts.append("mode word and sim-surprisal (nats) per meaning")
            for m, w, s in zip(rep["meanings"], r["mode_words"], r["sim_surprisal_nats"]):
                parts.append(f"  {m:<14}{w:<10}{s + 0.0:.4f}")
            parts.append("")
        text = "\n".join(parts)
    sys.stdout.write(text)
    if args.out_dir_given:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        p = out / ("game_report.json" if args.format == "json" else "game_report.txt")
        p.write_text(text)
        man.add_output(p)
    return EXIT_OK


class _nullctx:
    def __init__(self, v):
        self.v = v

    def __enter__(self):
        return self.v

    def __exit__(self, *exc):
        return False


# --- synthetic data and rerun ------------------------------------------------------

def cmd_synth_wcs(args, man: RunManifest) -> int:
    from . import synthetic
    chart, chart_path = _load_chart_arg(args)
    man.add_input(chart_path)
    man.seeds = [args.seed]
    langs = synthetic.default_languages(args.languages, args.seed)
    d = synthetic.write_wcs_dir(args.out_dir, chart, langs, args.seed + 1)
    for name in ("term.txt", "lang.txt", "dict.txt"):
        man.add_output(d / name)
    print(f"{len(langs)} synthetic languages -> {d}")
    return EXIT_OK


def cmd_rerun(args, man: RunManifest) -> int:
    old = json.loads(Path(args.manifest).read_text())
    argv = list(old["argv"])
    if args.out_dir_given:
        argv = _replace_flag(argv, "--out-dir", args.out_dir)
    man.config = {"replayed": str(args.manifest), "argv": argv}
    man.command = "rerun"
    return main(argv, _nested=True)


def _replace_flag(argv, flag, value):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == flag:
            skip = True
            continue
        if a.startswith(flag + "="):
            continue
        out.append(a)
    return out + [flag, str(value)]


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress):
        # inside subcommands the defaults are suppressed so flags given before
        # the subcommand name are not overwritten
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--threads", type=int, default=d(1), help="worker processes (default 1)")
        g.add_argument("--seed", type=int, default=d(0), help="base random seed")
        g.add_argument("--out-dir", default=d(None), help="output directory (default: out)")
        g.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="table format")
        g.add_argument("-v", "--verbose", action="count", default=d(0))
        return g

    common = global_flags(True)

    chart = argparse.ArgumentParser(add_help=False)
    chart.add_argument("--chart", type=Path, default=None,
                       help="chart file (tab-separated); default: bundled approximate chart")
    chart.add_argument("--chart-columns", choices=("wcs", "simple"), default="simple",
                       help="'wcs' for cnum-vhcm-lab-new.txt, 'simple' for id,row,col,L,a,b")

    frontier_in = argparse.ArgumentParser(add_help=False)
    frontier_in.add_argument("--ib-frontier", type=Path, default=None, help="cached IB frontier CSV")
    frontier_in.add_argument("--no-frontier", action="store_true", help="skip frontier distances")

    ap = argparse.ArgumentParser(prog="srsa", description="Structured RSA on color naming.",
                                 parents=[global_flags(False)])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-wcs", parents=[common, chart, frontier_in],
                       help="base agents and RSA/sRSA agents for every WCS language")
    p.add_argument("--wcs-dir", type=Path, required=True, help="directory with term.txt (lang.txt, dict.txt)")
    p.add_argument("--variant", choices=("rsa", "srsa", "both"), default="both")
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--depths", default="1,limit", help="comma list of depths, 'limit' for the limit")
    p.add_argument("--languages", default=None, help="comma list of ids or names (default: all)")
    p.add_argument("--highlight", default=None, help="language name to mark in the output")
    p.add_argument("--cc-frontier", type=Path, default=None, help="cached well-formedness frontier CSV")
    p.add_argument("--mode-maps", action="store_true", help="write text-grid mode maps per language")
    p.add_argument("--svg", action="store_true", help="write SVG scatter plots")
    p.add_argument("--dump-matrices", action="store_true", help="write NamingMatrix JSON per language")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed line")
    p.set_defaults(func=cmd_analyze_wcs)

    p = sub.add_parser("frontier", parents=[common, chart], help="IB or well-formedness frontier")
    p.add_argument("kind", choices=("ib", "cc"))
    p.add_argument("--beta-min", type=float, default=1.0)
    p.add_argument("--beta-max", type=float, default=2.0 ** 10)
    p.add_argument("--beta-steps", type=int, default=None,
                   help="log-spaced schedule size (default: dense schedule around the knee)")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--direction", choices=("reverse", "forward"), default="reverse")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--store", action="store_true", help="also store encoders / partitions as JSON")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("train", parents=[common, chart, frontier_in], help="train agent pairs by REINFORCE")
    p.add_argument("--variant", default="srsa", help="rsa, srsa, rl (rl-baseline) or all")
    p.add_argument("--depth", default="2", help="comma list of depths in [0, 5]")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds, starting at --seed")
    p.add_argument("--seed-list", default=None, help="explicit comma list of seeds")
    p.add_argument("--updates", type=int, default=10000)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--vocab", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--context-size", type=int, default=5)
    p.add_argument("--hidden", type=int, default=25)
    p.add_argument("--init-scale", type=float, default=0.5)
    p.add_argument("--aggregate", choices=("sum", "mean"), default="sum",
                   help="combine per-game gradients over a batch by sum or mean")
    p.add_argument("--with-replacement", action="store_true", help="allow repeated chips in a context")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("game", parents=[common], help="run the recursion on a game JSON")
    p.add_argument("game_json", nargs="?", default=None, help="game JSON (default: bundled example)")
    p.add_argument("--variant", choices=("rsa", "srsa", "both"), default="both")
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("synth-wcs", parents=[common, chart], help="write synthetic WCS-format files")
    p.add_argument("--languages", type=int, default=110)
    p.set_defaults(func=cmd_synth_wcs)

    p = sub.add_parser("rerun", parents=[common], help="replay a run from its manifest")
    p.add_argument("manifest", type=Path)
    p.set_defaults(func=cmd_rerun)
    return ap


def main(argv=None, _nested: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if not _nested:
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args.out_dir_given = args.out_dir is not None
    if args.out_dir is None:
        args.out_dir = "out"
    if getattr(args, "restarts", 0) is None:
        args.restarts = 5 if args.kind == "ib" else 10
    man = RunManifest(args.command, argv, _config_echo(args))
    t0 = time.perf_counter()
    try:
        code = args.func(args, man)
    except (NonFiniteGradient, FloatingPointError, NotAJoint, OutsideRange) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except (FileNotFoundError, IsADirectoryError, MalformedLine, UnknownLanguage, InputError,
            json.JSONDecodeError, ValueError, KeyError) as exc:
        log.error("input error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    man.wall_clock_s = round(time.perf_counter() - t0, 3)
    if args.command != "rerun" and (args.command != "game" or args.out_dir_given):
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        man.write(args.out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
