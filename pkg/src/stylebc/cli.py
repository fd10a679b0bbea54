"""Command-line front end.

Subcommands cover the full pipeline: dataset synthesis, dissimilarity
caching, training, evaluation, property-conditioned control runs,
density export, maze inspection and the HTTP service.  Every
subcommand accepts --config pointing at a JSON file whose keys are the
long flag names; explicit flags win over the file, unknown keys are
rejected.  Artifacts land under --out.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset_io, experts, evaluation, training
from .env import VARIANTS, variant_config
from .maze import (MazeParseError, MazeSpec, bundled_maze_names, load_bundled,
                   load_maze, parse_maze)
from .neural import load_checkpoint, save_checkpoint
from .similarity import dissimilarity_matrix, load_matrix, save_matrix


def _resolve_maze(name_or_path: str) -> MazeSpec:
    # recorded datasets embed the grid itself so they stay self-contained
    if "\n" in name_or_path:
        return parse_maze(name_or_path)
    p = Path(name_or_path)
    if p.suffix == ".txt" or p.exists():
        return load_maze(p)
    if name_or_path in bundled_maze_names():
        return load_bundled(name_or_path)
    raise FileNotFoundError(
        f"no maze file or bundled maze named {name_or_path!r} "
        f"(bundled: {', '.join(bundled_maze_names())})")


def _resolve_recipe(name_or_path: str) -> experts.DatasetRecipe:
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return experts.load_recipe(p)
    if name_or_path in experts.bundled_recipe_names():
        return experts.bundled_recipe(name_or_path)
    raise FileNotFoundError(
        f"no recipe file or bundled recipe named {name_or_path!r} "
        f"(bundled: {', '.join(experts.bundled_recipe_names())})")


def _maze_for_dataset(args, dataset) -> MazeSpec:
    if getattr(args, "maze", None):
        return _resolve_maze(args.maze)
    name = dataset.meta.get("maze")
    if not name:
        raise ValueError("dataset meta names no maze; pass --maze")
    return _resolve_maze(name)


def _seeds(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).split(",") if v != "")
    except ValueError:
        raise ValueError(f"bad seed list {text!r}; expected e.g. 0,1,2")


def _merge_config(parser: argparse.ArgumentParser, args: argparse.Namespace,
                  defaults: dict) -> argparse.Namespace:
    """Resolve each option as: explicit flag > config file > default."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            parser.error(f"{args.config}: config must be a JSON object")
        unknown = sorted(set(file_cfg) - set(defaults))
        if unknown:
            parser.error(f"{args.config}: unknown config keys: "
                         f"{', '.join(unknown)}")
    for key, default in defaults.items():
        if getattr(args, key) is None:
            setattr(args, key, file_cfg.get(key, default))
    return args


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _env_config(args, seed: int = 0):
    if args.env_variant not in VARIANTS:
        raise ValueError(f"unknown env variant {args.env_variant!r} "
                         f"(one of: {', '.join(VARIANTS)})")
    return variant_config(args.env_variant, seed=seed)


# ---- subcommand bodies ---------------------------------------------------

def cmd_gen_data(parser, args):
    _merge_config(parser, args, {"recipe": None, "out": None, "seed": None})
    if not args.recipe or not args.out:
        parser.error("gen-data needs --recipe and --out")
    recipe = _resolve_recipe(args.recipe)
    if args.seed is not None:
        recipe = dataclasses.replace(recipe, seed=int(args.seed))
    ds = experts.generate_dataset(recipe)
    out = _out_dir(args) / "dataset.jsonl"
    dataset_io.save_dataset(ds, out)
    hist = ds.behavior_histogram()
    print(f"wrote {len(ds)} trajectories to {out}")
    for b, frac in hist.items():
        print(f"  {b}: {frac:.2f}")
    return 0


def cmd_dissim(parser, args):
    _merge_config(parser, args, {"dataset": None, "out": None})
    if not args.dataset or not args.out:
        parser.error("dissim needs --dataset and --out")
    ds = dataset_io.load_dataset(args.dataset)
    nu = dissimilarity_matrix(ds)
    out = _out_dir(args) / "dissim.bin"
    save_matrix(out, nu)
    off = nu.nu[~np.eye(len(ds), dtype=bool)]
    print(f"wrote {out} ({len(ds)}x{len(ds)}, pad length {nu.pad_length})")
    print(f"off-diagonal mean {off.mean():.4f}, min {off.min():.4f}")
    return 0


def cmd_train(parser, args):
    _merge_config(parser, args, {
        "algo": "zbc", "dataset": None, "maze": None, "steps": 20000,
        "beta": 10.0, "relabel_p": 0.8, "seed": 0, "batch_size": 16,
        "eval_every": 1000, "dissim": None, "out": None,
    })
    if not args.dataset or not args.out:
        parser.error("train needs --dataset and --out")
    if args.algo not in training.ALGORITHMS:
        parser.error(f"--algo must be one of {', '.join(training.ALGORITHMS)}")
    ds = dataset_io.load_dataset(args.dataset)
    maze = _maze_for_dataset(args, ds)  # noqa: F841  (validates early)
    nu = load_matrix(args.dissim) if args.dissim else None
    cfg = training.TrainConfig(
        algorithm=args.algo, steps=int(args.steps),
        batch_size=int(args.batch_size), beta=float(args.beta),
        relabel_prob=float(args.relabel_p), seed=int(args.seed),
        eval_every=int(args.eval_every))
    model, report = training.train(ds, cfg, nu=nu)
    out = _out_dir(args)
    ckpt = out / "checkpoint.bin"
    save_checkpoint(ckpt, model)
    with open(out / "loss.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "loss"])
        w.writerows(report.loss_curve)
    _write_json(out / "report.json", {
        "config": report.config,
        "dataset": str(args.dataset),
        "n_trajectories": len(ds),
        "final_loss": report.final_loss,
        "wall_clock_s": report.wall_clock_s,
        "checkpoint": ckpt.name,
    })
    print(f"trained {args.algo} for {cfg.steps} steps "
          f"(final loss {report.final_loss:.4f}) -> {ckpt}")
    return 0


def cmd_eval(parser, args):
    _merge_config(parser, args, {
        "checkpoint": None, "dataset": None, "maze": None, "algo": "zbc",
        "rollouts": 500, "seeds": "0,1,2,3,4", "env_variant": "deterministic",
        "sample": False, "resolution": 64, "out": None,
    })
    if not args.checkpoint or not args.dataset or not args.out:
        parser.error("eval needs --checkpoint, --dataset and --out")
    if int(args.rollouts) < 1:
        parser.error("--rollouts must be >= 1")
    ds = dataset_io.load_dataset(args.dataset)
    maze = _maze_for_dataset(args, ds)
    model = load_checkpoint(args.checkpoint)
    cfg = evaluation.EvalConfig(
        n_rollouts=int(args.rollouts), seeds=_seeds(args.seeds),
        env=_env_config(args), greedy=not args.sample)
    metrics, details = evaluation.evaluate(model, ds, maze, cfg, args.algo,
                                           details=True)
    out = _out_dir(args)
    _write_json(out / "metrics.json", metrics)

    support = set(details["reference_hist"])
    for h in details["per_seed_hists"]:
        support |= set(h)
    support = sorted(support)
    _write_json(out / "histograms.json", {
        "support": support,
        "reference": {b: details["reference_hist"].get(b, 0.0)
                      for b in support},
        "generated": [
            {"seed": s, "histogram": {b: h.get(b, 0.0) for b in support}}
            for s, h in zip(cfg.seeds, details["per_seed_hists"])],
    })

    all_trajs = [t for trajs in details["trajectories"] for t in trajs]
    grid = evaluation.visitation(all_trajs, maze, int(args.resolution))
    _write_density_csv(out / "density.csv", grid)
    print(f"l1 mean {metrics['l1']['mean']:.4f} "
          f"success {metrics['success_rate']['mean']:.4f} -> {out}")
    return 0


def cmd_control(parser, args):
    _merge_config(parser, args, {
        "checkpoint": None, "dataset": None, "maze": None, "metric": "length",
        "min": None, "max": None, "rollouts": 500, "seeds": "0,1,2,3,4",
        "env_variant": "deterministic", "sample": False, "out": None,
    })
    if not args.checkpoint or not args.dataset or not args.out:
        parser.error("control needs --checkpoint, --dataset and --out")
    if args.min is None or args.max is None:
        parser.error("control needs --min and --max")
    if int(args.rollouts) < 1:
        parser.error("--rollouts must be >= 1")
    ds = dataset_io.load_dataset(args.dataset)
    maze = _maze_for_dataset(args, ds)
    model = load_checkpoint(args.checkpoint)
    prop = evaluation.Property(metric=args.metric, m_min=float(args.min),
                               m_max=float(args.max))
    cfg = evaluation.EvalConfig(
        n_rollouts=int(args.rollouts), seeds=_seeds(args.seeds),
        env=_env_config(args), greedy=not args.sample)
    report = evaluation.control_report(model, ds, prop, maze, cfg)
    out = _out_dir(args)
    _write_json(out / "control.json", report)
    for row in report["per_seed"]:
        print(f"seed {row['seed']}: free L1 {row['free_l1']:.4f} "
              f"controlled L1 {row['controlled_l1']:.4f}")
    return 0


def _write_density_csv(path: Path, grid) -> None:
    W, H = grid.extent
    res = grid.resolution
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "mass"])
        for iy in range(res):
            for ix in range(res):
                w.writerow([(ix + 0.5) * W / res, (iy + 0.5) * H / res,
                            repr(float(grid.masses[iy, ix]))])


def cmd_density(parser, args):
    _merge_config(parser, args, {
        "dataset": None, "maze": None, "dissim": None, "beta": 10.0,
        "ref": 0, "resolution": 64, "out": None,
    })
    if not args.dataset or not args.out:
        parser.error("density needs --dataset and --out")
    ds = dataset_io.load_dataset(args.dataset)
    maze = _maze_for_dataset(args, ds)
    nu = (load_matrix(args.dissim) if args.dissim
          else dissimilarity_matrix(ds))
    grid = evaluation.density(ds, nu, float(args.beta), int(args.ref), maze,
                              resolution=int(args.resolution))
    out = _out_dir(args)
    _write_density_csv(out / "density.csv", grid)
    print(f"wrote {out / 'density.csv'} "
          f"(res {grid.resolution}, total mass {grid.total_mass:.6f})")
    return 0


def cmd_maze(parser, args):
    if args.list:
        for name in bundled_maze_names():
            print(name)
        return 0
    if not args.maze:
        parser.error("maze needs --maze (or --list)")
    maze = _resolve_maze(args.maze)
    print(maze.render())
    print(f"{maze.width}x{maze.height}, {len(maze.free_cells())} free cells")
    print(f"start {tuple(maze.start)}, goal {tuple(maze.goal)}")
    for k, cell in sorted(maze.doors.items()):
        print(f"door {k}: {tuple(cell)}")
    return 0


def cmd_serve(parser, args):
    _merge_config(parser, args, {
        "maze": "medium_maze", "checkpoint": None, "dataset": None,
        "dissim": None, "record": None, "frontend": None,
        "env_variant": "deterministic", "host": "127.0.0.1", "port": 8000,
        "seed": 0,
    })
    import uvicorn

    from .server import create_app
    maze = _resolve_maze(args.maze)
    model = load_checkpoint(args.checkpoint) if args.checkpoint else None
    ds = dataset_io.load_dataset(args.dataset) if args.dataset else None
    nu = load_matrix(args.dissim) if args.dissim else None
    app = create_app(maze, env_cfg=_env_config(args, seed=int(args.seed)),
                     model=model, dataset=ds, nu=nu,
                     record_path=args.record, frontend_dir=args.frontend,
                     seed=int(args.seed))
    uvicorn.run(app, host=args.host, port=int(args.port))
    return 0


# ---- parser wiring -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylebc",
        description="style-conditioned imitation learning workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file with option defaults")
        p.set_defaults(fn=fn, parser=p)
        return p

    p = add("gen-data", cmd_gen_data, "synthesize an expert dataset")
    p.add_argument("--recipe", help="bundled recipe name or JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("dissim", cmd_dissim, "precompute the dissimilarity cache")
    p.add_argument("--dataset")
    p.add_argument("--out")

    p = add("train", cmd_train, "train a policy")
    p.add_argument("--algo", choices=training.ALGORITHMS)
    p.add_argument("--dataset")
    p.add_argument("--maze")
    p.add_argument("--steps", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--relabel-p", dest="relabel_p", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--eval-every", dest="eval_every", type=int)
    p.add_argument("--dissim", help="precomputed dissimilarity cache")
    p.add_argument("--out")

    p = add("eval", cmd_eval, "roll out a checkpoint and score diversity")
    p.add_argument("--checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--maze")
    p.add_argument("--algo", choices=training.ALGORITHMS)
    p.add_argument("--rollouts", type=int)
    p.add_argument("--seeds")
    p.add_argument("--env-variant", dest="env_variant", choices=VARIANTS)
    p.add_argument("--sample", action="store_const", const=True,
                   help="sample actions instead of greedy means")
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")

    p = add("control", cmd_control, "property-conditioned generation")
    p.add_argument("--checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--maze")
    p.add_argument("--metric")
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--rollouts", type=int)
    p.add_argument("--seeds")
    p.add_argument("--env-variant", dest="env_variant", choices=VARIANTS)
    p.add_argument("--sample", action="store_const", const=True)
    p.add_argument("--out")

    p = add("density", cmd_density, "export a conditional density grid")
    p.add_argument("--dataset")
    p.add_argument("--maze")
    p.add_argument("--dissim")
    p.add_argument("--beta", type=float)
    p.add_argument("--ref", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")

    p = add("maze", cmd_maze, "parse and print a maze")
    p.add_argument("--maze")
    p.add_argument("--list", action="store_true",
                   help="list bundled maze names")

    p = add("serve", cmd_serve, "run the HTTP/WebSocket service")
    p.add_argument("--maze")
    p.add_argument("--checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--dissim")
    p.add_argument("--record", help="dataset file teleop saves append to")
    p.add_argument("--frontend", help="static directory to serve at /")
    p.add_argument("--env-variant", dest="env_variant", choices=VARIANTS)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args.parser, args)
    except (OSError, ValueError, KeyError, IndexError, RuntimeError,
            MazeParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
