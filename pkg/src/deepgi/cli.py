"""Command-line front end for the whole pipeline.

Subcommands: gen-data, train, infer, eval, sweep, selftest. Logs go to
stderr and data products to files; eval additionally prints its metric
lines on stdout. Every run echoes the fully resolved configuration
(explicit flags merged over an optional --config JSON file over built-in
defaults) so any result can be reproduced from the log alone.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .autodiff import Tensor, add, bce_loss, conv2d, conv_transpose2d, max_rel_error, tanh
from .metrics import compute_report
from .nets import (
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    build_from_checkpoint,
    load_checkpoint,
)
from .render import (
    MANIFEST_NAME,
    Camera,
    DirectionalLight,
    Rect,
    Scene,
    Sphere,
    generate_dataset,
    path_trace,
    read_manifest,
    render_direct,
    split_dataset,
    write_dib,
    write_manifest,
)
from .train import (
    TrainConfig,
    infer,
    load_frame,
    load_split,
    radiance_to_display,
    run_base_layer_experiment,
    run_dataset_size_experiment,
    run_epochs_experiment,
    save_preview,
    save_training_curves,
    train,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the contract reserves 2 for
    runtime failures, so usage problems are rethrown and mapped to 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage().rstrip()}")


def _csv_ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _csv_names(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, metavar="JSON",
                     help="JSON file of defaults; explicit flags override it")
    sub.add_argument("--quiet", action="store_true", help="suppress progress logs")


def _build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="deepgi", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs: dict[str, _Parser] = {}

    p = subs["gen-data"] = commands.add_parser(
        "gen-data", help="render a sweep dataset and write its manifest")
    p.add_argument("--out", required=True, help="dataset directory")
    p.add_argument("--light-steps", type=int, default=10)
    p.add_argument("--object-steps", type=int, default=12)
    p.add_argument("--objects", type=_csv_names, default=("sphere", "cube"),
                   metavar="A,B", help="comma-separated object kinds")
    p.add_argument("--spp", type=int, default=64)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-bounces", type=int, default=8)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--holdout", type=float, nargs=2, default=None, metavar=("LO", "HI"),
                   help="light-angle interval held out as the test split")
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.set_defaults(func=_cmd_gen_data)

    p = subs["train"] = commands.add_parser("train", help="train the GAN on a dataset")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="run directory for stats and checkpoints")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--beta1", type=float, default=0.5)
    p.add_argument("--lambda-l1", type=float, default=100.0)
    p.add_argument("--k", type=int, default=32, help="generator base layer width")
    p.add_argument("--depth", type=int, default=6, help="encoder depth; input is 2^depth square")
    p.add_argument("--disc-k", type=int, default=None, help="discriminator width (defaults to --k)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume", default=None, metavar="CKPT")
    p.set_defaults(func=_cmd_train)

    p = subs["infer"] = commands.add_parser(
        "infer", help="predict one frame and write the raster plus a preview figure")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--frame", type=int, default=0, help="frame index from the manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_infer)

    p = subs["eval"] = commands.add_parser("eval", help="score a checkpoint on a split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.set_defaults(func=_cmd_eval)

    p = subs["sweep"] = commands.add_parser("sweep", help="run an experiment sweep")
    p.add_argument("--kind", choices=("epochs", "dataset-size", "base-layer"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=None, help="kind-specific default when omitted")
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--lambda-l1", type=float, default=100.0)
    p.add_argument("--k", type=int, default=None, help="kind-specific default when omitted")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--disc-k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", type=_csv_ints, default=[20, 40, 80], metavar="N,N,..",
                   help="dataset-size sweep: nested training subset sizes")
    p.add_argument("--ks", type=_csv_ints, default=[16, 32, 64], metavar="K,K,..",
                   help="base-layer sweep: generator widths to time")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--trace-spp", type=int, default=64)
    p.set_defaults(func=_cmd_sweep)

    p = subs["selftest"] = commands.add_parser(
        "selftest", help="quick gradient and renderer sanity battery")
    p.set_defaults(func=_cmd_selftest)

    for sub in subs.values():
        _add_common(sub)
    return parser, subs


def _merge_config_file(parser: _Parser, sub: _Parser, args, argv) -> argparse.Namespace:
    """Precedence flag > config file > built-in, via set_defaults + reparse."""
    with open(args.config, "r", encoding="utf-8") as f:
        overrides = json.load(f)
    if not isinstance(overrides, dict):
        raise _UsageError(f"{args.config}: config must be a JSON object")
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config", "func")}
    for key, value in overrides.items():
        if key not in actions:
            raise _UsageError(f"{args.config}: unknown config key {key!r}")
        if isinstance(value, str) and actions[key].type is not None:
            value = actions[key].type(value)
        sub.set_defaults(**{key: value})
    return parser.parse_args(argv)


def _echo_config(args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "quiet")}
    print("resolved config: " + json.dumps(cfg, default=str), file=sys.stderr)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cmd_gen_data(args, log) -> int:
    manifest = generate_dataset(
        args.out,
        light_steps=args.light_steps,
        object_steps=args.object_steps,
        object_kinds=args.objects,
        spp=args.spp,
        resolution=args.resolution,
        seed=args.seed,
        max_bounces=args.max_bounces,
        workers=args.workers,
    )
    manifest = split_dataset(
        manifest,
        holdout=tuple(args.holdout) if args.holdout else None,
        val_fraction=args.val_fraction,
    )
    write_manifest(manifest, os.path.join(args.out, MANIFEST_NAME))
    counts = {s: len(manifest.by_split(s)) for s in ("train", "val", "test")}
    log(f"wrote {len(manifest.frames)} frames to {args.out} "
        f"(train {counts['train']}, val {counts['val']}, test {counts['test']})")
    return 0


def _build_nets(k: int, depth: int, disc_k: int | None, seed: int):
    gen = Generator(GeneratorConfig(k, depth=depth), init_seed=seed)
    disc = Discriminator(DiscriminatorConfig(base_layer_k=disc_k or k), init_seed=seed + 1)
    return gen, disc


def _cmd_train(args, log) -> int:
    manifest = read_manifest(os.path.join(args.data, MANIFEST_NAME))
    gen, disc = _build_nets(args.k, args.depth, args.disc_k, args.seed)
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        beta1=args.beta1,
        lambda_l1=args.lambda_l1,
        seed=args.seed,
    )
    rows = train(args.data, manifest, gen, disc, config, args.out,
                 resume_from=args.resume, log=log)
    save_training_curves(os.path.join(args.out, "curves.png"), rows)
    log(f"done: {len(rows)} epochs logged in {os.path.join(args.out, 'stats.csv')}")
    return 0


def _cmd_infer(args, log) -> int:
    manifest = read_manifest(os.path.join(args.data, MANIFEST_NAME))
    record = next((r for r in manifest.frames if r.index == args.frame), None)
    if record is None:
        raise ValueError(f"frame {args.frame} is not in the manifest")
    generator, _ = build_from_checkpoint(load_checkpoint(args.ckpt))
    pair = load_frame(args.data, record)
    pred = infer(generator, pair.x)
    os.makedirs(args.out, exist_ok=True)
    raster_path = os.path.join(args.out, f"pred_{args.frame:04d}.dib")
    write_dib(raster_path, pred)
    pred_display = radiance_to_display(pred)
    preview_path = os.path.join(args.out, f"preview_{args.frame:04d}.png")
    save_preview(preview_path, [
        ("direct only", pair.direct_display),
        ("prediction", pred_display),
        ("reference", pair.gt_display),
    ])
    report = compute_report(pred_display, pair.gt_display)
    log(f"frame {args.frame}: {report.format_line()}")
    log(f"wrote {raster_path} and {preview_path}")
    return 0


def _cmd_eval(args, log) -> int:
    manifest = read_manifest(os.path.join(args.data, MANIFEST_NAME))
    generator, _ = build_from_checkpoint(load_checkpoint(args.ckpt))
    pairs = load_split(args.data, manifest, args.split)
    if not pairs:
        raise ValueError(f"no frames labeled {args.split} in the manifest")
    reports = []
    for pair in pairs:
        pred_display = radiance_to_display(infer(generator, pair.x))
        report = compute_report(pred_display, pair.gt_display)
        reports.append(report)
        print(f"frame {pair.index}: {report.format_line()}")
    print(
        f"mean over {len(reports)} {args.split} frames: "
        f"mse={np.mean([r.mse for r in reports]):.6f} "
        f"ssim={np.mean([r.ssim for r in reports]):.4f} "
        f"psnr={np.mean([r.psnr for r in reports]):.2f}dB"
    )
    return 0


def _cmd_sweep(args, log) -> int:
    manifest = read_manifest(os.path.join(args.data, MANIFEST_NAME))
    if args.kind == "epochs":
        run_epochs_experiment(
            args.data, manifest, args.out,
            epochs=args.epochs if args.epochs is not None else 20,
            base_layer_k=args.k if args.k is not None else 32,
            depth=args.depth, batch_size=args.batch, seed=args.seed,
            lambda_l1=args.lambda_l1, lr=args.lr, disc_k=args.disc_k, log=log,
        )
    elif args.kind == "dataset-size":
        run_dataset_size_experiment(
            args.data, manifest, args.sizes, args.out,
            epochs=args.epochs if args.epochs is not None else 6,
            base_layer_k=args.k if args.k is not None else 16,
            depth=args.depth, batch_size=args.batch, seed=args.seed,
            lambda_l1=args.lambda_l1, lr=args.lr, disc_k=args.disc_k, log=log,
        )
    else:
        run_base_layer_experiment(
            args.data, manifest, args.ks, args.out,
            depth=args.depth, repeats=args.repeats, trace_spp=args.trace_spp,
            seed=args.seed, log=log,
        )
    log(f"sweep results in {args.out}")
    return 0


def _selftest_checks() -> list[tuple[str, bool, str]]:
    checks = []
    rng = np.random.default_rng(0)

    x = Tensor(rng.standard_normal((2, 3, 8, 8)).astype(np.float32), requires_grad=True)
    w = Tensor(rng.standard_normal((4, 3, 4, 4)).astype(np.float32) * 0.2, requires_grad=True)
    err = max_rel_error(lambda: conv2d(x, w, stride=2, pad=1), w, rng)
    checks.append(("conv2d gradient", err < 1e-3, f"rel err {err:.2e}"))

    xt = Tensor(rng.standard_normal((2, 4, 4, 4)).astype(np.float32), requires_grad=True)
    wt = Tensor(rng.standard_normal((4, 3, 4, 4)).astype(np.float32) * 0.2, requires_grad=True)
    err = max_rel_error(lambda: conv_transpose2d(xt, wt, stride=2, pad=1), wt, rng)
    checks.append(("conv_transpose2d gradient", err < 1e-3, f"rel err {err:.2e}"))

    # composed graphs get the wider step; float32 FD noise dominates at 1e-3
    z = Tensor((0.5 * rng.standard_normal((2, 1, 4, 4))).astype(np.float32), requires_grad=True)
    target = Tensor((rng.random((2, 1, 4, 4)) > 0.5).astype(np.float32))
    from .autodiff import sigmoid

    err = max_rel_error(lambda: bce_loss(sigmoid(z), target), z, rng, h=5e-3)
    checks.append(("sigmoid+bce gradient", err < 1e-3, f"rel err {err:.2e}"))

    err = max_rel_error(lambda: tanh(x), x, rng)
    checks.append(("tanh gradient", err < 1e-3, f"rel err {err:.2e}"))

    wall = Rect(2, 1.0, (-20.0, -20.0), (20.0, 20.0))
    scene = Scene(
        primitives=[(wall, (1.0, 1.0, 1.0))],
        light=DirectionalLight((0.0, 0.0, 1.0), (1.0, 1.0, 1.0)),
        env=(0.0, 0.0, 0.0),
        center=(0, 0, 1),
        bounding_radius=20.0,
    )
    cam = Camera((0, 0, -3), (0, 0, 1), vfov_deg=30.0, resolution=8)
    gap = np.abs(render_direct(scene, cam) - 1.0 / math.pi).max()
    checks.append(("head-on Lambert value 1/pi", gap < 1e-3, f"max gap {gap:.2e}"))

    floor = Rect(1, 0.0, (-20.0, -20.0), (20.0, 20.0))
    shadow_scene = Scene(
        primitives=[(floor, (0.6, 0.6, 0.6)), (Sphere((0.0, 1.0, 0.0), 0.3), (0.9, 0.9, 0.9))],
        light=DirectionalLight((0.0, -1.0, 0.0), (1.0, 1.0, 1.0)),
        env=(0.0, 0.0, 0.0),
        center=(0, 0, 0),
        bounding_radius=20.0,
    )
    shadow_cam = Camera((0, 3, -3), (0, 0, 0), vfov_deg=40.0, resolution=9)
    center = render_direct(shadow_scene, shadow_cam)[4, 4]
    checks.append(("shadowed pixel exactly zero", bool(np.all(center == 0.0)), f"value {center}"))

    furnace = Scene(
        primitives=[(Rect(1, 0.0, (-50.0, -50.0), (50.0, 50.0)), (0.5, 0.5, 0.5))],
        light=None,
        env=(1.0, 1.0, 1.0),
        center=(0, 0, 0),
        bounding_radius=50.0,
    )
    furnace_cam = Camera((0, 3, -4), (0, 0, 0), vfov_deg=35.0, resolution=8)
    gap = np.abs(path_trace(furnace, furnace_cam, spp=64, seed=1) - 0.5).max()
    checks.append(("uniform-sky plane reaches albedo", gap < 0.01, f"max gap {gap:.2e}"))

    gen = Generator(GeneratorConfig(4, depth=6), init_seed=0)
    out = gen.forward(Tensor(rng.uniform(-1, 1, (1, 12, 64, 64)).astype(np.float32)),
                      training=False)
    ok = out.data.shape == (1, 3, 64, 64) and float(np.abs(out.data).max()) <= 1.0
    checks.append(("generator shape and range at 64x64", ok, f"shape {out.data.shape}"))

    disc = Discriminator(DiscriminatorConfig(base_layer_k=4), init_seed=1)
    dx = Tensor(rng.uniform(-1, 1, (1, 12, 256, 256)).astype(np.float32))
    dy = Tensor(rng.uniform(-1, 1, (1, 3, 256, 256)).astype(np.float32))
    dout = disc.forward(dx, dy, training=False).data
    ok = dout.shape == (1, 1, 30, 30) and 0.0 < dout.min() and dout.max() < 1.0
    checks.append(("discriminator 30x30 patch map", ok, f"shape {dout.shape}"))
    return checks


def _cmd_selftest(args, log) -> int:
    failures = 0
    for name, ok, detail in _selftest_checks():
        _log(f"{'ok' if ok else 'FAIL'}: {name} ({detail})")
        failures += 0 if ok else 1
    if failures:
        raise RuntimeError(f"{failures} selftest check(s) failed")
    _log("selftest passed")
    return 0


def main(argv=None) -> int:
    parser, subs = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _merge_config_file(parser, subs[args.command], args, argv)
    except _UsageError as err:
        print(str(err), file=sys.stderr)
        return 1
    except SystemExit as err:  # argparse --help
        return int(err.code or 0)
    _echo_config(args)
    log = (lambda msg: None) if args.quiet else _log
    try:
        return args.func(args, log)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
