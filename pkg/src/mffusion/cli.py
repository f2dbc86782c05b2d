"""Command-line entry point.

Subcommands: simulate, gen-dataset, fuse, evaluate, grad-check, validate.
Exit codes: 0 success, 1 argument error, 2 I/O error, 3 validation
failure. All randomness derives from the --seed flag; --threads is
accepted for interface stability but outputs never depend on it.
"""

import argparse
import glob
import json
import os
import sys

import numpy as np
import yaml

from . import datasetgen, defocus, fusion, guidance, losses, metrics
from .errors import ValidationError
from .image import load_png, save_png

EXIT_OK = 0
EXIT_ARGUMENT = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def build_parser():
    parser = _Parser(prog="mff", description=__doc__)
    parser.add_argument("--config", help="YAML config file; flags win over it")
    parser.add_argument("--threads", type=int, default=0,
                        help="accepted for compatibility; results never depend on it")
    parser.add_argument("--verbose", action="store_true")
    # Global flags are also accepted after the subcommand; SUPPRESS keeps
    # the subparser from clobbering a value given before it.
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common],
                       help="render a layered or boundary-line scene")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scene", help="YAML scene description file")
    src.add_argument("--fig7", type=int, metavar="FOCUS",
                     help="built-in three-object fixture, focused layer 1-3")
    p.add_argument("--model", choices=("one", "two", "matte"), default="matte")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--all-layers", action="store_true",
                   help="also write per-layer surfaces, mattes, contributions")

    p = sub.add_parser("gen-dataset", parents=[common], help="generate multi-focus training pairs")
    p.add_argument("--catalog", required=True, help="JSON asset catalog")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--per-fg", type=int, default=20)
    p.add_argument("--sigma-min", type=float, default=1.0)
    p.add_argument("--sigma-max", type=float, default=5.0)
    p.add_argument("--swap-prob", type=float, default=0.5)

    p = sub.add_parser("fuse", parents=[common], help="fuse a registered image pair")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--gmap", help="guidance map PNG; estimated when omitted")
    corr = p.add_mutually_exclusive_group()
    corr.add_argument("--corr", help="signed correction PNG (16-bit, 0.5 bias)")
    corr.add_argument("--oracle-gt", help="ground truth for the oracle correction")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", dest="metrics_out",
                   help="also write a metrics report for the fused image")

    p = sub.add_parser("evaluate", parents=[common], help="batch fusion-quality metrics")
    p.add_argument("--inputs", help="directory or glob of images (single method)")
    p.add_argument("--methods", nargs="*", default=[],
                   metavar="LABEL=DIR", help="compare methods by directory")
    p.add_argument("--out", required=True, help="JSON report path")

    p = sub.add_parser("grad-check", parents=[common], help="finite-difference check of the losses")
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("validate", parents=[common], help="validate a guidance map PNG")
    p.add_argument("--gmap", required=True)
    return parser


def _apply_config(parser, argv):
    # Two-stage parse so a YAML config can supply defaults; flags win.
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ArgumentError("config file must be a mapping")
    for action in parser._subparsers._group_actions[0].choices.values():
        section = {k.replace("-", "_"): v for k, v in doc.items()
                   if k.replace("-", "_") in {a.dest for a in action._actions}}
        action.set_defaults(**section)
    return argv


def cmd_simulate(args):
    if args.fig7 is not None:
        scene = defocus.make_fig7_scene(args.fig7)
    else:
        scene = defocus.load_scene_file(args.scene)
    os.makedirs(args.out, exist_ok=True)

    if isinstance(scene, defocus.BoundaryLineScene):
        if args.model != "two":
            raise ArgumentError("boundary-line scenes require --model two")
        image = defocus.render_two_param(scene)
        save_png(np.clip(image, 0, 1), os.path.join(args.out, "render.png"))
        return EXIT_OK

    if args.model == "two":
        raise ArgumentError("--model two needs a two_param scene file")
    if args.model == "one":
        image = defocus.render_one_param_regions(scene)
        save_png(np.clip(image, 0, 1), os.path.join(args.out, "render.png"))
        return EXIT_OK

    image, mattes, layer_images = defocus.render_alpha_matte(scene)
    save_png(np.clip(image, 0, 1), os.path.join(args.out, "render.png"))
    if args.all_layers:
        for n, layer in enumerate(scene.layers):
            from .image import gaussian_blur

            save_png(layer.surface, os.path.join(args.out, f"layer{n}_surface_clear.png"))
            save_png(gaussian_blur(layer.surface, layer.sigma),
                     os.path.join(args.out, f"layer{n}_surface.png"))
            save_png(gaussian_blur(layer.matte, layer.sigma),
                     os.path.join(args.out, f"layer{n}_matte0.png"))
            save_png(mattes[n], os.path.join(args.out, f"layer{n}_matte.png"))
            save_png(np.clip(layer_images[n], 0, 1),
                     os.path.join(args.out, f"layer{n}_contribution.png"))
    return EXIT_OK


def cmd_gen_dataset(args):
    catalog = datasetgen.AssetCatalog.from_file(args.catalog)
    cfg = datasetgen.GenConfig(
        out_size=args.size,
        backgrounds_per_fg=args.per_fg,
        sigma_min=args.sigma_min,
        sigma_max=args.sigma_max,
        swap_probability=args.swap_prob,
        seed=args.seed,
    )
    manifest = datasetgen.generate_dataset(catalog, cfg, args.out)
    print(f"generated {manifest['pair_count']} pairs -> {args.out}")
    if manifest["errors"]:
        print(f"{len(manifest['errors'])} pairs failed; see manifest errors")
        return EXIT_IO
    return EXIT_OK


def cmd_fuse(args):
    img_a = load_png(args.a)
    img_b = load_png(args.b)
    if args.gmap:
        gmap = guidance.load_guidance(args.gmap)
    else:
        gmap = guidance.estimate_guidance(img_a, img_b)
    if args.corr:
        corr = fusion.load_correction(args.corr)
    elif args.oracle_gt:
        corr = fusion.CorrectionSource.oracle(load_png(args.oracle_gt))
    else:
        corr = fusion.CorrectionSource.zero()
    fused = fusion.final_fusion(img_a, img_b, gmap, corr)
    save_png(fused, args.out)
    if args.metrics_out:
        report = metrics.evaluate_batch({"fused": [(os.path.basename(args.out), fused)]})
        with open(args.metrics_out, "w") as fh:
            fh.write(report.to_json())
    return EXIT_OK


def _collect_images(spec):
    if os.path.isdir(spec):
        paths = sorted(
            p for p in glob.glob(os.path.join(spec, "*"))
            if p.lower().endswith(".png")
        )
    else:
        paths = sorted(glob.glob(spec))
    if not paths:
        raise OSError(f"no images matched: {spec}")
    return [(os.path.basename(p), (lambda q=p: load_png(q))) for p in paths]


def cmd_evaluate(args):
    inputs = {}
    if args.methods:
        for item in args.methods:
            if "=" not in item:
                raise ArgumentError(f"--methods entries must be LABEL=DIR: {item}")
            label, spec = item.split("=", 1)
            inputs[label] = _collect_images(spec)
    elif args.inputs:
        inputs["default"] = _collect_images(args.inputs)
    else:
        raise ArgumentError("evaluate needs --inputs or --methods")
    report = metrics.evaluate_batch(inputs)
    with open(args.out, "w") as fh:
        fh.write(report.to_json())
    print(report.format_table())
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _fd_relative_error(fn, x, grad, h=1e-4, min_residual=0.0, residual=None):
    rng = np.random.default_rng(12345)
    worst = 0.0
    flat = x.reshape(-1)
    idx = rng.choice(flat.size, size=min(24, flat.size), replace=False)
    for i in idx:
        if residual is not None and abs(residual.reshape(-1)[i]) <= min_residual:
            continue
        orig = flat[i]
        flat[i] = orig + h
        fp = fn(x)
        flat[i] = orig - h
        fm = fn(x)
        flat[i] = orig
        fd = (fp - fm) / (2 * h)
        g = grad.reshape(-1)[i]
        denom = max(abs(fd), abs(g), 1e-12)
        worst = max(worst, abs(fd - g) / denom)
    return worst


def cmd_grad_check(args):
    rng = np.random.default_rng(args.seed)
    n = args.size
    matte_pred = rng.uniform(0.05, 0.45, size=(n, n))  # away from L1/kink points
    matte_gt = rng.uniform(0.55, 0.95, size=(n, n))
    ini_pred = rng.random((n, n))
    fin_pred = rng.random((n, n))
    gt = rng.random((n, n))
    cfg = losses.LossConfig()

    bd = losses.loss_total(matte_pred, matte_gt, ini_pred, fin_pred, gt, cfg)
    errs = {
        "matte": _fd_relative_error(
            lambda x: losses.loss_total(x, matte_gt, ini_pred, fin_pred, gt, cfg).total,
            matte_pred, bd.grad_matte,
        ),
        "fusion_ini": _fd_relative_error(
            lambda x: losses.loss_total(matte_pred, matte_gt, x, fin_pred, gt, cfg).total,
            ini_pred, bd.grad_fusion_ini,
        ),
        "fusion_fin": _fd_relative_error(
            lambda x: losses.loss_total(matte_pred, matte_gt, ini_pred, x, gt, cfg).total,
            fin_pred, bd.grad_fusion_fin,
        ),
    }
    print(f"loss breakdown: matte={bd.matte:.6e} ini={bd.ini:.6e} "
          f"weighted={bd.weighted:.6e} total={bd.total:.6e}")
    worst = max(errs.values())
    for name, err in errs.items():
        print(f"grad {name}: max rel. error {err:.3e}")
    print(f"max rel. error {worst:.3e}")
    return EXIT_OK if worst < 1e-4 else EXIT_VALIDATION


def cmd_validate(args):
    gmap = guidance.load_guidance(args.gmap)
    report = guidance.validate_guidance(gmap)
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["valid"] else EXIT_VALIDATION


COMMANDS = {
    "simulate": cmd_simulate,
    "gen-dataset": cmd_gen_dataset,
    "fuse": cmd_fuse,
    "evaluate": cmd_evaluate,
    "grad-check": cmd_grad_check,
    "validate": cmd_validate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except ArgumentError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except ValueError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
