"""Command-line front end: ``holocgh optimize | compare | simulate``.

Exit codes: 0 success, 2 diverged run (artifacts still written), 64 usage
error, 65 malformed input file, 74 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import imageio
from ._backend import BACKEND
from .errors import FormatError, HoloError
from .field import replay_amplitude
from .loss import LossKind
from .pipeline import COMPARE_RUNS, RunConfig, compare, optimize, quantize_binary, symmetrize_target

EXIT_OK = 0
EXIT_DIVERGED = 2
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_IOERR = 74

log = logging.getLogger("holocgh")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, int]:
    try:
        if "x" in text:
            h, w = (int(v) for v in text.lower().split("x"))
        else:
            h = w = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or HxW, got {text!r}")
    if h < 2 or w < 2:
        raise argparse.ArgumentTypeError("size must be at least 2x2")
    return h, w


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", required=True, help="target image (PNG or binary PGM)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=_dims, default=(128, 128), help="N or HxW (default 128)")
    p.add_argument("--history", type=int, default=20, help="L-BFGS pair history")
    p.add_argument("--line-search", choices=("fixed", "strong-wolfe"), default="fixed")
    p.add_argument("--symmetrize", action="store_true",
                   help="average the target with its 180 degree rotation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="holocgh", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimise one hologram")
    _add_run_flags(p)
    p.add_argument("--optimizer", choices=("adam", "lbfgs"), required=True)
    p.add_argument("--loss", choices=("mse", "ce"), required=True)
    p.add_argument("--binary", action="store_true", help="also write the {0, pi} quantised hologram")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="run all four optimiser/loss combinations")
    _add_run_flags(p)
    p.add_argument("--parallel", action="store_true", help="run the four combinations concurrently")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="simulate the replay field of a saved phase")
    p.add_argument("--phase", required=True, help="HOLOPHS1 phase file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--binary", action="store_true", help="quantise to {0, pi} first")
    p.set_defaults(func=cmd_simulate)
    return parser


def _config(args, optimizer="lbfgs", loss="ce") -> RunConfig:
    h, w = args.size
    try:
        return RunConfig(
            optimizer=optimizer, loss=LossKind(loss), lr=args.lr, iterations=args.iters,
            seed=args.seed, height=h, width=w, lbfgs_history=args.history,
            save_every=0, line_search=args.line_search,
        )
    except HoloError as exc:
        raise UsageError(str(exc)) from exc


def _load_target(args, dims):
    target = imageio.load_target(args.target, dims)
    if args.symmetrize:
        target = symmetrize_target(target)
    if not np.any(target > 0):
        raise FormatError(f"{args.target}: target image is all black")
    return target


def cmd_optimize(args) -> int:
    config = _config(args, args.optimizer, args.loss)
    target = _load_target(args, config.dims)
    record = optimize(target, config)

    imageio.ensure_dir(args.out)
    out = lambda name: os.path.join(args.out, name)
    imageio.save_phase(record.final_phase, out("final_phase.holophs"))
    imageio.save_phase_preview(record.final_phase, out("phase_preview.png"))
    imageio.save_image(replay_amplitude(record.final_phase), out("recon.png"))
    imageio.write_columns_csv(
        {"loss": record.loss_history, "mse": record.mse_history}, out("loss.csv")
    )
    if args.binary:
        binary = quantize_binary(record.final_phase)
        imageio.save_phase(binary, out("binary_phase.holophs"))
        imageio.save_image(replay_amplitude(binary), out("binary_recon.png"))

    print(f"{config.optimizer}+{config.loss.value}: mse {record.initial_mse:.6g} -> "
          f"{record.final_mse:.6g}, rejected pairs {record.rejected_pairs}")
    if record.diverged:
        print(f"diverged at iteration {record.diverged_at}")
        return EXIT_DIVERGED
    return EXIT_OK


def format_summary(records: dict, args, config: RunConfig) -> str:
    lines = [
        f"target: {args.target} ({config.height}x{config.width})",
        f"seed {config.seed}, lr {config.lr:g}, iterations {config.iterations}, "
        f"history {config.lbfgs_history}, line search {config.line_search}",
        "",
        f"{'run':<10} {'initial_mse':>12} {'final_mse':>12}  status",
    ]
    for label, rec in records.items():
        if rec.diverged:
            status = f"diverged at iteration {rec.diverged_at}"
        elif rec.converged:
            status = "converged"
        else:
            status = "not converged"
        lines.append(f"{label:<10} {rec.initial_mse:>12.9g} {rec.final_mse:>12.9g}  {status}")
    diverged = [label for label, rec in records.items() if rec.diverged]
    not_conv = [label for label, rec in records.items() if not rec.converged]
    best = min(records, key=lambda k: records[k].final_mse)
    lines += [
        "",
        f"diverged: {', '.join(diverged) or 'none'}",
        f"not converged: {', '.join(not_conv) or 'none'}",
        f"lowest final mse: {best}",
    ]
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    config = _config(args)
    target = _load_target(args, config.dims)
    records = compare(target, config, parallel=args.parallel)

    imageio.ensure_dir(args.out)
    labels = [label for label, _, _ in COMPARE_RUNS]
    imageio.write_loss_csv([records[k] for k in labels], labels,
                           os.path.join(args.out, "mse_compare.csv"))
    summary = format_summary(records, args, config)
    with open(os.path.join(args.out, "summary.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    return EXIT_DIVERGED if any(r.diverged for r in records.values()) else EXIT_OK


def cmd_simulate(args) -> int:
    phase = imageio.load_phase(args.phase)
    if args.binary:
        phase = quantize_binary(phase)
    imageio.ensure_dir(args.out)
    imageio.save_image(replay_amplitude(phase), os.path.join(args.out, "replay.png"))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("kernel backend: %s", BACKEND)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"holocgh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"holocgh: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except OSError as exc:
        print(f"holocgh: {exc}", file=sys.stderr)
        return EXIT_IOERR


if __name__ == "__main__":
    sys.exit(main())
