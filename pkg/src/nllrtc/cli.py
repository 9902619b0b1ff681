"""Command line entry point: ``nllrtc <subcommand> ...``."""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .cloud import DegradationSpec, detect_clouds, simulate_degradation
from .exceptions import FormatError, NLLRTCError, NumericError
from .metrics import quality_report, scatter_data
from .pipeline import halrtc_inpaint, inpaint
from .rearrange import ImageStack, rearrange_forward
from .similarity import PatchRef, group_patches, search_similar
from .tensor import mode_ranks

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    parser = Parser(prog="nllrtc", description="Non-local low-rank tensor completion "
                    "of multitemporal images.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("inpaint", help="reconstruct missing entries with patch groups")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config")
    p.add_argument("--report")

    p = sub.add_parser("halrtc", help="nuclear-norm baseline on the whole stack")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config")

    p = sub.add_parser("detect-cloud", help="threshold and refine a cloud mask")
    p.add_argument("--input", required=True)
    p.add_argument("--time", required=True, type=int)
    p.add_argument("--output", required=True)
    p.add_argument("--config")

    p = sub.add_parser("simulate-mask", help="build a synthetic degradation mask")
    p.add_argument("--input", required=True)
    p.add_argument("--spec", required=True, help="JSON degradation description")
    p.add_argument("--output", required=True)
    p.add_argument("--config")

    p = sub.add_parser("metrics", help="quality metrics of one acquisition")
    p.add_argument("--test", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--mask")
    p.add_argument("--report", required=True)
    p.add_argument("--time", type=int)
    p.add_argument("--scatter", help="optional CSV of (original, reconstructed) pairs")

    p = sub.add_parser("analyze-ranks", help="fiber counts and numerical ranks of a group")
    p.add_argument("--group-from", required=True, dest="group_from")
    p.add_argument("--anchor", help="row,col of a target patch in the working tensor; "
                   "without it the file itself is the group")
    p.add_argument("--mask")
    p.add_argument("--report", required=True)
    p.add_argument("--config")
    return parser


def _config(path):
    return io.RunConfig.load(path) if path else io.RunConfig().validate()


def _echo(cfg):
    sys.stdout.write("# effective configuration\n" + cfg.to_text())
    sys.stdout.write(f"# seed = {cfg.seed}\n")


def _load_stack(path):
    obj = io.load_container(path)
    if not isinstance(obj, ImageStack):
        raise FormatError(f"{path} holds a mask, expected values")
    return obj


def _load_mask(path):
    obj = io.load_container(path)
    if isinstance(obj, ImageStack):
        raise FormatError(f"{path} holds values, expected a mask")
    return obj


def cmd_inpaint(args, cfg):
    stack = _load_stack(args.input)
    mask = _load_mask(args.mask)
    out, report = inpaint(stack, mask, cfg.pipeline_config())
    io.save_container(args.output, out)
    if args.report:
        io.write_report(args.report, report.as_dict())
    sys.stderr.write(f"inpaint: {report.groups} groups in {report.wall_time:.2f} s\n")


def cmd_halrtc(args, cfg):
    stack = _load_stack(args.input)
    mask = _load_mask(args.mask)
    out, trace = halrtc_inpaint(stack, mask, cfg.solver_config(halrtc=True), cfg.normalize)
    io.save_container(args.output, out)
    sys.stderr.write(f"halrtc: {trace.iterations} iterations\n")


def cmd_detect(args, cfg):
    stack = _load_stack(args.input)
    io.save_container(args.output, detect_clouds(stack, args.time, cfg.detect_config()))


def cmd_simulate(args, cfg):
    stack = _load_stack(args.input)
    data = json.loads(Path(args.spec).read_text())
    data.setdefault("seed", cfg.seed)
    try:
        spec = DegradationSpec.from_dict(data)
    except TypeError as exc:
        raise FormatError(f"{args.spec}: {exc}") from None
    io.save_container(args.output, simulate_degradation(stack.shape, spec))


def cmd_metrics(args, cfg):
    test = _load_stack(args.test)
    ref = _load_stack(args.reference)
    mask = _load_mask(args.mask) if args.mask else None
    time = args.time
    if time is None:
        time = int(np.argmax((mask == 0).sum(axis=(0, 1, 2)))) if mask is not None else 0
    report = quality_report(test.values, ref.values, ref.value_range, time, mask)
    Path(args.report).write_text(report.to_text())
    if args.scatter:
        if mask is None:
            raise FormatError("--scatter needs --mask")
        io.write_scatter_csv(args.scatter, scatter_data(test.values, ref.values, mask))


def cmd_ranks(args, cfg):
    stack = _load_stack(args.group_from)
    if args.anchor:
        try:
            row, col = (int(v) for v in args.anchor.split(","))
        except ValueError:
            raise UsageError(f"--anchor expects 'row,col', got {args.anchor!r}") from None
        mask = _load_mask(args.mask) if args.mask else np.ones(stack.shape, dtype=np.uint8)
        working = rearrange_forward(stack, mask)
        refs = search_similar(working, PatchRef(row, col, cfg.patch_width), cfg.search_config())
        group = group_patches(working, refs).values
    else:
        group = stack.values
    items = {"shape": "x".join(str(d) for d in group.shape)}
    for mode, (fibers, rank) in enumerate(mode_ranks(group, cfg.rank_tol), 1):
        items[f"mode{mode}.fibers"] = fibers
        items[f"mode{mode}.dimspac"] = rank
    io.write_report(args.report, items)


COMMANDS = {
    "inpaint": cmd_inpaint,
    "halrtc": cmd_halrtc,
    "detect-cloud": cmd_detect,
    "simulate-mask": cmd_simulate,
    "metrics": cmd_metrics,
    "analyze-ranks": cmd_ranks,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(getattr(args, "config", None))
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (FormatError, ValueError, OSError) as exc:
        sys.stderr.write(f"nllrtc: configuration error: {exc}\n")
        return EXIT_USAGE
    _echo(cfg)
    try:
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        sys.stderr.write(f"nllrtc: numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (NLLRTCError, ValueError, OSError) as exc:
        sys.stderr.write(f"nllrtc: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
