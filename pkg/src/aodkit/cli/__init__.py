"""Command-line interface.

``aodkit <command> --config system.yaml [--out DIR] [--seed N]``

Every run validates the configuration, executes one analysis or virtual
experiment, writes CSV/SVG artifacts plus a JSON run report into the
output directory, and prints a summary.  Exit codes: 0 success, 1 for a
domain error (infeasible request), 2 for a configuration error.

Output directory precedence: ``--out`` flag, then the ``AODKIT_OUT``
environment variable, then ``output.directory`` in the config, then
``./aodkit-out``.  Seed precedence: ``--seed``, then ``seed`` in the
config; commands that need randomness without either generate one and
echo it.
"""

import argparse
import os
import sys
import time

from ..errors import ConfigError, DomainError
from ..prism_designer import calibrated_convention
from .commands import HANDLERS, RunContext
from .config import parse_config
from .report import write_run_report

OUTPUT_ENV_VAR = "AODKIT_OUT"
DEFAULT_OUTPUT = "aodkit-out"


def _add_common(parser):
    parser.add_argument("--config", required=True, help="YAML system configuration")
    parser.add_argument("--out", default=None, help="output directory for artifacts")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for stochastic commands (overrides the config)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aodkit",
        description="Design and virtual characterization of an AOD "
                    "individual-addressing optical system.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    specs = [
        ("design-prism", "solve the prism pair for a target expansion"),
        ("tolerance", "Monte-Carlo mounting-tolerance study of the prism pair"),
        ("trace", "propagate the input beam through the optical train"),
        ("steer", "frequency-to-position steering map across the band"),
        ("efficiency", "diffraction efficiency across the band"),
        ("monitor", "pick-off monitor voltage across the band"),
        ("crosstalk", "ideal and clipped addressing crosstalk"),
        ("misalign", "rate imbalance from steering-axis misalignment"),
    ]
    for name, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)
        if name == "design-prism":
            sp.add_argument("--target", type=float, default=None,
                            help="target expansion factor (overrides the config)")

    lab = sub.add_parser("lab", help="virtual Rabi-experiment lab")
    labsub = lab.add_subparsers(dest="lab_command", required=True, metavar="experiment")
    for name, help_text in [
        ("profile-scan", "scan the beam across one ion and fit the waist"),
        ("chain-scan", "scan the beam across the whole chain"),
        ("crosstalk", "drive one ion, fit every ion's Rabi rate"),
        ("switching", "sweep extra drive time after a frequency hop"),
    ]:
        sp = labsub.add_parser(name, help=help_text)
        _add_common(sp)
    return parser


def _resolve_outdir(args, cfg):
    outdir = args.out or os.environ.get(OUTPUT_ENV_VAR) or cfg.output_directory \
        or DEFAULT_OUTPUT
    os.makedirs(outdir, exist_ok=True)
    return outdir


def _print_results(results, indent="  "):
    for key in results:
        value = results[key]
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_results(value, indent + "  ")
        elif isinstance(value, float):
            print(f"{indent}{key}: {value + 0.0:.6g}")
        else:
            print(f"{indent}{key}: {value}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    key = args.command if args.command != "lab" else f"lab {args.lab_command}"
    slug, handler = HANDLERS[key]

    try:
        cfg = parse_config(args.config)
        outdir = _resolve_outdir(args, cfg)
        seed = args.seed if args.seed is not None else cfg.seed
        if seed is not None and seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        ctx = RunContext(cfg=cfg, outdir=outdir, seed=seed,
                         target=getattr(args, "target", None))

        start = time.perf_counter()
        results, artifacts = handler(ctx)
        wall = time.perf_counter() - start

        report_path = write_run_report(
            outdir, slug, key, cfg.digest, calibrated_convention(),
            ctx.seed, results, artifacts)

        print(f"command: {key}")
        print(f"config digest: {cfg.digest[:16]}")
        if ctx.generated_seed:
            print(f"seed: {ctx.seed} (generated)")
        elif ctx.seed is not None:
            print(f"seed: {ctx.seed}")
        _print_results(results)
        for path in artifacts:
            print(f"wrote: {path}")
        print(f"wrote: {report_path}")
        print(f"wall time: {wall:.3f} s")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
