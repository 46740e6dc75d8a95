# Built-in imports
import os
import sys
import argparse
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

# Add the path to the sys.path
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))

# Own imports
from common.config import load_app_config  # noqa: E402
from common.exceptions import (  # noqa: E402
    CapExceededError,
    IdsError,
    InvariantViolationError,
)
from common.helpers.output_helper import OutputHelper  # noqa: E402
from common.logger import custom_logger  # noqa: E402
from experiments.experiment_handler import COMMANDS, experiment_handler  # noqa: E402

logger = custom_logger()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
STOCHASTIC_COMMANDS = ("ids-empirical", "ids-mc")


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ids",
        description="Certified integrated density of states via rank-ring approximants.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--model", help="model spec JSON (kind, values, probabilities, p, d)")
    parser.add_argument("--spec", help="self-similar spec JSON")
    parser.add_argument("--dim", type=int, help="lattice dimension d")
    parser.add_argument("--level", type=int, help="level i (or tile level j, or tower depth)")
    parser.add_argument("--levels", type=_int_list, help="comma separated levels, e.g. 1,2,3")
    parser.add_argument("--side", type=int, help="box side for ids-empirical")
    parser.add_argument("--samples", type=int, help="Monte Carlo sample count")
    parser.add_argument("--seed", type=int, help="seed, mandatory for stochastic commands")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--tol", type=float, help="rank tolerance override")
    parser.add_argument("--p-grid", type=_float_list, help="comma separated p values")
    parser.add_argument("--kernel", help="laplacian, adjacency or constant:<c>")
    parser.add_argument("--radius", type=int, help="pattern census radius")
    parser.add_argument("--env", help="configuration profile in ids.json")
    return parser


def build_event(args: argparse.Namespace) -> dict:
    """Experiment event from parsed flags; JSON inputs are read here."""
    if args.command in STOCHASTIC_COMMANDS and args.seed is None:
        raise ValueError(f"{args.command} is stochastic: --seed is required")
    params = {
        "dim": args.dim,
        "level": args.level,
        "levels": args.levels or ([args.level] if args.level is not None else None),
        "side": args.side,
        "samples": args.samples,
        "seed": args.seed,
        "tol": args.tol,
        "p_grid": args.p_grid,
        "kernel": args.kernel,
        "radius": args.radius,
    }
    event = {
        "command": args.command,
        "params": {k: v for k, v in params.items() if v is not None},
        "output_dir": args.out,
        "environment": args.env,
    }
    if args.model:
        event["model"] = OutputHelper.read_json(args.model)
    if args.spec:
        event["spec"] = OutputHelper.read_json(args.spec)
    return event


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch and map the outcome to an exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        event = build_event(args)
        config = load_app_config(args.env)
        threads = args.threads or config.resolved_threads()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            summary = experiment_handler(event, mapper=pool.map)
    except InvariantViolationError as exc:
        print(f"FAILED: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.hint:
            print(f"hint: {exc.hint}", file=sys.stderr)
        return EXIT_USAGE
    except (IdsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    for path in summary["artifacts"]:
        print(f"wrote {path}")
    for name, passed in summary["checks"].items():
        print(f"{name}: {'pass' if passed else 'fail (statistical)'}")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
