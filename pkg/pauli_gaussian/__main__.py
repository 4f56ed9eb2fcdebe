#!/usr/bin/env python3
"""
pauli-gaussian CLI

Amplitudes, outcome probabilities and post-measurement entanglement of
fermionic Gaussian pure states measured in local Pauli bases.

Usage:
    # Amplitude of one outcome of the critical Ising ground state
    python -m pauli_gaussian amplitude --model tfim --L 8 --h 1 --J 1 \\
        --basis uniform:0,1.5707963,0 --config "++++++++"

    # Full outcome table of a random state
    python -m pauli_gaussian probability --random 7 --L 10 --basis x --enumerate

    # Post-measurement decay scan and fit
    python -m pauli_gaussian postmeasure --model tfim --L 128 \\
        --pattern x-all-plus --alphas 0.5,1,2 --dmin 4 --dmax 16 -o scan.csv
    python -m pauli_gaussian fit --input scan.csv --alpha 2 --window 4:16
"""

import argparse
import logging
import sys

from .commands import run
from .config import RunConfig
from .errors import INTERNAL_ERROR_EXIT, PauliGaussianError

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(message)s",
)
log = logging.getLogger(__name__)

CONVENTIONS = """
Conventions:
  Angles are radians unless --degrees is given.
  Configuration strings list site 1 first; '+' (or u, 1) and '-' (or d, 0).
  Site indices in JSON files and --sites are 0-based.
  theta = 0 measures sigma^z with '+' selecting an occupied site;
  theta = pi/2 with phi = 0 (pi/2) measures sigma^x (sigma^y).

Environment Variables:
  PAULI_GAUSSIAN_MAX_ENUM_SITES   Largest L for full 2^L enumeration (default 24)
  PAULI_GAUSSIAN_WORKERS          Threads for batch evaluation (default 1)
  PAULI_GAUSSIAN_ALLOW_LARGE      "true" lifts the enumeration guards

Exit codes:
  0 success, 1 validation failure, 2 usage or parse error, 3 numeric guard,
  4 internal error
"""


def _state_arguments() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    source = parent.add_argument_group("state source (exactly one)")
    source.add_argument("--state-file", help="JSON state spec")
    source.add_argument("--model", choices=["tfim"], help="Physical model")
    source.add_argument("--random", type=int, metavar="SEED", help="Seeded random state")

    model = parent.add_argument_group("model parameters")
    model.add_argument("--L", type=int, help="Number of sites")
    model.add_argument("--J", type=float, default=1.0, help="Ising coupling (default: %(default)s)")
    model.add_argument(
        "--h", type=float, default=1.0, help="Transverse field (default: %(default)s)"
    )
    model.add_argument(
        "--route",
        choices=["auto", "exact", "bogoliubov"],
        default="auto",
        help="TFIM construction route (default: %(default)s)",
    )
    model.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="RMS modulus of random R entries (default: %(default)s)",
    )
    return parent


def _basis_arguments() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--basis",
        help="z | x | y | uniform:phi,theta[,alpha] | JSON text | JSON file",
    )
    parent.add_argument("--degrees", action="store_true", help="Read angles in degrees")
    return parent


def _common_arguments(seed: bool = True) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("-o", "--output", help="Output file (default: stdout)")
    parent.add_argument("--format", choices=["json", "csv"], help="Output format")
    parent.add_argument("--workers", type=int, help="Worker threads")
    parent.add_argument(
        "--allow-large", action="store_true", help="Lift the enumeration size guards"
    )
    if seed:
        parent.add_argument(
            "--seed", type=int, default=0, help="Random seed (default: %(default)s)"
        )
    parent.add_argument("--debug", action="store_true", help="Enable debug logging")
    return parent


# Options whose values may start with '-' (outcome strings such as "-+-+")
SIGNED_VALUE_OPTIONS = ("--config", "--outcome")


def normalize_argv(argv: list[str]) -> list[str]:
    """Join `--config -+-+` into `--config=-+-+` so argparse keeps the value."""
    joined = []
    args = iter(argv)
    for arg in args:
        if arg in SIGNED_VALUE_OPTIONS:
            value = next(args, None)
            joined.append(arg if value is None else f"{arg}={value}")
        else:
            joined.append(arg)
    return joined


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pauli-gaussian",
        description="Fermionic Gaussian states in local Pauli bases",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=CONVENTIONS,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    state_args, basis_args, common = _state_arguments(), _basis_arguments(), _common_arguments()

    def add(name, help_text, parents):
        return sub.add_parser(
            name,
            help=help_text,
            description=help_text,
            parents=parents,
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog=CONVENTIONS,
        )

    add("state", "Write a model or random state as a JSON state spec", [state_args, common])

    p = add("amplitude", "Amplitudes <S|R> of outcome strings", [state_args, basis_args, common])
    p.add_argument("--config", action="append", help="Outcome string, site 1 first (repeatable)")
    p.add_argument(
        "--path",
        default="auto",
        choices=["auto", "m_form", "tan_form", "domain_wall", "m", "tan", "dw"],
        help="Evaluation path (default: %(default)s)",
    )

    p = add("probability", "Outcome probabilities", [state_args, basis_args, common])
    p.add_argument("--config", action="append", help="Outcome string (repeatable)")
    p.add_argument("--enumerate", action="store_true", help="Table of all 2^L outcomes")
    p.add_argument("--sites", help="Measured sites for a marginal, e.g. 0,1,2")
    p.add_argument("--outcome", help="Outcome on --sites")
    p.add_argument(
        "--method",
        choices=["amplitude_squared", "det_ratio"],
        default="amplitude_squared",
        help="Probability formula (default: %(default)s)",
    )

    p = add("entropy", "Shannon-Renyi entropies (natural log)", [state_args, basis_args, common])
    p.add_argument("--alphas", default="1", help="Comma-separated Renyi indices")
    p.add_argument(
        "--method", choices=["amplitude_squared", "det_ratio"], default="amplitude_squared"
    )

    p = add("search", "Most likely product outcome (global entanglement)", [state_args, common])
    p.add_argument("--grid", type=int, default=5, help="Grid points per angle")
    p.add_argument("--restarts", type=int, default=4, help="Random restarts")

    p = add(
        "postmeasure",
        "Entanglement of A1 after measuring B, against the separation d",
        [state_args, basis_args, common],
    )
    p.add_argument(
        "--pattern",
        default="x-all-plus",
        choices=[
            "z-all-plus",
            "x-all-plus",
            "x-plus-minus",
            "x-alternating",
            "x-alternating-plus",
        ],
        help="Outcome on B1 and B2 (default: %(default)s)",
    )
    p.add_argument("--alphas", default="1", help="Comma-separated Renyi indices")
    p.add_argument("--a1", type=int, default=2, help="|A1| (default: %(default)s)")
    p.add_argument("--a2", type=int, default=2, help="|A2| (default: %(default)s)")
    p.add_argument(
        "--dmin", type=int, help="Smallest separation (default: 1, or 2 for alternating B1)"
    )
    p.add_argument("--dmax", type=int, help="Largest separation (default: L - |A1| - |A2|)")
    p.add_argument(
        "--dstep", type=int, help="Separation step (default: 1, or 2 for alternating B1)"
    )
    p.add_argument("--path", default="auto", choices=["auto", "m_form", "m"])

    p = add("fit", "Fit decay exponents to scan CSV files", [common])
    p.add_argument("--input", nargs="+", help="Scan CSV file(s)")
    p.add_argument("--alpha", type=float, default=1.0, help="Renyi index to fit")
    p.add_argument("--window", help="Separation window lo:hi (default: 4:L/8)")
    p.add_argument(
        "--form", choices=["power", "exponential"], default="power", help="Decay model"
    )

    p = add("validate", "Run the invariant suite", [_common_arguments(seed=False)])
    p.add_argument("--suite", help="Suite YAML (default: packaged suite)")
    p.add_argument("--trials", type=int, help="Override trials per check")
    p.add_argument(
        "--seed",
        dest="seeds",
        type=int,
        action="append",
        help="Suite seed (repeatable; default 0)",
    )
    return parser


def main(argv=None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(normalize_argv(argv))

    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = RunConfig.from_args(args)
        return run(config)
    except KeyboardInterrupt:
        log.info("\nInterrupted by user")
        return 130
    except PauliGaussianError as e:
        log.error(str(e))
        return e.exit_code
    except Exception as e:
        log.exception(f"Fatal error: {e}")
        return INTERNAL_ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
