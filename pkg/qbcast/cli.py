"""
Command-line front end.

    qbcast [global options] region --eta 0.2,0.3 [--n-s 1,10] [--resolution R]
    qbcast [global options] symmetric --eta 0.1 --m-max 32
    qbcast [global options] qkd --eta-b 0.3 --eta-c 0.3 --mu 1,5,20 [--resolution R] [--clamp]
    qbcast [global options] decompose --network net.json
    qbcast [global options] verify [--quick]

Values come from the flag, then `--config`, then the environment, then the
built-in default. Results go to files; stdout gets a one-line JSON summary
and errors go to stderr with exit code 2 (parameters), 3 (input file) or
4 (verification).
"""

import sys
import json
import logging
import argparse

from .main import Qbcast
from .utility import (
    DEFAULT_PRECISION, EXIT_OK, InputFileError, ParameterError, RunConfig, UnphysicalStateError,
    VerificationError, exit_code_for, get_output_dir, get_workers, handle_error_msg, load_config, load_env_vars,
)

logger = logging.getLogger(__name__)

COMMAND_DEFAULTS = {
    'region': {'eta': None, 'n_s': None, 'resolution': 1},
    'symmetric': {'eta': None, 'm_max': None},
    'qkd': {'eta_b': None, 'eta_c': None, 'mu': None, 'resolution': 1, 'clamp': False},
    'decompose': {'network': None},
    'verify': {'quick': False},
}
REQUIRED = {
    'region': ['eta'],
    'symmetric': ['eta', 'm_max'],
    'qkd': ['eta_b', 'eta_c', 'mu'],
    'decompose': ['network'],
    'verify': [],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbcast", description="Capacity regions and broadcast CVQKD key rates of pure-loss bosonic broadcast channels")
    parser.add_argument("--config", type=str, help="JSON file whose keys mirror the long flags")
    parser.add_argument("--env", type=str, help="KEY=VALUE file loaded into the environment first")
    parser.add_argument("--output-dir", type=str, help="Directory for result files (default: $QBCAST_OUTPUT_DIR or .)")
    parser.add_argument("--format", choices=["csv", "json"], help="Result file format (default: csv)")
    parser.add_argument("--precision", type=int, help=f"Significant digits for floats (default: {DEFAULT_PRECISION})")
    parser.add_argument("--workers", type=int, help="Worker pool size for sweeps (default: $QBCAST_WORKERS or 1)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", metavar="command")

    region = sub.add_parser("region", help="Capacity-region constraints and two-receiver boundaries")
    region.add_argument("--eta", type=str, help="Receiver transmittances, e.g. 0.2,0.3")
    region.add_argument("--n-s", dest="n_s", type=str, help="Mean photon numbers for finite-energy boundaries")
    region.add_argument("--resolution", type=int, help="Points per boundary edge (default: 1)")

    symmetric = sub.add_parser("symmetric", help="Rate sums of the symmetric 1-to-m channel")
    symmetric.add_argument("--eta", type=float, help="Total transmittance")
    symmetric.add_argument("--m-max", dest="m_max", type=int, help="Largest receiver count")

    qkd = sub.add_parser("qkd", help="Broadcast CVQKD key-rate regions")
    qkd.add_argument("--eta-b", dest="eta_b", type=float, help="Transmittance to Bob")
    qkd.add_argument("--eta-c", dest="eta_c", type=float, help="Transmittance to Charlie")
    qkd.add_argument("--mu", type=str, help="Modulation mean photon numbers, e.g. 1,5,20")
    qkd.add_argument("--resolution", type=int, help="Points per curve edge (default: 1)")
    qkd.add_argument("--clamp", action="store_true", default=None, help="Report max(0, K) instead of raw key rates")

    decompose = sub.add_parser("decompose", help="Reduce a linear-optical network to its beam-splitter cascade")
    decompose.add_argument("--network", type=str, help="Network JSON file")

    verify = sub.add_parser("verify", help="Run the numerical cross-check suite")
    verify.add_argument("--quick", action="store_true", default=None, help="Run the fast subset")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Merges flags, the config file and the environment into a RunConfig.

    Raises:
        ParameterError: If a required parameter is missing.
        InputFileError: If the config or env file cannot be read.
    """
    if args.env:
        load_env_vars(args.env)
    config = load_config(args.config) if args.config else {}

    def pick(name, default=None):
        value = getattr(args, name, None)
        return value if value is not None else config.get(name, default)

    params = {name: pick(name, default) for name, default in COMMAND_DEFAULTS[args.command].items()}
    missing = [name for name in REQUIRED[args.command] if params[name] is None]
    if missing:
        raise ParameterError(f"'{args.command}' needs {', '.join('--' + name.replace('_', '-') for name in missing)}")
    try:
        precision = int(pick('precision', DEFAULT_PRECISION))
        workers = int(get_workers(pick('workers')))
    except (TypeError, ValueError):
        raise ParameterError("precision and workers must be integers")
    return RunConfig(
        command=args.command,
        params=params,
        output_dir=get_output_dir(pick('output_dir')),
        fmt=pick('format', 'csv'),
        precision=precision,
        workers=workers,
    )


def run(config: RunConfig) -> dict:
    client = Qbcast(output_dir=config.output_dir, fmt=config.fmt, precision=config.precision, workers=config.workers)
    p = config.params
    if config.command == "region":
        return client.region(p['eta'], p['n_s'], int(p['resolution']))
    if config.command == "symmetric":
        return client.symmetric(float(p['eta']), int(p['m_max']))
    if config.command == "qkd":
        return client.qkd(float(p['eta_b']), float(p['eta_c']), p['mu'], int(p['resolution']), bool(p['clamp']))
    if config.command == "decompose":
        return client.decompose(p['network'])
    return client.verify(quick=bool(p['quick']))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level={0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if not args.command:
        parser.print_help()
        return EXIT_OK
    try:
        result = run(resolve_config(args))
    except (ParameterError, UnphysicalStateError, InputFileError, VerificationError) as e:
        print(json.dumps(handle_error_msg(e)), file=sys.stderr)
        return exit_code_for(e)
    print(json.dumps({'command': args.command, 'files': result.get('files', [])}))
    return EXIT_OK


def function():
    sys.exit(main())
