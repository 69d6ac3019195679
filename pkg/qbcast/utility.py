"""
This module provides the shared plumbing used by every part of qbcast.

It includes functionality for:
- Loading environment variables and JSON config files.
- Resolving the output directory and worker count.
- Parsing comma-separated parameter lists from the command line.
- Formatting floats deterministically and writing CSV/JSON result files.
- Mapping exceptions to user-friendly messages and CLI exit codes.

Constants:
    - `DEFAULT_PRECISION`: Significant digits printed for every float.
    - `OUTPUT_DIR_ENV`, `WORKERS_ENV`: Environment variables read for defaults.
    - `MAX_RECEIVERS`: Largest receiver count for which all 2^m - 1 subset constraints are enumerated.
    - `EXIT_OK`, `EXIT_INVALID_PARAMETERS`, `EXIT_INVALID_INPUT`, `EXIT_VERIFICATION_FAILED`: CLI exit codes.

Functions:
    - `load_env_vars(env_file_path)`: Loads environment variables from a specified file.
    - `get_output_dir(output_dir, env)`: Resolves the output directory from arguments or the environment.
    - `get_workers(workers, env)`: Resolves the worker pool size.
    - `load_config(path)`: Reads a JSON config file mirroring the CLI flags.
    - `parse_float_list(value)`: Converts '0.2,0.3' (or a JSON list) to a tuple of floats.
    - `format_float(x, precision)`: Fixed significant-digit formatting, never shortest round-trip.
    - `rounded(x, precision)`: The float a formatted number reads back as; inf becomes the string 'inf'.
    - `write_csv(path, header, rows, precision)`, `write_json(path, payload, precision)`: Deterministic writers.
    - `handle_error_msg(exc)`: Maps an exception to an error dictionary.
    - `exit_code_for(exc)`: Maps an exception to a CLI exit code.

Usage:
    from qbcast.utility import get_output_dir, write_csv

    out = get_output_dir(None, ".env")
    write_csv(f"{out}/rows.csv", ["m", "rate"], [[1, 0.152003093]])
"""

import os, csv, json, math, logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 9
OUTPUT_DIR_ENV = "QBCAST_OUTPUT_DIR"
WORKERS_ENV = "QBCAST_WORKERS"
MAX_RECEIVERS = 20

EXIT_OK = 0
EXIT_INVALID_PARAMETERS = 2
EXIT_INVALID_INPUT = 3
EXIT_VERIFICATION_FAILED = 4


class ParameterError(ValueError):
    """A physical or numeric parameter is outside its allowed range."""


class RegionSizeError(ParameterError):
    """Too many receivers to enumerate every subset constraint."""


class CascadeError(ParameterError):
    """A beam-splitter cascade cannot be built for the requested output ordering."""


class InsufficientCutoffError(ParameterError):
    """The Fock-space cutoff leaves more tail mass than allowed."""


class UnphysicalStateError(ValueError):
    """A covariance matrix violates the uncertainty principle."""


class InputFileError(ValueError):
    """An input or config file is missing or malformed."""


class NonUnitaryError(InputFileError):
    """A linear-optical network matrix is not unitary."""


class VerificationError(RuntimeError):
    """At least one verification check exceeded its tolerance."""


@dataclass
class RunConfig:
    """
    | Argument   | Type  | Default | Description                                              |
    |------------|-------|---------|----------------------------------------------------------|
    | command    | str   | N/A     | One of 'region', 'symmetric', 'qkd', 'decompose', 'verify'. |
    | params     | dict  | {}      | Command-specific parameters after config merging.        |
    | output_dir | str   | "."     | Directory receiving the result files.                     |
    | fmt        | str   | "csv"   | Output format, 'csv' or 'json'.                           |
    | precision  | int   | 9       | Significant digits printed for floats.                    |
    | workers    | int   | 1       | Worker pool size for parameter sweeps.                    |
    """
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = "."
    fmt: str = "csv"
    precision: int = DEFAULT_PRECISION
    workers: int = 1

    def __post_init__(self):
        if self.fmt not in ("csv", "json"):
            raise ParameterError(f"Unsupported output format: {self.fmt}")
        if self.precision < 1:
            raise ParameterError(f"Precision must be positive, got {self.precision}")
        if self.workers < 1:
            raise ParameterError(f"Worker count must be positive, got {self.workers}")


def load_env_vars(env_file_path: str):
    """
    Loads environment variables from a specified file.

    Args:
        env_file_path (str): Path to the environment file.

    Raises:
        InputFileError: If the environment file is not found.
    """
    if not os.path.exists(env_file_path):
        raise InputFileError(f"Environment file '{env_file_path}' not found.")
    with open(env_file_path, 'r') as file:
        for line in file:
            line = line.strip()
            if not line or line.startswith('#') or '=' not in line:
                continue
            key, value = line.split('=', 1)
            os.environ[key.strip()] = value.strip().strip('"').strip("'")


def get_output_dir(output_dir: str = None, env: str = None) -> str:
    """
    Retrieves the output directory, creating it when missing.

    Args:
        output_dir (str): Explicit directory; wins over everything else.
        env (str): Optional environment file loaded before reading `QBCAST_OUTPUT_DIR`.

    Returns:
        str: The output directory.
    """
    if env:
        load_env_vars(env)
    output_dir = output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(output_dir, exist_ok=True)
    return output_dir


def get_workers(workers: int = None, env: str = None) -> int:
    if env:
        load_env_vars(env)
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got '{raw}'")
    return workers


def load_config(path: str) -> Dict[str, Any]:
    """
    Reads a JSON config file whose keys mirror the long CLI flags ('--eta-b' becomes 'eta_b').

    Raises:
        InputFileError: If the file is missing, unreadable or not a JSON object.
    """
    if not os.path.isfile(path):
        raise InputFileError(f"Config file '{path}' not found.")
    try:
        with open(path, 'r') as file:
            config = json.load(file)
    except json.JSONDecodeError as e:
        raise InputFileError(f"Config file '{path}' is not valid JSON: {e}")
    if not isinstance(config, dict):
        raise InputFileError(f"Config file '{path}' must hold a JSON object.")
    return {key.replace('-', '_'): value for key, value in config.items()}


def parse_float_list(value: Union[str, Iterable[float], float, None]) -> Tuple[float, ...]:
    """
    Normalizes a list parameter.

    Args:
        value: '0.2,0.3', [0.2, 0.3] or a single number.

    Returns:
        tuple: The floats, in the given order.

    Raises:
        ParameterError: If an entry is not a finite number.
    """
    if value is None:
        return ()
    if isinstance(value, (int, float)):
        items = [value]
    elif isinstance(value, str):
        items = [item for item in value.replace(' ', '').split(',') if item]
    else:
        items = list(value)
    try:
        floats = tuple(float(item) for item in items)
    except (TypeError, ValueError):
        raise ParameterError(f"Expected a comma-separated list of numbers, got '{value}'")
    if not all(math.isfinite(x) for x in floats):
        raise ParameterError(f"List entries must be finite, got '{value}'")
    return floats


def format_float(x: float, precision: int = DEFAULT_PRECISION) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0.0"
    return np.format_float_positional(float(x), precision=precision, unique=False, fractional=False, trim='0')


def rounded(x: Any, precision: int = DEFAULT_PRECISION) -> Any:
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return format_float(x)
        return float(format_float(x, precision))
    if isinstance(x, dict):
        return {str(key): rounded(value, precision) for key, value in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [rounded(value, precision) for value in x]
    return x


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], precision: int = DEFAULT_PRECISION) -> str:
    """
    Writes rows with fixed float formatting so identical inputs give byte-identical files.

    Returns:
        str: The path written.
    """
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(cell, precision) if isinstance(cell, (float, int, np.floating, np.integer)) and not isinstance(cell, bool) else cell for cell in row])
    logger.debug("wrote %s", path)
    return path


def write_json(path: str, payload: Dict[str, Any], precision: int = DEFAULT_PRECISION) -> str:
    with open(path, 'w') as file:
        json.dump(rounded(payload, precision), file, indent=2)
        file.write('\n')
    logger.debug("wrote %s", path)
    return path


def handle_error_msg(exc: BaseException) -> dict:
    """
    Maps an exception to its error code, short message and explanation.

    Args:
        exc (BaseException): The exception raised by a qbcast operation.

    Returns:
        dict: {'errorCode': int, 'message': str, 'explanation': str}
    """
    messages = [
        (VerificationError, 'Verification Failed'),
        (NonUnitaryError, 'Non-Unitary Network'),
        (InputFileError, 'Invalid Input File'),
        (UnphysicalStateError, 'Unphysical State'),
        (RegionSizeError, 'Region Too Large'),
        (CascadeError, 'Invalid Cascade Ordering'),
        (InsufficientCutoffError, 'Insufficient Cutoff'),
        (ParameterError, 'Invalid Parameters'),
    ]
    message = next((text for kind, text in messages if isinstance(exc, kind)), 'Unknown error')
    return {'errorCode': exit_code_for(exc), 'message': message, 'explanation': str(exc) or 'Something went wrong.'}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, VerificationError):
        return EXIT_VERIFICATION_FAILED
    if isinstance(exc, InputFileError):
        return EXIT_INVALID_INPUT
    if isinstance(exc, (ParameterError, UnphysicalStateError)):
        return EXIT_INVALID_PARAMETERS
    return 1


def as_labels(count: int, prefix: str = "B") -> List[str]:
    return [f"{prefix}{i + 1}" for i in range(count)]
