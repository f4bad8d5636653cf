# noisygt/serializer.py
"""ASCII file formats.

GTM1 matrix:   'GTM1 <M> <N>' then M lines '<k> <i1> ... <ik>' (sorted column indices of the row).
GTV1 support:  'GTV1 <N>' then one line of sorted indices (empty for the empty support).
Observation:   one line of '0'/'1' characters.
Every line ends with a newline; no trailing spaces.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Union

from .errors import DimensionMismatchError, FormatError
from .gtcore import BitMatrix, BitVec, SupportSet

logger = logging.getLogger("noisygt")

PathLike = Union[str, Path]

SWEEP_COLUMNS = ("trial", "e0_applied", "e1_applied", "decoded_weight", "false_pos", "false_neg", "success")


def _int_tokens(line: str, what: str) -> List[int]:
    try:
        return [int(token) for token in line.split()]
    except ValueError as e:
        raise FormatError(f"{what}: expected integers, got {line!r}") from e


def _content_lines(text: str, what: str) -> List[str]:
    if not text:
        raise FormatError(f"{what}: file is empty")
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def format_matrix(A: BitMatrix) -> str:
    lines = [f"GTM1 {A.rows} {A.cols}"]
    lines += [" ".join(str(v) for v in (len(row), *row)) for row in A.row_supports]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    lines = _content_lines(text, "GTM1")
    header = lines[0].split()
    if len(header) != 3 or header[0] != "GTM1":
        raise FormatError(f"GTM1: bad header {lines[0]!r}")
    rows, cols = _int_tokens(" ".join(header[1:]), "GTM1 header")
    if rows < 0 or cols < 0:
        raise FormatError(f"GTM1: negative dimensions {rows}x{cols}")
    if len(lines) - 1 != rows:
        raise FormatError(f"GTM1: header announces {rows} rows, found {len(lines) - 1}")
    supports = []
    for r, line in enumerate(lines[1:]):
        values = _int_tokens(line, f"GTM1 row {r}")
        if not values or values[0] != len(values) - 1:
            raise FormatError(f"GTM1 row {r}: count does not match the number of indices")
        supports.append(tuple(values[1:]))
    try:
        return BitMatrix(rows, cols, tuple(supports))
    except (DimensionMismatchError, ValueError) as e:
        raise FormatError(f"GTM1: {e}") from e


def format_support(x: SupportSet) -> str:
    return f"GTV1 {x.universe}\n{' '.join(str(i) for i in x.indices)}\n"


def parse_support(text: str) -> SupportSet:
    lines = _content_lines(text, "GTV1")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "GTV1":
        raise FormatError(f"GTV1: bad header {lines[0]!r}")
    (universe,) = _int_tokens(header[1], "GTV1 header")
    if len(lines) > 2:
        raise FormatError(f"GTV1: expected at most 2 lines, found {len(lines)}")
    indices = _int_tokens(lines[1], "GTV1 indices") if len(lines) == 2 else []
    try:
        return SupportSet(universe, tuple(indices))
    except (DimensionMismatchError, ValueError) as e:
        raise FormatError(f"GTV1: {e}") from e


def format_observation(y: BitVec) -> str:
    return y.to_string() + "\n"


def parse_observation(text: str, expected_length: Optional[int] = None) -> BitVec:
    lines = _content_lines(text, "Observation")
    if len(lines) != 1:
        raise FormatError(f"Observation: expected a single line, found {len(lines)}")
    y = BitVec.from_string(lines[0])
    if expected_length is not None and len(y) != expected_length:
        raise DimensionMismatchError(f"Observation has length {len(y)}, expected {expected_length}")
    return y


def _read(path: PathLike, what: str) -> str:
    path = Path(path)
    logger.debug(f"Reading {what} from {path}")
    if not path.exists():
        logger.error(f"{what} file not found: {path}")
        raise FileNotFoundError(f"{what} file not found: {path}")
    return path.read_text(encoding="ascii")


def _write(path: PathLike, text: str, what: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write(text)
        logger.info(f"Wrote {what} to {path}")
    except OSError as e:
        logger.error(f"Failed to write {what} to {path}: {e}", exc_info=True)
        raise


def read_matrix(path: PathLike) -> BitMatrix:
    A = parse_matrix(_read(path, "matrix"))
    logger.debug(f"Loaded {A!r}")
    return A


def write_matrix(A: BitMatrix, path: PathLike) -> None:
    _write(path, format_matrix(A), f"{A.rows}x{A.cols} matrix")


def read_support(path: PathLike) -> SupportSet:
    return parse_support(_read(path, "support"))


def write_support(x: SupportSet, path: PathLike) -> None:
    _write(path, format_support(x), f"support of weight {x.weight}")


def read_observation(path: PathLike, expected_length: Optional[int] = None) -> BitVec:
    return parse_observation(_read(path, "observation"), expected_length)


def write_observation(y: BitVec, path: PathLike) -> None:
    _write(path, format_observation(y), f"observation of length {len(y)}")


def write_sweep_csv(rows: Iterable[Mapping[str, Any]], path: PathLike) -> int:
    """Writes the fixed sweep columns; returns the number of data rows."""
    path = Path(path)
    count = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _csv_value(row[key]) for key in SWEEP_COLUMNS})
                count += 1
        logger.info(f"Wrote {count} sweep rows to {path}")
    except OSError as e:
        logger.error(f"Failed to write sweep CSV to {path}: {e}", exc_info=True)
        raise
    return count


def format_sweep_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(str(_csv_value(row[key])) for key in SWEEP_COLUMNS) for row in rows]
    return "\n".join(lines) + "\n"


def _csv_value(value: Any) -> Any:
    return int(value) if isinstance(value, bool) else value
