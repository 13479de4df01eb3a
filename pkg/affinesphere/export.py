import contextlib
import csv
import json
import logging
import os
import pathlib
import typing

import numpy as np

from .const import NAME, VERSION
from .geometry.errors import ConfigError

__all__ = ["format_number", "output_lock", "plain", "write_csv", "write_json"]

logger = logging.getLogger(__name__)


def format_number(value: typing.Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value) + 0.0:.17g}"
    return str(value)


def plain(value: typing.Any) -> typing.Any:
    """Convert numpy containers and scalars into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # adding 0.0 turns -0.0 into 0.0
        v = float(value) + 0.0
        return v if np.isfinite(v) else None
    return value


@contextlib.contextmanager
def output_lock(*paths: pathlib.Path | str | None) -> typing.Iterator[None]:
    """Hold `<path>.lock` for every output path during a run."""
    held: list[pathlib.Path] = []
    try:
        for path in paths:
            if path is None:
                continue
            lock = pathlib.Path(f"{path}.lock")
            try:
                fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                raise ConfigError(f"output {path} is locked by another run") from None
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            held.append(lock)
        yield
    finally:
        for lock in held:
            lock.unlink(missing_ok=True)


def write_csv(
    path: pathlib.Path | str,
    header: typing.Sequence[str],
    rows: typing.Iterable[typing.Sequence[typing.Any]],
) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
            count += 1
    logger.debug("wrote %d rows to %s", count, path)
    return count


def write_json(
    path: pathlib.Path | str,
    payload: dict[str, typing.Any],
    *,
    config: dict[str, typing.Any],
) -> None:
    document = {"tool": NAME, "version": VERSION, "config": plain(config), **plain(payload)}
    text = json.dumps(document, indent=2, sort_keys=True, allow_nan=False)
    pathlib.Path(path).write_text(text + "\n", encoding="utf-8")
    logger.debug("wrote report %s", path)
