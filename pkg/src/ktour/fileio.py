"""Plain-text instance files and JSON solution files.

Instance format::

    KTC 1
    # comments anywhere
    N 3
    K 2
    DEPOT 0 0        (optional, defaults to 0 0)
    1.5 2
    ...
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Instance, KtourError, Solution


class ParseError(KtourError, ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        where += f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def _num(x: float) -> str:
    return format(float(x), ".17g")


def format_instance(instance: Instance, comment: str | None = None) -> str:
    lines = ["KTC 1"]
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [f"N {instance.n}", f"K {instance.k}",
              f"DEPOT {_num(instance.origin.x)} {_num(instance.origin.y)}"]
    lines += [f"{_num(x)} {_num(y)}" for x, y in instance.points.tolist()]
    return "\n".join(lines) + "\n"


def parse_instance(text: str, path=None) -> Instance:
    header = None
    n = k = None
    depot = (0.0, 0.0)
    pts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if header is None:
            if fields != ["KTC", "1"]:
                raise ParseError("expected header 'KTC 1'", lineno, path)
            header = lineno
            continue
        tag = fields[0].upper()
        try:
            if tag == "N" and not pts:
                n = int(fields[1])
                if n < 0 or len(fields) != 2:
                    raise ValueError
            elif tag == "K" and not pts:
                k = int(fields[1])
                if k < 1 or len(fields) != 2:
                    raise ValueError
            elif tag == "DEPOT" and not pts:
                if len(fields) != 3:
                    raise ValueError
                depot = (float(fields[1]), float(fields[2]))
            else:
                if len(fields) != 2:
                    raise ValueError
                xy = (float(fields[0]), float(fields[1]))
                if not all(np.isfinite(xy)):
                    raise ValueError
                pts.append(xy)
        except (ValueError, IndexError):
            raise ParseError(f"malformed line {raw.strip()!r}", lineno, path) from None
    if header is None:
        raise ParseError("empty file, expected header 'KTC 1'", None, path)
    if n is None or k is None:
        raise ParseError("missing 'N' or 'K' line", None, path)
    if len(pts) != n:
        raise ParseError(f"N says {n} points but {len(pts)} coordinate lines follow", None, path)
    return Instance(depot, np.array(pts, dtype=float).reshape(-1, 2), k)


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(), path)


def write_instance(instance: Instance, path, comment: str | None = None) -> None:
    Path(path).write_text(format_instance(instance, comment))


def _plain(obj):
    """Convert numpy scalars and tuples into JSON-friendly builtins."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def format_solution(solution: Solution, meta: dict | None = None) -> str:
    doc = {
        "cost": float(solution.cost),
        "tours": [[int(p) for p in t] for t in solution.tours],
        "meta": _plain(meta if meta is not None else solution.meta),
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def parse_solution(text: str, path=None) -> Solution:
    try:
        doc = json.loads(text)
        tours = tuple(tuple(int(p) for p in t) for t in doc["tours"])
        return Solution(tours, float(doc["cost"]), dict(doc.get("meta", {})))
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed solution file: {exc}", None, path) from None


def read_solution(path) -> Solution:
    return parse_solution(Path(path).read_text(), path)


def write_solution(solution: Solution, path, meta: dict | None = None) -> None:
    Path(path).write_text(format_solution(solution, meta))
