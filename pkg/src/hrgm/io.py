"""Plain-text file formats: matrices, graphs, observation CSVs and JSON reports.

Matrix files hold whitespace-separated rows with ``?`` for unspecified
entries, ``#`` comments and an optional ``dim d`` header. Graph files hold one
1-based ``i j`` pair per line (duplicates ignored), optionally preceded by a
``names:`` line; edges may then use the names instead of numbers. Floats are
written with ``repr`` so that write-then-read is exact.
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .exceptions import ParseError
from .graph import UndirectedGraph

SCHEMA_VERSION = 1
MISSING = {"", "NA", "NaN", "nan", "N/A"}

log = logging.getLogger(__name__)


def _lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _fmt(x):
    return "?" if np.isnan(x) else repr(float(x))


def parse_matrix(path):
    """Square matrix with NaN where the file has ``?``."""
    dim = None
    rows = []
    for lineno, line in _lines(path):
        tokens = line.split()
        if tokens[0] == "dim" and dim is None and not rows:
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(f"{path}:{lineno}: malformed header {line!r}")
            dim = int(tokens[1])
            continue
        try:
            rows.append([np.nan if t == "?" else float(t) for t in tokens])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no matrix rows")
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ParseError(f"{path}: matrix is not square")
    if dim is not None and dim != d:
        raise ParseError(f"{path}: header says dim {dim} but found {d} rows")
    return np.array(rows)


def write_matrix(path, matrix, header=True):
    m = np.asarray(matrix, dtype=float)
    lines = [f"dim {m.shape[0]}"] if header else []
    lines += [" ".join(_fmt(x) for x in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_graph(path, d=None):
    """Undirected graph from an edge-list file; returns ``(graph, names)``.

    ``d`` defaults to the number of names or, failing that, the largest label.
    """
    names = None
    edges = []
    for lineno, line in _lines(path):
        if line.startswith("names:"):
            if names is not None or edges:
                raise ParseError(f"{path}:{lineno}: names header must come first")
            names = line[len("names:"):].split()
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        pair = []
        for t in tokens:
            if names is not None and t in names:
                pair.append(names.index(t))
            elif t.isdigit() and int(t) >= 1:
                pair.append(int(t) - 1)
            else:
                raise ParseError(f"{path}:{lineno}: bad node label {t!r}")
        if pair[0] == pair[1]:
            raise ParseError(f"{path}:{lineno}: self-loop")
        edges.append(tuple(pair))
    if d is None:
        d = len(names) if names else (max(max(e) for e in edges) + 1 if edges else 0)
    if d < 1:
        raise ParseError(f"{path}: cannot infer the number of nodes")
    if names is not None and len(names) != d:
        raise ParseError(f"{path}: {len(names)} names for {d} nodes")
    try:
        return UndirectedGraph.from_edges(d, edges), names
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_graph(path, graph, names=None):
    lines = [] if names is None else ["names: " + " ".join(names)]
    lines += [f"{i + 1} {j + 1}" for i, j in sorted(graph.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Observations with a header row; rows with missing values are dropped.

    Returns ``(values, names, n_dropped)``.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            names = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not names:
        raise ParseError(f"{path}: missing header row")
    names = [n.strip() for n in names]
    kept, dropped = [], 0
    for lineno, row in enumerate(rows, 2):
        if not row:
            continue
        if len(row) != len(names):
            raise ParseError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
        cells = [c.strip() for c in row]
        if any(c in MISSING for c in cells):
            dropped += 1
            continue
        try:
            kept.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if dropped:
        log.info("dropped %d rows with missing values from %s", dropped, path)
    values = np.array(kept, dtype=float).reshape(len(kept), len(names))
    return values, names, dropped


def write_csv(path, values, names=None):
    v = np.asarray(values, dtype=float)
    names = names or [f"X{j + 1}" for j in range(v.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in v:
            w.writerow([repr(float(x)) for x in row])


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return None if np.isnan(obj) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def write_json(path, report):
    payload = {"schema_version": SCHEMA_VERSION, **_jsonable(report)}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
