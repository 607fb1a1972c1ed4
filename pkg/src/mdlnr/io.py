"""Text formats: node-state matrices, weighted edge lists with a JSON sidecar,
and plain edge lists."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .graph_state import (Categories, DataError, Dataset, NodeFields, WeightCategories,
                          WeightedNetwork, recount)


def _split(line: str, delimiter):
    if delimiter is None:
        delimiter = "\t" if "\t" in line else ("," if "," in line else None)
    return [c.strip() for c in line.split(delimiter)] if delimiter else line.split()


def parse_data_matrix(path, alphabet: str = "auto", map01: bool = False,
                      kind: str = "iid", delimiter=None) -> Dataset:
    """Read an ``N x M`` matrix of node states (rows = nodes, columns = samples).

    A first line ``#labels`` announces a leading label column. Values must be
    in {-1, 1} or {-1, 0, 1}; with ``map01`` a {0, 1} file is read with 0
    mapped to -1. ``alphabet="auto"`` selects the zero-valued alphabet when a
    0 occurs.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    labels = None
    if lines[0].strip().lower().startswith("#labels"):
        labels = []
        lines = lines[1:]
    lines = [ln for ln in lines if not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError(f"{path}: no data rows")
    rows = []
    for r, ln in enumerate(lines):
        cells = _split(ln, delimiter)
        if labels is not None:
            labels.append(cells[0])
            cells = cells[1:]
        vals = []
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {cell!r} at row {r}, column {c}")
            if v != int(v):
                raise DataError(f"{path}: non-integer value {cell!r} at row {r}, column {c}")
            vals.append(int(v))
        rows.append(vals)
    m = len(rows[0])
    for r, vals in enumerate(rows):
        if len(vals) != m:
            raise DataError(f"{path}: ragged rows (row 0 has {m} values, row {r} has {len(vals)})")
    X = np.array(rows, dtype=np.int64).reshape(len(rows), m)
    if map01:
        bad = ~np.isin(X, (0, 1))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"{path}: value {X[r, c]} at row {r}, column {c} is not 0/1")
        X = np.where(X == 0, -1, 1)
    if alphabet == "auto":
        alphabet = "zero_valued" if (X == 0).any() else "binary"
    try:
        return Dataset(X, kind, alphabet, labels)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def write_data_matrix(path, data: Dataset):
    X = data.states
    with open(path, "w") as fh:
        if data.labels is not None:
            fh.write("#labels\n")
        for i in range(X.shape[0]):
            cells = [str(int(v)) for v in X[i]]
            if data.labels is not None:
                cells.insert(0, str(data.labels[i]))
            fh.write("\t".join(cells) + "\n")


@dataclass
class NetworkFile:
    net: WeightedNetwork
    wcats: Categories | None = None
    fields: NodeFields | None = None
    meta: dict = field(default_factory=dict)


def sidecar_path(path) -> str:
    return str(path) + ".json"


def write_network(path, net: WeightedNetwork, wcats: Categories | None = None,
                  fields: NodeFields | np.ndarray | None = None, meta: dict | None = None):
    """Edge list ``i<TAB>j<TAB>weight`` (``i < j``, 17 significant digits) plus a
    JSON sidecar with node count, categories and node fields."""
    with open(path, "w") as fh:
        for (i, j), w in sorted(net.edges()):
            fh.write(f"{i}\t{j}\t{w:.17g}\n")
    side = {"n_nodes": net.n_nodes}
    if wcats is not None:
        side["categories"] = [[v, wcats.counts[v]] for v in wcats.values]
        side["delta"] = wcats.delta
        side["lambda"] = wcats.lam
    if fields is not None:
        if isinstance(fields, NodeFields):
            side["theta"] = [float(t) for t in fields.theta]
            side["theta_categories"] = [[u, fields.cats.counts[u]] for u in fields.cats.values]
            side["delta_theta"] = fields.cats.delta
            side["lambda_theta"] = fields.cats.lam
        else:
            side["theta"] = [float(t) for t in np.asarray(fields)]
    if meta:
        side["meta"] = meta
    with open(sidecar_path(path), "w") as fh:
        json.dump(side, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_network(path, n_nodes: int | None = None) -> NetworkFile:
    """Inverse of :func:`write_network`; the sidecar is optional."""
    side = {}
    if os.path.exists(sidecar_path(path)):
        with open(sidecar_path(path)) as fh:
            side = json.load(fh)
    entries = {}
    with open(path) as fh:
        for ln_no, ln in enumerate(fh, 1):
            if not ln.strip() or ln.lstrip().startswith("#"):
                continue
            cells = ln.split()
            if len(cells) != 3:
                raise DataError(f"{path}:{ln_no}: expected 'i j weight', got {ln.strip()!r}")
            try:
                i, j, w = int(cells[0]), int(cells[1]), float(cells[2])
            except ValueError:
                raise DataError(f"{path}:{ln_no}: malformed line {ln.strip()!r}") from None
            if i == j:
                raise DataError(f"{path}:{ln_no}: self-loop ({i}, {i})")
            if i < 0 or j < 0:
                raise DataError(f"{path}:{ln_no}: negative node index")
            key = (min(i, j), max(i, j))
            if key in entries:
                raise DataError(f"{path}:{ln_no}: duplicate pair {key}")
            if w == 0:
                raise DataError(f"{path}:{ln_no}: zero weight listed as an edge")
            entries[key] = w
    n = n_nodes or side.get("n_nodes") or (1 + max((max(k) for k in entries), default=-1))
    net = WeightedNetwork(n, entries)
    wcats = None
    if "categories" in side:
        wcats = WeightCategories(side.get("delta", 1e-8), side.get("lambda", 1.0))
        for v, c in side["categories"]:
            wcats.values.append(float(v))
            wcats.counts[float(v)] = int(c)
        wcats.values.sort()
        if recount(net) != wcats.counts:
            raise DataError(f"{path}: sidecar categories disagree with the edge list")
    fields = None
    if "theta" in side and (n_nodes is None or len(side["theta"]) == n):
        theta = np.array(side["theta"], dtype=float)
        if len(theta) != n:
            raise DataError(f"{path}: sidecar theta has {len(theta)} entries, expected {n}")
        fields = NodeFields.__new__(NodeFields)
        fields.theta = theta
        fields.cats = Categories(side.get("delta_theta", 1e-8), side.get("lambda_theta", 1.0),
                                 allow_zero=True)
        for t in theta:
            t = float(t)
            if t not in fields.cats:
                fields.cats.values.append(t)
                fields.cats.counts[t] = 0
            fields.cats.counts[t] += 1
        fields.cats.values.sort()
    return NetworkFile(net, wcats, fields, side.get("meta", {}))


def read_edge_list(path) -> tuple[int, list]:
    """Plain ``i j`` edge list (extra columns ignored); returns ``(N, edges)``."""
    edges = []
    seen = set()
    with open(path) as fh:
        for ln_no, ln in enumerate(fh, 1):
            if not ln.strip() or ln.lstrip().startswith("#"):
                continue
            cells = ln.replace(",", " ").split()
            try:
                i, j = int(cells[0]), int(cells[1])
            except (ValueError, IndexError):
                raise DataError(f"{path}:{ln_no}: malformed edge {ln.strip()!r}") from None
            if i == j:
                raise DataError(f"{path}:{ln_no}: self-loop ({i}, {i})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DataError(f"{path}:{ln_no}: duplicate pair {key}")
            seen.add(key)
            edges.append(key)
    n = 1 + max((max(e) for e in edges), default=-1)
    return n, edges
