"""Reading and writing instances.

Two encodings are supported.

JSON (``version`` 1)::

    {"version": 1, "name": "demo", "n_products": 2, "n_orders": 1,
     "n_racks": 1, "n_pickers": 1, "capacity": [1],
     "orders": [{"lines": [{"product": 0, "qty": 1}]}],
     "racks": [{"stock": [{"product": 0, "qty": 3}, {"product": 1, "qty": 2}]}]}

Whitespace text::

    # N O R P
    2 1 1 1
    1                 # capacities, one per picker
    1 0 1             # order 0: <k> then k pairs <product> <qty>
    2 0 3 1 2         # rack 0: same sparse layout

``#`` starts a comment and blank lines are ignored. The text reader also
accepts ``product:qty`` tokens without the leading count.
"""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import BinaryIO

import numpy as np

from rmfs_alloc.errors import InvariantError, ParseError
from rmfs_alloc.instance.data import Instance, build_instance

FORMAT_VERSION = 1


def load_instance(
    source: BinaryIO | bytes | str,
    format: str = "json",
    *,
    name: str | None = None,
    drop_unsatisfiable: bool = False,
) -> Instance:
    """Parse an instance from a byte stream (or raw bytes/str)."""
    if isinstance(source, (bytes, str)):
        raw = source
    else:
        raw = source.read()
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    if format == "json":
        demand, stock, capacity, meta = _parse_json(text)
    elif format == "text":
        demand, stock, capacity, meta = _parse_text(text)
    else:
        raise ParseError(f"unknown instance format {format!r}")
    return build_instance(
        demand,
        stock,
        capacity,
        name=name or meta.get("name", "instance"),
        seed=meta.get("seed"),
        drop_unsatisfiable=drop_unsatisfiable,
    )


def read_instance(path: str | Path, *, drop_unsatisfiable: bool = False) -> Instance:
    """Load from a file, picking the format by suffix (``.json`` or text)."""
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "text"
    with path.open("rb") as fh:
        return load_instance(fh, fmt, name=path.stem, drop_unsatisfiable=drop_unsatisfiable)


def _sparse_into(target: np.ndarray, col: int, pairs, n_products: int, what: str) -> None:
    for product, qty in pairs:
        if not 0 <= product < n_products:
            raise ParseError(f"{what}: product {product} out of range 0..{n_products - 1}")
        if qty < 0:
            raise InvariantError(f"{what}: negative quantity {qty} for product {product}",
                                 {"product": product})
        target[product, col] += qty


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ParseError(f"{what}: expected an integer, got {value!r}")
    return int(value)


def _parse_json(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("instance JSON must be an object")
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported instance version {version}")
    try:
        n = _as_int(doc["n_products"], "n_products")
        n_orders = _as_int(doc["n_orders"], "n_orders")
        n_racks = _as_int(doc["n_racks"], "n_racks")
        n_pickers = _as_int(doc["n_pickers"], "n_pickers")
        capacity = [_as_int(c, "capacity") for c in doc["capacity"]]
        orders = doc["orders"]
        racks = doc["racks"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}") from exc
    except TypeError as exc:
        raise ParseError(f"malformed instance: {exc}") from exc
    if min(n, n_orders, n_racks, n_pickers) < 1:
        raise ParseError("all counts must be positive")
    if len(capacity) != n_pickers or len(orders) != n_orders or len(racks) != n_racks:
        raise ParseError("list lengths disagree with declared counts")
    demand = np.zeros((n, n_orders), dtype=np.int64)
    stock = np.zeros((n, n_racks), dtype=np.int64)
    try:
        for o, order in enumerate(orders):
            pairs = [(_as_int(l["product"], "product"), _as_int(l["qty"], "qty")) for l in order["lines"]]
            _sparse_into(demand, o, pairs, n, f"order {o}")
        for r, rack in enumerate(racks):
            pairs = [(_as_int(l["product"], "product"), _as_int(l["qty"], "qty")) for l in rack["stock"]]
            _sparse_into(stock, r, pairs, n, f"rack {r}")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed order/rack entry: {exc}") from exc
    meta = {k: doc[k] for k in ("name", "seed") if k in doc}
    return demand, stock, capacity, meta


def _text_pairs(tokens: list[str], what: str) -> list[tuple[int, int]]:
    try:
        if tokens and all(":" in t for t in tokens):
            return [tuple(int(x) for x in t.split(":", 1)) for t in tokens]
        k = int(tokens[0])
        vals = [int(t) for t in tokens[1:]]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{what}: cannot parse {' '.join(tokens)!r}") from exc
    if len(vals) != 2 * k:
        raise ParseError(f"{what}: declared {k} pairs but found {len(vals) / 2:g}")
    return list(zip(vals[0::2], vals[1::2]))


def _parse_text(text: str):
    lines = []
    for raw in text.splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append(body.split())
    if len(lines) < 2:
        raise ParseError("text instance needs a header and a capacity line")
    try:
        n, n_orders, n_racks, n_pickers = (int(t) for t in lines[0])
        capacity = [int(t) for t in lines[1]]
    except ValueError as exc:
        raise ParseError(f"bad header or capacity line: {exc}") from exc
    if min(n, n_orders, n_racks, n_pickers) < 1:
        raise ParseError("all counts must be positive")
    if len(capacity) != n_pickers:
        raise ParseError(f"expected {n_pickers} capacities, got {len(capacity)}")
    body = lines[2:]
    if len(body) != n_orders + n_racks:
        raise ParseError(f"expected {n_orders + n_racks} order/rack lines, got {len(body)}")
    demand = np.zeros((n, n_orders), dtype=np.int64)
    stock = np.zeros((n, n_racks), dtype=np.int64)
    for o in range(n_orders):
        _sparse_into(demand, o, _text_pairs(body[o], f"order {o}"), n, f"order {o}")
    for r in range(n_racks):
        _sparse_into(stock, r, _text_pairs(body[n_orders + r], f"rack {r}"), n, f"rack {r}")
    return demand, stock, capacity, {}


def _column_pairs(mat: np.ndarray, col: int) -> list[tuple[int, int]]:
    rows = np.flatnonzero(mat[:, col])
    return [(int(i), int(mat[i, col])) for i in rows]


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "name": inst.name,
        "n_products": inst.n_products,
        "n_orders": inst.n_orders,
        "n_racks": inst.n_racks,
        "n_pickers": inst.n_pickers,
        "capacity": [int(c) for c in inst.capacity],
        "orders": [
            {"lines": [{"product": i, "qty": q} for i, q in _column_pairs(inst.demand, o)]}
            for o in range(inst.n_orders)
        ],
        "racks": [
            {"stock": [{"product": i, "qty": q} for i, q in _column_pairs(inst.stock, r)]}
            for r in range(inst.n_racks)
        ],
    }
    if inst.seed is not None:
        doc["seed"] = inst.seed
    return doc


def dump_instance(inst: Instance, format: str = "json") -> str:
    """Serialise in internal (capacity-sorted) picker order."""
    if format == "json":
        return json.dumps(instance_to_dict(inst), indent=1, sort_keys=False) + "\n"
    if format != "text":
        raise ParseError(f"unknown instance format {format!r}")
    out = io.StringIO()
    out.write(f"{inst.n_products} {inst.n_orders} {inst.n_racks} {inst.n_pickers}\n")
    out.write(" ".join(str(int(c)) for c in inst.capacity) + "\n")
    for mat, count in ((inst.demand, inst.n_orders), (inst.stock, inst.n_racks)):
        for col in range(count):
            pairs = _column_pairs(mat, col)
            out.write(" ".join([str(len(pairs))] + [f"{i} {q}" for i, q in pairs]) + "\n")
    return out.getvalue()
