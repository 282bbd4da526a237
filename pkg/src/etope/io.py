"""JSON set-exchange format.

An ellipsotope on disk is an object with keys "p" (number or "inf"),
"center" (array of n numbers), "generators" (n rows of m numbers), optional
"constraints" ({"A": k rows, "b": k numbers}), and "index_set" (array of
arrays of 0-based generator indices). A missing index_set means one block
over all generators; missing constraints mean k = 0.

Serialization is canonical — sorted keys, 17-significant-digit floats, no
whitespace — so write(read(write(E))) is byte-stable.
"""

import json
import math

import numpy as np

from .core import INF, Ellipsotope, IndexSet, check_invariants


class SchemaError(ValueError):
    """Schema violation carrying a JSON-pointer-style path."""

    def __init__(self, path, message):
        self.path = path or "/"
        super().__init__(f"{self.path}: {message}")


# ---------------------------------------------------------------------------
# canonical writing


def canonical_dumps(obj):
    """Canonical JSON text: sorted keys, floats at 17 significant digits."""
    parts = []
    _dump(obj, parts)
    return "".join(parts)


def _dump(obj, parts):
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            raise ValueError("non-finite float cannot be serialized")
        parts.append(format(x, ".17g"))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(key)))
            parts.append(":")
            _dump(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, item in enumerate(seq):
            if i:
                parts.append(",")
            _dump(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# ellipsotope <-> dict


def etope_to_dict(E):
    d = {
        "p": "inf" if E.p == INF else float(E.p),
        "center": [float(v) for v in E.c],
        "generators": [[float(v) for v in row] for row in E.G],
        "index_set": [list(blk) for blk in E.I],
    }
    if E.num_constraints:
        d["constraints"] = {
            "A": [[float(v) for v in row] for row in E.A],
            "b": [float(v) for v in E.b],
        }
    return d


def _number_list(obj, path):
    if not isinstance(obj, list):
        raise SchemaError(path, f"expected an array, got {type(obj).__name__}")
    out = []
    for i, v in enumerate(obj):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{path}/{i}", "expected a number")
        out.append(float(v))
    return out


def _matrix(obj, path, width=None):
    if not isinstance(obj, list):
        raise SchemaError(path, f"expected an array of rows, got {type(obj).__name__}")
    rows = []
    for i, row in enumerate(obj):
        r = _number_list(row, f"{path}/{i}")
        if width is None:
            width = len(r)
        elif len(r) != width:
            raise SchemaError(f"{path}/{i}", f"expected {width} entries, got {len(r)}")
        rows.append(r)
    return rows, width


def etope_from_dict(d, path=""):
    """Parse the exchange dict into an Ellipsotope, with pointer-tagged errors."""
    if not isinstance(d, dict):
        raise SchemaError(path, f"expected an object, got {type(d).__name__}")
    for key in ("p", "center", "generators"):
        if key not in d:
            raise SchemaError(path, f"missing required key {key!r}")
    unknown = set(d) - {"p", "center", "generators", "constraints", "index_set"}
    if unknown:
        raise SchemaError(path, f"unknown keys {sorted(unknown)}")

    p_raw = d["p"]
    if p_raw == "inf":
        p = INF
    elif isinstance(p_raw, bool) or not isinstance(p_raw, (int, float)):
        raise SchemaError(f"{path}/p", 'expected a number or "inf"')
    else:
        p = float(p_raw)

    c = _number_list(d["center"], f"{path}/center")
    n = len(c)
    G_rows, m = _matrix(d["generators"], f"{path}/generators")
    if len(G_rows) != n:
        raise SchemaError(
            f"{path}/generators", f"expected {n} rows to match the center, got {len(G_rows)}"
        )
    if m is None:
        m = 0
    G = np.array(G_rows, dtype=float).reshape(n, m)

    A = np.zeros((0, m))
    b = np.zeros(0)
    if "constraints" in d:
        cons = d["constraints"]
        if not isinstance(cons, dict):
            raise SchemaError(f"{path}/constraints", "expected an object with A and b")
        for key in ("A", "b"):
            if key not in cons:
                raise SchemaError(f"{path}/constraints", f"missing key {key!r}")
        A_rows, width = _matrix(cons["A"], f"{path}/constraints/A", width=m)
        b = np.array(_number_list(cons["b"], f"{path}/constraints/b"))
        A = np.array(A_rows, dtype=float).reshape(len(A_rows), m)

    if "index_set" in d:
        raw = d["index_set"]
        if not isinstance(raw, list):
            raise SchemaError(f"{path}/index_set", "expected an array of arrays")
        blocks = []
        for i, blk in enumerate(raw):
            if not isinstance(blk, list):
                raise SchemaError(f"{path}/index_set/{i}", "expected an array of indices")
            entries = []
            for j, v in enumerate(blk):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise SchemaError(f"{path}/index_set/{i}/{j}", "expected an integer index")
                entries.append(v)
            blocks.append(tuple(entries))
        I = IndexSet(tuple(blocks))
    else:
        I = IndexSet.single(m)

    problems = check_invariants(p, c, G, A, b, I)
    if problems:
        raise SchemaError(path, "; ".join(problems))
    return Ellipsotope(p, np.array(c), G, A, b, I)


# ---------------------------------------------------------------------------
# file I/O


def read_set(path):
    """Read an ellipsotope from a JSON file (SchemaError on bad content)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as err:
        raise SchemaError("", f"not valid JSON: {err}") from err
    return etope_from_dict(data)


def write_set(E, path):
    """Write an ellipsotope to a JSON file in canonical form."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(etope_to_dict(E)))
        fh.write("\n")
    return path
