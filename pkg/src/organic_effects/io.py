"""CSV datasets, JSON specs/output, and equal-width binning.

CSV layout: a mandatory header naming columns ``a``, ``c1..ck``,
``l1..lp``, ``m``, ``y`` in any order; UTF-8, ``.`` decimal separator, no
quoting.  Floats are written with ``repr`` so they read back exactly.
"""

from __future__ import annotations

import csv
import json
import math
import re

import numpy as np

from .errors import MalformedHeader, ParseError, ValidationError
from .model import Dataset, validate_dataset
from .scm import ScmSpec

_INDEXED = re.compile(r"([cl])([1-9][0-9]*)")


def parse_header(header) -> tuple:
    """Map a header row to ``(positions, k, p)``; positions keyed by column name."""
    header = [h.strip() for h in header]
    seen = {}
    for pos, name in enumerate(header):
        if name in seen:
            raise MalformedHeader(f"duplicated column {name!r}")
        if name not in ("a", "m", "y") and not _INDEXED.fullmatch(name):
            raise MalformedHeader(f"unknown column {name!r}")
        seen[name] = pos
    for name in ("a", "m", "y"):
        if name not in seen:
            raise MalformedHeader(f"missing column {name!r}")
    dims = {}
    for prefix in "cl":
        idx = sorted(int(n[1:]) for n in seen if n[0] == prefix and n not in ("a", "m", "y"))
        if idx != list(range(1, len(idx) + 1)):
            missing = sorted(set(range(1, max(idx) + 1)) - set(idx))
            raise MalformedHeader(f"missing column {prefix}{missing[0]}")
        dims[prefix] = len(idx)
    return seen, dims["c"], dims["l"]


def _parse_float(text, row, column):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column}: cannot parse {text!r} as a real",
                         row, column) from None


def read_csv(path, require_both_arms: bool = False) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader("empty file: header row required") from None
        pos, k, p = parse_header(header)
        names = ["a"] + [f"c{i + 1}" for i in range(k)] + [f"l{j + 1}" for j in range(p)] + ["m", "y"]
        order = [pos[name] for name in names]
        a, vals = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"row {row_no}: expected {len(header)} fields, got {len(row)}",
                                 row_no)
            raw_a = row[pos["a"]].strip()
            try:
                a.append(int(raw_a))
            except ValueError:
                raise ParseError(f"row {row_no}, column a: cannot parse {raw_a!r} as an integer",
                                 row_no, "a") from None
            vals.append([_parse_float(row[i].strip(), row_no, name)
                         for name, i in zip(names[1:], order[1:])])
    n = len(a)
    vals = np.array(vals, dtype=np.float64).reshape(n, k + p + 2)
    dataset = Dataset(a=np.array(a, dtype=np.int64), c=vals[:, :k], l=vals[:, k:k + p],
                      m=vals[:, k + p], y=vals[:, k + p + 1])
    report = validate_dataset(dataset, require_both_arms=require_both_arms)
    if not report.ok:
        first = report.violations[0]
        extra = f" (+{len(report.violations) - 1} more)" if len(report.violations) > 1 else ""
        raise ValidationError(f"{first}{extra}", report.violations)
    return dataset


def write_csv(dataset: Dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(dataset.column_names()) + "\n")
        block = np.hstack([dataset.c, dataset.l, dataset.m[:, None], dataset.y[:, None]])
        for a, row in zip(dataset.a.tolist(), block.tolist()):
            fh.write(",".join([str(int(a))] + [repr(v) for v in row]) + "\n")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(key))}: {_encode(v, indent, level + 1)}"
                 for key, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and non-finite values as null."""
    return _encode(obj, indent, 0) + "\n"


def load_spec(path) -> ScmSpec:
    with open(path, encoding="utf-8") as fh:
        return ScmSpec.from_dict(json.load(fh))


def save_spec(spec: ScmSpec, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(spec.to_dict()))


def bin_column(values, bins: int) -> np.ndarray:
    """Equal-width binning over the observed range; values become bin midpoints."""
    if bins < 2:
        raise ValueError("bin count must be >= 2")
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return values.copy()
    width = (hi - lo) / bins
    idx = np.clip(np.floor((values - lo) / width).astype(np.int64), 0, bins - 1)
    return lo + (idx + 0.5) * width


def bin_dataset(dataset: Dataset, bins: dict) -> Dataset:
    """Apply :func:`bin_column` to the named columns (``c1``, ``l2``, ``m``, ...)."""
    c, l, m = dataset.c.copy(), dataset.l.copy(), dataset.m.copy()
    for name, count in bins.items():
        if name == "m":
            m = bin_column(m, count)
        elif _INDEXED.fullmatch(name) and int(name[1:]) <= (dataset.k if name[0] == "c" else dataset.p):
            block = c if name[0] == "c" else l
            block[:, int(name[1:]) - 1] = bin_column(block[:, int(name[1:]) - 1], count)
        else:
            raise ValueError(f"cannot bin column {name!r}")
    return dataset.replace(c=c, l=l, m=m)


def parse_bins(specs, dataset: Dataset) -> dict:
    """Parse ``--bins`` values: ``"4"`` bins every c, l and m column; ``"m=3,l1=2"`` names columns."""
    out = {}
    for spec in specs:
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" in part:
                name, count = part.split("=", 1)
                out[name.strip()] = int(count)
            else:
                count = int(part)
                for name in dataset.column_names():
                    if name not in ("a", "y"):
                        out[name] = count
    for name, count in out.items():
        if count < 2:
            raise ValueError(f"bin count for {name} must be >= 2, got {count}")
    return out
