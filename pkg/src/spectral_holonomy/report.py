"""CSV and JSON output, written atomically."""

import csv
import hashlib
import io
import json
import os
import tempfile

import numpy as np


def fmt(v):
    """17 significant digits: round-trips any 64-bit float."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows, int_cols=()):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(int(v)) if k in int_cols else fmt(v) for k, v in enumerate(row)])
    return buf.getvalue()


def write_csv(path, header, rows, int_cols=()):
    atomic_write(path, csv_text(header, rows, int_cols))
    return path


def write_json(path, doc):
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)


def digest(doc):
    """sha256 of the canonical JSON form of ``doc``."""
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(text.encode()).hexdigest()


TRACE_HEADER_TAIL = ("re_lambda", "im_lambda")


def trace_rows(trace, params):
    """Header and rows of the loci export; eigenvalue columns follow the continued sheets."""
    n = trace.n
    header = ["sample_index", "t"] + list(params)
    for k in range(1, n + 1):
        header += [f"re_lambda_{k}", f"im_lambda_{k}"]
    rows = []
    for i, (t, x, s) in enumerate(zip(trace.path.ts, trace.path.samples, trace.sheets)):
        row = [i, t] + list(x)
        for v in s:
            row += [v.real, v.imag]
        rows.append(row)
    return header, rows


def write_trace(path, trace, params):
    header, rows = trace_rows(trace, params)
    return write_csv(path, header, rows, int_cols=(0,))


def write_field(path, field):
    return write_csv(path, ["axis1", "axis2", "re_disc", "im_disc", "abs_disc"], field.rows())


def write_propagation(path, rec):
    n = rec.states.shape[1]
    header = ["x"]
    for k in range(1, n + 1):
        header += [f"re_E{k}", f"im_E{k}"]
    return write_csv(path, header, rec.rows())
