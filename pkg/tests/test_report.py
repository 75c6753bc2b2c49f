import json
import os

import numpy as np

from spectral_holonomy import report
from spectral_holonomy.holonomy import trace
from spectral_holonomy.paths import discretize


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, -2.5e-300, 123456789.123456789, np.float64(np.pi)):
        assert float(report.fmt(v)) == float(v)
    assert report.fmt(7) == "7"
    assert report.fmt(np.int64(3)) == "3"


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "out.csv"
    report.write_csv(str(target), ["a", "b"], [[1, 0.5], [2, 1e-20]], int_cols=(0,))
    assert target.read_text() == "a,b\n1,0.5\n2,9.9999999999999995e-21\n"
    assert os.listdir(target.parent) == ["out.csv"]


def test_json_and_digest(tmp_path):
    doc = {"b": np.float64(1.5), "a": np.arange(3), "c": 1 + 2j}
    path = tmp_path / "r.json"
    report.write_json(str(path), doc)
    assert json.loads(path.read_text()) == {"a": [0, 1, 2], "b": 1.5, "c": [1.0, 2.0]}
    assert report.digest({"x": 1, "y": [1, 2]}) == report.digest({"y": [1, 2], "x": 1})
    assert report.digest({"x": 1}) != report.digest({"x": 2})


def test_trace_export_schema(fig9, tmp_path):
    tr = trace(fig9.family, discretize(fig9.gamma2, 32))
    header, rows = report.trace_rows(tr, fig9.family.params)
    assert header == ["sample_index", "t", "re_z", "im_z", "c", "re_lambda_1", "im_lambda_1",
                      "re_lambda_2", "im_lambda_2", "re_lambda_3", "im_lambda_3"]
    assert len(rows) == len(tr.path)
    path = tmp_path / "loci.csv"
    report.write_trace(str(path), tr, fig9.family.params)
    lines = path.read_text().splitlines()
    assert lines[1].startswith("0,0,")
    last = [float(v) for v in lines[-1].split(",")]
    # the final row follows the continued sheets, not the sorted spectrum
    assert np.allclose(last[5::2], tr.sheets[-1].real) and np.allclose(last[6::2], tr.sheets[-1].imag)


def test_field_export(fig9, tmp_path):
    from spectral_holonomy.cartography import scan_plane

    field = scan_plane(fig9.family, fig9.spec)
    path = tmp_path / "field.csv"
    report.write_field(str(path), field)
    lines = path.read_text().splitlines()
    assert lines[0] == "axis1,axis2,re_disc,im_disc,abs_disc"
    assert len(lines) == 1 + 101 * 101
