import json

import numpy as np
import pytest

from spectral_holonomy.config import (
    ConfigError,
    LocateMismatch,
    family_from,
    load_config,
    plane_spec_from,
    resolve_geometry,
    tracking_from,
)
from spectral_holonomy.holonomy import measure
from spectral_holonomy.paths import Circle, Concat, Polyline, Reverse, discretize

FIG9 = {
    "family": "waveguide_T",
    "plane": {"axes": ["re_z", "im_z"], "fixed": {"c": -0.9}},
    "locate": {"window": [[-0.01, 0.01], [-0.01, 0.01]], "resolution": [101, 101], "expect": ["ep2", "ep3"]},
    "anchors": {"base": {"midpoint": ["ep3", "ep2"], "normal_offset": 0.5}},
    "loops": {
        "gamma1": {"circle": {"center": "ep2", "through": "base"}},
        "gamma2": {"circle": {"center": "ep3", "through": "base"}},
        "fig8": {"concat": ["gamma2", {"reverse": "gamma1"}]},
    },
}


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": ')
    with pytest.raises(ConfigError, match="line 1"):
        load_config(str(bad))
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        load_config(str(bad))


def test_family_and_plane_errors():
    with pytest.raises(ConfigError):
        family_from({})
    fam = family_from({"family": "waveguide_T"})
    with pytest.raises(ConfigError, match="scan"):
        plane_spec_from(fam, {"axes": ["re_z", "w"], "fixed": {"c": 0}, "window": [[0, 1], [0, 1]]}, "scan")
    with pytest.raises(ConfigError, match="window"):
        plane_spec_from(fam, {"axes": ["re_z", "im_z"], "fixed": {"c": 0}, "window": [0, 1]}, "scan")


def test_tracking_defaults():
    opts, samples = tracking_from({})
    assert opts.max_depth == 24 and samples == 64
    opts, samples = tracking_from({"tracking": {"max_depth": 10, "min_samples": 128}})
    assert opts.max_depth == 10 and samples == 128


def test_geometry_matches_fixture(fig9):
    geo = resolve_geometry(fig9.family, FIG9)
    assert np.allclose(geo.points["ep2"], fig9.ep2)
    assert np.allclose(geo.points["base"], fig9.base_uv)
    g1 = geo.spec("gamma1")
    assert isinstance(g1, Circle) and np.isclose(g1.radius, fig9.gamma1.radius)
    fig8 = geo.spec("fig8")
    assert isinstance(fig8, Concat) and isinstance(fig8.parts[1], Reverse)
    assert str(measure(fig9.family, discretize(fig8, 64))) == "(12)"


def test_geometry_references():
    doc = {
        "family": "waveguide_T",
        "plane": {"axes": ["re_z", "im_z"], "fixed": {"c": 1.0}},
        "anchors": {"a": [0.1, 0.2], "b": {"from": "a", "offset": [0.5, 0]}, "c": {"point": {"re_z": 1, "im_z": 1, "c": 1}}},
        "loops": {
            "tri": {"polyline": ["a", "b", [0.3, 0.9], "a"]},
            "self": {"concat": ["self"]},
            "wide": {"circle": {"center": [0, 0], "radius": 0.4, "orientation": "cw"}},
            "other_plane": {"circle": {"center": [0, 1], "radius": 0.2,
                                       "plane": {"axes": ["im_z", "c"], "fixed": {"re_z": 0.0}}}},
        },
    }
    fam = family_from(doc)
    geo = resolve_geometry(fam, doc)
    assert np.allclose(geo.points["b"], [0.6, 0.2])
    assert np.allclose(geo.points["c"], [1, 1])
    tri = geo.spec("tri")
    assert isinstance(tri, Polyline) and np.allclose(tri.points[1], [0.6, 0.2, 1.0])
    assert geo.spec("wide").orientation == "cw"
    assert np.allclose(geo.spec("other_plane").start, [0.0, 0.2, 1.0])
    with pytest.raises(ConfigError, match="itself"):
        geo.spec("self")
    with pytest.raises(ConfigError, match="unknown loop"):
        geo.spec("nope")
    with pytest.raises(ConfigError, match="unknown anchor"):
        geo.spec({"circle": {"center": "zzz", "radius": 1}})
    with pytest.raises(ConfigError, match="exactly one"):
        geo.spec({"circle": {}, "polyline": []})
    with pytest.raises(ConfigError, match="radius"):
        geo.spec({"circle": {"center": [0, 0], "radius": -1}})


def test_locate_count_mismatch():
    doc = json.loads(json.dumps(FIG9))
    doc["locate"]["expect"] = ["only_one"]
    fam = family_from(doc)
    with pytest.raises(LocateMismatch):
        resolve_geometry(fam, doc)
