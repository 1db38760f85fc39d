import json

import pytest

import warpimm


def test_commands():
    assert set(warpimm.commands()) >= {"nullity", "lemma", "falsify", "decompose", "oracle"}


def test_nullities_of_simple_forms():
    zero = [[[0.0] * 4 for _ in range(4)]] * 2
    assert warpimm.nullities(zero) == [4, 4]
    eye = [[[1.0 if i == j else 0.0 for j in range(3)] for i in range(3)]]
    assert warpimm.nullities(eye) == [0]


def test_gauss_tensor_antisymmetry():
    ops = [[[1.0, 0.5, 0.0], [0.5, -1.0, 0.2], [0.0, 0.2, 0.3]], [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]]]
    x, y, z, w = [1.0, 0.0, 0.2], [0.0, 1.0, 0.0], [0.3, 0.1, 1.0], [0.5, -0.4, 0.0]
    r = warpimm.gauss_tensor(ops, x, y, z, w)
    assert r == pytest.approx(-warpimm.gauss_tensor(ops, y, x, z, w), abs=1e-12)
    assert r == pytest.approx(warpimm.gauss_tensor(ops, z, w, x, y), abs=1e-12)


def test_group_warping_samples():
    base = [1.0, 1.2, 0.9, 1.5]
    rows = [base, [2.0 * v for v in base], [1.0, 0.7, 1.9, 1.1]]
    groups, lam = warpimm.group_warping_samples(rows, 1e-9)
    assert groups == [[1, 2], [3]]
    assert lam[2] == pytest.approx(2.0)


def test_run_report_and_errors(data_dir):
    inst = json.loads((data_dir / "instances" / "zero-form.json").read_text())
    report = warpimm.run("nullity", {"instance": inst})
    assert report["verdict"] == "hypothesisFails"
    assert report["results"]["values"] == [4, 4]

    bad = warpimm.run("nullity", {"instance": {"ops": [[[0.0, 1.0], [0.0, 0.0]]]}})
    assert bad["error"]["kind"] == "AsymmetryExceedsTol"

    with pytest.raises(warpimm.WarpimmError):
        warpimm.nullities([[[0.0, 1.0], [0.0, 0.0]]])


def test_run_respects_config(data_dir):
    inst = json.loads((data_dir / "instances" / "generic-7-2.json").read_text())
    report = warpimm.run("nullity", {"instance": inst}, {"starts": 4, "seed": 3})
    assert report["config"]["starts"] == 4
    assert report["config"]["seed"] == 3
