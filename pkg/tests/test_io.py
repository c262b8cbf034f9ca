import json

import numpy as np
import pytest

from mvicad import SimConfig, generate_dataset
from mvicad.errors import (DatasetError, ManifestError, MissingFileError,
                           NonFiniteError, SizeMismatchError)
from mvicad.io import read_dataset, read_manifest, write_dataset
from mvicad.simulation import ViewSet


@pytest.fixture
def dataset(tmp_path):
    views, gt = generate_dataset(SimConfig(m=3, p=3, n=700, tau_max_true=5,
                                           seed=1))
    write_dataset(tmp_path / "ds", views, gt, metadata={"note": "x"})
    return tmp_path / "ds", views, gt


def test_round_trip(dataset):
    path, views, gt = dataset
    v2, g2 = read_dataset(path)
    np.testing.assert_array_equal(v2.X, views.X)
    np.testing.assert_array_equal(g2.S, gt.S)
    np.testing.assert_array_equal(g2.A, gt.A)
    np.testing.assert_array_equal(g2.N, gt.N)
    np.testing.assert_array_equal(g2.tau, gt.tau)
    assert g2.tau.dtype == np.int64
    assert g2.sigma == gt.sigma
    assert read_manifest(path)["metadata"] == {"note": "x"}


def test_raw_layout(dataset):
    path, views, _ = dataset
    raw = path / "view_000.bin"
    assert raw.stat().st_size == 3 * 700 * 8
    head = np.frombuffer(raw.read_bytes()[:16], dtype="<f8")
    np.testing.assert_array_equal(head, views.X[0, 0, :2])


def test_without_ground_truth(tmp_path):
    X = np.random.default_rng(0).standard_normal((2, 2, 10))
    write_dataset(tmp_path, ViewSet(X))
    views, gt = read_dataset(tmp_path)
    assert gt is None
    np.testing.assert_array_equal(views.X, X)


def test_truncated_file(dataset):
    path, _, _ = dataset
    raw = path / "view_001.bin"
    raw.write_bytes(raw.read_bytes()[:-8])
    with pytest.raises(SizeMismatchError):
        read_dataset(path)


def test_missing_file(dataset):
    path, _, _ = dataset
    (path / "mixing_002.bin").unlink()
    with pytest.raises(MissingFileError):
        read_dataset(path)


def test_missing_manifest(tmp_path):
    with pytest.raises(MissingFileError):
        read_dataset(tmp_path)


def test_non_finite(dataset):
    path, views, _ = dataset
    X = views.X[2].copy()
    X[1, 5] = np.nan
    X.astype("<f8").tofile(path / "view_002.bin")
    with pytest.raises(NonFiniteError):
        read_dataset(path)


def _edit_manifest(path, **changes):
    mpath = path / "manifest.json"
    manifest = json.loads(mpath.read_text())
    manifest.update(changes)
    mpath.write_text(json.dumps(manifest))


@pytest.mark.parametrize("changes", [
    dict(m=0), dict(m=2), dict(p=0), dict(n=1), dict(format_version=9),
])
def test_bad_manifest(dataset, changes):
    path, _, _ = dataset
    _edit_manifest(path, **changes)
    with pytest.raises(ManifestError):
        read_dataset(path)


def test_invalid_json(dataset):
    path, _, _ = dataset
    (path / "manifest.json").write_text("{")
    with pytest.raises(DatasetError):
        read_dataset(path)
