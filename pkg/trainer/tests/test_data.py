import json

import numpy as np
import pytest

from trainer_demo import PairedDataset, load_twin_pairs, two_cluster_dataset
from trainer_demo.data import dataset_from_twin_file


def scene(a=5, b=6, skipped=None):
    return {
        "camera_moving": False,
        "eligible": [a, b],
        "twins": {str(a): {"twin": b, "mi_nats": 0.9}, str(b): {"twin": a, "mi_nats": 0.9}},
        "skipped_reason": skipped,
    }


def doc(n=4):
    return {"policy": "mi", "scenes": {f"clip-{i}": scene() for i in range(n)}}


def pairs(n=4):
    out = {}
    for i in range(n):
        vid = f"clip-{i}"
        out[(vid, 5)] = (vid, 6)
        out[(vid, 6)] = (vid, 5)
    return out


# --------------------------------------------------------- load_twin_pairs

def test_load_maps_each_item_to_its_twin():
    loaded = load_twin_pairs(json.dumps(doc(2)))
    assert loaded == pairs(2)


def test_load_accepts_bytes():
    raw = json.dumps(doc(1)).encode("utf-8")
    assert load_twin_pairs(raw) == pairs(1)


def test_skipped_scene_contributes_nothing():
    d = doc(3)
    d["scenes"]["clip-1"] = scene(skipped="fewer than 2 eligible patches")
    loaded = load_twin_pairs(json.dumps(d))
    assert ("clip-1", 5) not in loaded
    assert ("clip-0", 5) in loaded and ("clip-2", 6) in loaded


def test_asymmetric_map_is_kept_verbatim():
    d = doc(1)
    # mi_nats is optional on intake; only the twin link matters
    d["scenes"]["clip-0"]["twins"]["7"] = {"twin": 5}
    loaded = load_twin_pairs(json.dumps(d))
    assert loaded[("clip-0", 7)] == ("clip-0", 5)
    assert loaded[("clip-0", 5)] == ("clip-0", 6)


def test_invalid_json_rejected():
    with pytest.raises(ValueError, match="invalid JSON"):
        load_twin_pairs("{not json")


@pytest.mark.parametrize("payload", [[1, 2, 3], {"policy": "mi"}])
def test_document_without_scenes_rejected(payload):
    with pytest.raises(ValueError, match="missing 'scenes'"):
        load_twin_pairs(json.dumps(payload))


def test_scene_missing_twins_rejected():
    d = doc(1)
    del d["scenes"]["clip-0"]["twins"]
    with pytest.raises(ValueError, match="scene 'clip-0' missing 'twins'"):
        load_twin_pairs(json.dumps(d))


def test_twin_entry_missing_target_rejected():
    d = doc(1)
    d["scenes"]["clip-0"]["twins"]["5"] = {"mi_nats": 1.0}
    with pytest.raises(ValueError, match="missing 'twin'"):
        load_twin_pairs(json.dumps(d))


def test_all_scenes_skipped_rejected():
    d = doc(2)
    for vid in d["scenes"]:
        d["scenes"][vid]["skipped_reason"] = "degenerate entropies"
    with pytest.raises(ValueError, match="no usable twin entries"):
        load_twin_pairs(json.dumps(d))


# ----------------------------------------------------- two_cluster_dataset

def test_dataset_shapes_and_sorted_keys():
    ds = two_cluster_dataset(pairs(4), dim=6)
    assert ds.n_items == 8
    assert ds.dim == 6
    assert ds.vectors.shape == (8, 6)
    assert ds.keys == tuple(sorted(pairs(4)))


def test_twin_rows_resolve_partner_keys():
    ds = two_cluster_dataset(pairs(5))
    mapping = pairs(5)
    for row, key in enumerate(ds.keys):
        assert ds.keys[ds.twin_rows[row]] == mapping[key]


def test_scenes_alternate_between_clusters():
    ds = two_cluster_dataset(pairs(4))
    by_scene = {}
    for row, (vid, _) in enumerate(ds.keys):
        by_scene.setdefault(vid, set()).add(int(ds.cluster[row]))
    # twins share a scene, so they share a cluster
    assert all(len(labels) == 1 for labels in by_scene.values())
    assert [next(iter(by_scene[f"clip-{i}"])) for i in range(4)] == [0, 1, 0, 1]


def test_cluster_centers_reflect_separation():
    ds = two_cluster_dataset(pairs(40), separation=6.0, spread=0.5, seed=0)
    lo = ds.vectors[ds.cluster == 0].mean(axis=0)
    hi = ds.vectors[ds.cluster == 1].mean(axis=0)
    assert abs((hi - lo)[0] - 6.0) < 0.5
    assert np.all(np.abs((hi - lo)[1:]) < 0.5)


def test_same_seed_reproduces_vectors():
    a = two_cluster_dataset(pairs(3), seed=9)
    b = two_cluster_dataset(pairs(3), seed=9)
    c = two_cluster_dataset(pairs(3), seed=10)
    assert np.array_equal(a.vectors, b.vectors)
    assert not np.array_equal(a.vectors, c.vectors)


def test_unresolvable_twin_key_rejected():
    bad = pairs(1)
    bad[("clip-0", 5)] = ("clip-0", 9)
    with pytest.raises(ValueError, match="unresolvable twin key clip-0:9"):
        two_cluster_dataset(bad)


@pytest.mark.parametrize("kwargs", [
    {"dim": 0},
    {"separation": 0.0},
    {"spread": -1.0},
])
def test_dataset_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        two_cluster_dataset(pairs(2), **kwargs)


def test_dataset_arrays_are_frozen():
    ds = two_cluster_dataset(pairs(2))
    with pytest.raises(ValueError):
        ds.vectors[0, 0] = 99.0
    with pytest.raises(ValueError):
        ds.twin_rows[0] = 0


def test_inconsistent_dataset_rejected():
    ds = two_cluster_dataset(pairs(2))
    with pytest.raises(ValueError, match="inconsistent dataset"):
        PairedDataset(keys=ds.keys, vectors=ds.vectors[:-1],
                      twin_rows=ds.twin_rows, cluster=ds.cluster)


def test_file_wrapper_matches_manual_path():
    text = json.dumps(doc(3))
    via_file = dataset_from_twin_file(text, dim=5, seed=2)
    manual = two_cluster_dataset(load_twin_pairs(text), dim=5, seed=2)
    assert via_file.keys == manual.keys
    assert np.array_equal(via_file.vectors, manual.vectors)
    assert np.array_equal(via_file.twin_rows, manual.twin_rows)
    assert np.array_equal(via_file.cluster, manual.cluster)
