import numpy as np
import pytest

from hyperpipe.archive import MAGIC, load_model, model_predict, read_manifest, save_model
from hyperpipe.errors import ArchiveError, NotFittedError
from hyperpipe.pipeline import Callback, Element, Pipeline, Switch

from conftest import gaussian_mixture


def fitted_pipeline(seed=0):
    data = gaussian_mixture(n=80, seed=seed)
    x = data.x.copy()
    x[::7, 1] = np.nan  # exercise the imputer
    pipe = Pipeline(
        [
            Element("StandardScaler"),
            Element("SimpleImputer"),
            Element("RandomForestClassifier", n_estimators=6, max_depth=5, seed=3,
                    name="forest"),
        ]
    )
    pipe.fit(x, data.y)
    return pipe


def test_round_trip_bit_identical(tmp_path):
    pipe = fitted_pipeline()
    path = tmp_path / "model.photon"
    save_model(pipe, path)
    loaded = load_model(path)
    probe = np.random.default_rng(5).normal(size=(200, 5))
    original = pipe.predict(probe)
    restored = model_predict(loaded, probe)
    assert np.array_equal(original, restored)
    assert original.tobytes() == restored.tobytes()


def test_archive_is_single_file_with_magic(tmp_path):
    path = save_model(fitted_pipeline(), tmp_path / "m.photon")
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    manifest = read_manifest(path)
    assert manifest["schema_version"] == 1
    assert manifest["n_features"] == 5
    assert [n["keyword"] for n in manifest["structure"]] == [
        "StandardScaler", "SimpleImputer", "RandomForestClassifier",
    ]


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "bogus.photon"
    path.write_bytes(b"NOTPHOTN" + b"\x00" * 64)
    with pytest.raises(ArchiveError, match="not a model archive"):
        load_model(path)


def test_truncated_payload_rejected(tmp_path):
    path = save_model(fitted_pipeline(), tmp_path / "m.photon")
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 40])
    with pytest.raises(ArchiveError, match="truncated"):
        load_model(path)


def test_future_schema_version_rejected(tmp_path):
    path = save_model(fitted_pipeline(), tmp_path / "m.photon")
    raw = bytearray(path.read_bytes())
    manifest_len = int.from_bytes(raw[8:12], "little")
    manifest = raw[12 : 12 + manifest_len].decode("utf-8")
    bumped = manifest.replace('"schema_version":1', '"schema_version":9').encode("utf-8")
    assert len(bumped) == manifest_len  # same digit count keeps lengths aligned
    path.write_bytes(bytes(raw[:12]) + bumped + bytes(raw[12 + manifest_len :]))
    with pytest.raises(ArchiveError, match="schema version 9"):
        load_model(path)


def test_unfitted_pipeline_cannot_be_saved(tmp_path):
    pipe = Pipeline([Element("DummyClassifier")])
    with pytest.raises(NotFittedError):
        save_model(pipe, tmp_path / "m.photon")


def test_switch_archive_round_trip(tmp_path):
    data = gaussian_mixture(n=70, seed=9)
    pipe = Pipeline(
        [
            Element("StandardScaler"),
            Switch("est", [
                Element("DummyClassifier", name="d"),
                Element("KNeighborsClassifier", n_neighbors=3, name="knn"),
            ]),
        ]
    )
    pipe.apply_config({"est__current_element": 1})
    pipe.fit(data.x, data.y)
    loaded = load_model(save_model(pipe, tmp_path / "m.photon"))
    probe = np.random.default_rng(1).normal(size=(30, 5))
    assert np.array_equal(pipe.predict(probe), loaded.predict(probe))
    # the inactive child stayed unfitted through the round trip
    assert not loaded.node_by_name("d").element.fitted_


def test_resampler_and_custom_callback_round_trip(tmp_path):
    data = gaussian_mixture(n=70, seed=10)

    pipe = Pipeline(
        [
            Element("ImbalancedDataTransformer", method_name="RandomOverSampler",
                    seed=2, name="balance"),
            Callback("watch", lambda x, y, e: None),
            Element("DecisionTreeClassifier", max_depth=4, name="tree"),
        ]
    )
    pipe.fit(data.x, data.y)
    loaded = load_model(save_model(pipe, tmp_path / "m.photon"))
    probe = np.random.default_rng(2).normal(size=(25, 5))
    assert np.array_equal(pipe.predict(probe), loaded.predict(probe))
    # custom delegates cannot be serialized; the loaded callback is a no-op
    assert loaded.node_by_name("watch").delegate_name in ("<custom>", "_noop_callback")


def test_disabled_node_round_trip(tmp_path):
    data = gaussian_mixture(n=60, seed=11)
    pipe = Pipeline(
        [
            Element("PCA", test_disabled=True),
            Element("KNeighborsClassifier", n_neighbors=3, name="knn"),
        ]
    )
    pipe.apply_config({"PCA__disabled": True})
    pipe.fit(data.x, data.y)
    loaded = load_model(save_model(pipe, tmp_path / "m.photon"))
    probe = np.random.default_rng(3).normal(size=(20, 5))
    assert np.array_equal(pipe.predict(probe), loaded.predict(probe))
