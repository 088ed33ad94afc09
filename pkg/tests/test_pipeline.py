import numpy as np
import pytest

from hyperpipe.errors import CallbackError, NotFittedError
from hyperpipe.pipeline import Branch, Callback, Element, Pipeline, Stack, Switch


def classification_data(seed=0, n=40, p=3):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    y = (x[:, 0] > 0).astype(float)
    return x, y


def test_scaler_then_dummy():
    x, y = classification_data()
    pipe = Pipeline([Element("StandardScaler"), Element("DummyClassifier")])
    pipe.fit(x, y)
    majority = 1.0 if np.sum(y == 1) > np.sum(y == 0) else 0.0
    assert np.all(pipe.predict(x) == majority)


def test_estimator_mid_pipeline_streams_predictions():
    x, y = classification_data()
    seen = {}

    def spy(sx, sy, extras):
        seen["shape"] = sx.shape

    pipe = Pipeline(
        [
            Element("KNeighborsClassifier", n_neighbors=1, name="knn"),
            Callback("spy", spy),
            Element("DummyClassifier", name="final"),
        ]
    )
    pipe.fit(x, y)
    assert seen["shape"] == (len(y), 1)  # knn predictions became a single column
    assert pipe.predict(x).shape == (len(y),)


def test_stack_of_two_estimators_gives_two_columns():
    x, y = classification_data()
    seen = {}

    def spy(sx, sy, extras):
        seen["shape"] = sx.shape

    pipe = Pipeline(
        [
            Stack("pair", [
                Element("KNeighborsClassifier", n_neighbors=1, name="a"),
                Element("DummyClassifier", name="b"),
            ]),
            Callback("spy", spy),
            Element("DecisionTreeClassifier", name="final"),
        ]
    )
    pipe.fit(x, y)
    assert seen["shape"] == (len(y), 2)


def test_stack_probability_columns():
    x, y = classification_data()
    seen = {}

    def spy(sx, sy, extras):
        seen["shape"] = sx.shape

    pipe = Pipeline(
        [
            Stack(
                "pair",
                [
                    Element("KNeighborsClassifier", n_neighbors=3, name="a"),
                    Element("LinearSVC", name="b", seed=0),  # no predict_proba
                ],
                use_probabilities=True,
            ),
            Callback("spy", spy),
            Element("DummyClassifier", name="final"),
        ]
    )
    pipe.fit(x, y)
    assert seen["shape"] == (len(y), 3)  # 2 proba columns + 1 hard prediction


def test_stack_transformer_child_contributes_transformed_columns():
    x, y = classification_data(p=4)
    seen = {}

    def spy(sx, sy, extras):
        seen["shape"] = sx.shape

    pipe = Pipeline(
        [
            Stack("mix", [
                Element("PCA", n_components=2, name="pca"),
                Element("DummyClassifier", name="d"),
            ]),
            Callback("spy", spy),
            Element("KNeighborsClassifier", n_neighbors=1, name="final"),
        ]
    )
    pipe.fit(x, y)
    assert seen["shape"] == (len(y), 3)


def test_resampler_is_fit_only():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 2))
    y = np.array([0.0] * 24 + [1.0] * 6)
    pipe = Pipeline(
        [
            Element("ImbalancedDataTransformer", method_name="RandomOverSampler",
                    seed=4, name="balance"),
            Element("DummyClassifier", name="final"),
        ]
    )
    pipe.fit(x, y)
    probe = rng.normal(size=(7, 2))
    assert pipe.predict(probe).shape == (7,)  # rows preserved at predict time


def test_resampler_realigns_extras():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(12, 2))
    y = np.array([0.0] * 9 + [1.0] * 3)
    extras = {"ids": np.arange(12, dtype=float).reshape(-1, 1)}
    seen = {}

    def spy(sx, sy, se):
        seen["x"] = sx
        seen["extras"] = se

    pipe = Pipeline(
        [
            Element("ImbalancedDataTransformer", method_name="RandomUnderSampler",
                    seed=4, name="balance"),
            Callback("spy", spy),
            Element("DummyClassifier", name="final"),
        ]
    )
    pipe.fit(x, y, extras=extras)
    assert seen["x"].shape[0] == 6
    assert seen["extras"]["ids"].shape[0] == 6
    # extras rows still match the surviving x rows
    kept = [int(v) for v in seen["extras"]["ids"].ravel()]
    for pos, row_id in enumerate(kept):
        assert np.array_equal(seen["x"][pos], x[row_id])


def test_callback_observation_and_isolation():
    x, y = classification_data()
    observed = {}

    def mutator(sx, sy, extras):
        observed["sum"] = sx.sum()
        sx[:] = 0.0  # must not leak into the pipeline

    pipe = Pipeline(
        [Element("StandardScaler"), Callback("peek", mutator), Element("DummyClassifier")]
    )
    pipe.fit(x, y)
    assert observed["sum"] == pytest.approx(0.0, abs=1e-9)  # scaled data sums to ~0
    # downstream unaffected by delegate mutation: refit equivalence
    ref = Pipeline([Element("StandardScaler"), Element("DummyClassifier")]).fit(x, y)
    assert np.array_equal(pipe.predict(x), ref.predict(x))


def test_callback_error_names_node():
    x, y = classification_data()

    def boom(sx, sy, extras):
        raise RuntimeError("inspect failed")

    pipe = Pipeline([Callback("watcher", boom), Element("DummyClassifier")])
    with pytest.raises(CallbackError, match="watcher"):
        pipe.fit(x, y)


def test_callback_cannot_be_final():
    pipe = Pipeline([Element("DummyClassifier"), Callback("tail", lambda *a: None)])
    with pytest.raises(ValueError, match="cannot predict"):
        pipe.fit(*classification_data())


def test_transformer_cannot_be_final():
    pipe = Pipeline([Element("StandardScaler")])
    with pytest.raises(ValueError, match="cannot predict"):
        pipe.fit(*classification_data())


def test_switch_with_one_child_equals_child():
    x, y = classification_data(seed=5)
    probe = np.random.default_rng(6).normal(size=(15, 3))
    switched = Pipeline(
        [Switch("pick", [Element("KNeighborsClassifier", n_neighbors=3, name="knn")])]
    ).fit(x, y)
    plain = Pipeline([Element("KNeighborsClassifier", n_neighbors=3, name="knn2")]).fit(x, y)
    assert np.array_equal(switched.predict(probe), plain.predict(probe))


def test_switch_routing():
    x, y = classification_data(seed=7)
    pipe = Pipeline(
        [
            Switch("pick", [
                Element("DummyClassifier", name="dumb"),
                Element("KNeighborsClassifier", n_neighbors=1, name="knn"),
            ])
        ]
    )
    pipe.apply_config({"pick__current_element": 1})
    pipe.fit(x, y)
    assert np.array_equal(pipe.predict(x), y)  # 1-nn memorizes training data


def test_branch_equals_inlined_nodes():
    x, y = classification_data(seed=8)
    probe = np.random.default_rng(9).normal(size=(10, 3))
    branched = Pipeline(
        [Branch("prep", [Element("StandardScaler"), Element("PCA", n_components=2)]),
         Element("KNeighborsClassifier", n_neighbors=3, name="knn")]
    ).fit(x, y)
    inlined = Pipeline(
        [Element("StandardScaler", name="s2"), Element("PCA", n_components=2, name="p2"),
         Element("KNeighborsClassifier", n_neighbors=3, name="knn2")]
    ).fit(x, y)
    assert np.array_equal(branched.predict(probe), inlined.predict(probe))


def test_disabled_equals_removed():
    x, y = classification_data(seed=10)
    probe = np.random.default_rng(11).normal(size=(10, 3))
    pipe = Pipeline(
        [Element("PCA", n_components=2, test_disabled=True),
         Element("KNeighborsClassifier", n_neighbors=3, name="knn")]
    )
    pipe.apply_config({"PCA__disabled": True})
    pipe.fit(x, y)
    without = Pipeline([Element("KNeighborsClassifier", n_neighbors=3, name="knn2")]).fit(x, y)
    assert np.array_equal(pipe.predict(probe), without.predict(probe))


def test_apply_config_updates_and_errors():
    pipe = Pipeline([Element("PCA"), Element("DummyClassifier")])
    pipe.apply_config({"PCA__n_components": 0.6})
    assert pipe.node_by_name("PCA").element.get_params()["n_components"] == 0.6
    with pytest.raises(ValueError, match="unknown node"):
        pipe.apply_config({"Nope__x": 1})
    with pytest.raises(ValueError, match="invalid child index"):
        Pipeline([Switch("s", [Element("DummyClassifier")])]).apply_config(
            {"s__current_element": 2}
        )
    with pytest.raises(ValueError):
        pipe.apply_config({"PCA__n_components": -1})


def test_fit_reads_training_partition_only():
    # learned statistics are a function of the fitted rows; a poisoned held-out
    # partition never changes them
    x, y = classification_data(seed=12)
    train = slice(0, 30)
    pipe = Pipeline([Element("StandardScaler"), Element("DummyClassifier")])
    pipe.fit(x[train], y[train])
    scaler = pipe.node_by_name("StandardScaler").element
    poasoned_mean = scaler.mean_.copy()
    x_poison = x.copy()
    x_poison[30:] = 1e9
    pipe2 = Pipeline([Element("StandardScaler"), Element("DummyClassifier")])
    pipe2.fit(x_poison[train], y[train])
    assert np.array_equal(pipe2.node_by_name("StandardScaler").element.mean_, poasoned_mean)


def test_predict_before_fit_and_purity():
    x, y = classification_data(seed=13)
    pipe = Pipeline([Element("StandardScaler"), Element("DummyClassifier")])
    with pytest.raises(NotFittedError):
        pipe.predict(x)
    pipe.fit(x, y)
    assert np.array_equal(pipe.predict(x), pipe.predict(x))


def test_predict_column_mismatch():
    x, y = classification_data(seed=14)
    pipe = Pipeline([Element("StandardScaler"), Element("DummyClassifier")]).fit(x, y)
    with pytest.raises(ValueError, match="columns"):
        pipe.predict(np.ones((4, 7)))


def test_duplicate_node_names_rejected():
    with pytest.raises(ValueError, match="duplicate node name"):
        Pipeline([Element("PCA"), Element("PCA")])


def test_seed_assignment_scoped_to_params():
    pipe = Pipeline(
        [Element("RandomForestClassifier", n_estimators=2, name="forest")]
    )
    pipe.apply_config({"forest__min_samples_split": 2})
    pipe.assign_seeds(1234, ("fold", 0))
    seed_a = pipe.node_by_name("forest").element.effective_seed()
    pipe.apply_config({"forest__min_samples_split": 4})
    pipe.assign_seeds(1234, ("fold", 0))
    seed_b = pipe.node_by_name("forest").element.effective_seed()
    assert seed_a != seed_b  # params are part of the seed scope
    pipe.apply_config({"forest__min_samples_split": 2})
    pipe.assign_seeds(1234, ("fold", 0))
    assert pipe.node_by_name("forest").element.effective_seed() == seed_a


def test_disabled_stack_child_equals_removed_child():
    x, y = classification_data(seed=15)
    probe = np.random.default_rng(16).normal(size=(12, 3))
    with_disabled = Pipeline(
        [
            Stack("pair", [
                Element("KNeighborsClassifier", n_neighbors=1, name="a", test_disabled=True),
                Element("DummyClassifier", name="b"),
            ]),
            Element("DecisionTreeClassifier", name="final"),
        ]
    )
    with_disabled.apply_config({"a__disabled": True})
    with_disabled.fit(x, y)
    without = Pipeline(
        [
            Stack("pair2", [Element("DummyClassifier", name="b2")]),
            Element("DecisionTreeClassifier", name="final2"),
        ]
    ).fit(x, y)
    assert np.array_equal(with_disabled.predict(probe), without.predict(probe))


def test_stack_with_every_child_disabled_errors():
    x, y = classification_data(seed=17)
    pipe = Pipeline(
        [
            Stack("pair", [Element("PCA", name="p", test_disabled=True)]),
            Element("DummyClassifier", name="final"),
        ]
    )
    pipe.apply_config({"p__disabled": True})
    with pytest.raises(ValueError, match="every child is disabled"):
        pipe.fit(x, y)


def test_branch_inside_switch():
    x, y = classification_data(seed=18, n=60)
    probe = np.random.default_rng(19).normal(size=(9, 3))
    pipe = Pipeline(
        [
            Switch("route", [
                Branch("reduced", [
                    Element("PCA", n_components=2),
                    Element("KNeighborsClassifier", n_neighbors=3, name="knn_a"),
                ]),
                Element("KNeighborsClassifier", n_neighbors=3, name="knn_b"),
            ])
        ]
    )
    pipe.apply_config({"route__current_element": 0})
    pipe.fit(x, y)
    inline = Pipeline(
        [Element("PCA", n_components=2, name="p2"),
         Element("KNeighborsClassifier", n_neighbors=3, name="knn_c")]
    ).fit(x, y)
    assert np.array_equal(pipe.predict(probe), inline.predict(probe))
