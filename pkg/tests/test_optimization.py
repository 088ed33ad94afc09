import numpy as np
import pytest

from hyperpipe.optimization import (
    Boolean,
    Categorical,
    FloatRange,
    GridSearch,
    IntegerRange,
    MinimumPerformanceConstraint,
    RandomGridSearch,
    SwitchOptimizer,
    expand_spec,
    grid_configurations,
    grid_size,
    make_optimizer,
    shall_continue,
)
from hyperpipe.pipeline import Element, Pipeline, Switch


def test_float_range_step_exact():
    assert expand_spec(FloatRange(0.5, 0.8, step=0.1)) == [0.5, 0.6, 0.7]


def test_integer_range_half_open():
    assert expand_spec(IntegerRange(2, 4)) == [2, 3]
    assert expand_spec(IntegerRange(2, 30)) == list(range(2, 30))
    assert expand_spec(IntegerRange(0, 10, step=3)) == [0, 3, 6, 9]


def test_integer_range_num_form():
    assert expand_spec(IntegerRange(0, 10, num=3)) == [0, 5, 10]
    assert expand_spec(IntegerRange(1, 4, num=4)) == [1, 2, 3, 4]
    # rounding collisions are deduplicated
    assert expand_spec(IntegerRange(1, 3, num=5)) == [1, 2, 3]
    with pytest.raises(ValueError):
        IntegerRange(1, 5, num=1)


def test_float_range_logspace():
    values = expand_spec(FloatRange(0.001, 1.0, num=4, range_type="logspace"))
    assert values[0] == 0.001 and values[-1] == 1.0
    assert values[1] == pytest.approx(0.01, rel=1e-12)
    assert values[2] == pytest.approx(0.1, rel=1e-12)


def test_float_range_linspace_defaults_to_ten():
    values = expand_spec(FloatRange(0.5, 25.0))
    assert len(values) == 10
    assert values[0] == 0.5 and values[-1] == 25.0


def test_categorical_and_boolean():
    assert expand_spec(Categorical(("a", "b"))) == ["a", "b"]
    assert expand_spec(["x", "y"]) == ["x", "y"]  # list shorthand
    assert expand_spec(Boolean()) == [True, False]


def test_spec_validation():
    with pytest.raises(ValueError):
        FloatRange(1.0, 0.5, step=0.1)
    with pytest.raises(ValueError):
        FloatRange(0.5, 1.0, step=-0.1)
    with pytest.raises(ValueError):
        FloatRange(0.0, 1.0, range_type="logspace")
    with pytest.raises(ValueError):
        FloatRange(0.1, 1.0, num=1)
    with pytest.raises(ValueError):
        IntegerRange(4, 2)
    with pytest.raises(ValueError):
        Categorical(())


def simple_pipeline():
    return Pipeline(
        [
            Element("PCA", hyperparameters={"n_components": [1, 2, 3]}, name="pca"),
            Element("KNeighborsClassifier", hyperparameters={"n_neighbors": [1, 5]},
                    name="knn"),
        ]
    )


def test_grid_product_counts():
    grid = grid_configurations(simple_pipeline())
    assert len(grid) == 6
    assert grid_size(simple_pipeline()) == 6
    # odometer: last element varies fastest
    assert grid[0] == {"pca__n_components": 1, "knn__n_neighbors": 1}
    assert grid[1] == {"pca__n_components": 1, "knn__n_neighbors": 5}


def test_grid_disabled_adds_one():
    pipe = Pipeline(
        [
            Element("PCA", hyperparameters={"n_components": [1, 2, 3]},
                    test_disabled=True, name="pca"),
            Element("KNeighborsClassifier", hyperparameters={"n_neighbors": [1, 5]},
                    name="knn"),
        ]
    )
    grid = grid_configurations(pipe)
    assert len(grid) == 8  # (3 + 1) * 2
    disabled = [c for c in grid if c.get("pca__disabled")]
    assert len(disabled) == 2
    for config in disabled:
        assert not any(k.startswith("pca__") and k != "pca__disabled" for k in config)


def switch_pipeline():
    return Pipeline(
        [
            Switch("est", [
                Element("KNeighborsClassifier",
                        hyperparameters={"n_neighbors": [1, 3, 5, 7]}, name="knn"),
                Element("DecisionTreeClassifier",
                        hyperparameters={"min_samples_split": [2, 4, 8]}, name="tree"),
            ])
        ]
    )


def test_grid_switch_disjoint_union():
    grid = grid_configurations(switch_pipeline())
    assert len(grid) == 7  # 4 + 3
    assert grid_size(switch_pipeline()) == 7
    child0 = [c for c in grid if c["est__current_element"] == 0]
    assert len(child0) == 4
    assert all("tree__min_samples_split" not in c for c in child0)


def test_every_grid_config_applies_cleanly():
    for maker in (simple_pipeline, switch_pipeline):
        pipe = maker()
        for config in grid_configurations(pipe):
            pipe.apply_config(config)


def random_pipeline(rng):
    nodes = []
    n_nodes = int(rng.integers(1, 4))
    for i in range(n_nodes):
        if rng.random() < 0.3:
            children = []
            for j in range(int(rng.integers(1, 4))):
                children.append(
                    Element(
                        "KNeighborsClassifier",
                        hyperparameters={"n_neighbors": list(range(1, int(rng.integers(2, 6))))},
                        name=f"sw{i}_knn{j}",
                    )
                )
            nodes.append(Switch(f"sw{i}", children))
        else:
            hp = {}
            if rng.random() < 0.8:
                hp["n_components"] = list(range(1, int(rng.integers(2, 5))))
            nodes.append(
                Element("PCA", hyperparameters=hp,
                        test_disabled=bool(rng.random() < 0.5), name=f"pca{i}")
            )
    nodes.append(Element("DummyClassifier", name="final"))
    return Pipeline(nodes)


def test_grid_count_law_random_pipelines():
    rng = np.random.default_rng(99)
    for _ in range(60):
        pipe = random_pipeline(rng)
        grid = grid_configurations(pipe)
        assert len(grid) == grid_size(pipe)
        # no duplicate configurations
        seen = {tuple(sorted(c.items())) for c in grid}
        assert len(seen) == len(grid)


def test_grid_search_exhaustive():
    opt = GridSearch().prepare(simple_pipeline())
    assert len(list(opt.ask())) == 6


def test_random_grid_search_subset_without_repetition():
    pipe = simple_pipeline()
    grid = grid_configurations(pipe)
    opt = RandomGridSearch(n_configurations=4, seed=7).prepare(pipe)
    asked = list(opt.ask())
    assert len(asked) == 4
    keys = [tuple(sorted(c.items())) for c in asked]
    assert len(set(keys)) == 4
    full = {tuple(sorted(c.items())) for c in grid}
    assert set(keys) <= full


def test_random_grid_search_truncation_cap():
    opt = RandomGridSearch(n_configurations=10, seed=1).prepare(simple_pipeline())
    assert len(list(opt.ask())) == 6  # whole grid when smaller


def test_random_grid_search_seed_determinism():
    a = list(RandomGridSearch(5, seed=3).prepare(simple_pipeline()).ask())
    b = list(RandomGridSearch(5, seed=3).prepare(simple_pipeline()).ask())
    assert a == b


def test_switch_optimizer_per_child_budget():
    pipe = switch_pipeline()
    opt = SwitchOptimizer(n_configurations=2, seed=5).prepare(pipe)
    asked = list(opt.ask())
    assert len(asked) == 4  # 2 per child
    per_child = {0: 0, 1: 0}
    for config in asked:
        per_child[config["est__current_element"]] += 1
    assert per_child == {0: 2, 1: 2}
    # round-robin interleave: children alternate
    assert [c["est__current_element"] for c in asked] == [0, 1, 0, 1]


def test_switch_optimizer_requires_switch():
    with pytest.raises(ValueError, match="requires a Switch"):
        SwitchOptimizer().prepare(simple_pipeline())


def test_ask_before_prepare():
    with pytest.raises(RuntimeError, match="before prepare"):
        list(GridSearch().ask())


def test_make_optimizer():
    assert isinstance(make_optimizer("grid_search"), GridSearch)
    assert isinstance(make_optimizer("random_grid_search", {"n_configurations": 3}),
                      RandomGridSearch)
    with pytest.raises(ValueError, match="unknown optimizer"):
        make_optimizer("sk_opt")


def test_shall_continue_rules():
    c_mean = MinimumPerformanceConstraint("f1_score", 0.7, "mean")
    assert shall_continue(c_mean, [0.5]) is False
    assert shall_continue(c_mean, [0.9, 0.6]) is True

    c_first = MinimumPerformanceConstraint("f1_score", 0.7, "first")
    assert shall_continue(c_first, [0.75, 0.1]) is True
    assert shall_continue(c_first, [0.5]) is False

    c_all = MinimumPerformanceConstraint("f1_score", 0.7, "all")
    assert shall_continue(c_all, [0.6, 0.8]) is True
    assert shall_continue(c_all, [0.6, 0.5]) is False


def test_shall_continue_direction_flips_for_loss_metrics():
    c = MinimumPerformanceConstraint("mean_squared_error", 1.0, "first")
    assert shall_continue(c, [0.5]) is True  # small error is good
    assert shall_continue(c, [2.0]) is False


def test_constraint_validation():
    with pytest.raises(ValueError, match="unknown metric"):
        MinimumPerformanceConstraint("bogus", 0.5)
    with pytest.raises(ValueError, match="strategy"):
        MinimumPerformanceConstraint("f1_score", 0.5, "sometimes")
