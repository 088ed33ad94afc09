"""Element registry: keyword-based construction of transformers and estimators."""

from __future__ import annotations

from dataclasses import dataclass

from .base import BaseElement
from .estimators import (
    DecisionTreeClassifier,
    DummyClassifier,
    DummyRegressor,
    KNeighborsClassifier,
    LinearSVC,
    RandomForestClassifier,
    Svc,
)
from .feature_selection import LassoFeatureSelection, lasso_coordinate_descent
from .preprocessing import Pca, SimpleImputer, StandardScaler
from .resampling import ImbalancedDataTransformer

__all__ = [
    "BaseElement",
    "register_element",
    "create_element",
    "element_metadata",
    "registered_elements",
    "lasso_coordinate_descent",
]


@dataclass(frozen=True)
class RegistryEntry:
    keyword: str
    factory: type
    metadata: dict


_REGISTRY: dict[str, RegistryEntry] = {}


def register_element(keyword: str, factory, metadata: dict | None = None) -> None:
    """Register a construction keyword; duplicates are rejected."""
    if keyword in _REGISTRY:
        raise ValueError(f"element keyword {keyword!r} already registered")
    if metadata is None:
        metadata = {
            "can_transform": factory.can_transform,
            "can_predict": factory.can_predict,
            "can_predict_proba": factory.can_predict_proba,
            "modifies_targets": factory.modifies_targets,
            "applies_during": factory.applies_during,
            "params": list(factory.param_names),
        }
    _REGISTRY[keyword] = RegistryEntry(keyword, factory, dict(metadata))


def create_element(keyword: str, **fixed_params) -> BaseElement:
    try:
        entry = _REGISTRY[keyword]
    except KeyError:
        raise ValueError(f"unknown element {keyword!r}") from None
    element = entry.factory(**fixed_params)
    element.keyword = keyword
    return element


def element_metadata(keyword: str) -> dict:
    try:
        return dict(_REGISTRY[keyword].metadata)
    except KeyError:
        raise ValueError(f"unknown element {keyword!r}") from None


def registered_elements() -> list[str]:
    return sorted(_REGISTRY)


for _cls in (
    StandardScaler,
    SimpleImputer,
    Pca,
    LassoFeatureSelection,
    ImbalancedDataTransformer,
    KNeighborsClassifier,
    DecisionTreeClassifier,
    RandomForestClassifier,
    LinearSVC,
    Svc,
    DummyClassifier,
    DummyRegressor,
):
    register_element(_cls.keyword, _cls)
