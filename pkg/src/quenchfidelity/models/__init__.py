from typing import Dict, List

from src.quenchfidelity.core.errors import DomainError
from .model_spec import ModelSpec
from .xy import XY_MODEL, XYParams

_REGISTRY: Dict[str, ModelSpec] = {}


def register_model(spec: ModelSpec) -> ModelSpec:
    """Add a model under its name; re-registering a name replaces the entry."""
    _REGISTRY[spec.name] = spec
    return spec


def get_model(name: str) -> ModelSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown model '{name}'; available: {', '.join(available_models())}") from None


def available_models() -> List[str]:
    return sorted(_REGISTRY)


register_model(XY_MODEL)

__all__ = ["ModelSpec", "XYParams", "XY_MODEL", "register_model", "get_model", "available_models"]
