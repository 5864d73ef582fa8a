"""Versioned JSON documents for trained models and their preprocessing."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from src.datasets import Hyperparams, ScalingParams
from src.errors import DatasetError
from src.kernels import KernelSpec
from src.privileged_pca import PCABasis
from src.trainer import Hyperplane, Model, OneVsRestModel, TwinModel, predict

LOGGER = logging.getLogger("pin_twsvmpi.model_store")

SCHEMA = "pin-twsvmpi-model"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StoredModel:
    """A model plus the scaling it was trained under; PCA basis kept for privileged extraction."""

    model: Model
    scaling: Optional[ScalingParams] = None
    pca: Optional[PCABasis] = None

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.scaling.apply(X) if self.scaling is not None else X

    def predict(self, X) -> np.ndarray:
        return predict(self.model, self.transform(X))


def _array(values) -> Optional[np.ndarray]:
    return None if values is None else np.asarray(values, dtype=float)


def _plane_to_dict(plane: Hyperplane) -> Dict:
    return {
        "weights": plane.weights.tolist(),
        "intercept": plane.intercept,
        "correcting_weights": None if plane.correcting_weights is None else plane.correcting_weights.tolist(),
        "correcting_intercept": plane.correcting_intercept,
    }


def _plane_from_dict(payload: Dict) -> Hyperplane:
    return Hyperplane(
        weights=np.asarray(payload["weights"], dtype=float),
        intercept=float(payload["intercept"]),
        correcting_weights=_array(payload.get("correcting_weights")),
        correcting_intercept=payload.get("correcting_intercept"),
    )


def _twin_to_dict(model: TwinModel) -> Dict:
    return {
        "method": model.method,
        "variant": model.variant,
        "kernel": model.kernel.to_dict(),
        "hyperparams": model.hyperparams.to_dict(),
        "distance_rule": model.distance_rule,
        "n_features": model.n_features,
        "n_privileged": model.n_privileged,
        "positive": _plane_to_dict(model.positive),
        "negative": _plane_to_dict(model.negative),
        "support": None if model.support is None else model.support.tolist(),
        "privileged_support": None if model.privileged_support is None else model.privileged_support.tolist(),
        "diagnostics": list(model.diagnostics),
    }


def _twin_from_dict(payload: Dict) -> TwinModel:
    support = _array(payload.get("support"))
    privileged_support = _array(payload.get("privileged_support"))
    return TwinModel(
        method=payload["method"],
        variant=payload["variant"],
        kernel=KernelSpec.from_dict(payload["kernel"]),
        positive=_plane_from_dict(payload["positive"]),
        negative=_plane_from_dict(payload["negative"]),
        hyperparams=Hyperparams.from_dict(payload["hyperparams"]),
        n_features=int(payload["n_features"]),
        n_privileged=int(payload.get("n_privileged", 0)),
        support=None if support is None else np.atleast_2d(support),
        privileged_support=None if privileged_support is None else np.atleast_2d(privileged_support),
        diagnostics=tuple(payload.get("diagnostics", ())),
    )


def to_document(stored: StoredModel) -> Dict:
    model = stored.model
    doc: Dict = {"schema": SCHEMA, "schema_version": SCHEMA_VERSION}
    if isinstance(model, OneVsRestModel):
        doc["kind"] = "one_vs_rest"
        doc["classes"] = list(model.classes)
        doc["models"] = [_twin_to_dict(sub) for sub in model.models]
    else:
        doc["kind"] = "binary"
        doc["model"] = _twin_to_dict(model)
    doc["preprocessing"] = {
        "scaling": None if stored.scaling is None else stored.scaling.to_dict(),
        "pca": None if stored.pca is None else stored.pca.to_dict(),
    }
    return doc


def from_document(doc: Dict) -> StoredModel:
    if doc.get("schema") != SCHEMA:
        raise DatasetError(f"not a model document (schema={doc.get('schema')!r})")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DatasetError(f"unsupported model schema_version {doc.get('schema_version')!r}")
    try:
        if doc["kind"] == "one_vs_rest":
            model: Model = OneVsRestModel(
                classes=tuple(int(c) for c in doc["classes"]),
                models=tuple(_twin_from_dict(sub) for sub in doc["models"]),
            )
        elif doc["kind"] == "binary":
            model = _twin_from_dict(doc["model"])
        else:
            raise DatasetError(f"unknown model kind {doc['kind']!r}")
        prep = doc.get("preprocessing", {})
        scaling = ScalingParams.from_dict(prep["scaling"]) if prep.get("scaling") else None
        pca = PCABasis.from_dict(prep["pca"]) if prep.get("pca") else None
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"malformed model document: {exc}") from exc
    return StoredModel(model=model, scaling=scaling, pca=pca)


def save_model(stored: StoredModel, path) -> None:
    path = Path(path)
    path.write_text(json.dumps(to_document(stored), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    LOGGER.info("Wrote model document %s", path)


def load_model(path) -> StoredModel:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON in {path}: {exc}") from exc
    return from_document(doc)
