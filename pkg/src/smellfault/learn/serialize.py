"""JSON dump and load for every trained model type.

A document is ``{"type": ..., "model": {...}}`` with an optional
``"standardization": {"mean": [...], "scale": [...]}`` holding the
parameters the model's inputs were scaled with. Floats are written with
``repr`` precision, so a load reproduces the model exactly.
"""

from __future__ import annotations

import json

from .boosting import AdaBoostModel
from .preprocessing import StandardizationParams
from .svm import SvmModel
from .threshold import ThresholdClassifier, VotingEnsemble


def _threshold_dict(m: ThresholdClassifier) -> dict:
    return {"smell": m.smell, "percent": float(m.percent), "cut": float(m.cut)}


def _threshold_from(doc: dict) -> ThresholdClassifier:
    return ThresholdClassifier(int(doc["smell"]), float(doc["percent"]), float(doc["cut"]))


def model_to_dict(model, standardization=None) -> dict:
    if isinstance(model, AdaBoostModel):
        doc = {"type": "adaboost", "model": model.to_dict()}
    elif isinstance(model, SvmModel):
        doc = {"type": "svm", "model": model.to_dict()}
    elif isinstance(model, ThresholdClassifier):
        doc = {"type": "threshold", "model": _threshold_dict(model)}
    elif isinstance(model, VotingEnsemble):
        doc = {"type": "voting", "model": {"scheme": model.scheme,
                                           "members": [_threshold_dict(m) for m in model.members]}}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    if standardization is not None:
        doc["standardization"] = standardization.to_dict()
    return doc


def model_from_dict(doc: dict) -> tuple:
    """``(model, standardization or None)``."""
    kind, body = doc.get("type"), doc.get("model")
    if not isinstance(body, dict):
        raise ValueError("model document lacks a 'model' object")
    if kind == "adaboost":
        model = AdaBoostModel.from_dict(body)
    elif kind == "svm":
        model = SvmModel.from_dict(body)
    elif kind == "threshold":
        model = _threshold_from(body)
    elif kind == "voting":
        model = VotingEnsemble(tuple(_threshold_from(m) for m in body["members"]), str(body["scheme"]))
    else:
        raise ValueError(f"unknown model type {kind!r}")
    params = doc.get("standardization")
    return model, (StandardizationParams.from_dict(params) if params is not None else None)


def dumps_model(model, standardization=None) -> str:
    return json.dumps(model_to_dict(model, standardization), indent=1) + "\n"


def loads_model(text: str) -> tuple:
    return model_from_dict(json.loads(text))
