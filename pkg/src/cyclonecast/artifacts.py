"""Model persistence: a self-describing, versioned JSON container holding a
fitted model together with the scalers, window configuration, and seeds it
was trained with.

Numeric arrays are stored as base64 of their little-endian bytes with dtype
and shape, string arrays as plain lists. Serialization is canonical (sorted
keys, fixed separators, no timestamps), so identical fitted state produces
byte-identical files: the determinism contract tests rely on that.
"""

import base64
import json
from dataclasses import dataclass

import numpy as np

from .ensemble import GradientBoostingRegressor, RandomForestClassifier
from .mlp import MLPClassifier
from .preprocess import FeatureScalers, FixedMinMaxScaler, StandardScaler
from .svm import BinarySVM, OneVsRestSVM
from .tree import DecisionTreeClassifier, DecisionTreeRegressor, _FittedTree

FORMAT_NAME = "cyclonecast-artifact"
FORMAT_VERSION = 1


def _encode_array(a):
    a = np.asarray(a)
    if a.dtype.kind == "U":
        return {"strings": a.tolist(), "shape": list(a.shape)}
    little = a.astype(a.dtype.newbyteorder("<"), copy=False)
    return {
        "dtype": little.dtype.str,
        "shape": list(a.shape),
        "data": base64.b64encode(little.tobytes()).decode("ascii"),
    }


def _decode_array(d):
    if "strings" in d:
        return np.asarray(d["strings"]).reshape(d["shape"])
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype=np.dtype(d["dtype"])).reshape(d["shape"]).copy()


def _tree_state(tree):
    t = tree.tree_
    # random_state may be a live Generator (forest-fit trees); not persisted
    params = {k: v for k, v in tree.get_params().items() if k != "random_state"}
    return {
        "params": params,
        "n_features_in": tree.n_features_in_,
        "classes": _encode_array(tree.classes_) if hasattr(tree, "classes_") else None,
        "arrays": {
            "feature": _encode_array(t.feature),
            "threshold": _encode_array(t.threshold),
            "left": _encode_array(t.left),
            "right": _encode_array(t.right),
            "values": _encode_array(t.values),
            "importance_gain": _encode_array(t.importance_gain),
        },
    }


def _tree_from_state(state, regressor):
    cls = DecisionTreeRegressor if regressor else DecisionTreeClassifier
    params = dict(state["params"])
    params.pop("random_state", None)
    tree = cls(**params)
    arrays = state["arrays"]
    tree.tree_ = _FittedTree(
        _decode_array(arrays["feature"]),
        _decode_array(arrays["threshold"]),
        _decode_array(arrays["left"]),
        _decode_array(arrays["right"]),
        _decode_array(arrays["values"]),
        _decode_array(arrays["importance_gain"]),
    )
    tree.n_features_in_ = state["n_features_in"]
    if state.get("classes") is not None:
        tree.classes_ = _decode_array(state["classes"])
    return tree


def _gbr_state(model):
    return {
        "params": model.get_params(),
        "init": _encode_array(model.init_),
        "single_target": model._single_target,
        "train_loss": _encode_array(model.train_loss_),
        "n_features_in": model.n_features_in_,
        "stages": [
            [_tree_state(tree) for tree in target_trees]
            for target_trees in model.stages_
        ],
    }


def _gbr_from_state(state):
    model = GradientBoostingRegressor(**state["params"])
    model.init_ = _decode_array(state["init"])
    model._single_target = state["single_target"]
    model.train_loss_ = _decode_array(state["train_loss"])
    model.n_features_in_ = state["n_features_in"]
    model.stages_ = [
        [_tree_from_state(t, regressor=True) for t in target_trees]
        for target_trees in state["stages"]
    ]
    return model


def _rf_state(model):
    # n_jobs is an execution knob, not model identity; keep bytes stable
    params = {k: v for k, v in model.get_params().items() if k != "n_jobs"}
    return {
        "params": params,
        "classes": _encode_array(model.classes_),
        "n_features_in": model.n_features_in_,
        "trees": [_tree_state(tree) for tree in model.trees_],
    }


def _rf_from_state(state):
    params = dict(state["params"])
    model = RandomForestClassifier(**params)
    model.classes_ = _decode_array(state["classes"])
    model.n_features_in_ = state["n_features_in"]
    model.trees_ = [_tree_from_state(t, regressor=False) for t in state["trees"]]
    return model


def _binary_svm_state(machine):
    params = {k: v for k, v in machine.get_params().items() if k != "random_state"}
    return {
        "params": params,
        "gamma_resolved": machine.gamma_,
        "support_vectors": _encode_array(machine.support_vectors_),
        "dual_coef": _encode_array(machine.dual_coef_),
        "intercept": machine.intercept_,
        "n_features_in": machine.n_features_in_,
    }


def _binary_svm_from_state(state):
    params = dict(state["params"])
    params.pop("random_state", None)
    machine = BinarySVM(**params)
    machine.gamma_ = state["gamma_resolved"]
    machine.support_vectors_ = _decode_array(state["support_vectors"])
    machine.dual_coef_ = _decode_array(state["dual_coef"])
    machine.intercept_ = state["intercept"]
    machine.n_features_in_ = state["n_features_in"]
    return machine


def _svm_state(model):
    params = {k: v for k, v in model.get_params().items() if k != "n_jobs"}
    return {
        "params": params,
        "classes": _encode_array(model.classes_),
        "n_features_in": model.n_features_in_,
        "machines": [_binary_svm_state(m) for m in model.machines_],
    }


def _svm_from_state(state):
    model = OneVsRestSVM(**state["params"])
    model.classes_ = _decode_array(state["classes"])
    model.n_features_in_ = state["n_features_in"]
    model.machines_ = [_binary_svm_from_state(m) for m in state["machines"]]
    return model


def _mlp_state(model):
    params = dict(model.get_params())
    params["hidden_layers"] = list(params["hidden_layers"])
    return {
        "params": params,
        "classes": _encode_array(model.classes_),
        "n_features_in": model.n_features_in_,
        "loss_curve": list(model.loss_curve_),
        "weights": [_encode_array(w) for w in model.weights_],
        "biases": [_encode_array(c) for c in model.biases_],
    }


def _mlp_from_state(state):
    params = dict(state["params"])
    params["hidden_layers"] = tuple(params["hidden_layers"])
    model = MLPClassifier(**params)
    model.classes_ = _decode_array(state["classes"])
    model.n_features_in_ = state["n_features_in"]
    model.loss_curve_ = list(state["loss_curve"])
    model.weights_ = [_decode_array(w) for w in state["weights"]]
    model.biases_ = [_decode_array(c) for c in state["biases"]]
    return model


_ENCODERS = {
    "gbr": (GradientBoostingRegressor, _gbr_state, _gbr_from_state),
    "rf": (RandomForestClassifier, _rf_state, _rf_from_state),
    "svm": (OneVsRestSVM, _svm_state, _svm_from_state),
    "mlp": (MLPClassifier, _mlp_state, _mlp_from_state),
}


def scalers_state(scalers):
    return {
        "x": {"lower": scalers.x.lower, "upper": scalers.x.upper},
        "y": {"lower": scalers.y.lower, "upper": scalers.y.upper},
        "month": {"lower": scalers.month.lower, "upper": scalers.month.upper},
        "wind": {
            "mean": _encode_array(scalers.wind.mean_),
            "std": _encode_array(scalers.wind.std_),
        },
        "pressure": {
            "mean": _encode_array(scalers.pressure.mean_),
            "std": _encode_array(scalers.pressure.std_),
        },
        "radii": {
            "mean": _encode_array(scalers.radii.mean_),
            "std": _encode_array(scalers.radii.std_),
        },
    }


def scalers_from_state(state):
    def minmax(d):
        return FixedMinMaxScaler(d["lower"], d["upper"]).fit()

    def standard(d):
        s = StandardScaler()
        s.mean_ = _decode_array(d["mean"])
        s.std_ = _decode_array(d["std"])
        return s

    return FeatureScalers(
        x=minmax(state["x"]),
        y=minmax(state["y"]),
        month=minmax(state["month"]),
        wind=standard(state["wind"]),
        pressure=standard(state["pressure"]),
        radii=standard(state["radii"]),
    )


@dataclass
class ModelArtifact:
    kind: str
    model: object
    scalers: FeatureScalers
    window_config: dict
    seeds: dict


def save_artifact(path, kind, model, scalers, window_config, seeds):
    if kind not in _ENCODERS:
        raise ValueError(f"unknown model kind {kind!r}")
    expected_type, encoder, _ = _ENCODERS[kind]
    if not isinstance(model, expected_type):
        raise TypeError(f"kind {kind!r} expects {expected_type.__name__}")
    payload = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "model": encoder(model),
        "scalers": scalers_state(scalers),
        "windows": dict(window_config),
        "seeds": dict(seeds),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))


def load_artifact(path) -> ModelArtifact:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != FORMAT_NAME:
        raise ValueError(f"{path} is not a {FORMAT_NAME} file")
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported artifact version {payload.get('version')}")
    kind = payload["kind"]
    if kind not in _ENCODERS:
        raise ValueError(f"unknown model kind {kind!r}")
    _, _, decoder = _ENCODERS[kind]
    return ModelArtifact(
        kind=kind,
        model=decoder(payload["model"]),
        scalers=scalers_from_state(payload["scalers"]),
        window_config=payload["windows"],
        seeds=payload["seeds"],
    )
