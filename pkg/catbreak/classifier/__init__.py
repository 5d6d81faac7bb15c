"""Target classifiers, gradients and query accounting."""

from catbreak.classifier.affine import AffineModel, make_affine_classifier
from catbreak.classifier.base import (
    CategoricalModel,
    ConfidenceVector,
    Objective,
    ObjectiveKind,
    best_wrong_class,
    check_confidences,
    grad_indicators,
    margin_of,
)
from catbreak.classifier.gradcheck import finite_diff_grad, max_relative_error
from catbreak.classifier.handle import ClassifierHandle
from catbreak.classifier.io import load_model, save_model
from catbreak.classifier.mlp import EmbedMlpModel
from catbreak.classifier.planted import (
    Sensitivity,
    make_constant_classifier,
    make_planted_classifier,
    make_random_classifier,
)


def predict(handle: ClassifierHandle, inst) -> ConfidenceVector:
    return handle.predict(inst)


def predict_many(handle: ClassifierHandle, instances):
    return handle.predict_many(instances)


__all__ = [
    "AffineModel",
    "CategoricalModel",
    "ClassifierHandle",
    "ConfidenceVector",
    "EmbedMlpModel",
    "Objective",
    "ObjectiveKind",
    "Sensitivity",
    "best_wrong_class",
    "check_confidences",
    "finite_diff_grad",
    "grad_indicators",
    "load_model",
    "make_affine_classifier",
    "make_constant_classifier",
    "make_planted_classifier",
    "make_random_classifier",
    "margin_of",
    "max_relative_error",
    "predict",
    "predict_many",
    "save_model",
]
