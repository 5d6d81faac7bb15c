"""Pytest configuration for catbreak tests."""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure project root is importable when running tests directly (e.g., `pytest -q`).
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from catbreak.classifier import (  # noqa: E402
    AffineModel,
    ClassifierHandle,
    Sensitivity,
    make_affine_classifier,
    make_constant_classifier,
    make_planted_classifier,
    make_random_classifier,
)


@pytest.fixture
def affine_model():
    return make_affine_classifier(6, 3, k=2, seed=1)


@pytest.fixture
def mlp_model():
    return make_random_classifier(5, 3, k=3, d=4, seed=2, hidden=(8,))


@pytest.fixture
def planted_model():
    return make_planted_classifier(
        8, 4, k=2, d=4, sensitivity=Sensitivity.skewed(1), seed=3, hidden=(16,)
    )


@pytest.fixture
def handle(planted_model):
    return ClassifierHandle(planted_model)


@pytest.fixture
def switch_model():
    """Affine model where only feature 0 matters: value 1 flips class 0 to class 1."""
    weights = np.zeros((3, 2, 2))
    weights[0, 0] = [0.2, -0.2]
    weights[0, 1] = [-0.2, 0.2]
    return AffineModel(np.array([0.5, 0.5]), weights, (2, 2, 2))


@pytest.fixture
def stuck_model():
    """Constant confidences: an instance labelled 1 can never be flipped."""
    return make_constant_classifier(4, 3, [0.2, 0.8])
