import numpy as np
import pytest

from dyadeconv import ComponentDist, FreqGrid, ModelConfig


def normal(scale=1.0):
    return ComponentDist("normal", scale)


def laplace(scale=1.0):
    return ComponentDist("laplace", scale)


def uniform(scale=1.0):
    return ComponentDist("uniform_symmetric", scale)


def two_point(scale=1.0):
    return ComponentDist("two_point_symmetric", scale)


def shifted_exp(scale=1.0):
    return ComponentDist("shifted_exponential", scale)


ALL_KINDS = [normal(1.0), laplace(1.0), uniform(1.0), two_point(1.0), shifted_exp(1.0)]


@pytest.fixture
def all_normal_config():
    return ModelConfig(0.0, normal(), normal(), normal())


@pytest.fixture
def grid_coarse():
    """|s| <= 3 at spacing 0.01."""
    return FreqGrid.from_spacing(3.0, 0.01)


def sup_err(curve, truth_values, mask=None):
    diff = np.abs(curve.values - truth_values)
    if mask is not None:
        diff = diff[mask]
    return float(np.max(diff))
