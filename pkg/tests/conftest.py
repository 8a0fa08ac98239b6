"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from nlheat import (
    CoefficientDescriptor,
    Grid,
    ProblemSpec,
    StepControl,
    constant_datum,
)


def const_spec(p, l, c=1.0, k=1.0, u0=1.0, length=1.0):
    """Constant-coefficient problem, the workhorse of the examples."""
    return ProblemSpec.build(
        p=p,
        l=l,
        c=CoefficientDescriptor("constant", c),
        k=CoefficientDescriptor("constant", k),
        u0=constant_datum(u0),
        length=length,
    )


@pytest.fixture(scope="session")
def grid400():
    return Grid(n=400, length=1.0)


@pytest.fixture(scope="session")
def grid100():
    return Grid(n=100, length=1.0)


@pytest.fixture(scope="session")
def default_ctrl():
    return StepControl(err_tol=1e-8)
