import numpy as np
import pytest

from psumreach import LtiSystem, PSumSet, UncertaintyModel

F = np.array([[1.0, 0.3], [0.0, 1.0]])
G = np.array([[0.3, 0.045], [0.0, 0.3]])


def random_spd(rng, d, spread=10.0):
    """Random SPD matrix with eigenvalues in roughly [1/spread, spread]."""
    A = rng.standard_normal((d, d))
    Q, _ = np.linalg.qr(A)
    w = np.exp(rng.uniform(-np.log(spread), np.log(spread), size=d))
    return (Q * w) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


def make_table1_model():
    """Single-ellipsoid initial set, 1-summand control set (1+cos^2 t) diag(10, 0.1)."""
    x0 = PSumSet(p=1.0, translation=np.zeros(2), shapes=[np.eye(2)])

    def gen(t):
        s = 1.0 + np.cos(float(t)) ** 2
        return PSumSet(p=1.0, translation=np.zeros(2), shapes=[s * np.diag([10.0, 0.1])])

    return LtiSystem(F=F, G=G), UncertaintyModel(x0_set=x0, control_generator=gen,
                                                 control_timing="current")


def make_table2_model():
    """Two-shape p=2.5 initial set, three-summand p=1.5 control sets."""
    Q01 = np.array([[2.2259, 0.1992], [0.1992, 2.4357]])
    Q02 = np.array([[2.3111, 0.6768], [0.6768, 2.1848]])
    x0 = PSumSet(p=2.5, translation=np.zeros(2), shapes=[Q01, Q02])

    def gen(t):
        shapes = [(1.0 + np.cos(j * float(t)) ** 2) * np.diag([10.0, 0.1])
                  for j in (1, 2, 3)]
        return PSumSet(p=1.5, translation=np.zeros(2), shapes=shapes)

    return LtiSystem(F=F, G=G), UncertaintyModel(x0_set=x0, control_generator=gen,
                                                 control_timing="current")
