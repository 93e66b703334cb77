import numpy as np
import pytest
from hypothesis import settings

from crf_tuning.models import HyperParams, KernelModel, Kind

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GRADIENT_KINDS = [
    Kind.LINEAR,
    Kind.NAKA_RUSHTON,
    Kind.MODIFIED_NAKA_RUSHTON,
    Kind.MLP,
    Kind.RBF,
    Kind.TSK_FUZZY,
    Kind.ANFIS,
    Kind.LOLIMOT,
]


def random_model(kind, rng, n_units=3):
    """A valid model of ``kind`` with parameters in a well-conditioned region."""
    kind = Kind.parse(kind)
    u = rng.uniform
    if kind is Kind.LINEAR:
        return KernelModel(kind, u(-2, 2, 2))
    if kind is Kind.NAKA_RUSHTON:
        return KernelModel(kind, [u(0.5, 3), u(0.1, 0.9), u(0.5, 4), u(0.5, 2)])
    if kind is Kind.MODIFIED_NAKA_RUSHTON:
        return KernelModel(kind, [u(0.5, 3), u(0.1, 0.9), u(0.5, 4), u(0.5, 2), u(0.8, 2)])
    if kind is Kind.MLP:
        return KernelModel(kind, u(-3, 3, 3 * n_units + 1), HyperParams(n_units))
    if kind is Kind.RBF:
        theta = np.concatenate([u(0, 1, n_units), u(-2, 2, n_units + 1)])
        return KernelModel(kind, theta, HyperParams(n_units, 0.5))
    theta = np.concatenate([u(-2, 2, 2 * n_units), u(0, 1, n_units), u(0.2, 0.6, n_units)])
    return KernelModel(kind, theta, HyperParams(n_units))


def central_difference(model, phi, h=1e-6):
    theta = np.array(model.params, float)
    out = np.empty(theta.size)
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        out[i] = (model.with_params(up)(phi) - model.with_params(dn)(phi)) / (2 * h)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number, passed, detail):
    """Remember one acceptance verdict for the end-of-run summary and echo it."""
    line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
