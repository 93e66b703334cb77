import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crf_tuning.errors import ConfigError, DegenerateMembershipError, DegenerateRangeError
from crf_tuning.models import (
    HyperParams,
    KernelModel,
    Kind,
    cost,
    eval_model,
    fuzzy_memberships,
    gradient,
    n_params,
    normalize_input,
    residual_jacobian,
)

from conftest import GRADIENT_KINDS, central_difference, random_model


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def test_normalize_endpoints_and_midpoint():
    assert normalize_input(0.0, 0.0, 0.76).value == 0.0
    assert normalize_input(0.76, 0.0, 0.76).value == 1.0
    assert normalize_input(0.38, 0.0, 0.76).value == pytest.approx(0.5, abs=1e-15)


def test_normalize_degenerate_range():
    with pytest.raises(DegenerateRangeError):
        normalize_input(0.3, 0.5, 0.5)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 10))
def test_normalize_roundtrip(phi, lo, width):
    n = normalize_input(phi, lo, lo + width)
    assert n.invert() == pytest.approx(phi, abs=1e-9)


# ---------------------------------------------------------------------------
# parameter layout
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kind, n, expected",
    [("linear", 0, 2), ("naka_rushton", 0, 4), ("modified_naka_rushton", 0, 5),
     ("mlp", 3, 10), ("rbf", 4, 9), ("tsk_fuzzy", 2, 8), ("anfis", 3, 12), ("lolimot", 5, 20)],
)
def test_param_counts(kind, n, expected):
    assert n_params(kind, HyperParams(n, 0.5)) == expected


def test_wrong_length_rejected():
    with pytest.raises(ConfigError):
        KernelModel("naka_rushton", [1.0, 0.5, 2.0])


@pytest.mark.parametrize("bad", [[1, 0.0, 2, 1], [1, 0.3, -1, 1]])
def test_nr_positivity_enforced(bad):
    with pytest.raises(ConfigError):
        KernelModel("naka_rushton", bad)


def test_rbf_requires_sigma():
    with pytest.raises(ConfigError):
        KernelModel("rbf", [0.5, 1.0, 0.0], HyperParams(1))


def test_unknown_kind():
    with pytest.raises(ConfigError):
        Kind.parse("gaussian_process")


def test_params_are_read_only():
    m = KernelModel("linear", [1.0, 2.0])
    with pytest.raises(ValueError):
        m.params[0] = 5.0


@pytest.mark.parametrize("kind", GRADIENT_KINDS)
def test_json_roundtrip_exact(kind, rng):
    m = random_model(kind, rng)
    back = KernelModel.from_dict(json.loads(json.dumps(m.to_dict())))
    assert back.kind is m.kind
    assert back.hyper == m.hyper
    assert back.input_range == m.input_range
    np.testing.assert_array_equal(back.params, m.params)


# ---------------------------------------------------------------------------
# evaluation oracles
# ---------------------------------------------------------------------------


@given(st.floats(0.5, 5), st.floats(0.05, 0.95), st.floats(0.2, 6), st.floats(0, 3))
def test_nr_half_max_at_c50(rm, c50, n, b):
    m = KernelModel("naka_rushton", [rm, c50, n, b])
    assert m(c50) == pytest.approx(rm / 2 + b, rel=1e-12)


def test_nr_zero_contrast_is_baseline():
    m = KernelModel("naka_rushton", [3.0, 0.2, 2.5, 1.1])
    assert m(0.0) == 1.1
    assert np.all(np.isfinite(gradient(m, 0.0)))


def test_mnr_with_s_one_matches_nr(rng):
    phi = np.linspace(0, 1, 100)
    for _ in range(20):
        nr = random_model("naka_rushton", rng)
        mnr = KernelModel("modified_naka_rushton", list(nr.params) + [1.0])
        np.testing.assert_allclose(mnr(phi), nr(phi), rtol=1e-12, atol=1e-12)


def test_mlp_zero_weights():
    n = 4
    alpha = np.array([0.3, -1.2, 2.0, 0.7])
    theta = np.concatenate([np.zeros(2 * n), alpha, [0.25]])
    m = KernelModel("mlp", theta, HyperParams(n))
    np.testing.assert_allclose(m(np.linspace(0, 1, 7)), alpha.sum() / 2 + 0.25, rtol=0, atol=1e-15)


def test_rbf_peak_dominated_by_own_center():
    sigma = 0.05
    c = np.array([0.1, 0.5, 0.9])
    alpha = np.array([1.0, 2.0, 3.0])
    m = KernelModel("rbf", np.concatenate([c, alpha, [0.5]]), HyperParams(3, sigma))
    delta = 0.4
    bound = np.exp(-(delta / sigma) ** 2 / 2) * alpha.sum()
    for j in range(3):
        assert abs(m(c[j]) - (alpha[j] + 0.5)) < bound


def test_tsk_single_rule_is_line(rng):
    phi = rng.uniform(-1, 2, 50)
    m = KernelModel("tsk_fuzzy", [1.7, -0.4, 0.3, 0.2], HyperParams(1))
    np.testing.assert_allclose(m(phi), 1.7 * phi - 0.4, rtol=0, atol=1e-14)


def test_fuzzy_kinds_share_one_evaluator(rng):
    theta = random_model("tsk_fuzzy", rng).params
    phi = rng.uniform(0, 1, 30)
    outs = [KernelModel(k, theta, HyperParams(3))(phi) for k in ("tsk_fuzzy", "anfis", "lolimot")]
    np.testing.assert_array_equal(outs[0], outs[1])
    np.testing.assert_array_equal(outs[0], outs[2])


def test_memberships_sum_to_one_and_survive_extremes():
    theta = np.array([1, 1, 0, 0, 0.2, 0.8, 0.01, 0.01])
    psi = fuzzy_memberships(theta, np.array([-50.0, 0.5, 80.0]), 2)
    np.testing.assert_allclose(psi.sum(axis=1), 1.0)
    assert np.all(np.isfinite(psi))


def test_memberships_nan_input_is_degenerate():
    theta = np.array([1, 1, 0, 0, 0.2, 0.8, 0.1, 0.1])
    with pytest.raises(DegenerateMembershipError):
        fuzzy_memberships(theta, np.array([np.nan]), 2)


def test_nr_monotone_for_nonnegative_gain(rng):
    phi = np.linspace(0, 1, 400)
    for _ in range(50):
        y = random_model("naka_rushton", rng)(phi)
        assert np.all(np.diff(y) >= -1e-12)


def test_mnr_can_supersaturate():
    y = KernelModel("modified_naka_rushton", [2.0, 0.3, 2.0, 1.0, 1.3])(np.linspace(0, 1, 200))
    k = int(np.argmax(y))
    assert 0 < k < y.size - 1


def test_eval_is_deterministic(rng):
    m = random_model("mlp", rng)
    phi = rng.uniform(0, 1, 10)
    np.testing.assert_array_equal(m(phi), m(phi))


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def test_linear_gradient():
    m = KernelModel("linear", [2.0, -1.0])
    for phi in (0.0, 0.3, 1.0):
        np.testing.assert_array_equal(gradient(m, phi), [phi, 1.0])


def test_mlp_bias_gradient_is_one(rng):
    m = random_model("mlp", rng)
    g = gradient(m, rng.uniform(0, 1, 9))
    np.testing.assert_array_equal(g[:, -1], 1.0)


@pytest.mark.parametrize("kind", GRADIENT_KINDS)
def test_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(100 + GRADIENT_KINDS.index(kind))
    for _ in range(25):
        m = random_model(kind, rng)
        phi = float(rng.uniform(0, 1))
        g = gradient(m, phi)
        fd = central_difference(m, phi)
        scale = max(np.max(np.abs(g)), 1e-3)
        assert np.max(np.abs(g - fd)) / scale < 1e-5, (kind, m.params, phi)


# ---------------------------------------------------------------------------
# residuals and cost
# ---------------------------------------------------------------------------


def test_residual_zero_for_perfect_model(rng):
    m = random_model("rbf", rng)
    phi = rng.uniform(0, 1, 12)
    e, _ = residual_jacobian(m, phi, m(phi))
    np.testing.assert_array_equal(e, 0.0)


def test_linear_jacobian_three_points():
    phi = np.array([0.1, 0.4, 0.9])
    _, jac = residual_jacobian(KernelModel("linear", [1.0, 0.0]), phi, np.zeros(3))
    np.testing.assert_array_equal(jac, [[0.1, 1], [0.4, 1], [0.9, 1]])


def test_cost_matches_independent_sum(rng):
    m = random_model("modified_naka_rushton", rng)
    phi = rng.uniform(0, 1, 40)
    y = rng.normal(2, 1, 40)
    direct = 0.0
    for p, t in zip(phi, y):
        direct += (t - eval_model(m, float(p))) ** 2
    assert cost(m, phi, y) == pytest.approx(direct / 2, rel=1e-12, abs=1e-12)


def test_residual_rejects_empty_and_mismatch():
    m = KernelModel("linear", [1.0, 0.0])
    with pytest.raises(ConfigError):
        residual_jacobian(m, [], [])
    with pytest.raises(ConfigError):
        residual_jacobian(m, [0.1, 0.2], [1.0])
