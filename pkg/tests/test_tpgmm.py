import numpy as np
import pytest
from scipy.stats import multivariate_normal

from salat.geometry import Dataset, Demonstration, Frame, TaskQuery, Trajectory
from salat.tpgmm import (
    TPGMM,
    LocalGMM,
    alpha_weights,
    condition_on_time,
    fit_em,
    gaussian_product,
)

EXACT = 1e-10


# ---------------------------------------------------------------------------
# alpha weights


def test_alpha_weights_reference_case():
    # unit and 4x-unit covariances at gamma=1 give exactly (0.8, 0.2)
    alphas = alpha_weights([np.eye(2), 4 * np.eye(2)], gamma=1.0)
    assert abs(alphas[0] - 0.8) < EXACT
    assert abs(alphas[1] - 0.2) < EXACT


def test_alpha_weights_gamma_zero_uniform():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 2))
    covs = [a @ a.T + np.eye(2), 3 * np.eye(2)]
    alphas = alpha_weights(covs, gamma=0.0)
    assert np.max(np.abs(alphas - 0.5)) < EXACT


def test_alpha_weights_favors_low_variance():
    alphas = alpha_weights([0.1 * np.eye(2), 10 * np.eye(2)], gamma=2.0)
    assert alphas[0] > 0.99


def test_alpha_weights_rejects_bad_input():
    with pytest.raises(ValueError):
        alpha_weights([np.eye(2)], gamma=-1.0)
    with pytest.raises(ValueError):
        alpha_weights([np.zeros((2, 2))], gamma=1.0)


# ---------------------------------------------------------------------------
# Gaussian product


def test_gaussian_product_two_gaussians_closed_form():
    m1, c1 = np.array([0.0, 0.0]), np.eye(2)
    m2, c2 = np.array([1.0, 2.0]), 3 * np.eye(2)
    mean, cov = gaussian_product([m1, m2], [c1, c2])
    # closed form: C = (C1^-1 + C2^-1)^-1, m = C (C1^-1 m1 + C2^-1 m2)
    expected_cov = np.linalg.inv(np.linalg.inv(c1) + np.linalg.inv(c2))
    expected_mean = expected_cov @ (np.linalg.inv(c1) @ m1 + np.linalg.inv(c2) @ m2)
    assert np.max(np.abs(mean - expected_mean)) < EXACT
    assert np.max(np.abs(cov - expected_cov)) < EXACT


def test_gaussian_product_alpha_scaling():
    # alpha -> infinity concentrates the product on that frame's mean;
    # check the direction with a large but finite ratio
    m1, m2 = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    mean, _ = gaussian_product([m1, m2], [np.eye(2), np.eye(2)], alphas=[1e6, 1.0])
    assert np.linalg.norm(mean - m1) < 1e-5
    mean, _ = gaussian_product([m1, m2], [np.eye(2), np.eye(2)], alphas=[1.0, 1.0])
    assert np.max(np.abs(mean - [0.5, 0.0])) < EXACT


def test_gaussian_product_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        gaussian_product([np.zeros(2)], [np.eye(2)], alphas=[0.0])


# ---------------------------------------------------------------------------
# conditioning


def test_condition_on_time_single_component_oracle():
    # one component: standard Gaussian conditional formula
    mean = np.array([0.5, 1.0, -1.0])
    cov = np.array(
        [
            [0.04, 0.01, 0.00],
            [0.01, 0.30, 0.05],
            [0.00, 0.05, 0.20],
        ]
    )
    gmm = LocalGMM(np.array([1.0]), mean[None], cov[None])
    t = 0.7
    mu, sig = condition_on_time(gmm, t)
    gain = cov[1:, 0] / cov[0, 0]
    expected_mu = mean[1:] + gain * (t - mean[0])
    expected_sig = cov[1:, 1:] - np.outer(gain, cov[1:, 0])
    assert np.max(np.abs(mu - expected_mu)) < 1e-12
    assert np.max(np.abs(sig - expected_sig)) < 1e-7  # jitter on the diagonal


def test_condition_on_time_component_switching():
    # two far-apart components active at different times
    means = np.array([[0.1, 0.0, 0.0], [0.9, 5.0, 5.0]])
    covs = np.stack([np.diag([0.01, 0.1, 0.1])] * 2)
    gmm = LocalGMM(np.array([0.5, 0.5]), means, covs)
    mu_early, _ = condition_on_time(gmm, 0.1)
    mu_late, _ = condition_on_time(gmm, 0.9)
    assert np.linalg.norm(mu_early) < 0.5
    assert np.linalg.norm(mu_late - [5.0, 5.0]) < 0.5


# ---------------------------------------------------------------------------
# EM


def test_fit_em_recovers_two_clusters():
    rng = np.random.default_rng(1)
    a = rng.multivariate_normal([0, 0, 0], 0.01 * np.eye(3), size=120)
    b = rng.multivariate_normal([3, 3, 3], 0.01 * np.eye(3), size=120)
    gmm, log_liks = fit_em(np.concatenate([a, b]), 2, seed=0)
    assert log_liks[-1] >= log_liks[0]
    centers = gmm.means[np.argsort(gmm.means[:, 0])]
    assert np.max(np.abs(centers[0] - [0, 0, 0])) < 0.1
    assert np.max(np.abs(centers[1] - [3, 3, 3])) < 0.1
    assert np.allclose(gmm.priors.sum(), 1.0)


def test_fit_em_monotone_likelihood():
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((200, 3))
    _, log_liks = fit_em(pts, 3, seed=1)
    diffs = np.diff(log_liks)
    assert np.all(diffs > -1e-6)


def test_fit_em_needs_enough_points():
    with pytest.raises(ValueError):
        fit_em(np.zeros((15, 3)), 2, seed=0)


# ---------------------------------------------------------------------------
# estimator


def line_dataset(seed=0, n=10, horizon=25):
    rng = np.random.default_rng(seed)
    demos = []
    for _ in range(n):
        start = Frame.from_angle(0.0, rng.uniform(-0.1, 0.1, 2))
        goal = Frame.from_angle(0.0, np.array([1.0, 0.0]) + rng.uniform(-0.1, 0.1, 2))
        t = np.linspace(0, 1, horizon)[:, None]
        pts = (1 - t) * start.translation + t * goal.translation
        pts = pts + 0.005 * rng.standard_normal(pts.shape)
        demos.append(Demonstration(TaskQuery((start, goal)), Trajectory(pts)))
    return Dataset(tuple(demos))


@pytest.fixture(scope="module")
def fitted_tpgmm():
    model = TPGMM(n_components=3, variant="plain", seed=0)
    model.fit(line_dataset())
    return model


def test_tpgmm_reproduction(fitted_tpgmm):
    ds = line_dataset()
    traj = fitted_tpgmm.predict(ds.demos[0].query)
    assert traj.points.shape == (25, 2)
    err = np.linalg.norm(traj.points - ds.demos[0].trajectory.points, axis=1)
    assert err.mean() < 0.05


def test_tpgmm_endpoint_anchoring(fitted_tpgmm):
    # moving the goal frame moves the endpoint with it
    start = Frame.from_angle(0.0, [0.0, 0.0])
    goal = Frame.from_angle(0.0, [1.0, 0.6])
    traj = fitted_tpgmm.predict(TaskQuery((start, goal)))
    assert np.linalg.norm(traj.points[-1] - [1.0, 0.6]) < 0.1


def test_alpha_variant_tracks_and_serializes(tmp_path):
    ds = line_dataset()
    model = TPGMM(n_components=3, variant="alpha", gamma_grid=(0.0, 1.0, 4.0), seed=0)
    model.fit(ds)
    assert model.gamma_ in (0.0, 1.0, 4.0)
    traj = model.predict(ds.demos[0].query)
    assert model.last_alpha_track_.shape == (25, 2)
    assert np.allclose(model.last_alpha_track_.sum(axis=1), 1.0)
    path = tmp_path / "tpgmm.json"
    model.save(path)
    back = TPGMM.load(path)
    assert back.gamma_ == model.gamma_
    out = back.predict(ds.demos[0].query)
    assert np.allclose(out.points, traj.points, atol=1e-12)


def test_alpha_gamma_zero_equals_plain():
    ds = line_dataset()
    plain = TPGMM(n_components=3, variant="plain", seed=0).fit(ds)
    alpha = TPGMM(n_components=3, variant="alpha", gamma=0.0, seed=0).fit(ds)
    q = ds.demos[0].query
    assert np.max(np.abs(plain.predict(q).points - alpha.predict(q).points)) < EXACT


def test_tpgmm_rejects_wrong_query(fitted_tpgmm):
    with pytest.raises(ValueError):
        fitted_tpgmm.predict(TaskQuery((Frame.identity(2),)))


def test_tpgmm_schema_rejected(fitted_tpgmm):
    data = fitted_tpgmm.to_dict()
    data["schema"] = 9
    with pytest.raises(ValueError, match="schema"):
        TPGMM.from_dict(data)
