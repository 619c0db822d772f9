import numpy as np
import pytest
from scipy.stats import multivariate_normal

from salat.diffcore import Var, backward
from salat.diffcore.check import (
    finite_difference_gradient,
    gradient,
    max_relative_error,
)
from salat.flow import (
    FlowTopology,
    RealNVPFlow,
    _factorize_kernel,
    flow_forward,
    flow_inverse,
    gp_kernel,
    init_flow_params,
    nll_gp,
    nll_iid,
)
from salat.geometry import Trajectory

GRAD_TOL = 1e-4


def small_topology(horizon=8, dim=2, blocks=3, hidden=5, prior="iid"):
    return FlowTopology(
        dim=dim,
        horizon=horizon,
        num_blocks=blocks,
        hidden=hidden,
        prior=prior,
        scale_clamp=3.0,
        sigma_f=1.0,
        length_scale=1.0,
    )


def random_params(top, seed, scale=0.4):
    rng = np.random.default_rng(seed)
    params = init_flow_params(top, rng)
    flat = params.to_flat()
    flat += scale * rng.standard_normal(flat.size)
    params.from_flat(flat)
    return params


def test_identity_at_zero_init():
    top = small_topology()
    params = init_flow_params(top, np.random.default_rng(0))
    y = np.random.default_rng(1).standard_normal((8, 3, 2))
    z, logdet = flow_forward(top, params.as_vars(), Var(y))
    assert np.allclose(z.data, y, atol=1e-12)
    assert np.allclose(logdet.data, 0.0, atol=1e-12)


def test_invertibility_random_params():
    top = small_topology(horizon=12)
    params = random_params(top, seed=2)
    pv = params.as_vars()
    y = np.random.default_rng(3).standard_normal((12, 5, 2))
    z, _ = flow_forward(top, pv, Var(y))
    back = flow_inverse(top, pv, Var(z.data))
    assert np.max(np.abs(back.data - y)) < 1e-10


def test_logdet_matches_full_numerical_jacobian():
    top = small_topology(horizon=6)
    params = random_params(top, seed=4)
    pv = params.as_vars()
    rng = np.random.default_rng(5)
    y0 = rng.standard_normal((6, 1, 2))
    n = y0.size

    def fwd(flat):
        z, _ = flow_forward(top, pv, Var(flat.reshape(y0.shape)))
        return z.data.reshape(-1)

    _, logdet = flow_forward(top, pv, Var(y0))
    analytic = float(logdet.data.sum())
    jac = np.zeros((n, n))
    h = 1e-6
    flat0 = y0.reshape(-1)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        jac[:, i] = (fwd(flat0 + e) - fwd(flat0 - e)) / (2 * h)
    sign, numeric = np.linalg.slogdet(jac)
    assert sign == 1.0
    assert abs(numeric - analytic) / max(abs(numeric), 1.0) < GRAD_TOL


def test_gp_kernel_values():
    k = gp_kernel(4, sigma_f=1.0, length_scale=1.0)
    assert np.allclose(np.diag(k), 1.0)
    assert np.isclose(k[0, 1], np.exp(-0.5))
    assert np.isclose(k[0, 3], np.exp(-4.5))
    with pytest.raises(ValueError):
        gp_kernel(4, sigma_f=-1.0)


def test_nll_iid_identity_flow_oracle():
    # zero-initialized flow is the identity, so the NLL is the exact
    # standard-normal negative log-density of the input
    top = small_topology(horizon=5)
    params = init_flow_params(top, np.random.default_rng(0))
    y = np.random.default_rng(6).standard_normal((5, 3, 2))
    got = float(nll_iid(top, params.as_vars(), Var(y)).data)
    expected = 0.0
    for b in range(3):
        flat = y[:, b, :].reshape(-1)
        expected -= multivariate_normal(np.zeros(10), np.eye(10)).logpdf(flat)
    assert np.isclose(got, expected / 3, rtol=1e-10)


def test_nll_gp_identity_flow_oracle():
    top = small_topology(horizon=5, prior="gp")
    params = init_flow_params(top, np.random.default_rng(0))
    kernel = gp_kernel(5) + 1e-6 * np.eye(5)
    _, kinv, klogdet = _factorize_kernel(gp_kernel(5))
    y = np.random.default_rng(7).standard_normal((5, 2, 2))
    got = float(nll_gp(top, params.as_vars(), Var(y), kinv, klogdet).data)
    expected = 0.0
    for b in range(2):
        for d in range(2):
            expected -= multivariate_normal(np.zeros(5), kernel).logpdf(y[:, b, d])
    assert np.isclose(got, expected / 2, rtol=1e-9)


def test_nll_iid_gradient_check():
    top = small_topology(horizon=5, blocks=2, hidden=3)
    params = random_params(top, seed=8, scale=0.2)
    y = np.random.default_rng(9).standard_normal((5, 2, 2))

    def loss_fn(pv):
        return nll_iid(top, pv, Var(y))

    err = max_relative_error(
        gradient(loss_fn, params), finite_difference_gradient(loss_fn, params)
    )
    assert err < GRAD_TOL


def test_nll_gp_gradient_check():
    top = small_topology(horizon=5, blocks=2, hidden=3, prior="gp")
    params = random_params(top, seed=10, scale=0.2)
    _, kinv, klogdet = _factorize_kernel(gp_kernel(5))
    y = np.random.default_rng(11).standard_normal((5, 2, 2))

    def loss_fn(pv):
        return nll_gp(top, pv, Var(y), kinv, klogdet)

    err = max_relative_error(
        gradient(loss_fn, params), finite_difference_gradient(loss_fn, params)
    )
    assert err < GRAD_TOL


def test_scale_clamp_bounds_scales():
    top = small_topology()
    params = random_params(top, seed=12, scale=50.0)  # wild weights
    y = 10 * np.random.default_rng(13).standard_normal((8, 2, 2))
    z, logdet = flow_forward(top, params.as_vars(), Var(y))
    assert np.all(np.isfinite(z.data))
    # per-step log-det is bounded by clamp * num scaled dims * blocks
    assert np.max(np.abs(logdet.data)) <= 3.0 * 2 * top.num_blocks + 1e-9


def make_line_trajs(n, horizon, seed, shift=0.0):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, horizon)
    out = []
    for _ in range(n):
        a = rng.normal(0.0, 0.3)
        pts = np.stack([t, shift + a * t + 0.02 * rng.standard_normal(horizon)], axis=1)
        out.append(Trajectory(pts))
    return out


def test_fit_improves_likelihood_and_roundtrips(tmp_path):
    trajs = make_line_trajs(12, 10, seed=14)
    flow = RealNVPFlow(num_blocks=2, hidden=6, prior="iid", epochs=60, lr=5e-3, seed=0)
    flow.fit(trajs)
    assert flow.loss_history_[-1] < flow.loss_history_[0]
    # encode/decode consistency on held-out data
    held = make_line_trajs(3, 10, seed=15)
    latents = flow.transform(held)
    back = flow.inverse_transform(latents)
    for t, b in zip(held, back):
        assert np.allclose(t.points, b.points, atol=1e-8)
    # serialization reproduces the exact transform
    path = tmp_path / "flow.json"
    flow.save(path)
    other = RealNVPFlow.load(path)
    for z1, z2 in zip(latents, other.transform(held)):
        assert np.allclose(z1, z2, atol=1e-12)


def test_mean_latent_and_sampling_shapes():
    trajs = make_line_trajs(8, 9, seed=16)
    flow = RealNVPFlow(num_blocks=2, hidden=4, prior="gp", epochs=5, seed=1)
    flow.fit(trajs)
    assert flow.mean_latent().shape == (9, 2)
    z = flow.sample_latent(np.random.default_rng(0))
    assert z.shape == (9, 2)
    assert flow.decode_latent(z).points.shape == (9, 2)


def test_gp_samples_are_smoother_than_iid():
    # unit length scale at unit spacing gives step variance 2(1 - e^-0.5),
    # about 0.39x the white-noise step variance; check the direction with
    # headroom rather than the exact ratio
    top = small_topology(horizon=50, prior="gp")
    flow = RealNVPFlow(num_blocks=2, hidden=4, prior="gp", epochs=1, seed=2)
    flow.fit(make_line_trajs(6, 50, seed=17))
    rng = np.random.default_rng(18)
    gp_steps = []
    iid_steps = []
    for _ in range(20):
        z = flow.sample_latent(rng)
        gp_steps.append(np.abs(np.diff(z, axis=0)).mean())
        iid_steps.append(np.abs(np.diff(rng.standard_normal(z.shape), axis=0)).mean())
    assert np.mean(gp_steps) < 0.8 * np.mean(iid_steps)


def test_fit_rejects_mismatched_horizon():
    flow = RealNVPFlow(num_blocks=2, hidden=4, epochs=2, seed=0)
    flow.fit(make_line_trajs(6, 8, seed=19))
    with pytest.raises(ValueError):
        flow.transform(make_line_trajs(2, 9, seed=20))


def test_flow_schema_rejected():
    flow = RealNVPFlow(num_blocks=2, hidden=4, epochs=2, seed=0)
    flow.fit(make_line_trajs(6, 8, seed=21))
    data = flow.to_dict()
    data["schema"] = 42
    with pytest.raises(ValueError, match="schema"):
        RealNVPFlow.from_dict(data)
