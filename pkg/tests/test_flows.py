import math

import numpy as np
import pytest

from ucinfer.errors import NonFiniteInput
from ucinfer.flows import FlowModel, engine, load_checkpoint, save_checkpoint
from ucinfer.flows.engine import Tensor


def random_model(kind="maf", dim=3, context_dim=4, seed=42, hidden=(32, 32, 32)):
    return FlowModel(kind, dim=dim, context_dim=context_dim,
                     hidden_sizes=hidden, rng=np.random.default_rng(seed),
                     zero_init_output=False)


def test_identity_flow_reproduces_standard_normal_density():
    model = FlowModel("maf", dim=2, context_dim=3)
    lp = model.log_prob(np.zeros(2), np.zeros(3))
    assert lp == pytest.approx(-math.log(2 * math.pi), abs=1e-9)


def test_identity_flow_samples_are_destandardized_base_draws():
    model = FlowModel("maf", dim=2, context_dim=1)
    model.set_standardizer([1.0, -2.0], [2.0, 0.5], [0.0], [1.0])
    rng_a, rng_b = np.random.default_rng(3), np.random.default_rng(3)
    samples = model.sample(np.zeros(1), 100, rng_a)
    z = rng_b.standard_normal((100, 2))
    np.testing.assert_allclose(samples, z * [2.0, 0.5] + [1.0, -2.0], atol=1e-12)


@pytest.mark.parametrize("kind", ["maf", "nsf"])
def test_invertibility_round_trip(kind):
    model = random_model(kind)
    rng = np.random.default_rng(0)
    n = 1000
    context = rng.normal(size=4)
    c = np.broadcast_to(model.standardize_context(context), (n, 4)).copy()
    z = rng.standard_normal((n, 3))
    u = z.copy()
    for tr in reversed(model.transforms):
        u = tr.inverse(u, c)
    with engine.no_grad():
        back = Tensor(u)
        for tr in model.transforms:
            back, _ = tr.forward_density(back, Tensor(c))
    assert np.abs(back.data - z).max() < 1e-6


@pytest.mark.parametrize("kind", ["maf", "nsf"])
def test_gradients_match_finite_differences(kind):
    model = random_model(kind, dim=3, context_dim=2, hidden=(16, 16, 16))
    rng = np.random.default_rng(1)
    theta = rng.normal(size=(8, 3))
    context = rng.normal(size=(8, 2))
    value, grads = model.grad_mean_log_prob(theta, context)
    params = model.parameters()
    picker = np.random.default_rng(2)
    for _ in range(25):
        pi = int(picker.integers(len(params)))
        p = params[pi]
        idx = np.unravel_index(int(picker.integers(p.data.size)), p.data.shape)
        h = 1e-5 * max(1.0, abs(p.data[idx]))
        orig = p.data[idx]
        p.data[idx] = orig + h
        up = float(np.mean(model.log_prob(theta, context)))
        p.data[idx] = orig - h
        down = float(np.mean(model.log_prob(theta, context)))
        p.data[idx] = orig
        fd = (up - down) / (2 * h)
        an = grads[pi][idx]
        assert abs(fd - an) <= 1e-4 * max(abs(fd), abs(an), 1e-8)


def test_unused_parameter_has_zero_gradient():
    model = random_model("maf", dim=2, context_dim=6, hidden=(8, 8))
    # second transform conditioner's dim-0 output ignores masked inputs;
    # simpler global check: a context weight row for a context coordinate
    # that is always zero receives zero gradient
    theta = np.random.default_rng(0).normal(size=(16, 2))
    context = np.zeros((16, 6))
    context[:, :2] = np.random.default_rng(1).normal(size=(16, 2))
    _, grads = model.grad_mean_log_prob(theta, context)
    params = model.parameters()
    v0 = model.transforms[0].conditioner.context_weights[0]
    gi = params.index(v0)
    np.testing.assert_array_equal(grads[gi][2:, :], 0.0)


def test_first_adam_like_gradient_is_finite_on_identity_model():
    model = FlowModel("maf", dim=3, context_dim=2)
    theta = np.random.default_rng(0).normal(size=(32, 3))
    context = np.random.default_rng(1).normal(size=(32, 2))
    value, grads = model.grad_mean_log_prob(theta, context)
    assert math.isfinite(value)
    assert all(np.all(np.isfinite(g)) for g in grads)


def test_log_prob_density_normalizes_on_2d_grid():
    model = random_model("maf", dim=2, context_dim=2, seed=7)
    context = np.array([0.3, -0.8])
    rng = np.random.default_rng(0)
    samples = model.sample(context, 4000, rng)
    lo = samples.min(axis=0) - 2.0
    hi = samples.max(axis=0) + 2.0
    n_grid = 400
    xs = np.linspace(lo[0], hi[0], n_grid)
    ys = np.linspace(lo[1], hi[1], n_grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    lp = model.log_prob(pts, np.broadcast_to(context, (pts.shape[0], 2)).copy())
    dens = np.exp(lp).reshape(n_grid, n_grid)
    mass = np.trapezoid(np.trapezoid(dens, ys, axis=1), xs)
    assert 0.97 <= mass <= 1.01


def test_standardizer_shifts_densities_by_constant():
    model = random_model("maf", dim=3, context_dim=2, seed=9)
    rng = np.random.default_rng(4)
    theta = rng.normal(size=(50, 3))
    context = rng.normal(size=2)
    base = model.log_prob(theta, np.broadcast_to(context, (50, 2)).copy())
    order_before = np.argsort(base)

    model.set_standardizer(
        np.zeros(3), np.array([2.0, 3.0, 4.0]), np.zeros(2), np.ones(2)
    )
    shifted = model.log_prob(
        theta * [2.0, 3.0, 4.0], np.broadcast_to(context, (50, 2)).copy()
    )
    diff = shifted - base
    np.testing.assert_allclose(diff, diff[0], atol=1e-9)
    np.testing.assert_array_equal(np.argsort(shifted), order_before)


def test_sample_log_prob_round_trip_finite():
    model = random_model("nsf", dim=2, context_dim=3, seed=11)
    rng = np.random.default_rng(0)
    context = rng.normal(size=3)
    samples = model.sample(context, 64, rng)
    lp = model.log_prob(samples, np.broadcast_to(context, (64, 3)).copy())
    assert np.all(np.isfinite(lp))


def test_non_finite_inputs_rejected():
    model = FlowModel("maf", dim=2, context_dim=2)
    with pytest.raises(NonFiniteInput):
        model.log_prob(np.array([np.nan, 0.0]), np.zeros(2))


def test_checkpoint_round_trip_bit_exact(tmp_path):
    for kind in ("maf", "nsf"):
        model = random_model(kind, dim=3, context_dim=5, seed=13,
                             hidden=(16, 16))
        model.set_standardizer(
            np.array([1.0, 2.0, 3.0]), np.array([0.5, 1.5, 2.5]),
            np.arange(5.0), np.ones(5) * 0.25,
        )
        model.config_hash = "abc123"
        path = tmp_path / f"{kind}.ckpt"
        save_checkpoint(path, model)
        again = load_checkpoint(path)
        assert again.flow_kind == kind
        assert again.config_hash == "abc123"
        for a, b in zip(model.parameters(), again.parameters()):
            np.testing.assert_array_equal(a.data, b.data)
        theta = np.random.default_rng(1).normal(size=(10, 3))
        ctx = np.random.default_rng(2).normal(size=(10, 5))
        np.testing.assert_array_equal(
            model.log_prob(theta, ctx), again.log_prob(theta, ctx)
        )
        # second save is byte-identical
        path2 = tmp_path / f"{kind}2.ckpt"
        save_checkpoint(path2, again)
        assert path.read_bytes() == path2.read_bytes()


def test_spline_identity_init_is_identity_map():
    model = FlowModel("nsf", dim=3, context_dim=2)
    tr = model.transforms[0]
    x = np.random.default_rng(0).uniform(-4.5, 4.5, size=(20, 3))
    with engine.no_grad():
        z, logdet = tr.forward_density(Tensor(x), Tensor(np.zeros((20, 2))))
    np.testing.assert_allclose(z.data, x, atol=1e-12)
    np.testing.assert_allclose(logdet.data, 0.0, atol=1e-12)


def test_spline_tails_are_identity():
    model = random_model("nsf", dim=2, context_dim=2, seed=5)
    tr = model.transforms[0]
    x = np.array([[7.0, -6.2], [11.0, 9.5]])
    with engine.no_grad():
        z, logdet = tr.forward_density(Tensor(x), Tensor(np.zeros((2, 2))))
    np.testing.assert_array_equal(z.data, x)
    np.testing.assert_array_equal(logdet.data, 0.0)


def test_spline_log_derivative_matches_finite_differences():
    model = random_model("nsf", dim=1, context_dim=2, seed=21, hidden=(16, 16))
    tr = model.transforms[0]
    rng = np.random.default_rng(3)
    c = rng.normal(size=(100, 2))
    x = rng.uniform(-4.8, 4.8, size=(100, 1))
    h = 1e-6
    with engine.no_grad():
        _, logdet = tr.forward_density(Tensor(x), Tensor(c))
        zp, _ = tr.forward_density(Tensor(x + h), Tensor(c))
        zm, _ = tr.forward_density(Tensor(x - h), Tensor(c))
    fd = (zp.data - zm.data) / (2 * h)
    analytic = np.exp(logdet.data)
    rel = np.abs(fd[:, 0] - analytic) / np.abs(analytic)
    assert rel.max() < 1e-5


def test_change_of_variables_recomputation():
    """log_prob equals base log-density of the recovered z plus log-dets."""
    model = random_model("maf", dim=3, context_dim=2, seed=17)
    rng = np.random.default_rng(2)
    theta = rng.normal(size=(20, 3))
    context = rng.normal(size=(20, 2))
    lp = model.log_prob(theta, context)

    u = model.standardize_theta(theta)
    c = model.standardize_context(context)
    with engine.no_grad():
        z = Tensor(u)
        logdet_total = np.zeros(20)
        for tr in model.transforms:
            z, logdet = tr.forward_density(z, Tensor(c))
            logdet_total += logdet.data
    base = -0.5 * (z.data ** 2).sum(axis=1) - 1.5 * math.log(2 * math.pi)
    manual = base + logdet_total + model.standardization_log_jacobian
    np.testing.assert_array_equal(lp, manual)
