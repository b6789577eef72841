"""Autodiff engine: hand-computed forward values, finite-difference gradient
oracles, optimizer arithmetic, and numeric guards."""

import numpy as np
import pytest

import sgir.autodiff as ad
from sgir.autodiff import Tensor
from sgir.errors import NumericsError, ShapeError
from helpers import (fd_gradient, gradient_mismatches,
                     run_loss_gradient_suite, run_primitive_gradient_suite)


# ---------------------------------------------------------------------------
# tensor basics

def test_tensor_promotes_scalars_and_rows_to_2d():
    assert Tensor(3.0).shape == (1, 1)
    assert Tensor([1.0, 2.0, 3.0]).shape == (1, 3)
    assert Tensor([[1.0], [2.0]]).shape == (2, 1)


def test_tensor_rejects_higher_rank():
    with pytest.raises(ShapeError):
        Tensor(np.zeros((2, 2, 2)))


def test_item_requires_scalar():
    assert Tensor(5.0).item() == 5.0
    with pytest.raises(ShapeError):
        Tensor([[1.0, 2.0]]).item()


def test_detach_stops_gradient_flow():
    x = Tensor([[2.0]], requires_grad=True)
    y = x.detach()
    assert not y.requires_grad
    ad.backward(ad.sum_all(ad.mul(y, y)))
    assert x.grad is None


# ---------------------------------------------------------------------------
# forward values, computed by hand

def test_matmul_value():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    b = Tensor([[5.0, 6.0], [7.0, 8.0]])
    assert np.array_equal(ad.matmul(a, b).data,
                          [[19.0, 22.0], [43.0, 50.0]])


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        ad.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_add_broadcasts_single_row():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    row = Tensor([[10.0, 20.0]])
    assert np.array_equal(ad.add(a, row).data, [[11.0, 22.0], [13.0, 24.0]])


def test_elementwise_values():
    x = Tensor([[-1.0, 0.0, 2.0]])
    assert np.array_equal(ad.relu(x).data, [[0.0, 0.0, 2.0]])
    assert np.array_equal(ad.clamp(x, -0.5, 1.0).data, [[-0.5, 0.0, 1.0]])
    assert ad.sigmoid(Tensor(0.0)).item() == 0.5
    assert ad.exp(Tensor(0.0)).item() == 1.0
    assert ad.log(Tensor(1.0)).item() == 0.0


def test_reductions():
    x = Tensor([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ad.sum_rows(x).data, [[4.0, 6.0]])
    assert ad.sum_all(x).item() == 10.0
    assert ad.mean_all(x).item() == 2.5
    assert np.array_equal(ad.transpose(x).data, [[1.0, 3.0], [2.0, 4.0]])


def test_mse_loss_value():
    pred = Tensor([[1.0, 2.0], [3.0, 4.0]])
    target = Tensor([[0.0, 0.0], [0.0, 0.0]])
    assert ad.mse_loss(pred, target).item() == (1.0 + 4.0 + 9.0 + 16.0) / 4.0


def test_bce_with_logits_value_by_hand():
    # loss per entry: pw*y*softplus(-x) + (1-y)*softplus(x), mean over support
    logits = Tensor([[0.0, 2.0]])
    target = Tensor([[1.0, 0.0]])
    expected = (np.log(2.0) + np.log1p(np.exp(2.0))) / 2.0
    got = ad.weighted_bce_with_logits(logits, target).item()
    assert got == pytest.approx(expected, abs=1e-15)


def test_bce_with_logits_matches_probability_form():
    rng = np.random.default_rng(5)
    logits = rng.standard_normal((4, 4)) * 2.0
    target = (rng.random((4, 4)) < 0.5).astype(np.float64)
    probs = 1.0 / (1.0 + np.exp(-logits))
    a = ad.weighted_bce_with_logits(Tensor(logits), Tensor(target), 1.3, 0.9)
    b = ad.weighted_bce_loss(Tensor(probs), Tensor(target), 1.3, 0.9)
    assert a.item() == pytest.approx(b.item(), rel=1e-9)


def test_bce_rejects_non_binary_targets_and_empty_mask():
    with pytest.raises(ShapeError):
        ad.weighted_bce_with_logits(Tensor([[0.0]]), Tensor([[0.5]]))
    with pytest.raises(ShapeError):
        ad.weighted_bce_with_logits(Tensor([[0.0]]), Tensor([[1.0]]),
                                    mask=np.zeros((1, 1)))


def test_kl_gaussian_hand_values():
    # standard normal posterior: exactly zero
    mu = Tensor(np.zeros((2, 3)))
    ls = Tensor(np.zeros((2, 3)))
    assert ad.kl_gaussian(mu, ls).item() == 0.0
    # one row, one dim: 0.5 * (mu^2 + sigma^2 - 1 - 2 log sigma)
    val = ad.kl_gaussian(Tensor([[2.0]]), Tensor([[0.5]])).item()
    expected = 0.5 * (4.0 + np.exp(1.0) - 1.0 - 1.0)
    assert val == pytest.approx(expected, abs=1e-12)


def test_kl_gaussian_averages_over_rows_sums_over_dims():
    mu = np.array([[1.0, 0.0], [0.0, 1.0]])
    val = ad.kl_gaussian(Tensor(mu), Tensor(np.zeros((2, 2)))).item()
    assert val == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# gradients against finite differences

def test_primitive_gradients_match_finite_differences():
    failures = run_primitive_gradient_suite(n_seeds=20)
    assert not failures, "\n".join(failures)


def test_composite_loss_gradients_match_finite_differences():
    failures = run_loss_gradient_suite(n_seeds=10)
    assert not failures, "\n".join(failures)


def test_gradient_accumulates_across_uses():
    x = Tensor([[3.0]], requires_grad=True)
    y = ad.add(ad.mul(x, x), x)        # y = x^2 + x, dy/dx = 2x + 1
    ad.backward(y)
    assert x.grad[0, 0] == pytest.approx(7.0, abs=1e-12)


def test_zero_grad_resets():
    x = Tensor([[3.0]], requires_grad=True)
    ad.backward(ad.mul(x, x))
    ad.zero_grad([x])
    assert x.grad is None


def test_fd_helper_flags_wrong_gradients():
    x = Tensor([[1.0, 2.0]], requires_grad=True)
    ad.backward(ad.sum_all(ad.mul(x, x)))
    wrong = x.grad + 1.0
    expected = fd_gradient(lambda: float((x.data ** 2).sum()), x.data)
    assert gradient_mismatches(wrong, expected, "broken")


# ---------------------------------------------------------------------------
# numeric guards

@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_overflow_raises_numerics_error():
    with pytest.raises(NumericsError):
        ad.exp(Tensor([[1000.0]]))


def test_log_of_zero_raises_numerics_error():
    with pytest.raises(NumericsError):
        ad.log(Tensor([[0.0]]))


# ---------------------------------------------------------------------------
# optimizer and schedule

def test_adamw_two_steps_match_hand_computation():
    lr, b1, b2, eps, wd = 0.1, 0.9, 0.999, 1e-8, 0.01
    p = Tensor(np.array([[1.0, -2.0]]), requires_grad=True)
    state = ad.init_optimizer([p], lr=lr, beta1=b1, beta2=b2, eps=eps,
                              weight_decay=wd)
    theta = np.array([[1.0, -2.0]])
    m = np.zeros((1, 2))
    v = np.zeros((1, 2))
    for t, grad in enumerate(([[0.5, -1.0]], [[-0.25, 2.0]]), start=1):
        g = np.array(grad)
        p.grad = g.copy()
        ad.adamw_step(state, [p])
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        theta = theta * (1 - lr * wd) - lr * m_hat / (np.sqrt(v_hat) + eps)
        assert np.allclose(p.data, theta, atol=1e-15)


def test_adamw_weight_decay_is_decoupled():
    # with zero gradient the update is exactly the decay shrink
    p = Tensor(np.array([[4.0]]), requires_grad=True)
    state = ad.init_optimizer([p], lr=0.5, weight_decay=0.1)
    p.grad = np.zeros((1, 1))
    ad.adamw_step(state, [p])
    assert p.data[0, 0] == pytest.approx(4.0 * (1 - 0.5 * 0.1), abs=1e-15)


def test_adamw_refuses_missing_or_bad_gradients():
    p = Tensor(np.ones((1, 1)), requires_grad=True)
    state = ad.init_optimizer([p])
    with pytest.raises(NumericsError):
        ad.adamw_step(state, [p])
    p.grad = np.array([[np.nan]])
    with pytest.raises(NumericsError):
        ad.adamw_step(state, [p])
    with pytest.raises(ShapeError):
        ad.adamw_step(state, [p, p])


def test_lr_schedule_decays_exponentially():
    sched = ad.LrSchedule(base_lr=0.2, gamma=0.5)
    opt = ad.init_optimizer([], lr=0.2)
    assert sched.lr == 0.2
    ad.lr_step(sched, [opt])
    assert sched.lr == 0.1 and opt.lr == 0.1
    ad.lr_step(sched, [opt])
    assert sched.lr == pytest.approx(0.05) and opt.lr == pytest.approx(0.05)
