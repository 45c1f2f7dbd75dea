"""Autodiff engine checks against independent oracles.

Convolutions are compared with a direct nested-loop implementation,
gradients with central finite differences, and the transposed
convolution with the adjoint identity <conv(x), y> == <x, conv_t(y)>.
"""

import numpy as np
import pytest

from chromacodec import DimensionError, NumericError
from chromacodec import tensor as T


def loop_conv2d(x, w, b, stride, padding):
    """Reference convolution: plain nested loops, no vectorization."""
    n, c, h, wdt = x.shape
    co, ci, k, _ = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    oh = (h + 2 * padding - k) // stride + 1
    ow = (wdt + 2 * padding - k) // stride + 1
    out = np.zeros((n, co, oh, ow))
    for ni in range(n):
        for oc in range(co):
            for oy in range(oh):
                for ox in range(ow):
                    acc = 0.0
                    for ic in range(ci):
                        for ky in range(k):
                            for kx in range(k):
                                acc += (
                                    xp[ni, ic, oy * stride + ky, ox * stride + kx]
                                    * w[oc, ic, ky, kx]
                                )
                    out[ni, oc, oy, ox] = acc + (b[oc] if b is not None else 0.0)
    return out


class TestBasics:
    def test_add_known_values(self):
        a = T.Tensor([1.0, 2.0, 3.0])
        b = T.Tensor([10.0, 20.0, 30.0])
        assert np.array_equal((a + b).data, [11.0, 22.0, 33.0])

    def test_mul_broadcast_gradients(self):
        a = T.Tensor(np.ones((2, 3)), requires_grad=True)
        b = T.Tensor([[2.0], [3.0]], requires_grad=True)
        out = T.tsum(T.mul(a, b))
        T.backward(out)
        assert np.array_equal(a.grad, [[2.0, 2.0, 2.0], [3.0, 3.0, 3.0]])
        assert np.array_equal(b.grad, [[3.0], [3.0]])

    def test_mean_gradient_uniform(self):
        a = T.Tensor(np.arange(12.0).reshape(3, 4), requires_grad=True)
        T.backward(T.mean(a))
        assert np.allclose(a.grad, 1.0 / 12.0)

    def test_scalar_required_for_backward(self):
        a = T.Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(DimensionError):
            T.backward(a + a)

    def test_nonfinite_loss_rejected(self):
        a = T.Tensor([1e308], requires_grad=True)
        with np.errstate(over="ignore"):
            out = T.mul(a, a)  # overflows to inf
        with pytest.raises(NumericError):
            T.backward(out)

    def test_nonfinite_leaf_rejected(self):
        with pytest.raises(NumericError):
            T.Tensor([np.nan])

    def test_shared_subexpression_accumulates(self):
        # d/dx (x*x + x) = 2x + 1
        x = T.Tensor([3.0], requires_grad=True)
        T.backward(T.tsum(T.mul(x, x) + x))
        assert np.allclose(x.grad, [7.0])

    def test_detach_blocks_gradient(self):
        x = T.Tensor([2.0], requires_grad=True)
        y = T.mul(x.detach(), x)
        T.backward(T.tsum(y))
        assert np.allclose(x.grad, [2.0])

    def test_backward_deterministic(self):
        def run():
            rng = np.random.default_rng(7)
            x = T.Tensor(rng.standard_normal((4, 5)), requires_grad=True)
            w = T.Tensor(rng.standard_normal((4, 5)), requires_grad=True)
            y = T.tsum(T.square(T.mul(x, w) + T.tanh(x)))
            T.backward(y)
            return x.grad.copy(), w.grad.copy()

        g1, g2 = run(), run()
        assert np.array_equal(g1[0], g2[0])
        assert np.array_equal(g1[1], g2[1])


class TestActivations:
    def test_softmax_known_values(self):
        # softmax([0, ln 3]) = [1/4, 3/4]
        s = T.softmax(T.Tensor([0.0, np.log(3.0)]))
        assert np.allclose(s.data, [0.25, 0.75], atol=1e-12)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        x = T.Tensor(rng.standard_normal((3, 7, 5)) * 50.0)
        s = T.softmax(x, axis=-1)
        assert np.allclose(s.data.sum(axis=-1), 1.0, atol=1e-12)

    def test_softmax_shift_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((4, 6))
        a = T.softmax(T.Tensor(x), axis=-1).data
        b = T.softmax(T.Tensor(x + 123.0), axis=-1).data
        assert np.allclose(a, b, atol=1e-12)

    def test_sigmoid_extremes_stable(self):
        s = T.sigmoid(T.Tensor([-1000.0, 0.0, 1000.0]))
        assert np.allclose(s.data, [0.0, 0.5, 1.0], atol=1e-12)

    def test_leaky_relu_values(self):
        y = T.leaky_relu(T.Tensor([-10.0, 0.0, 10.0]), slope=0.2)
        assert np.allclose(y.data, [-2.0, 0.0, 10.0])

    def test_log_floor_keeps_zero_finite(self):
        y = T.log_floor(T.Tensor([0.0, 1.0]))
        assert np.isfinite(y.data).all()
        assert y.data[1] == 0.0


class TestConv:
    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(10)
        for stride, padding, k in [(1, 0, 3), (1, 1, 3), (2, 1, 4), (2, 0, 2), (1, 0, 1)]:
            x = rng.standard_normal((2, 3, 9, 8))
            w = rng.standard_normal((4, 3, k, k))
            b = rng.standard_normal(4)
            got = T.conv2d(T.Tensor(x), T.Tensor(w), T.Tensor(b), stride, padding).data
            want = loop_conv2d(x, w, b, stride, padding)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_identity_kernel(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((1, 1, 5, 5))
        w = np.ones((1, 1, 1, 1))
        got = T.conv2d(T.Tensor(x), T.Tensor(w), None, 1, 0).data
        assert np.array_equal(got, x)

    def test_channel_mismatch_raises(self):
        x = T.Tensor(np.zeros((1, 3, 8, 8)))
        w = T.Tensor(np.zeros((4, 2, 3, 3)))
        with pytest.raises(DimensionError):
            T.conv2d(x, w, None, 1, 1)

    def test_transpose_output_size(self):
        x = T.Tensor(np.zeros((1, 3, 5, 7)))
        w = T.Tensor(np.zeros((3, 2, 4, 4)))
        out = T.conv_transpose2d(x, w, None, stride=2)
        assert out.shape == (1, 2, 12, 16)

    def test_transpose_is_adjoint_of_conv(self):
        # <conv(x), y> == <x, conv_t(y)> for shared weights
        rng = np.random.default_rng(12)
        for stride, k in [(1, 3), (2, 2), (2, 4)]:
            x = rng.standard_normal((2, 3, 8, 8))
            w = rng.standard_normal((5, 3, k, k))
            fwd = T.conv2d(T.Tensor(x), T.Tensor(w), None, stride, 0).data
            y = rng.standard_normal(fwd.shape)
            # adjoint pairing uses the same (Cout, Cin, k, k) array as conv weights
            back = T.conv_transpose2d(T.Tensor(y), T.Tensor(np.ascontiguousarray(w)), None, stride)
            lhs = float((fwd * y).sum())
            rhs = float((x * back.data).sum())
            assert abs(lhs - rhs) / max(abs(lhs), 1.0) < 1e-10

    def test_maxpool_values_and_tiebreak(self):
        x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        assert T.maxpool2(T.Tensor(x)).data[0, 0, 0, 0] == 4.0
        # all-equal block: gradient goes to the first element scanned
        xe = T.Tensor(np.zeros((1, 1, 2, 2)), requires_grad=True)
        T.backward(T.tsum(T.maxpool2(xe)))
        assert np.array_equal(xe.grad, [[[[1.0, 0.0], [0.0, 0.0]]]])

    def test_maxpool_odd_input_raises(self):
        with pytest.raises(DimensionError):
            T.maxpool2(T.Tensor(np.zeros((1, 1, 3, 4))))


class TestGradients:
    """Central finite differences, h = 1e-5, relative error under 1e-4."""

    def test_conv2d(self):
        err = T.grad_check(
            lambda x, w, b: T.conv2d(x, w, b, 2, 1),
            [(2, 3, 6, 6), (4, 3, 3, 3), (4,)],
            seed=1,
        )
        assert err < 1e-4

    def test_conv_transpose2d(self):
        err = T.grad_check(
            lambda x, w, b: T.conv_transpose2d(x, w, b, 2),
            [(2, 3, 4, 4), (3, 2, 2, 2), (2,)],
            seed=2,
        )
        assert err < 1e-4

    def test_matmul(self):
        err = T.grad_check(lambda a, b: T.matmul(a, b), [(2, 3, 4), (2, 4, 5)], seed=3)
        assert err < 1e-4

    def test_softmax(self):
        err = T.grad_check(lambda x: T.softmax(x, axis=-1), [(3, 6)], seed=4)
        assert err < 1e-4

    def test_activations(self):
        for fn in (T.relu, T.leaky_relu, T.sigmoid, T.tanh, T.square):
            err = T.grad_check(lambda x, f=fn: f(x), [(4, 5)], seed=5)
            assert err < 1e-4, fn.__name__

    def test_norms_and_reductions(self):
        for fn in (T.mean, T.tsum, T.l1_norm, T.l2_norm):
            err = T.grad_check(lambda x, f=fn: f(x), [(3, 4)], seed=6)
            assert err < 1e-4, fn.__name__

    def test_maxpool(self):
        err = T.grad_check(lambda x: T.maxpool2(x), [(2, 2, 4, 4)], seed=7)
        assert err < 1e-4

    def test_concat_reshape_transpose(self):
        def fn(a, b):
            c = T.concat([a, b], axis=1)
            return T.transpose_last2(T.reshape(c, (2, 25, 2)))

        err = T.grad_check(fn, [(2, 2, 10), (2, 3, 10)], seed=8)
        assert err < 1e-4

    def test_composite_expression(self):
        def fn(x, w):
            h = T.tanh(T.matmul(x, w))
            return T.mean(T.square(h + T.sigmoid(h)))

        err = T.grad_check(fn, [(3, 4, 4), (3, 4, 4)], seed=9)
        assert err < 1e-4
