"""Optimizer arithmetic, training-set construction, and loop behavior."""

import numpy as np
import pytest

from chromacodec import ConfigError, NumericError
from chromacodec import colorspace as cs
from chromacodec import losses, network, pipeline, trainer
from chromacodec import tensor as T


def make_sequence(n, w=16, h=16, seed=0):
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(n):
        rgb = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        frames.append(cs.rgb_to_ycbcr(rgb))
    return frames


def snapshot(store):
    return {name: t.data.copy() for name, t in store.items()}


def stores_equal(a, b):
    return all(np.array_equal(a[k], b[k]) for k in a) and a.keys() == b.keys()


class TestAdam:
    def test_zero_gradient_keeps_weights(self):
        t = T.Tensor([1.0, 2.0], requires_grad=True)
        state = trainer.AdamState([t])
        trainer.adam_step([t], state, trainer.TrainConfig())
        assert np.array_equal(t.data, [1.0, 2.0])
        assert state.t == 1

    def test_first_step_closed_form(self):
        cfg = trainer.TrainConfig(learning_rate=2e-4)
        t = T.Tensor(5.0, requires_grad=True)
        t.grad = np.asarray(1.0)
        trainer.adam_step([t], trainer.AdamState([t]), cfg)
        # bias correction makes the first step exactly -lr/(1+eps)
        want = 5.0 - cfg.learning_rate / (1.0 + cfg.epsilon)
        assert abs(float(t.data) - want) < 1e-15

    def test_moments_decay_without_gradient(self):
        cfg = trainer.TrainConfig()
        t = T.Tensor(0.0, requires_grad=True)
        state = trainer.AdamState([t])
        t.grad = np.asarray(1.0)
        trainer.adam_step([t], state, cfg)
        m1 = state.m[0].copy()
        t.grad = None
        trainer.adam_step([t], state, cfg)
        assert float(state.m[0]) == float(m1) * cfg.beta1

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            trainer.TrainConfig(learning_rate=0.0)
        with pytest.raises(ConfigError):
            trainer.TrainConfig(steps=-1)


class TestBuildTrainingSet:
    def test_gop6_12_frames_two_pairs(self):
        frames = make_sequence(12)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(12, 6), qp=32)
        assert len(pairs) == 2

    def test_gop6_13_frames_three_pairs(self):
        frames = make_sequence(13)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(13, 6), qp=32)
        assert len(pairs) == 3

    def test_input_is_lossy(self):
        frames = make_sequence(1, seed=3)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(1, 6), qp=37)
        pristine = network.luma_to_unit(frames[0].y.samples)[None, None]
        assert not np.array_equal(pairs[0].luma, pristine)

    def test_target_is_pristine(self):
        frames = make_sequence(1, seed=4)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(1, 6), qp=37)
        want = network.chroma_to_unit(frames[0].cb.samples)
        assert np.array_equal(pairs[0].chroma[0, 0], want)

    def test_ranges(self):
        frames = make_sequence(1, seed=5)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(1, 6), qp=27)
        assert pairs[0].luma.min() >= -1.0 and pairs[0].luma.max() <= 1.0
        assert pairs[0].chroma.min() >= -1.0 and pairs[0].chroma.max() <= 1.0


def tiny_setup(w=16, h=16, seed=0, **cfg_kw):
    net_cfg = network.NetworkConfig(width=w, height=h, base_channels=8)
    gen = network.init_generator(net_cfg, seed)
    disc = network.init_discriminator(net_cfg, seed + 1)
    frames = make_sequence(1, w=w, h=h, seed=seed)
    pairs = trainer.build_training_set(frames, pipeline.split_gops(1, 6), qp=32)
    return net_cfg, gen, disc, pairs


class TestTrainLoop:
    def test_zero_steps_leaves_weights(self):
        net_cfg, gen, disc, pairs = tiny_setup(seed=10)
        before_g, before_d = snapshot(gen), snapshot(disc)
        history = trainer.train(gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=0))
        assert history == []
        assert stores_equal(snapshot(gen), before_g)
        assert stores_equal(snapshot(disc), before_d)

    def test_history_length_and_fields(self):
        net_cfg, gen, disc, pairs = tiny_setup(seed=11)
        history = trainer.train(gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=3))
        assert len(history) == 3
        assert [r.step for r in history] == [0, 1, 2]
        assert all(np.isfinite(r.total) for r in history)

    def test_loss_decreases_over_50_steps(self):
        net_cfg = network.NetworkConfig(width=32, height=32, base_channels=8)
        gen = network.init_generator(net_cfg, 7)
        disc = network.init_discriminator(net_cfg, 8)
        frames = make_sequence(1, w=32, h=32, seed=7)
        pairs = trainer.build_training_set(frames, pipeline.split_gops(1, 6), qp=32)
        history = trainer.train(
            gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=50, seed=7)
        )
        assert history[-1].total < history[0].total

    def test_deterministic_trajectories(self):
        finals = []
        for _ in range(2):
            net_cfg, gen, disc, pairs = tiny_setup(seed=12)
            trainer.train(gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=4, seed=12))
            finals.append((snapshot(gen), snapshot(disc)))
        assert stores_equal(finals[0][0], finals[1][0])
        assert stores_equal(finals[0][1], finals[1][1])

    def test_nonfinite_aborts_with_step_index(self):
        net_cfg, gen, disc, pairs = tiny_setup(seed=13)
        gen["head.w"].data[0, 0, 0, 0] = np.nan
        with pytest.raises(NumericError, match="step 0"):
            trainer.train(gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=1))

    def test_empty_pairs_rejected(self):
        net_cfg, gen, disc, _ = tiny_setup(seed=14)
        with pytest.raises(ConfigError):
            trainer.train(gen, disc, net_cfg, [], trainer.TrainConfig(steps=1))

    def test_pure_mse_converges_on_constant_chroma(self):
        # optimizer sanity floor: fit a constant-chroma target with MSE alone
        net_cfg = network.NetworkConfig(width=8, height=8, base_channels=8)
        gen = network.init_generator(net_cfg, 21)
        disc = network.init_discriminator(net_cfg, 22)
        rng = np.random.default_rng(21)
        luma = rng.uniform(-1, 1, (1, 1, 8, 8))
        chroma = np.full((1, 2, 8, 8), 0.2)
        pairs = [trainer.TrainingPair(luma, chroma)]
        cfg = trainer.TrainConfig(
            steps=400,
            weights=losses.LossWeights(0.0, 1.0, 0.0, 0.0),
            d_steps_per_g_step=0,
        )
        history = trainer.train(gen, disc, net_cfg, pairs, cfg)
        assert min(r.total for r in history) < 1e-3

    def test_csv_export(self):
        net_cfg, gen, disc, pairs = tiny_setup(seed=15)
        history = trainer.train(gen, disc, net_cfg, pairs, trainer.TrainConfig(steps=2))
        text = trainer.history_to_csv(history)
        lines = text.strip().splitlines()
        assert lines[0] == "step,L_GAN,L_MSE,L_content,L_color,L_f,L_D"
        assert len(lines) == 3
