"""Architecture contracts: ladders, shapes, ranges, determinism, ablation."""

import numpy as np
import pytest

from deepgi.autodiff import Adam, Tensor, backward, l1_loss, tmean
from deepgi.nets import (
    DiscriminatorConfig,
    GeneratorConfig,
    build_discriminator,
    build_generator,
)


class TestGeneratorConfig:
    def test_ladder_k32_depth8(self):
        cfg = GeneratorConfig(base_layer_k=32, depth=8)
        assert cfg.encoder_channels() == [32, 64, 128, 256, 256, 256, 256, 256]
        assert cfg.channel_cap == 256

    def test_decoder_mirrors_encoder(self):
        cfg = GeneratorConfig(base_layer_k=64, depth=8)
        assert cfg.decoder_channels() == [512, 512, 512, 512, 256, 128, 64, 3]

    def test_validation(self):
        with pytest.raises(ValueError, match="base_layer_k"):
            GeneratorConfig(base_layer_k=0)
        with pytest.raises(ValueError, match="depth"):
            GeneratorConfig(base_layer_k=32, depth=0)

    def test_parameter_count_matches_hand_computation(self):
        gen = build_generator(GeneratorConfig(base_layer_k=32, depth=8), init_seed=0)
        # encoder: conv w + bias, batchnorm gamma+beta everywhere but stage 0
        expected = (
            (32 * 12 * 16 + 32)
            + (64 * 32 * 16 + 64 + 2 * 64)
            + (128 * 64 * 16 + 128 + 2 * 128)
            + (256 * 128 * 16 + 256 + 2 * 256)
            + 4 * (256 * 256 * 16 + 256 + 2 * 256)
        )
        # decoder: stage 0 takes the 256-wide bottleneck alone, stages 1..7
        # take previous output concatenated with the mirrored encoder output
        expected += (
            (256 * 256 * 16 + 256 + 2 * 256)
            + 3 * (512 * 256 * 16 + 256 + 2 * 256)
            + (512 * 128 * 16 + 128 + 2 * 128)
            + ((128 + 128) * 64 * 16 + 64 + 2 * 64)
            + ((64 + 64) * 32 * 16 + 32 + 2 * 32)
            + ((32 + 32) * 3 * 16 + 3)
        )
        assert gen.num_parameters() == expected

    def test_first_encoder_weight_shape_k64(self):
        gen = build_generator(GeneratorConfig(base_layer_k=64, depth=8), init_seed=1)
        assert gen.params["enc0.w"].data.shape == (64, 12, 4, 4)

    def test_same_seed_builds_identical(self):
        cfg = GeneratorConfig(base_layer_k=16, depth=6)
        a = build_generator(cfg, init_seed=42)
        b = build_generator(cfg, init_seed=42)
        assert sorted(a.params) == sorted(b.params)
        for name in a.params:
            np.testing.assert_array_equal(a.params[name].data, b.params[name].data)

    def test_different_seed_differs(self):
        cfg = GeneratorConfig(base_layer_k=16, depth=6)
        a = build_generator(cfg, init_seed=1)
        b = build_generator(cfg, init_seed=2)
        assert not np.array_equal(a.params["enc0.w"].data, b.params["enc0.w"].data)

    def test_init_statistics(self):
        gen = build_generator(GeneratorConfig(base_layer_k=32, depth=6), init_seed=7)
        w = gen.params["enc3.w"].data
        assert abs(float(w.mean())) < 0.005
        assert abs(float(w.std()) - 0.02) < 0.005
        np.testing.assert_array_equal(gen.params["enc3.b"].data, 0.0)
        np.testing.assert_array_equal(gen.params["enc3.beta"].data, 0.0)
        assert abs(float(gen.params["enc3.gamma"].data.mean()) - 1.0) < 0.02


class TestGeneratorForward:
    @pytest.mark.parametrize("depth", [6, 7, 8])
    def test_shape_law(self, depth):
        s = 2**depth
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=depth), init_seed=0)
        x = Tensor(np.zeros((1, 12, s, s), dtype=np.float32))
        y = gen.forward(x)
        assert y.data.shape == (1, 3, s, s)

    def test_full_size_output_in_range(self):
        gen = build_generator(GeneratorConfig(base_layer_k=32, depth=8), init_seed=0)
        rng = np.random.default_rng(0)
        x = Tensor(rng.uniform(-1, 1, size=(1, 12, 256, 256)).astype(np.float32))
        y = gen.forward(x)
        assert y.data.shape == (1, 3, 256, 256)
        assert float(np.abs(y.data).max()) <= 1.0
        assert np.isfinite(y.data).all()

    def test_eval_forward_deterministic(self):
        gen = build_generator(GeneratorConfig(base_layer_k=8, depth=6), init_seed=5)
        x = Tensor(np.random.default_rng(1).uniform(-1, 1, (2, 12, 64, 64)).astype(np.float32))
        np.testing.assert_array_equal(gen.forward(x).data, gen.forward(x).data)

    def test_train_mode_requires_rng(self):
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=6), init_seed=0)
        x = Tensor(np.zeros((1, 12, 64, 64), dtype=np.float32))
        with pytest.raises(ValueError, match="rng"):
            gen.forward(x, training=True)

    def test_wrong_channel_count_rejected(self):
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=6), init_seed=0)
        x = Tensor(np.zeros((1, 3, 64, 64), dtype=np.float32))
        with pytest.raises(ValueError, match="12"):
            gen.forward(x)

    def test_wrong_resolution_rejected(self):
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=6), init_seed=0)
        x = Tensor(np.zeros((1, 12, 32, 32), dtype=np.float32))
        with pytest.raises(ValueError, match="incompatible with depth"):
            gen.forward(x)

    def test_all_parameters_receive_gradients(self):
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=6), init_seed=0)
        rng = np.random.default_rng(2)
        x = Tensor(rng.uniform(-1, 1, (1, 12, 64, 64)).astype(np.float32))
        target = Tensor(rng.uniform(-1, 1, (1, 3, 64, 64)).astype(np.float32))
        y = gen.forward(x, training=True, rng=np.random.default_rng(3))
        backward(l1_loss(y, target))
        missing = [n for n, p in gen.params.items() if p.grad is None]
        assert missing == []

    def test_skip_ablation_changes_trained_output(self):
        # brief training makes the skips carry real signal before the check
        cfg = GeneratorConfig(base_layer_k=8, depth=6)
        gen = build_generator(cfg, init_seed=3)
        opt = Adam(gen.parameters(), lr=2e-4)
        rng = np.random.default_rng(0)
        x = Tensor(rng.uniform(-1, 1, (1, 12, 64, 64)).astype(np.float32))
        target = Tensor(rng.uniform(-1, 1, (1, 3, 64, 64)).astype(np.float32))
        for step in range(10):
            opt.zero_grad()
            out = gen.forward(x, training=True, rng=np.random.default_rng(100 + step))
            backward(l1_loss(out, target))
            opt.step()
        base = gen.forward(x).data
        n_skips = cfg.depth - 1
        for k in range(n_skips):
            mask = tuple(i != k for i in range(n_skips))
            ablated = gen.forward(x, skip_mask=mask).data
            assert float(np.abs(base - ablated).mean()) > 0.0, f"skip {k} had no effect"

    def test_bad_skip_mask_length(self):
        gen = build_generator(GeneratorConfig(base_layer_k=4, depth=6), init_seed=0)
        x = Tensor(np.zeros((1, 12, 64, 64), dtype=np.float32))
        with pytest.raises(ValueError, match="skip_mask"):
            gen.forward(x, skip_mask=(True, True))


class TestDiscriminator:
    def test_ladder(self):
        cfg = DiscriminatorConfig(base_layer_k=64)
        assert cfg.stage_channels() == [64, 128, 256, 512, 1]
        assert cfg.stage_strides() == [2, 2, 2, 1, 1]

    def test_patch_map_256(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=64), init_seed=0)
        rng = np.random.default_rng(4)
        cond = Tensor(rng.uniform(-1, 1, (1, 12, 256, 256)).astype(np.float32))
        img = Tensor(rng.uniform(-1, 1, (1, 3, 256, 256)).astype(np.float32))
        out = disc.forward(cond, img)
        assert out.data.shape == (1, 1, 30, 30)
        assert float(out.data.min()) > 0.0 and float(out.data.max()) < 1.0

    def test_patch_map_64(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=0)
        rng = np.random.default_rng(5)
        cond = Tensor(rng.uniform(-1, 1, (2, 12, 64, 64)).astype(np.float32))
        img = Tensor(rng.uniform(-1, 1, (2, 3, 64, 64)).astype(np.float32))
        assert disc.forward(cond, img).data.shape == (2, 1, 6, 6)

    def test_fresh_discriminator_near_half(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=1)
        rng = np.random.default_rng(6)
        cond = Tensor(rng.uniform(-1, 1, (2, 12, 64, 64)).astype(np.float32))
        img = Tensor(rng.uniform(-1, 1, (2, 3, 64, 64)).astype(np.float32))
        score = float(disc.forward(cond, img).data.mean())
        assert abs(score - 0.5) < 0.2

    def test_scalar_score_is_patch_mean(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=2)
        rng = np.random.default_rng(7)
        cond = Tensor(rng.uniform(-1, 1, (1, 12, 64, 64)).astype(np.float32))
        img = Tensor(rng.uniform(-1, 1, (1, 3, 64, 64)).astype(np.float32))
        patch = disc.forward(cond, img)
        assert tmean(patch).item() == pytest.approx(float(patch.data.mean()), abs=1e-6)

    def test_same_seed_builds_identical(self):
        a = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=9)
        b = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=9)
        for name in a.params:
            np.testing.assert_array_equal(a.params[name].data, b.params[name].data)

    def test_batch_mismatch_rejected(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=0)
        cond = Tensor(np.zeros((2, 12, 64, 64), dtype=np.float32))
        img = Tensor(np.zeros((1, 3, 64, 64), dtype=np.float32))
        with pytest.raises(ValueError, match="batch sizes differ"):
            disc.forward(cond, img)

    def test_channel_sum_rejected(self):
        disc = build_discriminator(DiscriminatorConfig(base_layer_k=16), init_seed=0)
        cond = Tensor(np.zeros((1, 12, 64, 64), dtype=np.float32))
        img = Tensor(np.zeros((1, 5, 64, 64), dtype=np.float32))
        with pytest.raises(ValueError, match="15"):
            disc.forward(cond, img)

    def test_only_five_stage_config(self):
        with pytest.raises(ValueError, match="5-stage"):
            DiscriminatorConfig(base_layer_k=16, num_encoders=4)
