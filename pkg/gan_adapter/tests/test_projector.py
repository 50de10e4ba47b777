import pytest
import torch

from gan_adapter.generator import StyleGenerator
from gan_adapter.projector import multi_scale_loss, project_latent, w_mean

torch.set_num_threads(1)


def make_target(gen: StyleGenerator, seed: int) -> torch.Tensor:
    w = torch.randn(1, gen.latent_dim, generator=torch.Generator().manual_seed(seed))
    return gen.synthesize(w).detach()


def test_w_mean_shape_and_determinism():
    gen = StyleGenerator(seed=2)
    m1, m2 = w_mean(gen), w_mean(gen)
    assert m1.shape == (1, 32)
    assert torch.equal(m1, m2)


def test_loss_zero_iff_identical():
    gen = StyleGenerator(seed=1)
    a = make_target(gen, 1)
    b = make_target(gen, 2)
    assert float(multi_scale_loss(a, a)) == 0.0
    assert float(multi_scale_loss(a, b)) > 0.0


def test_loss_symmetry_and_shape_check():
    gen = StyleGenerator(seed=1)
    a, b = make_target(gen, 3), make_target(gen, 4)
    assert float(multi_scale_loss(a, b)) == float(multi_scale_loss(b, a))
    with pytest.raises(ValueError, match="shapes differ"):
        multi_scale_loss(a, torch.zeros(1, 3, 16, 16))


def test_zero_steps_returns_initialization():
    gen = StyleGenerator(seed=5)
    target = make_target(gen, 9)
    w, meta = project_latent(gen, target, steps=0)
    assert torch.equal(w, w_mean(gen))
    assert meta["loss_final"] == meta["loss_initial"]
    assert meta["steps"] == 0


def test_one_step_moves_and_stays_valid():
    gen = StyleGenerator(seed=5)
    target = make_target(gen, 9)
    w, meta = project_latent(gen, target, steps=1)
    assert w.shape == (1, 32)
    assert torch.all(torch.isfinite(w))
    assert not torch.equal(w, w_mean(gen))


def test_projection_reduces_loss():
    gen = StyleGenerator(seed=5)
    target = make_target(gen, 9)
    w, meta = project_latent(gen, target, steps=60)
    assert meta["loss_final"] < meta["loss_initial"]
    with torch.no_grad():
        resynth = gen.synthesize(w)
    assert float(multi_scale_loss(resynth, target)) == pytest.approx(meta["loss_final"])


def test_projection_is_bit_deterministic():
    gen = StyleGenerator(seed=5)
    target = make_target(gen, 9)
    w1, meta1 = project_latent(gen, target, steps=40)
    w2, meta2 = project_latent(gen, target, steps=40)
    assert torch.equal(w1, w2)
    assert meta1 == meta2


def test_meta_records_hyperparameters():
    gen = StyleGenerator(seed=5)
    _, meta = project_latent(gen, make_target(gen, 9), steps=2)
    for key in ("optimizer", "lr", "steps", "pool_factors",
                "loss_initial", "loss_final"):
        assert key in meta


def test_input_validation():
    gen = StyleGenerator(seed=5)
    target = make_target(gen, 9)
    with pytest.raises(ValueError, match="steps"):
        project_latent(gen, target, steps=-1)
    with pytest.raises(ValueError, match="generator expects"):
        project_latent(gen, torch.zeros(1, 3, 16, 16), steps=1)
    with pytest.raises(ValueError, match="target must be"):
        project_latent(gen, torch.zeros(3, 32, 32), steps=1)
