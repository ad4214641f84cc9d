import os
import pathlib

import numpy as np
import pytest

import fusionattack as fa

DATA = pathlib.Path(os.environ.get("FUSION_TEST_DATA_DIR", pathlib.Path(__file__).parents[1] / "data"))


@pytest.fixture(scope="module")
def chelsea():
    return fa.read_png(str(DATA / "natural_chelsea_64a.png"))


def test_png_roundtrip(chelsea, tmp_path):
    assert chelsea.shape == (64, 64, 3)
    assert chelsea.dtype == np.float32
    path = tmp_path / "copy.png"
    fa.write_png(str(path), chelsea)
    np.testing.assert_array_equal(fa.read_png(str(path)), chelsea)


def test_operator_identities(chelsea):
    np.testing.assert_array_equal(fa.gaussian_blur(chelsea, 1, 2.0), chelsea)
    np.testing.assert_array_equal(fa.add_gaussian_noise(chelsea, 0.0, 3), chelsea)
    np.testing.assert_allclose(fa.apply_light_spot(chelsea, 10, 10, 1.0, 30), chelsea, atol=1e-7)
    identity = fa.PostProcParams(1, 0.5, 100, 0.0, 0, 0, 1.0, 30)
    np.testing.assert_array_equal(fa.apply_fusion(chelsea, identity, 1), fa.jpeg_roundtrip(chelsea, 100))


def test_metrics(chelsea):
    assert fa.ssim(chelsea, chelsea) == pytest.approx(1.0, abs=1e-9)
    assert fa.psnr(chelsea, chelsea) == float("inf")
    assert fa.ssim(chelsea, fa.jpeg_roundtrip(chelsea, 10)) < fa.ssim(chelsea, fa.jpeg_roundtrip(chelsea, 90))
    assert fa.compute_asr([0.4, 0.6]) == 0.5
    assert fa.compute_asr([0.5]) == 0.0


def test_bad_input_raises():
    with pytest.raises(ValueError):
        fa.gaussian_blur(np.zeros((8, 8), dtype=np.float32), 3, 1.0)
    with pytest.raises(ValueError):
        fa.gaussian_blur(np.zeros((8, 8, 3), dtype=np.float32), 4, 1.0)


def test_attack_with_callable_oracle(chelsea):
    calls = []

    def oracle(img):
        calls.append(img.shape)
        return 0.1

    out = fa.run_attack(chelsea, oracle)
    assert out.success
    assert out.queries_used == 100 == len(calls)
    assert out.queries_to_success == 100
    assert out.adversarial_image.shape == chelsea.shape


def test_attack_with_synthetic_oracle_is_deterministic(chelsea):
    cfg = fa.PsoConfig()
    cfg.seed = 11
    a = fa.run_attack(chelsea, "synthetic:composite", cfg)
    b = fa.run_attack(chelsea, "synthetic:composite", cfg)
    assert a.success
    assert a.final_fitness < fa.DECISION_THRESHOLD
    assert a.queries_used % cfg.particles == 0 and a.queries_used <= cfg.budget
    assert a.selected_position == b.selected_position
    np.testing.assert_array_equal(a.adversarial_image, b.adversarial_image)
    rnd = fa.run_random_search(chelsea, "synthetic:composite", cfg)
    assert rnd.queries_used == 1000


def test_config_and_bounds():
    cfg = fa.PsoConfig()
    cfg.load("[pso]\nparticles = 20\niterations = 4\n")
    assert (cfg.particles, cfg.iterations) == (20, 4)
    cfg.set_bounds("jpeg_quality", 100, 100)
    with pytest.raises(ValueError):
        cfg.set_bounds("no_such_param", 0, 1)
    with pytest.raises(ValueError):
        cfg.load("[pso]\nbogus = 1\n")


def test_out_of_range_oracle_is_protocol_error(chelsea):
    with pytest.raises(fa.ProtocolError):
        fa.score(lambda img: 1.7, chelsea)
    assert fa.score(lambda img: 0.42, chelsea) == pytest.approx(0.42)
