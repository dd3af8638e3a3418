import numpy as np
import pytest

import sustain


def test_tensor_from_coo_sums_duplicates():
    t = sustain.Tensor([2, 2], np.array([[0, 0], [1, 1], [0, 0]]), np.array([2.0, 5.0, 1.0]))
    assert t.nnz == 2
    assert t.dims == [2, 2]
    assert t.values().tolist() == [3.0, 5.0]
    assert t.coords().tolist() == [[0, 0], [1, 1]]


def test_planted_fixed_point():
    x, truth = sustain.generate_planted([30, 20], rank=3, density=0.2, seed=4)
    assert sustain.fit(x, truth) == 1.0
    model, trace = sustain.factorize(x, 3, init="explicit", initial_model=truth, max_iters=1)
    assert model == truth
    assert trace["fit"][-1] == 1.0


def test_factorize_tensor_is_integral_and_monotone():
    x, _ = sustain.generate_planted([15, 12, 10], rank=2, density=0.1, noise_level=1.0, seed=2)
    model, trace = sustain.factorize(x, 2, seed=7)
    for f in model.factors:
        assert np.all(f == np.round(f))
        assert f.min() >= 0 and f.max() <= model.tau
    objective = np.array(trace["objective"])
    assert np.all(np.diff(objective) <= 1e-9 * x.norm_sq())


def test_dissimilarity_of_permuted_columns_is_zero():
    rng = np.random.default_rng(0)
    d = rng.integers(0, 6, size=(20, 4)).astype(float)
    assert sustain.dissimilarity(d, d[:, [2, 0, 3, 1]]) == 0.0


def test_round_trip(tmp_path):
    x, truth = sustain.generate_planted([8, 6, 5], rank=2, density=0.3, seed=9)
    sustain.save_tensor(tmp_path / "x.tns", x)
    assert sustain.load_tensor(tmp_path / "x.tns") == x
    sustain.save_model(tmp_path / "m", truth, binary=True)
    assert sustain.load_model(tmp_path / "m") == truth


def test_errors_are_raised():
    with pytest.raises(sustain._core.SustainError):
        sustain.Tensor([2, 2], np.array([[0, 5]]), np.array([1.0]))
    with pytest.raises(ValueError):
        x, _ = sustain.generate_planted([10, 10], rank=1, density=0.2)
        sustain.factorize(x, 1, init="bogus")
