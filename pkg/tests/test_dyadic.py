import csv

import numpy as np
import pytest

from paracalc import dyadic
from paracalc.dyadic import (
    besov_norm,
    block_weights,
    decompose,
    estimate_regularity,
    n_blocks,
    parabolic_norm,
    write_estimate_csv,
)
from paracalc.errors import DegenerateFieldError, DomainError
from paracalc.grids import Field, SpaceGrid, SpaceTimeField, uniform_times
from paracalc.synthesis import gaussian_bump, lacunary_field, random_band_limited


def test_single_mode_lands_in_predicted_block():
    # 2^1 < 4 <= 2^2, so cos(2 pi 4 x) sits in block j = 2 and nowhere else
    g = SpaceGrid(1, 16)
    x = g.coordinates(0)
    dec = decompose(Field(g, np.cos(2 * np.pi * 4 * x)))
    assert dec.js == [-1, 0, 1, 2, 3]
    nonzero = [j for j, s in zip(dec.js, dec.block_sups) if s > 1e-13]
    assert nonzero == [2]


def test_constant_lands_in_low_block():
    g = SpaceGrid(1, 16)
    dec = decompose(Field.constant(g, 2.0))
    nonzero = [j for j, s in zip(dec.js, dec.block_sups) if s > 1e-13]
    assert nonzero == [-1]


@pytest.mark.parametrize("dim,n,seed", [(1, 64, 0), (1, 128, 1), (2, 32, 2)])
def test_partition_identity(dim, n, seed):
    g = SpaceGrid(dim, n)
    f = random_band_limited(g, seed, k_cut=n // 2)
    dec = decompose(f)
    err = np.max(np.abs(dec.reconstruct().values - f.values))
    assert err <= 1e-12 * max(1.0, f.sup_norm())


def test_block_orthogonality_sharp():
    g = SpaceGrid(1, 64)
    f = random_band_limited(g, 3, k_cut=32)
    dec = decompose(f)
    for i, bi in enumerate(dec.blocks):
        redec = decompose(bi)
        for j, s in zip(redec.js, redec.block_sups):
            if j != dec.js[i]:
                assert s < 1e-12


def test_partition_weights_sum_to_one():
    g = SpaceGrid(1, 128)
    for smooth in (False, True):
        total = sum(block_weights(g, smooth=smooth))
        assert np.max(np.abs(total - 1.0)) < 1e-14


def test_smooth_mode_reconstruction():
    g = SpaceGrid(1, 128)
    f = random_band_limited(g, 4, k_cut=64)
    dec = decompose(f, smooth=True)
    assert np.max(np.abs(dec.reconstruct().values - f.values)) < 1e-12


def test_besov_single_mode_value():
    g = SpaceGrid(1, 64)
    x = g.coordinates(0)
    f = Field(g, np.cos(2 * np.pi * 4 * x))
    assert abs(besov_norm(f, 1.0) - 4.0) < 1e-10


def test_besov_zero_and_scaling():
    g = SpaceGrid(1, 32)
    assert besov_norm(Field.zero(g), 0.5) == 0.0
    f = random_band_limited(g, 5)
    lam = -3.7
    assert abs(besov_norm(lam * f, 0.8) - abs(lam) * besov_norm(f, 0.8)) < 1e-10


def test_besov_exponent_domain():
    g = SpaceGrid(1, 32)
    f = Field.constant(g, 1.0)
    with pytest.raises(DomainError):
        besov_norm(f, 3.5)


def test_besov_monotonicity_bound():
    g = SpaceGrid(1, 64)
    J = n_blocks(g)
    for seed in range(4):
        f = random_band_limited(g, seed, k_cut=32)
        for alpha, alpha_p in ((1.0, 0.3), (0.5, -0.5), (2.0, 1.0)):
            lhs = besov_norm(f, alpha)
            rhs = besov_norm(f, alpha_p) * 2.0 ** (J * (alpha - alpha_p))
            assert lhs <= rhs * (1 + 1e-12)


def test_estimate_on_spec_example_family():
    # f = sum_{j=2..6} 2^(-0.7 j) cos(2 pi 2^j x) -> alpha-hat = 0.7 +- 0.05
    g = SpaceGrid(1, 256)
    x = g.coordinates(0)
    vals = sum(2.0 ** (-0.7 * j) * np.cos(2 * np.pi * 2**j * x) for j in range(2, 7))
    est = estimate_regularity(Field(g, vals), 2, 6)
    assert abs(est.exponent - 0.7) <= 0.05
    assert est.r_squared >= 0.98


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.9, 1.4])
def test_estimate_on_lacunary_family(beta):
    g = SpaceGrid(1, 256)
    for seed in range(3):
        est = estimate_regularity(lacunary_field(g, beta, seed))
        assert abs(est.exponent - beta) <= 0.05
        assert est.r_squared >= 0.98


def test_estimate_single_mode_degenerate():
    g = SpaceGrid(1, 256)
    x = g.coordinates(0)
    f = Field(g, np.cos(2 * np.pi * 8 * x))
    with pytest.raises(DegenerateFieldError):
        estimate_regularity(f)


def test_estimate_window_validation():
    g = SpaceGrid(1, 256)
    f = lacunary_field(g, 0.5, 0)
    with pytest.raises(DomainError):
        estimate_regularity(f, 1, 3)


def test_estimate_smooth_bump():
    g = SpaceGrid(1, 256)
    est = estimate_regularity(gaussian_bump(g, width=0.1, seed=2), 1, 4)
    assert est.exponent >= 2.0


def test_csv_report(tmp_path):
    g = SpaceGrid(1, 256)
    est = estimate_regularity(lacunary_field(g, 0.6, 7))
    path = tmp_path / "estimate.csv"
    write_estimate_csv(path, est)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["j", "log2_block_sup", "fitted_line"]
    assert len(rows) == len(est.js_used) + 1
    js = [int(r[0]) for r in rows[1:]]
    assert js == est.js_used


def test_parabolic_norm_time_dependence():
    g = SpaceGrid(1, 32)
    times = uniform_times(0.5, 8)
    f = random_band_limited(g, 9)
    steady = SpaceTimeField.constant_in_time(f, times)
    wobble = SpaceTimeField(
        g, times, np.stack([(1 + 0.5 * t) * f.values for t in times])
    )
    gamma = 0.8
    assert parabolic_norm(wobble, gamma) > parabolic_norm(steady, gamma)
    assert parabolic_norm(steady, -0.5) <= besov_norm(f, -0.5) + 1e-12
