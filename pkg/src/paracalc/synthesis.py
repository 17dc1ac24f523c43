"""Seeded synthetic fields of prescribed dyadic regularity.

The workhorse is the lacunary profile: a few random-phase modes per dyadic
block, with the block sup-normalized to exactly 2^(-j*alpha).  The measured
exponent of such a field equals alpha by construction, which makes it the
ground-truth corpus for every regularity-gain test.  Negative exponents are
produced by the same profile; this coincides with roughening a positive
profile by a |k|^s multiplier, since that multiplier is constant on each
lacunary block.
"""

from __future__ import annotations

import numpy as np

from .dyadic import n_blocks
from .errors import DomainError
from .grids import Field, values_of


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _block_modes(grid, j, count, rng):
    """Random integer frequencies with Chebyshev norm in (2^(j-1), 2^j]."""
    top = 2**j
    lo = 2 ** (j - 1)
    ks = set()
    guard = 0
    while len(ks) < count and guard < 64 * count:
        guard += 1
        lead = int(rng.integers(lo + 1, top + 1))
        if grid.dimension == 1:
            ks.add((lead,))
        else:
            other = int(rng.integers(-lead, lead + 1))
            if rng.random() < 0.5:
                ks.add((lead, other))
            else:
                ks.add((other, lead))
    return sorted(ks)


def lacunary_field(
    grid,
    exponent,
    seed,
    j_min=1,
    j_max=None,
    modes_per_block=6,
    amplitude=1.0,
    low_gain=4.0,
):
    """Sum over blocks of random-phase modes, block j sup-normalized to 2^(-j*exponent).

    ``low_gain`` > 0 adds a |k| <= 1 anchor at ``low_gain`` times the profile
    value for j = -1.  The anchor keeps low-pass partial sums of the field
    nondegenerate at every scale, so paraproducts of the corpus follow the
    profile from the first block on; it contributes only to blocks <= 1 and
    never enters a fit window.
    """
    top = n_blocks(grid)
    if j_max is None:
        j_max = top
    if not 1 <= j_min <= j_max <= top:
        raise DomainError(f"block window [{j_min}, {j_max}] outside [1, {top}]")
    rng = _rng(seed)
    total = np.zeros(grid.shape)
    if low_gain > 0:
        spec = np.zeros(grid.shape, dtype=np.complex128)
        spec[(0,) * grid.dimension] = 1.0
        for axis in range(grid.dimension):
            idx = [0] * grid.dimension
            idx[axis] = 1
            coeff = 0.25 * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            spec[tuple(idx)] += coeff
            spec[tuple(-i % grid.points for i in idx)] += np.conj(coeff)
        vals = values_of(spec).real
        total = total + vals * (low_gain * 2.0**exponent / np.max(np.abs(vals)))
    for j in range(j_min, j_max + 1):
        count = min(modes_per_block, 2 ** (j - 1))
        spec = np.zeros(grid.shape, dtype=np.complex128)
        for k in _block_modes(grid, j, count, rng):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            coeff = 0.5 * np.exp(1j * phase)
            idx = tuple(ki % grid.points for ki in k)
            neg = tuple((-ki) % grid.points for ki in k)
            spec[idx] += coeff
            spec[neg] += np.conj(coeff)
        vals = values_of(spec).real
        sup = np.max(np.abs(vals))
        if sup > 0:
            total = total + vals * (2.0 ** (-j * exponent) / sup)
    return Field(grid, amplitude * total)


def power_multiplier(f, s):
    """Roughen or smooth a field by the multiplier max(|k|_inf, 1)^s."""
    kinf = np.maximum(f.grid.freq_inf().astype(np.float64), 1.0)
    return Field.from_spectrum(f.grid, f.spectrum * kinf**s)


def gaussian_bump(grid, width=0.05, seed=None):
    """Smooth periodic bump (heat-kernel profile), optionally randomly centered."""
    spec = np.exp(-0.5 * (2.0 * np.pi * width) ** 2 * grid.freq_sq())
    if seed is not None:
        rng = _rng(seed)
        shift = rng.uniform(0.0, 1.0, size=grid.dimension)
        phase = np.zeros(grid.shape)
        for ax, ka in enumerate(grid.freqs()):
            phase = phase + ka.astype(np.float64) * shift[ax]
        spec = spec * np.exp(-2j * np.pi * phase)
    spec = spec / np.abs(values_of(spec).real).max()
    return Field.from_spectrum(grid, spec)


def random_band_limited(grid, seed, k_cut=None, amplitude=1.0):
    """Seeded random real field with a hard spectral cutoff |k|_inf <= k_cut."""
    rng = _rng(seed)
    if k_cut is None:
        k_cut = grid.points // 4
    a = rng.standard_normal(grid.shape)
    b = rng.standard_normal(grid.shape)
    spec = (a + 1j * b) / np.sqrt(2.0)
    spec[grid.freq_inf() > k_cut] = 0.0
    # Hermitian part keeps the field real and the draw deterministic
    rev = tuple(slice(None, None, -1) for _ in range(grid.dimension))
    spec = 0.5 * (spec + np.conj(np.roll(spec[rev], 1, axis=tuple(range(grid.dimension)))))
    vals = values_of(spec).real
    sup = np.max(np.abs(vals))
    if sup > 0:
        vals = vals / sup
    return Field(grid, amplitude * vals)
