"""Periodic grids, spectral transforms and heat-semigroup operators.

Fields live on a uniform grid over the unit torus in one or two space
dimensions.  The spectral convention is

    f(x) = sum_k c_k exp(2*pi*i k.x),   c_k = DFT(values) / N^d,

with integer frequencies k, |k_i| <= N/2.  All operators in this module are
pure: they return new fields and never mutate their inputs.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedModeError

MAGIC = b"PCF1"


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid on the d-dimensional unit torus, N points per axis."""

    dimension: int
    points: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.points < 8 or not _is_power_of_two(self.points):
            raise ConfigurationError(
                f"points per axis must be a power of two >= 8, got {self.points}"
            )

    @property
    def shape(self):
        return (self.points,) * self.dimension

    @property
    def size(self):
        return self.points**self.dimension

    def coordinates(self, axis):
        """Coordinate array along ``axis``, broadcast to the grid shape."""
        x = np.arange(self.points) / self.points
        if self.dimension == 1:
            return x
        if axis == 0:
            return np.broadcast_to(x[:, None], self.shape).copy()
        return np.broadcast_to(x[None, :], self.shape).copy()

    def freq_axis(self):
        """Integer frequencies along one axis in FFT layout."""
        return np.fft.fftfreq(self.points, d=1.0 / self.points).astype(np.int64)

    def freqs(self):
        """Tuple of integer-frequency arrays, one per axis, broadcast to shape."""
        k = self.freq_axis()
        if self.dimension == 1:
            return (k,)
        return (
            np.broadcast_to(k[:, None], self.shape),
            np.broadcast_to(k[None, :], self.shape),
        )

    def freq_sq(self):
        """|k|^2 over the grid (Euclidean)."""
        out = np.zeros(self.shape, dtype=np.float64)
        for ka in self.freqs():
            out = out + ka.astype(np.float64) ** 2
        return out

    def freq_inf(self):
        """max_i |k_i| over the grid (Chebyshev norm, used for dyadic bands)."""
        out = np.zeros(self.shape, dtype=np.int64)
        for ka in self.freqs():
            out = np.maximum(out, np.abs(ka))
        return out


def spectrum_of(values):
    return np.fft.fftn(values) / values.size


def values_of(spectrum):
    return np.fft.ifftn(spectrum * spectrum.size)


class Field:
    """Real scalar field on a :class:`SpaceGrid` with an optional spectrum cache."""

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid, values, spectrum=None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise ConfigurationError(
                f"values shape {values.shape} does not match grid shape {grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        self.grid = grid
        self.values = values
        self.values.flags.writeable = False
        self._spectrum = spectrum

    @classmethod
    def from_spectrum(cls, grid, spectrum):
        vals = values_of(spectrum)
        f = cls(grid, vals.real)
        f._spectrum = np.array(spectrum, copy=True)
        return f

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = spectrum_of(self.values)
        return self._spectrum

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def l2_norm(self):
        return float(np.sqrt(np.mean(self.values**2)))

    def mean(self):
        return float(np.mean(self.values))

    def __add__(self, other):
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return Field(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def _check(self, other):
        if self.grid != other.grid:
            raise ConfigurationError("grid mismatch between fields")


def transform(field, direction):
    """Forward or inverse DFT of a field.

    Forward returns the same field with its spectrum cached; inverse takes a
    field (using its cached spectrum) back to values.  Round trip is exact to
    machine precision and Parseval's identity holds.
    """
    if direction == "forward":
        return Field(field.grid, field.values, spectrum=np.array(field.spectrum))
    if direction == "inverse":
        return Field.from_spectrum(field.grid, field.spectrum)
    raise DomainError(f"unknown transform direction {direction!r}")


def apply_multiplier(field, symbol):
    """Apply a Fourier multiplier.

    ``symbol`` is either an array over the grid's frequency set or a callable
    evaluated on the tuple of integer-frequency arrays.
    """
    if callable(symbol):
        sym = np.asarray(symbol(*field.grid.freqs()), dtype=np.float64)
    else:
        sym = np.asarray(symbol, dtype=np.float64)
    if sym.shape != field.grid.shape:
        sym = np.broadcast_to(sym, field.grid.shape)
    if not np.all(np.isfinite(sym)):
        raise DomainError("multiplier symbol contains non-finite values")
    return Field.from_spectrum(field.grid, field.spectrum * sym)


# ---------------------------------------------------------------------------
# de-aliasing helpers (2x zero padding with Nyquist splitting)
# ---------------------------------------------------------------------------


def _pad_axis(spec, axis):
    n = spec.shape[axis]
    m = 2 * n
    shape = list(spec.shape)
    shape[axis] = m
    out = np.zeros(shape, dtype=np.complex128)
    idx_src = [slice(None)] * spec.ndim
    idx_dst = [slice(None)] * spec.ndim

    idx_src[axis] = slice(0, n // 2)
    idx_dst[axis] = slice(0, n // 2)
    out[tuple(idx_dst)] = spec[tuple(idx_src)]

    idx_src[axis] = slice(n // 2 + 1, n)
    idx_dst[axis] = slice(m - n // 2 + 1, m)
    out[tuple(idx_dst)] = spec[tuple(idx_src)]

    # the shared Nyquist bin splits evenly between +N/2 and -N/2
    idx_src[axis] = n // 2
    idx_dst[axis] = n // 2
    out[tuple(idx_dst)] = spec[tuple(idx_src)] / 2.0
    idx_dst[axis] = m - n // 2
    out[tuple(idx_dst)] = spec[tuple(idx_src)] / 2.0
    return out


def _fold_axis(spec, axis):
    m = spec.shape[axis]
    n = m // 2
    shape = list(spec.shape)
    shape[axis] = n
    out = np.zeros(shape, dtype=np.complex128)
    idx_src = [slice(None)] * spec.ndim
    idx_dst = [slice(None)] * spec.ndim

    idx_dst[axis] = slice(0, n // 2)
    idx_src[axis] = slice(0, n // 2)
    out[tuple(idx_dst)] = spec[tuple(idx_src)]

    idx_dst[axis] = slice(n // 2 + 1, n)
    idx_src[axis] = slice(m - n // 2 + 1, m)
    out[tuple(idx_dst)] = spec[tuple(idx_src)]

    idx_dst[axis] = n // 2
    idx_src[axis] = n // 2
    folded = spec[tuple(idx_src)].copy()
    idx_src[axis] = m - n // 2
    folded = folded + spec[tuple(idx_src)]
    out[tuple(idx_dst)] = folded
    return out


def pad_spectrum(spec):
    """Embed an N-grid spectrum into the 2N grid (canonical interpolant)."""
    for axis in range(spec.ndim):
        spec = _pad_axis(spec, axis)
    return spec


def fold_spectrum(spec):
    """Truncate a 2N-grid spectrum back to the N band, discarding |k| > N/2."""
    for axis in range(spec.ndim):
        spec = _fold_axis(spec, axis)
    return spec


def multiply_spectra_dealiased(spec_a, spec_b):
    """Spectrum of the de-aliased pointwise product of two spectra."""
    big_a = values_of(pad_spectrum(spec_a))
    big_b = values_of(pad_spectrum(spec_b))
    return fold_spectrum(spectrum_of(big_a * big_b))


def multiply_dealiased(a, b):
    """De-aliased pointwise product of two fields (2x padded, then truncated)."""
    a._check(b)
    return Field.from_spectrum(a.grid, multiply_spectra_dealiased(a.spectrum, b.spectrum))


# ---------------------------------------------------------------------------
# the operator L and its semigroup
# ---------------------------------------------------------------------------


class OperatorL:
    """L = -sum_i V_i^2 with V_i = sqrt(d(u0bar)) d/dx_i on the torus.

    In constant-coefficient mode (``c0`` a positive number) L is the Fourier
    multiplier m(k) = c0 (2 pi |k|)^2, which enables exact propagators.  A
    Field-valued ``c0`` switches to the experimental pseudo-spectral mode:
    only direct application is supported there.
    """

    def __init__(self, c0):
        if isinstance(c0, Field):
            if float(np.min(c0.values)) <= 0.0:
                raise DomainError("variable diffusivity must be positive on the grid")
            self.c0 = c0
            self.constant = False
        else:
            c0 = float(c0)
            if c0 <= 0.0:
                raise DomainError(f"diffusivity must be positive, got {c0}")
            self.c0 = c0
            self.constant = True

    def symbol(self, grid):
        if not self.constant:
            raise UnsupportedModeError("variable-coefficient L has no Fourier symbol")
        return self.c0 * (2.0 * math.pi) ** 2 * grid.freq_sq()

    def apply(self, f):
        """L f, spectrally in constant mode, pseudo-spectrally otherwise."""
        if self.constant:
            return apply_multiplier(f, self.symbol(f.grid))
        sqrt_c = np.sqrt(self.c0.values)
        out = np.zeros(f.grid.shape)
        for axis in range(f.grid.dimension):
            g = derivative(f, axis)
            h = Field(f.grid, sqrt_c * g.values)
            out = out - sqrt_c * derivative(h, axis).values
        return Field(f.grid, out)

    def inverse_apply(self, f):
        """L^{-1} f on nonzero modes; the k = 0 mode is set to zero."""
        sym = self.symbol(f.grid)
        inv = np.zeros_like(sym)
        np.divide(1.0, sym, out=inv, where=sym != 0)
        return apply_multiplier(f, inv)

    def propagator(self, grid, t):
        """Symbol of exp(-t L)."""
        if t < 0:
            raise DomainError("propagator time must be nonnegative")
        return np.exp(-t * self.symbol(grid))


def derivative(f, axis):
    """Spectral partial derivative along ``axis``."""
    k = f.grid.freqs()[axis].astype(np.float64)
    return Field.from_spectrum(f.grid, f.spectrum * (2j * math.pi * k))


def v_field(f, axis, operator):
    """V_i f = sqrt(c0) * df/dx_i for constant-coefficient L."""
    if not operator.constant:
        raise UnsupportedModeError("V_i requires constant-coefficient L")
    return math.sqrt(operator.c0) * derivative(f, axis)


def _p_polynomial(x, b):
    """p_b(x) = sum_{k<b} x^k / k!, the truncated exponential."""
    out = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(b):
        out = out + term
        term = term * x / (k + 1)
    return out


def heat_operators(f, t, b, kind, operator):
    """Apply Q_t^(b) or P_t^(b) built from the semigroup of L.

    Q_t^(b) = (tL)^b exp(-tL)/(b-1)! localizes near |k| ~ t^{-1/2}; P_t^(b)
    = p_b(tL) exp(-tL) with p_b(0) = 1 plays the role of a partial Fourier sum
    through -t dP/dt = Q.
    """
    if t <= 0 or t > 1:
        raise DomainError(f"semigroup parameter must lie in (0, 1], got {t}")
    if b < 1:
        raise DomainError(f"cancellation order b must be >= 1, got {b}")
    if not operator.constant:
        raise UnsupportedModeError("heat operators require constant-coefficient L")
    x = t * operator.symbol(f.grid)
    if kind == "Q":
        sym = x**b * np.exp(-x) / math.factorial(b - 1)
    elif kind == "P":
        sym = _p_polynomial(x, b) * np.exp(-x)
    else:
        raise DomainError(f"heat operator kind must be 'P' or 'Q', got {kind!r}")
    return apply_multiplier(f, sym)


# ---------------------------------------------------------------------------
# space-time fields, the parabolic operator and its Duhamel inverse
# ---------------------------------------------------------------------------


class SpaceTimeField:
    """Uniform time grid 0 = t_0 < ... < t_M = T with one Field per slice."""

    __slots__ = ("grid", "times", "values")

    def __init__(self, grid, times, values):
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if times.ndim != 1 or times.size < 3:
            raise ConfigurationError("need at least 3 time slices (M >= 2)")
        steps = np.diff(times)
        if times[0] != 0.0 or np.any(steps <= 0):
            raise ConfigurationError("time grid must start at 0 and increase")
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
            raise ConfigurationError("time grid must be uniform")
        if values.shape != (times.size,) + grid.shape:
            raise ConfigurationError(
                f"values shape {values.shape} does not match (M+1,)+grid shape"
            )
        self.grid = grid
        self.times = times
        self.values = values
        self.values.flags.writeable = False

    @classmethod
    def from_slices(cls, grid, times, fields):
        return cls(grid, times, np.stack([f.values for f in fields]))

    @classmethod
    def zero(cls, grid, times):
        times = np.asarray(times, dtype=np.float64)
        return cls(grid, times, np.zeros((times.size,) + grid.shape))

    @classmethod
    def constant_in_time(cls, f, times):
        times = np.asarray(times, dtype=np.float64)
        vals = np.broadcast_to(f.values, (times.size,) + f.grid.shape).copy()
        return cls(f.grid, times, vals)

    @property
    def n_slices(self):
        return self.times.size

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    def slice(self, m):
        return Field(self.grid, self.values[m].copy())

    def slices(self):
        return [self.slice(m) for m in range(self.n_slices)]

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def map_slices(self, fn):
        """Apply a Field -> Field map to every slice."""
        out = [fn(self.slice(m)).values for m in range(self.n_slices)]
        return SpaceTimeField(self.grid, self.times, np.stack(out))

    def __add__(self, other):
        self._check(other)
        return SpaceTimeField(self.grid, self.times, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SpaceTimeField(self.grid, self.times, self.values - other.values)

    def __mul__(self, scalar):
        return SpaceTimeField(self.grid, self.times, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SpaceTimeField(self.grid, self.times, -self.values)

    def multiply(self, other):
        """Slice-wise de-aliased pointwise product."""
        self._check(other)
        out = [
            multiply_spectra_dealiased(
                spectrum_of(self.values[m]), spectrum_of(other.values[m])
            )
            for m in range(self.n_slices)
        ]
        vals = np.stack([values_of(c).real for c in out])
        return SpaceTimeField(self.grid, self.times, vals)

    def _check(self, other):
        if self.grid != other.grid:
            raise ConfigurationError("grid mismatch between space-time fields")
        if self.times.size != other.times.size or not np.allclose(
            self.times, other.times, rtol=1e-12, atol=1e-15
        ):
            raise ConfigurationError("time-grid mismatch between space-time fields")


def time_derivative(stf):
    """Second-order finite difference in time (one-sided at the endpoints)."""
    if stf.n_slices < 3:
        raise ConfigurationError("time derivative needs at least 3 slices")
    v = stf.values
    dt = stf.dt
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2 * dt)
    out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt)
    out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dt)
    return SpaceTimeField(stf.grid, stf.times, out)


def apply_parabolic(stf, operator):
    """(d/dt + L) applied slice-wise: spectral L plus finite differences in t."""
    lu = stf.map_slices(operator.apply)
    return time_derivative(stf) + lu


def duhamel_inverse(source, u0, operator):
    """Mild inverse of (d/dt + L): exact per-step propagator, trapezoidal source.

    Returns u with u(t_m) = exp(-t_m L) u0 + integral of exp(-(t_m - s) L)
    source(s) ds, so that apply_parabolic(u) - source = O(dt^2) on smooth
    sources.
    """
    if not operator.constant:
        raise UnsupportedModeError("Duhamel inversion requires constant-coefficient L")
    if u0.grid != source.grid:
        raise ConfigurationError("grid mismatch between source and initial datum")
    dt = source.dt
    prop = operator.propagator(source.grid, dt)
    spec = [spectrum_of(source.values[m]) for m in range(source.n_slices)]
    u_spec = np.array(u0.spectrum, copy=True)
    out = [values_of(u_spec).real]
    for m in range(1, source.n_slices):
        u_spec = prop * u_spec + (dt / 2.0) * (prop * spec[m - 1] + spec[m])
        out.append(values_of(u_spec).real)
    return SpaceTimeField(source.grid, source.times, np.stack(out))


def heat_flow(u0, times, operator):
    """Free propagation exp(-t L) u0 along a time grid."""
    times = np.asarray(times, dtype=np.float64)
    sym = operator.symbol(u0.grid)
    vals = np.stack(
        [values_of(np.exp(-t * sym) * u0.spectrum).real for t in times]
    )
    return SpaceTimeField(u0.grid, times, vals)


def uniform_times(horizon, n_steps):
    if horizon <= 0 or n_steps < 2:
        raise ConfigurationError("need horizon > 0 and at least 2 time steps")
    return np.linspace(0.0, float(horizon), int(n_steps) + 1)


# ---------------------------------------------------------------------------
# binary field files
# ---------------------------------------------------------------------------


def write_pcf(path, obj):
    """Write a Field or SpaceTimeField in the PCF1 binary layout.

    16-byte header (magic, u32 dimension, u32 N, u32 slice count) followed by
    64-bit little-endian floats in row-major, time-major order.
    """
    if isinstance(obj, Field):
        grid, data, slices = obj.grid, obj.values[None, ...], 1
    else:
        grid, data, slices = obj.grid, obj.values, obj.n_slices
    header = MAGIC + struct.pack("<III", grid.dimension, grid.points, slices)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_pcf(path, horizon=None):
    """Read a PCF1 file; slice count 1 yields a Field, otherwise a SpaceTimeField.

    Multi-slice files do not store the time horizon, so ``horizon`` must be
    supplied for them (run manifests record it).
    """
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != MAGIC:
            raise ConfigurationError(f"{path} is not a PCF1 field file")
        dim, n, slices = struct.unpack("<III", header[4:])
        grid = SpaceGrid(dim, n)
        raw = np.frombuffer(fh.read(), dtype="<f8")
    expected = slices * grid.size
    if raw.size != expected:
        raise ConfigurationError(
            f"{path}: expected {expected} samples, found {raw.size}"
        )
    data = raw.reshape((slices,) + grid.shape)
    if slices == 1:
        return Field(grid, data[0].copy())
    if horizon is None:
        raise ConfigurationError("time horizon required to read a space-time field")
    times = np.linspace(0.0, float(horizon), slices)
    return SpaceTimeField(grid, times, data.copy())
