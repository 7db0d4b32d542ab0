"""Gaussian waves on the 3-torus and their restriction to a straight segment.

A wave is F(x) = (1/sqrt(N)) * sum over the shell of a_mu * e^{2 pi i <mu, x>}
with complex Gaussian amplitudes tied by a_{-mu} = conj(a_mu), which makes F
real valued.  Restricting to the segment gamma(t) = t*alpha turns F into a
one-dimensional trigonometric process f(t) whose covariance r and derivatives
r1, r2, r12 have closed-form shell sums.

Amplitudes are stored once per antipodal pair, so the conjugate symmetry is
structural rather than checked.  The lexicographic ordering of shell
coordinates pairs row i with row n-1-i (negation reverses the order), which
keeps the half-shell bookkeeping index-free.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .diophantine import Direction
from .lattice import Shell

__all__ = [
    "LineSegment",
    "WaveSample",
    "CovarianceValues",
    "sample_wave",
    "evaluate_F",
    "evaluate_F_complex",
    "evaluate_f",
    "evaluate_f_prime",
    "covariance",
    "line_frequencies",
    "second_moment_ratio",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LineSegment:
    """Straight segment gamma(t) = t*alpha for t in [0, length]."""

    direction: Direction
    length: float

    def __post_init__(self):
        length = float(self.length)
        if not (math.isfinite(length) and length > 0):
            raise ValueError(f"segment length must be positive, got {self.length}")
        object.__setattr__(self, "length", length)

    def point(self, t):
        """Map parameter values to points t*alpha (vectorized over t)."""
        t = np.asarray(t, dtype=np.float64)
        return t[..., None] * self.direction.components


@dataclass(frozen=True, eq=False)
class WaveSample:
    """One draw of the ensemble: a complex amplitude per antipodal pair.

    ``half_coefficients[i]`` is a_mu for the i-th shell row; the amplitude of
    the mirrored row n-1-i is its conjugate by construction.
    """

    shell: Shell
    half_coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        half = np.array(self.half_coefficients, dtype=np.complex128)
        if half.shape != (self.shell.n // 2,):
            raise ValueError(
                f"need {self.shell.n // 2} pair amplitudes, got shape {half.shape}"
            )
        half.setflags(write=False)
        object.__setattr__(self, "half_coefficients", half)

    @property
    def coefficients(self) -> np.ndarray:
        """Full amplitude vector aligned with the rows of shell.coords."""
        h = self.shell.n // 2
        full = np.empty(self.shell.n, dtype=np.complex128)
        full[:h] = self.half_coefficients
        full[h:] = np.conj(self.half_coefficients[::-1])
        return full

    @classmethod
    def from_coefficients(cls, shell: Shell, values) -> "WaveSample":
        """Build a sample from an explicit {mu: a_mu} mapping.

        Pairs not mentioned get amplitude zero.  Setting mu fixes -mu to the
        conjugate; listing both with inconsistent values is an error.
        """
        n = shell.n
        h = n // 2
        index = {tuple(row): i for i, row in enumerate(shell.coords.tolist())}
        half = np.zeros(h, dtype=np.complex128)
        seen: dict[int, complex] = {}
        for mu, value in dict(values).items():
            key = tuple(int(c) for c in mu)
            if key not in index:
                raise ValueError(f"{key} is not on the shell m={shell.m}")
            i = index[key]
            pair = min(i, n - 1 - i)
            stored = complex(value) if i < h else complex(value).conjugate()
            if pair in seen and abs(seen[pair] - stored) > 1e-12:
                raise ValueError(f"amplitudes for {key} and its antipode conflict")
            seen[pair] = stored
            half[pair] = stored
        return cls(shell, half)


@dataclass(frozen=True)
class CovarianceValues:
    """Covariance of (f(t1), f(t2)) and its first and mixed derivatives."""

    r: float
    r1: float
    r2: float
    r12: float


def sample_wave(shell: Shell, rng_seed) -> WaveSample:
    """Draw amplitudes: one complex standard Gaussian per antipodal pair.

    Real and imaginary parts are independent with variance 1/2 each, so
    E|a_mu|^2 = 1.  ``rng_seed`` may be an integer seed or a numpy Generator
    (the latter lets callers hand in per-trial substreams).
    """
    if shell.n == 0:
        raise ValueError(f"cannot sample on an empty shell (m={shell.m})")
    if isinstance(rng_seed, np.random.Generator):
        rng = rng_seed
    else:
        rng = np.random.default_rng(rng_seed)
    z = rng.standard_normal((shell.n // 2, 2)) * math.sqrt(0.5)
    return WaveSample(shell, z[:, 0] + 1j * z[:, 1])


def evaluate_F(sample: WaveSample, x):
    """Evaluate F at a point x (or rows of points) of the unit cube.

    Uses the half-shell cosine/sine form, which is real by construction:
    F(x) = (2/sqrt(N)) * sum_pairs (Re a * cos(2 pi <mu,x>) - Im a * sin(...)).
    """
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 3:
        raise ValueError("x must have three components")
    h = sample.shell.n // 2
    phase = TWO_PI * pts @ sample.shell.coords[:h].astype(np.float64).T
    a = sample.half_coefficients
    scale = 2.0 / math.sqrt(sample.shell.n)
    vals = scale * (np.cos(phase) @ a.real - np.sin(phase) @ a.imag)
    return float(vals[0]) if single else vals


def evaluate_F_complex(sample: WaveSample, x) -> complex:
    """Full complex shell sum at one point; the cross-check for evaluate_F."""
    x = np.asarray(x, dtype=np.float64)
    phase = TWO_PI * sample.shell.coords.astype(np.float64) @ x
    total = np.sum(sample.coefficients * np.exp(1j * phase))
    return complex(total) / math.sqrt(sample.shell.n)


def line_frequencies(shell: Shell, direction: Direction) -> np.ndarray:
    """Frequencies <mu, alpha> of the restricted process, one per shell row."""
    return shell.coords.astype(np.float64) @ direction.components


def _check_t(line: LineSegment, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > line.length):
        raise ValueError(f"t must lie in [0, {line.length}]")
    return t


def evaluate_f(sample: WaveSample, line: LineSegment, t):
    """Restriction f(t) = F(t*alpha); vectorized over t in [0, L]."""
    t = _check_t(line, t)
    single = t.ndim == 0
    h = sample.shell.n // 2
    b = sample.shell.coords[:h].astype(np.float64) @ line.direction.components
    phase = TWO_PI * np.atleast_1d(t)[:, None] * b
    a = sample.half_coefficients
    scale = 2.0 / math.sqrt(sample.shell.n)
    vals = scale * (np.cos(phase) @ a.real - np.sin(phase) @ a.imag)
    return float(vals[0]) if single else vals


def evaluate_f_prime(sample: WaveSample, line: LineSegment, t):
    """Derivative f'(t), term-wise 2 pi <mu, alpha> factors."""
    t = _check_t(line, t)
    single = t.ndim == 0
    h = sample.shell.n // 2
    b = sample.shell.coords[:h].astype(np.float64) @ line.direction.components
    phase = TWO_PI * np.atleast_1d(t)[:, None] * b
    a = sample.half_coefficients
    w = TWO_PI * b
    scale = -2.0 / math.sqrt(sample.shell.n)
    vals = scale * (np.sin(phase) @ (w * a.real) + np.cos(phase) @ (w * a.imag))
    return float(vals[0]) if single else vals


def covariance(shell: Shell, line: LineSegment, t1: float, t2: float) -> CovarianceValues:
    """Closed-form covariance r(t1,t2) and derivatives r1, r2, r12.

    r depends on tau = t1 - t2 only; r1 = dr/dt1 = -r2, and r12 is the mixed
    second derivative, positive on the diagonal.
    """
    if shell.n == 0:
        raise ValueError(f"covariance needs a nonempty shell (m={shell.m})")
    b = line_frequencies(shell, line.direction)
    tau = float(t1) - float(t2)
    cos_part = np.cos(TWO_PI * tau * b)
    r = float(np.mean(cos_part))
    r1 = float(np.mean(-TWO_PI * b * np.sin(TWO_PI * tau * b)))
    r12 = float(np.mean((TWO_PI * b) ** 2 * cos_part))
    return CovarianceValues(r=r, r1=r1, r2=-r1, r12=r12)


def second_moment_ratio(shell: Shell, direction: Direction) -> float:
    """Diagnostic (3/m) * (1/N) * sum <mu, alpha>^2; equals 1 when the shell
    spreads its directional energy isotropically along alpha."""
    b = line_frequencies(shell, direction)
    return float(3.0 / shell.m * np.mean(b * b))
