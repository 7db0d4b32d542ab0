"""Spherical caps and segments on the sphere of radius R = sqrt(m).

A cap of height h satisfies k^2 + h^2 = s^2 = 2*R*h with opening angle
theta = 4*arcsin(sqrt(h/2R)); equivalently the cap's polar angle is
theta/2, so a segment cut out by two parallel planes at signed heights
lo <= hi along beta has opening angle 2*(arccos(lo/R) - arccos(hi/R)).
Segments are kept inside a hemisphere (both planes on one side of the
center); regions that straddle the equator are returned split in two.

kappa(shell) is the exact maximal number of shell points on any single
plane, computed by hashing canonical plane normals over point triples.
chi_hat is a lattice-centered surrogate (a lower bound) for the true
maximal cap count chi(R, s).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticePoint, Shell

__all__ = [
    "CapSpec",
    "SegmentSpec",
    "Slab",
    "CountResult",
    "cap_from",
    "segment_from",
    "count_in_cap",
    "count_in_segment",
    "chi_hat",
    "kappa",
    "covering_bound",
    "slicing_bound",
    "cone_region",
    "slab_region",
]

log = logging.getLogger(__name__)

_CONSISTENCY_RTOL = 1e-9


def _unit(direction) -> np.ndarray:
    beta = np.asarray(direction, dtype=np.float64)
    if beta.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {beta.shape}")
    norm = float(np.linalg.norm(beta))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"direction must be a unit vector, |beta| = {norm}")
    beta = beta / norm
    beta.setflags(write=False)
    return beta


@dataclass(frozen=True, eq=False)
class CapSpec:
    """Spherical cap around R*beta: points p on the sphere with |p - R*beta| <= s.

    Parameters obey the hemisphere convention 0 <= h <= R, 0 <= theta <= pi.
    """

    r_sphere: float
    direction: np.ndarray = field(repr=False)
    s: float
    h: float
    k: float
    theta: float

    def contains(self, points, atol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        d = np.linalg.norm(pts - self.r_sphere * self.direction, axis=1)
        return d <= self.s + atol


@dataclass(frozen=True, eq=False)
class SegmentSpec:
    """Spherical segment: the slab offset - h <= <p, beta> <= offset on the sphere.

    ``offset`` is the signed height of the top base plane along beta and ``k``
    the radius of the larger base circle.  Both planes lie on one side of the
    center (hemisphere convention); any two of h, k, theta determine the third.
    """

    r_sphere: float
    direction: np.ndarray = field(repr=False)
    h: float
    k: float
    theta: float
    offset: float

    @property
    def lo(self) -> float:
        return self.offset - self.h

    @property
    def hi(self) -> float:
        return self.offset

    def contains(self, points, atol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        t = pts @ self.direction
        return (t >= self.lo - atol) & (t <= self.hi + atol)


@dataclass(frozen=True, eq=False)
class Slab:
    """Raw slab lo <= <p, beta> <= hi intersected with the sphere.

    Unlike SegmentSpec this carries no hemisphere convention; it is the
    plumbing type for straddling test regions and whole-sphere degeneracies.
    """

    r_sphere: float
    direction: np.ndarray = field(repr=False)
    lo: float
    hi: float

    def contains(self, points, atol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        t = pts @ self.direction
        return (t >= self.lo - atol) & (t <= self.hi + atol)

    def split(self) -> tuple[SegmentSpec, SegmentSpec]:
        """Split a straddling slab into its two hemisphere segments."""
        if not self.lo < 0.0 < self.hi:
            raise ValueError("only slabs straddling the equator can be split")
        return (
            _segment_between(self.r_sphere, self.direction, 0.0, self.hi),
            _segment_between(self.r_sphere, self.direction, self.lo, 0.0),
        )


@dataclass(frozen=True)
class CountResult:
    count: int
    witnesses: tuple[LatticePoint, ...]


def _cap_params_from_h(r: float, h: float) -> tuple[float, float, float, float]:
    # the identities k^2 + h^2 = s^2 = 2Rh and s = 2R sin(theta/4) hold on
    # the whole closed-cap family 0 <= h <= 2R, not just the hemisphere range
    s = math.sqrt(2.0 * r * h)
    k = math.sqrt(max(2.0 * r * h - h * h, 0.0))
    theta = 4.0 * math.asin(min(1.0, math.sqrt(h / (2.0 * r))))
    return s, h, k, theta


def cap_from(r_sphere: float, *, s=None, h=None, k=None, theta=None,
             direction=(0.0, 0.0, 1.0)) -> CapSpec:
    """Build a cap from the sphere radius and exactly one of s, h, k, theta.

    The hemisphere convention covers h <= R (s <= sqrt(2)*R, theta <= pi),
    but closed caps up to the whole sphere (h = 2R) are accepted so that
    counting near-antipodal caps works.  The k -> h inversion takes the
    hemisphere branch h = R - sqrt(R^2 - k^2).
    """
    if r_sphere <= 0:
        raise ValueError(f"r_sphere must be positive, got {r_sphere}")
    given = [(name, val) for name, val in
             (("s", s), ("h", h), ("k", k), ("theta", theta)) if val is not None]
    if len(given) != 1:
        raise ValueError(f"give exactly one of s, h, k, theta; got {len(given)}")
    name, val = given[0]
    val = float(val)
    r = float(r_sphere)
    tol = 1e-12 * max(1.0, r)
    if name == "h":
        if not -tol <= val <= 2.0 * r + tol:
            raise ValueError(f"h out of range [0, 2R]: h={val}, R={r}")
        hh = min(max(val, 0.0), 2.0 * r)
    elif name == "s":
        if not -tol <= val <= 2.0 * r + tol:
            raise ValueError(f"s out of range [0, 2R]: s={val}, R={r}")
        hh = min(max(val, 0.0), 2.0 * r) ** 2 / (2.0 * r)
    elif name == "k":
        if not -tol <= val <= r + tol:
            raise ValueError(f"k out of range [0, R]: k={val}, R={r}")
        kk = min(max(val, 0.0), r)
        hh = r - math.sqrt(r * r - kk * kk)
    else:
        if not -tol <= val <= 2.0 * math.pi + tol:
            raise ValueError(f"theta out of range [0, 2pi]: theta={val}")
        th = min(max(val, 0.0), 2.0 * math.pi)
        hh = 2.0 * r * math.sin(th / 4.0) ** 2
    ss, hh, kk, th = _cap_params_from_h(r, min(hh, 2.0 * r))
    return CapSpec(r_sphere=r, direction=_unit(direction), s=ss, h=hh, k=kk, theta=th)


def _segment_between(r: float, direction, lo: float, hi: float) -> SegmentSpec:
    """Assemble a hemisphere segment from exact plane heights lo <= hi."""
    phi_hi = math.acos(min(1.0, max(-1.0, hi / r)))
    phi_lo = math.acos(min(1.0, max(-1.0, lo / r)))
    theta = 2.0 * (phi_lo - phi_hi)
    # larger base circle = plane closer to the equator
    k = math.sqrt(max(r * r - min(hi * hi, lo * lo), 0.0))
    return SegmentSpec(r_sphere=r, direction=_unit(direction),
                       h=hi - lo, k=k, theta=max(theta, 0.0), offset=hi)


def segment_from(r_sphere: float, direction, *, h=None, k=None, theta=None,
                 offset: float) -> SegmentSpec:
    """Build a hemisphere segment from offset plus parameters among h, k, theta.

    The slab is [offset - h, offset] along the direction.  Extra parameters
    are checked for mutual consistency (1e-9 relative); a slab with planes on
    both sides of the center raises with instructions to split it.
    """
    r = float(r_sphere)
    if r <= 0:
        raise ValueError(f"r_sphere must be positive, got {r}")
    tol = 1e-12 * max(1.0, r)
    offset = float(offset)
    if abs(offset) > r + tol:
        raise ValueError(f"offset out of range [-R, R]: offset={offset}, R={r}")
    offset = min(max(offset, -r), r)
    if h is None and k is None and theta is None:
        raise ValueError("give at least one of h, k, theta")

    if h is not None:
        hh = float(h)
        if hh < -tol:
            raise ValueError(f"h must be nonnegative, got {hh}")
        hh = max(hh, 0.0)
    elif theta is not None:
        th = float(theta)
        if not -tol <= th <= math.pi + tol:
            raise ValueError(f"theta out of range [0, pi]: {th}")
        phi_hi = math.acos(min(1.0, max(-1.0, offset / r)))
        phi_lo = phi_hi + min(max(th, 0.0), math.pi) / 2.0
        if phi_lo > math.pi + 1e-12:
            raise ValueError(f"theta={th} drops below the south pole from offset={offset}")
        hh = offset - r * math.cos(min(phi_lo, math.pi))
    else:
        kk = float(k)
        if not -tol <= kk <= r + tol:
            raise ValueError(f"k out of range [0, R]: k={kk}, R={r}")
        if offset <= 0:
            # on the lower side the larger base is the offset plane itself,
            # so k carries no height information
            raise ValueError("k does not determine a lower-hemisphere segment; give h or theta")
        lo = math.sqrt(max(r * r - min(kk, r) ** 2, 0.0))
        if lo > offset + tol:
            raise ValueError(f"base radius k={kk} is inconsistent with offset={offset}")
        hh = offset - min(lo, offset)

    lo = offset - hh
    if lo < -r - tol:
        raise ValueError(f"lower plane below the sphere: offset-h={lo}, R={r}")
    lo = max(lo, -r)
    if offset > tol and lo < -tol:
        raise ValueError(
            "segment straddles the equator; split it into two hemisphere segments")
    seg = _segment_between(r, direction, lo, offset)
    for name, given, got in (("h", h, seg.h), ("k", k, seg.k), ("theta", theta, seg.theta)):
        if given is not None:
            scale = max(1.0, abs(got))
            if abs(float(given) - got) > _CONSISTENCY_RTOL * scale:
                raise ValueError(
                    f"inconsistent segment parameters: {name}={given} vs derived {got}")
    return seg


def _check_radius(shell: Shell, r_sphere: float) -> None:
    if abs(r_sphere - shell.radius) > 1e-9 * max(1.0, shell.radius):
        raise ValueError(
            f"radius mismatch: region has R={r_sphere}, shell has sqrt(m)={shell.radius}")


def _witnesses(shell: Shell, mask: np.ndarray) -> CountResult:
    idx = np.flatnonzero(mask)
    witnesses = tuple(LatticePoint(*map(int, shell.coords[i])) for i in idx)
    return CountResult(count=len(witnesses), witnesses=witnesses)


def count_in_cap(shell: Shell, cap: CapSpec) -> CountResult:
    """Count shell points in the closed cap, with witnesses."""
    _check_radius(shell, cap.r_sphere)
    return _witnesses(shell, cap.contains(shell.coords))


def count_in_segment(shell: Shell, seg) -> CountResult:
    """Count shell points in the closed slab of a SegmentSpec or Slab."""
    _check_radius(shell, seg.r_sphere)
    return _witnesses(shell, seg.contains(shell.coords))


def chi_hat(shell: Shell, s: float) -> int:
    """Surrogate for chi(R, s): the max cap count over caps centered at the
    lattice directions of the shell; a LOWER bound for the true maximum
    (the optimal center need not be a lattice direction).

    Any s >= 2R covers the whole sphere, so larger values are clamped.
    """
    if s < 0:
        raise ValueError(f"cap radius s must be nonnegative, got {s}")
    if shell.n == 0:
        return 0
    # cap centers R*(mu/|mu|) are the lattice points themselves, so counting
    # reduces to exact integer squared chord distances
    pts = shell.coords
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    s2 = min(float(s) ** 2, 4.0 * shell.m)
    return int((d2 <= s2).sum(axis=1).max())


_kappa_cache: dict[int, int] = {}


def _canonical_normals(diffs: np.ndarray) -> np.ndarray:
    """Primitive, sign-canonical integer normals of planes spanned by pairs of
    difference vectors (all through the shared anchor point)."""
    j, l = np.triu_indices(len(diffs), k=1)
    normals = np.cross(diffs[j], diffs[l])
    g = np.gcd.reduce(np.abs(normals), axis=1)
    # three sphere points are never collinear, so every normal is nonzero
    normals //= g[:, None]
    first = np.take_along_axis(
        normals, (normals != 0).argmax(axis=1)[:, None], axis=1)[:, 0]
    normals *= np.where(first < 0, -1, 1)[:, None]
    return normals


def kappa(shell: Shell) -> int:
    """Exact kappa(sqrt(m)): the maximal number of shell points on one plane.

    For each anchor point, planes through the anchor are keyed by the
    canonical normal of (Q - anchor) x (Q' - anchor); a key hit by C(j, 2)
    pairs carries j further points, so that plane holds j + 1 shell points.
    """
    if shell.n == 0:
        raise ValueError(f"kappa undefined for the empty shell m={shell.m}")
    cached = _kappa_cache.get(shell.m)
    if cached is not None:
        return cached
    pts = shell.coords
    n = shell.n
    best = min(n, 2)
    for i in range(n):
        diffs = np.delete(pts, i, axis=0) - pts[i]
        normals = _canonical_normals(diffs)
        _, counts = np.unique(normals, axis=0, return_counts=True)
        cmax = int(counts.max())
        # invert cmax = C(j, 2)
        j = (1 + math.isqrt(1 + 8 * cmax)) // 2
        assert j * (j - 1) == 2 * cmax, "pair count is not triangular"
        best = max(best, j + 1)
    _kappa_cache[shell.m] = best
    return best


def covering_bound(r_sphere: float, k: float, theta: float, omega: float,
                   chi_fn) -> int:
    """Segment-count bound by covering the segment with caps of radius
    (2*pi + 1/2)*Omega: chi * ceil(k/Omega) * ceil(R*theta/Omega).

    chi_fn(R, s) supplies the cap-count bound.  theta = 0 yields factor 0 and
    hence bound 0: a zero-angle segment is a circle that may still hold
    lattice points, so callers must use theta > 0 (or the slab form).
    """
    if not 0.0 < omega < r_sphere:
        raise ValueError(f"omega out of range (0, R): omega={omega}, R={r_sphere}")
    if k < 0 or theta < 0:
        raise ValueError("k and theta must be nonnegative")
    chi = int(chi_fn(r_sphere, (2.0 * math.pi + 0.5) * omega))
    return chi * math.ceil(k / omega) * math.ceil(r_sphere * theta / omega)


def slicing_bound(shell: Shell, b, h: float) -> int:
    """Segment-count bound for rational directions b/|b|: the slab of height h
    meets at most 1 + |b|*h lattice planes, each holding at most kappa points."""
    b = np.asarray(b, dtype=np.int64)
    if b.shape != (3,) or not b.any():
        raise ValueError("b must be a nonzero integer 3-vector")
    if h < 0 or h > shell.radius + 1e-9:
        raise ValueError(f"h out of range [0, R]: h={h}")
    return math.floor(kappa(shell) * (1.0 + float(np.linalg.norm(b)) * h))


def _snap(x: float, tol: float = 1e-12) -> float:
    return 0.0 if abs(x) < tol else x


def _band_region(r: float, beta: np.ndarray, z_lo: float, z_hi: float):
    """Region of the sphere with scaled heights in [z_lo, z_hi] (z in [-1, 1]),
    returned per the hemisphere convention: a cap when a pole is included,
    a segment when one hemisphere contains the band, a split pair otherwise."""
    z_lo, z_hi = _snap(max(z_lo, -1.0)), _snap(min(z_hi, 1.0))
    if z_lo <= -1.0 and z_hi >= 1.0:
        log.warning("region covers the whole sphere; returning a clamped slab")
        return Slab(r_sphere=r, direction=beta, lo=-r, hi=r)
    if z_hi >= 1.0:  # north pole included
        if z_lo >= 0.0:
            return cap_from(r, h=r * (1.0 - z_lo), direction=beta)
        return (
            _segment_between(r, beta, 0.0, r),
            _segment_between(r, beta, r * z_lo, 0.0),
        )
    if z_lo <= -1.0:  # south pole included
        if z_hi <= 0.0:
            return cap_from(r, h=r * (1.0 + z_hi), direction=-beta)
        return (
            _segment_between(r, beta, 0.0, r * z_hi),
            _segment_between(r, beta, -r, 0.0),
        )
    if z_lo >= 0.0 or z_hi <= 0.0:
        return _segment_between(r, beta, r * z_lo, r * z_hi)
    return Slab(r_sphere=r, direction=beta, lo=r * z_lo, hi=r * z_hi).split()


def cone_region(B, beta, c: float):
    """Smallest polar band certain to contain every sphere point B' with
    |<B - B', beta>| <= c * |B - B'|.

    Writing z = <B, beta>/R = cos(phi), the chord condition factors into
    |phi' - phi| <= 2*arcsin(c), so the region is the band of polar angles
    [phi - delta, phi + delta] with delta = 2*arcsin(c): a segment of opening
    angle 4*delta <= 8c(1+c^2), or a cap of radius at most 4cR when the band
    swallows a pole.  Returns a CapSpec, a SegmentSpec, or a pair of
    SegmentSpecs when the band straddles the equator.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"c out of range (0, 1): {c}")
    B = np.asarray(B, dtype=np.float64)
    r = float(np.linalg.norm(B))
    if r <= 0:
        raise ValueError("B must be a nonzero point on the sphere")
    beta = _unit(beta)
    z = min(1.0, max(-1.0, float(B @ beta) / r))
    phi = math.acos(z)
    delta = 2.0 * math.asin(c)
    z_lo = math.cos(min(phi + delta, math.pi))
    z_hi = math.cos(max(phi - delta, 0.0))
    return _band_region(r, beta, z_lo, z_hi)


def slab_region(B, beta, c: float):
    """Region of sphere points B' with |<B - B', beta>| <= c: the slab of
    height 2c centered at the height of B, clamped to the sphere.

    Near a pole the region becomes a cap of height at most 2c; c >= R
    degenerates to the whole sphere (clamped, with a logged warning).
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    B = np.asarray(B, dtype=np.float64)
    r = float(np.linalg.norm(B))
    if r <= 0:
        raise ValueError("B must be a nonzero point on the sphere")
    beta = _unit(beta)
    z0 = min(1.0, max(-1.0, float(B @ beta) / r))
    return _band_region(r, beta, z0 - c / r, z0 + c / r)
