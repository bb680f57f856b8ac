"""Stable special functions on the sphere.

Spherical Bessel functions of the first and second kind, orthonormal spherical
harmonics in the Condon-Shortley convention, and the tangential/mixed vector
harmonic triple (X, V, W) expressed on the local spherical basis.

Numerical strategy: j_l is generated by a Miller-type downward recurrence
seeded well above the requested order and renormalized against a closed-form
anchor (upward recurrence for j_l is catastrophically unstable for l > x);
y_l is generated upward from its closed forms, which is the stable direction.
Angular derivatives of Y_l^m are evaluated through ladder identities that stay
finite at the poles; nothing is differentiated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError

__all__ = [
    "HARD_CAP_LMAX",
    "AngularPoint",
    "VectorHarmonicTriple",
    "spherical_bessel_j",
    "spherical_bessel_y",
    "spherical_hankel_h1",
    "legendre_p",
    "spherical_harmonic",
    "HarmonicsBlock",
    "spherical_harmonics_block",
    "vector_spherical_harmonics",
    "vector_harmonics_block",
    "unit_vectors",
    "spherical_to_cartesian",
]

# Hard cap on multipole order; guards runaway truncation requests.
HARD_CAP_LMAX = 512

# Below x = 1e-6 (l+1) the two-term power series is more reliable than the
# renormalized recurrence (whose anchor underflows first).
_SERIES_THRESHOLD = 1e-6


@dataclass(frozen=True)
class AngularPoint:
    """Direction on the unit sphere, polar angle theta in [0, pi]."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        phi = float(self.phi)
        if not math.isfinite(theta) or not math.isfinite(phi):
            raise DomainError("angular point must be finite")
        if not 0.0 <= theta <= math.pi:
            raise DomainError(f"theta={theta} outside [0, pi]")
        phi = phi % (2.0 * math.pi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class VectorHarmonicTriple:
    """X, V, W at one (l, m, theta, phi), components on (e_r, e_theta, e_phi)."""

    X: np.ndarray
    V: np.ndarray
    W: np.ndarray


def _as_angles(point) -> tuple[float, float]:
    if isinstance(point, AngularPoint):
        return point.theta, point.phi
    theta, phi = point
    return AngularPoint(theta, phi).theta, AngularPoint(theta, phi).phi


def _check_order(l_max: int) -> int:
    if l_max != int(l_max) or l_max < 0:
        raise DomainError(f"order must be a non-negative integer, got {l_max}")
    if l_max > HARD_CAP_LMAX:
        raise ResourceLimitError(
            f"l_max={l_max} exceeds the hard cap {HARD_CAP_LMAX}"
        )
    return int(l_max)


def _ln_double_factorial_odd(l: int) -> float:
    # (2l+1)!! = 2^{l+1} Gamma(l + 3/2) / sqrt(pi)
    return (l + 1) * math.log(2.0) + math.lgamma(l + 1.5) - 0.5 * math.log(math.pi)


def _series_j(l: int, x: float) -> float:
    # leading two terms of j_l = x^l/(2l+1)!! (1 - x^2/(2(2l+3)) + ...)
    if x == 0.0:
        return 1.0 if l == 0 else 0.0
    ln_lead = l * math.log(x) - _ln_double_factorial_odd(l)
    if ln_lead < -745.0:
        return 0.0
    return math.exp(ln_lead) * (1.0 - x * x / (2.0 * (2 * l + 3)))


def _miller_j(l_top: int, x: float) -> list[float]:
    """Unstable-direction-safe j_0..j_{l_top} for x not tiny relative to l_top."""
    start = int(max(l_top, math.ceil(x))) + 16 + int(2.0 * math.sqrt(max(l_top, x)))
    out = [0.0] * (l_top + 1)
    jp = 0.0
    jc = 1e-30
    for l in range(start, 0, -1):
        jm = (2 * l + 1) / x * jc - jp
        jp, jc = jc, jm
        if l - 1 <= l_top:
            out[l - 1] = jc
        if abs(jc) > 1e250:
            # rescale before overflow; relative structure is all that matters
            jp *= 1e-250
            jc *= 1e-250
            for i in range(l - 1, l_top + 1):
                out[i] *= 1e-250
    # anchor against whichever closed form is well conditioned here: j0 away
    # from the nonzero roots of sin, else j1 (whose naive form only cancels
    # badly for small x, where j0 is fine anyway)
    j0 = math.sin(x) / x
    if x < 1.0 or abs(math.sin(x)) > 0.1 or l_top == 0:
        ratio = j0 / out[0] if out[0] != 0.0 else 0.0
    else:
        j1 = math.sin(x) / (x * x) - math.cos(x) / x
        ratio = j1 / out[1] if out[1] != 0.0 else 0.0
    out = [v * ratio for v in out]
    # the l=0 closed form is exact at full relative accuracy; the recurrence
    # value loses relative precision near roots of j_0
    out[0] = j0
    return out


def spherical_bessel_j(l_max: int, x: float) -> np.ndarray:
    """Spherical Bessel functions j_0(x)..j_{l_max}(x).

    Parameters
    ----------
    l_max : int
        Highest order, 0 <= l_max <= HARD_CAP_LMAX.
    x : float
        Non-negative argument.

    Returns
    -------
    ndarray of shape (l_max + 1,)
    """
    l_max = _check_order(l_max)
    x = float(x)
    if math.isnan(x):
        raise DomainError("x is NaN")
    if x < 0.0:
        raise DomainError(f"x={x} must be non-negative")
    out = np.zeros(l_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    # orders with x < threshold*(l+1) take the series branch
    l_series = l_max + 1
    while l_series > 0 and x < _SERIES_THRESHOLD * l_series:
        l_series -= 1
    if l_series > 0:
        out[:l_series] = _miller_j(l_series - 1, x)
    for l in range(l_series, l_max + 1):
        out[l] = _series_j(l, x)
    return out


def spherical_bessel_y(l_max: int, x: float) -> np.ndarray:
    """Spherical Bessel functions y_0(x)..y_{l_max}(x) by upward recurrence."""
    l_max = _check_order(l_max)
    x = float(x)
    if math.isnan(x) or x <= 0.0:
        raise DomainError(f"x={x} must be positive (y_l diverges at 0)")
    out = np.empty(l_max + 1)
    out[0] = -math.cos(x) / x
    if l_max == 0:
        return out
    out[1] = -math.cos(x) / (x * x) - math.sin(x) / x
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, l_max):
            out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1]
    return out


def spherical_hankel_h1(l_max: int, x: float) -> np.ndarray:
    """h_l^(1)(x) = j_l(x) + i y_l(x) for l = 0..l_max."""
    return spherical_bessel_j(l_max, x) + 1j * spherical_bessel_y(l_max, x)


def legendre_p(l: int, x: float) -> float:
    """Legendre polynomial P_l(x) on [-1, 1] via the Bonnet recurrence."""
    l = _check_order(l)
    x = float(x)
    if math.isnan(x) or abs(x) > 1.0:
        raise DomainError(f"x={x} outside [-1, 1]")
    if l == 0:
        return 1.0
    pm, pc = 1.0, x
    for n in range(1, l):
        pm, pc = pc, ((2 * n + 1) * x * pc - n * pm) / (n + 1)
    return pc


def _legendre_norm_block(l_max: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalized associated Legendre values and their /sin(theta) companions.

    Returns (p, u) with p[l, m] such that Y_l^m = p[l, m] e^{i m phi} for m >= 0,
    and u[l, m] = m p[l, m] / sin(theta) computed pole-safely (the recurrences run
    on pre-divided seeds, so no 0/0 forms at theta = 0 or pi).
    """
    x = math.cos(theta)
    s = math.sin(theta)
    p = np.zeros((l_max + 1, l_max + 1))
    u = np.zeros((l_max + 1, l_max + 1))
    p[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    # diagonal seeds, Condon-Shortley sign folded in
    for m in range(1, l_max + 1):
        p[m, m] = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * p[m - 1, m - 1]
    # same diagonal with one sin(theta) factor removed, times m
    if l_max >= 1:
        d = -math.sqrt(3.0 / 2.0) * p[0, 0]
        u[1, 1] = d
        for m in range(2, l_max + 1):
            d = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * d
            u[m, m] = m * d
    for m in range(0, l_max):
        p[m + 1, m] = math.sqrt(2 * m + 3.0) * x * p[m, m]
        if m >= 1:
            u[m + 1, m] = math.sqrt(2 * m + 3.0) * x * u[m, m]
    for m in range(0, l_max + 1):
        for l in range(m + 2, l_max + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (x * p[l - 1, m] - b * p[l - 2, m])
            if m >= 1:
                u[l, m] = a * (x * u[l - 1, m] - b * u[l - 2, m])
    return p, u


@dataclass(frozen=True)
class HarmonicsBlock:
    """All Y_l^m data up to l_max at one direction.

    Arrays are indexed [l, m + l_max]: ``y`` holds Y_l^m, ``dtheta_y`` holds
    the theta derivative, ``m_y_over_sin`` holds m Y_l^m / sin(theta) (finite
    at the poles). Entries with |m| > l are zero.
    """

    l_max: int
    theta: float
    phi: float
    y: np.ndarray
    dtheta_y: np.ndarray
    m_y_over_sin: np.ndarray

    def idx(self, m: int) -> int:
        return m + self.l_max


def spherical_harmonics_block(l_max: int, theta: float, phi: float) -> HarmonicsBlock:
    """Compute Y, dY/dtheta and mY/sin(theta) for all l <= l_max, |m| <= l."""
    l_max = _check_order(l_max)
    theta, phi = _as_angles((theta, phi))
    p, u = _legendre_norm_block(l_max, theta)
    width = 2 * l_max + 1
    y = np.zeros((l_max + 1, width), dtype=complex)
    m_y = np.zeros((l_max + 1, width), dtype=complex)
    c = l_max  # column of m = 0
    phases = np.exp(1j * phi * np.arange(l_max + 1))
    for l in range(l_max + 1):
        for m in range(0, l + 1):
            val = p[l, m] * phases[m]
            y[l, c + m] = val
            if m:
                # conjugation symmetry fixes negative m exactly
                y[l, c - m] = (-1) ** m * np.conj(val)
                uv = u[l, m] * phases[m]
                m_y[l, c + m] = uv
                m_y[l, c - m] = (-1) ** (m + 1) * np.conj(uv)
    dy = np.zeros_like(y)
    em = np.exp(-1j * phi)
    ep = np.exp(1j * phi)
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            up = math.sqrt((l - m) * (l + m + 1.0)) if m + 1 <= l else 0.0
            dn = math.sqrt((l + m) * (l - m + 1.0)) if m - 1 >= -l else 0.0
            t = 0.0 + 0.0j
            if up:
                t += up * em * y[l, c + m + 1]
            if dn:
                t -= dn * ep * y[l, c + m - 1]
            dy[l, c + m] = 0.5 * t
    return HarmonicsBlock(l_max, theta, phi, y, dy, m_y)


def spherical_harmonic(l: int, m: int, point) -> complex:
    """Orthonormal Y_l^m(theta, phi) with the Condon-Shortley phase."""
    l = _check_order(l)
    if abs(m) > l:
        raise DomainError(f"|m|={abs(m)} exceeds l={l}")
    theta, phi = _as_angles(point)
    block = spherical_harmonics_block(l, theta, phi)
    return complex(block.y[l, block.idx(m)])


def unit_vectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local spherical basis (e_r, e_theta, e_phi) as Cartesian rows."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    e_r = np.array([st * cp, st * sp, ct])
    e_theta = np.array([ct * cp, ct * sp, -st])
    e_phi = np.array([-sp, cp, 0.0])
    return e_r, e_theta, e_phi


def spherical_to_cartesian(components: np.ndarray, theta: float, phi: float) -> np.ndarray:
    """Rotate (A_r, A_theta, A_phi) components into Cartesian components."""
    e_r, e_theta, e_phi = unit_vectors(theta, phi)
    a = np.asarray(components)
    return a[0] * e_r + a[1] * e_theta + a[2] * e_phi


def _triple_from_block(block: HarmonicsBlock, l: int, m: int) -> VectorHarmonicTriple:
    c = block.idx(m)
    y = block.y[l, c]
    dy = block.dtheta_y[l, c]
    u = block.m_y_over_sin[l, c]
    s = math.sqrt(l * (l + 1.0))
    X = np.array([0.0, -u / s, -1j * dy / s], dtype=complex)
    V = np.array([-(l + 1.0) * y, dy, 1j * u], dtype=complex) / math.sqrt(
        (l + 1.0) * (2 * l + 1.0)
    )
    W = np.array([l * y, dy, 1j * u], dtype=complex) / math.sqrt(l * (2 * l + 1.0))
    return VectorHarmonicTriple(X=X, V=V, W=W)


def vector_harmonics_block(
    l_max: int, theta: float, phi: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (X, V, W) triples for l <= l_max at one direction, in bulk.

    Returns three complex arrays shaped (l_max + 1, 2 l_max + 1, 3) indexed
    [l, m + l_max, spherical component]; rows with l = 0 or |m| > l are zero.
    """
    l_max = _check_order(l_max)
    if l_max < 1:
        raise DomainError("l_max must be >= 1")
    block = spherical_harmonics_block(l_max, theta, phi)
    ls = np.arange(l_max + 1, dtype=float)[:, None]
    y, dy, u = block.y, block.dtheta_y, block.m_y_over_sin
    shape = (l_max + 1, 2 * l_max + 1, 3)
    x_out = np.zeros(shape, dtype=complex)
    v_out = np.zeros(shape, dtype=complex)
    w_out = np.zeros(shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sqrt(ls * (ls + 1.0))
        x_out[..., 1] = -u / s
        x_out[..., 2] = -1j * dy / s
        nv = np.sqrt((ls + 1.0) * (2.0 * ls + 1.0))
        v_out[..., 0] = -(ls + 1.0) * y / nv
        v_out[..., 1] = dy / nv
        v_out[..., 2] = 1j * u / nv
        nw = np.sqrt(ls * (2.0 * ls + 1.0))
        w_out[..., 0] = ls * y / nw
        w_out[..., 1] = dy / nw
        w_out[..., 2] = 1j * u / nw
    # the l = 0 row divided by zero; those triples vanish identically
    x_out[0] = 0.0
    v_out[0] = 0.0
    w_out[0] = 0.0
    return x_out, v_out, w_out


def vector_spherical_harmonics(l: int, m: int, point) -> VectorHarmonicTriple:
    """The orthonormal triple (X, V, W) at one direction, spherical basis.

    X is r x grad Y scaled by 1/(i sqrt(l(l+1))) and is purely tangential;
    V and W mix the radial harmonic with the tangential gradient. l = 0 is
    rejected: those solutions vanish identically.
    """
    l = _check_order(l)
    if l < 1:
        raise DomainError("l must be >= 1; the l=0 triple vanishes identically")
    if abs(m) > l:
        raise DomainError(f"|m|={abs(m)} exceeds l={l}")
    theta, phi = _as_angles(point)
    block = spherical_harmonics_block(l, theta, phi)
    return _triple_from_block(block, l, m)
