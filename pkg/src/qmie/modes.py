"""Eigenmodes of the dielectric sphere evaluated at arbitrary points.

Spherical eigenmodes S (and their vacuum references and scattered parts),
plane-wave modes G, the multipole coefficients of a plane wave, and the
scattering eigenmodes F built from them. Values are Cartesian; assembly is
done on the local spherical basis where the closed forms live.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError
from .miecore import ChannelIndex, PhaseShiftRecord, SphereSpec, phase_shift, truncation_order

__all__ = [
    "SphericalModeIndex",
    "PlaneModeIndex",
    "FieldSample",
    "PlaneWaveCoefficient",
    "radial_function",
    "spherical_eigenmode",
    "vacuum_eigenmode",
    "scattered_part",
    "curl_spherical_eigenmode",
    "plane_wave_mode",
    "plane_wave_coefficients",
    "scattering_eigenmode",
    "dipole_limit_field",
    "field_intensity_map",
]

DIRECTIONS = ("outgoing", "incoming")


@dataclass(frozen=True)
class SphericalModeIndex:
    """Multi-index (p, l, m, k) plus the in/out boundary condition."""

    channel: ChannelIndex
    m: int
    k: float
    direction: str = "outgoing"

    def __post_init__(self) -> None:
        if abs(self.m) > self.channel.l:
            raise DomainError(f"|m|={abs(self.m)} exceeds l={self.channel.l}")
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise DomainError(f"wavenumber k={self.k} must be finite and positive")
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction {self.direction!r} not in {DIRECTIONS}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", float(self.k))


@dataclass(frozen=True)
class PlaneModeIndex:
    """Plane-wave mode label: polarization g and wavevector."""

    g: int
    kvec: tuple[float, float, float]

    def __post_init__(self) -> None:
        if self.g not in (1, 2):
            raise DomainError(f"polarization g={self.g} must be 1 or 2")
        kv = tuple(float(c) for c in self.kvec)
        if len(kv) != 3 or not all(math.isfinite(c) for c in kv):
            raise DomainError("kvec must be a finite 3-vector")
        if kv == (0.0, 0.0, 0.0):
            raise DomainError("kvec must be nonzero")
        object.__setattr__(self, "kvec", kv)

    @property
    def k(self) -> float:
        return math.sqrt(sum(c * c for c in self.kvec))

    @property
    def angles(self) -> tuple[float, float]:
        """Propagation direction (theta_k, phi_k)."""
        kx, ky, kz = self.kvec
        k = self.k
        theta = math.acos(max(-1.0, min(1.0, kz / k)))
        phi = math.atan2(ky, kx) % (2.0 * math.pi)
        return theta, phi


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Complex Cartesian field value at a position."""

    value: np.ndarray
    point: np.ndarray


@dataclass(frozen=True)
class PlaneWaveCoefficient:
    """One multipole coefficient c_{lmg}^p of a plane-wave mode."""

    channel: ChannelIndex
    m: int
    g: int
    value: complex


def _as_point(point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.shape != (3,):
        raise DomainError(f"point must be a 3-vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point must be finite")
    return p


def _spherical_coords(p: np.ndarray) -> tuple[float, float, float]:
    r = float(np.linalg.norm(p))
    if r == 0.0:
        return 0.0, 0.0, 0.0
    theta = math.acos(max(-1.0, min(1.0, p[2] / r)))
    phi = math.atan2(p[1], p[0]) % (2.0 * math.pi)
    return r, theta, phi


@functools.lru_cache(maxsize=256)
def _phase_table(spec: SphereSpec, q: float, l_max: int) -> dict[str, list[PhaseShiftRecord]]:
    """Per-channel phase records for l = 1..l_max (index 0 unused)."""
    table: dict[str, list] = {}
    for p in ("TE", "TM"):
        rows = [None]
        for l in range(1, l_max + 1):
            rows.append(phase_shift(spec, q, ChannelIndex(p, l)))
        table[p] = rows
    return table


def _radial_scalar(
    spec: SphereSpec | None,
    rec: PhaseShiftRecord | None,
    direction: str,
    k: float,
    l_prime: int,
    r: float,
    branch: str | None,
    kind: str,
) -> complex:
    """One radial factor f_{l l'}(k; r) of the requested kind.

    kind: "full" (with sphere), "vacuum" (j only), "scattered" (difference).
    branch None resolves by position; r = R lands on the outside branch.
    """
    if kind == "vacuum":
        return complex(specfun.spherical_bessel_j(l_prime, k * r)[l_prime])
    if branch is None:
        branch = "inside" if r < spec.radius else "outside"
    sign = -1.0 if direction == "outgoing" else 1.0
    phase = cmath.exp(sign * 1j * rec.phi)
    if branch == "inside":
        arg = math.sqrt(spec.epsilon) * k * r
        full = phase * rec.gamma_l * specfun.spherical_bessel_j(l_prime, arg)[l_prime]
    else:
        x = k * r
        j = specfun.spherical_bessel_j(l_prime, x)[l_prime]
        h1 = j + 1j * specfun.spherical_bessel_y(l_prime, x)[l_prime]
        if direction == "outgoing":
            full = j - 1j * rec.sin_phi * phase * h1
        else:
            full = j + 1j * rec.sin_phi * phase * np.conj(h1)
    if kind == "full":
        return complex(full)
    vac = specfun.spherical_bessel_j(l_prime, k * r)[l_prime]
    return complex(full - vac)


def radial_function(
    spec: SphereSpec,
    mode: SphericalModeIndex,
    l_prime: int,
    r: float,
    branch: str | None = None,
) -> complex:
    """Radial factor f_{l l'} of a spherical eigenmode at radius r.

    TE modes use l' = l only; TM modes use l' = l -/+ 1. Inside the sphere the
    factor is e^{-/+ i phi} gamma j_{l'}(sqrt(eps) k r); outside it combines
    j_{l'}(kr) with the phase-shifted outgoing/incoming Hankel term. Incoming
    values are the complex conjugates of outgoing ones.
    """
    l = mode.channel.l
    valid = (l,) if mode.channel.p == "TE" else (l - 1, l + 1)
    if l_prime not in valid:
        raise DomainError(
            f"l_prime={l_prime} invalid for {mode.channel.p} l={l}; allowed {valid}"
        )
    if r < 0.0 or not math.isfinite(r):
        raise DomainError(f"r={r} must be finite and non-negative")
    if branch not in (None, "inside", "outside"):
        raise DomainError(f"branch {branch!r} not in (None, 'inside', 'outside')")
    rec = phase_shift(spec, mode.k * spec.radius, mode.channel)
    return _radial_scalar(spec, rec, mode.direction, mode.k, l_prime, r, branch, "full")


def _assemble(
    spec: SphereSpec | None,
    mode: SphericalModeIndex,
    point,
    kind: str,
    branch: str | None = None,
) -> FieldSample:
    p = _as_point(point)
    r, theta, phi = _spherical_coords(p)
    l, m, k = mode.channel.l, mode.m, mode.k
    rec = None
    if kind != "vacuum":
        rec = phase_shift(spec, k * spec.radius, mode.channel)
    trip = specfun.vector_spherical_harmonics(l, m, (theta, phi))
    norm = k * math.sqrt(2.0 / math.pi)

    def f(l_prime: int) -> complex:
        return _radial_scalar(spec, rec, mode.direction, k, l_prime, r, branch, kind)

    if mode.channel.p == "TE":
        sph = norm * f(l) * trip.X
    else:
        w_v = math.sqrt(l / (2.0 * l + 1.0))
        w_w = math.sqrt((l + 1.0) / (2.0 * l + 1.0))
        sph = norm * (w_v * f(l + 1) * trip.V - w_w * f(l - 1) * trip.W)
    value = specfun.spherical_to_cartesian(sph, theta, phi)
    return FieldSample(value=value, point=p)


def spherical_eigenmode(
    spec: SphereSpec, mode: SphericalModeIndex, point, branch: str | None = None
) -> FieldSample:
    """Normalized spherical eigenmode S_alpha(r), Cartesian components."""
    return _assemble(spec, mode, point, "full", branch)


def vacuum_eigenmode(mode: SphericalModeIndex, point) -> FieldSample:
    """Free-space eigenmode S0_alpha(r): same structure with plain j radials."""
    return _assemble(None, mode, point, "vacuum")


def scattered_part(spec: SphereSpec, mode: SphericalModeIndex, point) -> FieldSample:
    """S_alpha - S0_alpha, the purely scattered content of the eigenmode."""
    return _assemble(spec, mode, point, "scattered")


def curl_spherical_eigenmode(
    spec: SphereSpec, mode: SphericalModeIndex, point, branch: str | None = None
) -> FieldSample:
    """Analytic curl of S_alpha, from the closed radial forms.

    curl(TE mode) = -i kappa (TM-type angular structure with the TE channel's
    radial family); curl(TM mode) = +i kappa f_ll X, with kappa the local
    wavenumber sqrt(eps) k inside the sphere and k outside.
    """
    p = _as_point(point)
    r, theta, phi = _spherical_coords(p)
    l, m, k = mode.channel.l, mode.m, mode.k
    rec = phase_shift(spec, k * spec.radius, mode.channel)
    use_branch = branch
    if use_branch is None:
        use_branch = "inside" if r < spec.radius else "outside"
    kappa = k * (math.sqrt(spec.epsilon) if use_branch == "inside" else 1.0)
    trip = specfun.vector_spherical_harmonics(l, m, (theta, phi))
    norm = k * math.sqrt(2.0 / math.pi)

    def f(l_prime: int) -> complex:
        return _radial_scalar(spec, rec, mode.direction, k, l_prime, r, use_branch, "full")

    if mode.channel.p == "TE":
        w_v = math.sqrt(l / (2.0 * l + 1.0))
        w_w = math.sqrt((l + 1.0) / (2.0 * l + 1.0))
        sph = -1j * kappa * norm * (w_v * f(l + 1) * trip.V - w_w * f(l - 1) * trip.W)
    else:
        sph = 1j * kappa * norm * f(l) * trip.X
    value = specfun.spherical_to_cartesian(sph, theta, phi)
    return FieldSample(value=value, point=p)


# ------------------------------------------------------------- plane waves

def polarization_vectors(kappa: PlaneModeIndex) -> np.ndarray:
    """Cartesian complex unit vectors (e_1, e_2) = (i e_phi, e_theta) at k-hat."""
    theta, phi = kappa.angles
    _, e_theta, e_phi = specfun.unit_vectors(theta, phi)
    return np.stack([1j * e_phi.astype(complex), e_theta.astype(complex)])


def plane_wave_mode(kappa: PlaneModeIndex, point) -> FieldSample:
    """Normalized plane-wave mode G_kappa(r) = e^{i k.r} e_g / (2 pi)^{3/2}."""
    p = _as_point(point)
    e_g = polarization_vectors(kappa)[kappa.g - 1]
    value = cmath.exp(1j * float(np.dot(kappa.kvec, p))) / (2.0 * math.pi) ** 1.5 * e_g
    return FieldSample(value=value, point=p)


@functools.lru_cache(maxsize=64)
def _coefficient_table(
    theta_k: float, phi_k: float, g: int, l_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """c_{lmg}^p tables (TE, TM), each shaped (l_max+1, 2 l_max+1)."""
    bx, _, _ = specfun.vector_harmonics_block(l_max, theta_k, phi_k)
    x_theta = np.conj(bx[..., 1])
    x_phi = np.conj(bx[..., 2])
    ls = np.arange(l_max + 1)[:, None]
    if g == 1:
        c_te = 1j**(ls + 1) * x_phi
        c_tm = 1j**(ls - 1) * x_theta
    else:
        c_te = 1j**ls * x_theta
        c_tm = 1j**ls * x_phi
    return c_te, c_tm


def plane_wave_coefficients(kappa: PlaneModeIndex, l_max: int) -> list[PlaneWaveCoefficient]:
    """Multipole coefficients c_{lmg}^p of the plane-wave mode, l <= l_max.

    Pure functions of the propagation direction; |kvec| does not enter.
    """
    if l_max < 1:
        raise DomainError(f"l_max={l_max} must be >= 1")
    theta_k, phi_k = kappa.angles
    c_te, c_tm = _coefficient_table(theta_k, phi_k, kappa.g, l_max)
    out = []
    for l in range(1, l_max + 1):
        for m in range(-l, l + 1):
            out.append(PlaneWaveCoefficient(ChannelIndex("TE", l), m, kappa.g, complex(c_te[l, m + l_max])))
            out.append(PlaneWaveCoefficient(ChannelIndex("TM", l), m, kappa.g, complex(c_tm[l, m + l_max])))
    return out


# ------------------------------------------------------- scattering modes

def _radial_tables(
    spec: SphereSpec | None,
    k: float,
    r: float,
    l_max: int,
    direction: str,
    kind: str,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays f^TE_{l,l}, f^TM_{l,l+1}, f^TM_{l,l-1} for l = 0..l_max (row 0 unused)."""
    sign = -1.0 if direction == "outgoing" else 1.0
    j_vac = specfun.spherical_bessel_j(l_max + 1, k * r)
    if kind == "vacuum":
        ls = np.arange(l_max + 1)
        return j_vac[ls].astype(complex), j_vac[np.minimum(ls + 1, l_max + 1)].astype(complex), j_vac[np.maximum(ls - 1, 0)].astype(complex)
    table = _phase_table(spec, k * spec.radius, l_max)
    ls = np.arange(l_max + 1)
    phases = {}
    for p in ("TE", "TM"):
        phi_arr = np.array([0.0] + [table[p][l].phi for l in range(1, l_max + 1)])
        gam = np.array([1.0] + [table[p][l].gamma_l for l in range(1, l_max + 1)])
        sin = np.array([0.0] + [table[p][l].sin_phi for l in range(1, l_max + 1)])
        phases[p] = (np.exp(sign * 1j * phi_arr), gam, sin)
    inside = r < spec.radius
    if inside:
        j_in = specfun.spherical_bessel_j(l_max + 1, math.sqrt(spec.epsilon) * k * r)
        def fam(p, lp):
            ph, gam, _ = phases[p]
            return ph * gam * j_in[lp]
    else:
        y = specfun.spherical_bessel_y(l_max + 1, k * r)
        h1 = j_vac + 1j * y
        def fam(p, lp):
            ph, _, sin = phases[p]
            if direction == "outgoing":
                return j_vac[lp] - 1j * sin * ph * h1[lp]
            return j_vac[lp] + 1j * sin * ph * np.conj(h1[lp])
    f_te = fam("TE", ls)
    f_tm_up = fam("TM", np.minimum(ls + 1, l_max + 1))
    f_tm_dn = fam("TM", np.maximum(ls - 1, 0))
    if kind == "scattered":
        f_te = f_te - j_vac[ls]
        f_tm_up = f_tm_up - j_vac[np.minimum(ls + 1, l_max + 1)]
        f_tm_dn = f_tm_dn - j_vac[np.maximum(ls - 1, 0)]
    return f_te, f_tm_up, f_tm_dn


def _mode_sum(
    spec: SphereSpec | None,
    kappa: PlaneModeIndex,
    direction: str,
    point: np.ndarray,
    l_max: int,
    kind: str,
) -> np.ndarray:
    """(1/k) sum_{plm} c_{lmg}^p S^p_{lm}(r) of the requested radial kind."""
    r, theta, phi = _spherical_coords(point)
    k = kappa.k
    theta_k, phi_k = kappa.angles
    c_te, c_tm = _coefficient_table(theta_k, phi_k, kappa.g, l_max)
    bx, bv, bw = specfun.vector_harmonics_block(l_max, theta, phi)
    f_te, f_tm_up, f_tm_dn = _radial_tables(spec, k, r, l_max, direction, kind)
    ls = np.arange(l_max + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_v = np.sqrt(ls / (2.0 * ls + 1.0))
        w_w = np.sqrt((ls + 1.0) / (2.0 * ls + 1.0))
    # per-l radial weights against the per-(l,m) angular sums
    ang_x = np.einsum("lm,lmc->lc", c_te, bx)
    ang_v = np.einsum("lm,lmc->lc", c_tm, bv)
    ang_w = np.einsum("lm,lmc->lc", c_tm, bw)
    sph = np.einsum("l,lc->c", f_te, ang_x)
    sph += np.einsum("l,lc->c", w_v * f_tm_up, ang_v)
    sph -= np.einsum("l,lc->c", w_w * f_tm_dn, ang_w)
    norm = k * math.sqrt(2.0 / math.pi)
    return (norm / k) * specfun.spherical_to_cartesian(sph, theta, phi)


def scattering_eigenmode(
    spec: SphereSpec,
    kappa: PlaneModeIndex,
    direction: str,
    point,
    l_max: int | None = None,
    form: str = "direct",
    plane_wave: str = "exact",
) -> FieldSample:
    """Normalized scattering eigenmode F_kappa(r).

    form "direct" evaluates (1/k) sum c S directly; form "mie" uses the
    decomposition F = G + (1/k) sum c S^sc, whose scattered series converges
    with the sphere's truncation order rather than with kr (use it far from
    the sphere). plane_wave "truncated" replaces G by its own multipole sum,
    making the two forms agree to machine precision at shared truncation.
    """
    if direction not in DIRECTIONS:
        raise DomainError(f"direction {direction!r} not in {DIRECTIONS}")
    if form not in ("direct", "mie"):
        raise DomainError(f"form {form!r} not in ('direct', 'mie')")
    if plane_wave not in ("exact", "truncated"):
        raise DomainError(f"plane_wave {plane_wave!r} not in ('exact', 'truncated')")
    p = _as_point(point)
    r, _, _ = _spherical_coords(p)
    k = kappa.k
    q = k * spec.radius
    if l_max is None:
        if form == "direct":
            l_max = min(specfun.HARD_CAP_LMAX, truncation_order(q) + math.ceil(k * r))
        else:
            l_max = truncation_order(q)
    if form == "direct":
        value = _mode_sum(spec, kappa, direction, p, l_max, "full")
    else:
        if plane_wave == "exact":
            base = plane_wave_mode(kappa, p).value
        else:
            base = _mode_sum(None, kappa, direction, p, l_max, "vacuum")
        value = base + _mode_sum(spec, kappa, direction, p, l_max, "scattered")
    return FieldSample(value=value, point=p)


def dipole_limit_field(spec: SphereSpec, kappa: PlaneModeIndex, point) -> FieldSample:
    """Small-particle approximation: plane wave plus induced-dipole radiation.

    The sphere is replaced by a point dipole p = alpha G(0) at the origin with
    polarizability 3 eps0 V (eps-1)/(eps+2); the radiated part applies the
    free-space Green's tensor, so mu0 w^2 alpha = 3 V k^2 (eps-1)/(eps+2).
    """
    p = _as_point(point)
    r, _, _ = _spherical_coords(p)
    if r < spec.radius:
        raise DomainError("dipole comparison point must lie outside the sphere")
    base = plane_wave_mode(kappa, p).value
    eps = spec.epsilon
    if eps == 1.0:
        return FieldSample(value=base, point=p)
    k = kappa.k
    vol = 4.0 / 3.0 * math.pi * spec.radius**3
    strength = 3.0 * vol * k * k * (eps - 1.0) / (eps + 2.0)
    dip = plane_wave_mode(kappa, (0.0, 0.0, 0.0)).value
    rhat = p / r
    kr = k * r
    rad = (1.0 + 1j / kr - 1.0 / kr**2) * dip
    rad += (-1.0 - 3j / kr + 3.0 / kr**2) * np.dot(rhat, dip) * rhat
    rad *= cmath.exp(1j * kr) / (4.0 * math.pi * r)
    return FieldSample(value=base + strength * rad, point=p)


def field_intensity_map(spec: SphereSpec, mode: SphericalModeIndex, grid) -> np.ndarray:
    """Adimensional intensity |S_alpha(r)/k|^2 over a set of points."""
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError(f"grid must be (N, 3), got {pts.shape}")
    out = np.empty(pts.shape[0])
    for i, pt in enumerate(pts):
        val = spherical_eigenmode(spec, mode, pt).value
        out[i] = float(np.real(np.vdot(val, val))) / mode.k**2
    return out
