"""Single-photon scattering observables and two-photon correlation maps.

Everything here is a delta-stripped elastic kernel: the continuum Dirac
factors of the formal S-matrix never appear, and equal-frequency constraints
are enforced on the mode labels instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import modes
from .errors import ConsistencyError, DomainError
from .miecore import ChannelIndex, SphereSpec, phase_shift, truncation_order
from .modes import PlaneModeIndex

__all__ = [
    "ScatteringAmplitude",
    "CrossSectionResult",
    "SMatrixChannel",
    "CorrelationGrid",
    "p_alpha",
    "scattering_amplitude",
    "s_matrix_channels",
    "total_cross_section",
    "differential_cross_section",
    "transition_amplitude_kernel",
    "g2_map",
    "g2_small_particle",
]

_ELASTIC_RTOL = 1e-12


@dataclass(frozen=True)
class ScatteringAmplitude:
    """Elastic scattering amplitude f between two plane-wave labels."""

    value: complex
    kappa_out: PlaneModeIndex
    kappa_in: PlaneModeIndex


@dataclass(frozen=True)
class CrossSectionResult:
    """Total cross section with its per-channel decomposition."""

    sigma: float
    per_channel: tuple
    l_max_used: int


@dataclass(frozen=True)
class SMatrixChannel:
    """Unimodular channel value e^{-2 i phi_l^p} of the S-matrix."""

    channel: ChannelIndex
    value: complex


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    """g2 values over an azimuth x azimuth detector grid.

    Undefined points (zero single-photon signal at a detector) are NaN.
    """

    phi1: np.ndarray
    phi2: np.ndarray
    values: np.ndarray
    theta1: float
    theta2: float
    pol_i: str
    pol_j: str


def _require_elastic(kappa_out: PlaneModeIndex, kappa_in: PlaneModeIndex) -> float:
    k_out, k_in = kappa_out.k, kappa_in.k
    if abs(k_out - k_in) > _ELASTIC_RTOL * k_in:
        raise DomainError(
            f"inelastic pair |k_out|={k_out} vs |k_in|={k_in}; photons keep their frequency"
        )
    return k_in


def p_alpha(spec: SphereSpec, q: float, channel: ChannelIndex, method: str = "phase") -> float:
    """Scattered far-field power fraction P_alpha = sin^2 phi of one channel.

    method "phase" uses the channel phase shift; "quadrature" integrates
    |S_sc|^2 numerically over the far-field sphere as a cross-check route.
    """
    if method == "phase":
        return phase_shift(spec, q, channel).sin_phi ** 2
    if method != "quadrature":
        raise DomainError(f"method {method!r} not in ('phase', 'quadrature')")
    k = q / spec.radius
    r = 1e3 / k
    n_theta, n_phi = 24, 28
    mu, w_mu = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(mu)
    phis = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    mode = modes.SphericalModeIndex(channel, 0, k)
    acc = 0.0
    for theta, w in zip(thetas, w_mu):
        for phi in phis:
            pt = r * np.array([
                math.sin(theta) * math.cos(phi),
                math.sin(theta) * math.sin(phi),
                math.cos(theta),
            ])
            v = modes.scattered_part(spec, mode, pt).value
            acc += w * (2.0 * math.pi / n_phi) * float(np.real(np.vdot(v, v)))
    return (math.pi / 2.0) * r * r * acc


def _phase_arrays(spec: SphereSpec, q: float, l_max: int):
    """(sin phi, e^{-i phi}) per polarization, index l (row 0 zero)."""
    table = modes._phase_table(spec, q, l_max)
    out = {}
    for p in ("TE", "TM"):
        sin = np.array([0.0] + [table[p][l].sin_phi for l in range(1, l_max + 1)])
        phase = np.array([1.0 + 0j] + [
            complex(math.cos(table[p][l].phi), -math.sin(table[p][l].phi))
            for l in range(1, l_max + 1)
        ])
        out[p] = (sin, phase)
    return out


def scattering_amplitude(
    spec: SphereSpec,
    kappa_out: PlaneModeIndex,
    kappa_in: PlaneModeIndex,
    l_max: int | None = None,
) -> ScatteringAmplitude:
    """f_{kk'} = -(4 pi/|k|) sum c*(out) c(in) sin(phi) e^{-i phi}, truncated."""
    k = _require_elastic(kappa_out, kappa_in)
    q = k * spec.radius
    if l_max is None:
        l_max = truncation_order(q)
    to, po = kappa_out.angles
    ti, pi_ = kappa_in.angles
    c_te_o, c_tm_o = modes._coefficient_table(to, po, kappa_out.g, l_max)
    c_te_i, c_tm_i = modes._coefficient_table(ti, pi_, kappa_in.g, l_max)
    ph = _phase_arrays(spec, q, l_max)
    acc = 0.0j
    for p, (c_o, c_i) in (("TE", (c_te_o, c_te_i)), ("TM", (c_tm_o, c_tm_i))):
        sin, phase = ph[p]
        m_sum = np.einsum("lm,lm->l", np.conj(c_o), c_i)
        acc += np.sum(m_sum * sin * phase)
    return ScatteringAmplitude(value=complex(-4.0 * math.pi / k * acc),
                               kappa_out=kappa_out, kappa_in=kappa_in)


def s_matrix_channels(spec: SphereSpec, q: float, l_max: int | None = None) -> list[SMatrixChannel]:
    """Per-channel S-matrix values e^{-2 i phi_l^p}, l = 1..l_max."""
    if l_max is None:
        l_max = truncation_order(q)
    out = []
    for p in ("TE", "TM"):
        for l in range(1, l_max + 1):
            rec = phase_shift(spec, q, ChannelIndex(p, l))
            out.append(SMatrixChannel(
                channel=ChannelIndex(p, l),
                value=complex(math.cos(2.0 * rec.phi), -math.sin(2.0 * rec.phi)),
            ))
    return out


def total_cross_section(spec: SphereSpec, q: float, l_max: int | None = None) -> CrossSectionResult:
    """Total elastic cross section, computed two ways and cross-checked.

    The addition-theorem form (2 pi/k^2) sum (2l+1) sin^2 phi is returned;
    the angular-coefficient form built from plane-wave multipole content must
    agree to 1e-9 relative or a consistency error is raised.
    """
    if l_max is None:
        l_max = truncation_order(q)
    k = q / spec.radius
    per_channel = []
    sigma = 0.0
    ph = _phase_arrays(spec, q, l_max)
    for p in ("TE", "TM"):
        sin, _ = ph[p]
        for l in range(1, l_max + 1):
            contrib = (2.0 * math.pi / (k * k)) * (2 * l + 1) * sin[l] ** 2
            per_channel.append((ChannelIndex(p, l), float(contrib)))
            sigma += contrib
    # independent route: 16 pi^2/k^2 sum_plm |c_{lmg} sin(phi)|^2 for one
    # concrete incoming label (any direction and g; the sum is isotropic)
    kappa = PlaneModeIndex(1, (0.48 * k, 0.36 * k, 0.8 * k))
    th, pp = kappa.angles
    c_te, c_tm = modes._coefficient_table(th, pp, kappa.g, l_max)
    angular = 0.0
    for p, c in (("TE", c_te), ("TM", c_tm)):
        sin, _ = ph[p]
        angular += float(np.sum(np.abs(c) ** 2 * sin[:, None] ** 2))
    angular *= 16.0 * math.pi**2 / (k * k)
    if abs(angular - sigma) > 1e-9 * max(sigma, 1e-300):
        raise ConsistencyError(
            f"cross-section forms disagree: angular={angular!r} vs channels={sigma!r}"
        )
    return CrossSectionResult(sigma=float(sigma), per_channel=tuple(per_channel),
                              l_max_used=l_max)


def differential_cross_section(
    spec: SphereSpec,
    kappa_in: PlaneModeIndex,
    direction,
    l_max: int | None = None,
) -> float:
    """d sigma/d Omega: |f|^2 summed over outgoing polarizations."""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if n.shape != (3,) or norm == 0.0 or not np.all(np.isfinite(n)):
        raise DomainError("direction must be a finite nonzero 3-vector")
    n = n / norm
    k = kappa_in.k
    total = 0.0
    for g in (1, 2):
        kappa_out = PlaneModeIndex(g, tuple(k * n))
        f = scattering_amplitude(spec, kappa_out, kappa_in, l_max)
        total += abs(f.value) ** 2
    return total


def transition_amplitude_kernel(
    spec: SphereSpec,
    kappa_out: PlaneModeIndex,
    kappa_in: PlaneModeIndex,
    l_max: int | None = None,
) -> complex:
    """Delta-stripped single-photon transition kernel i f / (2 pi |k|)."""
    k = _require_elastic(kappa_out, kappa_in)
    f = scattering_amplitude(spec, kappa_out, kappa_in, l_max)
    return 1j * f.value / (2.0 * math.pi * k)


_POL_AXES = {"x": np.array([1.0, 0.0, 0.0]),
             "y": np.array([0.0, 1.0, 0.0]),
             "z": np.array([0.0, 0.0, 1.0])}


def _pol_axis(label) -> tuple[str, np.ndarray]:
    if isinstance(label, str):
        if label not in _POL_AXES:
            raise DomainError(f"polarization axis {label!r} not in ('x', 'y', 'z')")
        return label, _POL_AXES[label]
    v = np.asarray(label, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0.0:
        raise DomainError("polarization axis must be 'x'/'y'/'z' or a nonzero 3-vector")
    return "custom", v / np.linalg.norm(v)


def g2_small_particle(phi1, phi2):
    """Closed-form small-particle correlation surface sin^2(phi1 + phi2)."""
    return np.sin(np.asarray(phi1) + np.asarray(phi2)) ** 2


def g2_map(
    spec: SphereSpec,
    kappa1: PlaneModeIndex,
    kappa2: PlaneModeIndex,
    pol_i,
    pol_j,
    theta1: float,
    theta2: float,
    phi1_grid,
    phi2_grid,
    r_detector: float | None = None,
    l_max: int | None = None,
) -> CorrelationGrid:
    """Normalized second-order correlation g2_ij over detector azimuths.

    Two photons occupy the outgoing scattering eigenmodes of kappa1, kappa2;
    detectors sit at radius r_detector with fixed polar angles. The numerator
    is the symmetrized two-mode projection, the denominator the product of
    single-photon intensities; zero-intensity detectors yield NaN.
    """
    k = _require_elastic(kappa1, kappa2)
    name_i, e_i = _pol_axis(pol_i)
    name_j, e_j = _pol_axis(pol_j)
    phi1 = np.asarray(phi1_grid, dtype=float)
    phi2 = np.asarray(phi2_grid, dtype=float)
    if phi1.ndim != 1 or phi2.ndim != 1 or phi1.size == 0 or phi2.size == 0:
        raise DomainError("phi grids must be non-empty 1-D arrays")
    if r_detector is None:
        r_detector = 1e3 / k
    if k * r_detector < 1e3:
        warnings.warn(
            f"detector radius k r = {k * r_detector:.3g} < 1e3; far-field "
            "normalization may be degraded",
            UserWarning,
            stacklevel=2,
        )
    if l_max is None:
        l_max = truncation_order(k * spec.radius)

    def detector_fields(theta: float, phis: np.ndarray, axis: np.ndarray):
        f1 = np.empty(phis.size, dtype=complex)
        f2 = np.empty(phis.size, dtype=complex)
        st, ct = math.sin(theta), math.cos(theta)
        for idx, phi in enumerate(phis):
            pt = r_detector * np.array([st * math.cos(phi), st * math.sin(phi), ct])
            f1[idx] = np.dot(axis, modes.scattering_eigenmode(
                spec, kappa1, "outgoing", pt, l_max=l_max, form="mie").value)
            f2[idx] = np.dot(axis, modes.scattering_eigenmode(
                spec, kappa2, "outgoing", pt, l_max=l_max, form="mie").value)
        return f1, f2

    a1, a2 = detector_fields(theta1, phi1, e_i)
    b1, b2 = detector_fields(theta2, phi2, e_j)
    num = np.abs(a1[:, None] * b2[None, :] + a2[:, None] * b1[None, :]) ** 2
    den = (np.abs(a1) ** 2 + np.abs(a2) ** 2)[:, None] * (np.abs(b1) ** 2 + np.abs(b2) ** 2)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(den > 0.0, num / den, np.nan)
    return CorrelationGrid(phi1=phi1, phi2=phi2, values=values,
                           theta1=float(theta1), theta2=float(theta2),
                           pol_i=name_i, pol_j=name_j)
