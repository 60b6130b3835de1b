"""The unified connection: sharps, the Phi splitting, the deformation tensor
H, total coefficients, torsion, and non-metricity.

The connection is parameterized by two scalar fields f1, f2, three one-forms
u, u1, u2 and an endomorphism phi over a Riemannian metric g:

    nabla~_X Y = nabla_X Y + u(Y) phi1 X - u(X) phi2 Y - g(phi1 X, Y) U
                 - f1 {u1(X) Y + u1(Y) X - g(X, Y) U1} - f2 g(X, Y) U2

where U, U1, U2 are the metric sharps of u, u1, u2 and phi = phi1 + phi2 is
the split of phi into its g-self-adjoint and g-skew parts.  Everything here
is evaluated in the coordinate frame, batched over points.

Residuals are max-abs differences normalized by max(1, max-abs of the
compared tensors), so tolerances are scale-free across manifolds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BadParams, DimensionMismatch
from .fields import (
    Chart,
    EndoFieldJet,
    MetricFieldJet,
    OneFormFieldJet,
    PolynomialEndoField,
    PolynomialOneFormField,
    PolynomialScalarField,
    random_polynomial,
)
from .levi_civita import InverseMetricJet, PointGeometry

__all__ = [
    "ConnectionSpec",
    "Corruption",
    "H_TERMS",
    "PhiSplit",
    "VectorJet",
    "PointFrame",
    "max_abs",
    "norm_residual",
    "sharp",
    "split_phi",
    "deformation_h",
    "torsion_direct",
    "torsion_predicted",
    "nonmetricity_direct",
    "nonmetricity_predicted",
    "transpose_torsion_from_metric",
    "transpose_torsion_closed",
    "resolve_endo_jet",
    "evaluate_spec",
    "random_spec",
]

# The five addends of H, by name, for fault injection.
H_TERMS = ("h_u_phi1", "h_u_phi2", "h_phi1_u", "h_f1", "h_f2")


@dataclass(frozen=True)
class Corruption:
    """Scale one named term by ``factor`` (test hook; 2.0 doubles it)."""

    name: str
    factor: float = 2.0


@dataclass(frozen=True)
class ConnectionSpec:
    """The six-field bundle (f1, f2, u, u1, u2, phi) over one chart.

    Aliased bindings (for example u1 = u) are the same object in both slots,
    so their evaluations are bit-identical by construction.
    """

    n: int
    f1: object
    f2: object
    u: object
    u1: object
    u2: object
    phi: object

    def __post_init__(self):
        for name in ("f1", "f2", "u", "u1", "u2", "phi"):
            f = getattr(self, name)
            if getattr(f, "n", None) != self.n:
                raise DimensionMismatch(
                    f"spec field {name!r} has dimension {getattr(f, 'n', None)}, "
                    f"expected {self.n}"
                )

    @classmethod
    def build(cls, n, f1=None, f2=None, u=None, u1=None, u2=None, phi=None):
        return cls(
            n=n,
            f1=f1 if f1 is not None else PolynomialScalarField.zero(n),
            f2=f2 if f2 is not None else PolynomialScalarField.zero(n),
            u=u if u is not None else PolynomialOneFormField.zero(n),
            u1=u1 if u1 is not None else PolynomialOneFormField.zero(n),
            u2=u2 if u2 is not None else PolynomialOneFormField.zero(n),
            phi=phi if phi is not None else PolynomialEndoField.zero(n),
        )

    @classmethod
    def zero(cls, n: int) -> "ConnectionSpec":
        return cls.build(n)

    def with_zeroed(self, name: str) -> "ConnectionSpec":
        """Copy with one binding replaced by the zero field (ablation tool).

        Zeroing ``u`` (etc.) also zeroes any alias of the same object.
        """
        zeros = {
            "f1": PolynomialScalarField.zero(self.n),
            "f2": PolynomialScalarField.zero(self.n),
            "u": PolynomialOneFormField.zero(self.n),
            "u1": PolynomialOneFormField.zero(self.n),
            "u2": PolynomialOneFormField.zero(self.n),
            "phi": PolynomialEndoField.zero(self.n),
        }
        if name not in zeros:
            raise BadParams(f"no spec binding named {name!r}")
        old = getattr(self, name)
        updates = {name: zeros[name]}
        for other in zeros:
            if other != name and getattr(self, other) is old:
                updates[other] = zeros[other]
        return replace(self, **updates)


def max_abs(*arrays) -> float:
    out = 0.0
    for a in arrays:
        if a.size:
            out = max(out, float(np.max(np.abs(a))))
    return out


def norm_residual(a: np.ndarray, b: np.ndarray) -> float:
    """max|a - b| / max(1, max|a|, max|b|)."""
    return max_abs(a - b) / max(1.0, max_abs(a, b))


@dataclass(frozen=True)
class VectorJet:
    comp: np.ndarray  # (m, n)
    d1: np.ndarray  # (m, n, n), d1[p, a, k] = d_a xi^k


def sharp(eta: OneFormFieldJet, inv: InverseMetricJet) -> VectorJet:
    """Raise a one-form: xi^k = g^km eta_m, with the exact 1-jet."""
    comp = np.einsum("pkm,pm->pk", inv.comp, eta.comp)
    d1 = np.einsum("pakm,pm->pak", inv.d1, eta.comp) + np.einsum(
        "pkm,pam->pak", inv.comp, eta.d1
    )
    return VectorJet(comp=comp, d1=d1)


@dataclass(frozen=True)
class PhiSplit:
    """g-self-adjoint / g-skew decomposition of phi.

    Phi_ij = g(phi d_i, d_j); Phi1/Phi2 are its symmetric and antisymmetric
    parts and phi1/phi2 their g-raisings.  Phi is stored as Phi1 + Phi2 so
    the recomposition identity holds to the bit (it differs from the raw
    product phi^m_i g_mj by at most one rounding).
    """

    Phi: np.ndarray  # (m, n, n)
    Phi1: np.ndarray
    Phi2: np.ndarray
    phi1: np.ndarray  # (m, n, n), phi1[p, k, i] = (phi1)^k_i
    phi2: np.ndarray
    Phi_d1: np.ndarray  # (m, n, n, n), [p, a, i, j] = d_a Phi_ij
    Phi1_d1: np.ndarray
    Phi2_d1: np.ndarray
    phi1_d1: np.ndarray  # (m, n, n, n), [p, a, k, i] = d_a (phi1)^k_i
    phi2_d1: np.ndarray


def split_phi(phi: EndoFieldJet, mj: MetricFieldJet, inv: InverseMetricJet) -> PhiSplit:
    raw = np.einsum("pmi,pmj->pij", phi.comp, mj.comp)
    raw_d1 = np.einsum("pami,pmj->paij", phi.d1, mj.comp) + np.einsum(
        "pmi,pamj->paij", phi.comp, mj.d1
    )
    raw_t = raw.swapaxes(1, 2)
    raw_d1_t = raw_d1.swapaxes(2, 3)
    p1 = 0.5 * (raw + raw_t)
    p2 = 0.5 * (raw - raw_t)
    p1_d1 = 0.5 * (raw_d1 + raw_d1_t)
    p2_d1 = 0.5 * (raw_d1 - raw_d1_t)

    def raise_form(form, form_d1):
        comp = np.einsum("pim,pmk->pki", form, inv.comp)
        d1 = np.einsum("paim,pmk->paki", form_d1, inv.comp) + np.einsum(
            "pim,pamk->paki", form, inv.d1
        )
        return comp, d1

    phi1, phi1_d1 = raise_form(p1, p1_d1)
    phi2, phi2_d1 = raise_form(p2, p2_d1)
    return PhiSplit(
        Phi=p1 + p2,
        Phi1=p1,
        Phi2=p2,
        phi1=phi1,
        phi2=phi2,
        Phi_d1=p1_d1 + p2_d1,
        Phi1_d1=p1_d1,
        Phi2_d1=p2_d1,
        phi1_d1=phi1_d1,
        phi2_d1=phi2_d1,
    )


def _h_terms(g, u, u1, u2, f1, f2, split, U, U1, U2):
    """The five addends of H^k_ij, keyed by their fault-injection names."""
    n = g.shape[-1]
    eye = np.eye(n)
    rec = (
        np.einsum("pi,kj->pkij", u1, eye)
        + np.einsum("pj,ki->pkij", u1, eye)
        - np.einsum("pij,pk->pkij", g, U1)
    )
    return {
        "h_u_phi1": np.einsum("pj,pki->pkij", u, split.phi1),
        "h_u_phi2": -np.einsum("pi,pkj->pkij", u, split.phi2),
        "h_phi1_u": -np.einsum("pij,pk->pkij", split.Phi1, U),
        "h_f1": -f1[:, None, None, None] * rec,
        "h_f2": -f2[:, None, None, None] * np.einsum("pij,pk->pkij", g, U2),
    }


def deformation_h(
    g, u, u1, u2, f1, f2, split: PhiSplit, U, U1, U2, corrupt: Corruption | None = None
) -> np.ndarray:
    """H^k_ij = u_j phi1^k_i - u_i phi2^k_j - Phi1_ij U^k
    - f1 {u1_i d^k_j + u1_j d^k_i - g_ij U1^k} - f2 g_ij U2^k."""
    terms = _h_terms(g, u, u1, u2, f1, f2, split, U, U1, U2)
    if corrupt is not None and corrupt.name in terms:
        terms[corrupt.name] = corrupt.factor * terms[corrupt.name]
    return sum(terms.values())


def torsion_direct(gamma_tilde: np.ndarray) -> np.ndarray:
    """T~^k_ij = Gamma~^k_ij - Gamma~^k_ji; antisymmetric exactly."""
    return gamma_tilde - gamma_tilde.swapaxes(2, 3)


def torsion_predicted(u: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Theorem's torsion law T~(X, Y) = u(Y) phi X - u(X) phi Y."""
    half = np.einsum("pj,pki->pkij", u, phi)
    return half - half.swapaxes(2, 3)


def nonmetricity_direct(gamma_tilde: np.ndarray, mj: MetricFieldJet) -> np.ndarray:
    """(nabla~_i g)_jk = d_i g_jk - Gamma~^m_ij g_mk - Gamma~^m_ik g_jm.

    The two lowered terms are one contraction and its (j,k) swap; adding
    them before subtracting keeps the result exactly symmetric in (j,k).
    """
    low = np.einsum("pmij,pmk->pijk", gamma_tilde, mj.comp)
    return mj.d1 - (low + low.swapaxes(2, 3))


def nonmetricity_predicted(g, u1, u2, f1, f2) -> np.ndarray:
    """Theorem's metricity law (nabla~_X g)(Y,Z) = 2 f1 u1(X) g(Y,Z)
    + f2 {u2(Y) g(X,Z) + u2(Z) g(X,Y)}."""
    return (
        2.0 * f1[:, None, None, None] * np.einsum("pi,pjk->pijk", u1, g)
        + f2[:, None, None, None]
        * (np.einsum("pj,pik->pijk", u2, g) + np.einsum("pk,pij->pijk", u2, g))
    )


def transpose_torsion_from_metric(t_direct, g, ginv) -> np.ndarray:
    """Solve g(T~'(X, Y), Z) = g(T~(Z, X), Y) for T~'^l_ij."""
    lowered = np.einsum("pmki,pmj->pijk", t_direct, g)
    return np.einsum("pijk,pkl->plij", lowered, ginv)


def transpose_torsion_closed(u, split: PhiSplit, U) -> np.ndarray:
    """T~'(X, Y) = u(X) phi1 Y - u(X) phi2 Y - Phi(X, Y) U."""
    return np.einsum("pi,plj->plij", u, split.phi1 - split.phi2) - np.einsum(
        "pij,pl->plij", split.Phi, U
    )


def resolve_endo_jet(phi_field, geo: PointGeometry) -> EndoFieldJet:
    """Plain fields evaluate at points; derived fields (symmetric part,
    Ricci operator) evaluate against the geometry bundle."""
    if hasattr(phi_field, "jet_geo"):
        return phi_field.jet_geo(geo)
    return phi_field.jet(geo.pts)


@dataclass
class PointFrame:
    """Everything Theorem-1 checks need at one batch of points."""

    geo: PointGeometry
    spec: ConnectionSpec
    f1: object
    f2: object
    u: OneFormFieldJet
    u1: OneFormFieldJet
    u2: OneFormFieldJet
    phi: EndoFieldJet
    split: PhiSplit
    u_sharp: VectorJet
    u1_sharp: VectorJet
    u2_sharp: VectorJet
    h: np.ndarray
    gamma_tilde: np.ndarray
    corrupt: Corruption | None = None


def evaluate_spec(
    chart: Chart,
    metric_field,
    spec: ConnectionSpec,
    pts,
    order: int = 1,
    corrupt: Corruption | None = None,
) -> PointFrame:
    if spec.n != chart.n:
        raise DimensionMismatch(
            f"spec dimension {spec.n} does not match chart dimension {chart.n}"
        )
    # Geometry-derived phi fields may need deeper metric jets than the caller
    # asked for (the Ricci operator's 1-jet takes metric order 3).
    order = max(order, getattr(spec.phi, "min_metric_order", 1))
    geo = PointGeometry(chart, metric_field, pts, order=order)

    # Aliased bindings get one jet object, hence bit-identical values.
    jet_cache: dict[int, object] = {}

    def one_form(f) -> OneFormFieldJet:
        key = id(f)
        if key not in jet_cache:
            jet_cache[key] = f.jet(geo.pts)
        return jet_cache[key]

    f1 = spec.f1.jet(geo.pts)
    f2 = spec.f2.jet(geo.pts)
    u, u1, u2 = one_form(spec.u), one_form(spec.u1), one_form(spec.u2)
    phi = resolve_endo_jet(spec.phi, geo)
    split = split_phi(phi, geo.metric, geo.inv)

    sharp_cache: dict[int, VectorJet] = {}

    def raise_one(jet) -> VectorJet:
        key = id(jet)
        if key not in sharp_cache:
            sharp_cache[key] = sharp(jet, geo.inv)
        return sharp_cache[key]

    us, u1s, u2s = raise_one(u), raise_one(u1), raise_one(u2)
    h = deformation_h(
        geo.g,
        u.comp,
        u1.comp,
        u2.comp,
        f1.value,
        f2.value,
        split,
        us.comp,
        u1s.comp,
        u2s.comp,
        corrupt=corrupt,
    )
    return PointFrame(
        geo=geo,
        spec=spec,
        f1=f1,
        f2=f2,
        u=u,
        u1=u1,
        u2=u2,
        phi=phi,
        split=split,
        u_sharp=us,
        u1_sharp=u1s,
        u2_sharp=u2s,
        h=h,
        gamma_tilde=geo.gamma + h,
        corrupt=corrupt,
    )


def random_spec(chart: Chart, rng, degree: int = 3) -> ConnectionSpec:
    """All six bindings as dense random polynomials, coefficients in [-1, 1].

    phi is a full endomorphism (neither symmetric nor skew) so both phi1 and
    phi2 branches of H are exercised.  Generation order is fixed, so a seeded
    rng reproduces the spec.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    n = chart.n

    def poly():
        return random_polynomial(n, rng, degree)

    f1 = PolynomialScalarField(n, poly())
    f2 = PolynomialScalarField(n, poly())
    u = PolynomialOneFormField(n, [poly() for _ in range(n)])
    u1 = PolynomialOneFormField(n, [poly() for _ in range(n)])
    u2 = PolynomialOneFormField(n, [poly() for _ in range(n)])
    phi = PolynomialEndoField(n, [[poly() for _ in range(n)] for _ in range(n)])
    return ConnectionSpec(n=n, f1=f1, f2=f2, u=u, u1=u1, u2=u2, phi=phi)
