"""Curvature of the unified connection, two independent ways.

``curvature_formula`` assembles the closed-form expression for R~ out of the
helper tensors alpha/A, beta/B, mu and R0; its fourteen addend groups (one
per display line of the source formula) are named and individually
toggleable.  ``curvature_direct`` is the oracle: it differentiates
Gamma~ = Gamma + H once, exactly, building every ingredient inline from raw
field jets so the two paths share no helper-tensor code.  ``diagnose`` turns
a mismatch into an attribution table plus a minimal failing configuration.

Curvature layout: ``r[p, l, i, j, k]`` is the d_l component of R~(d_i, d_j)
d_k.  The exterior derivative convention is 2du(d_i, d_j) = d_i u_j - d_j u_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import (
    Corruption,
    H_TERMS,
    ConnectionSpec,
    PointFrame,
    evaluate_spec,
    max_abs,
    norm_residual,
    sharp,
)
from .errors import BadParams
from .fields import Chart, OneFormFieldJet
from .levi_civita import (
    PointGeometry,
    cov_deriv_endo,
    cov_deriv_oneform,
    cov_deriv_vector,
)

__all__ = [
    "GROUPS",
    "CORRUPTIBLE_TERMS",
    "EtaHelpers",
    "CurvatureReport",
    "eta_helpers",
    "mu_tensor",
    "r0",
    "exterior_2du",
    "curvature_formula",
    "curvature_direct",
    "needed_order",
    "compare_curvature",
    "diagnose",
    "BINDING_NAMES",
]

# The 14 addend groups of the curvature formula, by display line.
GROUPS = (
    "riemann",
    "du_phi2",
    "alpha_phi1",
    "a_phi1",
    "r0_mu",
    "nabla_phi2",
    "f1_block",
    "f2_block",
    "f1_sq",
    "f2_sq",
    "f1_f2",
    "xf1_block",
    "yf1_block",
    "grad_f2",
)

CORRUPTIBLE_TERMS = H_TERMS + GROUPS

BINDING_NAMES = ("u", "u1", "u2", "f1", "f2", "phi")


@dataclass(frozen=True)
class EtaHelpers:
    """beta/B and alpha/A for one one-form eta.

    beta[p, i, j] = beta(eta, d_i, d_j); bvec[p, i, l] = B(eta, d_i)^l
    (second index is the vector slot); alpha and avec likewise.
    """

    beta: np.ndarray
    bvec: np.ndarray
    alpha: np.ndarray
    avec: np.ndarray


def _sharp_for(frame: PointFrame, eta: OneFormFieldJet):
    for jet, vj in (
        (frame.u, frame.u_sharp),
        (frame.u1, frame.u1_sharp),
        (frame.u2, frame.u2_sharp),
    ):
        if eta is jet:
            return vj
    return sharp(eta, frame.geo.inv)


def eta_helpers(eta: OneFormFieldJet, frame: PointFrame) -> EtaHelpers:
    """beta(eta,X,Y) = (nabla_X eta)Y + u(X) eta(phi2 Y) - eta(phi1 X) u(Y)
    + eta(U) g(phi1 X, Y); B is its g-raising on the Y slot; alpha and A
    subtract half of the eta(U) term."""
    geo, split = frame.geo, frame.split
    u = frame.u.comp
    big_u = frame.u_sharp.comp
    xi = _sharp_for(frame, eta)
    nab_eta = cov_deriv_oneform(eta.comp, eta.d1, geo.gamma)
    nab_xi = cov_deriv_vector(xi.comp, xi.d1, geo.gamma)
    eta_phi2 = np.einsum("pm,pmj->pj", eta.comp, split.phi2)
    eta_phi1 = np.einsum("pm,pmi->pi", eta.comp, split.phi1)
    eta_u = np.einsum("pm,pm->p", eta.comp, big_u)
    beta = (
        nab_eta
        + np.einsum("pi,pj->pij", u, eta_phi2)
        - np.einsum("pi,pj->pij", eta_phi1, u)
        + eta_u[:, None, None] * split.Phi1
    )
    phi2_xi = np.einsum("plm,pm->pl", split.phi2, xi.comp)
    bvec = (
        nab_xi
        - np.einsum("pi,pl->pil", u, phi2_xi)
        - np.einsum("pi,pl->pil", eta_phi1, big_u)
        + np.einsum("p,pli->pil", eta_u, split.phi1)
    )
    alpha = beta - 0.5 * eta_u[:, None, None] * split.Phi1
    avec = bvec - 0.5 * np.einsum("p,pli->pil", eta_u, split.phi1)
    return EtaHelpers(beta=beta, bvec=bvec, alpha=alpha, avec=avec)


def mu_tensor(frame: PointFrame) -> np.ndarray:
    """mu(X, Y) = (nabla_X phi1) Y - u(X) phi2 phi1 Y, as mu[p, k, i, j]."""
    split = frame.split
    nab1 = cov_deriv_endo(split.phi1, split.phi1_d1, frame.geo.gamma)
    phi2_phi1 = np.einsum("pkm,pmj->pkj", split.phi2, split.phi1)
    return np.einsum("pikj->pkij", nab1) - np.einsum(
        "pi,pkj->pkij", frame.u.comp, phi2_phi1
    )


def r0(g: np.ndarray, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """R0(X, Y)Z = g(Y, Z) X - g(X, Z) Y for batched vectors."""
    gyz = np.einsum("pi,pij,pj->p", y, g, z)
    gxz = np.einsum("pi,pij,pj->p", x, g, z)
    return gyz[:, None] * x - gxz[:, None] * y


def exterior_2du(eta: OneFormFieldJet) -> np.ndarray:
    """2du(d_i, d_j) = d_i eta_j - d_j eta_i; antisymmetric exactly."""
    return eta.d1 - eta.d1.swapaxes(1, 2)


def curvature_formula(
    frame: PointFrame, corrupt: Corruption | None = None
) -> tuple[np.ndarray, dict]:
    """Assemble the closed-form R~ from its 14 named groups.

    Returns (total, groups); each group is an (m, n, n, n, n) array in the
    [p, l, i, j, k] layout.  ``corrupt`` scales one named group.
    """
    geo = frame.geo
    geo.metric.require_order(2, "curvature_formula")
    g = geo.g
    n = geo.n
    eye = np.eye(n)
    split = frame.split
    u, u1, u2 = frame.u.comp, frame.u1.comp, frame.u2.comp
    big_u = frame.u_sharp.comp
    big_u1 = frame.u1_sharp.comp
    big_u2 = frame.u2_sharp.comp
    f1, f2 = frame.f1.value, frame.f2.value
    gf1, gf2 = frame.f1.grad, frame.f2.grad
    phi_full = frame.phi.comp
    big_phi = split.Phi

    helpers_u = eta_helpers(frame.u, frame)
    helpers_u1 = eta_helpers(frame.u1, frame)
    helpers_u2 = eta_helpers(frame.u2, frame)
    mu = mu_tensor(frame)
    du = exterior_2du(frame.u)
    du1 = exterior_2du(frame.u1)
    nab2 = cov_deriv_endo(split.phi2, split.phi2_d1, geo.gamma)

    groups: dict[str, np.ndarray] = {}
    groups["riemann"] = geo.riemann.r
    groups["du_phi2"] = -np.einsum("pij,plk->plijk", du, split.phi2)
    groups["alpha_phi1"] = -np.einsum(
        "pjk,pli->plijk", helpers_u.alpha, split.phi1
    ) + np.einsum("pik,plj->plijk", helpers_u.alpha, split.phi1)
    groups["a_phi1"] = -np.einsum(
        "pjk,pil->plijk", split.Phi1, helpers_u.avec
    ) + np.einsum("pik,pjl->plijk", split.Phi1, helpers_u.avec)
    mud = mu - mu.swapaxes(2, 3)
    gmud = np.einsum("pmij,pmk->pijk", mud, g)
    groups["r0_mu"] = -np.einsum("pijk,pl->plijk", gmud, big_u) + np.einsum(
        "pk,plij->plijk", u, mud
    )
    groups["nabla_phi2"] = np.einsum("pi,pjlk->plijk", u, nab2) - np.einsum(
        "pj,pilk->plijk", u, nab2
    )

    # R0(phi X, U1)Z = u1(Z) phi X - g(phi X, Z) U1, with full phi.
    r0_phix_u1 = np.einsum("pk,pli->plik", u1, phi_full) - np.einsum(
        "pik,pl->plik", big_phi, big_u1
    )
    inner_f1 = (
        np.einsum("pij,lk->plijk", du1, eye)
        - np.einsum("pjk,li->plijk", helpers_u1.beta, eye)
        + np.einsum("pik,lj->plijk", helpers_u1.beta, eye)
        - np.einsum("pjk,pil->plijk", g, helpers_u1.bvec)
        + np.einsum("pik,pjl->plijk", g, helpers_u1.bvec)
        + np.einsum("pj,plik->plijk", u, r0_phix_u1)
        - np.einsum("pi,pljk->plijk", u, r0_phix_u1)
    )
    groups["f1_block"] = -f1[:, None, None, None, None] * inner_f1

    inner_f2 = (
        np.einsum("pjk,pi,pl->plijk", big_phi, u, big_u2)
        - np.einsum("pik,pj,pl->plijk", big_phi, u, big_u2)
        - np.einsum("pjk,pil->plijk", g, helpers_u2.bvec)
        + np.einsum("pik,pjl->plijk", g, helpers_u2.bvec)
    )
    groups["f2_block"] = f2[:, None, None, None, None] * inner_f2

    u1_u1 = np.einsum("pm,pm->p", u1, big_u1)
    r0_x_u1_u1 = u1_u1[:, None, None] * eye[None] - np.einsum("pi,pl->pli", u1, big_u1)
    r0_x_y_u1 = np.einsum("pj,li->plij", u1, eye) - np.einsum("pi,lj->plij", u1, eye)
    inner_f1sq = (
        np.einsum("pjk,pli->plijk", g, r0_x_u1_u1)
        - np.einsum("pik,plj->plijk", g, r0_x_u1_u1)
        - np.einsum("pk,plij->plijk", u1, r0_x_y_u1)
    )
    groups["f1_sq"] = -(f1 * f1)[:, None, None, None, None] * inner_f1sq

    inner_f2sq = np.einsum("pjk,pi,pl->plijk", g, u2, big_u2) - np.einsum(
        "pik,pj,pl->plijk", g, u2, big_u2
    )
    groups["f2_sq"] = (f2 * f2)[:, None, None, None, None] * inner_f2sq

    # R0(X, U2)U1 - u2(X) U1, as a [p, l, i] vector-valued slot.
    u2_u1 = np.einsum("pm,pm->p", u2, big_u1)
    vec_f1f2 = (
        u2_u1[:, None, None] * eye[None]
        - np.einsum("pi,pl->pli", u1, big_u2)
        - np.einsum("pi,pl->pli", u2, big_u1)
    )
    inner_f1f2 = np.einsum("pjk,pli->plijk", g, vec_f1f2) - np.einsum(
        "pik,plj->plijk", g, vec_f1f2
    )
    groups["f1_f2"] = (f1 * f2)[:, None, None, None, None] * inner_f1f2

    rec = (
        np.einsum("pj,lk->pljk", u1, eye)
        + np.einsum("pk,lj->pljk", u1, eye)
        - np.einsum("pjk,pl->pljk", g, big_u1)
    )
    groups["xf1_block"] = -np.einsum("pi,pljk->plijk", gf1, rec)
    groups["yf1_block"] = np.einsum("pj,plik->plijk", gf1, rec)
    groups["grad_f2"] = -np.einsum("pi,pjk,pl->plijk", gf2, g, big_u2) + np.einsum(
        "pj,pik,pl->plijk", gf2, g, big_u2
    )

    if corrupt is not None and corrupt.name in groups:
        groups[corrupt.name] = corrupt.factor * groups[corrupt.name]
    total = sum(groups.values())
    return total, groups


def needed_order(spec: ConnectionSpec) -> int:
    """Metric jet order the curvature comparison needs: at least 2, more if
    phi is a geometry-derived field with deeper requirements (the Ricci
    operator's 1-jet takes metric order 3)."""
    return max(2, getattr(spec.phi, "min_metric_order", 1))


def curvature_direct(
    chart: Chart,
    metric_field,
    spec: ConnectionSpec,
    pts,
    corrupt: Corruption | None = None,
) -> np.ndarray:
    """Coordinate oracle: R~^l_ijk from the exact 1-jet of Gamma~ = Gamma + H.

    Every intermediate (inverse metric, Christoffel, Phi split, sharps, H and
    its derivative) is rebuilt here from raw field jets; nothing is shared
    with curvature_formula's helper-tensor path.
    """
    pts = chart.require_inside(pts)
    order = needed_order(spec)
    mj = metric_field.jet(pts, order=order)
    g, dg, ddg = mj.comp, mj.d1, mj.d2
    n = chart.n
    eye = np.eye(n)

    f1 = spec.f1.jet(pts)
    f2 = spec.f2.jet(pts)
    jet_cache: dict[int, object] = {}

    def one_form(f):
        key = id(f)
        if key not in jet_cache:
            jet_cache[key] = f.jet(pts)
        return jet_cache[key]

    u, u1, u2 = one_form(spec.u), one_form(spec.u1), one_form(spec.u2)
    if hasattr(spec.phi, "jet_geo"):
        phi = spec.phi.jet_geo(PointGeometry(chart, metric_field, pts, order=order))
    else:
        phi = spec.phi.jet(pts)

    ginv = np.linalg.inv(g)
    dginv = -np.einsum("pab,pkbc,pcd->pkad", ginv, dg, ginv)

    low = 0.5 * (np.einsum("pimj->pmij", dg) + np.einsum("pjmi->pmij", dg) - dg)
    dlow = 0.5 * (np.einsum("paimj->pamij", ddg) + np.einsum("pajmi->pamij", ddg) - ddg)
    gamma = np.einsum("pkm,pmij->pkij", ginv, low)
    dgamma = np.einsum("pakm,pmij->pakij", dginv, low) + np.einsum(
        "pkm,pamij->pakij", ginv, dlow
    )

    raw = np.einsum("pmi,pmj->pij", phi.comp, g)
    draw = np.einsum("pami,pmj->paij", phi.d1, g) + np.einsum(
        "pmi,pamj->paij", phi.comp, dg
    )
    p1 = 0.5 * (raw + raw.swapaxes(1, 2))
    p2 = raw - p1
    dp1 = 0.5 * (draw + draw.swapaxes(2, 3))
    dp2 = draw - dp1
    phi1 = np.einsum("pim,pmk->pki", p1, ginv)
    dphi1 = np.einsum("paim,pmk->paki", dp1, ginv) + np.einsum(
        "pim,pamk->paki", p1, dginv
    )
    phi2 = np.einsum("pim,pmk->pki", p2, ginv)
    dphi2 = np.einsum("paim,pmk->paki", dp2, ginv) + np.einsum(
        "pim,pamk->paki", p2, dginv
    )

    def vec(jet):
        v = np.einsum("pkm,pm->pk", ginv, jet.comp)
        dv = np.einsum("pakm,pm->pak", dginv, jet.comp) + np.einsum(
            "pkm,pam->pak", ginv, jet.d1
        )
        return v, dv

    big_u, dbig_u = vec(u)
    big_u1, dbig_u1 = vec(u1)
    big_u2, dbig_u2 = vec(u2)

    rec = (
        np.einsum("pi,kj->pkij", u1.comp, eye)
        + np.einsum("pj,ki->pkij", u1.comp, eye)
        - np.einsum("pij,pk->pkij", g, big_u1)
    )
    drec = (
        np.einsum("pai,kj->pakij", u1.d1, eye)
        + np.einsum("paj,ki->pakij", u1.d1, eye)
        - np.einsum("paij,pk->pakij", dg, big_u1)
        - np.einsum("pij,pak->pakij", g, dbig_u1)
    )
    gu2 = np.einsum("pij,pk->pkij", g, big_u2)
    dgu2 = np.einsum("paij,pk->pakij", dg, big_u2) + np.einsum(
        "pij,pak->pakij", g, dbig_u2
    )

    # (value, derivative) of each H addend, keyed by fault-injection name.
    terms = {
        "h_u_phi1": (
            np.einsum("pj,pki->pkij", u.comp, phi1),
            np.einsum("paj,pki->pakij", u.d1, phi1)
            + np.einsum("pj,paki->pakij", u.comp, dphi1),
        ),
        "h_u_phi2": (
            -np.einsum("pi,pkj->pkij", u.comp, phi2),
            -np.einsum("pai,pkj->pakij", u.d1, phi2)
            - np.einsum("pi,pakj->pakij", u.comp, dphi2),
        ),
        "h_phi1_u": (
            -np.einsum("pij,pk->pkij", p1, big_u),
            -np.einsum("paij,pk->pakij", dp1, big_u)
            - np.einsum("pij,pak->pakij", p1, dbig_u),
        ),
        "h_f1": (
            -f1.value[:, None, None, None] * rec,
            -np.einsum("pa,pkij->pakij", f1.grad, rec)
            - f1.value[:, None, None, None, None] * drec,
        ),
        "h_f2": (
            -f2.value[:, None, None, None] * gu2,
            -np.einsum("pa,pkij->pakij", f2.grad, gu2)
            - f2.value[:, None, None, None, None] * dgu2,
        ),
    }
    if corrupt is not None and corrupt.name in terms:
        v, d = terms[corrupt.name]
        terms[corrupt.name] = (corrupt.factor * v, corrupt.factor * d)
    h = sum(v for v, _ in terms.values())
    dh = sum(d for _, d in terms.values())

    gt = gamma + h
    dgt = dgamma + dh
    half = np.einsum("piljk->plijk", dgt) + np.einsum("plim,pmjk->plijk", gt, gt)
    return half - half.swapaxes(2, 3)


@dataclass(frozen=True)
class CurvatureReport:
    point: np.ndarray
    formula: np.ndarray  # (n, n, n, n)
    direct: np.ndarray
    residual: float
    term_contributions: dict


def compare_curvature(
    chart: Chart,
    metric_field,
    spec: ConnectionSpec,
    pts,
    corrupt: Corruption | None = None,
) -> list[CurvatureReport]:
    """Formula vs direct oracle at each point; corruption (if any) is routed
    to whichever path owns the named term."""
    formula, groups, direct = _run_both(chart, metric_field, spec, pts, corrupt)
    reports = []
    pts = chart.require_inside(pts)
    for p in range(pts.shape[0]):
        res = norm_residual(formula[p : p + 1], direct[p : p + 1])
        contribs = {name: max_abs(arr[p : p + 1]) for name, arr in groups.items()}
        reports.append(
            CurvatureReport(
                point=pts[p],
                formula=formula[p],
                direct=direct[p],
                residual=res,
                term_contributions=contribs,
            )
        )
    return reports


def _route(corrupt: Corruption | None):
    """Split a corruption into (H-path, formula-path) parts."""
    if corrupt is None:
        return None, None
    if corrupt.name in H_TERMS:
        return corrupt, None
    if corrupt.name in GROUPS:
        return None, corrupt
    raise BadParams(
        f"unknown corruptible term {corrupt.name!r}; choose one of {CORRUPTIBLE_TERMS}"
    )


def _run_both(chart, metric_field, spec, pts, corrupt):
    h_corrupt, g_corrupt = _route(corrupt)
    frame = evaluate_spec(
        chart, metric_field, spec, pts, order=needed_order(spec), corrupt=None
    )
    formula, groups = curvature_formula(frame, corrupt=g_corrupt)
    direct = curvature_direct(chart, metric_field, spec, pts, corrupt=h_corrupt)
    return formula, groups, direct


def _global_residual(chart, metric_field, spec, pts, corrupt) -> float:
    formula, _, direct = _run_both(chart, metric_field, spec, pts, corrupt)
    return norm_residual(formula, direct)


def diagnose(
    chart: Chart,
    metric_field,
    spec: ConnectionSpec,
    pts,
    tolerance: float = 1e-8,
    corrupt: Corruption | None = None,
) -> dict:
    """Attribution report for the formula-vs-oracle comparison.

    The observed mismatch D = formula - direct is least-squares aligned with
    one candidate tensor per corruptible term: a formula group's candidate is
    its clean value; an H term's candidate is the direct oracle's response to
    doubling that term.  ``explained_fraction`` is 1 - ||D - c*C||^2/||D||^2
    for the best scalar c, so a single corrupted term scores ~1.  A failing
    comparison also triggers a greedy minimal-failing-configuration search
    over zeroed field bindings.
    """
    formula, _, direct = _run_both(chart, metric_field, spec, pts, corrupt)
    diff = formula - direct
    residual = norm_residual(formula, direct)
    ok = residual <= tolerance

    frame = evaluate_spec(chart, metric_field, spec, pts, order=needed_order(spec))
    _, clean_groups = curvature_formula(frame)
    clean_direct = curvature_direct(chart, metric_field, spec, pts)

    candidates: dict[str, tuple[str, np.ndarray]] = {}
    for name in GROUPS:
        candidates[name] = ("formula_group", clean_groups[name])
    for name in H_TERMS:
        bumped = curvature_direct(
            chart, metric_field, spec, pts, corrupt=Corruption(name, 2.0)
        )
        candidates[name] = ("h_term", bumped - clean_direct)

    d_flat = diff.ravel()
    d_norm2 = float(d_flat @ d_flat)
    table = []
    for name, (kind, cand) in candidates.items():
        c_flat = cand.ravel()
        c_norm2 = float(c_flat @ c_flat)
        contribution = max_abs(cand)
        if c_norm2 == 0.0 or d_norm2 == 0.0:
            coeff, explained = 0.0, 0.0
        else:
            coeff = float(d_flat @ c_flat) / c_norm2
            rem = d_flat - coeff * c_flat
            explained = 1.0 - float(rem @ rem) / d_norm2
        if contribution != 0.0:
            table.append(
                {
                    "term": name,
                    "kind": kind,
                    "contribution": contribution,
                    "alignment": coeff,
                    "explained_fraction": explained,
                }
            )
    table.sort(key=lambda row: (-row["explained_fraction"], row["term"]))

    report = {
        "residual": residual,
        "tolerance": tolerance,
        "pass": bool(ok),
        "term_table": table,
        "binding_ablation": [],
        "minimal_failing_bindings": [],
    }
    if not ok:
        for name in BINDING_NAMES:
            res = _global_residual(
                chart, metric_field, spec.with_zeroed(name), pts, corrupt
            )
            report["binding_ablation"].append(
                {"zeroed": name, "residual": res, "pass": bool(res <= tolerance)}
            )
        # Greedy minimal failing configuration: zero bindings one at a time,
        # keep the zero whenever the comparison still fails.
        current = spec
        for name in BINDING_NAMES:
            trial = current.with_zeroed(name)
            if _global_residual(chart, metric_field, trial, pts, corrupt) > tolerance:
                current = trial
        report["minimal_failing_bindings"] = [
            name
            for name in BINDING_NAMES
            if not getattr(current, name).is_zero
        ]
    return report
