"""Levi-Civita data from metric jets.

Index conventions, fixed once for the whole package:

- ``gamma[p, k, i, j] = Gamma^k_ij`` with ``nabla_{d_i} d_j = Gamma^k_ij d_k``.
- ``r[p, l, i, j, k] = R^l_ijk``, the ``d_l`` component of ``R(d_i, d_j) d_k``,
  i.e. ``d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk
  - Gamma^l_jm Gamma^m_ik``.
- Ricci uses the first-slot contraction ``S_jk = R^m_mjk``; on the unit round
  sphere this gives S = g and Ricci operator Q = identity.
- Covariant derivative outputs put the derivative index first:
  ``(nabla_i eta)_j``, ``(nabla_i xi)^k``, ``(nabla_i phi)^k_j``.

All functions are batched over a leading point axis and consume the exact
jets produced by :mod:`affconn.fields`.
"""

from __future__ import annotations

from functools import cached_property
from dataclasses import dataclass

import numpy as np

from .errors import JetOrderUnsupported
from .fields import Chart, MetricFieldJet

__all__ = [
    "InverseMetricJet",
    "ChristoffelJet",
    "CurvatureComponents",
    "RicciData",
    "inverse_metric",
    "christoffel",
    "riemann",
    "riemann_d1",
    "ricci_data",
    "cov_deriv_oneform",
    "cov_deriv_vector",
    "cov_deriv_endo",
    "cov_deriv",
    "PointGeometry",
]


@dataclass(frozen=True)
class InverseMetricJet:
    comp: np.ndarray  # (m, n, n)
    d1: np.ndarray | None = None  # (m, n, n, n), d1[p, a, i, j] = d_a g^ij
    d2: np.ndarray | None = None  # (m, n, n, n, n)


@dataclass(frozen=True)
class ChristoffelJet:
    gamma: np.ndarray  # (m, n, n, n), gamma[p, k, i, j]
    d1: np.ndarray | None = None  # (m, n, n, n, n), d1[p, l, k, i, j] = d_l Gamma^k_ij
    d2: np.ndarray | None = None  # (m, n, n, n, n, n), d2[p, l, q, k, i, j]

    def require_d1(self, what: str) -> np.ndarray:
        if self.d1 is None:
            raise JetOrderUnsupported(f"{what} needs first derivatives of Gamma")
        return self.d1

    def require_d2(self, what: str) -> np.ndarray:
        if self.d2 is None:
            raise JetOrderUnsupported(f"{what} needs second derivatives of Gamma")
        return self.d2


@dataclass(frozen=True)
class CurvatureComponents:
    r: np.ndarray  # (m, n, n, n, n), r[p, l, i, j, k]


@dataclass(frozen=True)
class RicciData:
    s: np.ndarray  # (m, n, n), S_jk = R^m_mjk
    q: np.ndarray  # (m, n, n), Q^i_j = g^im S_mj
    q_d1: np.ndarray | None = None  # (m, n, n, n), q_d1[p, a, i, j] = d_a Q^i_j


def inverse_metric(mj: MetricFieldJet) -> InverseMetricJet:
    """Pointwise inverse with as many exact-derivative levels as the metric
    jet supports, via d(g^-1) = -g^-1 (dg) g^-1."""
    ginv = np.linalg.inv(mj.comp)
    d1 = -np.einsum("pim,pamn,pnj->paij", ginv, mj.d1, ginv)
    d2 = None
    if mj.d2 is not None:
        # d_a d_b g^-1 = -(d_a g^-1)(d_b g)g^-1 - g^-1(d_a d_b g)g^-1
        #               - g^-1(d_b g)(d_a g^-1)
        d2 = (
            -np.einsum("paim,pbmn,pnj->pabij", d1, mj.d1, ginv)
            - np.einsum("pim,pabmn,pnj->pabij", ginv, mj.d2, ginv)
            - np.einsum("pim,pbmn,panj->pabij", ginv, mj.d1, d1)
        )
    return InverseMetricJet(comp=ginv, d1=d1, d2=d2)


def christoffel(mj: MetricFieldJet, inv: InverseMetricJet | None = None) -> ChristoffelJet:
    """Levi-Civita connection coefficients with available derivatives.

    Built through the lowered symbol C_mij = (d_i g_mj + d_j g_mi - d_m g_ij)/2,
    which is exactly symmetric in (i, j) because metric jets are.
    """
    if inv is None:
        inv = inverse_metric(mj)
    low = 0.5 * (
        np.einsum("pimj->pmij", mj.d1)
        + np.einsum("pjmi->pmij", mj.d1)
        - mj.d1
    )
    gamma = np.einsum("pkm,pmij->pkij", inv.comp, low)
    d1 = d2 = None
    if mj.d2 is not None:
        low_d1 = 0.5 * (
            np.einsum("plimj->plmij", mj.d2)
            + np.einsum("pljmi->plmij", mj.d2)
            - mj.d2
        )
        d1 = np.einsum("plkm,pmij->plkij", inv.d1, low) + np.einsum(
            "pkm,plmij->plkij", inv.comp, low_d1
        )
        if mj.d3 is not None:
            low_d2 = 0.5 * (
                np.einsum("plqimj->plqmij", mj.d3)
                + np.einsum("plqjmi->plqmij", mj.d3)
                - mj.d3
            )
            d2 = (
                np.einsum("plqkm,pmij->plqkij", inv.d2, low)
                + np.einsum("plkm,pqmij->plqkij", inv.d1, low_d1)
                + np.einsum("pqkm,plmij->plqkij", inv.d1, low_d1)
                + np.einsum("pkm,plqmij->plqkij", inv.comp, low_d2)
            )
    return ChristoffelJet(gamma=gamma, d1=d1, d2=d2)


def _riemann_half(gamma: np.ndarray, gamma_d1: np.ndarray) -> np.ndarray:
    # half[p, l, i, j, k] = d_i Gamma^l_jk + Gamma^l_im Gamma^m_jk
    return np.einsum("piljk->plijk", gamma_d1) + np.einsum(
        "plim,pmjk->plijk", gamma, gamma
    )


def riemann(cj: ChristoffelJet) -> CurvatureComponents:
    """Curvature of the connection; antisymmetric in (i, j) exactly."""
    half = _riemann_half(cj.gamma, cj.require_d1("riemann"))
    return CurvatureComponents(r=half - half.swapaxes(2, 3))


def riemann_d1(cj: ChristoffelJet) -> np.ndarray:
    """d_a R^l_ijk, layout (m, n, n, n, n, n) = [p, a, l, i, j, k]."""
    d1 = cj.require_d1("riemann_d1")
    d2 = cj.require_d2("riemann_d1")
    half = (
        np.einsum("pailjk->palijk", d2)
        + np.einsum("palim,pmjk->palijk", d1, cj.gamma)
        + np.einsum("plim,pamjk->palijk", cj.gamma, d1)
    )
    return half - half.swapaxes(3, 4)


def ricci_data(
    cc: CurvatureComponents,
    inv: InverseMetricJet,
    cj: ChristoffelJet | None = None,
    with_d1: bool = False,
) -> RicciData:
    s = np.einsum("pmmjk->pjk", cc.r)
    q = np.einsum("pim,pmj->pij", inv.comp, s)
    q_d1 = None
    if with_d1:
        if cj is None or inv.d1 is None:
            raise JetOrderUnsupported("q_d1 needs Christoffel and inverse-metric jets")
        s_d1 = np.einsum("pammjk->pajk", riemann_d1(cj))
        q_d1 = np.einsum("paim,pmj->paij", inv.d1, s) + np.einsum(
            "pim,pamj->paij", inv.comp, s_d1
        )
    return RicciData(s=s, q=q, q_d1=q_d1)


def cov_deriv_oneform(comp, d1, gamma) -> np.ndarray:
    """(nabla_i eta)_j = d_i eta_j - Gamma^m_ij eta_m; output [p, i, j]."""
    return d1 - np.einsum("pmij,pm->pij", gamma, comp)


def cov_deriv_vector(comp, d1, gamma) -> np.ndarray:
    """(nabla_i xi)^k = d_i xi^k + Gamma^k_im xi^m; output [p, i, k]."""
    return d1 + np.einsum("pkim,pm->pik", gamma, comp)


def cov_deriv_endo(comp, d1, gamma) -> np.ndarray:
    """(nabla_i phi)^k_j; output [p, i, k, j], matching the jet layout of d1."""
    return (
        d1
        + np.einsum("pkim,pmj->pikj", gamma, comp)
        - np.einsum("pmij,pkm->pikj", gamma, comp)
    )


def cov_deriv(kind: str, comp, d1, cj: ChristoffelJet) -> np.ndarray:
    fns = {
        "oneform": cov_deriv_oneform,
        "vector": cov_deriv_vector,
        "endo": cov_deriv_endo,
    }
    if kind not in fns:
        raise ValueError(f"cov_deriv kind must be one of {sorted(fns)}, got {kind!r}")
    return fns[kind](comp, d1, cj.gamma)


class PointGeometry:
    """Metric jets plus lazily computed Levi-Civita data for one point batch.

    ``order`` is the metric jet order: 1 suffices for Gamma, 2 adds curvature
    and Ricci, 3 adds their first derivatives (needed by the Ricci-operator
    endomorphism field's jets).
    """

    def __init__(self, chart: Chart, metric, pts, order: int = 1):
        self.chart = chart
        self.metric_field = metric
        self.pts = chart.require_inside(pts)
        self.n = chart.n
        self.m = self.pts.shape[0]
        self.order = order
        self.metric = metric.jet(self.pts, order=order)

    @cached_property
    def inv(self) -> InverseMetricJet:
        return inverse_metric(self.metric)

    @cached_property
    def christoffel(self) -> ChristoffelJet:
        return christoffel(self.metric, self.inv)

    @cached_property
    def riemann(self) -> CurvatureComponents:
        return riemann(self.christoffel)

    @cached_property
    def ricci(self) -> RicciData:
        return ricci_data(
            self.riemann, self.inv, self.christoffel, with_d1=self.order >= 3
        )

    @property
    def g(self) -> np.ndarray:
        return self.metric.comp

    @property
    def ginv(self) -> np.ndarray:
        return self.inv.comp

    @property
    def gamma(self) -> np.ndarray:
        return self.christoffel.gamma
