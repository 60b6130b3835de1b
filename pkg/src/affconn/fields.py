"""Charts, polynomial fields, and exact jets.

Everything downstream consumes *jets*: a field's components together with
enough exact partial derivatives, evaluated at a batch of points.  No finite
differences anywhere; polynomial fields differentiate term by term and the
closed-form preset metrics ship hand-written derivatives.

Array layout conventions (shared by the whole package):

- A batch of m points in an n-dimensional chart is an (m, n) array; the batch
  axis always leads.
- Derivative indices come first, in the order the derivatives were taken:
  one-form ``d1[p, j, i] = d_j eta_i``; endomorphism ``d1[p, k, i, j] =
  d_k phi^i_j`` where ``comp[p, i, j] = phi^i_j`` acts as a matrix on column
  vectors; metric ``d1[p, k, i, j] = d_k g_ij``, ``d2[p, k, l, i, j]``,
  ``d3[p, k, l, q, i, j]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParams,
    DimensionMismatch,
    JetOrderUnsupported,
    MetricNotPositiveDefinite,
    PointOutsideDomain,
    SchemaError,
    UnknownPreset,
)

__all__ = [
    "Chart",
    "PolynomialExpr",
    "ScalarFieldJet",
    "OneFormFieldJet",
    "EndoFieldJet",
    "MetricFieldJet",
    "PointJets",
    "PolynomialScalarField",
    "PolynomialOneFormField",
    "PolynomialEndoField",
    "IdentityEndoField",
    "ConstantMetricField",
    "Sphere2MetricField",
    "HalfPlaneMetricField",
    "PolynomialMetricField",
    "Manifold",
    "preset_manifold",
    "evaluate_jets",
    "as_points",
    "monomials_up_to",
    "random_polynomial",
    "poly_from_json",
]

_DOMAIN_SLACK = 1e-12
_SPD_RATIO = 1e-10


def as_points(p, n: int) -> np.ndarray:
    """Normalize a point or batch of points to an (m, n) float array."""
    pts = np.asarray(p, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != n:
        raise DimensionMismatch(
            f"expected points of dimension {n}, got array of shape {np.shape(p)}"
        )
    return pts


@dataclass(frozen=True)
class Chart:
    """A box coordinate domain: lower[i] <= x^i <= upper[i]."""

    n: int
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise BadParams(f"chart dimension must be >= 2, got {self.n}")
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != (self.n,) or hi.shape != (self.n,):
            raise DimensionMismatch(
                f"chart bounds must have length {self.n}, got {lo.shape} and {hi.shape}"
            )
        if not np.all(hi > lo):
            raise BadParams("chart upper bounds must exceed lower bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, pts) -> np.ndarray:
        pts = as_points(pts, self.n)
        return np.all(
            (pts >= self.lower - _DOMAIN_SLACK) & (pts <= self.upper + _DOMAIN_SLACK),
            axis=1,
        )

    def require_inside(self, pts) -> np.ndarray:
        pts = as_points(pts, self.n)
        ok = self.contains(pts)
        if not np.all(ok):
            bad = pts[np.argmin(ok)]
            raise PointOutsideDomain(
                f"point {bad.tolist()} outside chart box "
                f"{self.lower.tolist()}..{self.upper.tolist()}"
            )
        return pts

    def sample(self, count: int, rng) -> np.ndarray:
        """Draw points uniformly from the box. ``rng`` is a seed or Generator."""
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(int(rng))
        u = rng.uniform(0.0, 1.0, size=(count, self.n))
        return self.lower + u * (self.upper - self.lower)


def monomials_up_to(n: int, degree: int, min_degree: int = 0):
    """All exponent tuples of total degree in [min_degree, degree], sorted."""
    out = []
    for total in range(min_degree, degree + 1):
        for bars in itertools.combinations_with_replacement(range(n), total):
            e = [0] * n
            for i in bars:
                e[i] += 1
            out.append(tuple(e))
    return sorted(set(out))


class PolynomialExpr:
    """Multivariate polynomial with exact term-by-term differentiation.

    Terms are kept in a canonical sorted order so that algebraically equal
    construction paths produce bit-identical evaluations (mixed partials of a
    polynomial commute exactly, not just to rounding).
    """

    __slots__ = ("n", "terms", "_exps", "_coeffs", "_derivs")

    def __init__(self, n: int, terms=()):
        if n < 1:
            raise BadParams(f"polynomial needs at least one variable, got n={n}")
        merged: dict[tuple, float] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for e, c in items:
            e = tuple(int(k) for k in e)
            if len(e) != n or any(k < 0 for k in e):
                raise BadParams(f"bad exponent tuple {e} for n={n}")
            merged[e] = merged.get(e, 0.0) + float(c)
        self.n = n
        self.terms = {e: c for e, c in sorted(merged.items()) if c != 0.0}
        if self.terms:
            self._exps = np.array(list(self.terms.keys()), dtype=np.int64)
            self._coeffs = np.array(list(self.terms.values()), dtype=float)
        else:
            self._exps = np.zeros((0, n), dtype=np.int64)
            self._coeffs = np.zeros(0)
        self._derivs: dict[int, "PolynomialExpr"] = {}

    @classmethod
    def zero(cls, n: int) -> "PolynomialExpr":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c) -> "PolynomialExpr":
        return cls(n, [((0,) * n, c)])

    @classmethod
    def coordinate(cls, n: int, i: int) -> "PolynomialExpr":
        e = [0] * n
        e[i] = 1
        return cls(n, [(tuple(e), 1.0)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def eval(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[1] != self.n:
            raise DimensionMismatch(
                f"polynomial in {self.n} variables evaluated at points of "
                f"dimension {pts.shape[1]}"
            )
        if not self.terms:
            out = np.zeros(pts.shape[0])
        else:
            mono = np.prod(pts[:, None, :] ** self._exps[None, :, :], axis=2)
            out = mono @ self._coeffs
        return out[0] if single else out

    def deriv(self, i: int) -> "PolynomialExpr":
        if not 0 <= i < self.n:
            raise BadParams(f"derivative index {i} out of range for n={self.n}")
        cached = self._derivs.get(i)
        if cached is None:
            terms = []
            for e, c in self.terms.items():
                if e[i] > 0:
                    new_e = list(e)
                    new_e[i] -= 1
                    terms.append((tuple(new_e), c * e[i]))
            cached = PolynomialExpr(self.n, terms)
            self._derivs[i] = cached
        return cached

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return PolynomialExpr(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return PolynomialExpr(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return PolynomialExpr(self.n, terms)

    __rmul__ = __mul__

    def _coerce(self, other) -> "PolynomialExpr":
        if isinstance(other, PolynomialExpr):
            if other.n != self.n:
                raise DimensionMismatch("mixing polynomials with different n")
            return other
        return PolynomialExpr.constant(self.n, other)

    def __eq__(self, other):
        return (
            isinstance(other, PolynomialExpr)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"PolynomialExpr({self.n}, 0)"
        bits = " + ".join(f"{c}*x^{e}" for e, c in self.terms.items())
        return f"PolynomialExpr({self.n}, {bits})"


def poly_from_json(n: int, obj, where: str = "polynomial") -> PolynomialExpr:
    """Parse ``{"terms": [{"c": coeff, "e": [exponents]}]}``; bare numbers
    are accepted as constants."""
    if isinstance(obj, bool):
        raise SchemaError(f"{where}: expected a polynomial, got a boolean")
    if isinstance(obj, (int, float)):
        return PolynomialExpr.constant(n, obj)
    if not isinstance(obj, dict) or set(obj) != {"terms"}:
        raise SchemaError(f"{where}: expected a number or {{'terms': [...]}}")
    terms = obj["terms"]
    if not isinstance(terms, list):
        raise SchemaError(f"{where}.terms: expected a list")
    parsed = []
    for idx, t in enumerate(terms):
        if not isinstance(t, dict) or set(t) != {"c", "e"}:
            raise SchemaError(f"{where}.terms[{idx}]: expected {{'c': num, 'e': [ints]}}")
        c, e = t["c"], t["e"]
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise SchemaError(f"{where}.terms[{idx}].c: expected a number")
        if (
            not isinstance(e, list)
            or len(e) != n
            or any(isinstance(k, bool) or not isinstance(k, int) or k < 0 for k in e)
        ):
            raise SchemaError(
                f"{where}.terms[{idx}].e: expected {n} non-negative integers"
            )
        parsed.append((tuple(e), float(c)))
    return PolynomialExpr(n, parsed)


# ---------------------------------------------------------------------------
# Jets


@dataclass(frozen=True)
class ScalarFieldJet:
    value: np.ndarray  # (m,)
    grad: np.ndarray  # (m, n), grad[p, i] = d_i f


@dataclass(frozen=True)
class OneFormFieldJet:
    comp: np.ndarray  # (m, n)
    d1: np.ndarray  # (m, n, n), d1[p, j, i] = d_j eta_i


@dataclass(frozen=True)
class EndoFieldJet:
    comp: np.ndarray  # (m, n, n), comp[p, i, j] = phi^i_j
    d1: np.ndarray  # (m, n, n, n), d1[p, k, i, j] = d_k phi^i_j


@dataclass(frozen=True)
class MetricFieldJet:
    order: int
    comp: np.ndarray  # (m, n, n)
    d1: np.ndarray  # (m, n, n, n)
    d2: np.ndarray | None = None  # (m, n, n, n, n)
    d3: np.ndarray | None = None  # (m, n, n, n, n, n)

    def require_order(self, r: int, what: str):
        if self.order < r:
            raise JetOrderUnsupported(
                f"{what} needs metric jets of order {r}, evaluated order is {self.order}"
            )


@dataclass(frozen=True)
class PointJets:
    points: np.ndarray
    metric: MetricFieldJet
    fields: dict


# ---------------------------------------------------------------------------
# Field objects.  Each has .n, .kind and a jet(...) method; all jets are exact.


class PolynomialScalarField:
    kind = "scalar"

    def __init__(self, n: int, expr: PolynomialExpr):
        if expr.n != n:
            raise DimensionMismatch("scalar field expr has wrong variable count")
        self.n = n
        self.expr = expr

    @classmethod
    def constant(cls, n: int, c) -> "PolynomialScalarField":
        return cls(n, PolynomialExpr.constant(n, c))

    @classmethod
    def zero(cls, n: int) -> "PolynomialScalarField":
        return cls(n, PolynomialExpr.zero(n))

    @property
    def is_zero(self) -> bool:
        return self.expr.is_zero

    def jet(self, pts) -> ScalarFieldJet:
        pts = as_points(pts, self.n)
        value = self.expr.eval(pts)
        grad = np.stack([self.expr.deriv(i).eval(pts) for i in range(self.n)], axis=1)
        return ScalarFieldJet(value=value, grad=grad)


class PolynomialOneFormField:
    kind = "oneform"

    def __init__(self, n: int, comps):
        comps = list(comps)
        if len(comps) != n or any(c.n != n for c in comps):
            raise DimensionMismatch("one-form needs n component polynomials in n vars")
        self.n = n
        self.comps = comps

    @classmethod
    def zero(cls, n: int) -> "PolynomialOneFormField":
        return cls(n, [PolynomialExpr.zero(n) for _ in range(n)])

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)

    def jet(self, pts) -> OneFormFieldJet:
        pts = as_points(pts, self.n)
        n = self.n
        comp = np.stack([c.eval(pts) for c in self.comps], axis=1)
        d1 = np.empty((pts.shape[0], n, n))
        for j in range(n):
            for i in range(n):
                d1[:, j, i] = self.comps[i].deriv(j).eval(pts)
        return OneFormFieldJet(comp=comp, d1=d1)


class PolynomialEndoField:
    kind = "endo"

    def __init__(self, n: int, entries):
        entries = [list(row) for row in entries]
        if len(entries) != n or any(
            len(row) != n or any(e.n != n for e in row) for row in entries
        ):
            raise DimensionMismatch("endomorphism needs an n-by-n grid of polynomials")
        self.n = n
        self.entries = entries

    @classmethod
    def zero(cls, n: int) -> "PolynomialEndoField":
        z = [[PolynomialExpr.zero(n) for _ in range(n)] for _ in range(n)]
        return cls(n, z)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def jet(self, pts) -> EndoFieldJet:
        pts = as_points(pts, self.n)
        n, m = self.n, pts.shape[0]
        comp = np.empty((m, n, n))
        d1 = np.empty((m, n, n, n))
        for i in range(n):
            for j in range(n):
                comp[:, i, j] = self.entries[i][j].eval(pts)
                for k in range(n):
                    d1[:, k, i, j] = self.entries[i][j].deriv(k).eval(pts)
        return EndoFieldJet(comp=comp, d1=d1)


class IdentityEndoField:
    kind = "endo"

    def __init__(self, n: int):
        self.n = n
        self.is_zero = False

    def jet(self, pts) -> EndoFieldJet:
        pts = as_points(pts, self.n)
        m, n = pts.shape[0], self.n
        comp = np.broadcast_to(np.eye(n), (m, n, n)).copy()
        return EndoFieldJet(comp=comp, d1=np.zeros((m, n, n, n)))


def _spd_check(comp: np.ndarray):
    w = np.linalg.eigvalsh(comp)
    bad = w[:, 0] <= _SPD_RATIO * np.abs(w[:, -1])
    if np.any(bad):
        p = int(np.argmax(bad))
        raise MetricNotPositiveDefinite(
            f"metric eigenvalues {w[p].tolist()} fail the SPD check at point index {p}"
        )


def _check_order(order: int):
    if order not in (1, 2, 3):
        raise JetOrderUnsupported(f"metric jet order must be 1, 2 or 3, got {order}")


class ConstantMetricField:
    kind = "metric"

    def __init__(self, n: int, matrix=None):
        self.n = n
        mat = np.eye(n) if matrix is None else np.asarray(matrix, dtype=float)
        if mat.shape != (n, n):
            raise DimensionMismatch(f"constant metric must be {n}x{n}")
        if not np.array_equal(mat, mat.T):
            raise BadParams("constant metric must be symmetric")
        self.matrix = mat

    def jet(self, pts, order: int = 1) -> MetricFieldJet:
        _check_order(order)
        pts = as_points(pts, self.n)
        m, n = pts.shape[0], self.n
        comp = np.broadcast_to(self.matrix, (m, n, n)).copy()
        _spd_check(comp)
        d2 = np.zeros((m, n, n, n, n)) if order >= 2 else None
        d3 = np.zeros((m, n, n, n, n, n)) if order >= 3 else None
        return MetricFieldJet(
            order=order, comp=comp, d1=np.zeros((m, n, n, n)), d2=d2, d3=d3
        )


class Sphere2MetricField:
    """Round 2-sphere of radius r in polar coordinates (theta, phi)."""

    kind = "metric"
    n = 2

    def __init__(self, r: float):
        if not r > 0:
            raise BadParams(f"sphere radius must be positive, got {r}")
        self.r = float(r)

    def jet(self, pts, order: int = 1) -> MetricFieldJet:
        _check_order(order)
        pts = as_points(pts, 2)
        m = pts.shape[0]
        theta = pts[:, 0]
        r2 = self.r * self.r
        comp = np.zeros((m, 2, 2))
        comp[:, 0, 0] = r2
        comp[:, 1, 1] = r2 * np.sin(theta) ** 2
        _spd_check(comp)
        d1 = np.zeros((m, 2, 2, 2))
        d1[:, 0, 1, 1] = r2 * np.sin(2.0 * theta)
        d2 = d3 = None
        if order >= 2:
            d2 = np.zeros((m, 2, 2, 2, 2))
            d2[:, 0, 0, 1, 1] = 2.0 * r2 * np.cos(2.0 * theta)
        if order >= 3:
            d3 = np.zeros((m, 2, 2, 2, 2, 2))
            d3[:, 0, 0, 0, 1, 1] = -4.0 * r2 * np.sin(2.0 * theta)
        return MetricFieldJet(order=order, comp=comp, d1=d1, d2=d2, d3=d3)


class HalfPlaneMetricField:
    """Hyperbolic upper half-plane: g = (k/y)^2 * delta, curvature -1/k^2."""

    kind = "metric"
    n = 2

    def __init__(self, k: float):
        if not k > 0:
            raise BadParams(f"half-plane scale must be positive, got {k}")
        self.k = float(k)

    def jet(self, pts, order: int = 1) -> MetricFieldJet:
        _check_order(order)
        pts = as_points(pts, 2)
        m = pts.shape[0]
        y = pts[:, 1]
        if np.any(y <= 0):
            raise PointOutsideDomain("half-plane metric needs y > 0")
        k2 = self.k * self.k
        f = k2 / y**2
        comp = np.zeros((m, 2, 2))
        comp[:, 0, 0] = f
        comp[:, 1, 1] = f
        _spd_check(comp)
        d1 = np.zeros((m, 2, 2, 2))
        d1[:, 1, 0, 0] = d1[:, 1, 1, 1] = -2.0 * k2 / y**3
        d2 = d3 = None
        if order >= 2:
            d2 = np.zeros((m, 2, 2, 2, 2))
            d2[:, 1, 1, 0, 0] = d2[:, 1, 1, 1, 1] = 6.0 * k2 / y**4
        if order >= 3:
            d3 = np.zeros((m, 2, 2, 2, 2, 2))
            d3[:, 1, 1, 1, 0, 0] = d3[:, 1, 1, 1, 1, 1] = -24.0 * k2 / y**5
        return MetricFieldJet(order=order, comp=comp, d1=d1, d2=d2, d3=d3)


class PolynomialMetricField:
    """Symmetric grid of polynomial entries; entries (i, j) and (j, i) share
    one object so all jets are symmetric to the last bit."""

    kind = "metric"

    def __init__(self, n: int, entries):
        grid = [[None] * n for _ in range(n)]
        rows = [list(row) for row in entries]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise DimensionMismatch(f"metric needs an {n}x{n} grid of polynomials")
        for i in range(n):
            for j in range(i, n):
                e = rows[i][j]
                if e.n != n:
                    raise DimensionMismatch("metric entry has wrong variable count")
                if i != j and rows[j][i].terms != e.terms:
                    raise BadParams(f"metric entries ({i},{j}) and ({j},{i}) differ")
                grid[i][j] = grid[j][i] = e
        self.n = n
        self.entries = grid
        self._partials: dict[tuple, PolynomialExpr] = {}

    def _partial(self, i: int, j: int, multi: tuple) -> PolynomialExpr:
        # multi is sorted; mixed partials of polynomials commute exactly.
        key = (min(i, j), max(i, j), multi)
        expr = self._partials.get(key)
        if expr is None:
            expr = self.entries[i][j]
            for k in multi:
                expr = expr.deriv(k)
            self._partials[key] = expr
        return expr

    def jet(self, pts, order: int = 1) -> MetricFieldJet:
        _check_order(order)
        pts = as_points(pts, self.n)
        n, m = self.n, pts.shape[0]
        comp = np.empty((m, n, n))
        for i in range(n):
            for j in range(i, n):
                comp[:, i, j] = comp[:, j, i] = self.entries[i][j].eval(pts)
        _spd_check(comp)

        def fill(rank: int) -> np.ndarray:
            out = np.empty((m,) + (n,) * rank + (n, n))
            for multi in itertools.combinations_with_replacement(range(n), rank):
                for i in range(n):
                    for j in range(i, n):
                        vals = self._partial(i, j, multi).eval(pts)
                        for perm in set(itertools.permutations(multi)):
                            out[(slice(None),) + perm + (i, j)] = vals
                            out[(slice(None),) + perm + (j, i)] = vals
            return out

        d1 = fill(1)
        d2 = fill(2) if order >= 2 else None
        d3 = fill(3) if order >= 3 else None
        return MetricFieldJet(order=order, comp=comp, d1=d1, d2=d2, d3=d3)


# ---------------------------------------------------------------------------
# Presets and random fields


@dataclass(frozen=True)
class Manifold:
    name: str
    chart: Chart
    metric: object
    params: dict = field(default_factory=dict)


def random_polynomial(n: int, rng, degree: int = 3, min_degree: int = 0):
    """Dense random polynomial, coefficients uniform in [-1, 1]."""
    monos = monomials_up_to(n, degree, min_degree)
    coeffs = rng.uniform(-1.0, 1.0, size=len(monos))
    return PolynomialExpr(n, zip(monos, coeffs))


def _normalized(expr: PolynomialExpr) -> PolynomialExpr:
    mass = sum(abs(c) for c in expr.terms.values())
    if mass == 0.0:
        return expr
    return PolynomialExpr(expr.n, {e: c / mass for e, c in expr.terms.items()})


def _bumpy_metric(n: int, eps: float, seed: int) -> PolynomialMetricField:
    if not eps > 0:
        raise BadParams(f"bumpy eps must be positive, got {eps}")
    if eps * n >= 0.9:
        raise BadParams(
            f"bumpy eps={eps} too large for n={n}: positive-definiteness bound fails"
        )
    rng = np.random.default_rng(seed)
    grid = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            # Unit coefficient mass keeps |perturbation| <= 1 on [-1, 1]^n,
            # so Gershgorin gives lambda_min >= 1 - eps*n > 0.1.
            bump = eps * _normalized(random_polynomial(n, rng, 3, min_degree=1))
            base = PolynomialExpr.constant(n, 1.0) if i == j else PolynomialExpr.zero(n)
            grid[i][j] = grid[j][i] = base + bump
    return PolynomialMetricField(n, grid)


def _int_param(params: dict, key: str, minimum: int):
    v = params.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < minimum:
        raise BadParams(f"preset parameter {key!r} must be an integer >= {minimum}")
    return int(v)


def preset_manifold(name: str, params: dict | None = None) -> Manifold:
    """Build one of the stock manifolds.

    euclidean(n): flat delta metric on [-1.5, 1.5]^n.
    sphere2(r): round sphere, (theta, phi) in [0.3, pi-0.3] x [0, 2 pi].
    half_plane(k): g = (k/y)^2 delta on [-2, 2] x [0.5, 5].
    bumpy(n, eps, seed): delta plus a seeded random polynomial perturbation
    on [-1, 1]^n, positive-definite by construction.
    """
    params = dict(params or {})

    def take(allowed: set):
        extra = set(params) - allowed
        if extra:
            raise BadParams(f"preset {name!r} got unknown parameters {sorted(extra)}")

    if name == "euclidean":
        take({"n"})
        n = _int_param(params, "n", 2)
        chart = Chart(n, [-1.5] * n, [1.5] * n)
        return Manifold(name, chart, ConstantMetricField(n), {"n": n})
    if name == "sphere2":
        take({"r"})
        r = params.get("r", 1.0)
        if isinstance(r, bool) or not isinstance(r, (int, float)):
            raise BadParams("preset parameter 'r' must be a number")
        chart = Chart(2, [0.3, 0.0], [np.pi - 0.3, 2.0 * np.pi])
        return Manifold(name, chart, Sphere2MetricField(r), {"r": float(r)})
    if name == "half_plane":
        take({"k"})
        k = params.get("k", 1.0)
        if isinstance(k, bool) or not isinstance(k, (int, float)):
            raise BadParams("preset parameter 'k' must be a number")
        chart = Chart(2, [-2.0, 0.5], [2.0, 5.0])
        return Manifold(name, chart, HalfPlaneMetricField(k), {"k": float(k)})
    if name == "bumpy":
        take({"n", "eps", "seed"})
        n = _int_param(params, "n", 2)
        eps = params.get("eps", 0.05)
        if isinstance(eps, bool) or not isinstance(eps, (int, float)):
            raise BadParams("preset parameter 'eps' must be a number")
        seed = _int_param({"seed": params.get("seed", None)}, "seed", 0)
        chart = Chart(n, [-1.0] * n, [1.0] * n)
        metric = _bumpy_metric(n, float(eps), seed)
        return Manifold(name, chart, metric, {"n": n, "eps": float(eps), "seed": seed})
    raise UnknownPreset(f"no manifold preset named {name!r}")


def evaluate_jets(chart: Chart, metric, bindings: dict, p, metric_order: int = 1):
    """Validate points against the chart and evaluate the metric plus every
    bound field there.  Fields that need geometry (derived endomorphisms)
    cannot be evaluated here; resolve those through the connection layer."""
    pts = chart.require_inside(p)
    for name, f in bindings.items():
        if getattr(f, "n", None) != chart.n:
            raise DimensionMismatch(
                f"field {name!r} has dimension {getattr(f, 'n', None)}, chart has {chart.n}"
            )
        if not hasattr(f, "jet"):
            raise BadParams(
                f"field {name!r} needs geometry to evaluate; use the connection layer"
            )
    if getattr(metric, "n", None) != chart.n:
        raise DimensionMismatch("metric dimension does not match the chart")
    mj = metric.jet(pts, order=metric_order)
    jets = {name: f.jet(pts) for name, f in bindings.items()}
    return PointJets(points=pts, metric=mj, fields=jets)
