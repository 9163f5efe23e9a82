"""Deformed position and momentum operators in momentum representation.

Two families are built as :class:`~minlength.symbolic.DiffOp` objects:

* the Lorentz-covariant family on ``D + 1`` momenta ``p0 .. pD``::

      X^mu = (1 - beta p.p) x^mu - beta' p^mu (p_nu x^nu) + i hbar gamma p^mu
      x^mu = -i hbar g^{mu nu} d/dp^nu,   P^mu = p^mu

* the nonrelativistic (Kempf) family on ``D`` momenta ``p1 .. pD``::

      X^i = (1 + beta p^2) x^i + beta' p^i (p . x) + i hbar gamma p^i
      x^i = i hbar d/dp^i,                P^i = p^i

Parameters left as ``None`` in :class:`DeformationParams` stay formal
symbols, so the commutator checks hold identically in them.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import DegenerateWeight, NonZeroResidual
from .symbolic import I, DiffOp, PolyRing, RationalFn, op_commutator

__all__ = [
    "DeformationParams",
    "Metric",
    "OperatorFamily",
    "RelationResult",
    "VerificationReport",
    "build_covariant_operators",
    "build_kempf_operators",
    "build_dimensionless_operators",
    "verify_deformed_algebra",
    "weight_exponent",
    "physical_state_check",
    "discrete_symmetry_check",
    "apply_discrete_symmetry",
    "PARAM_SYMBOLS",
]

PARAM_SYMBOLS = {"beta": "beta", "beta_prime": "betap", "gamma": "gamma", "hbar": "hbar"}


def _exact(x):
    if x is None or isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class DeformationParams:
    """Deformation parameters; ``None`` means "keep as a formal symbol".

    Numeric values are stored as exact :class:`~fractions.Fraction` (floats
    are converted exactly).
    """

    beta: object = None
    beta_prime: object = None
    gamma: object = None
    dim: int = 1
    hbar: object = None

    def __post_init__(self):
        for name in ("beta", "beta_prime", "gamma", "hbar"):
            object.__setattr__(self, name, _exact(getattr(self, name)))
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"dim must be an integer >= 1, got {self.dim!r}")
        for name in ("beta", "beta_prime"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")
        if self.hbar is not None and self.hbar <= 0:
            raise ValueError("hbar must be positive")

    def is_formal(self, name):
        return getattr(self, name) is None

    @property
    def numeric(self):
        return all(getattr(self, n) is not None for n in ("beta", "beta_prime", "gamma"))

    def symbol(self, ring, name):
        """Generator of ``ring`` when formal, otherwise a constant."""
        v = getattr(self, name)
        if v is None:
            return ring.gen(PARAM_SYMBOLS[name])
        return ring.const(v)


@dataclass(frozen=True)
class Metric:
    """Minkowski metric ``diag(+1, -1, ..., -1)`` on ``D + 1`` indices."""

    dim: int

    @property
    def signature(self):
        return (1,) + (-1,) * self.dim

    def __call__(self, mu, nu):
        if mu != nu:
            return 0
        return 1 if mu == 0 else -1

    def matrix(self):
        n = self.dim + 1
        return [[self(i, j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Position and momentum operators indexed by spacetime component.

    ``q`` is the scalar entering the deformation: ``p_nu p^nu`` for the
    covariant family and ``-p^2`` for Kempf's, so both obey
    ``[X, P] = -i hbar [(1 - beta q) g - beta' P P]``.
    """

    kind: str
    params: DeformationParams
    ring: PolyRing
    dvars: tuple
    indices: tuple
    X: dict
    P: dict
    q: object
    momenta: dict = field(default_factory=dict)

    def g(self, mu, nu):
        if mu != nu:
            return 0
        if self.kind == "kempf":
            return -1
        return 1 if mu == 0 else -1

    def lower_X(self, mu):
        return self.X[mu].scale(self.g(mu, mu))

    def lower_P(self, mu):
        return self.P[mu].scale(self.g(mu, mu))

    def denominator(self):
        """The single factor ``1 - beta q`` used for every denominator."""
        beta = self.params.symbol(self.ring, "beta")
        return self.ring.one - beta * self.q

    def replace(self, X=None, P=None):
        return OperatorFamily(
            self.kind, self.params, self.ring, self.dvars, self.indices,
            dict(self.X if X is None else X), dict(self.P if P is None else P),
            self.q, self.momenta,
        )


def _ring_for(momenta, extra_gens=()):
    return PolyRing(tuple(momenta) + tuple(PARAM_SYMBOLS.values()) + tuple(extra_gens))


@lru_cache(maxsize=64)
def build_covariant_operators(params, prefix="p", extra_gens=()):
    """Lorentz-covariant deformed operators ``X^mu``, ``P^mu``.

    ``extra_gens`` appends further formal symbols to the ring (used for the
    nilpotent Lorentz parameters of the first-order invariance check).
    """
    D = params.dim
    idx = tuple(range(D + 1))
    names = tuple(f"{prefix}{mu}" for mu in idx)
    ring = _ring_for(names, extra_gens)
    metric = Metric(D)
    p = {mu: ring.gen(n) for mu, n in zip(idx, names)}
    beta = params.symbol(ring, "beta")
    betap = params.symbol(ring, "beta_prime")
    gamma = params.symbol(ring, "gamma")
    hbar = params.symbol(ring, "hbar")

    q = ring.zero
    for mu in idx:
        q = q + p[mu] * p[mu] * metric(mu, mu)

    def d(mu):
        return DiffOp.partial(ring, names, names[mu])

    # x^mu = -i hbar g^{mu mu} d_mu ; p_nu x^nu = -i hbar sum_nu p^nu d_nu
    x = {mu: (hbar * (-I) * metric(mu, mu)) * d(mu) for mu in idx}
    euler = DiffOp.zero(ring, names)
    for nu in idx:
        euler = euler + p[nu] * d(nu)
    px = (hbar * (-I)) * euler

    X, P = {}, {}
    for mu in idx:
        X[mu] = (ring.one - beta * q) * x[mu] - (betap * p[mu]) * px \
            + DiffOp.multiplication(ring, names, hbar * I * gamma * p[mu])
        P[mu] = DiffOp.multiplication(ring, names, p[mu])
    return OperatorFamily("covariant", params, ring, names, idx, X, P, q, p)


@lru_cache(maxsize=64)
def build_kempf_operators(params, prefix="p"):
    """Nonrelativistic deformed operators ``X^i``, ``P^i`` for i = 1..D."""
    D = params.dim
    idx = tuple(range(1, D + 1))
    names = tuple(f"{prefix}{i}" for i in idx)
    ring = _ring_for(names)
    p = {i: ring.gen(n) for i, n in zip(idx, names)}
    beta = params.symbol(ring, "beta")
    betap = params.symbol(ring, "beta_prime")
    gamma = params.symbol(ring, "gamma")
    hbar = params.symbol(ring, "hbar")

    p2 = ring.zero
    for i in idx:
        p2 = p2 + p[i] * p[i]
    x = {i: (hbar * I) * DiffOp.partial(ring, names, f"{prefix}{i}") for i in idx}
    pdotx = DiffOp.zero(ring, names)
    for i in idx:
        pdotx = pdotx + p[i] * x[i]

    X, P = {}, {}
    for i in idx:
        X[i] = (ring.one + beta * p2) * x[i] + (betap * p[i]) * pdotx \
            + DiffOp.multiplication(ring, names, hbar * I * gamma * p[i])
        P[i] = DiffOp.multiplication(ring, names, p[i])
    return OperatorFamily("kempf", params, ring, names, idx, X, P, -p2, p)


def build_dimensionless_operators(beta_tilde=None):
    """(1+1)-dimensional operators in units ``a = hbar/(m c)``.

    This is the covariant family with ``hbar = 1``, ``beta' = gamma = 0``
    and ``beta`` playing the role of ``beta_tilde``. Then
    ``X~ = i f d/dp~`` and ``X~^0 = -i f d/dp~^0`` with
    ``f = 1 - beta_tilde((p~^0)^2 - p~^2)``.
    """
    return build_covariant_operators(
        DeformationParams(beta=beta_tilde, beta_prime=0, gamma=0, dim=1, hbar=1)
    )


# -- verification reports -----------------------------------------------


@dataclass
class RelationResult:
    relation: str
    residual: object

    @property
    def ok(self):
        return self.residual.is_zero()

    @property
    def status(self):
        return "ok" if self.ok else "fail"

    @property
    def residual_terms(self):
        r = self.residual
        if hasattr(r, "residual_terms"):
            return r.residual_terms()
        if hasattr(r, "num"):
            return len(r.num.terms)
        return len(r.terms)

    def to_dict(self):
        return {"relation": self.relation, "status": self.status,
                "residual_terms": self.residual_terms}


@dataclass
class VerificationReport:
    name: str
    relations: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.relations)

    def add(self, relation, residual):
        self.relations.append(RelationResult(relation, residual))

    def failures(self):
        return [r for r in self.relations if not r.ok]

    def raise_on_failure(self):
        for r in self.relations:
            if not r.ok:
                raise NonZeroResidual(r.relation, r.residual)
        return self

    def to_dict(self):
        return {"name": self.name, "status": "ok" if self.ok else "fail",
                "relations": [r.to_dict() for r in self.relations]}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def deformed_relations(family, X=None, P=None, i_unit=I):
    """Residuals of the three deformed relations for operators ``X``, ``P``.

    ``[X^mu, P^nu] + i hbar [(1 - beta q) g^{mu nu} - beta' P^mu P^nu]``,
    ``(1 - beta q)[X^mu, X^nu] - i hbar c(q) (P^mu X^nu - P^nu X^mu)`` with
    ``c(q) = 2 beta - beta' - (2 beta + beta') beta q`` and ``[P^mu, P^nu]``.
    ``q`` is rebuilt from the supplied momenta so mapped families are
    checked against their own right-hand sides.
    """
    X = family.X if X is None else X
    P = family.P if P is None else P
    ring = family.ring
    beta = family.params.symbol(ring, "beta")
    betap = family.params.symbol(ring, "beta_prime")
    hbar = family.params.symbol(ring, "hbar")
    idx = family.indices
    # momentum polynomials from multiplication operators
    pm = {mu: P[mu].coefficient().num for mu in idx}
    q = ring.zero
    for mu in idx:
        q = q + pm[mu] * pm[mu] * family.g(mu, mu)
    one_minus = ring.one - beta * q
    cq = beta * 2 - betap - (beta * 2 + betap) * beta * q
    out = []
    for mu in idx:
        for nu in idx:
            rhs = (one_minus * family.g(mu, nu) - betap * pm[mu] * pm[nu]) * (hbar * i_unit)
            res = op_commutator(X[mu], P[nu]) + DiffOp.multiplication(ring, family.dvars, rhs)
            out.append((f"[X^{mu},P^{nu}]", res))
    for a, mu in enumerate(idx):
        for nu in idx[a + 1:]:
            lhs = one_minus * op_commutator(X[mu], X[nu])
            rhs = (cq * hbar * i_unit) * (P[mu] * X[nu] - P[nu] * X[mu])
            out.append((f"[X^{mu},X^{nu}]", lhs - rhs))
    for a, mu in enumerate(idx):
        for nu in idx[a + 1:]:
            out.append((f"[P^{mu},P^{nu}]", op_commutator(P[mu], P[nu])))
    return out


def _canonical_relations(family):
    ring = family.ring
    hbar = family.params.symbol(ring, "hbar")
    out = []
    for mu in family.indices:
        for nu in family.indices:
            rhs = hbar * (-I) * family.g(mu, nu)
            res = op_commutator(family.X[mu], family.P[nu]) - DiffOp.multiplication(ring, family.dvars, rhs)
            out.append((f"[X^{mu},P^{nu}]", res))
    idx = family.indices
    for a, mu in enumerate(idx):
        for nu in idx[a + 1:]:
            out.append((f"[X^{mu},X^{nu}]", op_commutator(family.X[mu], family.X[nu])))
            out.append((f"[P^{mu},P^{nu}]", op_commutator(family.P[mu], family.P[nu])))
    return out


def _dimensionless_relations(family):
    """The (1+1)-dimensional relations written with ``f`` and no denominator."""
    if family.kind != "covariant" or family.indices != (0, 1):
        raise ValueError("dimensionless relations need the D=1 covariant family")
    ring = family.ring
    beta = family.params.symbol(ring, "beta")
    X0, X1 = family.X[0], family.X[1]
    P0, P1 = family.P[0], family.P[1]
    p0, p1 = family.momenta[0], family.momenta[1]
    f = ring.one - beta * (p0 * p0 - p1 * p1)
    mult = lambda c: DiffOp.multiplication(ring, family.dvars, c)  # noqa: E731
    return [
        ("[X0,P0] = -i f", op_commutator(X0, P0) + mult(f * I)),
        ("[X,P] = i f", op_commutator(X1, P1) - mult(f * I)),
        ("[X0,X] = 2i beta (P0 X - P X0)",
         op_commutator(X0, X1) - (beta * 2 * I) * (P0 * X1 - P1 * X0)),
        ("[X0,P] = 0", op_commutator(X0, P1)),
        ("[X,P0] = 0", op_commutator(X1, P0)),
        ("[P0,P] = 0", op_commutator(P0, P1)),
    ]


def verify_deformed_algebra(family, expected=None, strict=False):
    """Check commutators of ``family`` against a reference algebra.

    ``expected`` is ``"covariant"``, ``"kempf"``, ``"canonical"`` or
    ``"dimensionless"``; it defaults to the family's own kind. With
    ``strict=True`` the first nonzero residual raises
    :class:`~minlength.errors.NonZeroResidual`.
    """
    expected = expected or family.kind
    if expected in ("covariant", "kempf"):
        rels = deformed_relations(family)
    elif expected == "canonical":
        rels = _canonical_relations(family)
    elif expected == "dimensionless":
        rels = _dimensionless_relations(family)
    else:
        raise ValueError(f"unknown reference algebra {expected!r}")
    report = VerificationReport(f"{family.kind} family vs {expected} relations (D={family.params.dim})")
    for name, res in rels:
        report.add(name, res)
    if strict:
        report.raise_on_failure()
    return report


def weight_exponent(params, family="covariant"):
    """Exponent ``alpha`` of the Hermiticity weight ``[1 - (beta+beta') p.p]^-alpha``.

    Covariant: ``(2 beta + beta'(D+2) - 2 gamma) / (2 (beta + beta'))``;
    Kempf uses ``D+1`` in place of ``D+2``. Returns a Fraction whenever the
    ratio is a constant, even with formal parameters (e.g. ``beta = gamma = 0``
    gives ``(D+2)/2`` for any ``beta'``); otherwise a
    :class:`~minlength.symbolic.RationalFn` in the formal symbols.
    """
    shift = {"covariant": 2, "kempf": 1}[family]
    D = params.dim
    if params.numeric:
        den = params.beta + params.beta_prime
        if den == 0:
            raise DegenerateWeight("alpha is undefined for beta + beta' = 0")
        return (2 * params.beta + params.beta_prime * (D + shift) - 2 * params.gamma) / (2 * den)
    ring = PolyRing(("beta", "betap", "gamma"))
    sym = {
        "beta": params.beta if params.beta is not None else ring.gen("beta"),
        "betap": params.beta_prime if params.beta_prime is not None else ring.gen("betap"),
        "gamma": params.gamma if params.gamma is not None else ring.gen("gamma"),
    }
    num = ring(sym["beta"]) * 2 + ring(sym["betap"]) * (D + shift) - ring(sym["gamma"]) * 2
    den = (ring(sym["beta"]) + ring(sym["betap"])) * 2
    if den.is_zero():
        raise DegenerateWeight("alpha is undefined for beta + beta' = 0")
    quotient = num.divexact(den)
    if quotient is not None and quotient.is_constant():
        return quotient.constant_value().re
    return RationalFn(num, 1, den)


def physical_state_check(params, p0):
    """Strict physical-state condition ``(beta + beta') (p^0)^2 < 1``."""
    if params.beta is None or params.beta_prime is None:
        raise ValueError("physical_state_check needs numeric beta and beta'")
    return (params.beta + params.beta_prime) * Fraction(p0) ** 2 < 1


# -- discrete symmetries ---------------------------------------------------

_SIGNS = {
    # (sign on X^0, sign on X^i, sign on P^0, sign on P^i, antilinear)
    "parity": (1, -1, 1, -1, False),
    "time-reversal": (-1, 1, 1, -1, True),
}


def _signs(family, which):
    sx0, sxi, sp0, spi, anti = _SIGNS[which]
    sx = {mu: (sx0 if mu == 0 else sxi) for mu in family.indices}
    sp = {mu: (sp0 if mu == 0 else spi) for mu in family.indices}
    return sx, sp, anti


def apply_discrete_symmetry(family, which):
    """Realize the symmetry on the operators themselves.

    Both maps flip the spatial momenta (``p^i -> -p^i`` with
    ``d/dp^i -> -d/dp^i``); time reversal additionally conjugates ``i``.
    """
    spatial = [family.dvars[k] for k, mu in enumerate(family.indices) if mu != 0]
    anti = _SIGNS[which][4]

    def theta(op):
        out = op.reflect(spatial)
        return out.conj() if anti else out

    return family.replace(
        X={mu: theta(op) for mu, op in family.X.items()},
        P={mu: theta(op) for mu, op in family.P.items()},
    )


def discrete_symmetry_check(family, which):
    """Verify that parity or time reversal leaves the algebra invariant.

    Two groups of relations: the momentum-space realization reproduces
    the sign map on every ``X`` and ``P``, and the sign-mapped operators
    satisfy the deformed relations with ``i -> -i`` for time reversal.
    """
    if which not in _SIGNS:
        raise ValueError("which must be 'parity' or 'time-reversal'")
    sx, sp, anti = _signs(family, which)
    report = VerificationReport(f"{which} invariance ({family.kind}, D={family.params.dim})")
    mapped = apply_discrete_symmetry(family, which)
    for mu in family.indices:
        report.add(f"realization X^{mu}", mapped.X[mu] - family.X[mu].scale(sx[mu]))
        report.add(f"realization P^{mu}", mapped.P[mu] - family.P[mu].scale(sp[mu]))
    Xs = {mu: family.X[mu].scale(sx[mu]) for mu in family.indices}
    Ps = {mu: family.P[mu].scale(sp[mu]) for mu in family.indices}
    # antilinear maps send the scalar i on each right-hand side to -i
    i_unit = -I if anti else I
    for name, res in deformed_relations(family, Xs, Ps, i_unit):
        report.add(f"mapped {name}", res)
    return report

