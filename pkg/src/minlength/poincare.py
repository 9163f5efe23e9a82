"""Deformed Lorentz and translation generators and their closure.

``L_ab = (1 - beta P.P)^-1 (X_a P_b - X_b P_a)`` and
``P^_a = (1 - beta P.P)^-1 P_a`` are built from the covariant family and
checked to close the undeformed Poincare algebra ``iso(D, 1)``.
"""

from dataclasses import dataclass
from itertools import combinations

from .algebra import (
    VerificationReport,
    build_covariant_operators,
    deformed_relations,
)
from .errors import BadIndices
from .symbolic import I, DiffOp, PolyRing, RationalFn, op_commutator

__all__ = [
    "LorentzGenerator",
    "TranslationGenerator",
    "build_lorentz",
    "build_translation",
    "verify_poincare_closure",
    "verify_generator_action",
    "verify_lorentz_form_invariance",
    "translation_function",
    "two_particle_translation_residual",
]


@dataclass(frozen=True)
class LorentzGenerator:
    a: int
    b: int
    op: DiffOp


@dataclass(frozen=True)
class TranslationGenerator:
    a: int
    op: DiffOp


def _inverse_denominator(family):
    return RationalFn.inverse_power(family.denominator(), 1)


def build_lorentz(params, a, b, *, ordering="xp", allow_diagonal=False):
    """Deformed Lorentz generator ``L_ab``.

    ``ordering="px"`` uses the equivalent form
    ``(1 - beta P.P)^-1 (P_b X_a - P_a X_b)``.
    """
    family = build_covariant_operators(params)
    if a == b:
        if not allow_diagonal:
            raise BadIndices(f"L_{a}{b} is not a generator")
        return LorentzGenerator(a, b, DiffOp.zero(family.ring, family.dvars))
    Xa, Xb = family.lower_X(a), family.lower_X(b)
    Pa, Pb = family.lower_P(a), family.lower_P(b)
    if ordering == "xp":
        body = Xa * Pb - Xb * Pa
    elif ordering == "px":
        body = Pb * Xa - Pa * Xb
    else:
        raise ValueError("ordering must be 'xp' or 'px'")
    return LorentzGenerator(a, b, _inverse_denominator(family) * body)


def build_translation(params, a):
    """Deformed translation generator ``P^_a = (1 - beta P.P)^-1 P_a``."""
    family = build_covariant_operators(params)
    coeff = _inverse_denominator(family) * family.momenta[a] * family.g(a, a)
    return TranslationGenerator(a, DiffOp.multiplication(family.ring, family.dvars, coeff))


def translation_function(family):
    """``g(P.P) = (2 beta - beta' - (2 beta + beta') beta P.P) / (1 - beta P.P)^2``."""
    ring = family.ring
    beta = family.params.symbol(ring, "beta")
    betap = family.params.symbol(ring, "beta_prime")
    num = beta * 2 - betap - (beta * 2 + betap) * beta * family.q
    return RationalFn(num, 2, family.denominator())


class _Generators:
    def __init__(self, params):
        self.params = params
        self.family = build_covariant_operators(params)
        idx = self.family.indices
        self._L = {(a, b): build_lorentz(params, a, b).op for a, b in combinations(idx, 2)}
        self.P = {a: build_translation(params, a).op for a in idx}
        self.zero = DiffOp.zero(self.family.ring, self.family.dvars)

    def L(self, a, b):
        if a == b:
            return self.zero
        if a < b:
            return self._L[(a, b)]
        return -self._L[(b, a)]

    def pairs(self):
        return list(self._L)


def verify_poincare_closure(params, strict=False):
    """so(D,1) table, commuting translations and the mixed relations."""
    gens = _Generators(params)
    fam = gens.family
    g = fam.g
    hbar = params.symbol(fam.ring, "hbar")
    ihbar = hbar * I
    report = VerificationReport(f"Poincare closure (D={params.dim})")

    for a, b in gens.pairs():
        other = build_lorentz(params, a, b, ordering="px").op
        report.add(f"L_{a}{b} orderings agree", gens.L(a, b) - other)

    for (a, b) in gens.pairs():
        for (r, s) in gens.pairs():
            lhs = op_commutator(gens.L(a, b), gens.L(r, s))
            rhs = (
                gens.L(b, s).scale(g(a, r)) - gens.L(b, r).scale(g(a, s))
                - gens.L(a, s).scale(g(b, r)) + gens.L(a, r).scale(g(b, s))
            )
            report.add(f"[L_{a}{b},L_{r}{s}]", lhs + ihbar * rhs)

    idx = fam.indices
    for a, b in combinations(idx, 2):
        report.add(f"[P_{a},P_{b}]", op_commutator(gens.P[a], gens.P[b]))

    for (a, b) in gens.pairs():
        for r in idx:
            lhs = op_commutator(gens.L(a, b), gens.P[r])
            rhs = gens.P[a].scale(g(b, r)) - gens.P[b].scale(g(a, r))
            report.add(f"[L_{a}{b},P_{r}]", lhs - ihbar * rhs)

    if strict:
        report.raise_on_failure()
    return report


def verify_generator_action(params, strict=False):
    """Generators reproduce the infinitesimal Lorentz and translation maps.

    Coefficient of each independent ``delta omega^{ab}`` (a < b):
    ``[L_ab, X^mu] = -i hbar (delta^mu_a X_b - delta^mu_b X_a)`` and the
    same with ``P``. Coefficient of ``delta a^a``:
    ``i [P^_a, X^mu] = -hbar (delta^mu_a + g(P.P) P_a P^mu)`` and
    ``[P^_a, P^mu] = 0``.
    """
    gens = _Generators(params)
    fam = gens.family
    ring = fam.ring
    hbar = params.symbol(ring, "hbar")
    idx = fam.indices
    report = VerificationReport(f"generator action (D={params.dim})")

    def delta(x, y):
        return 1 if x == y else 0

    for a, b in gens.pairs():
        L = gens.L(a, b)
        for mu in idx:
            for name, ops, low in (("X", fam.X, fam.lower_X), ("P", fam.P, fam.lower_P)):
                expected = low(b).scale(delta(mu, a)) - low(a).scale(delta(mu, b))
                res = op_commutator(L, ops[mu]) + (hbar * I) * expected
                report.add(f"[L_{a}{b},{name}^{mu}]", res)

    gfun = translation_function(fam)
    for a in idx:
        Pa_low = fam.momenta[a] * fam.g(a, a)
        for mu in idx:
            shift = gfun * Pa_low * fam.momenta[mu] + delta(mu, a)
            rhs = DiffOp.multiplication(ring, fam.dvars, RationalFn(hbar) * shift)
            res = op_commutator(gens.P[a], fam.X[mu]).scale(I) + rhs
            report.add(f"i[P^_{a},X^{mu}]", res)
            report.add(f"[P^_{a},P^{mu}]", op_commutator(gens.P[a], fam.P[mu]))

    if strict:
        report.raise_on_failure()
    return report


def _dw_name(a, b):
    return f"dw{a}{b}"


def verify_lorentz_form_invariance(params, strict=False):
    """First-order form invariance of the deformed relations.

    ``X' = X + delta omega^mu_nu X^nu`` (same for ``P``) with every
    ``delta omega^{ab}`` a formal symbol; products of two of them are
    truncated. The primed operators must satisfy the same three relations,
    with ``P'.P'`` in place of ``P.P``.
    """
    D = params.dim
    idx = tuple(range(D + 1))
    dws = tuple(_dw_name(a, b) for a, b in combinations(idx, 2))
    fam = build_covariant_operators(params, extra_gens=dws)
    ring = fam.ring

    def omega_up(mu, rho):
        if mu == rho:
            return ring.zero
        if mu < rho:
            return ring.gen(_dw_name(mu, rho))
        return -ring.gen(_dw_name(rho, mu))

    def transform(ops):
        out = {}
        for mu in idx:
            op = ops[mu]
            for nu in idx:
                # delta omega^mu_nu = delta omega^{mu rho} g_{rho nu}
                w = omega_up(mu, nu) * fam.g(nu, nu)
                if w:
                    op = op + w * ops[nu]
            out[mu] = op
        return out

    Xp, Pp = transform(fam.X), transform(fam.P)
    report = VerificationReport(f"first-order Lorentz form invariance (D={D})")
    for name, res in deformed_relations(fam, Xp, Pp):
        report.add(name, res.truncate(dws, 1))
    if strict:
        report.raise_on_failure()
    return report


def two_particle_translation_residual(params):
    """Change of ``X_1^mu - X_2^mu`` under the pair translation generator.

    The pair generator is ``P^_a(1) + P^_a(2)`` on disjoint momenta
    ``p*`` and ``q*``; cross terms commute, so the coefficient of
    ``delta a^a`` in ``delta(X_1 - X_2)`` is
    ``N1/B1^k1 - N2/B2^k2``. Returned per ``(a, mu)`` as the
    cross-multiplied polynomial ``N1 B2^k2 - N2 B1^k1``; it vanishes
    identically only in the undeformed case.
    """
    f1 = build_covariant_operators(params, prefix="p")
    f2 = build_covariant_operators(params, prefix="q")
    # common ring for the cross-multiplied comparison
    gens = tuple(dict.fromkeys(f1.ring.gens + f2.ring.gens))
    ring = PolyRing(gens)
    out = {}
    for a in f1.indices:
        T1 = _translation_on(f1, a)
        T2 = _translation_on(f2, a)
        for mu in f1.indices:
            c1 = op_commutator(T1, f1.X[mu]).coefficient()
            c2 = op_commutator(T2, f2.X[mu]).coefficient()
            n1, n2 = c1.num.change_ring(ring), c2.num.change_ring(ring)
            if c2.k:
                n1 = n1 * c2.base.change_ring(ring) ** c2.k
            if c1.k:
                n2 = n2 * c1.base.change_ring(ring) ** c1.k
            out[(a, mu)] = n1 - n2
    return out


def _translation_on(family, a):
    coeff = _inverse_denominator(family) * family.momenta[a] * family.g(a, a)
    return DiffOp.multiplication(family.ring, family.dvars, coeff)
