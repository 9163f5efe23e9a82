from fractions import Fraction

import pytest

from minlength.algebra import DeformationParams, build_covariant_operators
from minlength.errors import BadIndices, NonZeroResidual
from minlength.poincare import (
    build_lorentz,
    build_translation,
    translation_function,
    two_particle_translation_residual,
    verify_generator_action,
    verify_lorentz_form_invariance,
    verify_poincare_closure,
)
from minlength.symbolic import I, DiffOp, op_commutator

FORMAL = {d: DeformationParams(dim=d) for d in (1, 2, 3)}


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_closure(dim):
    report = verify_poincare_closure(FORMAL[dim])
    assert report.ok, [r.relation for r in report.failures()]
    n = dim + 1
    pairs = n * (n - 1) // 2
    assert len(report.relations) == pairs + pairs * pairs + pairs + pairs * n


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_generator_action(dim):
    report = verify_generator_action(FORMAL[dim])
    assert report.ok, [r.relation for r in report.failures()]


@pytest.mark.parametrize("dim", [1, 2])
def test_form_invariance(dim):
    assert verify_lorentz_form_invariance(FORMAL[dim]).ok


@pytest.mark.slow
def test_form_invariance_three_dimensions():
    assert verify_lorentz_form_invariance(FORMAL[3], strict=True).ok


def test_diagonal_indices_rejected():
    with pytest.raises(BadIndices):
        build_lorentz(FORMAL[1], 1, 1)
    assert build_lorentz(FORMAL[1], 1, 1, allow_diagonal=True).op.is_zero()


def test_bad_ordering():
    with pytest.raises(ValueError):
        build_lorentz(FORMAL[1], 0, 1, ordering="yx")


def test_antisymmetry_of_lorentz():
    a = build_lorentz(FORMAL[2], 0, 2).op
    b = build_lorentz(FORMAL[2], 2, 0).op
    assert (a + b).is_zero()


@pytest.mark.parametrize(
    "params",
    [
        DeformationParams(beta=0, dim=2),
        DeformationParams(beta_prime=0, dim=2),
    ],
)
def test_lorentz_generator_is_undeformed_when_one_parameter_vanishes(params):
    # with beta = 0 or beta' = 0 the prefactor cancels the deformation and
    # L_ab acts as the ordinary x_a p_b - x_b p_a
    fam = build_covariant_operators(params)
    ring, dv = fam.ring, fam.dvars
    hbar = ring.gen("hbar")
    for a in fam.indices:
        for b in fam.indices:
            if a >= b:
                continue
            L = build_lorentz(params, a, b).op
            xa = (hbar * (-I)) * DiffOp.partial(ring, dv, dv[a])
            xb = (hbar * (-I)) * DiffOp.partial(ring, dv, dv[b])
            pa = DiffOp.multiplication(ring, dv, fam.momenta[a] * fam.g(a, a))
            pb = DiffOp.multiplication(ring, dv, fam.momenta[b] * fam.g(b, b))
            assert L == xa * pb - xb * pa


def test_translation_coefficient_value():
    params = DeformationParams(beta=Fraction(1, 10), beta_prime=Fraction(1, 5), gamma=0, hbar=1, dim=1)
    T = build_translation(params, 0).op
    value = T.coefficient().evaluate({"p0": 1, "p1": 0})
    assert value == Fraction(10, 9)


def test_translation_function_undeformed():
    fam = build_covariant_operators(DeformationParams(beta=0, beta_prime=0, dim=1))
    assert translation_function(fam).num.is_zero()


def test_translation_function_value():
    params = DeformationParams(beta=Fraction(1, 10), beta_prime=Fraction(1, 5), gamma=0, hbar=1, dim=1)
    fam = build_covariant_operators(params)
    # at P = 0 the function equals 2 beta - beta'
    assert translation_function(fam).evaluate({"p0": 0, "p1": 0}) == 0
    # at p0 = 1: (0 - (2/5)(1/10)) / (9/10)^2
    assert translation_function(fam).evaluate({"p0": 1, "p1": 0}) == Fraction(-4, 100) / Fraction(81, 100)


def test_two_particle_residual():
    res = two_particle_translation_residual(FORMAL[1])
    assert any(not r.is_zero() for r in res.values())
    undeformed = two_particle_translation_residual(DeformationParams(beta=0, beta_prime=0, dim=1))
    assert all(r.is_zero() for r in undeformed.values())


def test_tampered_translation_is_caught():
    params = FORMAL[1]
    fam = build_covariant_operators(params)
    good = build_translation(params, 1).op
    bad = good.scale(2)
    # the correct generator commutes with P^0, a scaled one still does, but
    # its action on X picks up the wrong normalisation
    assert op_commutator(bad, fam.P[0]).is_zero()
    assert not (op_commutator(bad, fam.X[1]) - op_commutator(good, fam.X[1])).is_zero()


def test_strict_closure_raises_on_failure(monkeypatch):
    import minlength.poincare as mod

    original = mod.build_translation

    def broken(params, a):
        gen = original(params, a)
        return mod.TranslationGenerator(a, gen.op.scale(2)) if a == 0 else gen

    monkeypatch.setattr(mod, "build_translation", broken)
    report = verify_poincare_closure(FORMAL[1])
    assert not report.ok
    with pytest.raises(NonZeroResidual):
        verify_poincare_closure(FORMAL[1], strict=True)
