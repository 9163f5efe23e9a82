"""Expectation values, the deformed uncertainty relation and Hermiticity.

Numerical work is one-dimensional and dimensionless (``hbar = 1``,
momenta in ``m c``) with ``beta' = 0``. A state at sharp ``p0`` lives in
the momentum line with scalar product ``int dp f^-alpha psi* phi``,
``f = 1 - beta_tilde (p0^2 - p^2)``, and the position operator is
``X = i (f d/dp + gamma_tilde p)``; ``alpha = 1 - gamma_tilde/beta_tilde``
makes ``X`` symmetric. Formula-level results (minimal uncertainties) take
general ``(beta, beta', D, hbar)``.
"""

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .algebra import DeformationParams, weight_exponent
from .errors import NonPhysical
from .special import DualNumber, QuadratureSpec, dual_exp, integrate_weighted

__all__ = [
    "StateSpec",
    "MomentSet",
    "trial_state",
    "pair_state",
    "gaussian_state",
    "inner_product",
    "apply_position",
    "moments",
    "uncertainty_inequality_check",
    "minimal_uncertainty",
    "minimization_identity_residual",
    "hermiticity_check",
    "uncertainty_report",
]


@dataclass(frozen=True)
class StateSpec:
    """Multi-component state at sharp ``p0``.

    ``components`` are callables of the momentum that accept floats, arrays
    and :class:`~minlength.special.DualNumber`. ``weight_power`` defaults to
    the exponent that makes ``X`` symmetric. ``width`` is an optional hint
    for the quadrature when the state is sharply peaked around ``p = 0``.
    """

    components: tuple
    beta_tilde: float
    p0: float = 0.0
    gamma_tilde: float = 0.0
    weight_power: float = None
    normalized: bool = False
    label: str = ""
    width: float = None

    def __post_init__(self):
        if self.beta_tilde < 0:
            raise ValueError("beta_tilde must be non-negative")
        if self.beta_tilde * self.p0 * self.p0 >= 1:
            raise NonPhysical(f"beta_tilde p0^2 = {self.beta_tilde * self.p0 ** 2} >= 1")
        if self.weight_power is None:
            object.__setattr__(self, "weight_power", self.consistent_weight_power())

    def consistent_weight_power(self):
        if self.beta_tilde == 0:
            if self.gamma_tilde != 0:
                raise ValueError("gamma_tilde must vanish when beta_tilde = 0")
            return 0.0
        params = DeformationParams(beta=self.beta_tilde, beta_prime=0, gamma=self.gamma_tilde, dim=1)
        return float(weight_exponent(params))

    @property
    def A(self):
        return 1 - self.beta_tilde * self.p0 * self.p0

    def f(self, p):
        return p * p * self.beta_tilde + self.A

    def with_gamma(self, gamma_tilde):
        """Same state and weight, position operator with another ``gamma_tilde``."""
        return replace(self, gamma_tilde=gamma_tilde)

    def scaled(self, factor):
        comps = tuple(_scaled(c, factor) for c in self.components)
        return replace(self, components=comps)

    def normalize(self, spec=None):
        norm = inner_product(self, self, spec).real
        if not norm > 0:
            raise ValueError("state has zero norm")
        return replace(self.scaled(1 / math.sqrt(norm)), normalized=True)


def _scaled(fn, factor):
    return lambda p: fn(p) * factor


@dataclass(frozen=True)
class MomentSet:
    mean_p: float
    var_p: float
    mean_p0sq: float
    mean_x: float
    var_x: float
    norm: float = 1.0
    errors: dict = field(default_factory=dict)

    @property
    def delta_p(self):
        return math.sqrt(max(self.var_p, 0.0))

    @property
    def delta_x(self):
        return math.sqrt(max(self.var_x, 0.0))

    def to_dict(self):
        return {"mean_p": self.mean_p, "var_p": self.var_p, "mean_p0sq": self.mean_p0sq,
                "mean_x": self.mean_x, "var_x": self.var_x, "norm": self.norm}


# -- states -------------------------------------------------------------------


def trial_state(beta_tilde, coeffs, s, p0=0.0, gamma_tilde=0.0, normalize=True):
    """``f^-s (c0 + c1 p + c2 p^2 + ...)`` with complex coefficients."""
    A = 1 - beta_tilde * p0 * p0
    coeffs = tuple(complex(c) for c in coeffs)

    def psi(p):
        f = p * p * beta_tilde + A
        poly = p * 0 + coeffs[-1]
        for c in reversed(coeffs[:-1]):
            poly = poly * p + c
        return poly * f ** (-s)

    st = StateSpec((psi,), beta_tilde, p0, gamma_tilde, label=f"trial s={s}")
    return st.normalize() if normalize else st


def gaussian_state(width=1.0, center=0.0, normalize=True):
    """Undeformed Gaussian ``exp(-(p - center)^2 / (4 width^2))``."""

    def psi(p):
        u = (p - center) * (1.0 / (2 * width))
        if isinstance(u, DualNumber):
            return dual_exp(u * u * -1.0)
        return np.exp(-u * u)

    st = StateSpec((psi,), 0.0, 0.0, label="gaussian")
    return st.normalize() if normalize else st


def pair_state(pair, weight_p0=None, normalize=False):
    """Oscillator level as a two-component state.

    The weight uses ``1/f`` with ``f`` at ``weight_p0`` (default: the
    level's own ``p0``), matching the oscillator normalization.
    """
    comps = (pair.psi1,) if pair.n == 0 else (pair.psi1, pair.psi2)
    p0 = pair.p0 if weight_p0 is None else weight_p0
    st = StateSpec(comps, pair.beta_tilde, p0, 0.0, 1.0, normalized=not normalize,
                   label=f"level n={pair.n} tau={pair.point.tau}",
                   width=math.sqrt((pair.n + 1) / pair.lam))
    return st.normalize() if normalize else st


# -- quadrature-based expectation values ------------------------------------------


def _integrate(state, fn, spec):
    A = state.A if state.beta_tilde > 0 else 1.0
    return integrate_weighted(fn, A, state.beta_tilde, state.weight_power, spec or QuadratureSpec(),
                              width=state.width)


def apply_position(state, component, p):
    """``X psi`` at momenta ``p`` via dual-number derivatives."""
    x = DualNumber.variable(np.asarray(p, dtype=float))
    d = component(x)
    f = state.A + state.beta_tilde * np.asarray(p) ** 2
    return 1j * (f * d.der + state.gamma_tilde * np.asarray(p) * d.val)


def inner_product(left, right, spec=None, x_left=False, x_right=False):
    """``<(X) left | (X) right>`` under the weight of ``left``.

    ``x_left``/``x_right`` apply ``X`` (with each state's own
    ``gamma_tilde``) before taking the product.
    """
    if len(left.components) != len(right.components):
        raise ValueError("states must have the same number of components")

    def integrand(p):
        total = 0
        for cl, cr in zip(left.components, right.components):
            a = apply_position(left, cl, p) if x_left else cl(p)
            b = apply_position(right, cr, p) if x_right else cr(p)
            total = total + np.conjugate(a) * b
        return total

    r = _integrate(left, integrand, spec)
    return complex(r.value)


def moments(state, spec=None):
    """``<P>``, ``Var P``, ``<X>``, ``Var X`` and the sharp ``p0^2``.

    ``<X^2>`` is evaluated as ``<X psi | X psi>``, which uses the symmetry
    of ``X`` under the state's weight.
    """
    spec = spec or QuadratureSpec()

    def density_times(power):
        def fn(p):
            total = 0
            for c in state.components:
                v = c(p)
                total = total + (np.conjugate(v) * v).real
            return total * np.asarray(p) ** power
        return fn

    norm = _integrate(state, density_times(0), spec).value
    mp = _integrate(state, density_times(1), spec).value / norm
    mp2 = _integrate(state, density_times(2), spec).value / norm
    mx = inner_product(state, state, spec, x_right=True).real / norm
    mx2 = inner_product(state, state, spec, x_left=True, x_right=True).real / norm
    return MomentSet(mp, mp2 - mp * mp, state.p0 ** 2, mx, mx2 - mx * mx, norm)


def uncertainty_inequality_check(state=None, moment_set=None, beta=None, beta_prime=0.0,
                                 hbar=1.0, tol=1e-9, spec=None):
    """``dX dP >= hbar/2 |1 - beta(<P0^2> - dP^2 - <P>^2) + beta'(dP^2 + <P>^2)|``."""
    if moment_set is None:
        moment_set = moments(state, spec)
    if beta is None:
        beta = state.beta_tilde
    m = moment_set
    p2 = m.var_p + m.mean_p ** 2
    rhs = 0.5 * hbar * abs(1 - beta * (m.mean_p0sq - p2) + beta_prime * p2)
    lhs = m.delta_x * m.delta_p
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs >= rhs - tol), "margin": lhs - rhs}


# -- formula-level results -------------------------------------------------------------


def minimization_identity_residual(a, b):
    """``|min_{x>0}(a/x + b x) - 2 sqrt(ab)|`` relative, minimum found numerically."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    res = minimize_scalar(lambda u: a * math.exp(-u) + b * math.exp(u),
                          bracket=(-1.0, 1.0), method="brent", tol=1e-12)
    exact = 2 * math.sqrt(a * b)
    return abs(res.fun - exact) / exact


def minimal_uncertainty(params, mean_p0sq=0.0, mean_p=0.0, component=0):
    """Smallest position uncertainties for sharp ``<P0^2>`` and mean momenta.

    ``dX_min = hbar sqrt((D beta + beta') {1 - beta(<P0^2> - sum <P^j>^2) + beta' <P^i>^2})``
    and ``dX_0 = hbar sqrt((D beta + beta')(1 - beta <P0^2>))``. ``mean_p``
    is a scalar (same for every direction) or a sequence of length ``D``.
    """
    if not isinstance(params, DeformationParams):
        raise TypeError("params must be DeformationParams")
    if not params.numeric:
        raise ValueError("minimal_uncertainty needs numeric beta and beta'")
    D = params.dim
    beta, betap = float(params.beta), float(params.beta_prime)
    hbar = 1.0 if params.hbar is None else float(params.hbar)
    means = [float(mean_p)] * D if np.isscalar(mean_p) else [float(x) for x in mean_p]
    if len(means) != D:
        raise ValueError(f"need {D} mean momenta")
    coeff = D * beta + betap
    bracket = 1 - beta * (mean_p0sq - sum(x * x for x in means)) + betap * means[component] ** 2
    bracket0 = 1 - beta * mean_p0sq
    if bracket <= 0 or bracket0 <= 0:
        raise NonPhysical("the bracket under the square root must be positive")
    dx_min = hbar * math.sqrt(coeff * bracket)
    dx0 = hbar * math.sqrt(coeff * bracket0)
    check = minimization_identity_residual(bracket, coeff) if coeff > 0 else 0.0
    return {
        "dx_min": dx_min,
        "dx_abs_min": dx0,
        "kempf_value": hbar * math.sqrt(coeff),
        "reduction_factor": math.sqrt(bracket0),
        "minimization_residual": check,
    }


def hermiticity_check(left, right=None, spec=None):
    """``|<left|X right> - <X left|right>|`` under the weight of ``left``.

    ``X`` uses ``right.gamma_tilde`` on both sides, so detuning ``gamma``
    with the weight held fixed breaks the symmetry.
    """
    right = left if right is None else right
    probe = replace(left, gamma_tilde=right.gamma_tilde, weight_power=left.weight_power)
    a = inner_product(probe, replace(right, weight_power=left.weight_power), spec, x_right=True)
    b = inner_product(probe, replace(right, weight_power=left.weight_power), spec, x_left=True)
    return abs(a - b)


def uncertainty_report(cfg, n=0, tau=1, spec=None):
    """JSON-ready summary for an oscillator level of ``cfg``."""
    from .oscillator import wavefunctions

    pair = wavefunctions(cfg, n, tau)
    state = pair_state(pair)
    m = moments(state, spec)
    ineq = uncertainty_inequality_check(moment_set=m, beta=cfg.beta_tilde)
    params = DeformationParams(beta=Fraction(cfg.beta_tilde), beta_prime=0, gamma=0, dim=1, hbar=1)
    mins = minimal_uncertainty(params, mean_p0sq=m.mean_p0sq, mean_p=m.mean_p)
    defect = hermiticity_check(state, spec=spec)
    return {
        "level": {"n": n, "tau": tau, "p0_tilde": pair.p0},
        "moments": m.to_dict(),
        "lhs": ineq["lhs"],
        "rhs": ineq["rhs"],
        "holds": ineq["holds"],
        "dx_min": mins["dx_min"],
        "dx_abs_min": mins["dx_abs_min"],
        "hermiticity_defect": defect,
    }
