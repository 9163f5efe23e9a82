"""(1+1)-dimensional Dirac oscillator in the deformed algebra with beta' = 0.

Everything here is in dimensionless units: momenta in ``m c``, positions
in ``hbar/(m c)``, ``beta_tilde = beta m^2 c^2`` and
``omega_tilde = hbar omega / (m c^2)``. The coupled equations for the
large and small components are::

    B+ psi2 = (p0 - 1) psi1,    B- psi1 = (p0 + 1) psi2,
    B+-(g) = g p -+ omega_tilde f d/dp,   f = 1 - beta_tilde (p0^2 - p^2)

Shape invariance of ``B-(g_i) B+(g_i)`` fixes ``g_i = 1 + beta_tilde
omega_tilde i`` and quantizes ``p0``. Bound states are Gegenbauer
polynomials in ``z = sqrt(beta_tilde) p / sqrt(f)``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import NonPhysical, NonPhysicalConfig, NoGroundNegative
from .special import (
    DualNumber,
    QuadratureSpec,
    dual_exp,
    dual_log1p,
    gegenbauer,
    gegenbauer_norm,
    integrate_weighted,
    log_gamma_half_ratio,
    log_rising,
    z_inverse,
    z_map,
)
from .symbolic import DiffOp, PolyRing

__all__ = [
    "OscillatorConfig",
    "SpectrumPoint",
    "SusyLevel",
    "WavefunctionPair",
    "ShapeInvarianceResult",
    "Expansion",
    "susy_sequence",
    "susy_partial_sum",
    "level_energy_function",
    "shape_invariance_residual",
    "quantize_p0",
    "p0_closed_forms",
    "bound_gap",
    "spectrum",
    "energy",
    "energy_expansions",
    "small_deformation_slope",
    "wavefunctions",
    "closed_form_norms",
    "normalization_integral",
    "dirac_residual",
    "chebyshev_samples",
    "recursion_check",
    "cross_inner_products",
]


@dataclass(frozen=True)
class OscillatorConfig:
    """Dimensionless oscillator parameters.

    ``beta_tilde = 0`` is accepted for spectra (conventional oscillator).
    ``allow_unphysical`` lets ``beta_tilde >= 1`` through for demonstrating
    the unphysical regime; everything downstream then skips bound checks.
    """

    beta_tilde: float
    omega_tilde: float
    mass: float = None
    c: float = None
    hbar: float = None
    allow_unphysical: bool = False

    def __post_init__(self):
        b, w = self.beta_tilde, self.omega_tilde
        if not (math.isfinite(b) and math.isfinite(w)):
            raise NonPhysicalConfig("parameters must be finite")
        if w <= 0:
            raise NonPhysicalConfig(f"omega_tilde must be positive, got {w}")
        if b < 0:
            raise NonPhysicalConfig(f"beta_tilde must be non-negative, got {b}")
        if b >= 1 and not self.allow_unphysical:
            raise NonPhysicalConfig(
                f"beta_tilde = {b} >= 1: bound states require beta < 1/(m^2 c^2)"
            )

    @classmethod
    def from_physical(cls, mass, c, omega, beta, hbar=1.0, allow_unphysical=False):
        """Convert ``(m, c, omega, beta)`` to tilded parameters."""
        if mass <= 0 or c <= 0 or hbar <= 0:
            raise NonPhysicalConfig("mass, c and hbar must be positive")
        return cls(
            beta_tilde=beta * mass * mass * c * c,
            omega_tilde=hbar * omega / (mass * c * c),
            mass=mass, c=c, hbar=hbar,
            allow_unphysical=allow_unphysical,
        )

    @property
    def physical(self):
        return self.mass is not None and self.c is not None

    @property
    def rest_energy(self):
        return self.mass * self.c * self.c if self.physical else 1.0

    @property
    def lam(self):
        """``1/(beta_tilde omega_tilde)`` from the exact product, rounded once."""
        if self.beta_tilde == 0:
            return math.inf
        return float(1 / (Fraction(self.beta_tilde) * Fraction(self.omega_tilde)))

    def t(self, n):
        """``beta_tilde omega_tilde n`` rounded once."""
        return float(Fraction(self.beta_tilde) * Fraction(self.omega_tilde) * n)

    def s(self, n):
        """``omega_tilde n``."""
        return float(Fraction(self.omega_tilde) * n)

    def to_dict(self):
        d = {"beta_tilde": self.beta_tilde, "omega_tilde": self.omega_tilde}
        if self.physical:
            d.update(mass=self.mass, c=self.c, hbar=self.hbar)
        return d


@dataclass(frozen=True)
class SpectrumPoint:
    n: int
    tau: int
    p0: float
    e_n: float
    lam: float
    upper_bound_ratio: float

    def to_dict(self):
        return {"n": self.n, "tau": self.tau, "p0_tilde": self.p0, "e_n": self.e_n,
                "lambda": self.lam, "upper_bound_ratio": self.upper_bound_ratio}


@dataclass(frozen=True)
class SusyLevel:
    """Level ``i`` of the hierarchy; ``eps(p0) = eps_scale (1 - beta_tilde p0^2)``."""

    i: int
    g: float
    eps_scale: float
    beta_tilde: float

    def eps(self, p0):
        return self.eps_scale * (1 - self.beta_tilde * p0 * p0)


def _check_level(n, tau):
    if tau not in (1, -1):
        raise ValueError(f"tau must be +1 or -1, got {tau}")
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    if n == 0 and tau == -1:
        raise NoGroundNegative("the level (n, tau) = (0, -1) has no normalizable solution")


# -- SUSY hierarchy ------------------------------------------------------------


def susy_sequence(cfg, i_max):
    """Levels ``0..i_max`` with ``g_i = 1 + bw i`` and
    ``eps_{i+1} = omega_tilde (g_i + g_{i+1}) (1 - beta_tilde p0^2)``."""
    if i_max < 0:
        raise ValueError("i_max must be >= 0")
    b, w = Fraction(cfg.beta_tilde), Fraction(cfg.omega_tilde)
    out = []
    for i in range(i_max + 1):
        g = 1 + b * w * i
        scale = 0 if i == 0 else w * (2 * g - b * w)
        out.append(SusyLevel(i, float(g), float(scale), cfg.beta_tilde))
    return out


def susy_partial_sum(cfg, n, p0):
    """``sum_{i<=n} eps_i(p0)`` by explicit summation."""
    return math.fsum(level.eps(p0) for level in susy_sequence(cfg, n))


def level_energy_function(cfg, n, p0):
    """Closed form ``e_n(p0) = omega_tilde n (2 + bw n)(1 - beta_tilde p0^2)``."""
    return cfg.s(n) * (2 + cfg.t(n)) * (1 - cfg.beta_tilde * p0 * p0)


@dataclass
class ShapeInvarianceResult:
    i: int
    branch: str
    g_i: object
    g_next: object
    residual: DiffOp
    normalizable: bool

    @property
    def ok(self):
        return self.residual.is_zero()


@lru_cache(maxsize=None)
def _susy_ring():
    return PolyRing(("p", "p0", "bt", "w"))


def _ladder(ring, g, sign):
    """``B+(g)`` for sign=+1, ``B-(g)`` for sign=-1."""
    p, p0, bt, w = ring.gens_polys()
    f = 1 - bt * (p0 * p0 - p * p)
    dvars = ("p",)
    d = DiffOp.partial(ring, dvars, "p")
    return DiffOp.multiplication(ring, dvars, g * p) - (w * f * sign) * d


def shape_invariance_residual(cfg=None, i=0, branch="plus"):
    """Operator ``B-(g_i)B+(g_i) - B+(g_{i+1})B-(g_{i+1}) - eps_{i+1}``.

    ``cfg=None`` keeps ``beta_tilde`` and ``omega_tilde`` formal; ``p0`` is
    always formal. ``branch="minus"`` uses ``g_{i+1} = -g_i``, which solves
    the same matching conditions but is flagged non-normalizable.
    """
    if i < 0:
        raise ValueError("i must be >= 0")
    ring = _susy_ring()
    p, p0, bt, w = ring.gens_polys()
    if cfg is not None:
        bt = ring.const(Fraction(cfg.beta_tilde))
        w = ring.const(Fraction(cfg.omega_tilde))
    g_i = 1 + bt * w * i
    if branch == "plus":
        g_next = g_i + bt * w
    elif branch == "minus":
        g_next = -g_i
    else:
        raise ValueError("branch must be 'plus' or 'minus'")
    eps = w * (g_i + g_next) * (1 - bt * p0 * p0)
    subs = {} if cfg is None else {"bt": Fraction(cfg.beta_tilde), "w": Fraction(cfg.omega_tilde)}

    def ladder(g, sign):
        return _ladder(ring, g, sign).subs(subs)

    res = ladder(g_i, -1) * ladder(g_i, 1) - ladder(g_next, 1) * ladder(g_next, -1)
    res = res - DiffOp.multiplication(ring, ("p",), eps)
    # g_{i+1} > 0 is needed for a normalizable zero mode
    if g_next.is_constant():
        normalizable = g_next.constant_value().to_number().real > 0
    else:
        normalizable = branch == "plus"
    return ShapeInvarianceResult(i, branch, g_i, g_next, res, normalizable)


# -- spectrum ------------------------------------------------------------------


def p0_closed_forms(cfg, n, tau):
    """Both closed forms of the quantized ``p0``.

    First: ``tau sqrt((1 + s(2 + t)) / (1 + t(2 + t)))`` with ``s = omega n``,
    ``t = beta omega n``. Second: ``tau/sqrt(beta) sqrt(1 + (beta - 1)/(1 + t)^2)``,
    evaluated as ``tau/sqrt(beta) sqrt(t(2 + t) + beta)/(1 + t)`` which is the
    same expression without the cancellation at small ``t``. The second form
    is undefined at ``beta = 0`` and returned as ``None`` there.
    """
    s, t, b = cfg.s(n), cfg.t(n), cfg.beta_tilde
    first = tau * math.sqrt((1 + s * (2 + t)) / (1 + t * (2 + t)))
    if b == 0:
        return first, None
    if b > 1:
        second = tau * math.sqrt(1 + (b - 1) / (1 + t) ** 2) / math.sqrt(b)
    else:
        second = tau * math.sqrt(t * (2 + t) + b) / ((1 + t) * math.sqrt(b))
    return first, second


def bound_gap(cfg, n):
    """``1/sqrt(beta_tilde) - |p0_n|`` without cancellation."""
    b = cfg.beta_tilde
    if b <= 0:
        return math.inf
    u = (1 - b) / (1 + cfg.t(n)) ** 2
    return u / (math.sqrt(b) * (1 + math.sqrt(1 - u)))


def quantize_p0(cfg, n, tau):
    """Quantized level ``(n, tau)``; ``e_n = (1 - b) s (2 + t)/(1 + t)^2``."""
    _check_level(n, tau)
    p0, _ = p0_closed_forms(cfg, n, tau)
    s, t, b = cfg.s(n), cfg.t(n), cfg.beta_tilde
    e_n = (1 - b) * s * (2 + t) / (1 + t) ** 2
    if not cfg.allow_unphysical and b > 0 and b * p0 * p0 >= 1:
        raise NonPhysical(f"level ({n}, {tau}) violates beta_tilde p0^2 < 1")
    return SpectrumPoint(n, tau, p0, e_n, cfg.lam, abs(p0) * math.sqrt(b))


def spectrum(cfg, n_max):
    """Levels ordered by ``n``, then ``tau = +1`` before ``tau = -1``."""
    out = []
    for n in range(n_max + 1):
        for tau in (1, -1):
            if n == 0 and tau == -1:
                continue
            out.append(quantize_p0(cfg, n, tau))
    return out


def energy(cfg, n, tau):
    """``E = m c^2 p0`` (``m c^2 = 1`` for a dimensionless config)."""
    return cfg.rest_energy * quantize_p0(cfg, n, tau).p0


@dataclass(frozen=True)
class Expansion:
    regime: str
    exact: float
    leading: float
    approximation: float
    terms: dict = field(default_factory=dict)

    def to_dict(self):
        return {"regime": self.regime, "exact": self.exact, "leading": self.leading,
                "approximation": self.approximation, **self.terms}


def energy_expansions(cfg, n, tau, regime="small-deformation"):
    """Approximate energies in units of ``m c^2`` (scaled if physical).

    small-deformation::

        tau sqrt(1 + 2 s) (1 - 3/2 beta s^2 / (1 + 2 s))

    The full first-order term in ``beta`` is
    ``-beta s (3 s + 2) / (2 (1 + 2 s))``; the part
    ``-beta s / (1 + 2 s)`` is reported separately as ``omitted_term`` and
    ``first_order`` carries the complete correction.

    nonrelativistic::

        tau (1 + t)^-1 (1 + s (1 + t / 2))
    """
    _check_level(n, tau)
    mc2 = cfg.rest_energy
    s, t, b = cfg.s(n), cfg.t(n), cfg.beta_tilde
    exact = mc2 * quantize_p0(cfg, n, tau).p0
    root = math.sqrt(1 + 2 * s)
    if regime == "small-deformation":
        stated = -1.5 * b * s * s / (1 + 2 * s)
        omitted = -b * s / (1 + 2 * s)
        terms = {
            "correction": stated,
            "omitted_term": omitted,
            "first_order": mc2 * tau * root * (1 + stated + omitted),
        }
        return Expansion(regime, exact, mc2 * tau * root, mc2 * tau * root * (1 + stated), terms)
    if regime == "nonrelativistic":
        bracket = 1 + s * (1 + 0.5 * t)
        prefactor = 1 / (1 + t)
        terms = {"prefactor": prefactor, "bracket": bracket}
        return Expansion(regime, exact, mc2 * tau, mc2 * tau * prefactor * bracket, terms)
    raise ValueError("regime must be 'small-deformation' or 'nonrelativistic'")


def small_deformation_slope(omega_tilde, n, h=1e-3, levels=6):
    """``d/d beta_tilde [p0 / sqrt(1 + 2 omega n)]`` at ``beta_tilde = 0+``.

    One-sided differences on ``h, h/2, ...`` combined by Richardson
    extrapolation.
    """
    base = OscillatorConfig(0.0, omega_tilde)
    p_zero = quantize_p0(base, n, 1).p0
    root = math.sqrt(1 + 2 * base.s(n))

    def ratio(b):
        return quantize_p0(OscillatorConfig(b, omega_tilde), n, 1).p0 / root

    r0 = p_zero / root
    table = [[(ratio(h / 2 ** k) - r0) / (h / 2 ** k)] for k in range(levels)]
    for j in range(1, levels):
        for k in range(j, levels):
            prev, cur = table[k - 1][j - 1], table[k][j - 1]
            table[k].append((2 ** j * cur - prev) / (2 ** j - 1))
    return table[-1][-1]


# -- wavefunctions -----------------------------------------------------------------


def _log_A(lam, n, log_one_minus_bp0sq, beta_tilde):
    """``log A^(n)(lam)`` of the normalization constant.

    ``2^lam Gamma(lam) / sqrt(Gamma(2 lam + n))`` is reduced with the
    duplication formula so the large log-gamma terms cancel analytically.
    """
    return 0.5 * math.fsum([
        math.log(2) + 0.5 * math.log(math.pi) - log_gamma_half_ratio(lam) - log_rising(2 * lam, n),
        0.5 * math.log(beta_tilde),
        math.log(lam + n),
        math.lgamma(n + 1),
        (lam + 0.5) * log_one_minus_bp0sq,
        -math.log(2 * math.pi),
    ])


@dataclass(frozen=True)
class WavefunctionPair:
    """Large and small components of level ``(n, tau)``.

    ``psi1 = N1 f^(-lam/2) C_n^(lam)(z)`` and
    ``psi2 = N2 f^(-(lam+1)/2) C_{n-1}^(lam+1)(z)`` with
    ``f = A + beta_tilde p^2``, ``A = 1 - beta_tilde p0^2``.
    """

    point: SpectrumPoint
    beta_tilde: float
    omega_tilde: float
    lam: float
    A: float
    log_A: float
    log_A_n: float
    log_A_nm1: float
    log_N1: float
    log_N2: float
    sign_N2: int
    quantized: bool = True

    @property
    def n(self):
        return self.point.n

    @property
    def p0(self):
        return self.point.p0

    @property
    def N1(self):
        return math.exp(self.log_N1)

    @property
    def N2(self):
        if self.point.n == 0:
            return 0.0
        return self.sign_N2 * math.exp(self.log_N2)

    def f(self, p):
        return p * p * self.beta_tilde + self.A

    def log_f(self, p):
        # log A + log1p(b p^2 / A): the power f^-lam amplifies any rounding in log f by lam
        return dual_log1p(p * p * (self.beta_tilde / self.A)) + self.log_A

    def z(self, p):
        return z_map(p, self.A, self.beta_tilde)

    def psi1(self, p):
        z = self.z(p)
        amp = dual_exp(self.log_f(p) * (-0.5 * self.lam) + self.log_N1)
        return amp * gegenbauer(self.n, self.lam, z)

    def psi2(self, p):
        if self.n == 0:
            return p * 0.0
        z = self.z(p)
        amp = dual_exp(self.log_f(p) * (-0.5 * (self.lam + 1)) + self.log_N2) * self.sign_N2
        return amp * gegenbauer(self.n - 1, self.lam + 1, z)

    def metadata(self):
        return {
            "level": self.point.to_dict(),
            "lambda": self.lam,
            "A": self.A,
            "log_A_n": self.log_A_n,
            "log_A_nm1": self.log_A_nm1 if self.n > 0 else None,
            "N1": self.N1,
            "log_N1": self.log_N1,
            "N2": self.N2,
            "log_N2": self.log_N2 if self.n > 0 else None,
            "quantized": self.quantized,
        }


def wavefunctions(cfg, n, tau, p0=None):
    """Normalized components of level ``(n, tau)``.

    ``p0`` overrides the quantized value (used for detuning controls); the
    resulting pair is built from the same formulas but is not a solution.
    """
    _check_level(n, tau)
    if cfg.beta_tilde == 0:
        raise NonPhysicalConfig(
            "wavefunctions need beta_tilde > 0; at beta_tilde = 0 use the conventional "
            "Dirac oscillator (Hermite functions)"
        )
    if cfg.beta_tilde >= 1:
        raise NonPhysicalConfig("wavefunctions need beta_tilde < 1")
    point = quantize_p0(cfg, n, tau)
    b, lam = cfg.beta_tilde, cfg.lam
    quantized = p0 is None
    if quantized:
        # 1 - b p0^2 = (1 - b) lam^2 / (lam + n)^2
        log_A = math.log1p(-b) - 2 * math.log1p(cfg.t(n))
        A = (1 - b) / (1 + cfg.t(n)) ** 2
    else:
        A = 1 - b * p0 * p0
        if A <= 0:
            raise NonPhysical(f"p0 = {p0} violates beta_tilde p0^2 < 1")
        log_A = math.log(A)
        point = SpectrumPoint(n, tau, p0, p0 * p0 - 1, lam, abs(p0) * math.sqrt(b))
    q = point.p0
    log_A_n = _log_A(lam, n, log_A, b)
    log_N1 = 0.5 * math.log((q + 1) / (2 * q)) + log_A_n
    if n > 0:
        log_A_nm1 = _log_A(lam + 1, n - 1, log_A, b)
        log_N2 = 0.5 * math.log((q - 1) / (2 * q)) + log_A_nm1
    else:
        log_A_nm1 = log_N2 = -math.inf
    return WavefunctionPair(point, b, cfg.omega_tilde, lam, A, log_A, log_A_n, log_A_nm1,
                            log_N1, log_N2, tau, quantized)


def closed_form_norms(pair):
    """``(||psi1||^2, ||psi2||^2)`` under ``dp/f`` from the Gegenbauer norms.

    With ``p = sqrt(A/b) z/sqrt(1-z^2)`` each integral collapses to
    ``A^-(mu+1/2) b^-1/2 h_k(mu)`` times ``N^2``.
    """
    b, lam, la = pair.beta_tilde, pair.lam, pair.log_A
    def one(log_N, k, mu):
        return math.exp(2 * log_N - (mu + 0.5) * la - 0.5 * math.log(b)) * gegenbauer_norm(k, mu)
    n1 = one(pair.log_N1, pair.n, lam)
    n2 = one(pair.log_N2, pair.n - 1, lam + 1) if pair.n > 0 else 0.0
    return n1, n2


def _theta_width(pair):
    # spread of f^-lam C_n(z)^2 in the angle variable of integrate_weighted
    return math.sqrt((pair.n + 1) / pair.lam)


def normalization_integral(pair, spec=None):
    """``int dp/f (|psi1|^2 + |psi2|^2)`` by adaptive quadrature."""

    def density(p):
        a = pair.psi1(p)
        d = a * a
        if pair.n > 0:
            c = pair.psi2(p)
            d = d + c * c
        return d

    return integrate_weighted(density, pair.A, pair.beta_tilde, 1.0, spec or QuadratureSpec(),
                              width=_theta_width(pair))


def chebyshev_samples(pair, count=200, zmax=0.999):
    """Chebyshev nodes in ``z`` on ``(-zmax, zmax)`` mapped back to momenta.

    For large ``lam`` the wavefunction behaves like ``exp(-lam z^2 / 2)``
    and every node beyond a few widths underflows, so ``zmax`` is capped at
    twenty widths ``20 sqrt((n + 1)/lam)``.
    """
    zmax = min(zmax, 20 * math.sqrt((pair.n + 1) / pair.lam))
    k = np.arange(count)
    z = zmax * np.cos((2 * k + 1) * np.pi / (2 * count))[::-1]
    return z_inverse(z, pair.A, pair.beta_tilde)


def dirac_residual(cfg, pair, samples=None, detail=False):
    """Max of ``|B+ psi2 - (p0-1) psi1|`` and ``|B- psi1 - (p0+1) psi2|``.

    Normalized by ``max(|psi1|, |psi2|)`` over the same samples. Derivatives
    come from dual numbers. ``samples`` may be a point count or an array of
    momenta; the default is 200 Chebyshev points in ``z``.
    """
    if samples is None or np.isscalar(samples):
        p = chebyshev_samples(pair, 200 if samples is None else int(samples))
    else:
        p = np.asarray(samples, dtype=float)
    x = DualNumber.variable(p)
    s1, s2 = pair.psi1(x), pair.psi2(x)
    v1, d1 = np.asarray(s1.val), np.asarray(s1.der)
    v2 = np.broadcast_to(np.asarray(s2.val, dtype=float), p.shape)
    d2 = np.broadcast_to(np.asarray(s2.der, dtype=float), p.shape)
    w, q = cfg.omega_tilde, pair.p0
    f = pair.A + cfg.beta_tilde * p * p
    r1 = p * v2 - w * f * d2 - (q - 1) * v1
    r2 = p * v1 + w * f * d1 - (q + 1) * v2
    scale = max(np.max(np.abs(v1)), np.max(np.abs(v2)))
    value = float(max(np.max(np.abs(r1)), np.max(np.abs(r2))) / scale)
    if detail:
        return value, {"eq1": float(np.max(np.abs(r1)) / scale),
                       "eq2": float(np.max(np.abs(r2)) / scale), "scale": float(scale)}
    return value


def recursion_check(cfg, n, samples=200):
    """Raising step ``B+(g) phi^(n-1)(g1) ∝ phi^(n)(g)`` and its ``z`` form.

    Returns the larger of two relative defects: momentum space, where the
    best proportionality constant is fitted by least squares, and the
    ``z``-space operator ``(1 - z^2) d/dz + (1 - 2(lam + 1)) z`` applied to
    ``C_{n-1}^(lam+1)`` compared with ``C_n^(lam)``.
    """
    if n < 1:
        raise ValueError("recursion_check needs n >= 1")
    pair = wavefunctions(cfg, n, 1)
    lam, b, w, A = pair.lam, cfg.beta_tilde, cfg.omega_tilde, pair.A
    p = chebyshev_samples(pair, samples)
    x = DualNumber.variable(p)
    f = x * x * b + A
    # drop the constant log A so f^-lam stays finite; proportionality is unaffected
    log_f = pair.log_f(x) - pair.log_A
    z = z_map(x, A, b)
    lower = dual_exp(log_f * (-0.5 * (lam + 1))) * gegenbauer(n - 1, lam + 1, z)
    target = np.exp(log_f.val * (-0.5 * lam)) * gegenbauer(n, lam, z.val)
    raised = p * lower.val - w * f.val * lower.der
    defects = [_proportionality_defect(raised, target)]

    zz = DualNumber.variable(np.asarray(z.val))
    c = gegenbauer(n - 1, lam + 1, zz)
    lhs = (1 - zz.val ** 2) * c.der + (1 - 2 * (lam + 1)) * zz.val * c.val
    defects.append(_proportionality_defect(lhs, gegenbauer(n, lam, zz.val)))
    return max(defects)


def _proportionality_defect(u, v):
    # rescale first: Gegenbauer values for large lam can exceed sqrt(max float)
    u = u / np.max(np.abs(u))
    v = v / np.max(np.abs(v))
    c = np.dot(u, v) / np.dot(v, v)
    return float(np.max(np.abs(u - c * v)) / np.max(np.abs(u)))


def cross_inner_products(cfg, levels, weight="f0", spec=None):
    """Table of ``int dp/f_w (psi1_m psi1_n + psi2_m psi2_n)``.

    Bound states of the energy-dependent problem are not mutually
    orthogonal, so this only reports numbers. ``weight`` selects ``f_0``,
    ``f_m`` (row level) or ``f_n`` (column level).
    """
    if weight not in ("f0", "fm", "fn"):
        raise ValueError("weight must be 'f0', 'fm' or 'fn'")
    pairs = [wavefunctions(cfg, n, tau) for n, tau in levels]
    ground_A = 1 - cfg.beta_tilde
    rows = []
    for a, pa in enumerate(pairs):
        for c, pc in enumerate(pairs):
            if weight == "f0":
                A = ground_A
            else:
                A = pa.A if weight == "fm" else pc.A

            def integrand(p, pa=pa, pc=pc):
                v = pa.psi1(p) * pc.psi1(p)
                if pa.n > 0 and pc.n > 0:
                    v = v + pa.psi2(p) * pc.psi2(p)
                return v

            r = integrate_weighted(integrand, A, cfg.beta_tilde, 1.0, spec,
                                   width=_theta_width(pa if pa.n >= pc.n else pc))
            rows.append({"m": pa.n, "tau_m": pa.point.tau, "n": pc.n, "tau_n": pc.point.tau,
                         "weight": weight, "value": r.value, "error": r.error})
    return rows
