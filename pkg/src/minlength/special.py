"""Numerical special functions for the oscillator wavefunctions.

Contents: forward-mode dual numbers, Gegenbauer polynomials by
recurrence, their closed-form norms in log space, the momentum-to-``z``
map, and an adaptive Gauss-Kronrod rule for integrals over the momentum
line with a power of ``f = A + beta_tilde p^2`` in the denominator.
"""

import cmath
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonPhysical

__all__ = [
    "DualNumber",
    "dual_sqrt",
    "dual_exp",
    "dual_log",
    "dual_log1p",
    "gegenbauer",
    "log_gamma_half_ratio",
    "log_rising",
    "log_gegenbauer_norm",
    "gegenbauer_norm",
    "z_map",
    "z_inverse",
    "QuadratureSpec",
    "QuadResult",
    "adaptive_quad",
    "integrate_weighted",
]


class DualNumber:
    """``val + der * eps`` with ``eps**2 = 0``.

    ``val`` and ``der`` may be floats, complex numbers or numpy arrays, so
    a whole sample grid is differentiated in one pass.
    """

    __slots__ = ("val", "der")

    def __init__(self, val, der=0.0):
        self.val = val
        self.der = der

    @classmethod
    def variable(cls, x):
        x = np.asarray(x, dtype=float) if not np.isscalar(x) else x
        return cls(x, np.ones_like(x) if not np.isscalar(x) else 1.0)

    def __add__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(self.val + other.val, self.der + other.der)
        return DualNumber(self.val + other, self.der)

    __radd__ = __add__

    def __neg__(self):
        return DualNumber(-self.val, -self.der)

    def __sub__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(self.val - other.val, self.der - other.der)
        return DualNumber(self.val - other, self.der)

    def __rsub__(self, other):
        return DualNumber(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(self.val * other.val, self.der * other.val + self.val * other.der)
        return DualNumber(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(
                self.val / other.val,
                (self.der * other.val - self.val * other.der) / (other.val * other.val),
            )
        return DualNumber(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        return DualNumber(other / self.val, -other * self.der / (self.val * self.val))

    def __pow__(self, k):
        if isinstance(k, DualNumber):
            return dual_exp(k * dual_log(self))
        if k == 0:
            return DualNumber(self.val ** 0, self.der * 0)
        return DualNumber(self.val ** k, k * self.val ** (k - 1) * self.der)

    def conjugate(self):
        return DualNumber(np.conjugate(self.val), np.conjugate(self.der))

    def __repr__(self):
        return f"DualNumber({self.val!r}, {self.der!r})"


def _lib(x):
    if isinstance(x, np.ndarray):
        return np
    return cmath if isinstance(x, complex) else math


def dual_sqrt(x):
    if isinstance(x, DualNumber):
        r = _lib(x.val).sqrt(x.val)
        return DualNumber(r, x.der / (2 * r))
    return _lib(x).sqrt(x)


def dual_exp(x):
    if isinstance(x, DualNumber):
        e = _lib(x.val).exp(x.val)
        return DualNumber(e, e * x.der)
    return _lib(x).exp(x)


def dual_log(x):
    if isinstance(x, DualNumber):
        return DualNumber(_lib(x.val).log(x.val), x.der / x.val)
    return _lib(x).log(x)


def dual_log1p(x):
    """``log(1 + x)`` for real ``x``, accurate when ``x`` is small."""
    if isinstance(x, DualNumber):
        lib = np if isinstance(x.val, np.ndarray) else math
        return DualNumber(lib.log1p(x.val), x.der / (1 + x.val))
    return (np if isinstance(x, np.ndarray) else math).log1p(x)


# -- Gegenbauer polynomials ------------------------------------------------


def gegenbauer(n, lam, z):
    """``C_n^(lam)(z)`` via the three-term recurrence.

    ``n C_n = 2 (n + lam - 1) z C_{n-1} - (n + 2 lam - 2) C_{n-2}``.
    Works elementwise for arrays and for :class:`DualNumber` arguments.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    prev = z * 0 + 1.0
    if n == 0:
        return prev
    cur = z * (2.0 * lam)
    for k in range(2, n + 1):
        prev, cur = cur, (z * (2.0 * (k + lam - 1)) * cur - prev * (k + 2.0 * lam - 2)) * (1.0 / k)
    return cur


# B_2k / (2k (2k - 1)) for the Stirling series of log Gamma
_STIRLING = (
    1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156, -3617 / 122400,
)


def log_gamma_half_ratio(x):
    """``log Gamma(x + 1/2) - log Gamma(x)`` without cancellation for large ``x``.

    Two ``lgamma`` calls lose about ``eps * x log x`` in absolute terms,
    which is already 1e-9 at ``x = 1e6``. Here the Stirling series is
    differenced term by term; small ``x`` is shifted up by recurrence.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    shift = []
    while x < 20:
        shift.append(math.log1p(0.5 / x))
        x += 1.0
    # (x)log(x + 1/2) - (x - 1/2)log(x) - 1/2 written around log(x)
    value = x * math.log1p(0.5 / x) - 0.5 + 0.5 * math.log(x)
    corr = [c * ((x + 0.5) ** (1 - 2 * k) - x ** (1 - 2 * k)) for k, c in enumerate(_STIRLING, 1)]
    return math.fsum([value] + corr) - math.fsum(shift)


def log_rising(x, n):
    """``log (x)_n = log Gamma(x + n) - log Gamma(x)`` for ``x > 0`` by direct summation."""
    if n == 0:
        return 0.0
    return math.fsum(np.log(x + np.arange(n, dtype=float)))


def log_gegenbauer_norm(n, lam):
    """``log`` of ``int_{-1}^{1} (1 - z^2)^(lam - 1/2) C_n^(lam)(z)^2 dz``.

    The closed form ``pi 2^(1-2 lam) Gamma(2 lam + n) / (n! (n + lam) Gamma(lam)^2)``
    is rewritten with the duplication formula as
    ``sqrt(pi) Gamma(lam + 1/2)/Gamma(lam) (2 lam)_n / (n! (n + lam))`` so no
    large log-gamma values cancel.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return (
        0.5 * math.log(math.pi)
        + log_gamma_half_ratio(lam)
        + log_rising(2 * lam, n)
        - math.lgamma(n + 1)
        - math.log(n + lam)
    )


def gegenbauer_norm(n, lam):
    """``pi 2^(1-2 lam) Gamma(2 lam + n) / (n! (n + lam) Gamma(lam)^2)``."""
    return math.exp(log_gegenbauer_norm(n, lam))


# -- change of variables -------------------------------------------------------


def z_map(p, A, beta_tilde):
    """``z = sqrt(beta_tilde) p / sqrt(A + beta_tilde p^2)``, onto (-1, 1)."""
    if A <= 0:
        raise NonPhysical(f"A = 1 - beta_tilde p0^2 must be positive, got {A}")
    if beta_tilde <= 0:
        raise ValueError("beta_tilde must be positive for the z map")
    if isinstance(p, DualNumber):
        return p * math.sqrt(beta_tilde) / dual_sqrt(p * p * beta_tilde + A)
    p = np.asarray(p, dtype=float) if not np.isscalar(p) else p
    return math.sqrt(beta_tilde) * p / np.sqrt(A + beta_tilde * p * p)


def z_inverse(z, A, beta_tilde):
    """Inverse of :func:`z_map`: ``p = sqrt(A / beta_tilde) z / sqrt(1 - z^2)``."""
    if A <= 0:
        raise NonPhysical(f"A must be positive, got {A}")
    z = np.asarray(z, dtype=float) if not np.isscalar(z) else z
    return math.sqrt(A / beta_tilde) * z / np.sqrt((1 - z) * (1 + z))


# -- quadrature ------------------------------------------------------------------

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes
_WG_FULL[1:7:2] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[9:15:2] = _WG[:3][::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`adaptive_quad`.

    Refinement stops once the summed error estimate is below
    ``max(abs_tol, rel_tol * |value|, 100 eps int |f|)`` or raises
    :class:`~minlength.errors.NoConvergence` when a panel would exceed
    ``max_depth`` bisections or the panel count reaches ``max_panels``.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_depth: int = 50
    max_panels: int = 4000


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int = 0

    def __iter__(self):
        return iter((self.value, self.error))


def _gk15(func, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c + h * _NODES
    y = np.asarray(func(x))
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        return None
    k = h * np.dot(_WK, y)
    g = h * np.dot(_WG_FULL, y)
    if np.iscomplexobj(k):
        k = complex(k)
    else:
        k = float(k)
    resabs = abs(h) * np.dot(_WK, np.abs(y))
    # QUADPACK error scaling: tight for resolved panels, immune to evaluation noise
    resasc = abs(h) * np.dot(_WK, np.abs(y - k / (2 * h)))
    err = abs(k - g)
    if resasc > 0 and err > 0:
        err = resasc * min(1.0, (200 * err / resasc) ** 1.5)
    err = max(err, 50 * np.finfo(float).eps * resabs)
    return k, float(err), resabs


def _fsum(values):
    values = list(values)
    if any(isinstance(v, complex) or np.iscomplexobj(v) for v in values):
        return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
    return math.fsum(values)


def adaptive_quad(func, a, b, spec=None, breakpoints=()):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a vectorized ``func``.

    ``breakpoints`` seed the initial partition. Integrals that cancel to
    near zero are resolved to ``100 eps int |func|``, the rounding floor,
    rather than to ``rel_tol`` of their tiny value. The result is summed with
    :func:`math.fsum` in panel order so it does not depend on the order in
    which panels were refined.
    """
    spec = spec or QuadratureSpec()
    edges = [a] + sorted(x for x in breakpoints if a < x < b) + [b]
    heap = []
    panels = {}
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = _gk15(func, lo, hi)
        if r is None:
            raise NoConvergence(f"non-finite integrand on [{lo}, {hi}]")
        panels[(lo, hi)] = (r[0], r[1], r[2], 0)
        heapq.heappush(heap, (-r[1], lo, hi))

    eps = np.finfo(float).eps
    while True:
        value = _fsum(panels[k][0] for k in sorted(panels))
        error = math.fsum(v[1] for v in panels.values())
        resabs = math.fsum(v[2] for v in panels.values())
        # per-panel errors are floored at 50 eps resabs, so allow twice that overall
        tol = max(spec.abs_tol, spec.rel_tol * abs(value), 100 * eps * resabs)
        if error <= tol:
            return QuadResult(value, error, len(panels))
        if len(panels) >= spec.max_panels:
            raise NoConvergence(
                f"panel budget exhausted: estimate {value} +- {error}", value, error
            )
        _, lo, hi = heapq.heappop(heap)
        _, _, _, depth = panels.pop((lo, hi))
        if depth + 1 > spec.max_depth:
            raise NoConvergence(
                f"max depth {spec.max_depth} reached near [{lo}, {hi}]: estimate {value} +- {error}",
                value, error,
            )
        mid = 0.5 * (lo + hi)
        for l2, h2 in ((lo, mid), (mid, hi)):
            r = _gk15(func, l2, h2)
            if r is None:
                raise NoConvergence(f"non-finite integrand on [{l2}, {h2}]", value, error)
            panels[(l2, h2)] = (r[0], r[1], r[2], depth + 1)
            heapq.heappush(heap, (-r[1], l2, h2))


def _width_breakpoints(width, limit):
    """Geometric breakpoints ``+-width 2^k`` inside ``(-limit, limit)``."""
    if width is None or not width > 0:
        return ()
    pts = []
    x = width
    while x < limit:
        pts.extend((-x, x))
        x *= 2.0
    return tuple(pts)


def integrate_weighted(func, A, beta_tilde, weight_power=1.0, spec=None, width=None):
    """``int_R func(p) f(p)^(-weight_power) dp`` with ``f = A + beta_tilde p^2``.

    The line is mapped onto ``z = sin(theta)`` in (-1, 1) through
    ``p = sqrt(A/beta_tilde) tan(theta)``, which is the ``z`` map written in
    angle form; then ``f = A sec^2(theta)`` exactly and square-root end
    singularities of the ``z`` integrand disappear. ``beta_tilde = 0``
    falls back to ``p = tan(theta)`` with constant ``f = A``. The split at
    ``theta = 0`` lets the rule resolve mass concentrated near ``p = 0``.

    ``width`` is the expected spread of the integrand in ``theta``; for a
    weight like ``f^-lam`` it is about ``lam^-1/2``. Without it a narrow peak
    can fall between the nodes of the first panels and go unnoticed.
    """
    if A <= 0:
        raise NonPhysical(f"A must be positive, got {A}")
    if beta_tilde < 0:
        raise ValueError("beta_tilde must be non-negative")
    if beta_tilde > 0:
        scale = math.sqrt(A / beta_tilde)

        def integrand(theta):
            c = np.cos(theta)
            sec2 = 1.0 / (c * c)
            p = scale * np.tan(theta)
            f = A * sec2
            return func(p) * f ** (-weight_power) * scale * sec2
    else:

        def integrand(theta):
            c = np.cos(theta)
            sec2 = 1.0 / (c * c)
            return func(np.tan(theta)) * A ** (-weight_power) * sec2

    half = 0.5 * math.pi
    breaks = (0.0,) + _width_breakpoints(width, half)
    return adaptive_quad(integrand, -half, half, spec, breakpoints=breaks)
