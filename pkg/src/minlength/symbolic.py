"""Exact computer algebra for the deformed operator checks.

Four layers, each immutable once built:

* :class:`GaussianRational` -- ``a + b i`` with ``a, b`` exact rationals.
* :class:`MultiPoly` -- sparse polynomial over a :class:`PolyRing`.
* :class:`RationalFn` -- ``num / base**k`` for a single base polynomial.
  Every denominator needed here is a power of one factor such as
  ``1 - beta p.p``, so no multivariate gcd is required.
* :class:`DiffOp` -- normal-ordered differential operator
  ``sum_a c_a(p) d^a`` with all derivatives to the right.

Terms are ordered graded-lexicographically on the ring's generator list,
which makes :func:`str` output canonical.
"""

from fractions import Fraction
from itertools import product
from math import comb
from numbers import Rational

__all__ = [
    "GaussianRational",
    "I",
    "PolyRing",
    "MultiPoly",
    "RationalFn",
    "DiffOp",
    "op_compose",
    "op_commutator",
    "op_apply",
    "differentiate",
]


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x, 0)

    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            if not _is_scalar(other):
                return NotImplemented
            other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            if not _is_scalar(other):
                return NotImplemented
            other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            if not _is_scalar(other):
                return NotImplemented
            other = GaussianRational.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational(a * c, 0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        den = other.re * other.re + other.im * other.im
        if not den:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are exact")
        if n < 0:
            return GaussianRational(1) / self ** (-n)
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (Rational, int)):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return self.re == other.real and self.im == other.imag
        if isinstance(other, float):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_number(self):
        """Fraction when real, otherwise a Python complex."""
        if not self.im:
            return self.re
        return complex(self)

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        im = "i" if self.im == 1 else "-i" if self.im == -1 else f"{self.im}i"
        if not self.re:
            return im
        sign = "+" if self.im > 0 else "-"
        mag = "i" if abs(self.im) == 1 else f"{abs(self.im)}i"
        return f"{self.re}{sign}{mag}"

    def is_simple(self):
        return not self.re or not self.im


I = GaussianRational(0, 1)
_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


def _grlex_key(m):
    return (sum(m), m)


class PolyRing:
    """Ordered set of polynomial generators."""

    def __init__(self, gens):
        gens = tuple(gens)
        if len(set(gens)) != len(gens):
            raise ValueError(f"duplicate generators in {gens}")
        self.gens = gens
        self._index = {g: i for i, g in enumerate(gens)}
        self._zero_mono = (0,) * len(gens)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.gens == other.gens

    def __hash__(self):
        return hash(self.gens)

    def __repr__(self):
        return f"PolyRing({self.gens})"

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"{name!r} is not a generator of {self.gens}") from None

    def __contains__(self, name):
        return name in self._index

    def gen(self, name):
        m = [0] * len(self.gens)
        m[self.index(name)] = 1
        return MultiPoly(self, {tuple(m): _ONE})

    def const(self, c):
        c = GaussianRational.coerce(c)
        if not c:
            return MultiPoly(self, {})
        return MultiPoly(self, {self._zero_mono: c})

    @property
    def zero(self):
        return MultiPoly(self, {})

    @property
    def one(self):
        return self.const(1)

    def __call__(self, value):
        if isinstance(value, MultiPoly):
            if value.ring != self:
                return value.change_ring(self)
            return value
        if isinstance(value, str):
            return self.gen(value)
        return self.const(value)

    def gens_polys(self):
        return tuple(self.gen(g) for g in self.gens)


def _is_scalar(x):
    return isinstance(x, (int, Fraction, GaussianRational, complex, float, Rational))


class MultiPoly:
    """Sparse polynomial with Gaussian-rational coefficients.

    ``terms`` maps exponent tuples (aligned with ``ring.gens``) to nonzero
    coefficients. Instances must not be mutated after construction.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    @classmethod
    def from_dict(cls, ring, terms):
        clean = {}
        for m, c in terms.items():
            c = GaussianRational.coerce(c)
            if c:
                clean[tuple(m)] = c
        return cls(ring, clean)

    # -- coercion helpers ------------------------------------------------
    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring.gens} vs {other.ring.gens}")
            return other
        if _is_scalar(other):
            return self.ring.const(other)
        return None

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return MultiPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            c = GaussianRational.coerce(other)
            if not c:
                return self.ring.zero
            return MultiPoly(self.ring, {m: v * c for m, v in self.terms.items()})
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = {}
        get = out.get
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = c1 * c2
                prev = get(m)
                out[m] = v if prev is None else prev + v
        return MultiPoly(self.ring, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = self.ring.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if _is_scalar(other):
            c = GaussianRational(1) / GaussianRational.coerce(other)
            return self * c
        return NotImplemented

    # -- predicates ------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and self.ring._zero_mono in self.terms)

    def constant_value(self):
        """Constant coefficient (the whole value when :meth:`is_constant`)."""
        return self.terms.get(self.ring._zero_mono, _ZERO)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.ring == other.ring and self.terms == other.terms
        if _is_scalar(other):
            return self.terms == self.ring.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- structure -------------------------------------------------------
    def degree(self, name=None):
        if not self.terms:
            return -1
        if name is None:
            return max(sum(m) for m in self.terms)
        i = self.ring.index(name)
        return max(m[i] for m in self.terms)

    def leading_term(self):
        m = max(self.terms, key=_grlex_key)
        return m, self.terms[m]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def coeff(self, name, power):
        """Coefficient polynomial of ``name**power``."""
        i = self.ring.index(name)
        out = {}
        for m, c in self.terms.items():
            if m[i] == power:
                out[m[:i] + (0,) + m[i + 1:]] = c
        return MultiPoly(self.ring, out)

    def free_symbols(self):
        present = set()
        for m in self.terms:
            for g, e in zip(self.ring.gens, m):
                if e:
                    present.add(g)
        return present

    # -- calculus and substitution --------------------------------------
    def diff(self, name):
        i = self.ring.index(name)
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1:]] = c * e
        return MultiPoly(self.ring, out)

    def subs(self, mapping):
        """Substitute generators by scalars or polynomials of this ring."""
        if not mapping:
            return self
        idx = {}
        for name, val in mapping.items():
            i = self.ring.index(name)
            idx[i] = val if isinstance(val, MultiPoly) else self.ring.const(val)
        powers = {i: {0: self.ring.one} for i in idx}

        def power(i, e):
            cache = powers[i]
            if e not in cache:
                cache[e] = idx[i] ** e
            return cache[e]

        result = self.ring.zero
        acc = {}
        for m, c in self.terms.items():
            kept = tuple(0 if i in idx else e for i, e in enumerate(m))
            factor = MultiPoly(self.ring, {kept: c})
            for i in idx:
                if m[i]:
                    factor = factor * power(i, m[i])
            for mm, cc in factor.terms.items():
                prev = acc.get(mm)
                acc[mm] = cc if prev is None else prev + cc
        result = MultiPoly(self.ring, {m: c for m, c in acc.items() if c})
        return result

    def conj(self):
        """Conjugate every coefficient (generators treated as real)."""
        return MultiPoly(self.ring, {m: c.conjugate() for m, c in self.terms.items()})

    def truncate(self, names, max_degree):
        """Drop terms whose total degree in ``names`` exceeds ``max_degree``."""
        ids = [self.ring.index(n) for n in names]
        return MultiPoly(
            self.ring,
            {m: c for m, c in self.terms.items() if sum(m[i] for i in ids) <= max_degree},
        )

    def change_ring(self, ring):
        """Re-express over ``ring``; absent generators must not occur."""
        pos = []
        for g in self.ring.gens:
            pos.append(ring.index(g) if g in ring else None)
        out = {}
        n = len(ring.gens)
        for m, c in self.terms.items():
            new = [0] * n
            for j, e in enumerate(m):
                if e:
                    if pos[j] is None:
                        raise ValueError(f"generator {self.ring.gens[j]!r} missing from target ring")
                    new[pos[j]] = e
            out[tuple(new)] = c
        return MultiPoly(ring, out)

    def evaluate(self, values):
        """Numeric value; exact when every value is an int or Fraction."""
        vals = [values.get(g) for g in self.ring.gens]
        total = 0
        for m, c in self.terms.items():
            term = c.to_number()
            for v, e, g in zip(vals, m, self.ring.gens):
                if e:
                    if v is None:
                        raise KeyError(f"no value supplied for {g!r}")
                    term = term * v ** e
            total = total + term
        return total

    def divexact(self, divisor):
        """Quotient if ``divisor`` divides ``self`` exactly, else ``None``.

        With a single divisor the multivariate division algorithm leaves a
        zero remainder precisely when the division is exact.
        """
        divisor = self._lift(divisor)
        if not divisor.terms:
            raise ZeroDivisionError("division by zero polynomial")
        lm, lc = divisor.leading_term()
        inv_lc = _ONE / lc
        rem = dict(self.terms)
        quot = {}
        while rem:
            m = max(rem, key=_grlex_key)
            if any(a < b for a, b in zip(m, lm)):
                return None
            q_m = tuple(a - b for a, b in zip(m, lm))
            q_c = rem[m] * inv_lc
            quot[q_m] = q_c
            for dm, dc in divisor.terms.items():
                t = tuple(a + b for a, b in zip(q_m, dm))
                v = rem.get(t, _ZERO) - q_c * dc
                if v:
                    rem[t] = v
                else:
                    rem.pop(t, None)
        return MultiPoly(self.ring, quot)

    # -- display ---------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(
                (g if e == 1 else f"{g}^{e}") for g, e in zip(self.ring.gens, m) if e
            )
            cs = str(c)
            if not c.is_simple():
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{cs}*{mono}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"MultiPoly({self})"


def differentiate(f, name):
    """Formal partial derivative of a polynomial or rational function."""
    return f.diff(name)


class RationalFn:
    """``num / base**k`` with ``base`` a fixed polynomial.

    The constructor cancels common powers of ``base`` so that ``k`` is
    minimal; equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "k", "base")

    def __init__(self, num, k=0, base=None, *, reduce=True):
        if k < 0:
            raise ValueError("denominator power must be non-negative")
        if k == 0 or not num.terms:
            self.num, self.k, self.base = num, 0, None
            return
        if base is None:
            raise ValueError("positive denominator power requires a base")
        if base.ring != num.ring:
            raise ValueError("numerator and base live in different rings")
        if base.is_constant():
            c = base.constant_value()
            self.num, self.k, self.base = num * (_ONE / c ** k), 0, None
            return
        if reduce:
            while k:
                q = num.divexact(base)
                if q is None:
                    break
                num, k = q, k - 1
        self.num, self.k, self.base = num, k, (base if k else None)

    @classmethod
    def lift(cls, x, ring=None):
        if isinstance(x, RationalFn):
            return x
        if isinstance(x, MultiPoly):
            return cls(x)
        if ring is None:
            raise TypeError("ring required to lift a scalar")
        return cls(ring.const(x))

    @classmethod
    def inverse_power(cls, base, k=1):
        """``1 / base**k``."""
        return cls(base.ring.one, k, base)

    @property
    def ring(self):
        return self.num.ring

    def _common_base(self, other):
        if self.base is None:
            return other.base
        if other.base is None or other.base == self.base:
            return self.base
        raise ValueError("rational functions with different denominator bases cannot be added")

    def _lift(self, other):
        if isinstance(other, RationalFn):
            return other
        if isinstance(other, MultiPoly):
            return RationalFn(other)
        if _is_scalar(other):
            return RationalFn(self.ring.const(other))
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return _rsum([self, other], self.ring)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.k, self.base, reduce=False)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return _rsum([self, -other], self.ring)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return _rsum([other, -self], self.ring)

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        base = self._common_base(other)
        return RationalFn(self.num * other.num, self.k + other.k, base)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("non-negative integer powers only")
        return RationalFn(self.num ** n, self.k * n, self.base)

    def is_zero(self):
        return not self.num.terms

    def __bool__(self):
        return bool(self.num.terms)

    def is_polynomial(self):
        return self.k == 0

    def equals(self, other):
        """Cross-multiplication test ``a.num * B_b^kb == b.num * B_a^ka``."""
        other = self._lift(other)
        lhs = self.num if other.k == 0 else self.num * other.base ** other.k
        rhs = other.num if self.k == 0 else other.num * self.base ** self.k
        return lhs == rhs

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.equals(other)

    def __hash__(self):
        return hash((self.num, self.k, self.base))

    def diff(self, name):
        dn = self.num.diff(name)
        if self.k == 0:
            return RationalFn(dn)
        db = self.base.diff(name)
        num = dn * self.base - self.num * db * self.k
        return RationalFn(num, self.k + 1, self.base)

    def subs(self, mapping):
        num = self.num.subs(mapping)
        if self.k == 0:
            return RationalFn(num)
        return RationalFn(num, self.k, self.base.subs(mapping))

    def conj(self):
        if self.k == 0:
            return RationalFn(self.num.conj())
        return RationalFn(self.num.conj(), self.k, self.base.conj())

    def truncate(self, names, max_degree):
        """Truncate the numerator; ``names`` must not occur in the base."""
        if self.base is not None and any(n in self.base.free_symbols() for n in names):
            raise ValueError("cannot truncate in symbols appearing in the denominator")
        return RationalFn(self.num.truncate(names, max_degree), self.k, self.base)

    def change_ring(self, ring):
        if self.k == 0:
            return RationalFn(self.num.change_ring(ring))
        return RationalFn(self.num.change_ring(ring), self.k, self.base.change_ring(ring))

    def evaluate(self, values):
        v = self.num.evaluate(values)
        if self.k:
            v = v / self.base.evaluate(values) ** self.k
        return v

    def normalized(self):
        return RationalFn(self.num, self.k, self.base)

    def __str__(self):
        if self.k == 0:
            return str(self.num)
        den = f"({self.base})" + (f"^{self.k}" if self.k > 1 else "")
        return f"({self.num})/{den}"

    def __repr__(self):
        return f"RationalFn({self})"


def rational_sum(items):
    """Sum of rational functions sharing a base, reduced once at the end.

    Returns ``None`` when every item is zero (the ring is not known then).
    """
    items = [x for x in items if x.num.terms]
    if not items:
        return None
    base = None
    for x in items:
        if x.base is not None:
            if base is None:
                base = x.base
            elif x.base != base:
                raise ValueError("rational functions with different denominator bases cannot be added")
    kmax = max(x.k for x in items)
    ring = items[0].ring
    acc = ring.zero
    powers = {}
    for x in items:
        shift = kmax - x.k
        if shift:
            if shift not in powers:
                powers[shift] = base ** shift
            acc = acc + x.num * powers[shift]
        else:
            acc = acc + x.num
    return RationalFn(acc, kmax, base)


def _rsum(items, ring):
    out = rational_sum(items)
    return out if out is not None else RationalFn(ring.zero)


def _coerce_coeff(c, ring):
    if isinstance(c, RationalFn):
        return c
    if isinstance(c, MultiPoly):
        return RationalFn(c)
    return RationalFn(ring.const(c))


class DiffOp:
    """Differential operator ``sum_a c_a d^a`` in normal order.

    ``dvars`` names the ring generators that derivatives act on; keys of
    ``terms`` are derivative multi-indices aligned with ``dvars``.
    ``a * b`` composes operators (polynomials and scalars act as
    multiplication operators), so ``p * d`` is ``p d/dp`` while
    ``d * p`` is ``p d/dp + 1``.
    """

    __slots__ = ("ring", "dvars", "terms")

    def __init__(self, ring, dvars, terms):
        self.ring = ring
        self.dvars = tuple(dvars)
        self.terms = {k: v for k, v in terms.items() if v.num.terms}

    # -- factories -------------------------------------------------------
    @classmethod
    def multiplication(cls, ring, dvars, coeff):
        return cls(ring, dvars, {(0,) * len(dvars): _coerce_coeff(coeff, ring)})

    @classmethod
    def partial(cls, ring, dvars, name):
        dvars = tuple(dvars)
        key = tuple(1 if v == name else 0 for v in dvars)
        if not any(key):
            raise KeyError(f"{name!r} not among derivative variables {dvars}")
        return cls(ring, dvars, {key: RationalFn(ring.one)})

    @classmethod
    def zero(cls, ring, dvars):
        return cls(ring, dvars, {})

    @classmethod
    def identity(cls, ring, dvars):
        return cls.multiplication(ring, dvars, 1)

    def _same_space(self, other):
        if self.ring != other.ring or self.dvars != other.dvars:
            raise ValueError("operators act on different variables")

    def _as_op(self, other):
        if isinstance(other, DiffOp):
            self._same_space(other)
            return other
        if isinstance(other, (MultiPoly, RationalFn)) or _is_scalar(other):
            return DiffOp.multiplication(self.ring, self.dvars, other)
        return None

    # -- linear structure --------------------------------------------------
    def __add__(self, other):
        other = self._as_op(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return DiffOp(self.ring, self.dvars, out)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.ring, self.dvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._as_op(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._as_op(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = self._as_op(other)
        if other is None:
            return NotImplemented
        return op_compose(self, other)

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, (MultiPoly, RationalFn)):
            c = _coerce_coeff(other, self.ring)
            return DiffOp(self.ring, self.dvars, {k: c * v for k, v in self.terms.items()})
        return NotImplemented

    def scale(self, c):
        c = GaussianRational.coerce(c)
        return DiffOp(
            self.ring, self.dvars,
            {k: RationalFn(v.num * c, v.k, v.base, reduce=False) for k, v in self.terms.items()},
        )

    # -- predicates ------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            other = self._as_op(other)
            if other is None:
                return NotImplemented
        if self.ring != other.ring or self.dvars != other.dvars:
            return False
        if self.terms.keys() != other.terms.keys():
            return False
        return all(self.terms[k].equals(other.terms[k]) for k in self.terms)

    def __hash__(self):
        return hash((self.ring, self.dvars, frozenset(self.terms)))

    def order(self):
        return max((sum(k) for k in self.terms), default=-1)

    def residual_terms(self):
        """Number of numerator monomials across all coefficients."""
        return sum(len(v.num.terms) for v in self.terms.values())

    def coefficient(self, key=None):
        if key is None:
            key = (0,) * len(self.dvars)
        return self.terms.get(tuple(key), RationalFn(self.ring.zero))

    # -- maps ---------------------------------------------------------------
    def normalize(self):
        return DiffOp(self.ring, self.dvars, {k: v.normalized() for k, v in self.terms.items()})

    def map_coefficients(self, fn):
        return DiffOp(self.ring, self.dvars, {k: fn(v) for k, v in self.terms.items()})

    def subs(self, mapping):
        """Substitute non-derivative generators in every coefficient."""
        bad = set(mapping) & set(self.dvars)
        if bad:
            raise ValueError(f"use reflect() for derivative variables {sorted(bad)}")
        return self.map_coefficients(lambda c: c.subs(mapping))

    def subs_coefficients(self, mapping):
        """Substitute in coefficients only, including derivative variables.

        Unlike a change of variables this leaves the derivatives untouched,
        i.e. it evaluates the coefficient functions on a slice.
        """
        return self.map_coefficients(lambda c: c.subs(mapping))

    def reflect(self, names):
        """Change of variables ``p -> -p`` for each name in ``names``."""
        names = tuple(names)
        mapping = {n: -self.ring.gen(n) for n in names}
        idx = [self.dvars.index(n) for n in names]
        out = {}
        for k, v in self.terms.items():
            sign = -1 if sum(k[i] for i in idx) % 2 else 1
            c = v.subs(mapping)
            out[k] = -c if sign < 0 else c
        return DiffOp(self.ring, self.dvars, out)

    def conj(self):
        """Complex conjugation of the operator (``i -> -i``)."""
        return self.map_coefficients(lambda c: c.conj())

    def truncate(self, names, max_degree):
        return self.map_coefficients(lambda c: c.truncate(names, max_degree))

    def change_ring(self, ring, dvars=None):
        dvars = self.dvars if dvars is None else tuple(dvars)
        pos = [dvars.index(v) if v in dvars else None for v in self.dvars]
        out = {}
        for k, v in self.terms.items():
            new = [0] * len(dvars)
            for j, e in enumerate(k):
                if e:
                    if pos[j] is None:
                        raise ValueError(f"derivative in {self.dvars[j]!r} has no target variable")
                    new[pos[j]] = e
            out[tuple(new)] = v.change_ring(ring)
        return DiffOp(ring, dvars, out)

    def apply(self, f):
        return op_apply(self, f)

    # -- display ---------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=_grlex_key, reverse=True):
            d = "*".join(
                f"d{v}" if e == 1 else f"d{v}^{e}" for v, e in zip(self.dvars, k) if e
            )
            c = f"[{self.terms[k]}]"
            parts.append(f"{c}*{d}" if d else c)
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOp({self})"


def _coeff_derivative(c, dvars, gamma, cache):
    key = gamma
    if key in cache:
        return cache[key]
    if not any(gamma):
        cache[key] = c
        return c
    # peel one derivative off the first nonzero slot
    j = next(i for i, e in enumerate(gamma) if e)
    prev = gamma[:j] + (gamma[j] - 1,) + gamma[j + 1:]
    out = _coeff_derivative(c, dvars, prev, cache).diff(dvars[j])
    cache[key] = out
    return out


def op_compose(a, b):
    """Normal-ordered product ``a b`` (apply ``b`` first).

    Uses the Leibniz rule
    ``d^alpha c = sum_{gamma <= alpha} binom(alpha, gamma) (d^gamma c) d^(alpha-gamma)``.
    """
    a._same_space(b)
    dvars = a.dvars
    acc = {}
    for b_key, b_c in b.terms.items():
        cache = {}
        for a_key, a_c in a.terms.items():
            for gamma in product(*(range(e + 1) for e in a_key)):
                weight = 1
                for e, g in zip(a_key, gamma):
                    weight *= comb(e, g)
                dc = _coeff_derivative(b_c, dvars, gamma, cache)
                if not dc.num.terms:
                    continue
                key = tuple(ea - g + eb for ea, g, eb in zip(a_key, gamma, b_key))
                term = a_c * dc
                if weight != 1:
                    term = RationalFn(term.num * weight, term.k, term.base, reduce=False)
                acc.setdefault(key, []).append(term)
    terms = {}
    for key, items in acc.items():
        s = rational_sum(items)
        if s is not None:
            terms[key] = s
    return DiffOp(a.ring, dvars, terms)


def op_commutator(a, b):
    """``[a, b] = a b - b a`` in normal form."""
    ab = op_compose(a, b)
    ba = op_compose(b, a)
    acc = {}
    for key, v in ab.terms.items():
        acc.setdefault(key, []).append(v)
    for key, v in ba.terms.items():
        acc.setdefault(key, []).append(-v)
    terms = {}
    for key, items in acc.items():
        s = rational_sum(items)
        if s is not None:
            terms[key] = s
    return DiffOp(a.ring, a.dvars, terms)


def op_apply(op, f):
    """Act with ``op`` on a polynomial or rational function."""
    f = f if isinstance(f, RationalFn) else RationalFn.lift(f, op.ring)
    items = []
    cache = {}
    for key, c in op.terms.items():
        df = _coeff_derivative(f, op.dvars, key, cache)
        if df.num.terms:
            items.append(c * df)
    return _rsum(items, op.ring)
