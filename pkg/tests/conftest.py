import sympy
from hypothesis import HealthCheck, settings

from minlength.symbolic import GaussianRational, MultiPoly, RationalFn

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def to_sympy(x):
    """Independent conversion of exact objects to sympy expressions."""
    if isinstance(x, GaussianRational):
        return sympy.Rational(x.re.numerator, x.re.denominator) + sympy.I * sympy.Rational(
            x.im.numerator, x.im.denominator
        )
    if isinstance(x, MultiPoly):
        syms = sympy.symbols(x.ring.gens)
        expr = sympy.Integer(0)
        for mono, c in x.terms.items():
            term = to_sympy(c)
            for s, e in zip(syms, mono):
                term *= s ** e
            expr += term
        return expr
    if isinstance(x, RationalFn):
        num = to_sympy(x.num)
        if x.k:
            return num / to_sympy(x.base) ** x.k
        return num
    raise TypeError(type(x))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
