"""Explicit-precision real and complex arithmetic on top of gmpy2 (MPFR/MPC).

Every operation takes its working precision explicitly, either as the ``p``
argument of the helpers below or through a context object obtained from
:func:`context`.  Nothing here touches gmpy2's thread-local default context,
so results are deterministic (MPFR is correctly rounded: same inputs and
precision give bit-identical outputs on every platform) and safe to use from
any number of concurrent workers.

Values are plain ``gmpy2.mpfr`` / ``gmpy2.mpc`` instances; they are immutable
after construction.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpc

from .errors import DomainError, PrecisionRangeError

Real = mpfr
Complex = mpc

MIN_PRECISION = 8

_contexts: dict[int, "gmpy2.context"] = {}


def context(p: int):
    """Return a (cached) round-to-nearest gmpy2 context with precision ``p`` bits.

    The context object is the reified precision parameter: all analytic
    operations in this package go through methods of such a context.
    """
    ctx = _contexts.get(p)
    if ctx is None:
        if not isinstance(p, int) or p < MIN_PRECISION:
            raise DomainError(f"precision must be an integer >= {MIN_PRECISION}, got {p!r}")
        ctx = gmpy2.context(precision=p, allow_complex=True)
        _contexts[p] = ctx
    return ctx


def real(x, p: int) -> mpfr:
    """Convert ``x`` (int, str, float, Fraction, mpfr) to an mpfr at precision ``p``."""
    context(p)
    if isinstance(x, Fraction):
        return context(p).div(mpfr(x.numerator, precision=max(p, x.numerator.bit_length() + 8)),
                              x.denominator)
    return mpfr(x, precision=p)


def cplx(re, im=0, p: int = 53) -> mpc:
    """Build an mpc with both components at precision ``p``."""
    return mpc(real(re, p), real(im, p), precision=(p, p))


def const_pi(p: int) -> mpfr:
    """pi at precision ``p`` (correctly rounded)."""
    if p < 32:
        raise DomainError("const_pi requires precision >= 32")
    return context(p).const_pi()


def exp_real(x, p: int) -> mpfr:
    r = context(p).exp(real(x, p) if not isinstance(x, mpfr) else x)
    _check_finite(r)
    return r


def exp_complex(z, p: int) -> mpc:
    """e**z for complex z at precision ``p``; raises on exponent-range overflow."""
    c = context(p)
    if not isinstance(z, mpc):
        z = cplx(z, 0, p)
    if not c.is_finite(z):
        raise DomainError("exp_complex requires a finite argument")
    r = c.exp(z)
    _check_finite(r)
    return r


def log_real(x, p: int) -> mpfr:
    c = context(p)
    xx = x if isinstance(x, mpfr) else real(x, p)
    if xx <= 0:
        raise DomainError("log_real requires a positive argument")
    return c.log(xx)


def sqrt_real(x, p: int) -> mpfr:
    c = context(p)
    xx = x if isinstance(x, mpfr) else real(x, p)
    if xx < 0:
        raise DomainError("sqrt_real requires a non-negative argument")
    return c.sqrt(xx)


def atan_real(x, p: int) -> mpfr:
    return context(p).atan(x if isinstance(x, mpfr) else real(x, p))


def _check_finite(r):
    vals = (r.real, r.imag) if isinstance(r, mpc) else (r,)
    for v in vals:
        if gmpy2.is_nan(v) or gmpy2.is_infinite(v):
            raise PrecisionRangeError("result exceeded the exponent range")


def to_decimal(x, digits: int) -> str:
    """Render a real value with exactly ``digits`` significant decimal digits."""
    if digits < 1:
        raise DomainError("digits must be >= 1")
    return format(x, f"#.{digits}g")  # '#' keeps trailing zeros


def complex_to_decimal(z, digits: int) -> str:
    """Render ``re+imj`` style decimal string with ``digits`` significant digits."""
    re = to_decimal(z.real, digits)
    im = to_decimal(abs(z.imag), digits)
    sign = "-" if z.imag < 0 else "+"
    return f"{re}{sign}{im}j"


def parse_real(s: str, p: int) -> mpfr:
    """Round-trip partner of :func:`to_decimal`."""
    context(p)
    try:
        return mpfr(s.strip(), precision=p)
    except ValueError as exc:
        raise DomainError(f"cannot parse decimal string {s!r}") from exc
