"""Exact arithmetic of real quadratic irrationalities and indefinite binary
quadratic forms: continued fractions, Pell units, PSL2(Z)/PGL2(Z) equivalence
via reduced cycles, and the narrow class group under composition.

A quadratic irrationality is stored as the integer form triple (a, b, c) whose
distinguished root is w = (-b + sqrt(D)) / (2a) with D = b^2 - 4ac > 0 and
non-square.  All integer arithmetic is exact and unbounded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from . import numerics
from .errors import DomainError, ParseError

_SQUARE_MOD_64 = {(i * i) % 64 for i in range(32)}


def is_square(n: int) -> bool:
    if n < 0:
        return False
    if n % 64 not in _SQUARE_MOD_64:
        return False
    r = math.isqrt(n)
    return r * r == n


def is_discriminant(D: int) -> bool:
    """True for a valid (positive, non-square) form discriminant."""
    return D > 0 and D % 4 in (0, 1) and not is_square(D)


def _check_discriminant(D: int):
    if not isinstance(D, int) or not is_discriminant(D):
        raise DomainError(f"{D!r} is not a positive non-square discriminant = 0,1 mod 4")


@dataclass(frozen=True)
class Mat2:
    """Integer 2x2 matrix acting by linear fractional transformations."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Mat2":
        det = self.det
        if det not in (1, -1):
            raise DomainError("only unimodular matrices can be inverted exactly")
        return Mat2(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def moebius(self, tau, ctx):
        """Apply to a complex point: (a*tau + b) / (c*tau + d)."""
        num = ctx.add(ctx.mul(tau, self.a), self.b)
        den = ctx.add(ctx.mul(tau, self.c), self.d)
        return ctx.div(num, den)


class QuadIrr:
    """A real quadratic irrationality, the +sqrt(D) root of a x^2 + b x + c."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a: int, b: int, c: int):
        if a == 0:
            raise DomainError("leading coefficient must be nonzero")
        D = b * b - 4 * a * c
        if D <= 0 or is_square(D):
            raise DomainError(f"discriminant {D} is not positive and non-square")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def __setattr__(self, *_):
        raise AttributeError("QuadIrr is immutable")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def form(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    @property
    def delta(self) -> int:
        """Sign of w - w', i.e. the sign of the leading coefficient."""
        return 1 if self.a > 0 else -1

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(abs(self.a), abs(self.b)), abs(self.c)) == 1

    def conjugate(self) -> "QuadIrr":
        """The -sqrt(D) root w' (same quadratic, other root)."""
        return QuadIrr(-self.a, -self.b, -self.c)

    def __neg__(self) -> "QuadIrr":
        return QuadIrr(-self.a, self.b, -self.c)

    def neg_conjugate(self) -> "QuadIrr":
        """-w', the root defining the inverse narrow class."""
        return QuadIrr(self.a, -self.b, self.c)

    def trace_norm(self) -> tuple[Fraction, Fraction]:
        """(w + w', w * w') as exact rationals."""
        return Fraction(-self.b, self.a), Fraction(self.c, self.a)

    def value(self, p: int):
        """Numeric value of w at precision p."""
        c = numerics.context(p)
        sD = c.sqrt(numerics.real(self.disc, p))
        return c.div(c.add(sD, -self.b), 2 * self.a)

    def conj_value(self, p: int):
        c = numerics.context(p)
        sD = c.sqrt(numerics.real(self.disc, p))
        return c.div(c.sub(numerics.real(-self.b, p), sD), 2 * self.a)

    def __float__(self) -> float:
        return (-self.b + math.sqrt(self.disc)) / (2 * self.a)

    def transform(self, g: Mat2) -> "QuadIrr":
        """Image under the fractional-linear action of a determinant +-1 matrix."""
        det = g.det
        if det not in (1, -1):
            raise DomainError("transform requires det = +-1")
        a, b, c = self.a, self.b, self.c
        p, q, r, s = g.a, g.b, g.c, g.d
        # substitute the adjugate: Q'(x, y) = Q(s x - q y, -r x + p y)
        a2 = a * s * s - b * s * r + c * r * r
        b2 = -2 * a * q * s + b * (p * s + q * r) - 2 * c * p * r
        c2 = a * q * q - b * p * q + c * p * p
        if det == -1:
            a2, b2, c2 = -a2, -b2, -c2
        return QuadIrr(a2, b2, c2)

    def __eq__(self, other):
        return isinstance(other, QuadIrr) and self.form == other.form

    def __hash__(self):
        return hash(self.form)

    def __repr__(self):
        return f"QuadIrr({self.a}, {self.b}, {self.c})"

    def __str__(self):
        return surd_str(self)


def make(a: int, b: int, c: int) -> QuadIrr:
    """Normalized QuadIrr: content divided out, discriminant recomputed."""
    if a == 0:
        raise DomainError("leading coefficient must be nonzero")
    g = math.gcd(math.gcd(abs(a), abs(b)), abs(c))
    if g > 1:
        a, b, c = a // g, b // g, c // g
    return QuadIrr(a, b, c)


def surd_str(w: QuadIrr) -> str:
    """Render w as (p + r*sqrt(d))/q with d squarefree-ish (square content pulled out)."""
    D = w.disc
    s = 1
    d = D
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        f += 1
    p, q = -w.b, 2 * w.a
    g = math.gcd(math.gcd(abs(p), s), abs(q))
    p, r, q = p // g, s // g, q // g
    if q < 0:
        # keep the +sqrt branch explicit
        p, r, q = -p, -r, -q
        rs = f"-{abs(r)}*sqrt({d})" if abs(r) != 1 else f"-sqrt({d})"
    else:
        rs = f"{r}*sqrt({d})" if r != 1 else f"sqrt({d})"
    if p == 0:
        core = rs
    else:
        core = f"{p}+{rs}" if not rs.startswith("-") else f"{p}{rs}"
    return core if q == 1 else f"({core})/{q}"


# ---------------------------------------------------------------------------
# parsing

_SURD_RE = re.compile(
    r"""^\(?\s*
        (?:(?P<p>[+-]?\d+)\s*(?=[+-]))?           # optional rational part
        \s*(?P<sgn>[+-]?)\s*
        (?:(?P<r>\d+)\s*\*?\s*)?                  # optional coefficient
        sqrt\(\s*(?P<d>\d+)\s*\)
        \s*\)?\s*
        (?:/\s*(?P<q>-?\d+))?\s*$""",
    re.VERBOSE,
)


def parse_surd(text: str) -> QuadIrr:
    """Parse "(p+r*sqrt(d))/q" (r, /q optional) into a normalized QuadIrr."""
    m = _SURD_RE.match(text.strip())
    if not m:
        raise ParseError(f"cannot parse quadratic surd {text!r}")
    p = int(m.group("p") or 0)
    r = int(m.group("r") or 1)
    if m.group("sgn") == "-":
        r = -r
    d = int(m.group("d"))
    q = int(m.group("q") or 1)
    if r == 0 or q == 0 or d <= 0 or is_square(d):
        raise ParseError(f"{text!r} does not denote a real quadratic irrationality")
    n = r * r * d  # w = (p + sign(r) sqrt(n)) / q
    if r < 0:
        p, q = -p, -q
    a, b, c = q * q, -2 * p * q, p * p - n
    if q < 0:
        a, b, c = -a, -b, -c
    return make(a, b, c)


def parse_cf(text: str) -> list[int]:
    """Parse "[b1,b2,...]" into the list of partial quotients."""
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise ParseError(f"continued fraction must look like [b1,b2,...], got {text!r}")
    body = t[1:-1].strip()
    if not body:
        raise ParseError("empty continued-fraction period")
    try:
        period = [int(x) for x in body.replace(";", ",").split(",")]
    except ValueError as exc:
        raise ParseError(f"bad continued-fraction entry in {text!r}") from exc
    return period


def parse_form(text: str) -> QuadIrr:
    """Parse "a,b,c" into a normalized QuadIrr."""
    try:
        a, b, c = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise ParseError(f"form must be three comma-separated integers, got {text!r}") from exc
    try:
        return make(a, b, c)
    except DomainError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# continued fractions

def cf_value(period: list[int]) -> QuadIrr:
    """The purely periodic continued fraction [b1,...,bn] as a QuadIrr."""
    if not period:
        raise DomainError("period must be nonempty")
    if any((not isinstance(b, int)) or b < 1 for b in period):
        raise DomainError("purely periodic convention requires all partial quotients >= 1")
    p1, p0, q1, q0 = 1, 0, 0, 1  # running convergent matrix [[p1,p0],[q1,q0]]
    for b in period:
        p1, p0 = b * p1 + p0, p1
        q1, q0 = b * q1 + q0, q1
    # w = (p1 w + p0) / (q1 w + q0)
    return make(q1, q0 - p1, -p0)


def cf_expand(w: QuadIrr, max_steps: int = 100000) -> tuple[list[int], list[int]]:
    """Ordinary continued fraction of w with minimal period.

    Returns (preperiod, period); the expansion is exact (integer state).
    """
    D = w.disc
    s = math.isqrt(D)
    # x = (P + sqrt(D)) / Q with Q | (D - P^2)
    P, Q = -w.b, 2 * w.a
    seen: dict[tuple[int, int], int] = {}
    quotients: list[int] = []
    for step in range(max_steps):
        key = (P, Q)
        if key in seen:
            start = seen[key]
            return quotients[:start], quotients[start:]
        seen[key] = step
        if Q > 0:
            a = (P + s) // Q
        else:
            a = -((P + s) // (-Q)) - 1  # floor for irrational numerator, negative Q
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    raise DomainError("continued fraction did not become periodic (corrupt input?)")


# ---------------------------------------------------------------------------
# reduced forms, cycles, classes

def is_reduced(form: tuple[int, int, int]) -> bool:
    """Classical reduction inequalities 0 < b < sqrt(D), sqrt(D)-b < 2|a| < sqrt(D)+b."""
    a, b, c = form
    D = b * b - 4 * a * c
    if b <= 0 or b * b >= D:
        return False
    t = 2 * abs(a)
    if (t + b) ** 2 <= D:
        return False
    if t > b and (t - b) ** 2 >= D:
        return False
    return True


def rho_step(form: tuple[int, int, int]) -> tuple[int, int, int]:
    """One reduction (river) step; iterating cycles through the reduced forms."""
    a, b, c = form
    D = b * b - 4 * a * c
    ac = abs(c)
    if ac * ac < D:
        t = math.isqrt(D)
        b2 = t - ((t + b) % (2 * ac))
    else:
        b2 = (-b) % (2 * ac)
        if b2 > ac:
            b2 -= 2 * ac
    c2, rem = divmod(b2 * b2 - D, 4 * c)
    if rem:
        raise DomainError(f"form {form} has inconsistent discriminant data")
    return (c, b2, c2)


def reduce_form(form: tuple[int, int, int], max_steps: int = 100000) -> tuple[int, int, int]:
    f = form
    for _ in range(max_steps):
        if is_reduced(f):
            return f
        f = rho_step(f)
    raise DomainError(f"reduction of {form} did not terminate")


def form_cycle(form: tuple[int, int, int]) -> tuple[tuple[int, int, int], ...]:
    """The cycle of reduced forms properly equivalent to ``form``, canonically rotated."""
    f0 = reduce_form(form)
    cycle = [f0]
    f = rho_step(f0)
    while f != f0:
        cycle.append(f)
        f = rho_step(f)
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def principal_form(D: int) -> tuple[int, int, int]:
    _check_discriminant(D)
    b = D % 2
    return (1, b, (b * b - D) // 4)


@dataclass(frozen=True)
class FormClass:
    """A narrow (proper) equivalence class: the cycle of its reduced forms."""

    cycle: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_form(cls, form) -> "FormClass":
        a, b, c = form
        if math.gcd(math.gcd(abs(a), abs(b)), abs(c)) != 1:
            raise DomainError(f"form {form} is not primitive")
        return cls(form_cycle(form))

    @classmethod
    def of(cls, w: QuadIrr) -> "FormClass":
        return cls.from_form(w.form)

    @property
    def disc(self) -> int:
        a, b, c = self.cycle[0]
        return b * b - 4 * a * c

    @property
    def representative(self) -> QuadIrr:
        return QuadIrr(*self.cycle[0])

    def is_principal(self) -> bool:
        return principal_reduced(self.disc) in self.cycle

    def inverse(self) -> "FormClass":
        a, b, c = self.cycle[0]
        return FormClass(form_cycle((a, -b, c)))

    def __contains__(self, form) -> bool:
        return tuple(form) in self.cycle

    def __repr__(self):
        return f"FormClass(D={self.disc}, rep={self.cycle[0]}, len={len(self.cycle)})"


def principal_reduced(D: int) -> tuple[int, int, int]:
    return reduce_form(principal_form(D))


def narrow_class_reps(D: int) -> list[FormClass]:
    """All narrow classes of primitive forms of discriminant D (h+ = length).

    Enumerates every reduced form and partitions them into rho-cycles; the
    result is sorted by the smallest form in each cycle, so it is deterministic.
    """
    _check_discriminant(D)
    s = math.isqrt(D)
    forms = set()
    b = 2 - (D % 2)  # smallest positive b = D (mod 2)
    while b <= s:
        P = (D - b * b) // 4  # = |a| * |c|
        d = 1
        while d * d <= P:
            if P % d == 0:
                for aa in {d, P // d}:
                    # reduced iff sqrt(D) - b < 2|a| < sqrt(D) + b
                    t = 2 * aa
                    if (t + b) ** 2 > D and (t <= b or (t - b) ** 2 < D):
                        cc = P // aa
                        if math.gcd(math.gcd(aa, b), cc) == 1:
                            forms.add((aa, b, -cc))
                            forms.add((-aa, b, cc))
            d += 1
        b += 2
    classes = []
    remaining = set(forms)
    for f in sorted(forms):
        if f not in remaining:
            continue
        cyc = form_cycle(f)
        remaining.difference_update(cyc)
        classes.append(FormClass(cyc))
    classes.sort(key=lambda cl: cl.cycle[0])
    return classes


def wide_class_count(classes: list[FormClass]) -> int:
    """Number of PGL2(Z) classes: orbits of the narrow classes under w -> -w."""
    seen = set()
    count = 0
    for cl in classes:
        if cl.cycle in seen:
            continue
        count += 1
        a, b, c = cl.cycle[0]
        mirror = form_cycle((-a, b, -c))
        seen.add(cl.cycle)
        seen.add(mirror)
    return count


# ---------------------------------------------------------------------------
# Pell units and automorphs

@dataclass(frozen=True)
class FundamentalUnit:
    """Pell data of the order O_D: minimal t,u > 0 with t^2 - D u^2 = 4.

    ``norm_eps`` is -1 when t^2 - D u^2 = -4 is solvable (then the norm-one
    generator eps1 = (t + u sqrt(D))/2 is the square of the fundamental unit).
    """

    D: int
    t: int
    u: int
    norm_eps: int

    def eps1_value(self, p: int):
        c = numerics.context(p)
        sD = c.sqrt(numerics.real(self.D, p))
        return c.div(c.add(c.mul(sD, self.u), self.t), 2)

    def log_eps(self, p: int):
        """log eps1 > 0 at precision p."""
        return numerics.context(p).log(self.eps1_value(p))

    def log_eps_float(self) -> float:
        # t + u sqrt(D) can overflow a double; go through mpfr
        return float(self.log_eps(64))


_pell_cache: dict[int, FundamentalUnit] = {}


def pell_fundamental(D: int) -> FundamentalUnit:
    """Fundamental Pell data for discriminant D via the principal reduced cycle.

    Going once around the cycle multiplies the step matrices [[0,-1],[1,m_k]]
    into the fundamental automorph, whose trace is t; this is exact and works
    for non-maximal orders as well.
    """
    unit = _pell_cache.get(D)
    if unit is not None:
        return unit
    _check_discriminant(D)
    f0 = principal_reduced(D)
    a0 = f0[0]
    # product of step matrices around the cycle
    g = Mat2.identity()
    f = f0
    has_minus = False
    while True:
        nxt = rho_step(f)
        m = (f[1] + nxt[1]) // (2 * f[2])
        g = g * Mat2(0, -1, 1, m)
        if nxt == (-f0[0], f0[1], -f0[2]):
            has_minus = True
        f = nxt
        if f == f0:
            break
    if g.a + g.d < 0:
        g = Mat2(-g.a, -g.b, -g.c, -g.d)
    t = g.a + g.d
    u, rem = divmod(abs(g.c), abs(a0))
    if rem or t * t - D * u * u != 4:
        raise DomainError(f"automorph of the principal cycle is inconsistent for D={D}")
    unit = FundamentalUnit(D, t, u, -1 if has_minus else 1)
    _pell_cache[D] = unit
    return unit


def automorph(w: QuadIrr) -> Mat2:
    """The generator of the proper stabilizer of w with a - c*w = eps1 (> 1)."""
    a, b, c = w.form
    unit = pell_fundamental(w.disc)
    t, u = unit.t, unit.u
    # [[ (t+bu)/2, cu ], [ -au, (t-bu)/2 ]] fixes w, det = (t^2 - D u^2)/4 = 1
    return Mat2((t + b * u) // 2, c * u, -a * u, (t - b * u) // 2)


# ---------------------------------------------------------------------------
# equivalence

def is_equivalent(w1: QuadIrr, w2: QuadIrr, proper: bool = True) -> bool:
    """PSL2(Z) (proper) or PGL2(Z) (wide) equivalence, by reduced-cycle comparison."""
    f1 = make(*w1.form)
    f2 = make(*w2.form)
    if f1.disc != f2.disc:
        return False
    cyc = form_cycle(f1.form)
    target = form_cycle(f2.form)[0]
    if target in cyc:
        return True
    if not proper:
        a, b, c = f1.form
        if target in form_cycle((-a, b, -c)):
            return True
    return False


# ---------------------------------------------------------------------------
# composition (Gauss/Dirichlet), via exact ideal multiplication

def _ideal_product_basis(f1, f2, D):
    """HNF basis of the product of the ideals of two positive-a forms.

    Elements are written (x + y sqrt(D))/2 as integer pairs (x, y); returns
    (m, x0, e) with lattice basis (m, 0), (x0, e).
    """
    a1, b1, _ = f1
    a2, b2, _ = f2
    s = (b1 + b2) // 2
    gens = [
        (2 * a1 * a2, 0),
        (-a1 * b2, a1),
        (-a2 * b1, a2),
        ((b1 * b2 + D) // 2, -s),
    ]
    # reduce to a two-vector HNF by gcd elimination on the y-components
    x0, e = 0, 0
    xs = []
    for (x, y) in gens:
        if y == 0:
            xs.append(x)
            continue
        if e == 0:
            x0, e = x, y
            continue
        g, u, v = _xgcd(e, y)
        # unimodular row operation: keep y = g, push a y = 0 leftover
        x0, e, leftover = u * x0 + v * x, g, (e // g) * x - (y // g) * x0
        xs.append(leftover)
    if e < 0:
        x0, e = -x0, -e
    m = 0
    for x in xs:
        m = math.gcd(m, abs(x))
    return m, x0, e


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def compose(c1: FormClass, c2: FormClass) -> FormClass:
    """Product of two narrow classes (Gauss composition)."""
    D = c1.disc
    if c2.disc != D:
        raise DomainError("composition requires equal discriminants")
    f1 = next(f for f in c1.cycle if f[0] > 0)
    f2 = next(f for f in c2.cycle if f[0] > 0)
    for f in (f1, f2):
        if math.gcd(math.gcd(abs(f[0]), abs(f[1])), abs(f[2])) != 1:
            raise DomainError(f"form {f} is not primitive")
    m, x0, e = _ideal_product_basis(f1, f2, D)
    if e == 0 or m == 0 or m % e or x0 % e:
        raise DomainError("ideal product did not produce a valid sublattice")
    A = m // (2 * e)
    if A * e * e != f1[0] * f2[0]:
        raise DomainError("ideal product norm mismatch")
    B = (-x0 // e) % (2 * A)  # least non-negative residue
    num = B * B - D
    if num % (4 * A):
        raise DomainError("composed form is not integral")
    return FormClass(form_cycle((A, B, num // (4 * A))))


def class_order(cl: FormClass, cap: int = 128) -> int:
    """Order of a class in Cl+(D) (raises if it exceeds ``cap``)."""
    if cl.is_principal():
        return 1
    acc = cl
    for k in range(2, cap + 1):
        acc = compose(acc, cl)
        if acc.is_principal():
            return k
    raise DomainError(f"class order exceeds {cap}")
