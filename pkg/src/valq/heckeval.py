"""Values of the modular invariant at real quadratic irrationalities.

For a real quadratic w with conjugate w' and norm-one fundamental unit
eps (log eps = L), the function u -> j((w - d(w) w' i e^u)/(1 - d(w) i e^u))
is real-analytic and 2L-periodic; its mean over one period is the "value"
assigned to w (the constant term of the hyperbolic Fourier expansion), and
the other Fourier coefficients are weighted means of the same node data.

The quadrature is the periodic trapezoid rule on a uniform half-open grid,
doubled until two successive levels agree.  For a periodic integrand that is
analytic in a strip this converges like exp(-pi^2 M / (2L)), so doubling is
only paid for a handful of rounds.

Working precision: the integrand reaches magnitude ~ exp(2*pi*H) where
H = sqrt(D)/(2*min|a|) over the reduced cycle is the top height of the closed
geodesic, and the mean comes out O(1), so that many bits cancel in the sum.
The guard therefore budgets for 2*pi*H/ln2 cancellation bits plus log2(eps)
bits of Moebius-entry growth plus a fixed safety margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpc, mpfr

from . import numerics
from .errors import ConvergenceError, DomainError, PrecisionRangeError
from .modular import _j_eval_core
from .quadratic import FormClass, FundamentalUnit, QuadIrr, form_cycle, make, narrow_class_reps, pell_fundamental

_LN2 = math.log(2)
_PI2 = math.pi * math.pi

DEFAULT_MAX_DOUBLINGS = 24


@dataclass(frozen=True)
class GeodesicContext:
    """Everything needed to sample the closed geodesic of one irrationality."""

    form: tuple[int, int, int]
    disc: int
    delta: int
    unit: FundamentalUnit
    p_target: int
    guard_bits: int
    p_work: int
    hmax: float
    w: mpfr
    w_conj: mpfr
    log_eps: mpfr

    @property
    def ctx(self):
        return numerics.context(self.p_work)


def prepare(w: QuadIrr, p_target: int, n: int = 0) -> GeodesicContext:
    """Build the evaluation context for w at a target precision of 2^-p_target."""
    if p_target < 8:
        raise DomainError("p_target must be at least 8 bits")
    w = make(*w.form)
    D = w.disc
    unit = pell_fundamental(D)
    log_eps_f = unit.log_eps_float()
    amin = min(abs(f[0]) for f in form_cycle(w.form))
    hmax = math.sqrt(D) / (2 * amin)
    guard = math.ceil(2 * math.pi * hmax / _LN2) + math.ceil(log_eps_f / _LN2) + 64
    if n > 0:
        # the Fourier normalization multiplies by exp(pi^2 n / (2L))
        guard += math.ceil(_PI2 * n / (2 * log_eps_f * _LN2))
    p_work = p_target + guard
    c = numerics.context(p_work)
    sD = c.sqrt(numerics.real(D, p_work))
    wv = c.div(c.add(sD, -w.b), 2 * w.a)
    wc = c.div(c.sub(numerics.real(-w.b, p_work), sD), 2 * w.a)
    return GeodesicContext(
        form=w.form,
        disc=D,
        delta=w.delta,
        unit=unit,
        p_target=p_target,
        guard_bits=guard,
        p_work=p_work,
        hmax=hmax,
        w=wv,
        w_conj=wc,
        log_eps=unit.log_eps(p_work),
    )


def geodesic_point(gc: GeodesicContext, u) -> mpc:
    """Point on the upper half-plane geodesic joining w' and w, at parameter u.

    u = 0 gives the apex (center + i*radius); u -> +-infinity approaches the
    endpoints.  Always has positive imaginary part.
    """
    c = gc.ctx
    if not isinstance(u, mpfr):
        u = numerics.real(u, gc.p_work)
    # real/imag parts of (w - d w' i e^u) / (1 - d i e^u), denominator cleared
    eu = c.exp(u)
    e2u = c.square(eu)
    den = c.add(1, e2u)
    re = c.div(c.add(gc.w, c.mul(gc.w_conj, e2u)), den)
    im = c.div(c.mul(c.mul(gc.delta, c.sub(gc.w, gc.w_conj)), eu), den)
    return mpc(re, im, precision=(gc.p_work, gc.p_work))


@dataclass(frozen=True)
class ValResult:
    """One converged quadrature: the value, and how it was obtained."""

    value: mpc
    n: int
    nodes_used: int
    est_error: mpfr
    representative: tuple[int, int, int]
    refinements: tuple[tuple[int, mpfr], ...]


def fourier_coeff(w: QuadIrr, n: int, p_target: int, *,
                  m0: int | None = None,
                  max_doublings: int = DEFAULT_MAX_DOUBLINGS) -> ValResult:
    """Hyperbolic Fourier coefficient a_n(w) to absolute error < 2^-p_target.

    n = 0 is the value itself.  For n != 0 the coefficient is normalized to
    the expansion in the unshifted variable (the quadrature line sits at
    imaginary part pi/2, so the weighted mean picks up the constant factor
    exp(pi^2 n / (2 log eps)), which is multiplied back in).
    """
    gc = prepare(w, p_target, n)
    return _quadrature(gc, n, m0=m0, max_doublings=max_doublings)


def val(w: QuadIrr, p_target: int, *,
        m0: int | None = None,
        max_doublings: int = DEFAULT_MAX_DOUBLINGS) -> ValResult:
    """The value of j at w: the mean of j over the closed geodesic of w."""
    return fourier_coeff(w, 0, p_target, m0=m0, max_doublings=max_doublings)


def _initial_nodes(gc: GeodesicContext, n: int) -> int:
    log_eps_f = float(gc.log_eps)
    m = max(64, 4 * math.ceil(log_eps_f * gc.p_target * _LN2 / _PI2))
    if n:
        m = max(m, 8 * (abs(n) + 1))
    return m


def _quadrature(gc: GeodesicContext, n: int, *, m0, max_doublings) -> ValResult:
    c = gc.ctx
    p = gc.p_work
    L = gc.log_eps
    warm = [None]  # reduction matrix carried between neighboring nodes
    dwp = c.mul(gc.delta, c.sub(gc.w, gc.w_conj))

    def node_value(eu: mpfr) -> mpc:
        # geodesic point for z = i e^u, with e^u supplied by the caller
        e2u = c.square(eu)
        den = c.add(1, e2u)
        tau = mpc(c.div(c.add(gc.w, c.mul(gc.w_conj, e2u)), den),
                  c.div(c.mul(dwp, eu), den), precision=(p, p))
        v, warm[0] = _j_eval_core(tau, p, warm[0])
        return v

    scale = None
    if n:
        # exp(pi^2 n / (2L)): constant phase normalization onto the Im u = pi/2 line
        s = c.exp(c.div(c.mul(c.square(c.const_pi()), n), c.mul(2, L)))
        if not c.is_finite(s):
            raise PrecisionRangeError("Fourier normalization factor overflowed")
        scale = s

    M = m0 if m0 is not None else _initial_nodes(gc, n)
    tol = c.exp2(-(gc.p_target + 2))
    # e^(u_k) walks the grid multiplicatively: u_k = -L + 2Lk/M
    eu_lo = c.exp(c.minus(L))
    ratio = c.exp(c.div(c.mul_2exp(L, 1), M))
    vals: list[mpc] = []
    eu = eu_lo
    for _ in range(M):
        vals.append(node_value(eu))
        eu = c.mul(eu, ratio)
    prev = None
    history: list[tuple[int, mpfr]] = []
    c64 = numerics.context(64)
    for _ in range(max_doublings + 1):
        if n == 0:
            re_parts = [v.real for v in vals]
            im_parts = [v.imag for v in vals]
        else:
            re_parts = []
            im_parts = []
            step = c.exp(c.mul(c.div(mpc(0, c.const_pi(), precision=(p, p)), M), -2 * n))
            wgt = mpc(numerics.real(-1 if n % 2 else 1, p), precision=(p, p))
            for v in vals:
                vw = c.mul(v, wgt)
                re_parts.append(vw.real)
                im_parts.append(vw.imag)
                wgt = c.mul(wgt, step)
        mean = c.div(mpc(c.fsum(re_parts), c.fsum(im_parts), precision=(p, p)), M)
        if scale is not None:
            mean = c.mul(mean, scale)
        if prev is not None:
            est = c.abs(c.sub(mean, prev))
            history.append((M, c64.plus(est)))
            if est < tol:
                cp = numerics.context(gc.p_target + 16)
                return ValResult(
                    value=cp.plus(mean),
                    n=n,
                    nodes_used=M,
                    est_error=c64.plus(est),
                    representative=gc.form,
                    refinements=tuple(history),
                )
        prev = mean
        M *= 2
        # interleave: new odd nodes sit midway, stepping by the old ratio
        half = c.sqrt(ratio)
        grown = [None] * M
        grown[0::2] = vals
        eu = c.mul(eu_lo, half)
        for k in range(1, M, 2):
            grown[k] = node_value(eu)
            eu = c.mul(eu, ratio)
        vals = grown
        ratio = half
    raise ConvergenceError(
        f"quadrature did not reach 2^-{gc.p_target} after {max_doublings} doublings",
        nodes_used=M // 2,
    )


def val_classes(D: int, p_target: int) -> dict[FormClass, mpc]:
    """val at one representative per narrow class of discriminant D."""
    out: dict[FormClass, mpc] = {}
    for cl in narrow_class_reps(D):
        out[cl] = val(cl.representative, p_target).value
    return out
