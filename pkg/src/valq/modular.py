"""The classical elliptic modular invariant j: exact q-expansion coefficients
and rigorous evaluation anywhere in the upper half-plane.

Evaluation reduces the argument into the standard fundamental domain (so that
|q| <= exp(-pi*sqrt(3)) ~ 0.00433) and sums the integer q-series with an
explicit tail bound from the coefficient growth c(n) <= exp(4*pi*sqrt(n)).
"""

from __future__ import annotations

import math
import threading

from gmpy2 import mpc

from . import numerics
from .errors import DomainError
from .quadratic import Mat2

_LN2 = math.log(2)
_FOUR_PI = 4 * math.pi

# c(-1), c(0), c(1), ...; grown on demand, read-only once published
_coeffs: list[int] = []
_coeff_lock = threading.Lock()


def _series_mul(A: list[int], B: list[int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for i, ai in enumerate(A):
        if ai == 0:
            continue
        if i > n:
            break
        top = min(len(B), n + 1 - i)
        for j in range(top):
            bj = B[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _compute_coeffs(N: int) -> list[int]:
    """c(-1..N) of j = E4^3 / Delta by exact power-series arithmetic."""
    n = N + 1  # truncation order in q for the weight-0 series shifted by q
    sigma3 = [0] * (n + 1)
    for d in range(1, n + 1):
        d3 = d * d * d
        for k in range(d, n + 1, d):
            sigma3[k] += d3
    e4 = [1] + [240 * sigma3[k] for k in range(1, n + 1)]
    e4_cubed = _series_mul(_series_mul(e4, e4, n), e4, n)
    # Delta = q * prod(1-q^k)^24; pentagonal-number expansion of the product
    eta = [0] * (n + 1)
    eta[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 <= n:
        s = -1 if k % 2 else 1
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        eta[g1] += s
        if g2 <= n:
            eta[g2] += s
        k += 1
    pw = [1]
    base = eta
    e = 24
    while e:
        if e & 1:
            pw = _series_mul(pw, base, n)
        e >>= 1
        if e:
            base = _series_mul(base, base, n)
    inv = [0] * (n + 1)  # 1 / (Delta/q)
    inv[0] = 1
    for m in range(1, n + 1):
        acc = 0
        for k in range(1, m + 1):
            if pw[k]:
                acc += pw[k] * inv[m - k]
        inv[m] = -acc
    return _series_mul(e4_cubed, inv, n)


def j_coefficients(N: int) -> tuple[int, ...]:
    """Exact integer coefficients c(-1), c(0), ..., c(N) of the q-expansion."""
    if N < 0:
        raise DomainError("coefficient count must be >= 0")
    return tuple(_coeff_table(N)[: N + 2])


def _coeff_table(N: int) -> list[int]:
    global _coeffs
    if len(_coeffs) < N + 2:
        with _coeff_lock:
            if len(_coeffs) < N + 2:
                _coeffs = _compute_coeffs(max(N, 2 * len(_coeffs), 64))
    return _coeffs


def reduce_to_fd(tau, p: int, gamma0: Mat2 | None = None) -> tuple[mpc, Mat2]:
    """Reduce tau into the standard fundamental domain.

    Returns (gamma*tau, gamma) with |Re| <= 1/2 + tol and |tau| >= 1 - tol,
    tol = 2^(-p/2); ties go to the Re = -1/2 side and the Re <= 0 half of the
    unit arc, purely for determinism.  ``gamma0`` warm-starts the walk (useful
    when reducing a slowly moving sequence of points).
    """
    c = numerics.context(p)
    if not isinstance(tau, mpc):
        tau = numerics.cplx(tau, 0, p)
    if not (tau.imag > 0):
        raise DomainError("reduction requires Im(tau) > 0")
    tol = c.exp2(-(p // 2))
    # form the threshold at full precision: 1 - 2*tol at the default context
    # would round back to 1.0 and points on the boundary circle would cycle
    inner = c.sub(numerics.real(1, p), c.mul_2exp(tol, 1))
    g = Mat2.identity()
    if gamma0 is not None and gamma0.det == 1:
        num = c.add(c.mul(tau, gamma0.a), gamma0.b)
        den = c.add(c.mul(tau, gamma0.c), gamma0.d)
        cand = c.div(num, den)
        if cand.imag > 0:
            tau, g = cand, gamma0
    for _ in range(8 * p + 64):
        n = int(c.rint(tau.real))
        if n:
            tau = c.sub(tau, n)
            g = Mat2(1, -n, 0, 1) * g
        if c.norm(tau) < inner:
            tau = c.div(-1, tau)
            g = Mat2(0, -1, 1, 0) * g
        else:
            break
    else:
        raise DomainError("fundamental-domain reduction did not terminate")
    if abs(c.sub(tau.real, 0.5)) <= tol:
        tau = c.sub(tau, 1)
        g = Mat2(1, -1, 0, 1) * g
    if abs(c.sub(c.norm(tau), 1)) <= 4 * tol and tau.real > tol:
        tau = c.div(-1, tau)
        g = Mat2(0, -1, 1, 0) * g
    return tau, g


def series_terms_needed(log_abs_q: float, p: int) -> int:
    """Smallest N with exp(4*pi*sqrt(N)) * |q|^N < 2^(-p-4)."""
    if log_abs_q >= -math.pi * math.sqrt(3) * 0.999:
        raise DomainError("series evaluation requires a reduced argument")
    target = -(p + 4) * _LN2
    # solve lq*x^2 + 4*pi*x - target = 0 for x = sqrt(N), then fix up
    disc = 16 * math.pi * math.pi + 4 * log_abs_q * target
    if disc < 0:
        N = 1
    else:
        x = (-_FOUR_PI - math.sqrt(disc)) / (2 * log_abs_q)
        N = max(1, int(x * x))
    while _FOUR_PI * math.sqrt(N) + N * log_abs_q >= target:
        N += 1
    while N > 1 and _FOUR_PI * math.sqrt(N - 1) + (N - 1) * log_abs_q < target:
        N -= 1
    return N


# mpfr images of the integer coefficients, one table per working precision
_mpfr_tables: dict[int, list] = {}


def _mpfr_coeffs(p: int, N: int) -> list:
    tab = _mpfr_tables.get(p)
    if tab is None or len(tab) < N + 2:
        ints = _coeff_table(N)
        tab = [numerics.real(v, p) for v in ints[: max(N + 2, 80)]]
        _mpfr_tables[p] = tab
    return tab


def _j_eval_core(tau, p: int, gamma0: Mat2 | None = None) -> tuple[mpc, Mat2]:
    c = numerics.context(p)
    tau_red, g = reduce_to_fd(tau, p, gamma0)
    q = c.exp(c.mul(_two_pi_i(p), tau_red))
    log_q = -2 * math.pi * float(tau_red.imag)  # log|q| exactly
    N = series_terms_needed(log_q, p)
    co = _mpfr_coeffs(p, N)
    s = mpc(0, precision=(p, p))
    for n in range(N, 0, -1):
        s = c.fma(s, q, co[n + 1])
    s = c.fma(s, q, co[1])
    s = c.add(s, c.div(1, q))
    return s, g


_two_pi_i_cache: dict[int, mpc] = {}


def _two_pi_i(p: int) -> mpc:
    z = _two_pi_i_cache.get(p)
    if z is None:
        c = numerics.context(p)
        z = mpc(0, c.mul(2, c.const_pi()), precision=(p, p))
        _two_pi_i_cache[p] = z
    return z


def j_eval(tau, p: int) -> mpc:
    """j(tau) with |error| <= 2^(-p) * max(1, |j(tau)|)."""
    pw = p + 16
    s, _ = _j_eval_core(tau, pw)
    return numerics.context(p).plus(s)
