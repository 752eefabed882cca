import math
import random

import gmpy2
import pytest

from valq import Mat2, QuadIrr, make
from valq.quadratic import is_discriminant


def mpf(s, p=256):
    return gmpy2.mpfr(s, precision=p)


def assert_close(x, ref, tol, what=""):
    d = abs(gmpy2.mpfr(x, precision=256) - gmpy2.mpfr(ref, precision=256))
    assert d < tol, f"{what}: |{x} - {ref}| = {d} >= {tol}"


def assert_cclose(z, re_ref, im_ref, tol, what=""):
    assert_close(z.real, re_ref, tol, what + " (re)")
    assert_close(z.imag, im_ref, tol, what + " (im)")


@pytest.fixture
def rng():
    return random.Random(20260809)


def random_quadirr(rng, coeff_bound=9, disc_bound=None):
    while True:
        a = rng.randint(-coeff_bound, coeff_bound)
        b = rng.randint(-coeff_bound, coeff_bound)
        c = rng.randint(-coeff_bound, coeff_bound)
        if a == 0:
            continue
        D = b * b - 4 * a * c
        if D <= 0 or is_discriminant(D) is False:
            continue
        if disc_bound and D > disc_bound:
            continue
        return make(a, b, c)


def random_sl2(rng, bound=50):
    # random product of generators, clamped to the entry bound
    while True:
        g = Mat2.identity()
        for _ in range(rng.randint(1, 12)):
            if rng.random() < 0.5:
                n = rng.randint(-3, 3)
                g = g * Mat2(1, n, 0, 1)
            else:
                g = g * Mat2(0, -1, 1, 0)
        if g.det == 1 and max(abs(v) for v in (g.a, g.b, g.c, g.d)) <= bound \
                and g != Mat2.identity():
            return g
