"""Integer and vector number theory used by every other module.

Rationals are :class:`fractions.Fraction` (always stored in lowest terms with
a positive denominator), integer vectors are tuples of nonnegative ints.
"""
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from math import floor, gcd

from ._validation import as_fraction, check_int_vector, check_positive_int
from .errors import DomainError


def gcd_vec(q):
    """Greatest common divisor of the entries of ``q``, zeros ignored.

    >>> gcd_vec((2, 4))
    2
    >>> gcd_vec((0, 3))
    3
    """
    q = check_int_vector(q)
    g = reduce(gcd, q, 0)
    if g == 0:
        raise DomainError("gcd of the zero vector is undefined")
    return g


def sup_norm(q):
    return max(abs(v) for v in q)


def primitive_part(q):
    """Return ``(d, q')`` with ``q = d * q'`` and ``q'`` primitive."""
    d = gcd_vec(q)
    return d, tuple(v // d for v in q)


@lru_cache(maxsize=65536)
def factorize(d):
    """Prime factorisation of ``d`` as a tuple of ``(prime, exponent)``."""
    check_positive_int(d, "d")
    out = []
    p = 2
    while p * p <= d:
        if d % p == 0:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if d > 1:
        out.append((d, 1))
    return tuple(out)


def totient(d):
    """Euler's totient function.

    >>> [totient(k) for k in (1, 6, 10)]
    [1, 2, 4]
    """
    result = check_positive_int(d, "d")
    for p, _ in factorize(d):
        result -= result // p
    return result


def mobius(d):
    check_positive_int(d, "d")
    fac = factorize(d)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisors(k):
    """Sorted positive divisors of ``k``."""
    divs = [1]
    for p, e in factorize(k):
        divs = [x * p**i for x in divs for i in range(e + 1)]
    return sorted(divs)


def totients_upto(limit):
    """List ``phi[0..limit]`` computed with a sieve (``phi[0]`` is 0)."""
    phi = list(range(limit + 1))
    for p in range(2, limit + 1):
        if phi[p] == p:
            for k in range(p, limit + 1, p):
                phi[k] -= phi[k] // p
    return phi


def shell_count(n, k):
    """Number of ``q`` in the nonnegative orthant of Z^n with sup-norm ``k``."""
    check_positive_int(n, "n")
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return 1
    return (k + 1) ** n - k**n


@lru_cache(maxsize=65536)
def primitive_count(n, k):
    """Number of primitive ``q`` in the nonnegative orthant with ``|q| = k``.

    Obtained by Moebius inversion of :func:`shell_count` over the divisors of k.

    >>> primitive_count(2, 1), primitive_count(2, 2), primitive_count(1, 1)
    (3, 2, 1)
    """
    check_positive_int(n, "n")
    check_positive_int(k, "k")
    return sum(mobius(e) * shell_count(n, k // e) for e in divisors(k))


def nearest_int_dist(x):
    """Distance from ``x`` to the nearest integer, in ``[0, 1/2]``.

    Exact for rationals; floats are accepted and handled in floating point.
    """
    if isinstance(x, float):
        frac = x - floor(x)
        return min(frac, 1.0 - frac)
    x = as_fraction(x, "x")
    frac = x - floor(x)
    return min(frac, 1 - frac)


def lcm(*values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


def int_root_exact(x, m):
    """Return the exact rational m-th root of ``x`` or ``None`` if irrational."""
    x = Fraction(x)
    if x < 0:
        raise DomainError("root of a negative number")
    if m == 1:
        return x
    num = _iroot(x.numerator, m)
    den = _iroot(x.denominator, m)
    if num**m == x.numerator and den**m == x.denominator:
        return Fraction(num, den)
    return None


def rational_root_floor(x, m, digits=30):
    """Rational lower bound for the m-th root of ``x`` (exact when possible)."""
    exact = int_root_exact(x, m)
    if exact is not None:
        return exact
    x = Fraction(x)
    scale = 10**digits
    # floor((x * scale^m)^(1/m)) / scale
    target = x * scale**m
    root = _iroot(target.numerator // target.denominator, m)
    return Fraction(root, scale)


def _iroot(a, m):
    """floor(a ** (1/m)) for a nonnegative int ``a``."""
    if a < 2:
        return a
    lo, hi = 0, 1 << (a.bit_length() // m + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**m <= a:
            lo = mid
        else:
            hi = mid - 1
    return lo


def shell_vectors(n, k):
    """Yield every ``q`` in the nonnegative orthant of Z^n with ``|q| = k``.

    Each vector is produced once, keyed on the first coordinate equal to k.
    """
    if k == 0:
        yield (0,) * n
        return
    for i in range(n):
        for head in product(range(k), repeat=i):
            for tail in product(range(k + 1), repeat=n - i - 1):
                yield head + (k,) + tail


def primitive_vectors(n, k):
    """Primitive vectors of sup-norm ``k`` in the nonnegative orthant."""
    for q in shell_vectors(n, k):
        if reduce(gcd, q, 0) == 1:
            yield q
