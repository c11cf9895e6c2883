"""Input validation helpers shared by the public functions."""
from fractions import Fraction
from numbers import Rational

from .errors import DomainError


def as_fraction(x, name="value"):
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are rejected: every exact path in the package works on rationals,
    and a silent float conversion would break reproducibility.
    """
    if isinstance(x, bool):
        raise DomainError(f"{name}: booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise DomainError(f"{name}: cannot parse {x!r} as a rational") from exc
    raise DomainError(f"{name}: expected an exact rational, got {type(x).__name__}")


def check_int_vector(q, name="q", allow_zero=True):
    """Return ``q`` as a tuple of nonnegative ints."""
    if isinstance(q, int) and not isinstance(q, bool):
        q = (q,)
    try:
        out = tuple(q)
    except TypeError as exc:
        raise DomainError(f"{name}: expected a sequence of integers") from exc
    if not out:
        raise DomainError(f"{name}: empty vector")
    for v in out:
        if isinstance(v, bool) or not isinstance(v, int):
            raise DomainError(f"{name}: entries must be integers, got {v!r}")
        if v < 0:
            raise DomainError(f"{name}: entries must be nonnegative, got {v}")
    if not allow_zero and not any(out):
        raise DomainError(f"{name}: the zero vector is not allowed")
    return out


def check_positive_int(k, name="value"):
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise DomainError(f"{name}: expected a positive integer, got {k!r}")
    return k


def check_dimension(m, name="m"):
    return check_positive_int(m, name)
