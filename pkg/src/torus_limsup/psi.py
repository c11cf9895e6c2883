"""Approximating functions, the Psi_Q transform and the classical series.

An :class:`ApproxFunction` maps nonzero ``q`` in the nonnegative orthant of
Z^n to a nonnegative rational.  Univariate building blocks are "rules"
``k -> value`` that carry whatever certificates they can offer: a sup bound,
a finite support radius, a power-law exponent.  Exact statuses are only ever
reported when one of those certificates justifies them.
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Callable, Optional

from ._validation import as_fraction, check_dimension, check_int_vector, check_positive_int
from .arith import (
    divisors, gcd_vec, int_root_exact, lcm, mobius, nearest_int_dist, primitive_count,
    primitive_part, primitive_vectors, shell_count, shell_vectors, sup_norm, totient,
)
from .errors import DomainError, SingularityError, UnsupportedError
from .targets import TargetFamily

# ---------------------------------------------------------------- rules


@dataclass(frozen=True)
class PowerLaw:
    """``k -> coef / k**tau`` with an integer exponent ``tau >= 0``."""

    coef: Fraction
    tau: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coef", as_fraction(self.coef, "coef"))
        if self.coef < 0:
            raise DomainError("coef must be nonnegative")
        if isinstance(self.tau, bool) or not isinstance(self.tau, int) or self.tau < 0:
            raise DomainError("tau must be a nonnegative integer (keeps values rational)")

    def __call__(self, k):
        return self.coef / Fraction(k) ** self.tau

    sup_bound = property(lambda self: self.coef)
    support_max = property(lambda self: None if self.coef else 0)
    nonincreasing = True

    def to_dict(self):
        return {"type": "power", "coef": str(self.coef), "tau": self.tau}


@dataclass(frozen=True)
class TableRule:
    """Finitely supported rule given by a table ``k -> value``."""

    values: tuple
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        items = self.values.items() if isinstance(self.values, dict) else self.values
        clean = tuple(sorted((check_positive_int(int(k), "k"), as_fraction(v, "value"))
                             for k, v in items))
        if any(v < 0 for _, v in clean):
            raise DomainError("rule values must be nonnegative")
        object.__setattr__(self, "values", clean)
        object.__setattr__(self, "_lookup", dict(clean))

    def __call__(self, k):
        return self._lookup.get(k, Fraction(0))

    @property
    def sup_bound(self):
        return max((v for _, v in self.values), default=Fraction(0))

    @property
    def support_max(self):
        return max((k for k, v in self.values if v > 0), default=0)

    @property
    def nonincreasing(self):
        vals = [self(k) for k in range(1, self.support_max + 2)]
        return all(a >= b for a, b in zip(vals, vals[1:]))

    def to_dict(self):
        return {"type": "table", "values": {str(k): str(v) for k, v in self.values}}


@dataclass(frozen=True)
class ResidueRule:
    """``base(k)`` when ``k = residue (mod modulus)``, else 0."""

    base: object
    modulus: int
    residue: int

    def __call__(self, k):
        return self.base(k) if k % self.modulus == self.residue % self.modulus else Fraction(0)

    sup_bound = property(lambda self: self.base.sup_bound)
    support_max = property(lambda self: self.base.support_max)
    nonincreasing = False

    def to_dict(self):
        return {"type": "residue", "base": self.base.to_dict(),
                "modulus": self.modulus, "residue": self.residue}


@dataclass(frozen=True)
class CallableRule:
    """Arbitrary user rule; certificates are whatever the caller supplies."""

    func: Callable
    sup_bound: Optional[Fraction] = None
    support_max: Optional[int] = None
    nonincreasing: bool = False

    def __call__(self, k):
        v = as_fraction(self.func(k), "rule value")
        if v < 0:
            raise DomainError("rule values must be nonnegative")
        return v

    def to_dict(self):
        return {"type": "callable", "name": getattr(self.func, "__name__", "?")}


def rule_from_dict(obj):
    kind = obj.get("type")
    if kind == "power":
        return PowerLaw(obj["coef"], int(obj.get("tau", 1)))
    if kind == "table":
        return TableRule(obj["values"])
    if kind == "residue":
        return ResidueRule(rule_from_dict(obj["base"]), int(obj["modulus"]), int(obj["residue"]))
    raise DomainError(f"unknown rule type {kind!r}")


# ---------------------------------------------------------------- functions

FUNCTION_KINDS = (
    "finite_support", "univariate", "ray", "nrs_masked", "entrywise_masked",
    "chow_technau", "scaled", "sum",
)


@dataclass(frozen=True)
class ApproxFunction:
    """A function psi on the nonnegative orthant of Z^n.

    Use the module-level constructors (:func:`finite_support`,
    :func:`univariate`, :func:`ray`, ...) rather than building this directly.
    """

    kind: str
    n: int
    table: tuple = ()
    rule: object = None
    direction: tuple = ()
    base: object = None
    modulus: object = 1
    residue: object = 0
    factor: Fraction = Fraction(1)
    alphas: tuple = ()
    gammas: tuple = ()
    parts: tuple = ()
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise DomainError(f"unknown function kind {self.kind!r}")
        check_dimension(self.n, "n")
        if self.kind == "finite_support":
            object.__setattr__(self, "_lookup", dict(self.table))

    def __call__(self, q):
        return eval_psi(self, q)

    # -- certificates

    @property
    def sup_bound(self):
        """Upper bound on all values, or None when unknown."""
        k = self.kind
        if k == "finite_support":
            return max((v for _, v in self.table), default=Fraction(0))
        if k in ("univariate", "ray"):
            return self.rule.sup_bound
        if k in ("nrs_masked", "entrywise_masked"):
            return self.base.sup_bound
        if k == "scaled":
            b = self.base.sup_bound
            return None if b is None else b * self.factor
        if k == "sum":
            bounds = [p.sup_bound for p in self.parts]
            return None if any(b is None for b in bounds) else sum(bounds, Fraction(0))
        return None  # chow_technau: the denominator is unbounded

    @property
    def support_radius(self):
        """Largest ``|q|`` with psi(q) > 0, or None for infinite support."""
        k = self.kind
        if k == "finite_support":
            return max((sup_norm(q) for q, v in self.table if v > 0), default=0)
        if k == "univariate":
            return self.rule.support_max
        if k == "ray":
            s = self.rule.support_max
            return None if s is None else s * sup_norm(self.direction)
        if k == "chow_technau":
            return self.base.support_radius
        if k in ("nrs_masked", "entrywise_masked", "scaled"):
            return self.base.support_radius
        radii = [p.support_radius for p in self.parts]
        return None if any(r is None for r in radii) else max(radii, default=0)

    def scaled(self, c):
        return ApproxFunction("scaled", self.n, base=self, factor=as_fraction(c, "factor"))

    def support(self, lo, hi):
        """Yield ``(q, psi(q))`` for ``lo <= |q| <= hi`` with psi(q) > 0."""
        lo = max(lo, 1)
        k = self.kind
        if k == "finite_support":
            for q, v in self.table:
                if v > 0 and lo <= sup_norm(q) <= hi:
                    yield q, v
            return
        if k == "ray":
            h = sup_norm(self.direction)
            for d in range(ceil(lo / h), hi // h + 1):
                v = self.rule(d)
                if v > 0:
                    yield tuple(d * c for c in self.direction), v
            return
        if k in ("nrs_masked", "entrywise_masked", "scaled", "chow_technau"):
            for q, _ in self.base.support(lo, hi):
                v = eval_psi(self, q)
                if v > 0:
                    yield q, v
            return
        if k == "sum":
            acc = {}
            for part in self.parts:
                for q, v in part.support(lo, hi):
                    acc[q] = acc.get(q, Fraction(0)) + v
            yield from sorted(acc.items(), key=lambda item: (sup_norm(item[0]), item[0]))
            return
        radius = self.support_radius
        if radius is not None:
            hi = min(hi, radius)
        for norm in range(lo, hi + 1):
            v = self.rule(norm)
            if v > 0:
                for q in shell_vectors(self.n, norm):
                    yield q, v

    def to_dict(self):
        k = self.kind
        out = {"kind": k, "n": self.n}
        if k == "finite_support":
            out["entries"] = [{"q": list(q), "value": str(v)} for q, v in self.table]
        elif k in ("univariate", "ray"):
            out["rule"] = self.rule.to_dict()
            if k == "ray":
                out["direction"] = list(self.direction)
        elif k in ("nrs_masked", "entrywise_masked"):
            out.update(base=self.base.to_dict(), modulus=_plain(self.modulus),
                       residue=_plain(self.residue))
        elif k == "scaled":
            out.update(base=self.base.to_dict(), factor=str(self.factor))
        elif k == "chow_technau":
            out.update(base=self.base.to_dict(), alphas=[str(a) for a in self.alphas],
                       gammas=[str(g) for g in self.gammas])
        elif k == "sum":
            out["parts"] = [p.to_dict() for p in self.parts]
        return out


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def finite_support(table, n=None):
    """psi from a finite table ``{q: value}``; missing q map to 0."""
    items = table.items() if isinstance(table, dict) else table
    clean = {}
    for q, v in items:
        q = check_int_vector(q, "q", allow_zero=False)
        v = as_fraction(v, "value")
        if v < 0:
            raise DomainError("psi values must be nonnegative")
        clean[q] = v
    dims = {len(q) for q in clean}
    if n is None:
        if len(dims) != 1:
            raise DomainError("cannot infer n from an empty or ragged table")
        n = dims.pop()
    elif dims - {n}:
        raise DomainError(f"all table keys must have length {n}")
    return ApproxFunction("finite_support", n, table=tuple(sorted(clean.items())))


def univariate(rule, n):
    """psi(q) = rule(|q|)."""
    return ApproxFunction("univariate", n, rule=rule)


def ray(direction, rule):
    """psi(d q') = rule(d) on the ray through the primitive ``direction``, else 0."""
    direction = check_int_vector(direction, "direction", allow_zero=False)
    if gcd_vec(direction) != 1:
        raise DomainError("ray direction must be primitive")
    return ApproxFunction("ray", len(direction), rule=rule, direction=direction)


def nrs_masked(base, modulus, residue):
    """base(q) when gcd(q) = residue (mod modulus), else 0."""
    check_positive_int(modulus, "modulus")
    return ApproxFunction("nrs_masked", base.n, base=base, modulus=modulus, residue=residue % modulus)


def entrywise_masked(base, moduli, residues):
    """base(q) when q_j = s_j (mod b_j) for every j, else 0."""
    moduli = tuple(check_positive_int(b, "modulus") for b in moduli)
    residues = tuple(int(s) for s in residues)
    if len(moduli) != base.n or len(residues) != base.n:
        raise DomainError(f"moduli and residues need {base.n} entries")
    return ApproxFunction("entrywise_masked", base.n, base=base, modulus=moduli, residue=residues)


def chow_technau(base, alphas, gammas=None):
    """psi(q) = base(q) / prod_i ||d alpha_i - gamma_i||, d = gcd(q).

    Irrational alphas must be passed as rational approximants; results are
    then exact for the surrogate, not for the irrational itself.
    """
    alphas = tuple(as_fraction(a, "alpha") for a in alphas)
    gammas = tuple(as_fraction(g, "gamma") for g in (gammas or [0] * len(alphas)))
    if not alphas or len(gammas) != len(alphas):
        raise DomainError("need matching, nonempty alphas and gammas")
    return ApproxFunction("chow_technau", base.n, base=base, alphas=alphas, gammas=gammas)


def psi_sum(*parts):
    """Pointwise sum of functions on a common Z^n."""
    if not parts or len({p.n for p in parts}) != 1:
        raise DomainError("need at least one part, all with the same n")
    return ApproxFunction("sum", parts[0].n, parts=tuple(parts))


def eval_psi(f, q):
    """Exact value psi(q).

    >>> f = chow_technau(univariate(PowerLaw(1, 1), 1), ["7/10"])
    >>> eval_psi(f, (3,))
    Fraction(10, 3)
    """
    q = check_int_vector(q, "q", allow_zero=False)
    if len(q) != f.n:
        raise DomainError(f"q must have {f.n} entries, got {len(q)}")
    k = f.kind
    if k == "finite_support":
        return f._lookup.get(q, Fraction(0))
    if k == "univariate":
        return f.rule(sup_norm(q))
    if k == "ray":
        d, qp = primitive_part(q)
        return f.rule(d) if qp == f.direction else Fraction(0)
    if k == "nrs_masked":
        return eval_psi(f.base, q) if gcd_vec(q) % f.modulus == f.residue else Fraction(0)
    if k == "entrywise_masked":
        ok = all((v - s) % b == 0 for v, s, b in zip(q, f.residue, f.modulus))
        return eval_psi(f.base, q) if ok else Fraction(0)
    if k == "scaled":
        return f.factor * eval_psi(f.base, q)
    if k == "sum":
        return sum((eval_psi(p, q) for p in f.parts), Fraction(0))
    # chow_technau
    return eval_psi(f.base, q) / _ct_denominator(f, gcd_vec(q))


def _ct_denominator(f, d):
    den = Fraction(1)
    for a, g in zip(f.alphas, f.gammas):
        den *= nearest_int_dist(d * a - g)
    if den == 0:
        raise SingularityError(f"||d alpha - gamma|| vanishes at d = {d}")
    return den


def load_psi_json(path_or_obj):
    """Finite-support psi from ``{"n": int, "entries": [{"q": [...], "value": "a/b"}]}``.

    Objects carrying a ``"kind"`` key are parsed by :func:`psi_from_dict`.
    """
    obj = path_or_obj
    if not isinstance(obj, dict):
        with open(path_or_obj) as fh:
            obj = json.load(fh)
    return psi_from_dict(obj)


def psi_from_dict(obj):
    try:
        kind = obj.get("kind", "finite_support")
        n = int(obj["n"]) if "n" in obj else None
        if kind == "finite_support":
            return finite_support({tuple(e["q"]): e["value"] for e in obj["entries"]}, n)
        if kind == "univariate":
            return univariate(rule_from_dict(obj["rule"]), n)
        if kind == "ray":
            return ray(tuple(obj["direction"]), rule_from_dict(obj["rule"]))
        if kind == "nrs_masked":
            return nrs_masked(psi_from_dict(obj["base"]), int(obj["modulus"]), int(obj["residue"]))
        if kind == "entrywise_masked":
            return entrywise_masked(psi_from_dict(obj["base"]), obj["modulus"], obj["residue"])
        if kind == "scaled":
            return psi_from_dict(obj["base"]).scaled(obj["factor"])
        if kind == "chow_technau":
            return chow_technau(psi_from_dict(obj["base"]), obj["alphas"], obj.get("gammas"))
        if kind == "sum":
            return psi_sum(*(psi_from_dict(p) for p in obj["parts"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed psi specification: {exc}") from exc
    raise DomainError(f"unknown psi kind {kind!r}")


# ---------------------------------------------------------------- transform

EXACT, TAIL_BOUNDED, LOWER_BOUND, INFINITE = "exact", "tail_bounded", "lower_bound_only", "infinite"
_STATUS_RANK = {EXACT: 0, TAIL_BOUNDED: 1, LOWER_BOUND: 2, INFINITE: 3}


@dataclass
class TransformResult:
    """Psi_Q(d) for a set of moduli.

    ``powers[d]`` holds the (partial) sum Psi_Q(d)^m; under ``tail_bounded``
    the omitted tail is at most ``tail_bounds[d]``.  Under ``infinite`` the
    power entry is None.
    """

    Q: int
    m: int
    powers: dict
    statuses: dict
    tail_bounds: dict = field(default_factory=dict)

    @property
    def status(self):
        return max(self.statuses.values(), key=_STATUS_RANK.get, default=EXACT)

    def value(self, d):
        """Psi_Q(d) itself: a Fraction when the m-th root is rational, else a float."""
        p = self.powers[d]
        if p is None:
            return float("inf")
        root = int_root_exact(p, self.m)
        return root if root is not None else float(p) ** (1.0 / self.m)

    def rows(self):
        for d in sorted(self.powers):
            v = self.value(d)
            yield {
                "d": d,
                "Psi": "inf" if v == float("inf") else (str(v) if isinstance(v, Fraction) else repr(v)),
                "Psi_pow_m": "inf" if self.powers[d] is None else str(self.powers[d]),
                "status": self.statuses[d],
                "tail_bound": str(self.tail_bounds.get(d, 0)),
            }


def psi_transform(f, m, Q, d_values=None, shell_cap=64):
    """Psi_Q(d)^m = sum of psi(q)^m over gcd(q) = d and |q/gcd(q)| >= Q.

    ``d_values`` defaults to the gcds present in a finite table, else 1..20.
    Infinite-support functions without a certificate are summed over
    primitive shells up to ``shell_cap`` and flagged ``lower_bound_only``.

    >>> f = finite_support({(1, 2): "1/10", (2, 4): "3/10"})
    >>> r = psi_transform(f, 1, 1)
    >>> r.value(1), r.value(2)
    (Fraction(1, 10), Fraction(3, 10))
    """
    check_dimension(m)
    check_positive_int(Q, "Q")
    if d_values is None:
        if f.kind == "finite_support":
            d_values = sorted({gcd_vec(q) for q, _ in f.table}) or [1]
        else:
            d_values = range(1, 21)
    result = TransformResult(Q, m, {}, {})
    for d in d_values:
        check_positive_int(d, "d")
        power, status, tail = _transform_one(f, m, Q, d, shell_cap)
        result.powers[d] = power
        result.statuses[d] = status
        if tail:
            result.tail_bounds[d] = tail
    return result


def psi_transform_window(f, m, Q, d, qmax):
    """Psi_Q(d)^m restricted to |q| <= qmax; always a finite exact sum."""
    check_positive_int(d, "d")
    if d > qmax:
        return Fraction(0)
    if f.n == 1:
        return eval_psi(f, (d,)) ** m if Q <= 1 else Fraction(0)
    if f.kind == "univariate":
        return sum((primitive_count(f.n, j) * f.rule(d * j) ** m
                    for j in range(Q, qmax // d + 1)), Fraction(0))
    return sum((v**m for q, v in f.support(d * Q, qmax) if gcd_vec(q) == d), Fraction(0))


def _ray_like_direction(f):
    """Direction of a function supported on one ray (through wrappers), else None."""
    while f.kind in ("nrs_masked", "scaled", "entrywise_masked", "chow_technau"):
        f = f.base
    return f.direction if f.kind == "ray" else None


def _transform_one(f, m, Q, d, shell_cap):
    k = f.kind
    zero = Fraction(0)
    if f.n == 1:
        # Only q' = 1 is primitive in Z_+.
        return (eval_psi(f, (d,)) ** m if Q <= 1 else zero), EXACT, None
    if k == "finite_support":
        total = sum((v**m for q, v in f.table
                     if gcd_vec(q) == d and sup_norm(q) // d >= Q), zero)
        return total, EXACT, None
    if k == "ray":
        if sup_norm(f.direction) < Q:
            return zero, EXACT, None
        return f.rule(d) ** m, EXACT, None
    if k == "scaled":
        p, s, t = _transform_one(f.base, m, Q, d, shell_cap)
        c = f.factor**m
        return (None if p is None else c * p), s, (t * c if t else None)
    if k == "nrs_masked":
        if d % f.modulus != f.residue:
            return zero, EXACT, None
        return _transform_one(f.base, m, Q, d, shell_cap)
    if k == "chow_technau":
        p, s, t = _transform_one(f.base, m, Q, d, shell_cap)
        c = 1 / _ct_denominator(f, d) ** m
        return (None if p is None else c * p), s, (t * c if t else None)
    if k == "sum":
        dirs = [_ray_like_direction(p) for p in f.parts]
        if all(dirs) and len(set(dirs)) == len(dirs):
            # pairwise disjoint supports, so m-th powers add
            parts = [_transform_one(p, m, Q, d, shell_cap) for p in f.parts]
            if any(p is None for p, _, _ in parts):
                return None, INFINITE, None
            status = max((s for _, s, _ in parts), key=_STATUS_RANK.get)
            tail = sum((t or zero for _, _, t in parts), zero)
            return sum((p for p, _, _ in parts), zero), status, (tail or None)
    if k == "univariate":
        return _transform_univariate(f.rule, f.n, m, Q, d, shell_cap)
    return _transform_enumerate(f, m, Q, d, shell_cap)


def _transform_univariate(rule, n, m, Q, d, shell_cap):
    zero = Fraction(0)
    smax = rule.support_max
    if smax is not None:
        total = sum((primitive_count(n, j) * rule(d * j) ** m for j in range(Q, smax // d + 1)), zero)
        return total, EXACT, None
    if isinstance(rule, PowerLaw):
        mt = m * rule.tau
        if mt <= n:
            # infinitely many shells, count ~ j^(n-1), terms ~ j^(-m tau)
            return None, INFINITE, None
        K = max(Q, shell_cap)
        total = sum((primitive_count(n, j) * rule(d * j) ** m for j in range(Q, K + 1)), zero)
        tail = (n * 2 ** (n - 1) * rule.coef**m / Fraction(d) ** mt
                * Fraction(K) ** (n - mt) / (mt - n))
        return total, TAIL_BOUNDED, tail
    K = max(Q, shell_cap)
    total = sum((primitive_count(n, j) * rule(d * j) ** m for j in range(Q, K + 1)), zero)
    return total, LOWER_BOUND, None


def _transform_enumerate(f, m, Q, d, shell_cap):
    radius = f.support_radius
    exact = radius is not None
    top = radius // d if exact else max(Q, shell_cap)
    total = Fraction(0)
    for j in range(Q, top + 1):
        for qp in primitive_vectors(f.n, j):
            total += eval_psi(f, tuple(d * c for c in qp)) ** m
    return total, (EXACT if exact else LOWER_BOUND), None


# ---------------------------------------------------------------- series

SERIES_KINDS = ("kg", "orthant", "ds", "catlin")


@dataclass
class SeriesResult:
    kind: str
    limit: int
    value: Fraction
    tag: Optional[str]

    def to_dict(self):
        return {"kind": self.kind, "limit": self.limit, "value": str(self.value),
                "status": "partial", "analytic_tag": self.tag}


def _power_tag(f, m):
    """Analytic verdict for psi(q) = c |q|^-tau: every series here converges iff m tau > n."""
    if f.kind == "univariate" and isinstance(f.rule, PowerLaw):
        if f.rule.coef == 0 or m * f.rule.tau > f.n:
            return "converges"
        return "diverges"
    return None


def series_partial_sum(kind, f, m, limit):
    """Exact partial sum of a classical series over ``1 <= |q| <= limit``.

    kinds: ``kg`` (sum of q^(n-1) psi(q)^m, univariate psi), ``orthant``
    (sum of psi(q)^m), ``ds`` (sum of (phi(gcd q) psi(q) / gcd q)^m) and
    ``catlin`` (sum of Phi_m(q) sup_t (psi(tq)/(t|q|))^m).  All sums run over
    the nonnegative orthant.  The tag is analytic, never inferred from the
    partial sum.

    >>> series_partial_sum("kg", univariate(PowerLaw(1, 1), 1), 1, 3).value
    Fraction(11, 6)
    """
    if kind not in SERIES_KINDS:
        raise DomainError(f"unknown series kind {kind!r}")
    check_dimension(m)
    if isinstance(limit, bool) or not isinstance(limit, int) or limit < 0:
        raise DomainError("limit must be a nonnegative integer")
    n = f.n
    zero = Fraction(0)
    uni = f.rule if f.kind == "univariate" else None
    if kind == "kg":
        if uni is None:
            raise DomainError("the Khintchine-Groshev series needs a univariate psi")
        value = sum((Fraction(k) ** (n - 1) * uni(k) ** m for k in range(1, limit + 1)), zero)
    elif kind == "orthant":
        if uni is not None:
            value = sum((shell_count(n, k) * uni(k) ** m for k in range(1, limit + 1)), zero)
        else:
            value = sum((v**m for _, v in f.support(1, limit)), zero)
    elif kind == "ds":
        if uni is not None:
            value = zero
            for k in range(1, limit + 1):
                g = uni(k)
                if g:
                    w = sum((primitive_count(n, k // e) * Fraction(totient(e), e) ** m
                             for e in divisors(k)), zero)
                    value += w * g**m
        else:
            value = zero
            for q, v in f.support(1, limit):
                e = gcd_vec(q)
                value += (totient(e) * v / e) ** m
    else:
        value = zero
        for k in range(1, limit + 1):
            for q in shell_vectors(n, k):
                s = catlin_sup_term(f, q, m)
                if s:
                    value += catlin_phi(q, m) * s
    return SeriesResult(kind, limit, value, _power_tag(f, m))


def catlin_phi(q, m):
    """#{p in Z^m : |p| <= |q|, gcd(p, q) = 1}, the gcd taken over all entries.

    >>> catlin_phi((2, 4), 1), catlin_phi((1, 0), 1)
    (4, 3)
    """
    check_dimension(m)
    g = gcd_vec(q)
    N = sup_norm(q)
    return sum(mobius(e) * (2 * (N // e) + 1) ** m for e in divisors(g))


CATLIN_T_CAP = 10**6


def catlin_sup_term(f, q, m):
    """sup over t >= 1 of (psi(tq) / (t|q|))^m, with a certified stopping rule.

    Stops once ``B/(t|q|)`` (B a sup bound for psi) cannot beat the running
    sup, or once ``t|q|`` leaves a finite support.
    """
    q = check_int_vector(q, "q", allow_zero=False)
    norm = sup_norm(q)
    bound = f.sup_bound
    radius = f.support_radius
    if bound is None and radius is None:
        raise UnsupportedError("psi has neither a sup bound nor a finite support")
    direction = _ray_like_direction(f)
    if direction is not None and primitive_part(q)[1] != direction:
        return Fraction(0)
    best = Fraction(0)
    t = 1
    while True:
        if radius is not None and t * norm > radius:
            break
        if bound is not None and bound / (t * norm) <= best:
            break
        if t > CATLIN_T_CAP:
            raise UnsupportedError("sup over t did not settle below the iteration cap")
        cand = eval_psi(f, tuple(t * c for c in q)) / (t * norm)
        if cand > best:
            best = cand
        t += 1
    return best**m


# ---------------------------------------------------------------- NRS reduction


@dataclass
class NrsReduction:
    family: TargetFamily
    shift: tuple
    psi_bar: ApproxFunction
    parts: list


def nrs_reduce(a, b, r, s, rule):
    """Congruence reduction to a Z-periodic problem.

    Targets become ``r/a + Z^m`` with ``a = lcm(a)``; psi_bar(q) =
    rule(|q|)/a when ``q = s (mod b)`` entrywise; ``parts[t]`` keeps only the
    q whose gcd is ``t`` mod ``lcm(b)``, so the parts sum back to psi_bar.
    """
    a = tuple(check_positive_int(v, "a") for v in a)
    b = tuple(check_positive_int(v, "b") for v in b)
    r, s = tuple(int(v) for v in r), tuple(int(v) for v in s)
    if len(r) != len(a) or len(s) != len(b):
        raise DomainError("r must match a and s must match b in length")
    if any(not 0 <= ri < ai for ri, ai in zip(r, a)) or any(not 0 <= sj < bj for sj, bj in zip(s, b)):
        raise DomainError("need 0 <= r_i < a_i and 0 <= s_j < b_j")
    A, B = lcm(*a), lcm(*b)
    family = TargetFamily("congruence", m=len(a), residue=r, modulus=A)
    psi_bar = entrywise_masked(univariate(rule, len(b)), b, s).scaled(Fraction(1, A))
    parts = [nrs_masked(psi_bar, B, t) for t in range(B)]
    return NrsReduction(family, tuple(Fraction(v, A) for v in r), psi_bar, parts)
