"""
Clebsch–Gordan data for SU(2): the coefficients c_{m,n,h}, the bi-degree
differential operators and the equivariant isometries

    alpha_{m,n,h}: P_r -> P_m (x) P_n,   r = m + n - 2h,

together with eta_{m,n,h} = (I (x) J_n) alpha_{m,n,h} and the projections
q_{m,r,l} = eta eta^*.

alpha is built two independent ways: from the operators Gamma and Delta_yx
(``alpha_via_operators``) and from the closed-form epsilon coefficients
(``alpha_closed``). Neither construction calls the other.
"""

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

from Eposic import config
from Eposic.errors import InvalidIndex, VerificationFailure, warn
from Eposic.exact_scalar import ZERO, ExactScalar, sqrt_rational
from Eposic.polyspaces import (
    LinOp,
    PolyVec,
    SpaceLabel,
    flip,
    identity,
    j_map,
    j_map_adjoint,
    space,
    tensor,
)

# --------------------------------------------------------------------------- #
# Indices
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, order=True)
class CGIndex:
    """Valid triple (m, n, h) with 0 <= h <= min(m, n)."""

    m: int
    n: int
    h: int

    def __post_init__(self):
        if min(self.m, self.n, self.h) < 0 or self.h > min(self.m, self.n):
            raise InvalidIndex(
                f"Invalid index (m={self.m}, n={self.n}, h={self.h}): need 0 <= h <= min(m, n)"
            )

    @property
    def r(self) -> int:
        return self.m + self.n - 2 * self.h

    def k1(self, i: int) -> int:
        return max(0, i + self.h - self.m)

    def k2(self, i: int) -> int:
        return min(i, self.n - self.h)

    def b_range(self, i: int) -> range:
        """B(i): the j with possibly nonzero epsilon_i^j."""
        return range(self.k1(i), self.k2(i) + self.h + 1)

    def l(self, i: int, j: int) -> int:
        return i - j + self.h

    def swapped(self) -> "CGIndex":
        return CGIndex(self.n, self.m, self.h)

    def __str__(self) -> str:
        return f"({self.m},{self.n},{self.h})"


def all_indices(max_m: int, max_n: Optional[int] = None) -> List[CGIndex]:
    """Every valid index with m <= max_m and n <= max_n."""
    max_n = max_m if max_n is None else max_n
    return [
        CGIndex(m, n, h)
        for m in range(max_m + 1)
        for n in range(max_n + 1)
        for h in range(min(m, n) + 1)
    ]


def _binom(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


# --------------------------------------------------------------------------- #
# c_{m,n,h}
# --------------------------------------------------------------------------- #


@lru_cache(maxsize=None)
def cg_coefficient_recursive(m: int, n: int, h: int) -> Fraction:
    """c_{m,n,h} from the recursion in n (c_{m,0,0} = 1)."""
    CGIndex(m, n, h)
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    if h > 0:
        total += cg_coefficient_recursive(m - 1, n - 1, h - 1)
    if h < n:
        total += cg_coefficient_recursive(m + 1, n - 1, h)
    return total / ((m + 1) * n)


@lru_cache(maxsize=None)
def cg_coefficient_closed(m: int, n: int, h: int) -> Fraction:
    CGIndex(m, n, h)
    f = math.factorial
    denominator_sum = sum(
        Fraction(_binom(h, k) ** 2, _binom(m, h - k) * _binom(n, k)) for k in range(h + 1)
    )
    return Fraction(f(m - h) ** 2) / (f(m + n - 2 * h) * f(m) * f(n) * denominator_sum)


def cg_coefficient(m: int, n: int, h: int) -> Fraction:
    """c_{m,n,h} in closed form, checked against the recursion.

    Raises
    ------
    InvalidIndex
        If (m, n, h) is not a valid index.
    VerificationFailure
        If the two formulas disagree.
    """
    closed = cg_coefficient_closed(m, n, h)
    recursive = cg_coefficient_recursive(m, n, h)
    if closed != recursive:
        raise VerificationFailure(f"c{CGIndex(m, n, h)}: closed {closed} != recursive {recursive}")
    return closed


# --------------------------------------------------------------------------- #
# Differential operators on bi-degree polynomials
# --------------------------------------------------------------------------- #


def bispace(m: int, n: int) -> SpaceLabel:
    return space(m).tensor(space(n))


def _monomial_operator(
    m: int, n: int, dm: int, dn: int, rule: Callable[[int, int], List[Tuple[int, int, int]]]
) -> LinOp:
    """Operator P_m (x) P_n -> P_{m+dm} (x) P_{n+dn} defined on monomials.

    ``rule(s, t)`` maps the monomial x1^s x2^(m-s) y1^t y2^(n-t) to a list of
    (coefficient, s', t') monomials of the target bi-degree.
    """
    m2, n2 = m + dm, n + dn
    domain = bispace(m, n)
    codomain = bispace(max(m2, -1), max(n2, -1))
    if m2 < 0 or n2 < 0:
        return LinOp(domain, codomain)
    f = math.factorial
    entries: Dict[Tuple[int, int], ExactScalar] = {}
    for s in range(m + 1):
        for t in range(n + 1):
            col = s * (n + 1) + t
            for coeff, s2, t2 in rule(s, t):
                if coeff == 0:
                    continue
                ratio = Fraction(
                    f(s2) * f(m2 - s2) * f(t2) * f(n2 - t2),
                    f(s) * f(m - s) * f(t) * f(n - t),
                )
                row = s2 * (n2 + 1) + t2
                entries[(row, col)] = entries.get((row, col), ZERO) + sqrt_rational(ratio) * coeff
    return LinOp(domain, codomain, entries)


def delta_xy(m: int, n: int) -> LinOp:
    """Delta_xy = x1 d/dy1 + x2 d/dy2 : P_m (x) P_n -> P_{m+1} (x) P_{n-1}."""
    return _monomial_operator(m, n, 1, -1, lambda s, t: [(t, s + 1, t - 1), (n - t, s, t)])


def delta_yx(m: int, n: int) -> LinOp:
    """Delta_yx = y1 d/dx1 + y2 d/dx2 : P_m (x) P_n -> P_{m-1} (x) P_{n+1}."""
    return _monomial_operator(m, n, -1, 1, lambda s, t: [(s, s - 1, t + 1), (m - s, s, t)])


def gamma_xy(m: int, n: int) -> LinOp:
    """Gamma_xy = multiplication by x1 y2 - y1 x2."""
    return _monomial_operator(m, n, 1, 1, lambda s, t: [(1, s + 1, t), (-1, s, t + 1)])


def omega_xy(m: int, n: int) -> LinOp:
    """Omega_xy = d/dx1 d/dy2 - d/dx2 d/dy1."""
    return _monomial_operator(
        m, n, -1, -1, lambda s, t: [(s * (n - t), s - 1, t), (-(m - s) * t, s, t - 1)]
    )


def _embed_first(r: int) -> LinOp:
    # P_r ~ P_r (x) P_0
    return identity(space(r)).relabel(codomain=bispace(r, 0))


def alpha_via_operators(index: CGIndex) -> LinOp:
    """alpha = sqrt(c) Gamma^h Delta_yx^(n-h) on P_r viewed inside P_r (x) P_0."""
    m, n, h, r = index.m, index.n, index.h, index.r
    op = _embed_first(r)
    deg_x, deg_y = r, 0
    for _ in range(n - h):
        op = delta_yx(deg_x, deg_y) @ op
        deg_x, deg_y = deg_x - 1, deg_y + 1
    for _ in range(h):
        op = gamma_xy(deg_x, deg_y) @ op
        deg_x, deg_y = deg_x + 1, deg_y + 1
    return op.scale(sqrt_rational(cg_coefficient(m, n, h)))


def alpha_adjoint_via_operators(index: CGIndex) -> LinOp:
    """alpha^* = sqrt(c) Delta_xy^(n-h) Omega^h, landing in P_r (x) P_0 ~ P_r."""
    m, n, h, r = index.m, index.n, index.h, index.r
    op = identity(bispace(m, n))
    deg_x, deg_y = m, n
    for _ in range(h):
        op = omega_xy(deg_x, deg_y) @ op
        deg_x, deg_y = deg_x - 1, deg_y - 1
    for _ in range(n - h):
        op = delta_xy(deg_x, deg_y) @ op
        deg_x, deg_y = deg_x + 1, deg_y - 1
    return op.relabel(codomain=space(r)).scale(sqrt_rational(cg_coefficient(m, n, h)))


def cg_expand(f: PolyVec) -> List[Tuple[int, PolyVec]]:
    """Split f in P_m (x) P_n into its components in W_{m+n-2h}, h = 0..min(m, n).

    Component h is c_{m,n,h} Gamma^h Delta_yx^(n-h) Delta_xy^(n-h) Omega^h f.
    """
    if len(f.space.factors) != 2 or any(a.conjugate for a in f.space.factors):
        raise InvalidIndex(f"cg_expand needs a vector in P_m (x) P_n, got {f.space}")
    m, n = (a.degree for a in f.space.factors)
    parts = []
    for h in range(min(m, n) + 1):
        v = f
        deg_x, deg_y = m, n
        for _ in range(h):
            v = omega_xy(deg_x, deg_y).apply(v)
            deg_x, deg_y = deg_x - 1, deg_y - 1
        for _ in range(n - h):
            v = delta_xy(deg_x, deg_y).apply(v)
            deg_x, deg_y = deg_x + 1, deg_y - 1
        for _ in range(n - h):
            v = delta_yx(deg_x, deg_y).apply(v)
            deg_x, deg_y = deg_x - 1, deg_y + 1
        for _ in range(h):
            v = gamma_xy(deg_x, deg_y).apply(v)
            deg_x, deg_y = deg_x + 1, deg_y + 1
        parts.append((h, v.scale(cg_coefficient(m, n, h))))
    return parts


# --------------------------------------------------------------------------- #
# beta / epsilon
# --------------------------------------------------------------------------- #


def beta(index: CGIndex, i: int, s: int, j: int) -> ExactScalar:
    """beta^{m,n,h}_{i,s,j}; zero whenever one of its binomials vanishes."""
    m, n, h, r = index.m, index.n, index.h, index.r
    if not (0 <= i <= r and 0 <= j <= n):
        raise InvalidIndex(f"beta{index}: (i={i}, j={j}) out of range")
    l = index.l(i, j)
    denom = _binom(r, i) * _binom(m, l) * _binom(n, j)
    if denom == 0:
        raise InvalidIndex(f"beta{index}: l={l} out of range for (i={i}, j={j})")
    numer = _binom(h, s) * _binom(n - h, j - s) * _binom(m - h, i - j + s)
    if numer == 0:
        return ZERO
    f = math.factorial
    radicand = cg_coefficient(m, n, h) * f(r) * f(m) * f(n) / denom
    value = sqrt_rational(radicand) * Fraction(numer, f(m - h))
    return -value if s % 2 else value


def epsilon_value(index: CGIndex, i: int, j: int) -> ExactScalar:
    """epsilon_i^j as a sum of beta over max(0, j-i, j+h-n) <= s <= min(h, j, j+m-i-h)."""
    m, n, h = index.m, index.n, index.h
    lo = max(0, j - i, j + h - n)
    hi = min(h, j, j + m - i - h)
    total = ZERO
    for s in range(lo, hi + 1):
        total = total + beta(index, i, s, j)
    return total


@dataclass
class EpsilonTable:
    """Values epsilon_i^j for 0 <= i <= r and j in B(i)."""

    index: CGIndex
    values: Dict[Tuple[int, int], ExactScalar] = field(default_factory=dict)

    def get(self, i: int, j: int) -> ExactScalar:
        return self.values.get((i, j), ZERO)

    def items(self):
        return sorted(self.values.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpsilonTable):
            return NotImplemented
        return self.index == other.index and self.items() == other.items()


def compute_epsilon_table(index: CGIndex) -> EpsilonTable:
    values = {}
    for i in range(index.r + 1):
        for j in index.b_range(i):
            values[(i, j)] = epsilon_value(index, i, j)
    return EpsilonTable(index, values)


_TABLE_LOCK = threading.Lock()
_TABLES: Dict[CGIndex, EpsilonTable] = {}


def _persistent_lookup(index: CGIndex) -> EpsilonTable:
    from Eposic.cache import EpsilonCache

    cache = EpsilonCache(config.cache_dir())
    try:
        cache.connect()
        table = cache.load(index)
        if table is None:
            table = compute_epsilon_table(index)
            cache.store(index, table)
        return table
    except OSError as exc:
        warn(f"Epsilon cache unavailable ({exc}); computing {index} in memory.")
        return compute_epsilon_table(index)
    finally:
        cache.close()


def epsilon_table(index: CGIndex) -> EpsilonTable:
    """Memoized epsilon table; persisted when EPOSIC_CACHE_DIR is set."""
    with _TABLE_LOCK:
        table = _TABLES.get(index)
    if table is not None:
        return table
    if config.cache_dir():
        table = _persistent_lookup(index)
    else:
        table = compute_epsilon_table(index)
    with _TABLE_LOCK:
        return _TABLES.setdefault(index, table)


EpsilonProvider = Callable[[CGIndex], EpsilonTable]


def alpha_closed(index: CGIndex, table: Optional[EpsilonTable] = None) -> LinOp:
    """alpha(f_i^r) = sum_{j in B(i)} epsilon_i^j f_{l_ij}^m (x) f_j^n."""
    if table is None:
        table = epsilon_table(index)
    n = index.n
    entries = {}
    for (i, j), value in table.values.items():
        entries[(index.l(i, j) * (n + 1) + j, i)] = value
    return LinOp(space(index.r), bispace(index.m, index.n), entries)


# --------------------------------------------------------------------------- #
# eta and the projections q
# --------------------------------------------------------------------------- #


def eta(index: CGIndex, table: Optional[EpsilonTable] = None) -> LinOp:
    """eta = (I (x) J_n) alpha : P_r -> P_m (x) Pbar_n."""
    return tensor(identity(space(index.m)), j_map(index.n)) @ alpha_closed(index, table)


@lru_cache(maxsize=256)
def projection_q(m: int, r: int, l: int) -> LinOp:
    """q_{m,r,l} = eta_{m,r,l} eta_{m,r,l}^*, the projection onto V_{m+r-2l} in P_m (x) Pbar_r."""
    e = eta(CGIndex(m, r, l))
    return e @ e.adjoint()


def flip_alpha_identity_check(index: CGIndex) -> bool:
    """flip o alpha_{m,n,h} == (-1)^h alpha_{n,m,h}."""
    lhs = flip(space(index.m), space(index.n)) @ alpha_closed(index)
    rhs = alpha_closed(index.swapped())
    return lhs == (-rhs if index.h % 2 else rhs)


def flip_eta_identity_check(index: CGIndex) -> bool:
    """flip o (J_m (x) J_n^*) o eta_{m,n,h} == (-1)^h eta_{n,m,h}."""
    m, n = index.m, index.n
    lhs = (
        flip(space(m, conjugate=True), space(n))
        @ tensor(j_map(m), j_map_adjoint(n))
        @ eta(index)
    )
    rhs = eta(index.swapped())
    return lhs == (-rhs if index.h % 2 else rhs)


def alpha_cross_check(index: CGIndex, provider: Optional[EpsilonProvider] = None) -> bool:
    """True iff the closed-form and operator constructions of alpha agree."""
    table = provider(index) if provider else None
    return alpha_closed(index, table) == alpha_via_operators(index)
