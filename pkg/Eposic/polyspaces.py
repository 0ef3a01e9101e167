"""
Polynomial spaces P_m, their canonical bases and the SU(2) action.

P_m is the space of homogeneous degree-m polynomials in (x1, x2) with the
orthonormal canonical basis

    f_l^m = x1**l * x2**(m-l) / sqrt(l! (m-l)!),   l = 0..m.

Vectors and operators are stored as exact coefficient lists / sparse exact
matrices over these bases. Tensor products use row-major order with the
leftmost factor varying slowest. The conjugate space Pbar_m shares the
coefficients of P_m and only differs by a label flag.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from Eposic.errors import InvalidDegree, NotUnit, ShapeMismatch
from Eposic.exact_scalar import (
    ONE,
    ZERO,
    ExactScalar,
    GaussianRational,
    as_scalar,
    sqrt_rational,
    to_float,
)

# --------------------------------------------------------------------------- #
# Space labels
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Atom:
    """One tensor factor: P_m or its conjugate Pbar_m."""

    degree: int
    conjugate: bool = False

    @property
    def dim(self) -> int:
        return max(self.degree + 1, 0)

    def conj(self) -> "Atom":
        return Atom(self.degree, not self.conjugate)

    def __str__(self) -> str:
        return f"{'Pbar' if self.conjugate else 'P'}{self.degree}"


@dataclass(frozen=True)
class SpaceLabel:
    """Ordered tensor product of atoms."""

    factors: Tuple[Atom, ...]

    @property
    def dim(self) -> int:
        return math.prod(a.dim for a in self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(a.dim for a in self.factors)

    def conj(self) -> "SpaceLabel":
        return SpaceLabel(tuple(a.conj() for a in self.factors))

    def tensor(self, other: "SpaceLabel") -> "SpaceLabel":
        return SpaceLabel(self.factors + other.factors)

    def split(self, at: int) -> Tuple["SpaceLabel", "SpaceLabel"]:
        return SpaceLabel(self.factors[:at]), SpaceLabel(self.factors[at:])

    def index(self, multi: Sequence[int]) -> int:
        """Flat index of a multi-index (row-major, leftmost slowest)."""
        if len(multi) != len(self.factors):
            raise ShapeMismatch(f"Multi-index {tuple(multi)} does not fit {self}")
        flat = 0
        for k, d in zip(multi, self.dims):
            if not 0 <= k < d:
                raise IndexError(f"Basis index {k} out of range for dimension {d}")
            flat = flat * d + k
        return flat

    def multi_index(self, flat: int) -> Tuple[int, ...]:
        out = []
        for d in reversed(self.dims):
            flat, k = divmod(flat, d)
            out.append(k)
        return tuple(reversed(out))

    def __str__(self) -> str:
        return " (x) ".join(str(a) for a in self.factors) or "C"


def space(m: int, conjugate: bool = False) -> SpaceLabel:
    """Label of the single factor P_m (or Pbar_m)."""
    if m < -1:
        raise InvalidDegree(f"Degree must be >= -1, got {m}")
    return SpaceLabel((Atom(m, conjugate),))


# --------------------------------------------------------------------------- #
# Vectors
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PolyVec:
    """Exact coefficient vector over the canonical basis of ``space``."""

    space: SpaceLabel
    coeffs: Tuple[ExactScalar, ...]

    def __post_init__(self):
        coeffs = tuple(as_scalar(c) for c in self.coeffs)
        if len(coeffs) != self.space.dim:
            raise ShapeMismatch(
                f"{len(coeffs)} coefficients for space {self.space} of dimension {self.space.dim}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, label: SpaceLabel) -> "PolyVec":
        return cls(label, (ZERO,) * label.dim)

    def __add__(self, other: "PolyVec") -> "PolyVec":
        _same_space(self.space, other.space)
        return PolyVec(self.space, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "PolyVec") -> "PolyVec":
        _same_space(self.space, other.space)
        return PolyVec(self.space, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "PolyVec":
        return PolyVec(self.space, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "PolyVec":
        c = as_scalar(c)
        return PolyVec(self.space, tuple(c * a for a in self.coeffs))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def relabel(self, label: SpaceLabel) -> "PolyVec":
        if label.dim != self.space.dim:
            raise ShapeMismatch(f"Cannot relabel {self.space} as {label}")
        return PolyVec(label, self.coeffs)

    def to_numpy(self) -> np.ndarray:
        return np.array([to_float(c) for c in self.coeffs], dtype=complex)


def _same_space(a: SpaceLabel, b: SpaceLabel) -> None:
    if a != b:
        raise ShapeMismatch(f"Space mismatch: {a} vs {b}")


def basis_vector(label: SpaceLabel, *multi: int) -> PolyVec:
    """Canonical basis vector; a single int is taken as the flat index."""
    flat = multi[0] if len(multi) == 1 else label.index(multi)
    coeffs = [ZERO] * label.dim
    coeffs[flat] = ONE
    return PolyVec(label, tuple(coeffs))


def monomial(m: int, l: int) -> PolyVec:
    """The monomial x1**l x2**(m-l) = sqrt(l!(m-l)!) f_l^m."""
    v = basis_vector(space(m), l)
    return v.scale(sqrt_rational(math.factorial(l) * math.factorial(m - l)))


def inner_product(u: PolyVec, v: PolyVec) -> ExactScalar:
    """<u|v>, conjugate-linear in ``u`` and linear in ``v``."""
    _same_space(u.space, v.space)
    total = ZERO
    for a, b in zip(u.coeffs, v.coeffs):
        if a and b:
            total = total + a.conjugate() * b
    return total


def bar(v: PolyVec) -> PolyVec:
    """The vector v viewed in the conjugate space (coefficients conjugated)."""
    return PolyVec(v.space.conj(), tuple(c.conjugate() for c in v.coeffs))


def tensor_vec(u: PolyVec, v: PolyVec) -> PolyVec:
    coeffs = tuple(a * b for a in u.coeffs for b in v.coeffs)
    return PolyVec(u.space.tensor(v.space), coeffs)


# --------------------------------------------------------------------------- #
# Linear operators
# --------------------------------------------------------------------------- #

Entries = Dict[Tuple[int, int], ExactScalar]


class LinOp:
    """Exact matrix between labelled spaces, stored sparsely.

    Row index is the codomain basis, column index the domain basis. Only
    nonzero entries are kept.
    """

    __slots__ = ("domain", "codomain", "_entries")

    def __init__(
        self,
        domain: SpaceLabel,
        codomain: SpaceLabel,
        entries: Optional[Mapping[Tuple[int, int], object]] = None,
    ):
        self.domain = domain
        self.codomain = codomain
        rows, cols = codomain.dim, domain.dim
        clean: Entries = {}
        for (i, j), value in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise ShapeMismatch(f"Entry ({i}, {j}) outside a {rows}x{cols} operator")
            value = as_scalar(value)
            if value:
                clean[(i, j)] = value
        self._entries = clean

    @classmethod
    def _trusted(cls, domain: SpaceLabel, codomain: SpaceLabel, entries: Entries) -> "LinOp":
        obj = cls.__new__(cls)
        obj.domain = domain
        obj.codomain = codomain
        obj._entries = entries
        return obj

    @classmethod
    def from_rows(cls, domain: SpaceLabel, codomain: SpaceLabel, rows: Sequence[Sequence]) -> "LinOp":
        if len(rows) != codomain.dim or any(len(r) != domain.dim for r in rows):
            raise ShapeMismatch(f"Row data does not match {codomain.dim}x{domain.dim}")
        return cls(domain, codomain, {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row)})

    @property
    def shape(self) -> Tuple[int, int]:
        return self.codomain.dim, self.domain.dim

    def entry(self, i: int, j: int) -> ExactScalar:
        return self._entries.get((i, j), ZERO)

    def items(self) -> Iterator[Tuple[Tuple[int, int], ExactScalar]]:
        return iter(sorted(self._entries.items()))

    def nnz(self) -> int:
        return len(self._entries)

    def rows(self) -> List[List[ExactScalar]]:
        out = [[ZERO] * self.domain.dim for _ in range(self.codomain.dim)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def column(self, j: int) -> PolyVec:
        coeffs = [ZERO] * self.codomain.dim
        for (i, k), v in self._entries.items():
            if k == j:
                coeffs[i] = v
        return PolyVec(self.codomain, tuple(coeffs))

    def is_zero(self) -> bool:
        return not self._entries

    def relabel(self, domain: SpaceLabel = None, codomain: SpaceLabel = None) -> "LinOp":
        domain = domain or self.domain
        codomain = codomain or self.codomain
        if domain.dim != self.domain.dim or codomain.dim != self.codomain.dim:
            raise ShapeMismatch(f"Cannot relabel {self.domain}->{self.codomain} as {domain}->{codomain}")
        return LinOp._trusted(domain, codomain, self._entries)

    # arithmetic -----------------------------------------------------------
    def _check_same(self, other: "LinOp") -> None:
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ShapeMismatch(
                f"Operator mismatch: {self.domain}->{self.codomain} vs {other.domain}->{other.codomain}"
            )

    def __add__(self, other: "LinOp") -> "LinOp":
        self._check_same(other)
        out = dict(self._entries)
        for key, v in other._entries.items():
            total = out.get(key, ZERO) + v
            if total:
                out[key] = total
            else:
                out.pop(key, None)
        return LinOp._trusted(self.domain, self.codomain, out)

    def __neg__(self) -> "LinOp":
        return LinOp._trusted(self.domain, self.codomain, {k: -v for k, v in self._entries.items()})

    def __sub__(self, other: "LinOp") -> "LinOp":
        return self + (-other)

    def scale(self, c) -> "LinOp":
        c = as_scalar(c)
        if not c:
            return LinOp._trusted(self.domain, self.codomain, {})
        return LinOp._trusted(self.domain, self.codomain, {k: c * v for k, v in self._entries.items()})

    def __matmul__(self, other: "LinOp") -> "LinOp":
        """Composition ``self o other``."""
        if self.domain != other.codomain:
            raise ShapeMismatch(f"Cannot compose {self.domain}->{self.codomain} after {other.domain}->{other.codomain}")
        by_row: Dict[int, List[Tuple[int, ExactScalar]]] = {}
        for (k, j), b in other._entries.items():
            by_row.setdefault(k, []).append((j, b))
        acc: Entries = {}
        for (i, k), a in self._entries.items():
            for j, b in by_row.get(k, ()):
                key = (i, j)
                prev = acc.get(key)
                acc[key] = a * b if prev is None else prev + a * b
        return LinOp._trusted(other.domain, self.codomain, {k: v for k, v in acc.items() if v})

    def apply(self, v: PolyVec) -> PolyVec:
        _same_space(self.domain, v.space)
        out = [ZERO] * self.codomain.dim
        for (i, j), a in self._entries.items():
            if v.coeffs[j]:
                out[i] = out[i] + a * v.coeffs[j]
        return PolyVec(self.codomain, tuple(out))

    def adjoint(self) -> "LinOp":
        return LinOp._trusted(
            self.codomain, self.domain, {(j, i): v.conjugate() for (i, j), v in self._entries.items()}
        )

    def conjugate_entries(self) -> "LinOp":
        return LinOp._trusted(self.domain, self.codomain, {k: v.conjugate() for k, v in self._entries.items()})

    def trace(self) -> ExactScalar:
        if self.domain.dim != self.codomain.dim:
            raise ShapeMismatch(f"Trace of a non-square operator {self.shape}")
        total = ZERO
        for (i, j), v in self._entries.items():
            if i == j:
                total = total + v
        return total

    def is_diagonal(self) -> bool:
        return all(i == j for i, j in self._entries)

    def diagonal(self) -> List[ExactScalar]:
        return [self.entry(i, i) for i in range(min(self.shape))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinOp):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self._entries == other._entries
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"LinOp({self.domain} -> {self.codomain}, nnz={len(self._entries)})"

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for (i, j), v in self._entries.items():
            out[i, j] = to_float(v)
        return out


# free-function forms -------------------------------------------------------


def identity(label: SpaceLabel) -> LinOp:
    return LinOp._trusted(label, label, {(k, k): ONE for k in range(label.dim)})


def zero_op(domain: SpaceLabel, codomain: SpaceLabel) -> LinOp:
    return LinOp._trusted(domain, codomain, {})


def basis_operator(label: SpaceLabel, l: int, k: int) -> LinOp:
    """E_{lk} = f_l f_k^* with 0-based canonical indices."""
    return LinOp(label, label, {(l, k): ONE})


def outer(x: PolyVec, y: PolyVec) -> LinOp:
    """The rank-one operator x y^* : space(y) -> space(x)."""
    entries = {}
    for i, a in enumerate(x.coeffs):
        if not a:
            continue
        for j, b in enumerate(y.coeffs):
            if b:
                entries[(i, j)] = a * b.conjugate()
    return LinOp._trusted(y.space, x.space, entries)


def compose(*ops: LinOp) -> LinOp:
    """Left-to-right product ``ops[0] @ ops[1] @ ...``."""
    result = ops[-1]
    for op in reversed(ops[:-1]):
        result = op @ result
    return result


def adjoint(A: LinOp) -> LinOp:
    return A.adjoint()


def scalar_mul(c, A: LinOp) -> LinOp:
    return A.scale(c)


def trace(A: LinOp) -> ExactScalar:
    return A.trace()


def hs_inner(A: LinOp, B: LinOp) -> ExactScalar:
    """Hilbert–Schmidt pairing <A|B> = tr(A^* B)."""
    A._check_same(B)
    total = ZERO
    for key, a in A._entries.items():
        b = B._entries.get(key)
        if b is not None:
            total = total + a.conjugate() * b
    return total


def hs_norm_sq(A: LinOp) -> ExactScalar:
    return hs_inner(A, A)


def tensor(A: LinOp, B: LinOp) -> LinOp:
    """Kronecker product A (x) B."""
    rb, cb = B.shape
    entries = {}
    for (i, j), a in A._entries.items():
        for (k, l), b in B._entries.items():
            entries[(i * rb + k, j * cb + l)] = a * b
    return LinOp._trusted(A.domain.tensor(B.domain), A.codomain.tensor(B.codomain), entries)


def flip(H: SpaceLabel, K: SpaceLabel) -> LinOp:
    """The swap h (x) k -> k (x) h from H (x) K to K (x) H."""
    dh, dk = H.dim, K.dim
    entries = {(k * dh + h, h * dk + k): ONE for h in range(dh) for k in range(dk)}
    return LinOp._trusted(H.tensor(K), K.tensor(H), entries)


def vec(T: LinOp) -> PolyVec:
    """Vec(T) in K (x) Hbar for T: H -> K; coefficient T_{ki} at (k, i)."""
    label = T.codomain.tensor(T.domain.conj())
    coeffs = [ZERO] * label.dim
    dh = T.domain.dim
    for (k, i), v in T._entries.items():
        coeffs[k * dh + i] = v
    return PolyVec(label, tuple(coeffs))


def unvec(v: PolyVec, domain: SpaceLabel, codomain: SpaceLabel) -> LinOp:
    """Inverse of :func:`vec`."""
    if v.space != codomain.tensor(domain.conj()):
        raise ShapeMismatch(f"{v.space} is not {codomain} (x) {domain.conj()}")
    dh = domain.dim
    return LinOp(domain, codomain, {divmod(idx, dh): c for idx, c in enumerate(v.coeffs)})


def partial_trace(A: LinOp, side: str = "right", split: int = 1) -> LinOp:
    """Partial trace of an operator on H (x) K.

    Parameters
    ----------
    A : LinOp
        Square operator whose label is H (x) K, with H made of the first
        ``split`` factors.
    side : str
        ``"right"`` traces out K, ``"left"`` traces out H.
    """
    if A.domain != A.codomain or len(A.domain.factors) < 2:
        raise ShapeMismatch(f"Partial trace needs an endomorphism of a tensor space, got {A!r}")
    H, K = A.domain.split(split)
    if not H.factors or not K.factors:
        raise ShapeMismatch(f"Split {split} leaves an empty factor in {A.domain}")
    dk = K.dim
    entries: Entries = {}
    if side == "right":
        for (row, col), v in A._entries.items():
            h1, k1 = divmod(row, dk)
            h2, k2 = divmod(col, dk)
            if k1 == k2:
                entries[(h1, h2)] = entries.get((h1, h2), ZERO) + v
        label = H
    elif side == "left":
        for (row, col), v in A._entries.items():
            h1, k1 = divmod(row, dk)
            h2, k2 = divmod(col, dk)
            if h1 == h2:
                entries[(k1, k2)] = entries.get((k1, k2), ZERO) + v
        label = K
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return LinOp._trusted(label, label, {k: v for k, v in entries.items() if v})


# --------------------------------------------------------------------------- #
# SU(2)
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GroupElement:
    """The SU(2) matrix [[a, b], [-conj(b), conj(a)]]."""

    a: ExactScalar
    b: ExactScalar

    def __post_init__(self):
        object.__setattr__(self, "a", as_scalar(self.a))
        object.__setattr__(self, "b", as_scalar(self.b))
        if self.a.abs_sq() + self.b.abs_sq() != ONE:
            raise NotUnit(f"|a|^2 + |b|^2 != 1 for a={self.a}, b={self.b}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        a, b = self.a, self.b
        c, d = other.a, other.b
        return GroupElement(a * c - b * d.conjugate(), a * d + b * c.conjugate())

    def conjugate(self) -> "GroupElement":
        return GroupElement(self.a.conjugate(), self.b.conjugate())

    def inverse(self) -> "GroupElement":
        return GroupElement(self.a.conjugate(), -self.b)


def _gaussian(re, im=0) -> ExactScalar:
    return as_scalar(GaussianRational(Fraction(re), Fraction(im)))


IDENTITY = GroupElement(ONE, ZERO)
G0 = GroupElement(ZERO, ONE)

# Exact test points with Gaussian-rational entries
POOL: Tuple[GroupElement, ...] = (
    IDENTITY,
    G0,
    GroupElement(_gaussian(Fraction(3, 5)), _gaussian(Fraction(4, 5))),
    GroupElement(_gaussian(Fraction(3, 5), Fraction(4, 5)), ZERO),
    GroupElement(_gaussian(Fraction(5, 13)), _gaussian(0, Fraction(12, 13))),
)


def group_multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return g * h


def _rho_entry_coeffs(m: int) -> Dict[Tuple[int, int], ExactScalar]:
    return {
        (k, l): sqrt_rational(
            Fraction(
                math.factorial(k) * math.factorial(m - k),
                math.factorial(l) * math.factorial(m - l),
            )
        )
        for k in range(m + 1)
        for l in range(m + 1)
    }


def rho_matrix(m: int, g: GroupElement) -> LinOp:
    """Matrix of rho_m(g) on the canonical basis of P_m.

    f_l is sent to a_m^l (a x1 - conj(b) x2)^l (b x1 + conj(a) x2)^(m-l),
    expanded binomially and rescaled into canonical coordinates.
    """
    if m < 0:
        raise InvalidDegree(f"Degree must be >= 0, got {m}")
    a, b = g.a, g.b
    ab, mbb = a.conjugate(), -b.conjugate()
    pow_a = [a ** p for p in range(m + 1)]
    pow_mbb = [mbb ** p for p in range(m + 1)]
    pow_b = [b ** p for p in range(m + 1)]
    pow_ab = [ab ** p for p in range(m + 1)]
    scale = _rho_entry_coeffs(m)
    entries: Entries = {}
    for l in range(m + 1):
        for k in range(m + 1):
            total = ZERO
            for p in range(max(0, k - (m - l)), min(l, k) + 1):
                q = k - p
                term = pow_a[p] * pow_mbb[l - p] * pow_b[q] * pow_ab[m - l - q]
                if term:
                    total = total + term * (math.comb(l, p) * math.comb(m - l, q))
            if total:
                entries[(k, l)] = total * scale[(k, l)]
    label = space(m)
    return LinOp._trusted(label, label, entries)


def conj_rep(m: int, g: GroupElement) -> LinOp:
    """The conjugate representation on Pbar_m (entrywise conjugate of rho_m)."""
    label = space(m, conjugate=True)
    return rho_matrix(m, g).conjugate_entries().relabel(label, label)


def theta_map(m: int) -> LinOp:
    """Theta_m: P_m -> Pbar_m, identity on coefficients."""
    return identity(space(m)).relabel(codomain=space(m, conjugate=True))


def j_map(m: int) -> LinOp:
    """J_m = Theta_m rho_m(g0): f_l -> (-1)^l fbar_{m-l}."""
    return theta_map(m) @ rho_matrix(m, G0)


def j_map_adjoint(m: int) -> LinOp:
    """J_m^*: Pbar_m -> P_m, fbar_l -> (-1)^(m-l) f_{m-l}."""
    return j_map(m).adjoint()


def rep_on(label: SpaceLabel, g: GroupElement) -> LinOp:
    """The group action on an arbitrary tensor label, factor by factor."""
    ops = [conj_rep(a.degree, g) if a.conjugate else rho_matrix(a.degree, g) for a in label.factors]
    result = ops[0]
    for op in ops[1:]:
        result = tensor(result, op)
    return result


# --------------------------------------------------------------------------- #
# Float sampling
# --------------------------------------------------------------------------- #


def random_su2(rng: np.random.Generator) -> Tuple[complex, complex]:
    """Haar-distributed (a, b) drawn from the unit 3-sphere."""
    x = rng.standard_normal(4)
    x /= np.linalg.norm(x)
    return complex(x[0], x[1]), complex(x[2], x[3])


def rho_matrix_float(m: int, a: complex, b: complex) -> np.ndarray:
    ab, mbb = a.conjugate(), -b.conjugate()
    out = np.zeros((m + 1, m + 1), dtype=complex)
    fact = [math.factorial(k) for k in range(m + 1)]
    for l in range(m + 1):
        for k in range(m + 1):
            total = 0j
            for p in range(max(0, k - (m - l)), min(l, k) + 1):
                q = k - p
                total += (
                    math.comb(l, p) * math.comb(m - l, q)
                    * a ** p * mbb ** (l - p) * b ** q * ab ** (m - l - q)
                )
            out[k, l] = total * math.sqrt(fact[k] * fact[m - k] / (fact[l] * fact[m - l]))
    return out
