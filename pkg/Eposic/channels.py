"""
EPOSIC channels

    Phi_{m,n,h}(A) = Tr_{P_n}(alpha A alpha^*),   End(P_r) -> End(P_m),

with their Kraus operators T_j = (I (x) f_j^*) alpha, Choi matrices, the
enumeration EC(r, m) of extreme points, complementary channels and duals.
Also hosts ``Superoperator`` (a map given by its Choi matrix) and the
channel verification used for arbitrary maps.
"""

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from Eposic import config
from Eposic.clebsch import (
    CGIndex,
    EpsilonTable,
    alpha_closed,
    alpha_via_operators,
    bispace,
    epsilon_table,
    eta,
    projection_q,
)
from Eposic.errors import InvalidDegree, ShapeMismatch, VerificationFailure
from Eposic.exact_scalar import ONE, ZERO, ExactScalar, Sign, real_sign
from Eposic.polyspaces import (
    POOL,
    G0,
    GroupElement,
    LinOp,
    SpaceLabel,
    basis_operator,
    conj_rep,
    flip,
    hs_inner,
    identity,
    j_map,
    j_map_adjoint,
    outer,
    partial_trace,
    random_su2,
    rho_matrix,
    rho_matrix_float,
    space,
    tensor,
    vec,
)

# --------------------------------------------------------------------------- #
# Types
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators T_0..T_n: P_r -> P_m."""

    operators: Tuple[LinOp, ...]

    def __len__(self) -> int:
        return len(self.operators)

    def __getitem__(self, j: int) -> LinOp:
        return self.operators[j]

    def completeness(self) -> LinOp:
        total = None
        for T in self.operators:
            term = T.adjoint() @ T
            total = term if total is None else total + term
        return total

    def is_complete(self) -> bool:
        return self.completeness() == identity(self.operators[0].domain)


class EposicChannel:
    """Phi_{m,n,h} with write-once Kraus and Choi caches."""

    def __init__(self, index: CGIndex):
        self.index = index
        self._lock = threading.Lock()
        self._kraus: Optional[KrausSet] = None
        self._choi: Optional[LinOp] = None

    @classmethod
    def of(cls, m: int, n: int, h: int) -> "EposicChannel":
        return cls(CGIndex(m, n, h))

    @property
    def m(self) -> int:
        return self.index.m

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def h(self) -> int:
        return self.index.h

    @property
    def r(self) -> int:
        return self.index.r

    @property
    def input_space(self) -> SpaceLabel:
        return space(self.r)

    @property
    def output_space(self) -> SpaceLabel:
        return space(self.m)

    def _cached(self, attr: str, builder: Callable):
        value = getattr(self, attr)
        if value is not None:
            return value
        built = builder()
        with self._lock:
            if getattr(self, attr) is None:
                setattr(self, attr, built)
            return getattr(self, attr)

    def kraus(self) -> KrausSet:
        return self._cached("_kraus", lambda: _build_kraus(self.index))

    def choi(self) -> LinOp:
        return self._cached("_choi", lambda: _build_choi(self))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EposicChannel):
            return NotImplemented
        return self.index == other.index

    def __hash__(self) -> int:
        return hash(self.index)

    def __repr__(self) -> str:
        return f"EposicChannel{self.index}"


# --------------------------------------------------------------------------- #
# Kraus operators
# --------------------------------------------------------------------------- #


def _build_kraus(index: CGIndex, table: Optional[EpsilonTable] = None) -> KrausSet:
    # T_j(f_i) = epsilon_i^j f_{l_ij} for j in B(i)
    table = table if table is not None else epsilon_table(index)
    per_j: Dict[int, Dict[Tuple[int, int], ExactScalar]] = {j: {} for j in range(index.n + 1)}
    for (i, j), value in table.values.items():
        per_j[j][(index.l(i, j), i)] = value
    domain, codomain = space(index.r), space(index.m)
    return KrausSet(tuple(LinOp(domain, codomain, per_j[j]) for j in range(index.n + 1)))


def kraus_ops(ch: EposicChannel) -> KrausSet:
    return ch.kraus()


def _bra_second(m: int, n: int, j: int) -> LinOp:
    # I (x) f_j^* : P_m (x) P_n -> P_m
    return LinOp(bispace(m, n), space(m), {(l, l * (n + 1) + j): ONE for l in range(m + 1)})


def kraus_via_stinespring(ch: EposicChannel) -> KrausSet:
    """T_j = (I (x) f_j^*) alpha with alpha from the differential operators."""
    a = alpha_via_operators(ch.index)
    return KrausSet(tuple(_bra_second(ch.m, ch.n, j) @ a for j in range(ch.n + 1)))


def kraus_via_r_sets(ch: EposicChannel) -> KrausSet:
    """T_j = sum_{l in R(j)} epsilon^j_{l+j-h} f_l f_{l+j-h}^*.

    R(j) = [max(0, h-j), min(r-j+h, m)].
    """
    idx, table = ch.index, epsilon_table(ch.index)
    m, h, r = idx.m, idx.h, idx.r
    ops = []
    for j in range(idx.n + 1):
        entries = {}
        for l in range(max(0, h - j), min(r - j + h, m) + 1):
            entries[(l, l + j - h)] = table.get(l + j - h, j)
        ops.append(LinOp(space(r), space(m), entries))
    return KrausSet(tuple(ops))


def kraus_adjoint(ch: EposicChannel) -> KrausSet:
    """T_j^*: f_l -> epsilon^j_{l+j-h} f_{l+j-h} for l in R(j)."""
    return KrausSet(tuple(T.adjoint() for T in ch.kraus().operators))


def kraus_cross_check(ch: EposicChannel) -> bool:
    kraus = ch.kraus()
    return (
        kraus.operators == kraus_via_stinespring(ch).operators
        and kraus.operators == kraus_via_r_sets(ch).operators
    )


# --------------------------------------------------------------------------- #
# Application
# --------------------------------------------------------------------------- #


def _check_input(ch: EposicChannel, A: LinOp) -> None:
    if A.domain != ch.input_space or A.codomain != ch.input_space:
        raise ShapeMismatch(f"{ch!r} acts on End({ch.input_space}), got {A!r}")


def apply_via_kraus(ch: EposicChannel, A: LinOp) -> LinOp:
    _check_input(ch, A)
    total = LinOp(ch.output_space, ch.output_space)
    for T in ch.kraus().operators:
        total = total + T @ A @ T.adjoint()
    return total


def apply_via_trace(ch: EposicChannel, A: LinOp) -> LinOp:
    """Tr_{P_n}(alpha A alpha^*)."""
    _check_input(ch, A)
    a = alpha_closed(ch.index)
    return partial_trace(a @ A @ a.adjoint(), side="right")


def apply(ch: EposicChannel, A: LinOp, verify: bool = True) -> LinOp:
    """Phi(A); with ``verify`` the Kraus and partial-trace routes must agree.

    Raises
    ------
    ShapeMismatch
        If ``A`` is not an operator on P_r.
    VerificationFailure
        If the two routes disagree.
    """
    out = apply_via_kraus(ch, A)
    if verify and out != apply_via_trace(ch, A):
        raise VerificationFailure(f"{ch!r}: Kraus and Stinespring applications differ")
    return out


def apply_rank_one(ch: EposicChannel, i1: int, i2: int) -> LinOp:
    """Phi(f_i1 f_i2^*) = sum_{j in B(i1) & B(i2)} eps_i1^j conj(eps_i2^j) f_l f_l'^*."""
    idx, table = ch.index, epsilon_table(ch.index)
    entries: Dict[Tuple[int, int], ExactScalar] = {}
    common = set(idx.b_range(i1)) & set(idx.b_range(i2))
    for j in sorted(common):
        key = (idx.l(i1, j), idx.l(i2, j))
        entries[key] = entries.get(key, ZERO) + table.get(i1, j) * table.get(i2, j).conjugate()
    return LinOp(ch.output_space, ch.output_space, entries)


def adjoint_apply(ch: EposicChannel, B: LinOp) -> LinOp:
    """Phi^*(B) = sum_j T_j^* B T_j."""
    if B.domain != ch.output_space or B.codomain != ch.output_space:
        raise ShapeMismatch(f"Phi^* of {ch!r} acts on End({ch.output_space}), got {B!r}")
    total = LinOp(ch.input_space, ch.input_space)
    for T in ch.kraus().operators:
        total = total + T.adjoint() @ B @ T
    return total


# --------------------------------------------------------------------------- #
# Choi matrices
# --------------------------------------------------------------------------- #


def choi_space(m: int, r: int) -> SpaceLabel:
    return space(m).tensor(space(r, conjugate=True))


def choi_via_vec(ch: EposicChannel) -> LinOp:
    """sum_j Vec(T_j) Vec(T_j)^*."""
    total = LinOp(choi_space(ch.m, ch.r), choi_space(ch.m, ch.r))
    for T in ch.kraus().operators:
        v = vec(T)
        total = total + outer(v, v)
    return total


def choi_from_map(r: int, m: int, fn: Callable[[LinOp], LinOp]) -> LinOp:
    """sum_{i,j} Phi(E_ij) (x) E_ij with E_ij acting on Pbar_r."""
    src, bar = space(r), space(r, conjugate=True)
    total = LinOp(choi_space(m, r), choi_space(m, r))
    for i in range(r + 1):
        for j in range(r + 1):
            image = fn(basis_operator(src, i, j))
            if image:
                total = total + tensor(image, basis_operator(bar, i, j))
    return total


def choi_via_basis(ch: EposicChannel) -> LinOp:
    return choi_from_map(ch.r, ch.m, lambda E: apply(ch, E, verify=False))


def _build_choi(ch: EposicChannel) -> LinOp:
    by_vec = choi_via_vec(ch)
    if by_vec != choi_via_basis(ch):
        raise VerificationFailure(f"{ch!r}: Choi matrix via Vec and via E_ij differ")
    return by_vec


def choi(ch: EposicChannel) -> LinOp:
    return ch.choi()


def choi_projection_check(ch: EposicChannel) -> bool:
    """C(Phi_{m,n,h}) == (r+1)/(n+1) q_{m,r,m-h}."""
    q = projection_q(ch.m, ch.r, ch.m - ch.h)
    return ch.choi() == q.scale(Fraction(ch.r + 1, ch.n + 1))


def choi_nonvanishing_on_eta(ch: EposicChannel) -> bool:
    return not (ch.choi() @ eta(CGIndex(ch.m, ch.r, ch.m - ch.h))).is_zero()


def choi_rank(ch: EposicChannel) -> int:
    """Rank of the Choi matrix, read off as tr of the projection it scales."""
    q = projection_q(ch.m, ch.r, ch.m - ch.h)
    return int(q.trace().as_fraction())


# --------------------------------------------------------------------------- #
# EC(r, m), complements, duals
# --------------------------------------------------------------------------- #


def enumerate_ec(r: int, m: int) -> List[EposicChannel]:
    """The extreme points Phi_{m, r+m-2l, m-l}, l = 0..min(r, m)."""
    if r < 0 or m < 0:
        raise InvalidDegree(f"Degrees must be >= 0, got r={r}, m={m}")
    return [EposicChannel(CGIndex(m, r + m - 2 * l, m - l)) for l in range(min(r, m) + 1)]


def complementary(ch: EposicChannel) -> EposicChannel:
    return EposicChannel(ch.index.swapped())


def complementary_via_trace(ch: EposicChannel, A: LinOp) -> LinOp:
    """Tr_{P_m}(alpha A alpha^*), the environment output."""
    _check_input(ch, A)
    a = alpha_closed(ch.index)
    return partial_trace(a @ A @ a.adjoint(), side="left")


def dual(ch: EposicChannel) -> Tuple[Fraction, EposicChannel]:
    """Phi_{m,n,h}^* = (r+1)/(m+1) Phi_{r,n,n-h}."""
    return Fraction(ch.r + 1, ch.m + 1), EposicChannel(CGIndex(ch.r, ch.n, ch.n - ch.h))


def dual_check(ch: EposicChannel) -> bool:
    """Sum_j T_j^* B T_j equals the scaled dual channel on every E_lk of End(P_m)."""
    scale, other = dual(ch)
    for l in range(ch.m + 1):
        for k in range(ch.m + 1):
            B = basis_operator(ch.output_space, l, k)
            if adjoint_apply(ch, B) != apply(other, B, verify=False).scale(scale):
                return False
    return True


def dual_choi_transform(m: int, r: int) -> LinOp:
    """flip(Pbar_m, P_r) (J_m (x) J_r^*), carrying C(Phi) to C(Phi^*)."""
    return flip(space(m, conjugate=True), space(r)) @ tensor(j_map(m), j_map_adjoint(r))


def dual_choi_check(ch: EposicChannel) -> bool:
    scale, other = dual(ch)
    t = dual_choi_transform(ch.m, ch.r)
    return t @ ch.choi() @ t.adjoint() == other.choi().scale(scale)


def is_unital_channel(ch: EposicChannel) -> bool:
    """Phi(I) == (r+1)/(m+1) I."""
    out = apply(ch, identity(ch.input_space))
    return out == identity(ch.output_space).scale(Fraction(ch.r + 1, ch.m + 1))


def dual_is_channel(ch: EposicChannel) -> bool:
    return ch.n == 2 * ch.h


# --------------------------------------------------------------------------- #
# Symmetries and covariance
# --------------------------------------------------------------------------- #


def kraus_symmetry_check(ch: EposicChannel) -> bool:
    """Check the g0 relation, its Vec form, the flip/J relation and the
    entrywise matrix-element symmetry of the Kraus operators."""
    m, n, h, r = ch.m, ch.n, ch.h, ch.r
    T = ch.kraus().operators
    rm, rr = rho_matrix(m, G0), rho_matrix(r, G0)
    vec_rep = tensor(rm, conj_rep(r, G0))
    swap = dual_choi_transform(m, r)
    for j in range(n + 1):
        sign = -1 if j % 2 else 1
        if rm @ T[j] @ rr.adjoint() != T[n - j].scale(sign):
            return False
        if vec(T[n - j]) != vec_rep.apply(vec(T[j])).scale(sign):
            return False
        lhs = swap.apply(vec(T[n - j]))
        rhs = vec(T[j].adjoint()).scale(-sign if m % 2 else sign)
        if lhs != rhs:
            return False
        hs = -1 if h % 2 else 1
        for l in range(m + 1):
            for i in range(r + 1):
                if T[j].entry(l, i) != T[n - j].entry(m - l, r - i) * hs:
                    return False
    return True


def covariance_check(ch: EposicChannel, pool: Sequence[GroupElement] = POOL) -> bool:
    """Phi(rho_r A rho_r^*) == rho_m Phi(A) rho_m^* on a basis of End(P_r)."""
    for g in pool:
        rr, rm = rho_matrix(ch.r, g), rho_matrix(ch.m, g)
        for i in range(ch.r + 1):
            for k in range(ch.r + 1):
                E = basis_operator(ch.input_space, i, k)
                lhs = apply(ch, rr @ E @ rr.adjoint(), verify=False)
                rhs = rm @ apply(ch, E, verify=False) @ rm.adjoint()
                if lhs != rhs:
                    return False
    return True


def commutant_check(choi_matrix: LinOp, m: int, r: int, pool: Sequence[GroupElement] = POOL) -> bool:
    """C commutes with rho_m(g) (x) conj(rho_r(g)) for every g in ``pool``."""
    for g in pool:
        u = tensor(rho_matrix(m, g), conj_rep(r, g))
        if u @ choi_matrix != choi_matrix @ u:
            return False
    return True


def float_kraus(ch: EposicChannel) -> np.ndarray:
    return np.stack([T.to_numpy() for T in ch.kraus().operators])


def sampled_covariance_error(ch: EposicChannel, samples: int, rng: np.random.Generator) -> float:
    """Largest deviation from covariance over Haar-sampled group elements."""
    kraus = float_kraus(ch)

    def phi(A):
        return np.einsum("jab,bc,jdc->ad", kraus, A, kraus.conj())

    A = rng.standard_normal((ch.r + 1, ch.r + 1)) + 1j * rng.standard_normal((ch.r + 1, ch.r + 1))
    phi_a = phi(A)
    worst = 0.0
    for _ in range(samples):
        a, b = random_su2(rng)
        rr, rm = rho_matrix_float(ch.r, a, b), rho_matrix_float(ch.m, a, b)
        diff = phi(rr @ A @ rr.conj().T) - rm @ phi_a @ rm.conj().T
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


# --------------------------------------------------------------------------- #
# Superoperators given by a Choi matrix
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Superoperator:
    """A linear map End(P_r) -> End(P_m) stored as its Choi matrix on P_m (x) Pbar_r."""

    domain_degree: int
    codomain_degree: int
    choi: LinOp

    def __post_init__(self):
        expected = choi_space(self.codomain_degree, self.domain_degree)
        if self.choi.domain != expected or self.choi.codomain != expected:
            raise ShapeMismatch(f"Choi matrix must act on {expected}, got {self.choi!r}")

    @property
    def r(self) -> int:
        return self.domain_degree

    @property
    def m(self) -> int:
        return self.codomain_degree

    @classmethod
    def from_choi(cls, C: LinOp) -> "Superoperator":
        factors = C.domain.factors
        if len(factors) != 2 or factors[0].conjugate or not factors[1].conjugate:
            raise ShapeMismatch(f"Choi label must be P_m (x) Pbar_r, got {C.domain}")
        return cls(factors[1].degree, factors[0].degree, C)

    @classmethod
    def from_channel(cls, ch: EposicChannel) -> "Superoperator":
        return cls(ch.r, ch.m, ch.choi())

    @classmethod
    def from_kraus(cls, operators: Sequence[LinOp]) -> "Superoperator":
        first = operators[0]
        r, m = first.domain.factors[0].degree, first.codomain.factors[0].degree
        total = LinOp(choi_space(m, r), choi_space(m, r))
        for T in operators:
            v = vec(T)
            total = total + outer(v, v)
        return cls(r, m, total)

    @classmethod
    def from_function(cls, r: int, m: int, fn: Callable[[LinOp], LinOp]) -> "Superoperator":
        return cls(r, m, choi_from_map(r, m, fn))

    @classmethod
    def combination(cls, weighted: Sequence[Tuple[object, "Superoperator"]]) -> "Superoperator":
        """sum_k w_k S_k for Superoperators of the same shape."""
        (w0, s0), rest = weighted[0], weighted[1:]
        total = s0.choi.scale(w0)
        for w, s in rest:
            total = total + s.choi.scale(w)
        return cls(s0.r, s0.m, total)

    def scale(self, c) -> "Superoperator":
        return Superoperator(self.r, self.m, self.choi.scale(c))

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.r, self.m, self.choi + other.choi)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.r, self.m, self.choi - other.choi)

    def apply(self, A: LinOp) -> LinOp:
        """Phi(A)[l, l'] = sum C[(l,i),(l',i')] A[i, i']."""
        if A.domain != space(self.r) or A.codomain != space(self.r):
            raise ShapeMismatch(f"Superoperator acts on End(P{self.r}), got {A!r}")
        dr = self.r + 1
        entries: Dict[Tuple[int, int], ExactScalar] = {}
        for (row, col), c in self.choi.items():
            l, i = divmod(row, dr)
            lp, ip = divmod(col, dr)
            a = A.entry(i, ip)
            if a:
                entries[(l, lp)] = entries.get((l, lp), ZERO) + c * a
        return LinOp(space(self.m), space(self.m), entries)

    def conjugated(self, g: GroupElement) -> "Superoperator":
        """A -> rho_m(g)^* S(rho_r(g) A rho_r(g)^*) rho_m(g)."""
        u = tensor(rho_matrix(self.m, g), conj_rep(self.r, g))
        return Superoperator(self.r, self.m, u.adjoint() @ self.choi @ u)


# --------------------------------------------------------------------------- #
# Verification
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ChannelReport:
    partial_trace_ok: bool
    hermitian: bool
    positive_ok: bool
    positivity_method: str
    min_eigenvalue: Optional[float]
    density_ok: bool

    @property
    def is_channel(self) -> bool:
        return self.partial_trace_ok and self.positive_ok

    def to_dict(self) -> dict:
        return {
            "partial_trace_ok": self.partial_trace_ok,
            "hermitian": self.hermitian,
            "positive_ok": self.positive_ok,
            "positivity_method": self.positivity_method,
            "min_eigenvalue": self.min_eigenvalue,
            "density_ok": self.density_ok,
            "is_channel": self.is_channel,
        }


def q_coordinates(C: LinOp, m: int, r: int) -> Tuple[List[ExactScalar], LinOp]:
    """Eigenvalue mu_l of C on each range of q_{m,r,l}, and the residual
    C - sum_l mu_l q_{m,r,l}."""
    mus, residual = [], C
    for l in range(min(m, r) + 1):
        q = projection_q(m, r, l)
        mu = hs_inner(q, C) / (m + r - 2 * l + 1)
        mus.append(mu)
        residual = residual - q.scale(mu)
    return mus, residual


def _float_min_eigenvalue(C: LinOp) -> float:
    if C.shape[0] == 0:
        return 0.0
    return float(np.min(np.linalg.eigvalsh(C.to_numpy())))


def verify_channel(S: Superoperator, tol: float = config.FLOAT_TOLERANCE) -> ChannelReport:
    """Check Tr_{P_m}(C) == I exactly and C >= 0.

    Positivity is exact when C is diagonal in the q-projection basis (every
    covariant map), otherwise decided from float eigenvalues at ``tol``.
    """
    C = S.choi
    trace_ok = partial_trace(C, side="left") == identity(space(S.r, conjugate=True))
    hermitian = C == C.adjoint()
    mus, residual = q_coordinates(C, S.m, S.r)
    min_eig = _float_min_eigenvalue(C) if hermitian else None
    if hermitian and residual.is_zero() and all(mu.is_real() for mu in mus):
        method = "exact-q-basis"
        positive = all(real_sign(mu) != Sign.NEGATIVE for mu in mus)
    elif hermitian:
        method = "float-eigen"
        positive = min_eig >= -tol
    else:
        method = "not-hermitian"
        positive = False
    density = positive and C.trace() == S.r + 1
    return ChannelReport(trace_ok, hermitian, positive, method, min_eig, density)


def verify_eposic(ch: EposicChannel) -> Dict[str, bool]:
    """All per-channel identities, keyed by name."""
    report = verify_channel(Superoperator.from_channel(ch))
    A = basis_operator(ch.input_space, 0, ch.r)
    return {
        "channel": report.is_channel,
        "choi_projection": choi_projection_check(ch),
        "complementary": complementary_via_trace(ch, A) == apply(complementary(ch), A),
        "dual": dual_check(ch),
        "dual_choi": dual_choi_check(ch),
        "kraus_completeness": ch.kraus().is_complete(),
        "kraus_routes": kraus_cross_check(ch),
        "kraus_symmetry": kraus_symmetry_check(ch),
        "unital": is_unital_channel(ch),
    }
