"""
Analysis of maps End(P_r) -> End(P_m) against the EPOSIC extreme points.

A map given by its Choi matrix C is SU(2)-covariant iff C lies in the span
of the projections q_{m,r,l}; the coefficients over EC(r, m) are

    lambda_l = tr(q_{m,r,l} C) / (r + 1).

The second half of the module treats the family

    Phi_alpha = Phi_{m,m+1,m} - alpha Phi_{m,m-1,m-1}    (r = 1),

which is positive iff alpha <= 1/(m+2) and completely positive iff
alpha <= 0.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from Eposic import config
from Eposic.channels import EposicChannel, Superoperator, apply, choi_space
from Eposic.channels import commutant_check as _choi_commutes
from Eposic.clebsch import CGIndex, projection_q
from Eposic.errors import InvalidDegree, NotUnit, ShapeMismatch, VerificationFailure
from Eposic.exact_scalar import ONE, ZERO, ExactScalar, Sign, real_sign, sqrt_rational
from Eposic.polyspaces import (
    POOL,
    GroupElement,
    LinOp,
    PolyVec,
    basis_operator,
    basis_vector,
    hs_inner,
    inner_product,
    outer,
    rho_matrix,
    space,
)

# --------------------------------------------------------------------------- #
# Decomposition over EC(r, m)
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class CovariantDecomposition:
    r: int
    m: int
    lambdas: Tuple[ExactScalar, ...]
    residual_norm_sq: ExactScalar

    @property
    def in_span(self) -> bool:
        return self.residual_norm_sq.is_zero()

    def channel_index(self, l: int) -> CGIndex:
        """Index of the extreme point carrying lambda_l."""
        return CGIndex(self.m, self.m + self.r - 2 * l, self.m - l)


def decompose(S: Superoperator) -> CovariantDecomposition:
    """Coefficients of S over EC(r, m) and the squared norm of what is left."""
    m, r, C = S.m, S.r, S.choi
    if C.shape != ((m + 1) * (r + 1),) * 2:
        raise ShapeMismatch(f"Choi matrix of shape {C.shape} for r={r}, m={m}")
    lambdas, residual = [], C
    for l in range(min(r, m) + 1):
        q = projection_q(m, r, l)
        lam = hs_inner(q, C) / (r + 1)
        lambdas.append(lam)
        residual = residual - q.scale(lam * Fraction(r + 1, m + r - 2 * l + 1))
    return CovariantDecomposition(r, m, tuple(lambdas), hs_inner(residual, residual))


def recompose(r: int, m: int, lambdas: Sequence) -> Superoperator:
    """sum_l lambda_l Phi_{m, m+r-2l, m-l}."""
    C = LinOp(choi_space(m, r), choi_space(m, r))
    for l, lam in enumerate(lambdas):
        ch = EposicChannel(CGIndex(m, m + r - 2 * l, m - l))
        C = C + ch.choi().scale(lam)
    return Superoperator(r, m, C)


# --------------------------------------------------------------------------- #
# Classification
# --------------------------------------------------------------------------- #


class Category(Enum):
    COVARIANT_CHANNEL = "covariant_channel"
    COVARIANT_CP_MULTIPLE = "covariant_cp_multiple"
    COVARIANT_NOT_CP = "covariant_not_cp"
    NOT_COVARIANT = "not_covariant"


NOT_N_POSITIVE_NOTE = "positive but not completely positive: not n-positive for any n > 1"


@dataclass(frozen=True)
class SampledPositivity:
    status: str
    min_sampled_eigenvalue: float
    samples: int


@dataclass(frozen=True)
class ClassificationResult:
    category: Category
    decomposition: CovariantDecomposition
    extreme: bool = False
    positive: Optional[bool] = None
    n_positive_note: Optional[str] = None
    # float search, run whenever exact positivity is not decided
    sampled: Optional[SampledPositivity] = None


def _nonnegative(x: ExactScalar) -> bool:
    return x.is_real() and real_sign(x) != Sign.NEGATIVE


def _sampled_verdict(S: Superoperator, samples: Optional[int]) -> Tuple[Optional[bool], SampledPositivity]:
    search = sampled_positivity(S, config.SAMPLE_COUNT if samples is None else samples)
    return (False if search.status == "not_positive" else None), search


def classify(S: Superoperator, samples: Optional[int] = None) -> ClassificationResult:
    """Place S in its category.

    When positivity cannot be decided exactly (non-covariant maps, or
    covariant non-CP maps out of End(P_r) with r > 1) a sampled search over
    ``samples`` unit vectors runs; it can only prove non-positivity.
    """
    decomposition = decompose(S)
    if not decomposition.in_span:
        positive, search = _sampled_verdict(S, samples)
        return ClassificationResult(Category.NOT_COVARIANT, decomposition, positive=positive, sampled=search)
    lambdas = decomposition.lambdas
    if all(_nonnegative(lam) for lam in lambdas):
        total = sum(lambdas, ZERO)
        if total == ONE:
            nonzero = [lam for lam in lambdas if lam]
            extreme = len(nonzero) == 1 and nonzero[0] == ONE
            return ClassificationResult(Category.COVARIANT_CHANNEL, decomposition, extreme, True)
        return ClassificationResult(Category.COVARIANT_CP_MULTIPLE, decomposition, positive=True)
    if S.r == 1:
        positive, search = covariant_positivity_from_p1(S), None
    else:
        positive, search = _sampled_verdict(S, samples)
    note = NOT_N_POSITIVE_NOTE if positive else None
    return ClassificationResult(
        Category.COVARIANT_NOT_CP, decomposition, positive=positive, n_positive_note=note, sampled=search
    )


def covariant_positivity_from_p1(S: Superoperator) -> bool:
    """Positivity of a covariant map out of End(P_1).

    Every unit h in P_1 is rho_1(g_h) f_0, so S(hh^*) is unitarily equivalent
    to S(E_11) and positivity reduces to that one matrix, which is diagonal
    for covariant maps.
    """
    if S.r != 1:
        raise InvalidDegree(f"Reduction to E_11 needs r = 1, got r={S.r}")
    image = S.apply(basis_operator(space(1), 0, 0))
    if not image.is_diagonal():
        raise VerificationFailure("S(E_11) of a covariant map must be diagonal")
    return all(_nonnegative(d) for d in image.diagonal())


def sampled_positivity(
    S: Superoperator,
    samples: int = config.SAMPLE_COUNT,
    rng: Optional[np.random.Generator] = None,
    tol: float = config.FLOAT_TOLERANCE,
) -> SampledPositivity:
    """Search float unit vectors v for a negative eigenvalue of S(vv^*).

    A hit means S is not positive; no hit leaves the question open.
    """
    rng = rng or np.random.default_rng(config.SAMPLE_SEED)
    m1, r1 = S.m + 1, S.r + 1
    C = S.choi.to_numpy().reshape(m1, r1, m1, r1)
    worst = float("inf")
    for _ in range(samples):
        v = rng.standard_normal(r1) + 1j * rng.standard_normal(r1)
        v /= np.linalg.norm(v)
        image = np.einsum("aibj,i,j->ab", C, v, v.conj())
        image = (image + image.conj().T) / 2
        worst = min(worst, float(np.min(np.linalg.eigvalsh(image))))
    status = "not_positive" if worst < -tol else "unknown"
    return SampledPositivity(status, worst, samples)


def commutant_check(S: Superoperator, pool: Sequence[GroupElement] = POOL) -> bool:
    """C(S) commutes with rho_m(g) (x) conj(rho_r(g)) on every pool element."""
    return _choi_commutes(S.choi, S.m, S.r, pool)


# --------------------------------------------------------------------------- #
# The positive, not completely positive family
# --------------------------------------------------------------------------- #

PLUS, MINUS = "plus", "minus"


def family_channel(m: int, branch: str) -> EposicChannel:
    if m < 1:
        raise InvalidDegree(f"The family needs m >= 1, got m={m}")
    if branch == PLUS:
        return EposicChannel(CGIndex(m, m + 1, m))
    if branch == MINUS:
        return EposicChannel(CGIndex(m, m - 1, m - 1))
    raise ValueError(f"branch must be {PLUS!r} or {MINUS!r}, got {branch!r}")


def _expected_e11_diagonal(m: int, branch: str) -> List[Fraction]:
    if branch == PLUS:
        return [Fraction(2 * (k + 1), (m + 1) * (m + 2)) for k in range(m + 1)]
    return [Fraction(2 * (m - k), m * (m + 1)) for k in range(m)] + [Fraction(0)]


def phi_e11_diagonal(m: int, branch: str) -> List[ExactScalar]:
    """Diagonal of Phi(E_11), E_11 = f_0 f_0^*, for the plus or minus channel.

    Index k of the result is the 0-based f-index; the entry at 1-based
    position m-j+1 is the one written 2(m-j+1)/((m+1)(m+2)) for plus.
    """
    ch = family_channel(m, branch)
    image = apply(ch, basis_operator(space(1), 0, 0))
    if not image.is_diagonal():
        raise VerificationFailure(f"{ch!r}(E_11) is not diagonal")
    diagonal = image.diagonal()
    expected = _expected_e11_diagonal(m, branch)
    if [d.as_fraction() for d in diagonal] != expected:
        raise VerificationFailure(f"{ch!r}(E_11) diagonal {diagonal} != {expected}")
    return diagonal


@dataclass(frozen=True)
class Threshold:
    value: Fraction
    attained_at_j: int


def positivity_threshold_detail(m: int) -> Threshold:
    """min over j of plus/minus diagonal ratios; j is the 1-based E-index offset."""
    plus = [d.as_fraction() for d in phi_e11_diagonal(m, PLUS)]
    minus = [d.as_fraction() for d in phi_e11_diagonal(m, MINUS)]
    best: Optional[Threshold] = None
    for k in range(m + 1):
        if minus[k] == 0:
            continue
        # k = m - 1 - j in the 1-based E-index convention
        candidate = Threshold(plus[k] / minus[k], m - 1 - k)
        if best is None or candidate.value < best.value:
            best = candidate
    return best


def positivity_threshold(m: int) -> Fraction:
    """Largest alpha for which Phi_alpha is positive (equals 1/(m+2))."""
    return positivity_threshold_detail(m).value


@dataclass(frozen=True)
class Witness:
    eigenvalue: ExactScalar
    eigenvector: PolyVec


@dataclass(frozen=True)
class PositivityVerdict:
    m: int
    alpha: Fraction
    is_positive: bool
    is_cp: bool
    witness: Optional[Witness] = None

    @property
    def not_n_positive(self) -> bool:
        return self.is_positive and not self.is_cp


def family_superoperator(m: int, alpha: Fraction) -> Superoperator:
    plus = Superoperator.from_channel(family_channel(m, PLUS))
    minus = Superoperator.from_channel(family_channel(m, MINUS))
    return plus - minus.scale(alpha)


def witness_vector(m: int) -> PolyVec:
    """sqrt(m) f_0^m (x) fbar_0^1 + f_1^m (x) fbar_1^1."""
    label = choi_space(m, 1)
    return basis_vector(label, 0, 0).scale(sqrt_rational(m)) + basis_vector(label, 1, 1)


def analyze_family(m: int, alpha: Fraction) -> PositivityVerdict:
    """Exact positivity / complete positivity of Phi_alpha with a Choi witness.

    Raises
    ------
    InvalidDegree
        If ``m < 1``.
    VerificationFailure
        If the witness is not an eigenvector with eigenvalue -2 alpha / m.
    """
    alpha = Fraction(alpha)
    plus = phi_e11_diagonal(m, PLUS)
    minus = phi_e11_diagonal(m, MINUS)
    is_positive = all(_nonnegative(p - mi * alpha) for p, mi in zip(plus, minus))
    is_cp = alpha <= 0
    witness = None
    if not is_cp:
        v = witness_vector(m)
        eigenvalue = ExactScalar.from_fraction(-2 * alpha / m)
        image = family_superoperator(m, alpha).choi.apply(v)
        if image != v.scale(eigenvalue):
            raise VerificationFailure(f"Witness for m={m}, alpha={alpha} is not an eigenvector")
        witness = Witness(eigenvalue, v)
    return PositivityVerdict(m, alpha, is_positive, is_cp, witness)


def group_orbit_unit(h: PolyVec) -> GroupElement:
    """g_h = [[conj(u0), u1], [-conj(u1), u0]], so that rho_1(g_h) f_0 = h.

    Raises
    ------
    NotUnit
        If <h|h> != 1.
    """
    if h.space != space(1):
        raise ShapeMismatch(f"group_orbit_unit needs a vector of P1, got {h.space}")
    if inner_product(h, h) != ONE:
        raise NotUnit(f"<h|h> = {inner_product(h, h)}, expected 1")
    u0, u1 = h.coeffs
    return GroupElement(u0.conjugate(), u1)


def orbit_relation_check(S: Superoperator, h: PolyVec) -> bool:
    """S(hh^*) == rho_m(g_h) S(E_11) rho_m(g_h)^* for a covariant S on End(P_1)."""
    g = group_orbit_unit(h)
    rm = rho_matrix(S.m, g)
    return S.apply(outer(h, h)) == rm @ S.apply(basis_operator(space(1), 0, 0)) @ rm.adjoint()
