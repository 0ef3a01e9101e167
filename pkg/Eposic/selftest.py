"""
Invariant suite run by ``python -m Eposic.cli selftest``.

Each family checks one group of identities for every index up to a degree
bound and returns how many checks ran plus the failures it met. Families
are independent and may run on a thread pool; the report is always sorted
by family name.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from Eposic import config
from Eposic.channels import (
    EposicChannel,
    Superoperator,
    apply,
    choi_projection_check,
    choi_rank,
    choi_space,
    complementary,
    complementary_via_trace,
    dual_check,
    enumerate_ec,
    is_unital_channel,
    kraus_cross_check,
    kraus_symmetry_check,
    covariance_check,
    sampled_covariance_error,
    verify_channel,
)
from Eposic.clebsch import (
    CGIndex,
    EpsilonProvider,
    alpha_closed,
    alpha_cross_check,
    all_indices,
    bispace,
    cg_coefficient_closed,
    cg_coefficient_recursive,
    epsilon_table,
    eta,
    flip_alpha_identity_check,
    flip_eta_identity_check,
    projection_q,
)
from Eposic.covariant_analysis import analyze_family, decompose, positivity_threshold, recompose
from Eposic.errors import EposicError
from Eposic.exact_scalar import ONE, sqrt_rational
from Eposic.polyspaces import (
    POOL,
    basis_operator,
    conj_rep,
    flip,
    identity,
    j_map,
    rho_matrix,
    space,
    tensor,
)

FamilyResult = Tuple[int, List[str], int]


@dataclass
class FamilyReport:
    name: str
    degree: int
    checks: int
    failures: List[str] = field(default_factory=list)
    # float group elements drawn; 0 for exact-only families
    samples: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "degree": self.degree,
            "checks": self.checks,
            "samples": self.samples,
            "failures": self.failures,
        }


@dataclass
class SelftestReport:
    max_degree: int
    families: List[FamilyReport]

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families)

    def failed_names(self) -> List[str]:
        return [f.name for f in self.families if not f.passed]

    def to_dict(self) -> dict:
        return {
            "max_degree": self.max_degree,
            "passed": self.passed,
            "families": [f.to_dict() for f in self.families],
        }


class _Counter:
    def __init__(self):
        self.checks = 0
        self.failures: List[str] = []
        self.samples = 0

    def expect(self, ok: bool, what: str) -> None:
        self.checks += 1
        if not ok:
            self.failures.append(what)

    def result(self) -> FamilyResult:
        return self.checks, self.failures, self.samples


# ----------------------------------------------------------------------
# Families
# ----------------------------------------------------------------------
def _exact_scalar_ring(d: int, provider) -> FamilyResult:
    c = _Counter()
    rationals = [Fraction(p, s) for p in range(0, 13) for s in (1, 2, 3, 7)]
    values = [sqrt_rational(q) for q in rationals]
    for q, x in zip(rationals, values):
        c.expect(x * x == q, f"sqrt({q}) squared")
        c.expect(x.conjugate().conjugate() == x, f"double conjugate of {x}")
        for y in values[:8]:
            c.expect(x * y == y * x, f"commutativity {x}, {y}")
            c.expect((x + y) * x == x * x + y * x, f"distributivity {x}, {y}")
    return c.result()


def _rho_homomorphism(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(d + 1):
        for g in POOL:
            rg = rho_matrix(m, g)
            c.expect(rg @ rg.adjoint() == identity(space(m)), f"rho_{m} unitary")
            for h in POOL:
                c.expect(rho_matrix(m, g * h) == rg @ rho_matrix(m, h), f"rho_{m} homomorphism")
    return c.result()


def _j_equivariance(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(d + 1):
        J = j_map(m)
        c.expect(J @ J.adjoint() == identity(space(m, conjugate=True)), f"J_{m} unitary")
        for g in POOL:
            c.expect(J @ rho_matrix(m, g) == conj_rep(m, g) @ J, f"J_{m} equivariant")
    return c.result()


def _flip_j_relation(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(d + 1):
        for n in range(d + 1):
            lhs = flip(space(m, conjugate=True), space(n)) @ tensor(j_map(m), identity(space(n)))
            rhs = tensor(identity(space(n)), j_map(m)) @ flip(space(m), space(n))
            c.expect(lhs == rhs, f"flip/J relation m={m} n={n}")
    return c.result()


def _cg_recursion(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        c.expect(
            cg_coefficient_closed(idx.m, idx.n, idx.h) == cg_coefficient_recursive(idx.m, idx.n, idx.h),
            f"c{idx} closed vs recursive",
        )
    return c.result()


def _alpha_cross_construction(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        c.expect(alpha_cross_check(idx, provider), f"alpha{idx} closed vs operators")
    return c.result()


def _alpha_isometry(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        a = alpha_closed(idx)
        c.expect(a.adjoint() @ a == identity(space(idx.r)), f"alpha{idx} isometry")
    return c.result()


def _alpha_completeness(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(d + 1):
        for n in range(d + 1):
            total = None
            alphas = [alpha_closed(CGIndex(m, n, h)) for h in range(min(m, n) + 1)]
            for a in alphas:
                total = a @ a.adjoint() if total is None else total + a @ a.adjoint()
            c.expect(total == identity(bispace(m, n)), f"completeness m={m} n={n}")
            for h, a in enumerate(alphas):
                for s, b in enumerate(alphas):
                    if h != s:
                        c.expect((a.adjoint() @ b).is_zero(), f"orthogonality ({m},{n},{h}|{s})")
    return c.result()


def _alpha_equivariance(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        a = alpha_closed(idx)
        for g in POOL:
            lhs = tensor(rho_matrix(idx.m, g), rho_matrix(idx.n, g)) @ a
            c.expect(lhs == a @ rho_matrix(idx.r, g), f"alpha{idx} equivariant")
    return c.result()


def _epsilon_symmetries(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        table, swapped = epsilon_table(idx), epsilon_table(idx.swapped())
        sign = -1 if idx.h % 2 else 1
        for (i, j), v in table.items():
            c.expect(v == table.get(idx.r - i, idx.n - j) * sign, f"eps{idx} reflection at ({i},{j})")
            c.expect(v == swapped.get(i, idx.l(i, j)) * sign, f"eps{idx} swap at ({i},{j})")
    return c.result()


def _eta_projections(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(d + 1):
        for r in range(d + 1):
            total = None
            for l in range(min(m, r) + 1):
                e = eta(CGIndex(m, r, l))
                c.expect(e.adjoint() @ e == identity(space(m + r - 2 * l)), f"eta({m},{r},{l}) isometry")
                q = projection_q(m, r, l)
                total = q if total is None else total + q
            c.expect(total == identity(choi_space(m, r)), f"sum of q for m={m} r={r}")
    return c.result()


def _flip_alpha(d: int, provider) -> FamilyResult:
    c = _Counter()
    for idx in all_indices(d):
        c.expect(flip_alpha_identity_check(idx), f"flip alpha{idx}")
        c.expect(flip_eta_identity_check(idx), f"flip eta{idx}")
    return c.result()


def _channels(d: int) -> List[EposicChannel]:
    return [EposicChannel(idx) for idx in all_indices(d)]


def _kraus_completeness(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(ch.kraus().is_complete(), f"{ch!r} Kraus completeness")
        c.expect(kraus_cross_check(ch), f"{ch!r} Kraus constructions")
    return c.result()


def _kraus_symmetries(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(kraus_symmetry_check(ch), f"{ch!r} Kraus symmetries")
    return c.result()


def _channel_routes(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        for i in range(ch.r + 1):
            for k in range(ch.r + 1):
                try:
                    apply(ch, basis_operator(ch.input_space, i, k))
                    c.expect(True, "")
                except EposicError as exc:
                    c.expect(False, f"{ch!r} on E_{i}{k}: {exc}")
    return c.result()


def _choi_projection(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(choi_projection_check(ch), f"{ch!r} Choi projection form")
        c.expect(ch.choi().trace() == ch.r + 1, f"{ch!r} Choi trace")
        c.expect(choi_rank(ch) == ch.n + 1, f"{ch!r} Choi rank")
        c.expect(verify_channel(Superoperator.from_channel(ch)).is_channel, f"{ch!r} channel axioms")
    return c.result()


def _channel_covariance(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(covariance_check(ch), f"{ch!r} covariance")
    return c.result()


def _unitality(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(is_unital_channel(ch), f"{ch!r} unitality")
    return c.result()


def _complementary(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        A = basis_operator(ch.input_space, 0, ch.r) + identity(ch.input_space)
        c.expect(complementary_via_trace(ch, A) == apply(complementary(ch), A), f"{ch!r} complement")
    return c.result()


def _dual(d: int, provider) -> FamilyResult:
    c = _Counter()
    for ch in _channels(d):
        c.expect(dual_check(ch), f"{ch!r} dual")
    return c.result()


def _ec_enumeration(d: int, provider) -> FamilyResult:
    c = _Counter()
    for r in range(d + 1):
        for m in range(d + 1):
            c.expect(len(enumerate_ec(r, m)) == min(r, m) + 1, f"|EC({r},{m})|")
    return c.result()


def _decomposition_roundtrip(d: int, provider) -> FamilyResult:
    c = _Counter()
    for r in range(d + 1):
        for m in range(d + 1):
            k = min(r, m) + 1
            weights = [Fraction(l + 1, k * (k + 1) // 2) for l in range(k)]
            result = decompose(recompose(r, m, weights))
            c.expect(result.in_span, f"roundtrip residual r={r} m={m}")
            c.expect(list(result.lambdas) == [ONE * w for w in weights], f"roundtrip weights r={r} m={m}")
    return c.result()


def _positivity_family(d: int, provider) -> FamilyResult:
    c = _Counter()
    for m in range(1, d + 1):
        c.expect(positivity_threshold(m) == Fraction(1, m + 2), f"threshold m={m}")
        for alpha in (Fraction(1, 8), Fraction(1, 3), Fraction(1)):
            try:
                verdict = analyze_family(m, alpha)
                c.expect(verdict.is_positive == (alpha <= Fraction(1, m + 2)), f"positivity m={m} alpha={alpha}")
            except EposicError as exc:
                c.expect(False, f"family m={m} alpha={alpha}: {exc}")
    return c.result()


def _covariance_sampling(d: int, provider) -> FamilyResult:
    c = _Counter()
    rng = np.random.default_rng(config.SAMPLE_SEED)
    channels = _channels(d)
    per_channel = -(-config.SAMPLE_COUNT // len(channels))
    for ch in channels:
        err = sampled_covariance_error(ch, per_channel, rng)
        c.samples += per_channel
        c.expect(err < config.FLOAT_TOLERANCE, f"{ch!r} sampled covariance error {err:.3e}")
    return c.result()


FAMILIES: Dict[str, Callable[[int, Optional[EpsilonProvider]], FamilyResult]] = {
    "alpha_completeness": _alpha_completeness,
    "alpha_cross_construction": _alpha_cross_construction,
    "alpha_equivariance": _alpha_equivariance,
    "alpha_isometry": _alpha_isometry,
    "cg_recursion": _cg_recursion,
    "channel_covariance": _channel_covariance,
    "channel_routes": _channel_routes,
    "choi_projection": _choi_projection,
    "complementary": _complementary,
    "covariance_sampling": _covariance_sampling,
    "decomposition_roundtrip": _decomposition_roundtrip,
    "dual": _dual,
    "ec_enumeration": _ec_enumeration,
    "epsilon_symmetries": _epsilon_symmetries,
    "eta_projections": _eta_projections,
    "exact_scalar_ring": _exact_scalar_ring,
    "flip_alpha": _flip_alpha,
    "flip_j_relation": _flip_j_relation,
    "j_equivariance": _j_equivariance,
    "kraus_completeness": _kraus_completeness,
    "kraus_symmetries": _kraus_symmetries,
    "positivity_family": _positivity_family,
    "rho_homomorphism": _rho_homomorphism,
    "unitality": _unitality,
}


def _run_family(name: str, max_degree: int, provider) -> FamilyReport:
    try:
        checks, failures, samples = FAMILIES[name](max_degree, provider)
    except Exception as exc:
        return FamilyReport(name, max_degree, 0, [f"raised {type(exc).__name__}: {exc}"])
    return FamilyReport(name, max_degree, checks, failures, samples)


def run_selftest(
    max_degree: int = config.DEFAULT_SELFTEST_DEGREE,
    workers: int = 1,
    provider: Optional[EpsilonProvider] = None,
    only: Optional[List[str]] = None,
) -> SelftestReport:
    """Run the invariant families up to ``max_degree``.

    Parameters
    ----------
    provider : callable, optional
        Source of epsilon tables for the cross-construction family; a test
        fixture can pass a corrupted one.
    only : list of str, optional
        Restrict to the named families.
    """
    if max_degree < 1:
        raise ValueError(f"max_degree must be >= 1, got {max_degree}")
    names = sorted(only or FAMILIES)
    unknown = [n for n in names if n not in FAMILIES]
    if unknown:
        raise ValueError(f"Unknown selftest families: {', '.join(unknown)}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda n: _run_family(n, max_degree, provider), names))
    else:
        reports = [_run_family(n, max_degree, provider) for n in names]
    return SelftestReport(max_degree, sorted(reports, key=lambda r: r.name))
