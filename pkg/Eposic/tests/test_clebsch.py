import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from Eposic.clebsch import (
    CGIndex,
    all_indices,
    alpha_adjoint_via_operators,
    alpha_closed,
    alpha_cross_check,
    alpha_via_operators,
    beta,
    cg_coefficient,
    cg_coefficient_closed,
    cg_coefficient_recursive,
    cg_expand,
    compute_epsilon_table,
    delta_xy,
    delta_yx,
    epsilon_table,
    eta,
    flip_alpha_identity_check,
    flip_eta_identity_check,
    gamma_xy,
    omega_xy,
    projection_q,
)
from Eposic.errors import InvalidIndex
from Eposic.exact_scalar import ONE, ZERO, sqrt_rational
from Eposic.polyspaces import POOL, PolyVec, identity, rep_on, rho_matrix, space

SMALL = all_indices(3)


class TestCoefficients(unittest.TestCase):
    def test_known_values(self):
        for m in range(9):
            self.assertEqual(cg_coefficient(m, 0, 0), 1)
        self.assertEqual(cg_coefficient(1, 1, 0), Fraction(1, 2))
        self.assertEqual(cg_coefficient(1, 1, 1), Fraction(1, 2))
        for m in range(1, 6):
            self.assertEqual(cg_coefficient(m, 1, 0), Fraction(1, m + 1))
            self.assertEqual(cg_coefficient(m, 1, 1), Fraction(1, m + 1))

    def test_recursion_matches_closed_form(self):
        for index in all_indices(8):
            self.assertEqual(
                cg_coefficient_recursive(index.m, index.n, index.h),
                cg_coefficient_closed(index.m, index.n, index.h),
                msg=str(index),
            )

    def test_swap_relation(self):
        for index in all_indices(6):
            m, n, h = index.m, index.n, index.h
            ratio = Fraction(_fact(m - h), _fact(n - h)) ** 2
            self.assertEqual(cg_coefficient(m, n, h), ratio * cg_coefficient(n, m, h))

    def test_invalid_index(self):
        for m, n, h in ((1, 1, 2), (-1, 0, 0), (0, 2, 1)):
            with self.assertRaises(InvalidIndex):
                CGIndex(m, n, h)
            with self.assertRaises(InvalidIndex):
                cg_coefficient(m, n, h)

    def test_index_helpers(self):
        index = CGIndex(2, 1, 1)
        self.assertEqual(index.r, 1)
        self.assertEqual(list(index.b_range(0)), [0, 1])
        self.assertEqual(index.l(0, 0), 1)
        self.assertEqual(str(index), "(2,1,1)")
        self.assertEqual(index.swapped(), CGIndex(1, 2, 1))


def _fact(k: int) -> int:
    out = 1
    for v in range(2, k + 1):
        out *= v
    return out


class TestOperators(unittest.TestCase):
    def test_gamma_on_constants(self):
        G = gamma_xy(0, 0)
        # x1 y2 is f_1 (x) f_0, y1 x2 is f_0 (x) f_1
        self.assertEqual(G.entry(2, 0), ONE)
        self.assertEqual(G.entry(1, 0), -ONE)
        self.assertEqual(G.nnz(), 2)

    def test_delta_into_zero_space(self):
        D = delta_xy(0, 0)
        self.assertEqual(D.shape, (0, 1))
        self.assertTrue(D.is_zero())

    def test_omega_gamma_on_constants(self):
        self.assertEqual(omega_xy(1, 1) @ gamma_xy(0, 0), identity(space(0).tensor(space(0))).scale(2))

    def test_adjoint_pairs(self):
        for m in range(4):
            for n in range(4):
                self.assertEqual(gamma_xy(m, n).adjoint(), omega_xy(m + 1, n + 1))
                if n >= 1:
                    self.assertEqual(delta_xy(m, n).adjoint(), delta_yx(m + 1, n - 1))


class TestAlpha(unittest.TestCase):
    def test_trivial_second_factor(self):
        for m in range(6):
            A = alpha_via_operators(CGIndex(m, 0, 0))
            self.assertEqual(A.relabel(codomain=space(m)), identity(space(m)))

    def test_singlet(self):
        A = alpha_via_operators(CGIndex(1, 1, 1))
        half = sqrt_rational(Fraction(1, 2))
        self.assertEqual(A.entry(2, 0), half)
        self.assertEqual(A.entry(1, 0), -half)
        self.assertEqual(A.nnz(), 2)

    def test_triplet(self):
        A = alpha_closed(CGIndex(1, 1, 0))
        half = sqrt_rational(Fraction(1, 2))
        self.assertEqual(A.entry(0, 0), ONE)
        self.assertEqual(A.entry(1, 1), half)
        self.assertEqual(A.entry(2, 1), half)
        self.assertEqual(A.entry(3, 2), ONE)

    def test_cross_construction(self):
        for index in all_indices(5):
            self.assertTrue(alpha_cross_check(index), msg=str(index))

    def test_corrupted_table_is_detected(self):
        def provider(index):
            table = compute_epsilon_table(index)
            key = next(iter(sorted(table.values)))
            table.values[key] = -table.values[key]
            return table

        self.assertFalse(alpha_cross_check(CGIndex(1, 1, 0), provider))

    def test_isometry_and_orthogonality(self):
        for m in range(5):
            for n in range(5):
                alphas = [alpha_closed(CGIndex(m, n, h)) for h in range(min(m, n) + 1)]
                for h, A in enumerate(alphas):
                    for s, B in enumerate(alphas):
                        product = A.adjoint() @ B
                        if h == s:
                            self.assertEqual(product, identity(space(m + n - 2 * h)))
                        else:
                            self.assertTrue(product.is_zero())

    def test_completeness(self):
        for m in range(5):
            for n in range(5):
                total = None
                for h in range(min(m, n) + 1):
                    A = alpha_closed(CGIndex(m, n, h))
                    term = A @ A.adjoint()
                    total = term if total is None else total + term
                self.assertEqual(total, identity(space(m).tensor(space(n))))

    def test_equivariance(self):
        for index in all_indices(2):
            A = alpha_closed(index)
            for g in POOL:
                lhs = rep_on(A.codomain, g) @ A
                self.assertEqual(lhs, A @ rho_matrix(index.r, g), msg=str(index))

    def test_adjoint_via_operators(self):
        for index in SMALL:
            self.assertEqual(alpha_adjoint_via_operators(index), alpha_closed(index).adjoint())

    def test_flip_identities(self):
        for index in all_indices(4):
            self.assertTrue(flip_alpha_identity_check(index), msg=str(index))
            self.assertTrue(flip_eta_identity_check(index), msg=str(index))


class TestEpsilon(unittest.TestCase):
    def test_degree_one_values(self):
        for m in range(1, 7):
            plus = epsilon_table(CGIndex(m, 1, 0))
            self.assertEqual(plus.get(1, 0), sqrt_rational(Fraction(m, m + 1)))
            self.assertEqual(plus.get(1, 1), sqrt_rational(Fraction(1, m + 1)))
            minus = epsilon_table(CGIndex(m, 1, 1))
            self.assertEqual(minus.get(0, 0), sqrt_rational(Fraction(1, m + 1)))
            self.assertEqual(minus.get(0, 1), -sqrt_rational(Fraction(m, m + 1)))

    def test_reversal_symmetry(self):
        for index in all_indices(5):
            table = epsilon_table(index)
            sign = -1 if index.h % 2 else 1
            for (i, j), value in table.items():
                self.assertEqual(value, table.get(index.r - i, index.n - j) * sign, msg=f"{index} {i},{j}")

    def test_swap_symmetry(self):
        for index in all_indices(4):
            table = epsilon_table(index)
            swapped = epsilon_table(index.swapped())
            sign = -1 if index.h % 2 else 1
            for (i, j), value in table.items():
                self.assertEqual(value, swapped.get(i, index.l(i, j)) * sign)

    def test_single_term_entries(self):
        for index in all_indices(4):
            m, n, h, r = index.m, index.n, index.h, index.r
            table = epsilon_table(index)
            for i in range(min(n - h, r) + 1):
                self.assertEqual(table.get(i, i + h), beta(index, i, h, i + h))
            for i in range(n - h, r + 1):
                self.assertEqual(table.get(i, n), beta(index, i, h, n))
            for j in index.b_range(0):
                self.assertEqual(table.get(0, j), beta(index, 0, j, j))

    def test_beta_swap_symmetry(self):
        for index in all_indices(3):
            m, n, h, r = index.m, index.n, index.h, index.r
            sign = -1 if h % 2 else 1
            for i in range(r + 1):
                for j in range(n + 1):
                    if not 0 <= index.l(i, j) <= m:
                        continue
                    for s in range(h + 1):
                        swapped = beta(index.swapped(), i, h - s, index.l(i, j))
                        self.assertEqual(swapped, beta(index, i, s, j) * sign)

    def test_outside_support_is_zero(self):
        table = epsilon_table(CGIndex(2, 2, 1))
        self.assertEqual(table.get(0, 2), ZERO)

    def test_memoized(self):
        index = CGIndex(3, 2, 1)
        self.assertIs(epsilon_table(index), epsilon_table(index))
        self.assertEqual(epsilon_table(index), compute_epsilon_table(index))


class TestEta(unittest.TestCase):
    def test_isometry(self):
        for index in all_indices(4):
            E = eta(index)
            self.assertEqual(E.adjoint() @ E, identity(space(index.r)))

    def test_projections(self):
        for m in range(4):
            for r in range(4):
                label = space(m).tensor(space(r, conjugate=True))
                total = None
                for l in range(min(m, r) + 1):
                    q = projection_q(m, r, l)
                    self.assertEqual(q @ q, q)
                    self.assertEqual(q.adjoint(), q)
                    self.assertEqual(q.trace(), m + r - 2 * l + 1)
                    total = q if total is None else total + q
                self.assertEqual(total, identity(label))

    def test_projections_mutually_orthogonal(self):
        for m in range(4):
            for r in range(4):
                qs = [projection_q(m, r, l) for l in range(min(m, r) + 1)]
                for a in range(len(qs)):
                    for b in range(a + 1, len(qs)):
                        self.assertTrue((qs[a] @ qs[b]).is_zero())


_coeffs = st.lists(
    st.fractions(min_value=-4, max_value=4, max_denominator=5), min_size=6, max_size=6
)


class TestExpansion(unittest.TestCase):
    @settings(max_examples=30, deadline=None)
    @given(_coeffs)
    def test_components_sum_to_input(self, coeffs):
        f = PolyVec(space(1).tensor(space(2)), tuple(coeffs))
        parts = cg_expand(f)
        self.assertEqual([h for h, _ in parts], [0, 1])
        total = PolyVec.zero(f.space)
        for h, component in parts:
            A = alpha_closed(CGIndex(1, 2, h))
            self.assertEqual(component, (A @ A.adjoint()).apply(f))
            total = total + component
        self.assertEqual(total, f)

    def test_component_of_highest_weight(self):
        A = alpha_closed(CGIndex(2, 2, 1))
        f = A.column(0)
        parts = dict(cg_expand(f))
        self.assertEqual(parts[1], f)
        self.assertTrue(parts[0].is_zero())
        self.assertTrue(parts[2].is_zero())

    def test_rejects_conjugate_space(self):
        with self.assertRaises(InvalidIndex):
            cg_expand(PolyVec.zero(space(1).tensor(space(1, conjugate=True))))


if __name__ == "__main__":
    unittest.main()
