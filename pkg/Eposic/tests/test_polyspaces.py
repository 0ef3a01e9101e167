import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from Eposic.errors import NotUnit, ShapeMismatch
from Eposic.exact_scalar import I, ONE, ZERO, GaussianRational, as_scalar
from Eposic.polyspaces import (
    G0,
    IDENTITY,
    POOL,
    GroupElement,
    LinOp,
    PolyVec,
    bar,
    basis_operator,
    basis_vector,
    conj_rep,
    flip,
    group_multiply,
    hs_inner,
    hs_norm_sq,
    identity,
    inner_product,
    j_map,
    j_map_adjoint,
    monomial,
    outer,
    partial_trace,
    random_su2,
    rho_matrix,
    rho_matrix_float,
    scalar_mul,
    space,
    tensor,
    tensor_vec,
    theta_map,
    unvec,
    vec,
    zero_op,
)

_coeff = st.builds(
    lambda re, im: as_scalar(GaussianRational(re, im)),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
)


def operators(domain, codomain):
    n = domain.dim * codomain.dim
    return st.lists(_coeff, min_size=n, max_size=n).map(
        lambda cs: LinOp(domain, codomain, {divmod(k, domain.dim): c for k, c in enumerate(cs)})
    )


P1, P2 = space(1), space(2)


class TestInnerProduct(unittest.TestCase):
    def test_canonical_basis_orthonormal(self):
        for m in range(4):
            for l in range(m + 1):
                for k in range(m + 1):
                    expected = ONE if l == k else ZERO
                    self.assertEqual(inner_product(basis_vector(space(m), l), basis_vector(space(m), k)), expected)

    def test_monomial_norms(self):
        for m in range(5):
            for l in range(m + 1):
                v = monomial(m, l)
                self.assertEqual(inner_product(v, v), math.factorial(l) * math.factorial(m - l))

    def test_conjugate_linear_first_slot(self):
        f0 = basis_vector(P1, 0)
        self.assertEqual(inner_product(f0.scale(I), f0), -I)
        self.assertEqual(inner_product(f0, f0.scale(I)), I)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            inner_product(basis_vector(P1, 0), basis_vector(P2, 0))


class TestRho(unittest.TestCase):
    def test_identity_element(self):
        for m in range(4):
            self.assertEqual(rho_matrix(m, IDENTITY), identity(space(m)))

    def test_g0_reverses_basis(self):
        for m in range(5):
            R = rho_matrix(m, G0)
            for l in range(m + 1):
                expected = basis_vector(space(m), m - l).scale(-1 if l % 2 else 1)
                self.assertEqual(R.apply(basis_vector(space(m), l)), expected)

    def test_degree_one_matrix(self):
        for g in POOL:
            R = rho_matrix(1, g)
            self.assertEqual(R.entry(0, 0), g.a.conjugate())
            self.assertEqual(R.entry(1, 0), g.b)
            self.assertEqual(R.entry(0, 1), -g.b.conjugate())
            self.assertEqual(R.entry(1, 1), g.a)

    def test_homomorphism(self):
        for m in range(4):
            for g in POOL:
                for h in POOL:
                    self.assertEqual(rho_matrix(m, g * h), rho_matrix(m, g) @ rho_matrix(m, h))

    def test_unitary(self):
        for m in range(7):
            for g in POOL:
                R = rho_matrix(m, g)
                self.assertEqual(R @ R.adjoint(), identity(space(m)))

    def test_group_element_must_be_unit(self):
        with self.assertRaises(NotUnit):
            GroupElement(ONE, ONE)

    def test_inverse(self):
        for g in POOL:
            self.assertEqual(rho_matrix(2, g * g.inverse()), identity(P2))

    def test_group_multiply(self):
        for g in POOL:
            for h in POOL:
                gh = group_multiply(g, h)
                self.assertEqual(gh, g * h)
                self.assertEqual(rho_matrix(1, gh), rho_matrix(1, g) @ rho_matrix(1, h))

    def test_float_matches_exact(self):
        for g in POOL:
            a, b = complex(g.a), complex(g.b)
            for m in range(4):
                np.testing.assert_allclose(rho_matrix_float(m, a, b), rho_matrix(m, g).to_numpy(), atol=1e-12)

    def test_sampled_float_unitary(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b = random_su2(rng)
            R = rho_matrix_float(3, a, b)
            np.testing.assert_allclose(R @ R.conj().T, np.eye(4), atol=1e-9)


class TestConjugationMaps(unittest.TestCase):
    def test_j_unitary(self):
        for m in range(5):
            J = j_map(m)
            self.assertEqual(J @ j_map_adjoint(m), identity(space(m, conjugate=True)))
            self.assertEqual(j_map_adjoint(m) @ J, identity(space(m)))

    def test_j_on_basis(self):
        J2 = j_map(2)
        self.assertEqual(J2.apply(basis_vector(P2, 1)), basis_vector(space(2, True), 1).scale(-1))
        for m in range(4):
            Jstar = j_map_adjoint(m)
            for l in range(m + 1):
                expected = basis_vector(space(m), m - l).scale(-1 if (m - l) % 2 else 1)
                self.assertEqual(Jstar.apply(basis_vector(space(m, True), l)), expected)

    def test_j_equivariance(self):
        for m in range(4):
            for g in POOL:
                self.assertEqual(j_map(m) @ rho_matrix(m, g), conj_rep(m, g) @ j_map(m))

    def test_theta_relation(self):
        for m in range(4):
            for g in POOL:
                self.assertEqual(conj_rep(m, g) @ theta_map(m), theta_map(m) @ rho_matrix(m, g.conjugate()))

    def test_flip_j_relation(self):
        for m in range(5):
            for n in range(5):
                Pm, Pn = space(m), space(n)
                lhs = flip(space(m, True), Pn) @ tensor(j_map(m), identity(Pn))
                rhs = tensor(identity(Pn), j_map(m)) @ flip(Pm, Pn)
                self.assertEqual(lhs, rhs)


class TestTensorUtilities(unittest.TestCase):
    def test_flip(self):
        F = flip(P1, P2)
        self.assertEqual(flip(P2, P1) @ F, identity(P1.tensor(P2)))
        self.assertEqual(F.adjoint(), flip(P2, P1))
        v = PolyVec(P1.tensor(P1), (ZERO, ONE, ZERO, ZERO))  # f0 (x) f1
        self.assertEqual(flip(P1, P1).apply(v), PolyVec(P1.tensor(P1), (ZERO, ZERO, ONE, ZERO)))

    def test_vec_examples(self):
        x, y = basis_vector(P2, 2), basis_vector(P1, 0)
        self.assertEqual(vec(outer(x, y)), PolyVec(P2.tensor(space(1, True)), (ZERO,) * 4 + (ONE, ZERO)))
        expected = PolyVec(P1.tensor(space(1, True)), (ONE, ZERO, ZERO, ONE))
        self.assertEqual(vec(identity(P1)), expected)

    @settings(max_examples=40, deadline=None)
    @given(operators(P1, P2), operators(P1, P2))
    def test_vec_isometry(self, A, B):
        self.assertEqual(hs_inner(A, B), inner_product(vec(A), vec(B)))
        self.assertEqual(unvec(vec(A), P1, P2), A)

    @settings(max_examples=30, deadline=None)
    @given(operators(P1, P1), operators(P2, P2))
    def test_partial_trace_of_product(self, A, B):
        AB = tensor(A, B)
        self.assertEqual(partial_trace(AB, "right"), A.scale(B.trace()))
        self.assertEqual(partial_trace(AB, "left"), B.scale(A.trace()))

    @settings(max_examples=30, deadline=None)
    @given(operators(P1.tensor(P2), P1.tensor(P2)), operators(P1, P1))
    def test_partial_trace_adjoint_of_tensoring(self, A, B):
        self.assertEqual(hs_inner(partial_trace(A, "right"), B), hs_inner(A, tensor(B, identity(P2))))
        self.assertEqual(partial_trace(A, "right").trace(), A.trace())

    @settings(max_examples=20, deadline=None)
    @given(operators(P1.tensor(P2), P1.tensor(P2)))
    def test_partial_trace_invariant_under_flip(self, A):
        F = flip(P1, P2)
        self.assertEqual(partial_trace(F @ A @ F.adjoint(), "left"), partial_trace(A, "right"))

    def test_partial_trace_identity(self):
        self.assertEqual(partial_trace(identity(P1.tensor(P2)), "right"), identity(P1).scale(3))

    @settings(max_examples=30, deadline=None)
    @given(operators(P1, P2), operators(P2, P1))
    def test_operator_algebra(self, A, B):
        self.assertEqual(A.adjoint().adjoint(), A)
        self.assertEqual((B @ A).adjoint(), A.adjoint() @ B.adjoint())
        u, v = basis_vector(P1, 1), basis_vector(P2, 0)
        self.assertEqual(tensor(A, B).apply(tensor_vec(u, v)), tensor_vec(A.apply(u), B.apply(v)))

    def test_hs_inner_is_trace(self):
        A = basis_operator(P2, 0, 1).scale(I) + identity(P2)
        B = basis_operator(P2, 0, 1) + basis_operator(P2, 2, 2).scale(3)
        self.assertEqual(hs_inner(A, B), (A.adjoint() @ B).trace())

    def test_zero_and_scaling_helpers(self):
        Z = zero_op(P1, P2)
        self.assertEqual(Z.shape, (3, 2))
        self.assertTrue(Z.is_zero())
        A = basis_operator(P2, 0, 1) + identity(P2)
        self.assertEqual(scalar_mul(I, A), A.scale(I))
        self.assertEqual(hs_norm_sq(identity(P2)), 3)
        self.assertEqual(hs_norm_sq(A.scale(I)), 4)

    def test_bar(self):
        u = PolyVec(P1, (I, ONE))
        v = PolyVec(P1, (ONE, as_scalar(GaussianRational(2, 1))))
        self.assertEqual(bar(u).space, P1.conj())
        self.assertEqual(bar(u).coeffs, (-I, ONE))
        self.assertEqual(bar(bar(u)), u)
        self.assertEqual(inner_product(bar(u), bar(v)), inner_product(u, v).conjugate())

    def test_composition_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            identity(P1) @ identity(P2)


if __name__ == "__main__":
    unittest.main()
