import csv
import io
import json
import unittest
from fractions import Fraction

from Eposic.clebsch import CGIndex, compute_epsilon_table
from Eposic.errors import ParseError
from Eposic.exact_scalar import I, ZERO, sqrt_rational
from Eposic.polyspaces import LinOp, basis_vector, space
from Eposic.serialization import (
    envelope,
    epsilon_table_from_payload,
    epsilon_table_payload,
    epsilon_table_to_csv,
    label_from_json,
    label_to_json,
    matrix_from_json,
    matrix_to_csv,
    matrix_to_json,
    scalar_from_json,
    scalar_to_json,
    vector_to_json,
)


class TestScalars(unittest.TestCase):
    def test_scalar_json(self):
        x = sqrt_rational(2) * Fraction(1, 2)
        out = scalar_to_json(x)
        self.assertEqual(out["exact"], "(1/2)*sqrt(2)")
        self.assertAlmostEqual(out["re"], 0.7071067811865476, places=15)
        self.assertEqual(out["im"], 0.0)
        self.assertEqual(scalar_from_json(out), x)
        self.assertEqual(scalar_from_json("(1/2)*sqrt(2)"), x)

    def test_exact_only_and_digits(self):
        x = sqrt_rational(3)
        self.assertEqual(scalar_to_json(x, exact_only=True), {"exact": "(1/1)*sqrt(3)"})
        self.assertEqual(scalar_to_json(x, float_digits=3)["re"], 1.73)
        with self.assertRaises(ValueError):
            scalar_to_json(x, float_digits=0)

    def test_rejects_malformed(self):
        with self.assertRaises(ParseError):
            scalar_from_json({"re": 1.0})
        with self.assertRaises(ParseError):
            scalar_from_json(1.5)


class TestMatrices(unittest.TestCase):
    def setUp(self):
        self.A = LinOp(
            space(1), space(1, conjugate=True).tensor(space(0)), {(0, 1): sqrt_rational(5), (1, 0): I}
        )

    def test_json_round_trip(self):
        obj = json.loads(json.dumps(matrix_to_json(self.A)))
        self.assertEqual(obj["codomain"], [{"degree": 1, "conjugate": True}, {"degree": 0, "conjugate": False}])
        self.assertEqual(obj["entries"][0][0], {"exact": "0", "re": 0.0, "im": 0.0})
        self.assertEqual(matrix_from_json(obj), self.A)

    def test_label_round_trip(self):
        label = space(2).tensor(space(3, conjugate=True))
        self.assertEqual(label_from_json(label_to_json(label)), label)
        with self.assertRaises(ParseError):
            label_from_json([{"conjugate": True}])

    def test_matrix_from_json_errors(self):
        with self.assertRaises(ParseError):
            matrix_from_json({"entries": []})
        obj = matrix_to_json(self.A)
        obj["entries"] = obj["entries"][:1]
        with self.assertRaises(ParseError):
            matrix_from_json(obj)

    def test_csv_lists_nonzero_entries(self):
        rows = list(csv.reader(io.StringIO(matrix_to_csv(self.A))))
        self.assertEqual(rows[0], ["row", "col", "exact", "re", "im"])
        self.assertEqual(rows[1][:3], ["0", "1", "(1/1)*sqrt(5)"])
        self.assertEqual(rows[2], ["1", "0", "(0/1+1/1 i)", "0.0", "1.0"])
        self.assertEqual(len(rows), 3)

    def test_csv_exact_only(self):
        rows = list(csv.reader(io.StringIO(matrix_to_csv(self.A, exact_only=True))))
        self.assertEqual(rows, [["row", "col", "exact"], ["0", "1", "(1/1)*sqrt(5)"], ["1", "0", "(0/1+1/1 i)"]])

    def test_vector_json(self):
        out = vector_to_json(basis_vector(space(1), 1), exact_only=True)
        self.assertEqual(out["coeffs"], [{"exact": "0"}, {"exact": "(1/1)"}])


class TestEpsilonTables(unittest.TestCase):
    def test_csv(self):
        table = compute_epsilon_table(CGIndex(1, 1, 1))
        rows = list(csv.reader(io.StringIO(epsilon_table_to_csv(table))))
        self.assertEqual(rows[0], ["i", "j", "exact", "float"])
        self.assertEqual(rows[1][:3], ["0", "0", "(1/2)*sqrt(2)"])
        self.assertEqual(rows[2][:3], ["0", "1", "(-1/2)*sqrt(2)"])

    def test_payload_round_trip(self):
        for index in (CGIndex(2, 1, 1), CGIndex(3, 3, 2), CGIndex(0, 0, 0)):
            table = compute_epsilon_table(index)
            self.assertEqual(epsilon_table_from_payload(index, epsilon_table_payload(table)), table)

    def test_payload_rejects_garbage(self):
        with self.assertRaises(ParseError):
            epsilon_table_from_payload(CGIndex(1, 1, 1), "0,0")
        with self.assertRaises(ParseError):
            epsilon_table_from_payload(CGIndex(1, 1, 1), "0,x,(1/2)")

    def test_zero_entries_kept(self):
        index = CGIndex(2, 2, 1)
        table = compute_epsilon_table(index)
        payload = epsilon_table_payload(table)
        self.assertEqual(len(payload.splitlines()), len(table.values))
        self.assertEqual(epsilon_table_from_payload(index, payload).get(0, 2), ZERO)


class TestEnvelope(unittest.TestCase):
    def test_shape(self):
        self.assertEqual(
            envelope("choi", {"x": 1}),
            {"command": "choi", "status": "success", "data": {"x": 1}, "error": None},
        )
        self.assertEqual(envelope("kraus", status="error", error="bad")["error"], "bad")


if __name__ == "__main__":
    unittest.main()
