import contextlib
import io
import json
import os
import tempfile
import unittest
from fractions import Fraction
from unittest import mock

from Eposic import clebsch
from Eposic.cache import EpsilonCache, payload_digest
from Eposic.channels import Superoperator
from Eposic.clebsch import CGIndex, compute_epsilon_table
from Eposic.cli import CommandConfig, main, run
from Eposic.config import CACHE_ENV_VAR
from Eposic.polyspaces import basis_operator, space
from Eposic.serialization import matrix_to_json


def _run(**kwargs):
    out, err = io.StringIO(), io.StringIO()
    code = run(CommandConfig(**kwargs), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


class TestCommands(unittest.TestCase):
    def test_choi(self):
        code, out, err = _run(command="choi", m=2, n=2, h=1)
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload["status"], "success")
        self.assertEqual(payload["data"]["trace"], "(3/1)")
        self.assertEqual(payload["data"]["index"], {"m": 2, "n": 2, "h": 1, "r": 2})
        self.assertIn("[OK] choi executed successfully.", err)

    def test_kraus_csv(self):
        code, out, _ = _run(command="kraus", m=1, n=1, h=1, output_format="csv")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "j,row,col,exact,re,im")
        self.assertTrue(lines[1].startswith("0,1,0,(1/2)*sqrt(2),"))
        self.assertTrue(lines[2].startswith("1,0,0,(-1/2)*sqrt(2),"))

    def test_exact_flag_drops_floats(self):
        _, out, _ = _run(command="alpha", m=1, n=1, h=1, exact=True, via="operators")
        entries = json.loads(out)["data"]["matrix"]["entries"]
        self.assertEqual(entries[2][0], {"exact": "(1/2)*sqrt(2)"})

    def test_exact_flag_drops_csv_floats(self):
        _, out, _ = _run(command="kraus", m=1, n=1, h=1, output_format="csv", exact=True)
        lines = out.splitlines()
        self.assertEqual(lines[0], "j,row,col,exact")
        self.assertEqual(lines[1], "0,1,0,(1/2)*sqrt(2)")
        _, out, _ = _run(command="epsilon", m=1, n=1, h=1, output_format="csv", exact=True)
        self.assertEqual(out.splitlines(), ["i,j,exact", "0,0,(1/2)*sqrt(2)", "0,1,(-1/2)*sqrt(2)"])

    def test_epsilon_csv(self):
        _, out, _ = _run(command="epsilon", m=1, n=1, h=0, output_format="csv")
        self.assertEqual(out.splitlines()[0], "i,j,exact,float")

    def test_enumerate(self):
        code, out, _ = _run(command="enumerate", r=1, m=1)
        self.assertEqual(code, 0)
        channels = json.loads(out)["data"]["channels"]
        self.assertEqual(len(channels), 2)
        self.assertEqual(channels[0], {"m": 1, "n": 2, "h": 1, "r": 1})

    def test_verify(self):
        code, out, _ = _run(command="verify", m=2, n=1, h=1)
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["data"]["passed"])

    def test_positivity(self):
        code, out, _ = _run(command="positivity", m=1, alpha=Fraction(1, 8))
        self.assertEqual(code, 0)
        data = json.loads(out)["data"]
        self.assertEqual(data["alpha"], "1/8")
        self.assertEqual(data["threshold"], "1/3")
        self.assertTrue(data["is_positive"])
        self.assertFalse(data["is_cp"])
        self.assertTrue(data["not_n_positive"])
        self.assertEqual(data["witness_eigenvalue"], "(-1/4)")

    def test_positivity_cp_has_no_witness(self):
        _, out, _ = _run(command="positivity", m=2, alpha=Fraction(0))
        data = json.loads(out)["data"]
        self.assertTrue(data["is_cp"])
        self.assertIsNone(data["witness_vector"])

    def test_invalid_index(self):
        code, out, err = _run(command="kraus", m=1, n=1, h=2)
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(out)["status"], "error")
        self.assertIn("[ERROR]", err)

    def test_deterministic(self):
        first = _run(command="choi", m=1, n=2, h=1)[1]
        second = _run(command="choi", m=1, n=2, h=1)[1]
        self.assertEqual(first, second)


class TestChoiFiles(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self._tmp.cleanup()

    def _write(self, name, text):
        path = os.path.join(self._tmp.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_decompose_choi_output(self):
        _, out, _ = _run(command="choi", m=1, n=0, h=0)
        path = self._write("identity.json", out)
        code, out, _ = _run(command="decompose", input_path=path)
        self.assertEqual(code, 0)
        data = json.loads(out)["data"]
        self.assertTrue(data["in_span"])
        self.assertEqual([lam["value"]["exact"] for lam in data["lambdas"]], ["0", "(1/1)"])

    def test_classify_bare_matrix(self):
        _, out, _ = _run(command="choi", m=2, n=1, h=1, exact=True)
        matrix = json.loads(out)["data"]["matrix"]
        path = self._write("matrix.json", json.dumps(matrix))
        code, out, _ = _run(command="classify", input_path=path)
        self.assertEqual(code, 0)
        data = json.loads(out)["data"]
        self.assertEqual(data["category"], "covariant_channel")
        self.assertTrue(data["extreme"])
        self.assertIsNone(data["sampled_positivity"])

    def test_classify_non_covariant_reports_sampled_search(self):
        E = basis_operator(space(1), 0, 0)
        S = Superoperator.from_function(1, 1, lambda A: E @ A @ E).scale(-1)
        path = self._write("pinch.json", json.dumps(matrix_to_json(S.choi)))
        code, out, _ = _run(command="classify", input_path=path)
        self.assertEqual(code, 0)
        data = json.loads(out)["data"]
        self.assertEqual(data["category"], "not_covariant")
        self.assertFalse(data["positive"])
        self.assertEqual(data["sampled_positivity"]["status"], "not_positive")
        self.assertLess(data["sampled_positivity"]["min_sampled_eigenvalue"], 0)

    def test_missing_file(self):
        code, _, _ = _run(command="decompose", input_path=os.path.join(self._tmp.name, "absent.json"))
        self.assertEqual(code, 2)

    def test_malformed_envelope(self):
        for text in (
            '{"command": "choi", "data": [1]}',
            '{"command": "choi", "data": {"matrix": "nope"}}',
            '{"data": null}',
            '[1, 2]',
            '{"domain": [{"degree": 0}], "codomain": [{"degree": 0}], "entries": 3}',
        ):
            path = self._write("envelope.json", text)
            for command in ("classify", "decompose"):
                code, out, err = _run(command=command, input_path=path)
                self.assertEqual(code, 2, msg=text)
                self.assertEqual(json.loads(out)["status"], "error")
                self.assertIn("[ERROR]", err)

    def test_malformed_json(self):
        path = self._write("bad.json", "{not json")
        code, _, _ = _run(command="classify", input_path=path)
        self.assertEqual(code, 2)


class TestCorruptedCache(unittest.TestCase):
    def test_warning_stays_off_stdout(self):
        index = CGIndex(1, 1, 1)
        with tempfile.TemporaryDirectory() as tmp:
            cache = EpsilonCache(tmp)
            cache.connect()
            try:
                cache.store(index, compute_epsilon_table(index))
                cache.conn.execute(
                    "UPDATE epsilon_tables SET digest = ? WHERE m = 1 AND n = 1 AND h = 1",
                    (payload_digest("tampered"),),
                )
                cache.conn.commit()
            finally:
                cache.close()
            warnings = io.StringIO()
            with mock.patch.dict(os.environ, {CACHE_ENV_VAR: tmp}), mock.patch.dict(clebsch._TABLES, clear=True):
                with contextlib.redirect_stderr(warnings):
                    code, out, _ = _run(command="kraus", m=1, n=1, h=1)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["status"], "success")
        self.assertIn("[WARN] Digest mismatch", warnings.getvalue())


class TestMain(unittest.TestCase):
    def _main(self, argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            with self.assertRaises(SystemExit) as ctx:
                main(argv)
        return ctx.exception.code, out.getvalue()

    def test_success_exit_code(self):
        code, out = self._main(["enumerate", "--r", "2", "--m", "1"])
        self.assertEqual(code, 0)
        self.assertEqual(len(json.loads(out)["data"]["channels"]), 2)

    def test_bad_flags_exit_two(self):
        self.assertEqual(self._main(["kraus", "--m", "-1", "--n", "0", "--h", "0"])[0], 2)
        self.assertEqual(self._main(["positivity", "--m", "1", "--alpha", "1/0"])[0], 2)
        self.assertEqual(self._main(["choi", "--m", "1", "--n", "1", "--h", "0", "--float-digits", "18"])[0], 2)

    def test_rational_alpha(self):
        code, out = self._main(["positivity", "--m", "2", "--alpha", "1/4", "--exact"])
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["data"]["is_positive"])


if __name__ == "__main__":
    unittest.main()
