"""JSON solution records."""

import json
from fractions import Fraction

import pytest

from twocenter.matching import find_elementary_solutions
from twocenter.records import (
    SCHEMA_VERSION,
    RecordError,
    dumps,
    from_record,
    load_records,
    load_solutions,
    to_record,
)
from twocenter.separation import CenterPair
from twocenter.symmetric import find_symmetric_solutions


@pytest.fixture(scope="module")
def z51():
    return find_elementary_solutions(CenterPair(5, 1))


@pytest.fixture(scope="module")
def mixed():
    return find_symmetric_solutions(3, nr_max=1, mathieu_n_max=1)


class TestRoundTrip:
    def test_elementary_byte_identical(self, z51, tmp_path):
        text = dumps(z51)
        path = tmp_path / "s.json"
        path.write_text(text)
        assert dumps(load_solutions(path)) == text

    def test_mixed_byte_identical(self, mixed, tmp_path):
        assert mixed
        text = dumps(mixed)
        path = tmp_path / "m.json"
        path.write_text(text)
        assert dumps(load_solutions(path)) == text

    def test_loaded_values(self, z51):
        back = from_record(json.loads(dumps(z51[:1]))[0])
        assert back.R == Fraction(3, 8)
        assert back.energy == -8
        assert back.lam == Fraction(-7, 16)
        assert back.normalization == z51[0].normalization


class TestFields:
    def test_exact_fields(self, z51):
        rec = to_record(z51[0])
        assert rec["schema_version"] == SCHEMA_VERSION
        assert (rec["R_exact"], rec["energy_exact"], rec["lambda_exact"]) == ("3/8", "-8", "-7/16")
        assert rec["radial"]["coefficients_exact"] == ["1"]

    def test_irrational_has_no_exact(self, z51):
        rec = to_record(next(s for s in z51 if not s.provenance["exact"]))
        assert rec["R_exact"] is None and rec["lambda_exact"] is None

    def test_monic_polynomial(self, z51):
        rec = to_record(next(s for s in z51 if s.R == Fraction(3, 16)))
        assert rec["radial"]["monic_polynomial"] == [-7.0, -10.0, 1.0]
        assert rec["angular"]["monic_polynomial"] == pytest.approx([1 / 3, 1.0], rel=1e-15)

    def test_residual_report(self, z51, mixed):
        for sol in z51:
            res = to_record(sol)["residuals"]
            assert res["radial_cheq"] < 1e-10 and res["angular_cheq"] < 1e-10
        assert to_record(mixed[0])["residuals"]["mathieu"] < 1e-10

    def test_pde_residual_optional(self, z51):
        assert to_record(z51[0], pde_residual=1e-9)["residuals"]["pde"] == 1e-9

    def test_float_field_is_primary(self, z51):
        rec = json.loads(dumps(z51[:1]))[0]
        rec["energy"] = -8.5
        assert from_record(rec).energy == -8.5
        rec["energy"] = -8.0
        assert from_record(rec).energy == Fraction(-8)


class TestMalformed:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.json"
        path.write_text("  \n")
        with pytest.raises(RecordError):
            load_records(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(RecordError):
            load_records(path)

    def test_not_a_list(self, tmp_path):
        path = tmp_path / "obj.json"
        path.write_text("{}")
        with pytest.raises(RecordError):
            load_records(path)

    def test_schema_version(self, z51):
        rec = to_record(z51[0])
        rec["schema_version"] = 99
        with pytest.raises(RecordError):
            from_record(rec)

    @pytest.mark.parametrize("field", ["R", "radial", "charges"])
    def test_missing_field(self, z51, field):
        rec = json.loads(dumps(z51[:1]))[0]
        del rec[field]
        with pytest.raises(RecordError):
            from_record(rec)

    def test_bad_factor_type(self, z51):
        rec = json.loads(dumps(z51[:1]))[0]
        rec["angular"]["type"] = "z"
        with pytest.raises(RecordError):
            from_record(rec)

    def test_record_error_is_value_error(self):
        assert issubclass(RecordError, ValueError)
