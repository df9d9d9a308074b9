"""
JSON solution records: serialization and loading of eigenfunctions.

Floats are written by :mod:`json`, i.e. as the shortest decimal string that
round-trips to the same double, so files are deterministic and lossless.
Rational quantities are additionally written exactly, as ``"p/q"`` strings.
A loaded record is rebuilt from its stored coefficients alone, without
re-solving anything, so verification tests the stored numbers.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from fractions import Fraction
from pathlib import Path
from typing import Any

from .eigenfunction import ElementaryEigenfunction
from .errors import TwoCenterError
from .heun import CHEqParameters, HeunPolynomialSolution, QESRoot, Scalar, cheq_residual
from .mathieu import MathieuCharacteristic, MathieuFactor, mathieu_residual
from .separation import TYPES, CenterPair, SeparatedSolution

SCHEMA_VERSION = 1


class RecordError(TwoCenterError, ValueError):
    """A solution file or record is malformed."""


def _exact(x: Scalar) -> str | None:
    return str(x) if isinstance(x, Fraction) else None


def _scalar(value: float, exact: str | None) -> Scalar:
    """The exact value when it agrees with the float field, else the float.

    The float is primary: an edited float with a stale exact string is read
    as the edited float.
    """
    if exact is not None:
        ex = Fraction(exact)
        if float(ex) == float(value):
            return ex
    return float(value)


def _factor_block(fac: SeparatedSolution) -> dict[str, Any]:
    poly = fac.poly
    coeffs = list(poly.coeffs)
    exact = all(isinstance(c, Fraction) for c in coeffs)
    return {
        "kind": fac.kind,
        "type": fac.stype.tag,
        "level": fac.level,
        "branch": fac.branch.j,
        "gamma": str(fac.stype.gamma),
        "delta": str(fac.stype.delta),
        "epsilon": float(fac.epsilon),
        "epsilon_exact": _exact(fac.epsilon),
        "q": float(fac.branch.q),
        "q_exact": _exact(fac.branch.exact),
        "energy": float(fac.energy),
        "lambda": float(fac.lam),
        "coefficients": [float(c) for c in coeffs],
        "coefficients_exact": [str(c) for c in coeffs] if exact else None,
        "monic_polynomial": [float(c) for c in poly.monic()],
    }


def _mathieu_block(fac: MathieuFactor) -> dict[str, Any]:
    ch = fac.characteristic
    return {
        "kind": "mathieu",
        "parity": ch.parity,
        "order": ch.order,
        "label": ch.label,
        "p": ch.p,
        "value": ch.value,
        "harmonics": list(ch.harmonics),
        "fourier": list(ch.fourier),
        "truncation": ch.truncation,
    }


def residual_report(sol: ElementaryEigenfunction) -> dict[str, float]:
    """Cheap algebraic checks of the stored factors (no PDE sampling)."""
    report = {
        "lambda_mismatch": float(sol.provenance.get("lambda_mismatch", 0.0)),
        "radial_cheq": float(cheq_residual(sol.radial.poly, relative=True)),
    }
    if sol.mixed:
        ch = sol.angular.characteristic
        nodes = [k * 0.3141592653589793 for k in range(-10, 10)]
        report["mathieu"] = float(max(mathieu_residual(ch, nodes)))
    else:
        report["angular_cheq"] = float(cheq_residual(sol.angular.poly, relative=True))
    return report


def to_record(sol: ElementaryEigenfunction, pde_residual: float | None = None) -> dict[str, Any]:
    """JSON-ready mapping for one eigenfunction."""
    c = sol.centers
    residuals: dict[str, Any] = residual_report(sol)
    if pde_residual is not None:
        residuals["pde"] = pde_residual
    return {
        "schema_version": SCHEMA_VERSION,
        "route": sol.provenance.get("route", "mathieu" if sol.mixed else "elementary"),
        "charges": {"Z1": float(c.Z1), "Z2": float(c.Z2), "Z1_exact": _exact(c.Z1), "Z2_exact": _exact(c.Z2)},
        "R": float(sol.R),
        "R_exact": _exact(sol.R),
        "energy": float(sol.energy),
        "energy_exact": _exact(sol.energy),
        "lambda": float(sol.lam),
        "lambda_exact": _exact(sol.lam),
        "labels": {"radial": sol.provenance.get("radial"), "angular": sol.provenance.get("angular")},
        "pair": sol.provenance.get("pair"),
        "radial": _factor_block(sol.radial),
        "angular": _mathieu_block(sol.angular) if sol.mixed else _factor_block(sol.angular),
        "normalization": sol.normalization,
        "residuals": residuals,
    }


def dumps(solutions: Iterable[ElementaryEigenfunction]) -> str:
    """Deterministic JSON text for a list of eigenfunctions."""
    return json.dumps([to_record(s) for s in solutions], indent=2, sort_keys=True) + "\n"


def _load_factor(block: dict[str, Any], energy: Scalar) -> SeparatedSolution:
    try:
        stype = TYPES[block["type"]]
        eps = _scalar(block["epsilon"], block.get("epsilon_exact"))
        q_ex = block.get("q_exact")
        root = QESRoot(int(block["branch"]), float(block["q"]), 0.0, Fraction(q_ex) if q_ex else None)
        if block.get("coefficients_exact"):
            coeffs = tuple(Fraction(c) for c in block["coefficients_exact"])
        else:
            coeffs = tuple(float(c) for c in block["coefficients"])
        params = CHEqParameters(stype.gamma, stype.delta, eps, int(block["level"]))
        poly = HeunPolynomialSolution(params, root, coeffs)
        return SeparatedSolution(block["kind"], stype, int(block["level"]), root, energy,
                                 float(block["lambda"]), eps, poly)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise RecordError(f"malformed factor block: {exc}") from exc


def _load_mathieu(block: dict[str, Any]) -> MathieuFactor:
    try:
        ch = MathieuCharacteristic(block["parity"], int(block["order"]), float(block["p"]), float(block["value"]),
                                   tuple(int(h) for h in block["harmonics"]),
                                   tuple(float(c) for c in block["fourier"]), int(block["truncation"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"malformed Mathieu block: {exc}") from exc
    return MathieuFactor(ch)


def from_record(rec: dict[str, Any]) -> ElementaryEigenfunction:
    """Rebuild an evaluable eigenfunction from a record.

    The record's own energy is used for the eigenfunction, so a record
    whose E has been altered no longer verifies.

    Raises
    ------
    RecordError
        On a missing field, bad value or unknown schema version.
    """
    if not isinstance(rec, dict):
        raise RecordError("a record must be a JSON object")
    if rec.get("schema_version") != SCHEMA_VERSION:
        raise RecordError(f"unsupported schema version {rec.get('schema_version')!r}")
    try:
        ch = rec["charges"]
        Z1 = _scalar(ch["Z1"], ch.get("Z1_exact"))
        Z2 = _scalar(ch["Z2"], ch.get("Z2_exact"))
        R = _scalar(rec["R"], rec.get("R_exact"))
        energy = _scalar(rec["energy"], rec.get("energy_exact"))
        lam = _scalar(rec["lambda"], rec.get("lambda_exact"))
        centers = CenterPair(Z1, Z2, R)
        radial = _load_factor(rec["radial"], energy)
        ang_block = rec["angular"]
        angular = _load_mathieu(ang_block) if ang_block.get("kind") == "mathieu" else _load_factor(ang_block, energy)
        labels = rec.get("labels") or {}
        provenance = {
            "route": rec.get("route"),
            "radial": labels.get("radial"),
            "angular": labels.get("angular"),
            "pair": rec.get("pair"),
            "lambda_mismatch": float((rec.get("residuals") or {}).get("lambda_mismatch", 0.0)),
        }
        norm = rec.get("normalization")
        return ElementaryEigenfunction(centers, energy, lam, radial, angular,
                                       None if norm is None else float(norm), provenance)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise RecordError(f"malformed record: {exc}") from exc


def load_records(path: str | Path) -> list[dict[str, Any]]:
    """Parse a solution file into a non-empty list of raw records."""
    text = Path(path).read_text()
    if not text.strip():
        raise RecordError(f"{path}: empty solution file")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise RecordError(f"{path}: expected a JSON array of records")
    return data


def load_solutions(path: str | Path) -> list[ElementaryEigenfunction]:
    return [from_record(r) for r in load_records(path)]
