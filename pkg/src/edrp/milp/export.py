"""Model interchange: LP and MPS writers plus plain-text solution files.

Exports are fully deterministic: variables appear in catalog order and rows
in build order, so re-exporting the same model produces identical bytes.
Constraint tags are sanitized to identifier-safe row names
(``C11[e1,2,d1,d2]`` becomes ``C11_e1_2_d1_d2``).

Solution files are ``name value`` pairs, one per line; ``#`` starts a
comment. Lines in that shape are what common solver dumps produce.
"""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError, MissingVariableError, ParseError
from .model import Assignment, MilpModel

_SANITIZE_RE = re.compile(r"[^A-Za-z0-9_]+")


def sanitize_tag(tag: str) -> str:
    return _SANITIZE_RE.sub("_", tag).strip("_")


def row_names(model: MilpModel) -> list[str]:
    """Sanitized, uniquified row names in constraint order."""
    names: list[str] = []
    used: set[str] = set()
    for row in model.constraints:
        base = sanitize_tag(row.tag)
        name = base
        k = 2
        while name in used:
            name = f"{base}_{k}"
            k += 1
        used.add(name)
        names.append(name)
    return names


def _num(value: float) -> str:
    if value == math.floor(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _lp_terms(coeffs: Mapping[str, float], order: list[str]) -> str:
    parts: list[str] = []
    for name in order:
        coef = coeffs[name]
        if not parts:
            parts.append(f"{'- ' if coef < 0 else ''}{_num(abs(coef))} {name}")
        else:
            parts.append(f"{'-' if coef < 0 else '+'} {_num(abs(coef))} {name}")
    return " ".join(parts)


def write_lp(model: MilpModel, path: str | Path) -> Path:
    """Write the model as an LP-format text file."""
    path = Path(path)
    var_order = {v.name: i for i, v in enumerate(model.variables)}
    lines: list[str] = ["\\ delivery-and-charging route planning model", "Maximize"]
    obj_order = sorted(model.objective, key=var_order.__getitem__)
    lines.append(" obj: " + _lp_terms(model.objective, obj_order))
    lines.append("Subject To")
    sense_txt = {"<=": "<=", ">=": ">=", "=": "="}
    for row, name in zip(model.constraints, row_names(model)):
        order = sorted(row.coeffs, key=var_order.__getitem__)
        lines.append(
            f" {name}: {_lp_terms(row.coeffs, order)} {sense_txt[row.sense]} {_num(row.rhs)}"
        )
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == "binary":
            continue
        default = v.lb == 0.0 and v.ub == math.inf
        if default:
            continue
        if v.ub == math.inf:
            lines.append(f" {v.name} >= {_num(v.lb)}")
        elif v.lb == 0.0:
            lines.append(f" {v.name} <= {_num(v.ub)}")
        else:
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    if binaries:
        lines.append("Binaries")
        for chunk_start in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[chunk_start : chunk_start + 8]))
    lines.append("End")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_mps(model: MilpModel, path: str | Path) -> Path:
    """Write the model as a free-format MPS file (with OBJSENSE MAX)."""
    path = Path(path)
    names = row_names(model)
    lines: list[str] = ["NAME          edrp_model", "OBJSENSE", "    MAX", "ROWS", " N  obj"]
    sense_row = {"<=": "L", ">=": "G", "=": "E"}
    for row, name in zip(model.constraints, names):
        lines.append(f" {sense_row[row.sense]}  {name}")

    by_var: dict[str, list[tuple[str, float]]] = {v.name: [] for v in model.variables}
    for vname, coef in model.objective.items():
        by_var[vname].append(("obj", coef))
    for row, name in zip(model.constraints, names):
        for vname, coef in row.coeffs.items():
            by_var[vname].append((name, coef))

    lines.append("COLUMNS")
    in_integer_block = False
    marker = 0
    for v in model.variables:
        want_integer = v.kind == "binary"
        if want_integer and not in_integer_block:
            lines.append(f"    MARKER{marker}  'MARKER'  'INTORG'")
            marker += 1
            in_integer_block = True
        elif not want_integer and in_integer_block:
            lines.append(f"    MARKER{marker}  'MARKER'  'INTEND'")
            marker += 1
            in_integer_block = False
        for row_name, coef in by_var[v.name]:
            lines.append(f"    {v.name}  {row_name}  {_num(coef)}")
    if in_integer_block:
        lines.append(f"    MARKER{marker}  'MARKER'  'INTEND'")

    lines.append("RHS")
    for row, name in zip(model.constraints, names):
        if row.rhs != 0.0:
            lines.append(f"    RHS1  {name}  {_num(row.rhs)}")

    lines.append("BOUNDS")
    for v in model.variables:
        if v.kind == "binary":
            lines.append(f" BV BND  {v.name}")
            continue
        if v.lb == 0.0 and v.ub == math.inf:
            continue
        if v.lb != 0.0:
            lines.append(f" LO BND  {v.name}  {_num(v.lb)}")
        if v.ub != math.inf:
            lines.append(f" UP BND  {v.name}  {_num(v.ub)}")
    lines.append("ENDATA")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def export_model(model: MilpModel, path: str | Path, fmt: str | None = None) -> Path:
    """Write ``model`` to ``path`` as ``lp-text`` or ``mps-text``.

    When ``fmt`` is omitted it is inferred from the file suffix.
    """
    path = Path(path)
    if fmt is None:
        suffix = path.suffix.lower()
        if suffix == ".lp":
            fmt = "lp-text"
        elif suffix == ".mps":
            fmt = "mps-text"
        else:
            raise ConfigError(
                f"cannot infer export format from suffix {suffix!r}; pass fmt explicitly"
            )
    if fmt == "lp-text":
        return write_lp(model, path)
    if fmt == "mps-text":
        return write_mps(model, path)
    raise ConfigError(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------------------
# Solution files


def write_solution(values: Mapping[str, float], path: str | Path, objective: float | None = None) -> Path:
    path = Path(path)
    lines = []
    if objective is not None:
        lines.append(f"# Objective value = {objective!r}")
    for name in sorted(values):
        lines.append(f"{name} {values[name]!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_solution(path: str | Path) -> dict[str, float]:
    """Parse ``name value`` lines (comments and blanks skipped)."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'name value', got {raw!r}")
        try:
            out[parts[0]] = float(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: value {parts[1]!r} is not a number") from None
    return out


def assignment_for_model(
    model: MilpModel, values: Mapping[str, float], fill_missing: float | None = None
) -> Assignment:
    """Wrap raw values as an assignment over the model's variables.

    Solver dumps routinely omit zero variables; pass ``fill_missing=0.0`` to
    complete them. With ``fill_missing=None`` any gap raises
    MissingVariableError naming the first absent variable.
    """
    complete: dict[str, float] = {}
    for v in model.variables:
        if v.name in values:
            complete[v.name] = float(values[v.name])
        elif fill_missing is not None:
            complete[v.name] = fill_missing
        else:
            raise MissingVariableError(v.name)
    return Assignment(values=complete)
