"""A small, independent LP-format reader used to verify exports.

Understands the subset of the LP grammar the exporter emits (every term
written as an explicit coefficient-name pair, one constraint per line,
binaries possibly wrapped over several lines) without importing anything
from the writer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class ParsedLp:
    objective: dict[str, float]
    sense: str  # "max" | "min"
    rows: list[tuple[str, dict[str, float], str, float]]  # name, coeffs, sense, rhs
    bounds: dict[str, tuple[float, float]]
    binaries: set[str]


def _parse_terms(tokens: list[str]) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign = 1.0
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "+":
            sign = 1.0
            i += 1
        elif tok == "-":
            sign = -1.0
            i += 1
        else:
            coef = float(tok)
            name = tokens[i + 1]
            coeffs[name] = coeffs.get(name, 0.0) + sign * coef
            sign = 1.0
            i += 2
    return coeffs


def parse_lp(text: str) -> ParsedLp:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    objective: dict[str, float] = {}
    obj_sense = "max"
    rows: list[tuple[str, dict[str, float], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()
    for raw in lines:
        stripped = raw.strip()
        lowered = stripped.lower()
        if lowered in ("maximize", "maximise", "max"):
            section, obj_sense = "objective", "max"
            continue
        if lowered in ("minimize", "minimise", "min"):
            section, obj_sense = "objective", "min"
            continue
        if lowered in ("subject to", "st", "s.t.", "such that"):
            section = "rows"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if lowered in ("general", "generals", "integers"):
            section = "general"
            continue
        if lowered == "end":
            break
        if section == "objective":
            body = stripped.split(":", 1)[1] if ":" in stripped else stripped
            objective.update(_parse_terms(body.split()))
        elif section == "rows":
            name, body = stripped.split(":", 1)
            tokens = body.split()
            sense_idx = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
            coeffs = _parse_terms(tokens[:sense_idx])
            rows.append((name.strip(), coeffs, tokens[sense_idx], float(tokens[sense_idx + 1])))
        elif section == "bounds":
            tokens = stripped.split()
            if len(tokens) == 3:
                name, op, value = tokens
                lb, ub = 0.0, math.inf
                if op == "<=":
                    ub = float(value)
                elif op == ">=":
                    lb = float(value)
                else:
                    raise ValueError(f"unsupported bound line {raw!r}")
                bounds[name] = (lb, ub)
            elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                bounds[tokens[2]] = (float(tokens[0]), float(tokens[4]))
            else:
                raise ValueError(f"unsupported bound line {raw!r}")
        elif section == "binaries":
            binaries.update(stripped.split())
    return ParsedLp(
        objective=objective, sense=obj_sense, rows=rows, bounds=bounds, binaries=binaries
    )
