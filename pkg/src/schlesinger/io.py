"""Reading and writing system description files.

Format (JSON syntax)::

    {
      "gauge": "sl2",
      "poles": [[0.0, 0.0], [1.0, 0.0], "inf"],
      "residues": [[[[re, im], [re, im]], [[re, im], [re, im]]], ...],
      "marking": [[re, im], ...]
    }

Complex numbers are ``[re, im]`` pairs, the point at infinity is ``"inf"``
and ``marking`` is optional.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import InvalidSystem
from .fuchsian import INF, POLE_SEPARATION, TOL_ALG, FuchsianSystem, is_inf

FIELDS = ("gauge", "poles", "residues", "marking")


class SystemFileError(InvalidSystem):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _element_lines(text, key):
    """Line numbers at which the elements of the top-level array ``key`` start."""
    start = text.find(f'"{key}"')
    if start < 0:
        return []
    i = text.find("[", start)
    if i < 0:
        return []
    lines, depth, in_str, expect = [], 0, False, True
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            if depth == 1 and expect:
                lines.append(text.count("\n", 0, i) + 1)
                expect = False
        elif ch in "[{":
            if depth == 1 and expect:
                lines.append(text.count("\n", 0, i) + 1)
                expect = False
            depth += 1
        elif ch in "]}":
            depth -= 1
            if depth == 0:
                break
        elif ch == "," and depth == 1:
            expect = True
        elif depth == 1 and expect and not ch.isspace():
            lines.append(text.count("\n", 0, i) + 1)
            expect = False
        i += 1
    return lines


def _complex(value, what):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ValueError(f"{what}: expected [re, im], got {value!r}")


def _matrix(value, what):
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(r, list) and len(r) == 2 for r in value)):
        raise ValueError(f"{what}: expected a 2x2 matrix of [re, im] pairs")
    return np.array([[_complex(v, what) for v in row] for row in value], dtype=complex)


def parse_system(text):
    """Parse a system description; errors carry the offending line number."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(exc.msg, exc.lineno) from None
    if not isinstance(data, dict):
        raise SystemFileError("top level must be an object", 1)
    for key in ("poles", "residues"):
        if key not in data:
            raise SystemFileError(f"missing field {key!r}")
    unknown = set(data) - set(FIELDS)
    if unknown:
        raise SystemFileError(f"unknown fields {sorted(unknown)}")
    gauge = data.get("gauge", "sl2")
    pole_lines = _element_lines(text, "poles")
    res_lines = _element_lines(text, "residues")
    mark_lines = _element_lines(text, "marking")

    def line(lines, k):
        return lines[k] if k < len(lines) else None

    poles = []
    for k, p in enumerate(data["poles"]):
        if p == "inf":
            poles.append(INF)
            continue
        try:
            poles.append(_complex(p, f"pole {k}"))
        except ValueError as exc:
            raise SystemFileError(str(exc), line(pole_lines, k)) from None
    for k, p in enumerate(poles):
        for j in range(k):
            q = poles[j]
            same = (is_inf(p) and is_inf(q)) or (
                not is_inf(p) and not is_inf(q) and abs(p - q) < POLE_SEPARATION)
            if same:
                raise SystemFileError(f"pole {k} duplicates pole {j}", line(pole_lines, k))
    if len(data["residues"]) != len(poles):
        raise SystemFileError("one residue per pole expected", line(res_lines, 0))
    residues = []
    for k, r in enumerate(data["residues"]):
        try:
            B = _matrix(r, f"residue {k}")
        except ValueError as exc:
            raise SystemFileError(str(exc), line(res_lines, k)) from None
        if gauge == "sl2" and abs(np.trace(B)) > TOL_ALG * max(1.0, np.abs(B).max()):
            raise SystemFileError(f"residue {k} has trace {np.trace(B):.3e} in an sl2 system",
                                  line(res_lines, k))
        residues.append(B)
    marking = None
    if data.get("marking") is not None:
        try:
            marking = tuple(_complex(m, f"marking {k}") for k, m in enumerate(data["marking"]))
        except ValueError as exc:
            raise SystemFileError(str(exc), line(mark_lines, 0)) from None
    try:
        return FuchsianSystem(tuple(poles), tuple(residues), gauge, marking)
    except InvalidSystem as exc:
        raise SystemFileError(str(exc)) from None


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def _num(x):
    x = float(x)
    return 0.0 if x == 0 else x


def _pair(z):
    z = complex(z)
    return f"[{json.dumps(_num(z.real))}, {json.dumps(_num(z.imag))}]"


def format_system(system):
    """Canonical JSON text: fixed field order, one pole or residue per line."""
    poles = ['"inf"' if is_inf(p) else _pair(p) for p in system.poles]
    res = ["[" + ", ".join("[" + ", ".join(_pair(v) for v in row) + "]" for row in B) + "]"
           for B in system.residues]
    marks = [_pair(m) for m in system.marking]

    def block(items):
        return "[\n    " + ",\n    ".join(items) + "\n  ]"

    return ("{\n"
            f'  "gauge": "{system.gauge}",\n'
            f'  "poles": {block(poles)},\n'
            f'  "residues": {block(res)},\n'
            f'  "marking": {block(marks)}\n'
            "}\n")


def save_system(system, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_system(system))


def complex_json(value):
    """Convert nested complex data to ``[re, im]`` pairs for ``json.dumps``."""
    if isinstance(value, dict):
        return {str(k): complex_json(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return complex_json(value.tolist())
    if isinstance(value, (list, tuple)):
        return [complex_json(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [_num(value.real), _num(value.imag)]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if is_inf(value):
        return "inf"
    return value
