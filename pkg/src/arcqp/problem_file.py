"""JSON problem files and CSV outputs."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .lqr import LqrProblem, weight_scaling
from .qp_core import BoxQP, ProblemError


def _matrix(doc, key, *, vector=False):
    if key not in doc:
        raise ProblemError(f"missing field {key!r}")
    try:
        arr = np.array(doc[key], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"field {key!r} is not a numeric array: {exc}") from exc
    if vector and arr.ndim != 1:
        raise ProblemError(f"field {key!r} must be a flat list, got {arr.ndim} dimensions")
    if not vector and arr.ndim != 2:
        raise ProblemError(f"field {key!r} must be a list of rows, got {arr.ndim} dimensions")
    return arr


def parse_problem(doc: dict) -> BoxQP | LqrProblem:
    """Build a problem from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ProblemError("problem file must contain a JSON object")
    kind = doc.get("type")
    if kind == "box_qp":
        H = _matrix(doc, "H")
        c = _matrix(doc, "c", vector=True)
        if "n" in doc and doc["n"] != c.size:
            raise ProblemError(f"n={doc['n']} does not match len(c)={c.size}")
        return BoxQP(H, c)
    if kind == "lqr":
        N = doc.get("N")
        if not isinstance(N, int) or isinstance(N, bool):
            raise ProblemError(f"field 'N' must be an integer, got {N!r}")
        lqr = LqrProblem(
            A=_matrix(doc, "A"),
            B=_matrix(doc, "B"),
            P=_matrix(doc, "P"),
            Q=_matrix(doc, "Q"),
            R=_matrix(doc, "R"),
            N=N,
            x0=_matrix(doc, "x0", vector=True),
        )
        h = doc.get("weight_scale_h")
        if h is not None:
            try:
                lqr = weight_scaling(lqr, float(h))
            except ValueError as exc:
                raise ProblemError(str(exc)) from exc
        return lqr
    raise ProblemError(f"unknown problem type {kind!r}; expected 'box_qp' or 'lqr'")


def load_problem(path: str | os.PathLike) -> BoxQP | LqrProblem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON: {exc}") from exc
    return parse_problem(doc)


def problem_to_doc(problem: BoxQP | LqrProblem) -> dict:
    # json serialises floats with repr, which round-trips every double exactly
    if isinstance(problem, BoxQP):
        return {"type": "box_qp", "n": problem.n,
                "H": problem.H.tolist(), "c": problem.c.tolist()}
    return {
        "type": "lqr",
        "A": problem.A.tolist(),
        "B": problem.B.tolist(),
        "P": problem.P.tolist(),
        "Q": problem.Q.tolist(),
        "R": problem.R.tolist(),
        "N": problem.N,
        "x0": problem.x0.tolist(),
    }


def write_problem(path: str | os.PathLike, problem: BoxQP | LqrProblem) -> None:
    atomic_write(path, json.dumps(problem_to_doc(problem), indent=1) + "\n")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> None:
    atomic_write(path, csv_text(header, rows))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a file written by :func:`write_csv`."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data.reshape(-1, len(header))
