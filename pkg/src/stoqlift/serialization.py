"""JSON file formats for kernels, operators, maps, and scenarios.

Real matrix / vector: ``{"n": N, "rows": [[...], ...]}`` with rows listed top
to bottom; optional time stamps ``{"from_t": ..., "to_t": ...}``. A column
vector is an N x 1 matrix. Complex matrices use ``[re, im]`` pairs for each
entry. Kraus maps: ``{"ops": [complex-matrix, ...]}``. Generators:
``{"h": complex-matrix, "jumps": [complex-matrix, ...]}``. All numbers are
IEEE doubles in decimal text.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import GkslGenerator
from .errors import DimensionMismatchError
from .kernels import ProbabilityVector, RateMatrix, StochasticKernel
from .lifts import KrausMap, SuperOperator, to_superoperator


class SerializationError(ValueError):
    """Malformed or structurally inconsistent input file."""


def load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SerializationError(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise SerializationError(f"{path}: top-level JSON value must be an object")
    return obj


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _expect_rows(obj: dict) -> tuple[int, list]:
    if "n" not in obj or "rows" not in obj:
        raise SerializationError('matrix object needs "n" and "rows" keys')
    n = obj["n"]
    rows = obj["rows"]
    if not isinstance(n, int) or n < 1:
        raise SerializationError(f'"n" must be a positive integer, got {n!r}')
    if not isinstance(rows, list) or len(rows) != n:
        raise SerializationError(
            f'"rows" must list exactly n={n} rows, got {len(rows) if isinstance(rows, list) else type(rows).__name__}')
    return n, rows


def real_matrix_from_json(obj: dict) -> np.ndarray:
    n, rows = _expect_rows(obj)
    try:
        m = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SerializationError(f"rows are not real numbers: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != n:
        raise SerializationError(f"rows do not form an {n}-row matrix")
    return m


def real_matrix_to_json(matrix, from_time=None, to_time=None) -> dict:
    m = np.asarray(matrix, dtype=float)
    obj = {"n": int(m.shape[0]), "rows": [[float(x) for x in row] for row in m]}
    if from_time is not None:
        obj["from_t"] = float(from_time)
    if to_time is not None:
        obj["to_t"] = float(to_time)
    return obj


def complex_matrix_from_json(obj: dict) -> np.ndarray:
    n, rows = _expect_rows(obj)
    try:
        raw = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SerializationError(
            f"complex entries must be [re, im] pairs: {exc}") from exc
    if raw.ndim != 3 or raw.shape[0] != n or raw.shape[2] != 2:
        raise SerializationError(
            f"complex matrix rows must be lists of [re, im] pairs, got shape {raw.shape}")
    return raw[..., 0] + 1j * raw[..., 1]


def complex_matrix_to_json(matrix) -> dict:
    m = np.asarray(matrix, dtype=complex)
    rows = [[[float(x.real), float(x.imag)] for x in row] for row in m]
    return {"n": int(m.shape[0]), "rows": rows}


def kernel_from_json(obj: dict) -> StochasticKernel:
    m = real_matrix_from_json(obj)
    try:
        return StochasticKernel(m, from_time=obj.get("from_t"),
                                to_time=obj.get("to_t"))
    except DimensionMismatchError as exc:
        raise SerializationError(str(exc)) from exc


def kernel_to_json(kernel: StochasticKernel) -> dict:
    return real_matrix_to_json(kernel.matrix, kernel.from_time, kernel.to_time)


def probability_vector_from_json(obj: dict) -> ProbabilityVector:
    n, rows = _expect_rows(obj)
    try:
        m = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SerializationError(f"rows are not real numbers: {exc}") from exc
    if m.shape != (n, 1):
        raise SerializationError(
            f"a probability vector is an n x 1 matrix, got shape {m.shape}")
    return ProbabilityVector(m[:, 0])


def probability_vector_to_json(p: ProbabilityVector) -> dict:
    return {"n": p.n, "rows": [[float(x)] for x in p.entries]}


def rate_matrix_from_json(obj: dict) -> RateMatrix:
    return RateMatrix(real_matrix_from_json(obj))


def kraus_from_json(obj: dict) -> KrausMap:
    if "ops" not in obj or not isinstance(obj["ops"], list) or not obj["ops"]:
        raise SerializationError('Kraus object needs a nonempty "ops" list')
    return KrausMap([complex_matrix_from_json(op) for op in obj["ops"]])


def kraus_to_json(kmap: KrausMap) -> dict:
    return {"ops": [complex_matrix_to_json(op) for op in kmap.operators]}


def superoperator_from_json(obj: dict) -> SuperOperator:
    """Accepts either a complex matrix of side N^2 or a Kraus object."""
    if "ops" in obj:
        return to_superoperator(kraus_from_json(obj))
    return SuperOperator(complex_matrix_from_json(obj))


def superoperator_to_json(s: SuperOperator) -> dict:
    return complex_matrix_to_json(s.matrix)


def generator_from_json(obj: dict) -> GkslGenerator:
    if "h" not in obj:
        raise SerializationError('generator object needs an "h" key')
    h = complex_matrix_from_json(obj["h"])
    jumps = [complex_matrix_from_json(j) for j in obj.get("jumps", [])]
    return GkslGenerator(h, jumps)


def generator_to_json(gen: GkslGenerator) -> dict:
    return {"h": complex_matrix_to_json(gen.hamiltonian),
            "jumps": [complex_matrix_to_json(op) for op in gen.jump_ops]}


def division_scenario_from_json(obj: dict) -> dict:
    """Parse an environment-division scenario file.

    Expected keys: ``n_sys``, ``n_env``, ``p_env`` (probability vector),
    ``interaction`` (superoperator or Kraus object on the joint space),
    ``post_sys`` and ``post_env`` (superoperator or Kraus objects on the
    factors). The returned dict feeds
    :func:`stoqlift.division.environment_division_scenario` directly.
    """
    for key in ("n_sys", "n_env", "p_env", "interaction", "post_sys", "post_env"):
        if key not in obj:
            raise SerializationError(f'scenario object needs a "{key}" key')
    n_sys, n_env = obj["n_sys"], obj["n_env"]
    if not (isinstance(n_sys, int) and isinstance(n_env, int)
            and n_sys >= 1 and n_env >= 1):
        raise SerializationError("n_sys and n_env must be positive integers")
    p_env = probability_vector_from_json(obj["p_env"])
    interaction = superoperator_from_json(obj["interaction"])
    post_sys = superoperator_from_json(obj["post_sys"])
    post_env = superoperator_from_json(obj["post_env"])
    if p_env.n != n_env or interaction.n != n_sys * n_env:
        raise SerializationError(
            "scenario dimensions disagree: environment vector has "
            f"{p_env.n} entries, joint map acts on dimension {interaction.n}, "
            f"declared {n_sys} x {n_env}")
    if post_sys.n != n_sys or post_env.n != n_env:
        raise SerializationError(
            "post maps must act on the declared factor dimensions")
    return {"p_env": p_env, "record_interaction": interaction,
            "post_system": post_sys, "post_env": post_env}


def detect_kind(obj: dict) -> str:
    """Infer what a file describes: explicit "kind" wins, else structure decides."""
    kind = obj.get("kind")
    if kind is not None:
        return str(kind)
    if "ops" in obj:
        return "kraus"
    if "h" in obj:
        return "generator"
    if "rows" in obj:
        rows = obj["rows"]
        try:
            first = rows[0][0]
        except (TypeError, IndexError, KeyError):
            raise SerializationError("cannot infer file kind from structure")
        return "complex-matrix" if isinstance(first, list) else "kernel"
    raise SerializationError("cannot infer file kind from structure")
