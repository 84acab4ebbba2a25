"""Instance files: line-delimited JSON objects, one instance per line.

Each object carries ``"v": 1`` and the fields below; complex scalars are
``[re, im]`` pairs (bare real numbers are accepted too)::

    {"v": 1, "dim": 2,
     "algebra_basis": [...],            # optional spanning set, default M_n
     "subalgebra_basis": [...],         # optional; default {p}' / weight zero / scalars
     "projection": [[...], ...],        # optional
     "cp_map": {"kind": "choi" | "kraus" | "state", "payload": ...},
                                        # state payload: {"vector": v}, {"density": M} or a bare vector
     "weights": [0, 1],                 # optional circle-action weights
     "targets": [[[...]]],              # optional matrices for the polar command
     "seed": 0, "tolerance": null}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numkernel as nk
from .cpstate import CPMap
from .errors import OpalgError, ParseError, ValidationError
from .gaugedecomp import CircleAction, weight_zero_subalgebra
from .staralg import StarAlgebra, algebra_from_generators, commutant

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
KNOWN_FIELDS = {
    "v", "dim", "algebra_basis", "subalgebra_basis", "projection", "cp_map",
    "weights", "seed", "tolerance", "targets", "name",
}


@dataclass(frozen=True, eq=False)
class Instance:
    dim: int
    algebra: StarAlgebra
    subalgebra: StarAlgebra
    cp_map: CPMap
    cp_kind: str
    projection: np.ndarray | None = None
    weights: tuple | None = None
    targets: tuple = ()
    seed: int = 0
    tolerance: float | None = None
    name: str = ""
    warnings: tuple = field(default=())


# decoding ----------------------------------------------------------------------------


def _scalar(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ParseError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        return complex(x[0], x[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {x!r}")


def decode_vector(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{where}: expected a non-empty list")
    return np.array([_scalar(x, f"{where}[{i}]") for i, x in enumerate(obj)], dtype=complex)


def decode_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(f"{where}: expected a list of rows")
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(obj)]
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{where}: ragged rows of lengths {sorted({len(r) for r in rows})}")
    return np.stack(rows)


def decode_matrices(obj, where: str) -> list[np.ndarray]:
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected a list of matrices")
    return [decode_matrix(m, f"{where}[{i}]") for i, m in enumerate(obj)]


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [encode_matrix(r) for r in m]


# validation --------------------------------------------------------------------------


def _square(m: np.ndarray, n: int, where: str) -> np.ndarray:
    if m.shape != (n, n):
        raise ValidationError(f"{where}: expected {n}x{n}, got {m.shape[0]}x{m.shape[1]}")
    return m


def _closed_algebra(n: int, mats: list[np.ndarray], where: str, notes: list[str]) -> StarAlgebra:
    span = StarAlgebra.span(np.array(mats)) if mats else StarAlgebra.scalars(n)
    if span.contains_unit and span.is_star_closed() and span.closure_residual() <= 1e-9:
        return span
    alg = algebra_from_generators(n, mats)
    notes.append(f"{where}: span is not a unital *-subalgebra; closed to dimension {alg.dim} (from {span.dim})")
    log.warning(notes[-1])
    return alg


def _cp_map(cfg, n: int) -> tuple[CPMap, str]:
    if not isinstance(cfg, dict) or "kind" not in cfg or "payload" not in cfg:
        raise ValidationError("cp_map: expected an object with 'kind' and 'payload'")
    kind, payload = cfg["kind"], cfg["payload"]
    if kind == "choi":
        c = decode_matrix(payload, "cp_map.payload")
        size = c.shape[0]
        if c.shape[0] != c.shape[1] or size % n:
            raise ValidationError(f"cp_map: Choi matrix of size {c.shape} is not (n*m)x(n*m) for n={n}")
        return CPMap(n, size // n, c), kind
    if kind == "kraus":
        ks = decode_matrices(payload, "cp_map.payload")
        if not ks or any(k.shape != ks[0].shape for k in ks) or ks[0].shape[1] != n:
            raise ValidationError(f"cp_map: Kraus operators must share a shape m x {n}")
        return CPMap.from_kraus(ks), kind
    if kind == "state":
        if isinstance(payload, dict) and set(payload) == {"density"}:
            rho = _square(decode_matrix(payload["density"], "cp_map.payload.density"), n, "cp_map.payload.density")
        else:
            if isinstance(payload, dict) and set(payload) == {"vector"}:
                payload = payload["vector"]
            x = decode_vector(payload, "cp_map.payload")
            if x.shape != (n,) or np.linalg.norm(x) == 0:
                raise ValidationError(f"cp_map: state vector must be a nonzero vector of length {n}")
            x = x / np.linalg.norm(x)
            rho = np.outer(x, x.conj())
        if not nk.is_hermitian(rho, 1e-9) or abs(np.trace(rho) - 1) > 1e-9 or np.linalg.eigvalsh(nk.hermitian_part(rho))[0] < -1e-9:
            raise ValidationError("cp_map: density must be Hermitian PSD with unit trace")
        return CPMap.state(rho), kind
    raise ValidationError(f"cp_map: unknown kind {kind!r}")


def instance_from_dict(obj: dict, where: str = "instance") -> Instance:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a JSON object")
    if obj.get("v") != SCHEMA_VERSION:
        raise ValidationError(f"{where}: unsupported schema version {obj.get('v')!r} (expected {SCHEMA_VERSION})")
    unknown = set(obj) - KNOWN_FIELDS
    if unknown:
        raise ValidationError(f"{where}: unknown fields {sorted(unknown)}")
    n = obj.get("dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"{where}: 'dim' must be a positive integer")
    if "cp_map" not in obj:
        raise ValidationError(f"{where}: 'cp_map' is required")
    notes: list[str] = []
    try:
        gens = [_square(m, n, "algebra_basis") for m in decode_matrices(obj["algebra_basis"], "algebra_basis")] if "algebra_basis" in obj else None
        algebra = StarAlgebra.full(n) if gens is None else _closed_algebra(n, gens, "algebra_basis", notes)
        proj = None
        if obj.get("projection") is not None:
            proj = _square(decode_matrix(obj["projection"], "projection"), n, "projection")
            if nk.opnorm(proj @ proj - proj) > 1e-9 or nk.opnorm(proj - proj.conj().T) > 1e-9:
                raise ValidationError("projection: not an orthogonal projection")
            if not algebra.contains(proj):
                raise ValidationError("projection: not in the algebra")
        weights = obj.get("weights")
        if weights is not None:
            if not isinstance(weights, list) or len(weights) != n or not all(isinstance(k, int) and not isinstance(k, bool) for k in weights):
                raise ValidationError(f"weights: expected {n} integers")
            weights = tuple(weights)
        if "subalgebra_basis" in obj:
            sub_gens = [_square(m, n, "subalgebra_basis") for m in decode_matrices(obj["subalgebra_basis"], "subalgebra_basis")]
            sub = _closed_algebra(n, sub_gens, "subalgebra_basis", notes)
        elif proj is not None:
            sub = commutant([proj], algebra)
        elif weights is not None:
            sub = weight_zero_subalgebra(CircleAction(weights))
        else:
            sub = StarAlgebra.scalars(n)
        if not sub.is_subalgebra_of(algebra):
            raise ValidationError("subalgebra_basis: not contained in the algebra")
        phi, kind = _cp_map(obj["cp_map"], n)
        targets = tuple(_square(m, n, f"targets[{i}]") for i, m in enumerate(decode_matrices(obj.get("targets", []), "targets")))
    except (ParseError, ValidationError):
        raise
    except OpalgError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    seed = obj.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError(f"{where}: 'seed' must be an unsigned integer")
    tol = obj.get("tolerance")
    if tol is not None and (not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0):
        raise ValidationError(f"{where}: 'tolerance' must be a positive number")
    return Instance(
        dim=n, algebra=algebra, subalgebra=sub, cp_map=phi, cp_kind=kind, projection=proj,
        weights=weights, targets=targets, seed=seed, tolerance=None if tol is None else float(tol),
        name=str(obj.get("name", "")), warnings=tuple(notes),
    )


def parse_instances(text: str, source: str = "<text>") -> list[Instance]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}:{lineno}: {exc.msg}") from exc
        out.append(instance_from_dict(obj, f"{source}:{lineno}"))
    if not out:
        raise ParseError(f"{source}: no instances found")
    return out


def load_instances(path) -> list[Instance]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return parse_instances(text, str(path))


def load_instance(path, index: int = 0) -> Instance:
    insts = load_instances(path)
    if not 0 <= index < len(insts):
        raise ValidationError(f"{path}: no instance at index {index}")
    return insts[index]


def instance_to_dict(inst: Instance) -> dict:
    """A JSON-ready description (bases as stored, orthonormalized)."""
    out = {
        "v": SCHEMA_VERSION,
        "dim": inst.dim,
        "algebra_basis": [encode_matrix(a) for a in inst.algebra.basis],
        "subalgebra_basis": [encode_matrix(b) for b in inst.subalgebra.basis],
        "cp_map": {"kind": "choi", "payload": encode_matrix(inst.cp_map.choi)},
        "seed": inst.seed,
    }
    if inst.projection is not None:
        out["projection"] = encode_matrix(inst.projection)
    if inst.weights is not None:
        out["weights"] = list(inst.weights)
    if inst.targets:
        out["targets"] = [encode_matrix(t) for t in inst.targets]
    if inst.tolerance is not None:
        out["tolerance"] = inst.tolerance
    if inst.name:
        out["name"] = inst.name
    return out
