"""
Continuous-angle synthesis fallback.

Gate-placement skeletons are tried in increasing length; the angles of each
skeleton are fitted to the target with Nelder-Mead on the Hilbert-Schmidt
infidelity. The first skeleton that reaches the tolerance wins.
"""

import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize

from src.circuits import Circuit, Gate
from src.gates import GateKind, GateSet
from src.unitary import apply_local, equal_up_to_phase
from src.utils.settings import get_settings

from .database import RewriteDB, lookup

logger = logging.getLogger(__name__)

Placement = Tuple[GateKind, Tuple[int, ...]]

# Extra simplex restarts from the best point when the fit stalls just short of tolerance
_POLISH_ROUNDS = 3


class SynthesisConfig(BaseModel):
    """Budget of the continuous fallback"""
    max_length: int = Field(3, ge=0)
    restarts: int = Field(4, ge=1)
    tolerance: float = Field(1e-6, gt=0)
    evaluation_budget: int = Field(2000, ge=1)
    seed: int = 0


def placements(gate_set: GateSet, qubits: int) -> List[Placement]:
    result: List[Placement] = []
    for kind in gate_set.kinds:
        if kind.arity > qubits:
            continue
        if kind.arity == 1:
            result.extend((kind, (q,)) for q in range(qubits))
        else:
            pairs = (itertools.combinations(range(qubits), 2) if kind.symmetric
                     else itertools.permutations(range(qubits), 2))
            result.extend((kind, pair) for pair in pairs)
    return result


def _redundant(skeleton: Tuple[Placement, ...]) -> bool:
    # Two identical neighbours fuse or cancel, so a shorter skeleton already covers them
    return any(a == b for a, b in zip(skeleton, skeleton[1:]))


def _skeleton_unitary(skeleton, angles, qubits: int) -> np.ndarray:
    dim = 2 ** qubits
    tensor = np.eye(dim, dtype=complex).reshape((2,) * qubits + (dim,))
    params = iter(angles)
    for kind, operands in skeleton:
        angle = next(params) if kind.parameterized else None
        tensor = apply_local(tensor, kind.local_matrix(angle), operands)
    return tensor.reshape(dim, dim)


def _infidelity(v: np.ndarray, u: np.ndarray) -> float:
    dim = u.shape[0]
    return max(0.0, 1.0 - abs(np.vdot(v, u)) ** 2 / dim ** 2)


def _to_circuit(skeleton, angles, qubits: int) -> Circuit:
    params = iter(angles)
    gates = [Gate(kind, operands, float(next(params)) if kind.parameterized else None)
             for kind, operands in skeleton]
    return Circuit(qubits, tuple(gates))


def _fit(skeleton, target: np.ndarray, qubits: int, cfg: SynthesisConfig,
         rng: np.random.Generator) -> Optional[Circuit]:
    n_params = sum(1 for kind, _ in skeleton if kind.parameterized)
    threshold = cfg.tolerance ** 2
    verify_tol = cfg.tolerance * target.shape[0]

    def accept(angles) -> Optional[Circuit]:
        candidate = _to_circuit(skeleton, angles, qubits)
        if equal_up_to_phase(_skeleton_unitary(skeleton, angles, qubits), target, verify_tol):
            return candidate
        return None

    if n_params == 0:
        if _infidelity(_skeleton_unitary(skeleton, (), qubits), target) <= threshold:
            return accept(())
        return None

    def objective(angles):
        return _infidelity(_skeleton_unitary(skeleton, angles, qubits), target)

    options = {"maxfev": cfg.evaluation_budget, "xatol": 1e-10, "fatol": 1e-16}
    for _ in range(cfg.restarts):
        result = minimize(objective, rng.uniform(-math.pi, math.pi, n_params),
                          method="Nelder-Mead", options=options)
        for _ in range(_POLISH_ROUNDS):
            if result.fun <= threshold or result.fun > 1e-4:
                break
            result = minimize(objective, result.x, method="Nelder-Mead", options=options)
        if result.fun <= threshold:
            found = accept(result.x)
            if found is not None:
                return found
    return None


def synthesize_shorter(unitary: np.ndarray, gate_set: GateSet, current_len: int,
                       cfg: Optional[SynthesisConfig] = None,
                       db: Optional[RewriteDB] = None) -> Optional[Circuit]:
    """
    Find a circuit strictly shorter than current_len implementing the
    unitary up to phase within cfg.tolerance * dim, or None.
    """
    cfg = cfg or SynthesisConfig()
    dim = unitary.shape[0]
    qubits = int(round(math.log2(dim)))
    if 2 ** qubits != dim or qubits > get_settings().synth_qubit_cap:
        raise ValueError(f"synthesis supports up to {get_settings().synth_qubit_cap} qubits, got dim {dim}")

    if db is not None and db.qubits == qubits:
        hit = lookup(db, unitary)
        if hit is not None and len(hit) < current_len:
            return hit

    max_length = min(current_len - 1, cfg.max_length)
    if max_length < 0:
        return None

    rng = np.random.default_rng(cfg.seed)
    options = placements(gate_set, qubits)
    for length in range(max_length + 1):
        for skeleton in itertools.product(options, repeat=length):
            if _redundant(skeleton):
                continue
            found = _fit(skeleton, unitary, qubits, cfg, rng)
            if found is not None:
                logger.debug(f"Synthesized length {length} < {current_len}")
                return found
    return None
