"""Trotter steps of the 3-site spin-1 XY chain, their mirror images, and compression.

Each scheme pairs a Trotter step ``W_L`` (every gate at the same angle) with
a mirrored step ``W_R`` whose gates carry independent angles. Gate lists are
in application order, i.e. the rightmost operator factor comes first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, GateInstance, circuit_unitary, merge_pass
from .gates import embed, pair_generator, xy_generator
from .spin_algebra import AxisWeights
from .optimizer import OptimizerConfig, OptResult, infidelity, minimize

N_QUTRITS = 3


@dataclass(frozen=True)
class SchemeSpec:
    name: str
    wl: tuple[tuple[str, int], ...]
    wr: tuple[tuple[str, int], ...]
    param_names: tuple[str, ...]

    @property
    def param_count(self) -> int:
        return len(self.wr)

    def __post_init__(self):
        if len(self.wl) != len(self.wr) or len(self.wr) != len(self.param_names):
            raise ValueError(f"{self.name}: W_L, W_R and parameter names must have equal length")


_T1_WL = (("x", 0), ("x", 1), ("y", 0), ("y", 1))

SCHEMES: dict[str, SchemeSpec] = {
    s.name: s
    for s in (
        SchemeSpec("T1", _T1_WL, (("y", 1), ("y", 0), ("x", 1), ("x", 0)), ("lambda", "zeta", "sigma", "mu")),
        SchemeSpec("T2", (("x", 0), ("y", 0), ("x", 1), ("y", 1)),
                   (("y", 1), ("x", 1), ("y", 0), ("x", 0)), ("lambda", "sigma", "zeta", "mu")),
        SchemeSpec("T3", (("xy", 0), ("xy", 1)), (("xy", 1), ("xy", 0)), ("lambda", "mu")),
        SchemeSpec("T4", (("x", 0), ("y", 1), ("x", 1), ("y", 0)),
                   (("y", 0), ("x", 1), ("y", 1), ("x", 0)), ("lambda", "sigma", "zeta", "mu")),
        SchemeSpec("T5", (("xy", 0), ("x", 1), ("y", 1)),
                   (("y", 1), ("x", 1), ("xy", 0)), ("lambda", "sigma", "mu")),
        SchemeSpec("T6", (("x", 0), ("xy", 1), ("y", 0)),
                   (("y", 0), ("xy", 1), ("x", 0)), ("lambda", "sigma", "mu")),
        # Exact reference: same-axis neighbours commute, so all angles = theta reproduces T1.
        SchemeSpec("TREF", _T1_WL, (("x", 1), ("x", 0), ("y", 1), ("y", 0)), ("lambda", "zeta", "sigma", "mu")),
    )
}

SCHEME_NAMES = tuple(SCHEMES)


def get_scheme(scheme: str | SchemeSpec) -> SchemeSpec:
    if isinstance(scheme, SchemeSpec):
        return scheme
    try:
        return SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEME_NAMES}") from None


def step_angle(J: float, t_total: float, n_steps: int) -> float:
    """Per-gate angle so that n_steps Trotter steps approximate exp(-i t H_XY).

    H_XY carries -J, hence theta = -J t / n.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    return -J * t_total / n_steps


def wl_circuit(scheme, theta: float) -> Circuit:
    spec = get_scheme(scheme)
    return Circuit(N_QUTRITS, [GateInstance(g, s, theta) for g, s in spec.wl])


def wr_circuit(scheme, params) -> Circuit:
    spec = get_scheme(scheme)
    params = [float(p) for p in params]
    if len(params) != spec.param_count:
        raise ValueError(f"{spec.name} takes {spec.param_count} parameters, got {len(params)}")
    return Circuit(N_QUTRITS, [GateInstance(g, s, p) for (g, s), p in zip(spec.wr, params)])


def trotter_circuit(scheme, theta: float, n_steps: int) -> Circuit:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    step = wl_circuit(scheme, theta)
    return Circuit(N_QUTRITS, step.gates * n_steps)


@lru_cache(maxsize=None)
def _spectral_terms(gen: str, site: int) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero eigenvalues and embedded spectral projectors of one gate generator.

    exp(-i a G) = I + sum_k (exp(-i a l_k) - 1) P_k, so a gate update is a
    weighted sum of fixed 27x27 matrices, exact at a = 0 and free of the
    cancellation a full projector sum would carry near the identity.
    """
    g = xy_generator() if gen == "xy" else pair_generator(AxisWeights.axis(gen))
    w, v = np.linalg.eigh(g)
    levels, projectors = [], []
    for lam in np.unique(np.round(w, 8)):
        if lam == 0:
            continue
        mask = np.abs(w - lam) < 1e-7
        cols = v[:, mask]
        levels.append(w[mask].mean())
        projectors.append(embed(cols @ cols.conj().T, site, N_QUTRITS))
    return np.array(levels), np.array(projectors)


_EYE = np.eye(3**N_QUTRITS, dtype=complex)


def _fast_unitary(pattern, angles) -> np.ndarray:
    # Skips the gate cache: optimiser parameters are never revisited.
    u = None
    for (g, s), a in zip(pattern, angles):
        levels, proj = _spectral_terms(g, s)
        gate = _EYE + np.tensordot(np.expm1(-1j * float(a) * levels), proj, axes=1)
        u = gate if u is None else gate @ u
    return u


def block_unitaries(scheme, theta: float, params) -> tuple[np.ndarray, np.ndarray]:
    """27x27 unitaries of W_L(theta) and W_R(params)."""
    spec = get_scheme(scheme)
    if len(params) != spec.param_count:
        raise ValueError(f"{spec.name} takes {spec.param_count} parameters, got {len(params)}")
    return _fast_unitary(spec.wl, [theta] * len(spec.wl)), _fast_unitary(spec.wr, params)


def reflection_cost(scheme, theta: float, n_b: int):
    """Return ``cost(params)`` = infidelity of W_L(theta)^n_b against W_R(params)^n_b."""
    spec = get_scheme(scheme)
    wl = np.linalg.matrix_power(_fast_unitary(spec.wl, [theta] * len(spec.wl)), n_b)

    def cost(params) -> float:
        wr = np.linalg.matrix_power(_fast_unitary(spec.wr, params), n_b)
        return infidelity(wl, wr)

    return cost


def optimize_reflection(scheme, theta: float, n_b: int, cfg: OptimizerConfig | None = None) -> OptResult:
    """Fit W_R angles so that W_R^n_b matches W_L(theta)^n_b; starts from all-theta."""
    spec = get_scheme(scheme)
    if n_b < 1:
        raise ValueError("n_b must be >= 1")
    if n_b > 5:
        warnings.warn(f"n_b={n_b} is outside the tested range 1..5", stacklevel=2)
    init = np.full(spec.param_count, float(theta))
    return minimize(reflection_cost(spec, theta, n_b), init, cfg)


@dataclass
class CompressionReport:
    original_gate_count: int
    compressed_gate_count: int
    substitutions_performed: int
    gates_merged: int
    max_unitary_deviation: float  # trace infidelity, compressed vs uncompressed

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def block_pattern(n_steps: int, n_b: int) -> list[str]:
    """'L'/'R' per Trotter block: keep one W_L, swap the next n_b for W_R, repeat.

    A tail shorter than n_b after a kept block stays W_L.
    """
    if n_b < 1:
        raise ValueError("n_b must be >= 1")
    out: list[str] = []
    while len(out) < n_steps:
        out.append("L")
        remaining = n_steps - len(out)
        out.extend("R" * n_b if remaining >= n_b else "L" * remaining)
    return out


def compressed_blocks(scheme, theta: float, n_steps: int, n_b: int, params) -> Circuit:
    """The substituted block sequence before any merging."""
    wl = wl_circuit(scheme, theta).gates
    wr = wr_circuit(scheme, params).gates
    gates: list[GateInstance] = []
    for b in block_pattern(n_steps, n_b):
        gates.extend(wl if b == "L" else wr)
    return Circuit(N_QUTRITS, gates)


def compress(scheme, theta: float, n_steps: int, n_b: int, params) -> tuple[Circuit, CompressionReport]:
    """Substitute W_R^n_b for alternate W_L^n_b runs, then merge same-generator neighbours."""
    if n_steps < n_b + 1:
        raise ValueError(f"need n_steps >= n_b + 1, got n_steps={n_steps}, n_b={n_b}")
    original = trotter_circuit(scheme, theta, n_steps)
    substituted = compressed_blocks(scheme, theta, n_steps, n_b, params)
    merged = merge_pass(substituted)
    deviation = infidelity(circuit_unitary(merged), circuit_unitary(original))
    report = CompressionReport(
        original_gate_count=len(original),
        compressed_gate_count=len(merged),
        substitutions_performed=block_pattern(n_steps, n_b).count("R") // n_b,
        gates_merged=len(substituted) - len(merged),
        max_unitary_deviation=deviation,
    )
    return merged, report


PREDICTED_PAIRS = (("T1", 1), ("T2", 4), ("T2", 5), ("T3", 2))


def predicted_reduced_gates(scheme: str, n_b: int, n: int) -> int:
    """Closed-form count of gates removed by compressing an n-step circuit.

    (T2, 4) and (T2, 5) use closed forms in n; (T3, 2) uses the exact
    count behind its "about 2n/3" and (T1, 1) removes one gate per block boundary.
    """
    if (scheme, n_b) not in PREDICTED_PAIRS:
        raise ValueError(f"no gate-count formula for scheme={scheme!r}, n_b={n_b}")
    if n <= n_b:
        raise ValueError(f"need n > n_b, got n={n}")
    if scheme == "T1":
        return n - 1
    if scheme == "T3":
        return 2 * n // 3 - 1 if n % 3 == 0 else 2 * (n // 3)
    if n_b == 4:
        return math.floor(2 * n / 5) - 1
    return n // 3 - 1 if n % 6 == 0 else 2 * (n // 6)
