"""Exact and Trotterised evolution of the spin-1 XY chain; return probabilities."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .circuit import apply, basis_state, circuit_unitary, merge_pass
from .gates import MAX_SITES, embed_two_site_operator, xy_generator
from .trotter import block_pattern, compressed_blocks, step_angle, wl_circuit, wr_circuit

RETURN_STATE = (2, 0, 2)
RETURN_INDEX = 20  # |202> = 9*2 + 3*0 + 2
CSV_HEADER = ("J", "t", "method", "p", "gate_count")


@dataclass(frozen=True)
class HamiltonianSpec:
    J: float
    n_sites: int = 3
    boundary: str = "open"

    def __post_init__(self):
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if not 2 <= self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in [2, {MAX_SITES}]")

    def bonds(self) -> list[tuple[int, int]]:
        bonds = [(i, i + 1) for i in range(self.n_sites - 1)]
        if self.boundary == "periodic" and self.n_sites > 2:
            bonds.append((self.n_sites - 1, 0))
        return bonds


def hamiltonian_xy(spec: HamiltonianSpec) -> np.ndarray:
    """-J sum over bonds of (S~x S~x + S~y S~y)."""
    h2 = xy_generator()
    dim = 3**spec.n_sites
    h = np.zeros((dim, dim), dtype=complex)
    for i, j in spec.bonds():
        h += embed_two_site_operator(h2, i, j, spec.n_sites)
    return -spec.J * h


def exact_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


@dataclass(frozen=True)
class Exact:
    name = "exact"


@dataclass(frozen=True)
class Trotter:
    scheme: str
    n_steps: int

    @property
    def name(self) -> str:
        return f"trotter:{self.scheme}:{self.n_steps}"


@dataclass(frozen=True)
class Compressed:
    scheme: str
    n_steps: int
    n_b: int
    params: tuple[float, ...]

    @property
    def name(self) -> str:
        return f"compressed:{self.scheme}:{self.n_steps}:{self.n_b}"


Method = Union[Exact, Trotter, Compressed]


def time_grid(t_total: float = 5.0, dt: float = 0.025) -> np.ndarray:
    """Half-open grid [0, t_total) with spacing dt."""
    n = int(round(t_total / dt))
    return np.arange(n) * dt


def steps_at(t: float, t_total: float, n_steps: int) -> int:
    """Number of whole Trotter steps of a ``n_steps``-step run completed by time t."""
    dt = t_total / n_steps
    return min(int(math.floor(t / dt + 1e-9)), n_steps)


def _amplitude(psi: np.ndarray) -> float:
    return float(min(abs(psi[RETURN_INDEX]) ** 2, 1.0))


def return_probability(t: float, method: Method, J: float, t_total: float = 5.0,
                       boundary: str = "open") -> float:
    """|<202| U(t) |202>|^2 for one time point.

    Trotterised methods run the first floor(t / dt) steps of the ``n_steps``
    circuit that spans ``t_total``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    return float(return_probability_series([t], method, J, t_total, boundary)[0][0])


def _block_states(method, J, t_total, ks):
    """State after k blocks of the (possibly compressed) circuit, for each k in ks."""
    theta = step_angle(J, t_total, method.n_steps)
    psi0 = basis_state(RETURN_STATE)
    wl = circuit_unitary(wl_circuit(method.scheme, theta))
    if isinstance(method, Trotter):
        states = {}
        psi = psi0
        for k in range(max(ks) + 1):
            states[k] = psi
            psi = wl @ psi
        per_step = len(wl_circuit(method.scheme, theta))
        return [states[k] for k in ks], [per_step * k for k in ks]
    # A compressed run truncated at k steps is the compression of a k-step run.
    wr = circuit_unitary(wr_circuit(method.scheme, method.params))
    out, counts = [], []
    for k in ks:
        psi = psi0
        for b in block_pattern(k, method.n_b):
            psi = (wl if b == "L" else wr) @ psi
        out.append(psi)
        counts.append(_compressed_count(method, theta, k))
    return out, counts


def _compressed_count(method: Compressed, theta: float, k: int) -> int:
    if k == 0:
        return 0
    return len(merge_pass(compressed_blocks(method.scheme, theta, k, method.n_b, method.params)))


def return_probability_series(times: Sequence[float], method: Method, J: float,
                              t_total: float = 5.0, boundary: str = "open"):
    """Return probabilities and gate counts over ``times``.

    Returns ``(p, gate_count)`` arrays; the exact method reports gate count 0.
    """
    times = np.asarray(times, dtype=float)
    if isinstance(method, Exact):
        h = hamiltonian_xy(HamiltonianSpec(J, 3, boundary))
        w, v = np.linalg.eigh(h)
        overlaps = np.abs(v[RETURN_INDEX, :]) ** 2
        # overlaps sum to 1 analytically; dividing makes p(0) == 1 exactly
        amps = (np.exp(-1j * np.outer(times, w)) @ overlaps) / overlaps.sum()
        return np.minimum(np.abs(amps) ** 2, 1.0), np.zeros(len(times), dtype=int)
    ks = [steps_at(t, t_total, method.n_steps) for t in times]
    states, counts = _block_states(method, J, t_total, ks)
    return np.array([_amplitude(s) for s in states]), np.array(counts)


def parse_method(text: str, params_for=None) -> Method:
    """Parse ``exact``, ``trotter:T2:200`` or ``compressed:T2:200:5``.

    Compressed methods need fitted W_R angles; ``params_for(scheme, n_steps, n_b)``
    supplies them.
    """
    parts = text.split(":")
    kind = parts[0]
    if kind == "exact" and len(parts) == 1:
        return Exact()
    if kind == "trotter" and len(parts) == 3:
        return Trotter(parts[1], int(parts[2]))
    if kind == "compressed" and len(parts) == 4:
        if params_for is None:
            raise ValueError("compressed methods need fitted parameters")
        scheme, n_steps, n_b = parts[1], int(parts[2]), int(parts[3])
        return Compressed(scheme, n_steps, n_b, tuple(params_for(scheme, n_steps, n_b)))
    raise ValueError(f"cannot parse method {text!r}")


@dataclass
class SweepConfig:
    J: Sequence[float]
    methods: Sequence[str]
    t_total: float = 5.0
    dt: float = 0.025
    boundary: str = "open"


def dynamics_sweep(config: SweepConfig, params_for=None) -> list[tuple]:
    """Rows (J, t, method, p, gate_count) ordered by J, then method, then t."""
    times = time_grid(config.t_total, config.dt)
    rows = []
    for J in config.J:
        for text in config.methods:
            method = parse_method(text, (lambda s, n, b, J=J: params_for(s, n, b, J)) if params_for else None)
            p, counts = return_probability_series(times, method, J, config.t_total, config.boundary)
            rows.extend((J, float(t), method.name, float(pk), int(c)) for t, pk, c in zip(times, p, counts))
    return rows


def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def rows_to_csv(rows: Iterable[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for J, t, method, p, count in rows:
        # p lies in [0, 1]; fixed 12 decimals keeps p(0) printed as 1.000000000000
        writer.writerow([_fmt(J), _fmt(t), method, f"{p:.12f}", count])
    return buf.getvalue()


def write_csv(rows: Iterable[tuple], path: Path | str) -> None:
    path = Path(path)
    try:
        path.write_text(rows_to_csv(rows))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def norm_drift(state: np.ndarray, circuit) -> float:
    """| ||apply(state, circuit)|| - ||state|| |."""
    return abs(float(np.linalg.norm(apply(state, circuit))) - float(np.linalg.norm(state)))
