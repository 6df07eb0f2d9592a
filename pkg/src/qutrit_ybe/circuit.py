"""Layered nearest-neighbour two-qutrit circuits.

Gates are stored in application order: ``gates[0]`` hits the state first, so
the circuit unitary is ``... @ U(gates[1]) @ U(gates[0])``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .gates import MAX_SITES, AxisWeights, embed, gate_matrix, xy_pair_gate

Generator = Union[str, AxisWeights]

SIMPLE_GENERATORS = ("x", "y", "z", "xy")


def _normalize_generator(gen) -> Generator:
    if isinstance(gen, AxisWeights):
        return gen
    if gen in SIMPLE_GENERATORS:
        return gen
    raise ValueError(f"unknown generator {gen!r}; expected one of {SIMPLE_GENERATORS} or AxisWeights")


def generator_label(gen: Generator) -> str:
    return gen.label() if isinstance(gen, AxisWeights) else gen


@dataclass(frozen=True)
class GateInstance:
    gen: Generator
    site: int
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "gen", _normalize_generator(self.gen))
        if not math.isfinite(self.angle):
            raise ValueError(f"gate angle must be finite, got {self.angle!r}")
        if self.site < 0:
            raise ValueError(f"negative site {self.site}")

    @property
    def sites(self) -> tuple[int, int]:
        return (self.site, self.site + 1)

    def matrix(self) -> np.ndarray:
        return pair_gate(self.gen, self.angle)

    def to_dict(self) -> dict:
        if isinstance(self.gen, AxisWeights):
            raise ValueError("weighted generators have no JSON encoding")
        return {"gen": self.gen, "site": self.site, "angle": self.angle}


def build_pair_gate(gen: Generator, angle: float) -> np.ndarray:
    """Uncached 9x9 unitary for a normalised generator."""
    if gen == "xy":
        return xy_pair_gate(angle)
    if isinstance(gen, AxisWeights):
        return gate_matrix(gen, angle)
    return gate_matrix(AxisWeights.axis(gen), angle)


@lru_cache(maxsize=4096)
def _pair_gate_cached(gen: Generator, angle: float) -> np.ndarray:
    m = build_pair_gate(gen, angle)
    m.setflags(write=False)
    return m


def pair_gate(gen: Generator, angle: float) -> np.ndarray:
    """9x9 unitary of one gate; read-only, memoised per (generator, angle)."""
    return _pair_gate_cached(_normalize_generator(gen), float(angle))


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[GateInstance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 2:
            raise ValueError(f"a circuit needs at least 2 qutrits, got {self.n}")
        for k, g in enumerate(self.gates):
            if g.site + 1 >= self.n:
                raise ValueError(f"gate {k} on sites {g.sites} outside a {self.n}-qutrit register")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("cannot concatenate circuits on different registers")
        return Circuit(self.n, self.gates + other.gates)

    def to_dict(self) -> dict:
        return {"n": self.n, "gates": [g.to_dict() for g in self.gates]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        try:
            gates = [GateInstance(g["gen"], int(g["site"]), float(g["angle"])) for g in data["gates"]]
            return cls(int(data["n"]), gates)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed circuit record: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n > MAX_SITES:
        raise ValueError(f"dense evaluation limited to {MAX_SITES} qutrits")
    u = np.eye(3**c.n, dtype=complex)
    for g in c.gates:
        u = embed(g.matrix(), g.site, c.n) @ u
    return u


def apply_gate(state: np.ndarray, gate: np.ndarray, site: int, n: int) -> np.ndarray:
    """Contract a 9x9 gate into sites (site, site+1) of a length-3^n vector."""
    psi = state.reshape((3**site, 9, 3 ** (n - site - 2)))
    return np.einsum("ab,ibj->iaj", gate, psi).reshape(-1)


def apply(state: np.ndarray, c: Circuit) -> np.ndarray:
    """Apply ``c`` gate by gate without forming the full unitary."""
    state = np.asarray(state)
    if state.shape != (3**c.n,):
        raise ValueError(f"state of shape {state.shape} does not match {c.n} qutrits")
    psi = state.astype(complex)
    for g in c.gates:
        psi = apply_gate(psi, g.matrix(), g.site, c.n)
    return psi


def basis_state(digits: Iterable[int]) -> np.ndarray:
    """|q0 q1 ... > as a dense vector, site 0 most significant."""
    digits = list(digits)
    index = 0
    for q in digits:
        if q not in (0, 1, 2):
            raise ValueError(f"qutrit level must be 0, 1 or 2, got {q}")
        index = 3 * index + q
    psi = np.zeros(3 ** len(digits), dtype=complex)
    psi[index] = 1.0
    return psi


def wrap_angle(angle: float) -> float:
    """Reduce to (-pi, pi]."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


def merge_pass(c: Circuit) -> Circuit:
    """Fuse same-generator gates on the same site pair.

    A later gate is folded into an earlier one when everything between them
    acts on sites disjoint from the pair; any overlapping gate with a
    different generator or pair blocks the fusion. Fused angles are wrapped
    into (-pi, pi] for generators with integer spectra (2*pi periodic gates);
    "xy" has eigenvalues +-sqrt(2), so its angles are left as summed.
    """
    out: list[GateInstance] = []
    for g in c.gates:
        target = None
        for k in range(len(out) - 1, -1, -1):
            h = out[k]
            if set(h.sites).isdisjoint(g.sites):
                continue
            if h.gen == g.gen and h.site == g.site:
                target = k
            break
        if target is None:
            out.append(g)
        else:
            h = out[target]
            angle = h.angle + g.angle
            out[target] = GateInstance(h.gen, h.site, angle if h.gen == "xy" else wrap_angle(angle))
    return Circuit(c.n, out)
