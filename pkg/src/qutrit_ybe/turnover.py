"""Exact three-qutrit turnover (Yang-Baxter-like) identities.

The identity checked everywhere is, with R a fixed two-qutrit rotation family,

    (R(a) x I)(I x R(b))(R(c) x I) = (I x R(d))(R(e) x I)(I x R(f))

which holds whenever e = a + c and d + f = b (mod 2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Union

import numpy as np

from .circuit import Circuit, GateInstance, generator_label, pair_gate
from .gates import ACTIVE_LEVELS, embed, gate_matrix
from .spin_algebra import AXES, AxisWeights, conjugation_matrix, dagger

GateFamily = Callable[[float], np.ndarray]

_Y = np.array([[0, -1j], [1j, 0]])


class TurnoverError(ValueError):
    """Raised when a gate triple does not match the turnover pattern."""

    def __init__(self, message: str, gate_index: int | None = None):
        super().__init__(message)
        self.gate_index = gate_index


@dataclass(frozen=True)
class TurnoverInstance:
    """Angles of one turnover; ``epsilon`` and ``zeta`` follow from the rest.

    ``epsilon_offset`` breaks the constraint on purpose (negative controls).
    """

    generator: Union[str, AxisWeights, GateFamily]
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon_offset: float = 0.0

    @property
    def epsilon(self) -> float:
        return self.alpha + self.gamma + self.epsilon_offset

    @property
    def zeta(self) -> float:
        return self.beta - self.delta


def gate_family(generator) -> GateFamily:
    """angle -> 9x9 gate for an axis name, AxisWeights, or a callable."""
    if callable(generator):
        return generator
    if isinstance(generator, AxisWeights):
        return lambda a: gate_matrix(generator, a)
    if generator in AXES:
        w = AxisWeights.axis(generator)
        return lambda a: gate_matrix(w, a)
    raise ValueError(f"generator {generator!r} has no exact turnover")


def turnover_sides(family: GateFamily, angles_lhs, angles_rhs) -> tuple[np.ndarray, np.ndarray]:
    """27x27 operator products of both sides, angles listed left to right as written."""
    a, b, c = angles_lhs
    d, e, f = angles_rhs
    lhs = embed(family(a), 0, 3) @ embed(family(b), 1, 3) @ embed(family(c), 0, 3)
    rhs = embed(family(d), 1, 3) @ embed(family(e), 0, 3) @ embed(family(f), 1, 3)
    return lhs, rhs


def turnover_residual(t: TurnoverInstance) -> float:
    """Frobenius norm of LHS - RHS."""
    lhs, rhs = turnover_sides(
        gate_family(t.generator), (t.alpha, t.beta, t.gamma), (t.delta, t.epsilon, t.zeta)
    )
    return float(np.linalg.norm(lhs - rhs))


def simple_identity_suite(axis: str, alpha: float) -> float:
    """Max residual over the equal-angle turnover chains and neighbour commutation."""
    u = gate_family(axis)

    def e(site, angle):
        return embed(u(angle), site, 3)

    chains = [
        # U01 U12 U01 = U01(2a) U12 = U12 U01(2a)
        (e(0, alpha) @ e(1, alpha) @ e(0, alpha), e(0, 2 * alpha) @ e(1, alpha)),
        (e(0, 2 * alpha) @ e(1, alpha), e(1, alpha) @ e(0, 2 * alpha)),
        # U12 U01 U12 = U01 U12(2a) = U12(2a) U01
        (e(1, alpha) @ e(0, alpha) @ e(1, alpha), e(0, alpha) @ e(1, 2 * alpha)),
        (e(0, alpha) @ e(1, 2 * alpha), e(1, 2 * alpha) @ e(0, alpha)),
        # U01 U12(2a) U01 = U12 U01(2a) U12
        (e(0, alpha) @ e(1, 2 * alpha) @ e(0, alpha), e(1, alpha) @ e(0, 2 * alpha) @ e(1, alpha)),
        (e(0, alpha) @ e(1, alpha), e(1, alpha) @ e(0, alpha)),
    ]
    return max(float(np.linalg.norm(a - b)) for a, b in chains)


# Conjugations C with C^dag S~c C = (S~a +- S~b) * const, as (C kind, axis c, weights).
PAIR_FAMILIES = {
    AxisWeights(1, 0, 1): ("Uplus", "y"),
    AxisWeights(1, 0, -1): ("Uminus", "y"),
    AxisWeights(0, 1, -1): ("Vplus", "x"),
    AxisWeights(0, 1, 1): ("Vminus", "x"),
    AxisWeights(1, -1, 0): ("Wplus", "z"),
    AxisWeights(1, 1, 0): ("Wminus", "z"),
}

FULL_FAMILIES = {AxisWeights(1, -s1, s2): (s1, s2) for s1, s2 in product((1, -1), repeat=2)}

ALL_PAIR_WEIGHTS = tuple(PAIR_FAMILIES)
ALL_FULL_WEIGHTS = tuple(FULL_FAMILIES)


def conjugated_gate_family(w: AxisWeights) -> GateFamily:
    """exp(-i t G (x) G) built as (C (x) C)^dag U_c(k t) (C (x) C).

    G is taken up to overall sign (irrelevant inside G (x) G). k = 2 for the
    two-axis families (G = sqrt2 C^dag S~c C), k = 3 for the three-axis ones.
    """
    key = w if w in PAIR_FAMILIES or w in FULL_FAMILIES else AxisWeights(*(-s for s in w.as_tuple()))
    if key in PAIR_FAMILIES:
        kind, axis = PAIR_FAMILIES[key]
        c = conjugation_matrix(kind)
        scale = 2.0
    elif key in FULL_FAMILIES:
        c = conjugation_matrix("M", *FULL_FAMILIES[key])
        axis = "z"
        scale = 3.0
    else:
        raise ValueError(f"{w.label()} is a single-axis generator; no conjugation needed")
    cc = np.kron(c, c)
    ccd = dagger(cc)
    single = gate_family(axis)
    return lambda t: ccd @ single(scale * t) @ cc


def conjugated_family_residual(w: AxisWeights, alpha: float, beta: float, gamma: float,
                               delta: float, epsilon_offset: float = 0.0) -> float:
    """Turnover residual for a two- or three-axis family built by conjugation."""
    t = TurnoverInstance(conjugated_gate_family(w), alpha, beta, gamma, delta, epsilon_offset)
    return turnover_residual(t)


# --- qubit subspace decomposition -------------------------------------------------


def qubit_subspace_blocks(n_sites: int = 3, axis: str = "x") -> tuple[np.ndarray, list[int]]:
    """Permutation grouping basis states by which sites sit on the spectator level.

    Subspaces are ordered by the binary "active" mask with site 0 as the most
    significant bit (|000>, |00a>, |0a0>, |0ab>, |a00>, ... for x), and states
    inside a block keep their original relative order. Returns
    ``(perm, sizes)`` where ``perm[k]`` is the original index placed at k.
    """
    p, q = ACTIVE_LEVELS[axis]
    active = {p, q}
    groups: dict[int, list[int]] = {}
    for index in range(3**n_sites):
        digits = np.base_repr(index, 3).zfill(n_sites)
        mask = 0
        for d in digits:
            mask = 2 * mask + (int(d) in active)
        groups.setdefault(mask, []).append(index)
    order = sorted(groups)
    perm = np.array([i for m in order for i in groups[m]])
    return perm, [len(groups[m]) for m in order]


def permute(u: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """P U P^T for the permutation ``perm``."""
    return u[np.ix_(perm, perm)]


def split_blocks(u: np.ndarray, sizes: list[int]) -> tuple[list[np.ndarray], float]:
    """Diagonal blocks of an already-permuted matrix and the Frobenius mass off them."""
    blocks = []
    mask = np.ones(u.shape, dtype=bool)
    start = 0
    for s in sizes:
        blocks.append(u[start:start + s, start:start + s])
        mask[start:start + s, start:start + s] = False
        start += s
    return blocks, float(np.linalg.norm(u[mask]))


def qubit_restriction(site: int, angle: float, active_sites: tuple[int, ...]) -> np.ndarray:
    """Action of U_a^{site,site+1}(angle) inside one subspace, as a qubit operator.

    The adjoint generator restricted to its two active levels is -Y, so a gate
    with both sites active acts as exp(-i angle Y (x) Y) on those two qubits; if
    either site is on the spectator level the gate is the identity there.
    """
    k = len(active_sites)
    dim = 2**k
    if site in active_sites and site + 1 in active_sites:
        ops = [_Y if s in (site, site + 1) else np.eye(2) for s in active_sites]
        gen = ops[0]
        for o in ops[1:]:
            gen = np.kron(gen, o)
        return np.cos(angle) * np.eye(dim) - 1j * np.sin(angle) * gen
    return np.eye(dim, dtype=complex)


def active_sites_per_block(n_sites: int = 3) -> list[tuple[int, ...]]:
    """Active-site tuples of each block, in the order used by qubit_subspace_blocks."""
    return [
        tuple(s for s in range(n_sites) if (mask >> (n_sites - 1 - s)) & 1)
        for mask in range(2**n_sites)
    ]


# --- turnover as a rewrite ---------------------------------------------------------


def _check_exact_generator(gen, index):
    if gen == "xy":
        raise TurnoverError(f"gate {index}: generator 'xy' has no exact turnover", index)


def rewrite_turnover(c: Circuit, at: int, direction: str = "L->R") -> Circuit:
    """Replace the V-shaped triple starting at ``at`` by its mirror image.

    ``L->R`` expects sites (i, i+1, i) and returns (i+1, i, i+1); ``R->L`` the
    reverse. With angles (a, b, c) in application order the middle gate of
    the mirror gets a + c and the outer two get b/2 each.
    """
    if direction not in ("L->R", "R->L"):
        raise ValueError(f"direction must be 'L->R' or 'R->L', got {direction!r}")
    if not 0 <= at <= len(c.gates) - 3:
        raise TurnoverError(f"no gate triple at index {at} in a {len(c.gates)}-gate circuit", at)
    g1, g2, g3 = c.gates[at:at + 3]
    for k, g in enumerate((g1, g2, g3)):
        _check_exact_generator(g.gen, at + k)
    for k, g in ((1, g2), (2, g3)):
        if g.gen != g1.gen:
            raise TurnoverError(
                f"gate {at + k}: generator {generator_label(g.gen)!r} differs from "
                f"{generator_label(g1.gen)!r}", at + k)
    outer = g1.site
    inner = outer + 1 if direction == "L->R" else outer - 1
    if g3.site != outer:
        raise TurnoverError(f"gate {at + 2}: expected site {outer}, got {g3.site}", at + 2)
    if g2.site != inner:
        raise TurnoverError(f"gate {at + 1}: expected site {inner}, got {g2.site}", at + 1)
    half = g2.angle / 2
    mirrored = (
        GateInstance(g1.gen, inner, half),
        GateInstance(g1.gen, outer, g1.angle + g3.angle),
        GateInstance(g1.gen, inner, half),
    )
    return Circuit(c.n, c.gates[:at] + mirrored + c.gates[at + 3:])


def random_turnover_angles(rng: np.random.Generator, samples: int) -> np.ndarray:
    """``samples`` x 4 uniform draws of (alpha, beta, gamma, delta) in [0, 2 pi)."""
    return rng.uniform(0.0, 2 * math.pi, size=(samples, 4))


def turnover_suite(samples: int = 100, seed: int = 0, epsilon_offset: float = 0.0) -> dict[str, float]:
    """Max residual per generator family over random constrained angles.

    Families: the three single axes, every two-axis and three-axis sign
    pattern via the eigendecomposition route, and the same combinations via
    the conjugation route (suffix ``/conj``).
    """
    rng = np.random.default_rng(seed)
    angles = random_turnover_angles(rng, samples)
    out = {}
    families: list[tuple[str, object]] = [(a, a) for a in AXES]
    for w in ALL_PAIR_WEIGHTS + ALL_FULL_WEIGHTS:
        families.append((w.label(), w))
        families.append((w.label() + "/conj", conjugated_gate_family(w)))
    for name, gen in families:
        out[name] = max(
            turnover_residual(TurnoverInstance(gen, *row, epsilon_offset=epsilon_offset))
            for row in angles
        )
    return out


def _three_gate_product(axis: str, sites_angles) -> np.ndarray:
    u = np.eye(27, dtype=complex)
    for site, angle in sites_angles:
        u = embed(pair_gate(axis, angle), site, 3) @ u
    return u


def _qubit_product(sites_angles, active: tuple[int, ...]) -> np.ndarray:
    u = np.eye(2 ** len(active), dtype=complex)
    for site, angle in sites_angles:
        u = qubit_restriction(site, angle, active) @ u
    return u


def subspace_suite(samples: int = 20, seed: int = 0, epsilon_offset: float = 0.0) -> dict[str, float]:
    """Block structure of both turnover sides for each single axis.

    For every axis and sampled angle set, reports the largest off-block mass
    after permutation, the largest mismatch between a block and its qubit
    restriction, the size list check (0 if it is [1,2,2,4,2,4,4,8]), and the
    turnover residual inside the 8x8 all-active block.
    """
    rng = np.random.default_rng(seed)
    angles = random_turnover_angles(rng, samples)
    expected = [1, 2, 2, 4, 2, 4, 4, 8]
    active = active_sites_per_block(3)
    out = {}
    for axis in AXES:
        perm, sizes = qubit_subspace_blocks(3, axis)
        off, block_err, full = 0.0, 0.0, 0.0
        for a, b, c, d in angles:
            t = TurnoverInstance(axis, a, b, c, d, epsilon_offset)
            lhs_ops = ((0, a), (1, b), (0, c))[::-1]
            rhs_ops = ((1, t.delta), (0, t.epsilon), (1, t.zeta))[::-1]
            for ops in (lhs_ops, rhs_ops):
                blocks, mass = split_blocks(permute(_three_gate_product(axis, ops), perm), sizes)
                off = max(off, mass)
                for blk, act in zip(blocks, active):
                    block_err = max(block_err, float(np.linalg.norm(blk - _qubit_product(ops, act))))
            full = max(full, float(np.linalg.norm(
                _qubit_product(lhs_ops, (0, 1, 2)) - _qubit_product(rhs_ops, (0, 1, 2)))))
        out[f"{axis} off-block"] = off
        out[f"{axis} block restriction"] = block_err
        out[f"{axis} block sizes"] = 0.0 if sizes == expected else 1.0
        out[f"{axis} qubit turnover"] = full
    return out
