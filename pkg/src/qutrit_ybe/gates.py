"""Two-qutrit rotation gates and their embedding into N-qutrit registers.

Basis convention: site 0 is the most significant ternary digit, so for three
qutrits the ket |q0 q1 q2> sits at index 9*q0 + 3*q1 + q2 (|202> -> 20).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .spin_algebra import AXES, AxisWeights, spin_operator, weighted_generator

MAX_SITES = 6

# Levels coupled by S~a: S~a[p, q] = +i, S~a[q, p] = -i, third level is a spectator.
ACTIVE_LEVELS = {"x": (1, 2), "y": (0, 2), "z": (0, 1)}


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def pair_generator(w: AxisWeights) -> np.ndarray:
    """G (x) G with G the adjoint-representation weighted generator."""
    g = weighted_generator(w)
    return np.kron(g, g)


def xy_generator() -> np.ndarray:
    """S~x (x) S~x + S~y (x) S~y."""
    sx, sy = spin_operator("x"), spin_operator("y")
    return np.kron(sx, sx) + np.kron(sy, sy)


@lru_cache(maxsize=None)
def _eig(key):
    if key == "xy":
        h = xy_generator()
    else:
        h = pair_generator(key)
    return np.linalg.eigh(h)


def _from_eig(key, angle: float) -> np.ndarray:
    w, v = _eig(key)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def closed_form_single_axis(axis: str, angle: float) -> np.ndarray:
    """U_a(angle) = exp(-i angle S~a (x) S~a) assembled block by block.

    In 3x3 blocks indexed by the first qutrit level, the two active levels
    (p, q) carry ``I - 2 sin^2(angle/2) S^2`` on the diagonal and
    ``+-sin(angle) S`` off the diagonal; the spectator level gets ``I``.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    s = spin_operator(axis)
    p, q = ACTIVE_LEVELS[axis]
    diag_block = np.eye(3) - 2.0 * (np.sin(angle / 2) * s) @ (np.sin(angle / 2) * s)
    off_block = np.sin(angle) * s
    blocks = [[np.zeros((3, 3), dtype=complex) for _ in range(3)] for _ in range(3)]
    spectator = 3 - p - q
    blocks[spectator][spectator] = np.eye(3, dtype=complex)
    blocks[p][p] = diag_block
    blocks[q][q] = diag_block
    blocks[p][q] = off_block
    blocks[q][p] = -off_block
    return np.block(blocks)


def gate_matrix(w: AxisWeights, angle: float) -> np.ndarray:
    """exp(-i angle G (x) G), G = sum_a s_a S~a.

    A single +-1 weight uses the closed form (the sign squares away);
    mixed weights go through the eigendecomposition of the 9x9 generator.
    """
    if w.single_axis is not None:
        return closed_form_single_axis(w.single_axis, angle)
    return _from_eig(w, angle)


def xy_pair_gate(angle: float) -> np.ndarray:
    """exp(-i angle (S~x (x) S~x + S~y (x) S~y))."""
    return _from_eig("xy", angle)


def _check_register(left_site: int, n_sites: int) -> None:
    if not 2 <= n_sites <= MAX_SITES:
        raise ValueError(f"n_sites must be in [2, {MAX_SITES}], got {n_sites}")
    if not 0 <= left_site <= n_sites - 2:
        raise ValueError(f"left_site {left_site} out of range for {n_sites} sites")


def embed(gate: np.ndarray, left_site: int, n_sites: int) -> np.ndarray:
    """I^(left_site) (x) gate (x) I^(n_sites - left_site - 2)."""
    _check_register(left_site, n_sites)
    if gate.shape != (9, 9):
        raise ValueError(f"expected a 9x9 two-qutrit gate, got {gate.shape}")
    left = np.eye(3**left_site)
    right = np.eye(3 ** (n_sites - left_site - 2))
    return np.kron(np.kron(left, gate), right)


def embed_two_site_operator(op: np.ndarray, i: int, j: int, n_sites: int) -> np.ndarray:
    """Place a 9x9 operator on an arbitrary ordered site pair (i, j), i != j."""
    if not (0 <= i < n_sites and 0 <= j < n_sites and i != j):
        raise ValueError(f"bad site pair ({i}, {j}) for {n_sites} sites")
    if n_sites > MAX_SITES:
        raise ValueError(f"n_sites must be <= {MAX_SITES}")
    rest = [k for k in range(n_sites) if k not in (i, j)]
    full = np.kron(op, np.eye(3 ** len(rest))).reshape((3,) * (2 * n_sites))
    # full currently acts on the site order (i, j, *rest); move axes back into place.
    order = [i, j, *rest]
    inv = np.argsort(order)
    axes = list(inv) + [n_sites + k for k in inv]
    dim = 3**n_sites
    return full.transpose(axes).reshape(dim, dim)
