"""Spin-1 operators, permutations and conjugation unitaries as dense 3x3 matrices.

Every matrix here is written down from its entry table rather than derived
from another matrix, so the identity checks in :func:`algebra_checks` really
test the tables against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

AXES = ("x", "y", "z")
REPRESENTATIONS = ("standard", "adjoint")

# Exactness threshold for identities among small integer / sqrt(2) entries.
EXACT_TOL = 1e-14

_R2 = np.sqrt(2.0)
_R3 = np.sqrt(3.0)

_STANDARD = {
    "x": np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _R2,
    "y": np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _R2,
    "z": np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=complex),
}

_ADJOINT = {
    "x": np.array([[0, 0, 0], [0, 0, 1j], [0, -1j, 0]], dtype=complex),
    "y": np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=complex),
    "z": np.array([[0, 1j, 0], [-1j, 0, 0], [0, 0, 0]], dtype=complex),
}


@dataclass(frozen=True)
class AxisWeights:
    """Integer weights (s_x, s_y, s_z), each in {-1, 0, +1}, not all zero."""

    sx: int
    sy: int
    sz: int

    def __post_init__(self):
        for s in self.as_tuple():
            if s not in (-1, 0, 1):
                raise ValueError(f"axis weight must be -1, 0 or +1, got {s!r}")
        if not any(self.as_tuple()):
            raise ValueError("at least one axis weight must be nonzero")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.sx, self.sy, self.sz)

    @property
    def single_axis(self) -> str | None:
        """Axis name if exactly one weight is nonzero (with sign +1 or -1)."""
        nonzero = [a for a, s in zip(AXES, self.as_tuple()) if s]
        return nonzero[0] if len(nonzero) == 1 else None

    def label(self) -> str:
        sign = {1: "+", -1: "-"}
        return "".join(sign[s] + a for a, s in zip(AXES, self.as_tuple()) if s)

    @classmethod
    def axis(cls, name: str) -> "AxisWeights":
        return cls(*(int(a == name) for a in AXES))


def _check_axis(axis: str) -> None:
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def spin_operator(axis: str, representation: str = "adjoint") -> np.ndarray:
    """Return S^a (standard z-basis) or the adjoint-representation S~^a."""
    _check_axis(axis)
    if representation == "standard":
        return _STANDARD[axis].copy()
    if representation == "adjoint":
        return _ADJOINT[axis].copy()
    raise ValueError(f"unknown representation {representation!r}")


def _u_matrix(s: int) -> np.ndarray:
    return np.array([[-1, 0, s], [1j, 0, s * 1j], [0, _R2, 0]], dtype=complex) / _R2


def _v_matrix(s: int) -> np.ndarray:
    return np.array([[0, 1j, s * 1j], [0, -s, 1], [_R2, 0, 0]], dtype=complex) / _R2


def _w_matrix(s: int) -> np.ndarray:
    return np.array([[-s, 1, 0], [0, 0, _R2], [1j, s * 1j, 0]], dtype=complex) / _R2


def _m_matrix(s1: int, s2: int) -> np.ndarray:
    return np.array(
        [
            [-s1 * _R3 * 1j, _R3 * 1j, 0],
            [-s2 * 1j, -s1 * s2 * 1j, 2j],
            [s2 * _R2, s1 * s2 * _R2, _R2],
        ],
        dtype=complex,
    ) / np.sqrt(6.0)


_CONJUGATIONS = {
    "Py": lambda: np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex),
    "Pz": lambda: np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex),
    "Uplus": lambda: _u_matrix(+1),
    "Uminus": lambda: _u_matrix(-1),
    "Vplus": lambda: _v_matrix(+1),
    "Vminus": lambda: _v_matrix(-1),
    "Wplus": lambda: _w_matrix(+1),
    "Wminus": lambda: _w_matrix(-1),
}

CONJUGATION_KINDS = tuple(_CONJUGATIONS) + ("M",)


def conjugation_matrix(kind: str, s1: int | None = None, s2: int | None = None) -> np.ndarray:
    """Return one of the permutation / basis-change unitaries.

    ``kind`` is one of ``Py, Pz, Uplus, Uminus, Vplus, Vminus, Wplus, Wminus``
    or ``M``; the latter needs the sign pair ``s1, s2`` in {+1, -1}, and
    satisfies ``M^dag S~z M = (S~x - s1 S~y + s2 S~z) / sqrt(3)``.
    """
    if kind == "M":
        if s1 not in (1, -1) or s2 not in (1, -1):
            raise ValueError(f"M needs signs s1, s2 in {{+1, -1}}, got {s1!r}, {s2!r}")
        return _m_matrix(s1, s2)
    if kind not in _CONJUGATIONS:
        raise ValueError(f"unknown conjugation matrix {kind!r}")
    return _CONJUGATIONS[kind]()


def weighted_generator(w: AxisWeights, representation: str = "adjoint") -> np.ndarray:
    """sum_a s_a S^a in the requested representation."""
    return sum(s * spin_operator(a, representation) for a, s in zip(AXES, w.as_tuple()))


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _norm(m) -> float:
    return float(np.linalg.norm(m))


def algebra_checks(representation: str = "adjoint") -> dict[str, float]:
    """Frobenius residuals of the su(2) spin-1 identities, keyed by check name.

    Covers the three commutators, the Casimir s(s+1) = 2, the power relations
    S^(2n) = S^2 and S^(2n+1) = S for n = 1..3, and S^a S^b S^a = 0 for a != b.
    """
    s = {a: spin_operator(a, representation) for a in AXES}
    eye = np.eye(3)
    out = {}
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        out[f"[S{a},S{b}]=iS{c}"] = _norm(commutator(s[a], s[b]) - 1j * s[c])
    out["casimir"] = _norm(sum(m @ m for m in s.values()) - 2.0 * eye)
    for a in AXES:
        sq = s[a] @ s[a]
        for n in (1, 2, 3):
            out[f"S{a}^{2 * n}=S{a}^2"] = _norm(np.linalg.matrix_power(s[a], 2 * n) - sq)
            out[f"S{a}^{2 * n + 1}=S{a}"] = _norm(np.linalg.matrix_power(s[a], 2 * n + 1) - s[a])
    for a, b in product(AXES, AXES):
        if a != b:
            out[f"S{a}S{b}S{a}=0"] = _norm(s[a] @ s[b] @ s[a])
    return out


def algebra_report(representation: str = "adjoint") -> float:
    """Largest residual reported by :func:`algebra_checks`."""
    return max(algebra_checks(representation).values())


def conjugation_checks() -> dict[str, float]:
    """Residuals of the basis-change and conjugation relations among the matrices."""
    sx, sy, sz = (spin_operator(a) for a in AXES)
    out = {}
    up = conjugation_matrix("Uplus")
    for a in AXES:
        out[f"U+ S{a} U+^dag = S~{a}"] = _norm(
            up @ spin_operator(a, "standard") @ dagger(up) - spin_operator(a)
        )
    for name, p, target in (("Py", conjugation_matrix("Py"), sy), ("Pz", conjugation_matrix("Pz"), sz)):
        out[f"{name} S~x {name}^dag"] = _norm(p @ sx @ dagger(p) - target)
    out["(S~x)^2"] = _norm(sx @ sx - np.diag([0, 1, 1]))
    out["(S~y)^2"] = _norm(sy @ sy - np.diag([1, 0, 1]))
    out["(S~z)^2"] = _norm(sz @ sz - np.diag([1, 1, 0]))
    for s, tag in ((1, "plus"), (-1, "minus")):
        u = conjugation_matrix("U" + tag)
        v = conjugation_matrix("V" + tag)
        w = conjugation_matrix("W" + tag)
        out[f"U{tag}"] = _norm(dagger(u) @ sy @ u - (-sz - s * sx) / _R2)
        out[f"V{tag}"] = _norm(dagger(v) @ sx @ v - (-sy + s * sz) / _R2)
        out[f"W{tag}"] = _norm(dagger(w) @ sz @ w - (sx - s * sy) / _R2)
    for s1, s2 in product((1, -1), repeat=2):
        m = conjugation_matrix("M", s1, s2)
        out[f"M({s1:+d},{s2:+d})"] = _norm(dagger(m) @ sz @ m - (sx - s1 * sy + s2 * sz) / _R3)
    for kind in CONJUGATION_KINDS:
        mats = (
            [conjugation_matrix(kind, a, b) for a, b in product((1, -1), repeat=2)]
            if kind == "M"
            else [conjugation_matrix(kind)]
        )
        out[f"unitary {kind}"] = max(_norm(m @ dagger(m) - np.eye(3)) for m in mats)
    return out


def difference_embedding_residual() -> float:
    """S~x padded to 4x4 against I2 (x) A - A (x) I2 with A = (-iX + Y) / 2."""
    x2 = np.array([[0, 1], [1, 0]], dtype=complex)
    y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    a = 0.5 * (-1j * x2 + y2)
    padded = np.zeros((4, 4), dtype=complex)
    padded[:3, :3] = spin_operator("x")
    return _norm(padded - (np.kron(np.eye(2), a) - np.kron(a, np.eye(2))))


def hopping_embedding_residual() -> float:
    """S~x padded to 4x4 against i (A (x) A^dag - A^dag (x) A), same A as above.

    ``I2 (x) A - A (x) I2`` is nilpotent and cannot equal a nonzero Hermitian
    matrix; this hopping form is the two-qubit decomposition that does hold.
    """
    x2 = np.array([[0, 1], [1, 0]], dtype=complex)
    y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    a = 0.5 * (-1j * x2 + y2)
    padded = np.zeros((4, 4), dtype=complex)
    padded[:3, :3] = spin_operator("x")
    return _norm(padded - 1j * (np.kron(a, dagger(a)) - np.kron(dagger(a), a)))
