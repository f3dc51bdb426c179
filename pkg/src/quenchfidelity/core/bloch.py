"""
Exact algebra of two-band k-mode Hamiltonians H_k = d_k . sigma + d_0,k I.

Everything here is a pure function of immutable values: eigenpairs in closed
form, overlaps, and the Pauli-decomposition exponential used for time evolution.
"""

from dataclasses import dataclass
import math

import numpy as np

from src.quenchfidelity.core.errors import DomainError, GapClosed

GAP_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-12

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class DVector:
    """Bloch vector (dx, dy, dz) plus the identity coefficient d0 of one k-mode."""

    dx: float
    dy: float
    dz: float = 0.0
    d0: float = 0.0

    def __post_init__(self):
        for name in ("dx", "dy", "dz", "d0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"DVector.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_array(cls, row) -> "DVector":
        """Build from a length-3 (dx, dy, dz) or length-4 (dx, dy, dz, d0) sequence."""
        values = [float(v) for v in row]
        if len(values) == 3:
            values.append(0.0)
        return cls(*values)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz])

    @property
    def norm(self) -> float:
        return math.sqrt(self.dx * self.dx + self.dy * self.dy + self.dz * self.dz)

    def unit(self, gap_tolerance: float = GAP_TOLERANCE) -> np.ndarray:
        """Unit vector d-hat; raises GapClosed when |d| is at or below the gap tolerance."""
        norm = self.norm
        if norm <= gap_tolerance:
            raise GapClosed(norm)
        return self.vector / norm

    def scaled(self, factor: float, d0: float | None = None) -> "DVector":
        return DVector(
            self.dx * factor,
            self.dy * factor,
            self.dz * factor,
            self.d0 if d0 is None else d0,
        )

    def shifted(self, d0: float) -> "DVector":
        return DVector(self.dx, self.dy, self.dz, d0)


@dataclass(frozen=True)
class SpinorState:
    """Normalized two-component state a|0> + b|1> on the two-band basis."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        norm_sq = abs(a) ** 2 + abs(b) ** 2
        if not math.isfinite(norm_sq) or abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"spinor is not normalized: |a|^2+|b|^2={norm_sq!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "SpinorState":
        norm = math.hypot(abs(a), abs(b))
        if norm == 0.0:
            raise DomainError("cannot normalize the zero spinor")
        return cls(a / norm, b / norm)

    @classmethod
    def from_array(cls, amplitudes) -> "SpinorState":
        return cls.normalized(complex(amplitudes[0]), complex(amplitudes[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    def with_canonical_phase(self) -> "SpinorState":
        """
        Fix the global phase: the largest-modulus amplitude becomes real and
        non-negative, ties going to the first amplitude.
        """
        ma, mb = abs(self.a), abs(self.b)
        pivot = self.b if (mb > ma and not math.isclose(ma, mb, rel_tol=1e-12)) else self.a
        if pivot == 0:
            return self
        phase = pivot.conjugate() / abs(pivot)
        return SpinorState.normalized(self.a * phase, self.b * phase)


@dataclass(frozen=True)
class HermitianMatrix2:
    """A 2x2 Hermitian matrix; the entries are held as a read-only array."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {entries.shape}")
        if not np.allclose(entries, entries.conj().T, rtol=0.0, atol=1e-12):
            raise DomainError("matrix is not Hermitian")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def apply(self, state: SpinorState) -> np.ndarray:
        """Matrix-vector product; the result is generally not normalized."""
        return self.entries @ state.as_array()


def build_matrix(d: DVector) -> HermitianMatrix2:
    """Assemble d . sigma + d0 I."""
    return HermitianMatrix2(d.dx * SIGMA_X + d.dy * SIGMA_Y + d.dz * SIGMA_Z + d.d0 * SIGMA_0)


def _eigenvector(d: DVector, sign: int, gap_tolerance: float) -> SpinorState:
    # eigenvector of n . sigma with eigenvalue `sign`, choosing the row that stays well conditioned
    nx, ny, nz = d.unit(gap_tolerance)
    if sign < 0:
        if nz >= 0:
            a, b = -(nx - 1j * ny), 1.0 + nz
        else:
            a, b = nz - 1.0, nx + 1j * ny
    else:
        if nz <= 0:
            a, b = nx - 1j * ny, 1.0 - nz
        else:
            a, b = 1.0 + nz, nx + 1j * ny
    return SpinorState.normalized(complex(a), complex(b)).with_canonical_phase()


def ground_state(d: DVector, gap_tolerance: float = GAP_TOLERANCE) -> SpinorState:
    """Eigenvector of d . sigma with eigenvalue -|d|; d0 only shifts both bands."""
    return _eigenvector(d, -1, gap_tolerance)


def excited_state(d: DVector, gap_tolerance: float = GAP_TOLERANCE) -> SpinorState:
    """Eigenvector of d . sigma with eigenvalue +|d|."""
    return _eigenvector(d, +1, gap_tolerance)


def inner_product(s1: SpinorState, s2: SpinorState) -> complex:
    return s1.a.conjugate() * s2.a + s1.b.conjugate() * s2.b


def overlap_modulus(s1: SpinorState, s2: SpinorState) -> float:
    """|<s1|s2>| clipped to [0, 1]."""
    return min(1.0, abs(inner_product(s1, s2)))


def unit_dot(d_i: DVector, d_f: DVector, gap_tolerance: float = GAP_TOLERANCE) -> float:
    """d-hat_i . d-hat_f, clamped to [-1, 1]."""
    value = float(np.dot(d_i.unit(gap_tolerance), d_f.unit(gap_tolerance)))
    return min(1.0, max(-1.0, value))


def evolution_operator(d: DVector, t: float) -> np.ndarray:
    """exp(-i H t) = exp(-i d0 t) [cos(|d| t) I - i sin(|d| t) d-hat . sigma]."""
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    phase = complex(math.cos(d.d0 * t), -math.sin(d.d0 * t))
    norm = d.norm
    if norm == 0.0:
        return phase * SIGMA_0
    nx, ny, nz = d.vector / norm
    n_sigma = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
    return phase * (math.cos(norm * t) * SIGMA_0 - 1j * math.sin(norm * t) * n_sigma)


def evolve(d: DVector, t: float, s: SpinorState) -> SpinorState:
    """Apply exp(-i H t) to s; unitary, so the norm is kept."""
    amplitudes = evolution_operator(d, t) @ s.as_array()
    return SpinorState(amplitudes[0], amplitudes[1])
