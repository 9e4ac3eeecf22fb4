"""Truncated extended number basis: states, operators, and the phase matrix.

The extended ladder runs over all integers; a hard truncation window keeps
operator algebra exact inside the window, and convergence is probed by
window doubling rather than tapering.  States known to be improper
(delta-comb normalized phase states) carry a flag so norm-dependent
routines can reject them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .periodics import TWO_PI

__all__ = [
    "WindowError",
    "BasisWindow",
    "FockState",
    "FockOperator",
    "number_state",
    "phase_state",
    "phase_packet",
    "gaussian_packet",
    "theta_operator",
    "number_operator",
    "projector_physical",
    "identity_operator",
    "random_state",
    "random_hermitian",
    "phase_overlap_physical",
    "parse_state_spec",
    "STATE_SPEC_GRAMMAR",
]


class WindowError(IndexError):
    """An index fell outside a truncation window, or a window is too small."""


@dataclass(frozen=True)
class BasisWindow:
    """Inclusive index range [n_min, n_max] of the truncated number ladder."""

    n_min: int
    n_max: int

    def __post_init__(self):
        if self.n_max < self.n_min:
            raise ValueError(f"empty window [{self.n_min}, {self.n_max}]")

    @property
    def dim(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def is_physical(self) -> bool:
        return self.n_min >= 0

    def values(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __contains__(self, n) -> bool:
        return self.n_min <= int(n) <= self.n_max

    def index(self, n: int) -> int:
        if n not in self:
            raise WindowError(f"index {n} outside window [{self.n_min}, {self.n_max}]")
        return int(n) - self.n_min

    def expanded(self, lo: int, hi: int) -> "BasisWindow":
        return BasisWindow(self.n_min - int(lo), self.n_max + int(hi))


@dataclass(frozen=True)
class FockState:
    """Complex amplitude vector over a window.

    ``improper`` marks delta-comb normalized states (phase states) whose
    amplitudes do not square-sum to one by design.
    """

    window: BasisWindow
    amps: np.ndarray
    improper: bool = False

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (self.window.dim,):
            raise ValueError(f"need {self.window.dim} amplitudes, got {a.shape}")
        object.__setattr__(self, "amps", a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def inner(self, other: "FockState") -> complex:
        if other.window != self.window:
            raise WindowError("window mismatch in inner product")
        return complex(np.vdot(self.amps, other.amps))

    def normalized(self) -> "FockState":
        if self.improper:
            raise ValueError("cannot normalize an improper (delta-normalized) state")
        return FockState(self.window, self.amps / self.norm())

    def density(self) -> "FockOperator":
        if self.improper:
            raise ValueError("improper state has no density matrix")
        return FockOperator(self.window, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class FockOperator:
    """Dense complex matrix over a window, rows and columns indexed alike."""

    window: BasisWindow
    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        d = self.window.dim
        if m.shape != (d, d):
            raise ValueError(f"need a {d}x{d} matrix, got {m.shape}")
        object.__setattr__(self, "mat", m)

    def dagger(self) -> "FockOperator":
        return FockOperator(self.window, self.mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= tol)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if other.window != self.window:
            raise WindowError("window mismatch in operator product")
        return FockOperator(self.window, self.mat @ other.mat)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if other.window != self.window:
            raise WindowError("window mismatch in operator sum")
        return FockOperator(self.window, self.mat + other.mat)

    def scaled(self, c) -> "FockOperator":
        return FockOperator(self.window, c * self.mat)

    def apply(self, state: FockState) -> FockState:
        if state.window != self.window:
            raise WindowError("window mismatch in operator application")
        return FockState(self.window, self.mat @ state.amps, improper=state.improper)

    def density_violations(self, tol: float = 1e-10) -> list[str]:
        """Names of density-matrix properties this operator violates."""
        bad = []
        if np.max(np.abs(self.mat - self.mat.conj().T)) > tol:
            bad.append("hermitian")
        if abs(np.trace(self.mat) - 1.0) > max(tol, 1e-10):
            bad.append("unit trace")
        else:
            w = np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))
            if w.min() < -tol:
                bad.append("positive semidefinite")
        return bad


def number_state(window: BasisWindow, k: int) -> FockState:
    """Unit basis vector at ladder index k."""
    amps = np.zeros(window.dim, dtype=complex)
    amps[window.index(k)] = 1.0
    return FockState(window, amps)


def phase_state(window: BasisWindow, theta0: float) -> FockState:
    """Improper phase state with amplitudes e^{i n theta0} / sqrt(2*pi)."""
    n = window.values()
    return FockState(window, np.exp(1j * n * theta0) / np.sqrt(TWO_PI), improper=True)


def phase_packet(window: BasisWindow, theta0: float) -> FockState:
    """Normalized variant of the phase state: amplitudes e^{i n theta0}/sqrt(dim)."""
    n = window.values()
    return FockState(window, np.exp(1j * n * theta0) / np.sqrt(window.dim))


def gaussian_packet(window: BasisWindow, theta0: float, width: float) -> FockState:
    """Gaussian amplitude profile exp(-n^2 width^2 / 2) with phase factors, normalized."""
    if width <= 0:
        raise ValueError("packet width must be positive")
    n = window.values()
    amps = np.exp(-0.5 * (n * width) ** 2) * np.exp(1j * n * theta0)
    return FockState(window, amps / np.linalg.norm(amps))


def theta_operator(window: BasisWindow) -> FockOperator:
    """Phase-operator matrix on the window.

    Diagonal entries are pi; the (n, m) off-diagonal entry is i/(m - n),
    the single-period Fourier coefficient of the sawtooth against
    e^{i(n-m) theta}.  Hard-coded closed form; the quadrature route is kept
    as a test oracle.
    """
    n = window.values().astype(float)
    diff = np.subtract.outer(n, n)  # row index minus column index
    mat = np.zeros(diff.shape, dtype=complex)
    off = diff != 0.0
    mat[off] = -1j / diff[off]
    np.fill_diagonal(mat, np.pi)
    return FockOperator(window, mat)


def number_operator(window: BasisWindow) -> FockOperator:
    """Diagonal ladder-index operator."""
    return FockOperator(window, np.diag(window.values().astype(complex)))


def projector_physical(window: BasisWindow) -> FockOperator:
    """Diagonal projector onto the nonnegative part of the ladder."""
    if window.n_max < 0:
        raise ValueError("window contains no physical indices")
    return FockOperator(window, np.diag((window.values() >= 0).astype(complex)))


def identity_operator(window: BasisWindow) -> FockOperator:
    return FockOperator(window, np.eye(window.dim, dtype=complex))


def random_state(window: BasisWindow, rng: np.random.Generator) -> FockState:
    amps = rng.standard_normal(window.dim) + 1j * rng.standard_normal(window.dim)
    return FockState(window, amps / np.linalg.norm(amps))


def random_hermitian(window: BasisWindow, rng: np.random.Generator,
                     scale: float = 1.0) -> FockOperator:
    a = rng.standard_normal((window.dim,) * 2) + 1j * rng.standard_normal((window.dim,) * 2)
    return FockOperator(window, scale * 0.5 * (a + a.conj().T))


def phase_overlap_physical(n_max: int, delta: float, averaged: bool = True) -> complex:
    """Overlap of two physical phase states separated by ``delta``.

    The raw partial sums (1/2*pi) sum_{n=0}^{N} e^{i n delta} oscillate
    without decaying at fixed delta != 0, so the default applies Fejer
    (Cesaro) averaging, which converges to 1/(4*pi) + (i/(4*pi))*cot(delta/2)
    away from multiples of 2*pi.
    """
    n = np.arange(n_max + 1)
    w = 1.0 - n / (n_max + 1.0) if averaged else np.ones(n_max + 1)
    return complex(np.sum(w * np.exp(1j * n * delta)) / TWO_PI)


STATE_SPEC_GRAMMAR = ("number:k | phase:theta0 | packet:theta0,width | "
                      "super:k1,k2 | mixed:k1,k2")


def parse_state_spec(text: str, window: BasisWindow):
    """Build a density matrix from the state mini-language.

    Returns ``(rho, improper)``; ``improper`` is True for the delta-comb
    normalized phase state, whose outer product is not a unit-trace density.
    """
    try:
        kind, _, args = text.partition(":")
        kind = kind.strip().lower()
        if kind == "number":
            k = int(args)
            return number_state(window, k).density(), False
        if kind == "phase":
            th = float(args)
            psi = phase_state(window, th)
            return FockOperator(window, np.outer(psi.amps, psi.amps.conj())), True
        if kind == "packet":
            th_s, w_s = args.split(",")
            return gaussian_packet(window, float(th_s), float(w_s)).density(), False
        if kind == "super":
            k1, k2 = (int(s) for s in args.split(","))
            amps = np.zeros(window.dim, dtype=complex)
            amps[window.index(k1)] += 1.0
            amps[window.index(k2)] += 1.0
            psi = FockState(window, amps / np.linalg.norm(amps))
            return psi.density(), False
        if kind == "mixed":
            k1, k2 = (int(s) for s in args.split(","))
            m = 0.5 * (number_state(window, k1).density().mat
                       + number_state(window, k2).density().mat)
            return FockOperator(window, m), False
    except WindowError:
        raise
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad state spec {text!r}; grammar: {STATE_SPEC_GRAMMAR}") from exc
    raise ValueError(f"unknown state kind {kind!r}; grammar: {STATE_SPEC_GRAMMAR}")
