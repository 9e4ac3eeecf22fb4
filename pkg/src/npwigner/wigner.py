"""Distributions, operator representations, trace and inversion formulas.

Evaluation works in harmonic space: for a kernel with base B and an
operator X on a window, the quantity sum_{k,l} B[k-n][l-n] X[l][k]
e^{i(k-l)theta} is assembled from anti-diagonal sums of the pointwise
product, then synthesized at the requested phase nodes.  Sums over the
phase-space integer n run over an enlarged window; for the built-in
spectra the infinite remainder of slowly decaying anti-diagonals is added
in closed form (digamma tails), which keeps the trace identity exact at
small buffers.

Phase integrals of band-limited periodic integrands are evaluated
spectrally (equivalent to a uniform trapezoid rule with enough nodes); the
unit-function quadrature is kept as the slow oracle in the test suite.
Reductions use a fixed order, so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.fft import next_fast_len
from scipy.special import digamma, polygamma

from .fock import (BasisWindow, FockOperator, WindowError, number_operator,
                   theta_operator)
from .kernel import WignerKernel, _sin_half_pi
from .periodics import TWO_PI

__all__ = [
    "DensityError",
    "AliasingError",
    "WignerGrid",
    "OperatorRep",
    "wigner_of_state",
    "op_representation",
    "symmetric_product_rep",
    "trace_pairing",
    "expectation",
    "overlap_pairing",
    "invert_representation",
    "number_marginal",
    "phase_marginal",
    "phase_density",
    "trace_base_window",
    "overlap_base_window",
    "required_trace_buffer",
]


class DensityError(ValueError):
    """Operator failed density-matrix validation."""


class AliasingError(ValueError):
    """Phase grid too coarse for the harmonics present."""


@dataclass
class WignerGrid:
    """Real distribution values on an (n, theta) grid."""

    variant: str
    n_values: np.ndarray
    thetas: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass
class OperatorRep:
    """Complex representation values of an operator on an (n, theta) grid."""

    variant: str
    n_values: np.ndarray
    thetas: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


@lru_cache(maxsize=32)
def _diag_index(D: int) -> np.ndarray:
    r = np.arange(D)
    return (r[:, None] - r[None, :] + D - 1).ravel()


def _diag_sums(mat: np.ndarray) -> np.ndarray:
    """Sums over k - l = d of mat[k, l]; index d + D - 1 in the output."""
    D = mat.shape[0]
    idx = _diag_index(D)
    flat = mat.ravel()
    return (np.bincount(idx, flat.real, 2 * D - 1)
            + 1j * np.bincount(idx, flat.imag, 2 * D - 1))


def _antidiagonal_profile(case: str, d: int, sig: np.ndarray) -> np.ndarray:
    """Base values of a built-in kernel along diagonal offset d at anti-index sig."""
    sig = np.asarray(sig)
    if case == "a":
        return np.where((sig == 0) | (sig == -1), 1.0 / TWO_PI, 0.0)
    if d % 2 == 1:
        return _sin_half_pi(sig) / (np.pi**2 * np.where(sig == 0, 1, sig))
    if case == "b" or d % 4 == 0:
        return np.where(sig == 0, 1.0 / TWO_PI, 0.0)
    q = sig // 2
    vals = _sin_half_pi(q) / (np.pi**2 * np.where(q == 0, 1, q))
    return np.where(q % 2 != 0, vals, 0.0)


def _coeff_rows_spectral(kern: WignerKernel, op: FockOperator,
                         ns: np.ndarray) -> np.ndarray:
    """Fast path for built-in spectra: each diagonal's coefficients over a
    contiguous n-range are a correlation of the operator band with the
    closed-form anti-diagonal profile, evaluated by batched FFT (no stored
    base window is needed)."""
    case = kern.spectrum.case_tag
    w = op.window
    D = w.dim
    N = len(ns)
    n_lo, n_hi = int(ns[0]), int(ns[-1])
    Lf = next_fast_len(2 * D + N)
    prof = np.zeros((2 * D - 1, Lf), dtype=complex)
    band_rev = np.zeros((2 * D - 1, Lf), dtype=complex)
    starts = np.empty(2 * D - 1, dtype=int)
    for j, d in enumerate(range(-(D - 1), D)):
        lo = w.n_min + max(0, -d)
        hi = w.n_max - max(0, d)
        ells = np.arange(lo, hi + 1)
        band = op.mat[ells - w.n_min, ells + d - w.n_min]
        xs = np.arange(lo - n_hi, hi - n_lo + 1)
        prof[j, :len(xs)] = _antidiagonal_profile(case, d, 2 * xs + d)
        band_rev[j, :len(band)] = band[::-1]
        starts[j] = len(band) - 1
    conv = np.fft.ifft(np.fft.fft(prof, axis=1) * np.fft.fft(band_rev, axis=1),
                       axis=1)
    take = starts[:, None] + np.arange(N)[None, :]
    vals = np.take_along_axis(conv, take, axis=1)  # row per d, columns n descending
    return vals[:, ::-1].T.copy()


def _coeff_rows(kern: WignerKernel, op: FockOperator, n_values) -> np.ndarray:
    """Row per n of the harmonic coefficients c_d = sum_{k-l=d} B[k-n][l-n] op[l][k]."""
    w = op.window
    if kern.physical and not w.is_physical:
        raise ValueError("physical kernel variants require physical operator windows")
    ns = np.asarray(n_values, dtype=int)
    if kern.spectrum is not None and kern.spectrum.case_tag != "custom" and ns.size:
        contiguous = ns[-1] - ns[0] + 1 == ns.size and (
            ns.size == 1 or bool(np.all(np.diff(ns) == 1)))
        if contiguous:
            return _coeff_rows_spectral(kern, op, ns)
        return np.vstack([_coeff_rows_spectral(kern, op, ns[i:i + 1])
                          for i in range(ns.size)])
    opT = op.mat.T
    out = np.empty((len(ns), 2 * w.dim - 1), dtype=complex)
    for i, n in enumerate(ns):
        blk = kern.block(w.n_min - int(n), w.n_max - int(n))
        out[i] = _diag_sums(blk * opT)
    return out


def _theta_grid(thetas) -> np.ndarray:
    if np.ndim(thetas) == 0:
        t = int(thetas)
        if t < 1:
            raise ValueError("need at least one phase node")
        return np.arange(t) * (TWO_PI / t)
    return np.asarray(thetas, dtype=float)


def _synthesize(coeffs: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    D2 = coeffs.shape[1]
    ds = np.arange(D2) - (D2 - 1) // 2
    return coeffs @ np.exp(1j * np.multiply.outer(ds, thetas))


def _as_n_values(n_values, default_window: BasisWindow) -> np.ndarray:
    if n_values is None:
        return default_window.values()
    if isinstance(n_values, BasisWindow):
        return n_values.values()
    return np.asarray(n_values, dtype=int)


def wigner_of_state(kern: WignerKernel, rho: FockOperator, n_values=None,
                    thetas=256, *, validate: bool = True,
                    realness_tol: float = 1e-10) -> WignerGrid:
    """Distribution values Tr[kernel(n, theta) rho] on a grid.

    ``rho`` must pass density validation unless ``validate`` is disabled
    (improper phase-state projectors are the intended exception).
    """
    if validate:
        bad = rho.density_violations()
        if bad:
            raise DensityError("not a density matrix: " + ", ".join(bad))
    ns = _as_n_values(n_values, rho.window)
    th = _theta_grid(thetas)
    vals = _synthesize(_coeff_rows(kern, rho, ns), th)
    imag_max = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if validate and imag_max > realness_tol:
        raise DensityError(f"distribution has imaginary residue {imag_max:.3e}")
    return WignerGrid(kern.variant, ns, th, vals.real,
                      meta={"imag_max": imag_max, "window": (rho.window.n_min,
                                                             rho.window.n_max)})


def op_representation(kern: WignerKernel, op: FockOperator, n_values=None,
                      thetas=256) -> OperatorRep:
    """Representation 2*pi*Tr[kernel(n, theta) op] on a grid."""
    ns = _as_n_values(n_values, op.window)
    th = _theta_grid(thetas)
    vals = TWO_PI * _synthesize(_coeff_rows(kern, op, ns), th)
    return OperatorRep(kern.variant, ns, th, vals,
                       meta={"window": (op.window.n_min, op.window.n_max)})


def symmetric_product_rep(kern: WignerKernel, op_window: BasisWindow,
                          n_values, thetas=256) -> OperatorRep:
    """Representation of the symmetrized product of the number and phase matrices.

    With one factor diagonal the product matrix is elementwise:
    sym[a, b] = theta[a, b] * (a + b) / 2.
    """
    vals = op_window.values().astype(float)
    top = theta_operator(op_window)
    sym = FockOperator(op_window,
                       top.mat * (0.5 * (vals[:, None] + vals[None, :])))
    return op_representation(kern, sym, n_values, thetas)


# -- n-sum machinery ---------------------------------------------------------

def required_trace_buffer(op_window: BasisWindow) -> int:
    """Smallest n-buffer that covers the delta anti-diagonals of any built-in kernel."""
    half = (op_window.dim - 1) // 2 + 1
    return max(0, op_window.n_min + half, half - op_window.n_max)


def trace_base_window(op_window: BasisWindow, n_buffer: int = 16) -> BasisWindow:
    """Base window a kernel must cover for a trace pairing at this buffer."""
    n_lo = 2 * op_window.n_min - n_buffer
    n_hi = 2 * op_window.n_max + n_buffer
    return BasisWindow(op_window.n_min - n_hi, op_window.n_max - n_lo)


def overlap_base_window(op_window: BasisWindow, margin: int) -> BasisWindow:
    """Base window needed by :func:`overlap_pairing` with the given margin."""
    half = (op_window.dim - 1) // 2
    n_lo = op_window.n_min - half - 2 * margin
    n_hi = op_window.n_max + half + 2 * margin
    return BasisWindow(op_window.n_min - n_hi, op_window.n_max - n_lo)


def _pair_sum_range(kern, opA, opB, n_lo, n_hi) -> complex:
    ns = np.arange(n_lo, n_hi + 1)
    ca = _coeff_rows(kern, opA, ns)
    cb = _coeff_rows(kern, opB, ns)
    return TWO_PI**2 * complex(np.sum(ca * cb[:, ::-1]))


def _digamma_quotient(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """(psi(xb) - psi(xa)) / (xb - xa) with the trigamma limit on the diagonal."""
    d = xb - xa
    eq = d == 0.0
    safe = np.where(eq, 1.0, d)
    out = (digamma(xb) - digamma(xa)) / safe
    if np.any(eq):
        out = np.where(eq, polygamma(1, np.where(xa > 0, xa, 1.0)), out)
    return out


def _tail_pair_matrix(cA, cB, n_lo, n_hi, step, residue):
    """Sum over tail n of 1/((cA - 2n)(cB - 2n)) for n = residue (mod step).

    Returns the matrix over the outer product of the cA and cB vectors.
    Both tails (n > n_hi and n < n_lo) are included.
    """
    cA = np.asarray(cA, dtype=float)[:, None]
    cB = np.asarray(cB, dtype=float)[None, :]
    st = float(step)
    r = float(residue)
    # upper tail: n = st*m + r >= n_hi + 1
    m0 = np.ceil((n_hi + 1 - r) / st)
    alpha_a = (cA - 2.0 * r) / (2.0 * st)
    alpha_b = (cB - 2.0 * r) / (2.0 * st)
    # lower tail: n = n0 - st*m <= n_lo - 1
    n0 = (n_lo - 1) - ((n_lo - 1 - r) % st)
    beta_a = (cA - 2.0 * n0) / (2.0 * st)
    beta_b = (cB - 2.0 * n0) / (2.0 * st)
    if np.any(m0 - alpha_a <= 0) or np.any(beta_a <= 0):
        raise WindowError("n-range too small for closed-form tails")
    upper = _digamma_quotient(m0 - alpha_a, m0 - alpha_b)
    lower = _digamma_quotient(beta_a, beta_b)
    return (upper + lower) / (4.0 * st**2)


def _band_weights(op: FockOperator, d: int):
    """Entries op[l][l + d] with both indices in the window, plus the l values."""
    w = op.window
    lo = w.n_min + max(0, -d)
    hi = w.n_max - max(0, d)
    if hi < lo:
        return None, None
    ells = np.arange(lo, hi + 1)
    return op.mat[ells - w.n_min, ells + d - w.n_min], ells


def _trace_tail(kern, opA, opB, n_lo, n_hi) -> complex:
    """Closed-form remainder of the n-sum outside [n_lo, n_hi].

    Zero for the compact-support spectrum (case a).  For the square-wave
    spectra the anti-diagonal base values factor into an exact sign and a
    reciprocal, and the n-sums of reciprocal products are digamma
    differences.
    """
    spec = kern.spectrum
    if spec is None or spec.case_tag == "custom":
        raise ValueError("closed-form tails need a built-in spectrum")
    if spec.case_tag == "a":
        return 0.0 + 0.0j
    D = opA.window.dim
    total = 0.0 + 0.0j
    for d in range(-(D - 1), D):
        wA, ellsA = _band_weights(opA, d)
        wB, ellsB = _band_weights(opB, -d)
        if wA is None or wB is None:
            continue
        cA = 2 * ellsA + d
        cB = 2 * ellsB - d
        if d % 2 == 1:
            sA = _sin_half_pi(cA)
            sB = _sin_half_pi(cB)
            K = _tail_pair_matrix(cA, cB, n_lo, n_hi, 1, 0)
            total += (wA * sA) @ K @ (wB * sB) / np.pi**4
        elif spec.case_tag == "c" and d % 4 == 2:
            gA = cA // 2
            gB = cB // 2
            for r in (0, 1):
                selA = (gA + 1) % 2 == r
                selB = (gB + 1) % 2 == r
                if not (np.any(selA) and np.any(selB)):
                    continue
                sA = _sin_half_pi(gA[selA] - r)
                sB = _sin_half_pi(gB[selB] - r)
                K = _tail_pair_matrix(cA[selA], cB[selB], n_lo, n_hi, 2, r)
                total += 4.0 * (wA[selA] * sA) @ K @ (wB[selB] * sB) / np.pi**4
        # even anti-diagonals of cases b/c (and all of case a) are deltas,
        # fully inside the finite range once the buffer requirement holds
    return TWO_PI**2 * total


def trace_pairing(kern: WignerKernel, opA: FockOperator, opB: FockOperator, *,
                  n_buffer: int = 16, tail: str = "auto") -> complex:
    """Trace of a product from the phase-space pairing of two representations.

    Evaluates (1/2*pi) * sum_n integral du(theta) A(n,theta) B(n,theta) with
    the n-sum over [2 n_min - buffer, 2 n_max + buffer].  ``tail`` controls
    the remainder of the n-sum: ``"auto"`` adds the closed-form digamma
    tails when the kernel carries a built-in spectrum, ``"exact"`` requires
    them, ``"none"`` truncates (documented 1/buffer error for the
    square-wave kernels).
    """
    if opA.window != opB.window:
        raise WindowError("operator windows must match")
    w = opA.window
    need = required_trace_buffer(w)
    if n_buffer < need:
        raise WindowError(
            f"n-buffer {n_buffer} insufficient for window [{w.n_min}, {w.n_max}]; "
            f"need at least {need} (n-range [{2 * w.n_min - need}, {2 * w.n_max + need}])")
    n_lo = 2 * w.n_min - n_buffer
    n_hi = 2 * w.n_max + n_buffer
    total = _pair_sum_range(kern, opA, opB, n_lo, n_hi)
    if tail not in ("auto", "exact", "none"):
        raise ValueError("tail must be one of auto, exact, none")
    if tail != "none":
        can = kern.spectrum is not None and kern.spectrum.case_tag != "custom"
        if tail == "exact" and not can:
            raise ValueError("closed-form tails unavailable for this kernel")
        if can:
            total += _trace_tail(kern, opA, opB, n_lo, n_hi)
    return total


def expectation(kern: WignerKernel, rho: FockOperator, op: FockOperator, *,
                n_buffer: int = 16, tail: str = "auto",
                validate: bool = True) -> complex:
    """Expectation value from the pairing of the state distribution with the
    operator representation."""
    if validate:
        bad = rho.density_violations()
        if bad:
            raise DensityError("not a density matrix: " + ", ".join(bad))
    return trace_pairing(kern, rho, op, n_buffer=n_buffer, tail=tail)


def overlap_pairing(kern: WignerKernel, rho_a: FockOperator,
                    rho_b: FockOperator, *, margin: int | None = None,
                    extrapolate: bool = True) -> float:
    """Transition probability 2*pi * sum_n integral du W W' for two states.

    The n-sum runs over the support window widened by ``margin`` on each
    side.  With ``extrapolate`` the sum is evaluated at margins m and 2m and
    Richardson-extrapolated, removing the leading 1/m truncation term of
    the square-wave kernels.
    """
    if rho_a.window != rho_b.window:
        raise WindowError("state windows must match")
    w = rho_a.window
    m = int(margin) if margin is not None else max((w.dim - 1) // 2, 24)
    half = (w.dim - 1) // 2
    lo, hi = w.n_min - half, w.n_max + half

    def partial(mm):
        return _pair_sum_range(kern, rho_a, rho_b, lo - mm, hi + mm)

    s2 = partial(2 * m)
    if not extrapolate:
        return float(np.real(s2))
    s1 = partial(m)
    return float(np.real(2.0 * s2 - s1))


def invert_representation(kern: WignerKernel, rep: OperatorRep,
                          op_window: BasisWindow) -> FockOperator:
    """Reassemble an operator from its representation grid.

    Requires a uniform phase grid with enough nodes for the window's
    harmonics; raises :class:`AliasingError` otherwise.  The n-sum uses the
    grid's own n values.
    """
    th = np.asarray(rep.thetas, dtype=float)
    T = len(th)
    D = op_window.dim
    if T < 2 * D - 1:
        raise AliasingError(
            f"{T} phase nodes alias a window of dimension {D}; need at least {2 * D - 1}")
    step = TWO_PI / T
    if np.max(np.abs(np.diff(th) - step)) > 1e-9 or abs(th[0]) > 1e-12:
        raise AliasingError("inversion requires the uniform phase grid on [0, 2*pi)")
    ms = np.arange(-(D - 1), D)
    dft = np.exp(-1j * np.multiply.outer(ms, th)) / T  # c_m per row
    coeffs = rep.values @ dft.T  # (N, 2D-1), index m + D - 1
    ks = op_window.values()
    dmat = np.subtract.outer(ks, ks)  # k - l
    pick = (D - 1) - dmat  # index of m = l - k
    acc = np.zeros((D, D), dtype=complex)
    for i, n in enumerate(rep.n_values):
        blk = kern.block(op_window.n_min - int(n), op_window.n_max - int(n))
        acc += blk * coeffs[i][pick]
    return FockOperator(op_window, TWO_PI * acc)


# -- marginals ---------------------------------------------------------------

def number_marginal(kern: WignerKernel, rho: FockOperator, n_values) -> np.ndarray:
    """Phase integral of the distribution at each n (exact zero-harmonic path)."""
    coeffs = _coeff_rows(kern, rho, np.asarray(n_values, dtype=int))
    return TWO_PI * np.real(coeffs[:, rho.window.dim - 1])


def phase_marginal(kern: WignerKernel, rho: FockOperator, thetas, *,
                   margin: int = 16) -> np.ndarray:
    """Sum over n of the distribution at each phase node (plain truncation).

    The n-range is the support window widened by ``margin``; the truncation
    error of the square-wave kernels decays like 1/margin.
    """
    w = rho.window
    half = (w.dim - 1) // 2
    ns = np.arange(w.n_min - half - margin, w.n_max + half + margin + 1)
    th = _theta_grid(thetas)
    vals = _synthesize(_coeff_rows(kern, rho, ns), th)
    return np.real(np.sum(vals, axis=0))


def phase_density(rho: FockOperator, thetas) -> np.ndarray:
    """Diagonal of the state in the (improper) phase basis at the given nodes."""
    th = _theta_grid(thetas)
    ks = rho.window.values()
    e = np.exp(1j * np.multiply.outer(ks, th))
    return np.real(np.einsum("kt,lk,lt->t", e, rho.mat, e.conj())) / TWO_PI
