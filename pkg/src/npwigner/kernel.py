"""Construction of number-phase Wigner kernels.

A kernel is stored as its base matrix B[a][b] at phase-space origin; the
dependence on the phase-space point (n, theta) is applied analytically on
access through the covariance rules

    element(k, l, n, theta) = e^{i (k-l) theta} * B[k-n][l-n],

so storage is quadratic in the window size.  Two independent construction
routes exist and cross-check each other: the spectral route (Fourier
coefficients of the anti-diagonal generating functions C_k) and closed
forms obtained by direct single-period integrals for the two physical
kernels.  Window-exceeded accesses raise; truncation artifacts are never
silently zeroed.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .fock import BasisWindow, WindowError
from .periodics import (TWO_PI, UnitFunction, _boundaries, _gauss_panels,
                        quadrature_du, square_wave)

__all__ = [
    "GSpectrum",
    "WignerKernel",
    "VARIANTS",
    "g_eval",
    "c_coefficient",
    "base_from_spectrum",
    "make_kernel",
    "element",
    "closed_form_S1",
    "closed_form_S2",
    "w3_kernel",
    "h1",
    "h2",
    "h3",
    "h3_tilde",
    "h_route_element",
    "kernel_to_text",
    "kernel_from_text",
    "support_antidiagonals",
]

# variant -> (spectrum case, physical projection)
VARIANTS = {
    "w1": ("a", False),
    "w2": ("b", False),
    "w3": ("c", False),
    "s1": ("a", True),
    "s2": ("b", True),
}


def _sin_half_pi(s):
    """sin(s*pi/2) for integer arrays, computed exactly from s mod 4."""
    r = np.mod(np.asarray(s), 4)
    return np.where(r == 1, 1.0, np.where(r == 3, -1.0, 0.0))


@dataclass(frozen=True)
class GSpectrum:
    """Family of 2*pi/4*pi-periodic functions g_k defining a kernel.

    Built-in cases:

    * ``a``: g = 1 for even k, e^{-i w/2} for odd k.
    * ``b``: g = 1 for even k, the 4*pi square wave for odd k.
    * ``c``: g = 1 for k = 0 mod 4, square wave at doubled argument for
      k = 2 mod 4, square wave for odd k.

    ``harmonic_cutoff`` bounds the window sizes this spectrum can serve.
    Custom spectra supply a callable ``g_fn(k, omega)`` plus the jump
    locations of C_k within one period so quadrature panels can align.
    """

    case_tag: str
    harmonic_cutoff: int
    g_fn: object = None
    disc_fn: object = None

    def __post_init__(self):
        if self.case_tag not in ("a", "b", "c", "custom"):
            raise ValueError(f"unknown spectrum case {self.case_tag!r}")
        if self.case_tag == "custom" and self.g_fn is None:
            raise ValueError("custom spectrum needs g_fn")

    # -- evaluation -------------------------------------------------------

    def g(self, k: int, omega):
        om = np.asarray(omega, dtype=float)
        k = int(k)
        if self.case_tag == "a":
            return np.exp(-0.5j * om) if k % 2 else np.ones_like(om, dtype=complex)
        if self.case_tag == "b":
            return (np.asarray(square_wave(om), dtype=complex) if k % 2
                    else np.ones_like(om, dtype=complex))
        if self.case_tag == "c":
            if k % 2:
                return np.asarray(square_wave(om), dtype=complex)
            if k % 4 == 2:
                return np.asarray(square_wave(2.0 * om), dtype=complex)
            return np.ones_like(om, dtype=complex)
        return np.asarray(self.g_fn(k, om), dtype=complex)

    def c(self, k: int, omega):
        """Anti-diagonal generating function C_k(w) = e^{-i k w / 2} g_k(w) / 2*pi."""
        om = np.asarray(omega, dtype=float)
        return np.exp(-0.5j * k * om) * self.g(k, om) / TWO_PI

    def discontinuities(self, k: int) -> tuple:
        """Jump locations of C_k within (0, 2*pi)."""
        k = int(k)
        if self.case_tag == "a":
            return ()
        if self.case_tag == "b":
            return (np.pi,) if k % 2 else ()
        if self.case_tag == "c":
            if k % 2:
                return (np.pi,)
            if k % 4 == 2:
                return (0.5 * np.pi, 1.5 * np.pi)
            return ()
        if self.disc_fn is None:
            return ()
        return tuple(self.disc_fn(k))

    def base_coeff(self, k: int, ells):
        """Closed-form Fourier coefficients of C_k at the given harmonics.

        Available for the built-in cases (alternating-series forms for the
        square-wave branches); returns None for custom spectra.
        """
        if self.case_tag == "custom":
            return None
        k = int(k)
        ells = np.asarray(ells)
        out = np.zeros(ells.shape, dtype=complex)
        if self.case_tag == "a":
            target = -(k // 2) if k % 2 == 0 else -((k + 1) // 2)
            out[ells == target] = 1.0 / TWO_PI
            return out
        if k % 2 == 0:
            if self.case_tag == "b" or k % 4 == 0:
                out[ells == -(k // 2)] = 1.0 / TWO_PI
                return out
            # case c, k = 2 mod 4
            q = k // 2 + ells
            nz = q % 2 != 0
            out[nz] = _sin_half_pi(q[nz]) / (np.pi**2 * q[nz])
            return out
        sig = k + 2 * ells  # odd
        out[:] = _sin_half_pi(sig) / (np.pi**2 * sig)
        return out

    # -- validation -------------------------------------------------------

    def validate(self, k_probe=(0, 1, 2, 3, 4, -1, -3, 6), nodes: int = 64) -> None:
        """Check the structural identities every admissible spectrum must satisfy.

        Raises ValueError naming the first violated identity.  The grid is
        offset to midpoints so square-wave jump values are not probed.
        """
        om = (np.arange(nodes) + 0.5) * (TWO_PI / nodes)
        if np.max(np.abs(self.g(0, om) - 1.0)) > 1e-10:
            raise ValueError("spectrum invalid: g_0 must be identically 1")
        for k in k_probe:
            if abs(self.g(k, np.array(0.0)) - 1.0) > 1e-10:
                raise ValueError(f"spectrum invalid: g_k(0) != 1 at k={k}")
            prod = self.g(k, om) * self.g(-k, -om)
            if np.max(np.abs(prod - 1.0)) > 1e-10:
                raise ValueError(f"spectrum invalid: g_k(w) g_-k(-w) != 1 at k={k}")
            shifted = self.g(k, om + TWO_PI)
            expect = -self.g(k, om) if k % 2 else self.g(k, om)
            if np.max(np.abs(shifted - expect)) > 1e-10:
                raise ValueError(f"spectrum invalid: wrong 2*pi parity at k={k}")
            ck = self.c(k, om)
            if np.max(np.abs(self.c(k, om + TWO_PI) - ck)) > 1e-10:
                raise ValueError(f"spectrum invalid: C_k not 2*pi-periodic at k={k}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def case_a(cls, harmonic_cutoff: int = 64) -> "GSpectrum":
        return cls("a", harmonic_cutoff)

    @classmethod
    def case_b(cls, harmonic_cutoff: int = 64) -> "GSpectrum":
        return cls("b", harmonic_cutoff)

    @classmethod
    def case_c(cls, harmonic_cutoff: int = 64) -> "GSpectrum":
        return cls("c", harmonic_cutoff)

    @classmethod
    def custom(cls, g_fn, harmonic_cutoff: int = 64, discontinuities=None,
               validate: bool = True) -> "GSpectrum":
        spec = cls("custom", harmonic_cutoff, g_fn=g_fn, disc_fn=discontinuities)
        if validate:
            spec.validate()
        return spec


def g_eval(spec: GSpectrum, k: int, omega):
    """Value of g_k at omega for the given spectrum."""
    out = spec.g(k, np.asarray(omega, dtype=float))
    return complex(out) if np.ndim(omega) == 0 else out


def c_coefficient(spec: GSpectrum, k: int, omega):
    """Value of C_k at omega; 2*pi-periodic in omega for every k."""
    out = spec.c(k, np.asarray(omega, dtype=float))
    return complex(out) if np.ndim(omega) == 0 else out


# -- Fourier extraction ----------------------------------------------------

def fourier_coeffs_numeric(spec: GSpectrum, k: int, ells) -> np.ndarray:
    """Fourier coefficients of C_k by panel quadrature over one period.

    Panels are split at the known jump locations and subdivided so the
    Gauss-Legendre order tracks the highest harmonic requested.
    """
    ells = np.atleast_1d(np.asarray(ells, dtype=int))
    fmax = float(np.max(np.abs(ells))) + 0.5 * abs(k) + 1.0
    pieces = max(4, int(np.ceil(fmax / 12.0)) * 4)
    bounds = _boundaries(0.0, TWO_PI, pieces, spec.discontinuities(k))
    max_len = np.max(np.diff(bounds))
    order = int(np.ceil(0.75 * fmax * max_len)) + 16
    nodes, weights = _gauss_panels(bounds, min(order, 220))
    ck = spec.c(k, nodes)
    phase = np.exp(-1j * np.multiply.outer(ells, nodes))
    return (phase @ (weights * ck)) / TWO_PI


def fourier_coeffs_grid(spec: GSpectrum, k: int, ells, nodes: int = 4096) -> np.ndarray:
    """Fourier coefficients of C_k by a uniform midpoint rule (cross-check path).

    For the piecewise-constant square-wave branches this carries an
    algebraic error in 1/nodes, so it serves as a consistency check against
    the closed-form coefficients rather than as the production route.
    """
    ells = np.atleast_1d(np.asarray(ells, dtype=int))
    om = (np.arange(nodes) + 0.5) * (TWO_PI / nodes)
    ck = spec.c(k, om)
    return np.exp(-1j * np.multiply.outer(ells, om)) @ ck / nodes


# -- kernel type -----------------------------------------------------------

@dataclass(frozen=True)
class WignerKernel:
    """Base matrix of a kernel plus the covariance rules for (n, theta).

    ``window`` indexes the stored base matrix.  ``physical=True`` restricts
    the kernel to the nonnegative ladder: rows and columns at negative k or
    l are projected to zero on access while the base keeps its extended
    structure.
    """

    window: BasisWindow
    variant: str
    base: np.ndarray
    physical: bool = False
    spectrum: GSpectrum | None = None

    def __post_init__(self):
        b = np.asarray(self.base, dtype=complex)
        d = self.window.dim
        if b.shape != (d, d):
            raise ValueError(f"base must be {d}x{d}, got {b.shape}")
        object.__setattr__(self, "base", b)

    def base_at(self, a: int, b: int) -> complex:
        w = self.window
        if a not in w or b not in w:
            raise WindowError(
                f"base index ({a}, {b}) outside stored window [{w.n_min}, {w.n_max}]")
        return complex(self.base[a - w.n_min, b - w.n_min])

    def block(self, lo: int, hi: int) -> np.ndarray:
        """View of the base over rows and columns lo..hi (inclusive)."""
        w = self.window
        if lo < w.n_min or hi > w.n_max:
            raise WindowError(
                f"requested base block [{lo}, {hi}] exceeds stored window "
                f"[{w.n_min}, {w.n_max}]; rebuild the kernel on at least that window")
        i0 = lo - w.n_min
        i1 = hi - w.n_min + 1
        return self.base[i0:i1, i0:i1]

    def element(self, k: int, l: int, n: int, theta: float) -> complex:
        """Matrix element at ladder indices (k, l) and phase-space point (n, theta)."""
        if self.physical and (k < 0 or l < 0):
            return 0.0 + 0.0j
        val = self.base_at(k - n, l - n)
        return np.exp(1j * (k - l) * theta) * val

    def coeff_unbounded(self, k_diag: int, ells) -> np.ndarray:
        """Base values B[k_diag + ell][ell] beyond the stored window.

        Available only when the kernel carries a built-in spectrum.
        """
        if self.spectrum is None:
            raise ValueError("kernel has no spectrum attached")
        out = self.spectrum.base_coeff(k_diag, ells)
        if out is None:
            raise ValueError("custom spectrum has no closed-form coefficients")
        return out


def element(kern: WignerKernel, k: int, l: int, n: int, theta: float) -> complex:
    return kern.element(k, l, n, theta)


def base_from_spectrum(spec: GSpectrum, window: BasisWindow, *,
                       variant: str = "custom", physical: bool = False,
                       numeric: bool = False) -> WignerKernel:
    """Base matrix over ``window`` by inverting the anti-diagonal Fourier series.

    B[k + l][l] is the l-th Fourier coefficient of C_k.  Built-in spectra
    use their closed-form coefficients unless ``numeric`` forces the panel
    quadrature route (the two agree to quadrature accuracy and are compared
    in the test suite).
    """
    need = max(abs(window.n_min), abs(window.n_max))
    if need > spec.harmonic_cutoff:
        raise ValueError(
            f"harmonic cutoff {spec.harmonic_cutoff} too small for window "
            f"[{window.n_min}, {window.n_max}]; need at least {need}")
    idx = window.values()
    D = window.dim
    base = np.zeros((D, D), dtype=complex)
    use_closed = (not numeric) and spec.case_tag != "custom"
    for kd in range(-(D - 1), D):
        # entries with a - b = kd; column (= ell) range where both in window
        b_lo = max(window.n_min, window.n_min - kd)
        b_hi = min(window.n_max, window.n_max - kd)
        if b_hi < b_lo:
            continue
        ells = np.arange(b_lo, b_hi + 1)
        if use_closed:
            coeffs = spec.base_coeff(kd, ells)
        else:
            coeffs = fourier_coeffs_numeric(spec, kd, ells)
        rows = ells + kd - window.n_min
        cols = ells - window.n_min
        base[rows, cols] = coeffs
    return WignerKernel(window, variant, base, physical=physical, spectrum=spec)


def make_kernel(variant: str, window: BasisWindow, *, cutoff: int | None = None,
                numeric: bool = False) -> WignerKernel:
    """Build one of the named kernels over the given base window."""
    v = variant.lower()
    if v not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    case, physical = VARIANTS[v]
    if cutoff is None:
        cutoff = max(abs(window.n_min), abs(window.n_max))
    spec = GSpectrum(case, cutoff)
    if v == "w3":
        return w3_kernel(window, cutoff=cutoff, numeric=numeric)
    return base_from_spectrum(spec, window, variant=v, physical=physical,
                              numeric=numeric)


# -- closed forms for the physical kernels ----------------------------------

def _require_physical(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) < 0):
            raise ValueError("closed forms are defined for nonnegative indices only")


def closed_form_S1(k, l, n, theta=0.0):
    """First physical kernel: e^{i(k-l)theta}/(2*pi) on k+l = 2n and k+l = 2n-1."""
    k = np.asarray(k, dtype=int)
    l = np.asarray(l, dtype=int)
    n = np.asarray(n, dtype=int)
    _require_physical(k, l, n)
    sig = k + l
    amp = ((sig == 2 * n) | (sig == 2 * n - 1)) / TWO_PI
    out = np.exp(1j * (k - l) * np.asarray(theta, dtype=float)) * amp
    return complex(out) if out.ndim == 0 else out


def closed_form_S2(k, l, n, theta=0.0):
    """Second physical kernel, with s = 2n - k - l:

    e^{i(k-l)theta}/(2*pi) at s = 0; zero for even s != 0; otherwise
    e^{i(k-l)theta} * sin(s*pi/2) / (pi^2 s).
    """
    k = np.asarray(k, dtype=int)
    l = np.asarray(l, dtype=int)
    n = np.asarray(n, dtype=int)
    _require_physical(k, l, n)
    s = 2 * n - k - l
    safe = np.where(s == 0, 1, s)
    amp = np.where(s == 0, 1.0 / TWO_PI, _sin_half_pi(s) / (np.pi**2 * safe))
    out = np.exp(1j * (k - l) * np.asarray(theta, dtype=float)) * amp
    return complex(out) if out.ndim == 0 else out


# -- square-wave window functions and the two-term route --------------------

def h1(xi):
    """Smooth window (1 + e^{-i xi}) / 2."""
    return 0.5 * (1.0 + np.exp(-1j * np.asarray(xi, dtype=float)))


def h2(xi):
    """Indicator-like square window, 1 near 0 and 0 one half-period away."""
    return 0.5 * (1.0 + square_wave(2.0 * np.asarray(xi, dtype=float)))


def h3(xi):
    """First window of the two-term construction."""
    x = np.asarray(xi, dtype=float)
    return 0.5 * (0.5 + 0.5 * square_wave(4.0 * x) + square_wave(2.0 * x))


def h3_tilde(xi):
    """Second window of the two-term construction, supported where h3 dips."""
    return 0.25 * (1.0 - square_wave(4.0 * np.asarray(xi, dtype=float)))


_H_BREAKPOINTS = tuple(np.pi * f for f in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75))


def h_route_element(k: int, l: int, n: int, theta: float, *,
                    windows=("h3", "h3_tilde"), u: UnitFunction | None = None,
                    order: int = 64) -> complex:
    """Kernel element by direct quadrature of the window-function integrals.

    The一 element is e^{i(k-l)theta}/(2*pi^2) times the single-period
    integral of h(xi) e^{i(2n-k-l) xi}, plus, when a second window is given,
    the same integral of the second window carried at a quarter-period
    offset (phase e^{-i(k-l)pi/2}).  Used as the independent oracle for the
    spectral route.
    """
    if u is None:
        u = _default_unit()
    funcs = {"h1": h1, "h2": h2, "h3": h3, "h3_tilde": h3_tilde}
    s = 2 * n - k - l
    names = [w for w in windows if w]
    main = funcs[names[0]]
    i_main = quadrature_du(u, lambda x: main(x) * np.exp(1j * s * x),
                           periodic_hint=True, breakpoints=_H_BREAKPOINTS,
                           order=order)
    val = i_main
    if len(names) > 1:
        second = funcs[names[1]]
        i_second = quadrature_du(u, lambda x: second(x) * np.exp(1j * s * x),
                                 periodic_hint=True, breakpoints=_H_BREAKPOINTS,
                                 order=order)
        val = i_main + np.exp(-0.5j * (k - l) * np.pi) * i_second
    return np.exp(1j * (k - l) * theta) * val / (2.0 * np.pi**2)


_UNIT_CACHE = {}


def _default_unit() -> UnitFunction:
    if "u" not in _UNIT_CACHE:
        _UNIT_CACHE["u"] = UnitFunction()
    return _UNIT_CACHE["u"]


def w3_kernel(window: BasisWindow, *, cutoff: int | None = None,
              numeric: bool = False, validate: bool = True, samples: int = 60,
              seed: int = 7, tol: float = 1e-8) -> WignerKernel:
    """Third kernel, built spectrally and checked against the two-term route.

    The validation draws random (k, l, n, theta) tuples and compares the
    spectral elements with direct quadrature of the two window integrals.
    """
    if cutoff is None:
        cutoff = max(abs(window.n_min), abs(window.n_max))
    spec = GSpectrum.case_c(cutoff)
    kern = base_from_spectrum(spec, window, variant="w3", numeric=numeric)
    if validate:
        rng = np.random.default_rng(seed)
        lo, hi = window.n_min, window.n_max
        worst = 0.0
        for _ in range(samples):
            n = int(rng.integers(max(lo // 2, lo), min(hi // 2, hi) + 1))
            k = int(rng.integers(max(lo + n, lo), min(hi + n, hi) + 1))
            l = int(rng.integers(max(lo + n, lo), min(hi + n, hi) + 1))
            th = float(rng.uniform(0.0, TWO_PI))
            direct = h_route_element(k, l, n, th)
            worst = max(worst, abs(kern.element(k, l, n, th) - direct))
        if worst > tol:
            raise ArithmeticError(
                f"two-term construction disagrees with the spectral route "
                f"(max deviation {worst:.3e} > {tol:.1e})")
    return kern


# -- export / import ---------------------------------------------------------

def kernel_to_text(kern: WignerKernel) -> str:
    """Structured text export: header plus (k, l, re, im) base rows, 17 digits."""
    buf = io.StringIO()
    buf.write("npwigner-kernel 1\n")
    buf.write(f"variant {kern.variant}\n")
    buf.write(f"physical {'true' if kern.physical else 'false'}\n")
    buf.write(f"window {kern.window.n_min} {kern.window.n_max}\n")
    buf.write("base\n")
    idx = kern.window.values()
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            v = kern.base[i, j]
            buf.write(f"{a} {b} {v.real:.17g} {v.imag:.17g}\n")
    buf.write("end\n")
    return buf.getvalue()


def kernel_from_text(text: str) -> WignerKernel:
    """Parse the export format back into a kernel (no spectrum attached)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("npwigner-kernel"):
        raise ValueError("not a kernel export document")
    header = {}
    i = 1
    while i < len(lines) and lines[i] != "base":
        key, _, rest = lines[i].partition(" ")
        header[key] = rest
        i += 1
    if i >= len(lines):
        raise ValueError("kernel export has no base section")
    n_min, n_max = (int(s) for s in header["window"].split())
    window = BasisWindow(n_min, n_max)
    base = np.zeros((window.dim, window.dim), dtype=complex)
    seen = np.zeros(base.shape, dtype=bool)
    for ln in lines[i + 1:]:
        if ln == "end":
            break
        a_s, b_s, re_s, im_s = ln.split()
        r, c = window.index(int(a_s)), window.index(int(b_s))
        if seen[r, c]:
            raise ValueError(f"duplicate base entry at ({a_s}, {b_s})")
        seen[r, c] = True
        base[r, c] = float(re_s) + 1j * float(im_s)
    if not seen.all():
        raise ValueError("kernel export is missing base entries")
    return WignerKernel(window, header.get("variant", "custom"), base,
                        physical=header.get("physical", "false") == "true")


def support_antidiagonals(kern: WignerKernel, tol: float = 0.0) -> list[int]:
    """Values of k + l on which the base matrix has entries above ``tol``."""
    idx = kern.window.values()
    sig = np.add.outer(idx, idx)
    mask = np.abs(kern.base) > tol
    return sorted(int(s) for s in np.unique(sig[mask]))
