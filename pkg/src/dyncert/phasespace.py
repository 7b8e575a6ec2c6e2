"""Wigner-function grids for visual diagnostics.

Cartesian models get the standard Wigner transform; the pendulum gets a
discrete angular-momentum Wigner kernel whose position and momentum
marginals are exact by construction.
"""

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from . import models, spectra
from .errors import DomainError
from .simulate import position_grid

NORMALIZATION_TOL = 1e-3


@dataclass(frozen=True)
class WignerGrid:
    """Real phase-space samples; p_discrete marks integer-momentum axes."""

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    p_discrete: bool = False

    def __post_init__(self):
        q = np.asarray(self.q_axis, dtype=float)
        p = np.asarray(self.p_axis, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (q.size, p.size):
            raise DomainError("values must be shaped (len(q), len(p))")
        if not (np.all(np.diff(q) > 0) and np.all(np.diff(p) > 0)):
            raise DomainError("axes must be strictly increasing")
        object.__setattr__(self, "q_axis", q)
        object.__setattr__(self, "p_axis", p)
        object.__setattr__(self, "values", v)
        total = self.integral()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(
                f"Wigner grid integrates to {total}, expected 1 within 1e-3; "
                "the axes do not cover the state's phase-space support")

    def integral(self):
        over_p = (self.values.sum(axis=1) if self.p_discrete
                  else np.trapezoid(self.values, self.p_axis, axis=1))
        return float(np.trapezoid(over_p, self.q_axis))

    def marginal_q(self):
        if self.p_discrete:
            return self.values.sum(axis=1)
        return np.trapezoid(self.values, self.p_axis, axis=1)

    def marginal_p(self):
        return np.trapezoid(self.values, self.q_axis, axis=0)


def _psi_at(state, pts):
    """Synthesized wavefunction at arbitrary points (zero outside a box)."""
    model = state.slice.model
    flat = np.asarray(pts, dtype=float).ravel()
    if model.kind == models.WELL:
        inside = np.abs(flat) <= 0.5
        vals = np.zeros(flat.size, dtype=complex)
        if np.any(inside):
            table = np.array([spectra.eigenfunction_grid(model, int(n),
                                                         flat[inside])
                              for n in state.slice.indices])
            vals[inside] = state.amplitudes @ table
    else:
        table = np.array([spectra.eigenfunction_grid(model, int(n), flat)
                          for n in state.slice.indices])
        vals = state.amplitudes @ table
    return vals.reshape(np.shape(pts))


def default_axes(state, n_q=201, n_p=201):
    """Axes generously covering the state's phase-space support."""
    model = state.slice.model
    grid = position_grid(state, 1001)
    q_axis = np.linspace(grid[0], grid[-1], n_q)
    e_hi = float(max(state.slice.energies))
    if model.kind == models.WELL:
        n_hi = max(state.slice.indices)
        p_max = n_hi * pi + 1000.0  # box edges give slow 1/p^2 tails
        n_p = max(n_p, 2401)
    elif model.kind == models.MORSE:
        p_max = sqrt(2.0 * model.lambda_morse * max(e_hi, 1.0)) + 10.0
    else:
        p_max = sqrt(2.0 * max(abs(e_hi), 1.0)) + 6.0
    p_axis = np.linspace(-p_max, p_max, n_p)
    return q_axis, p_axis


def wigner_cartesian(state, q_axis, p_axis, n_y=2001):
    """W(q, p) = (1/pi) int dy psi*(q+y) psi(q-y) exp(2ipy), hbar = 1."""
    model = state.slice.model
    if model.kind == models.PENDULUM:
        raise DomainError("pendulum states require the angular Wigner kernel")
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    grid = position_grid(state, 101)
    half_span = 0.5 * (grid[-1] - grid[0])
    ys = np.linspace(-half_span, half_span, n_y)
    plus = _psi_at(state, q_axis[:, None] + ys[None, :])
    minus = _psi_at(state, q_axis[:, None] - ys[None, :])
    corr = np.conj(plus) * minus
    weights = np.full(n_y, ys[1] - ys[0])
    weights[0] = weights[-1] = 0.5 * (ys[1] - ys[0])
    kernel = weights[:, None] * np.exp(2j * np.outer(ys, p_axis))
    values = (corr @ kernel).real / pi
    return WignerGrid(q_axis, p_axis, values)


def _fourier_modes(state, n_samples=2048):
    """Integer-harmonic coefficients a_l with psi(phi) = sum a_l e^{il phi}."""
    phis = -pi + 2.0 * pi * np.arange(n_samples) / n_samples
    psi = _psi_at(state, phis)
    raw = np.fft.fft(psi) / n_samples
    ls = np.fft.fftfreq(n_samples, d=1.0 / n_samples).astype(int)
    coeffs = raw * np.exp(1j * ls * pi)  # undo the -pi grid offset
    keep = np.abs(coeffs) > 1e-13
    return ls[keep], coeffs[keep]


def default_m_range(state):
    """Integer momentum interval carrying all but ~1e-13 of the weight."""
    ls, _ = _fourier_modes(state)
    lo, hi = int(ls.min()), int(ls.max())
    return lo - 1, hi + 1


def wigner_angular(state, phi_axis, m_range):
    """Discrete-m angular Wigner function of a pendulum state.

    W(phi, m) = (1/2pi) int_{-pi}^{pi} dtheta e^{-im theta}
                psi(phi + theta/2) psi*(phi - theta/2),
    evaluated exactly through the state's integer Fourier modes. Summing
    over all integers m returns |psi(phi)|^2 and integrating over phi
    returns the weight of angular momentum m, both exactly.
    """
    model = state.slice.model
    if model.kind != models.PENDULUM:
        raise DomainError("angular Wigner kernel applies to pendulum states")
    phi_axis = np.asarray(phi_axis, dtype=float)
    m_lo, m_hi = m_range
    ms = np.arange(int(m_lo), int(m_hi) + 1)
    ls, al = _fourier_modes(state)
    values = _angular_kernel(ls, al, phi_axis, ms)
    return WignerGrid(phi_axis, ms.astype(float), values, p_discrete=True)


def _angular_kernel(ls, al, phi_axis, ms):
    values = np.zeros((phi_axis.size, ms.size))
    for i, l1 in enumerate(ls):
        for j, l2 in enumerate(ls):
            s = l1 + l2 - 2 * ms  # kernel K(s): 2pi at 0, 4 sin(s pi/2)/s else
            k = np.where(s == 0, 2.0 * pi,
                         4.0 * np.sin(np.where(s == 0, 1, s) * pi / 2.0)
                         / np.where(s == 0, 1, s))
            coeff = al[i] * np.conj(al[j]) * k / (2.0 * pi)
            values += np.real(np.exp(1j * (l1 - l2) * phi_axis)[:, None]
                              * coeff[None, :])
    return values


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def wigner_to_csv(grid):
    """CSV matrix with the p axis as the header row and q as first column."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["q\\p"] + [f"{p!r}" for p in grid.p_axis])
    for q, row in zip(grid.q_axis, grid.values):
        writer.writerow([f"{q!r}"] + [f"{v!r}" for v in row])
    return buf.getvalue()


def state_hash(state):
    payload = json.dumps({
        "model": state.slice.model.describe(),
        "indices": [int(n) for n in state.slice.indices],
        "amplitudes": [[float(a.real), float(a.imag)]
                       for a in state.amplitudes],
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def sidecar_json(state, tau, kind):
    model = state.slice.model
    return json.dumps({
        "model": model.kind,
        "alpha": model.alpha,
        "lambda": model.lambda_morse,
        "tau": tau,
        "kind": kind,
        "state_hash": state_hash(state),
    }, indent=2)
