"""Classical side of the protocol: trapping times, energy windows, and a
brute-force trajectory oracle for the classical score bound 2/3.

Times are in units of 2*pi/omega0 and energies in hbar*omega0 throughout.
"""

from dataclasses import dataclass
from math import pi, sqrt, acos, acosh, cos, sin, inf, isinf

import numpy as np

from . import models
from .errors import (DomainError, EmptyWindowError, LibrationError,
                     UnsupportedTauError)
from .numerics import elliptic_K, elliptic_K_inverse, quad_inverse_sqrt

POS_BOUNDARY_TOL = 1e-12


def pos(q):
    """pos(q) = [1 + sgn(q)]/2 with the sgn(0) = 0 convention."""
    q = np.asarray(q, dtype=float)
    out = np.where(q > POS_BOUNDARY_TOL, 1.0,
                   np.where(q < -POS_BOUNDARY_TOL, 0.0, 0.5))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TrappingTimes:
    """Longest contiguous time with q >= 0 and shortest with q < 0.

    Infinite values are represented by ``math.inf`` explicitly.
    """

    dt_plus: float
    dt_minus: float

    def __post_init__(self):
        for v in (self.dt_plus, self.dt_minus):
            if not (v >= 0.0):
                raise DomainError("trapping times must be nonnegative")


@dataclass(frozen=True)
class EnergyWindow:
    e_min: float
    e_max: float

    def __post_init__(self):
        if not self.e_min <= self.e_max:
            raise EmptyWindowError(
                f"empty window: e_min={self.e_min} > e_max={self.e_max}")

    def contains(self, e):
        return self.e_min <= e <= self.e_max


# ---------------------------------------------------------------------------
# trapping times
# ---------------------------------------------------------------------------

def trapping_times(model, e):
    """Delta t_+/-(E) from the model's closed form."""
    kind = model.kind
    if kind == models.HARMONIC:
        if e <= 0:
            raise DomainError("harmonic trajectories require E > 0")
        return TrappingTimes(0.5, 0.5)

    if kind == models.KERR:
        lo, hi = model.energy_range()
        if not lo <= e <= hi:
            raise DomainError(f"Kerr energy {e} outside [{lo}, {hi}]")
        disc = 1.0 + 2.0 * model.alpha * e
        if disc <= 0.0:
            return TrappingTimes(inf, inf)
        half = 0.5 / sqrt(disc)
        return TrappingTimes(half, half)

    if kind == models.PENDULUM:
        a = abs(model.alpha)
        s = 8.0 * a * e
        if s < -1.0:
            raise DomainError("pendulum energy below the potential minimum")
        if s >= 1.0:
            raise LibrationError(
                "librating pendulum trajectories are excluded from the protocol")
        half = elliptic_K(0.5 * (s + 1.0)) / pi
        return TrappingTimes(half, half)

    if kind == models.MORSE:
        if e < 0:
            raise DomainError("Morse energies are nonnegative")
        de = models.morse_dissociation_energy(model)
        r = e / de
        if r < 1.0:
            root = sqrt(1.0 - r)
            dt_plus = 2.0 * acos(sqrt(r)) / (2.0 * pi * root)
            dt_minus = (2.0 * pi - 2.0 * acos(sqrt(r))) / (2.0 * pi * root)
        elif r == 1.0:
            dt_plus = 2.0 / (2.0 * pi)
            dt_minus = inf
        else:
            dt_plus = 2.0 * acosh(sqrt(r)) / (2.0 * pi * sqrt(r - 1.0))
            dt_minus = inf
        return TrappingTimes(dt_plus, dt_minus)

    # infinite well
    if e <= 0:
        raise DomainError("well trajectories require E > 0")
    half = 0.5 / sqrt(e)
    return TrappingTimes(half, half)


def trapping_times_quadrature(potential, e, mass=1.0, search=(-50.0, 50.0),
                              rel_tol=1e-10):
    """Generic turning-point quadrature for Delta t_+/-.

    ``potential`` maps position to energy (same units as *e*); the result
    is in the same time unit as sqrt(mass * length^2 / energy). Used to
    cross-check the closed forms; accepts any smooth potential with
    turning points inside ``search``.
    """
    lo, hi = search

    def root_between(x0, x1):
        f0, f1 = e - potential(x0), e - potential(x1)
        if f0 == 0.0:
            return x0
        if f1 == 0.0:
            return x1
        if f0 * f1 > 0:
            return None
        for _ in range(200):
            xm = 0.5 * (x0 + x1)
            fm = e - potential(xm)
            if fm == 0.0 or (x1 - x0) < 1e-15 * max(1.0, abs(xm)):
                return xm
            if f0 * fm < 0:
                x1, f1 = xm, fm
            else:
                x0, f0 = xm, fm
        return 0.5 * (x0 + x1)

    # locate q_{-1} (first root below 0) and q_{+1} (first root above 0)
    xs = np.linspace(lo, hi, 4001)
    vals = e - potential(xs)
    q_neg = q_pos = None
    for i in range(len(xs) - 1):
        if xs[i + 1] <= 0 and vals[i] * vals[i + 1] <= 0:
            q_neg = root_between(xs[i], xs[i + 1])  # keep the closest to 0
        if xs[i] >= 0 and vals[i] * vals[i + 1] <= 0 and q_pos is None:
            q_pos = root_between(xs[i], xs[i + 1])

    def dwell_time(a, b):
        # twice the turning-point-to-origin transit: the trajectory enters
        # the half-plane, reaches the turning point, and retraces its path
        f = lambda x: 1.0 / sqrt(max(e - potential(x), 1e-300))
        return 2.0 * sqrt(mass / 2.0) * quad_inverse_sqrt(f, a, b, rel_tol=rel_tol)

    eps = 1e-7

    def slope(x):
        return -(potential(x + eps) - potential(x - eps)) / (2 * eps)

    if q_neg is not None and slope(q_neg) > 0:
        dt_minus = dwell_time(q_neg, 0.0)
    elif q_neg is None and q_pos is not None and slope(q_pos) >= 0:
        dt_minus = 0.0
    else:
        dt_minus = inf
    if q_pos is not None and slope(q_pos) < 0:
        dt_plus = dwell_time(0.0, q_pos)
    elif q_pos is None and q_neg is not None and slope(q_neg) <= 0:
        dt_plus = 0.0
    else:
        dt_plus = inf
    return TrappingTimes(dt_plus, dt_minus)


# ---------------------------------------------------------------------------
# energy windows
# ---------------------------------------------------------------------------

TAU_LO, TAU_HI = 0.75, 1.5


def _check_tau_range(tau, lo=TAU_LO, hi=TAU_HI):
    if not lo <= tau <= hi:
        raise UnsupportedTauError(
            f"probing ratio {tau} outside admissible range [{lo}, {hi}]")


def energy_window(model, tau):
    """Widest [e_min, e_max] keeping the classical bound at 2/3 for tau."""
    kind = model.kind
    if kind == models.HARMONIC:
        _check_tau_range(tau)
        return EnergyWindow(0.0, inf)

    if kind == models.KERR:
        _check_tau_range(tau)
        alpha = model.alpha
        if alpha == 0.0:
            return EnergyWindow(0.0, inf)
        lo_expr = 9.0 / (16.0 * tau * tau) - 1.0
        hi_expr = 9.0 / (4.0 * tau * tau) - 1.0
        if alpha > 0:
            e_min = lo_expr / (2.0 * alpha)
            e_max = hi_expr / (2.0 * alpha)
        else:
            e_min = hi_expr / (2.0 * alpha)
            e_max = lo_expr / (2.0 * alpha)
        rng_lo, rng_hi = model.energy_range()
        e_min = max(e_min, rng_lo)
        e_max = min(e_max, rng_hi)
        if e_min > e_max:
            raise EmptyWindowError(f"Kerr window empty at tau={tau}, alpha={alpha}")
        return EnergyWindow(e_min, e_max)

    if kind == models.PENDULUM:
        _check_tau_range(tau)
        a = abs(model.alpha)
        k_lo = pi * tau / 3.0
        k_hi = 2.0 * pi * tau / 3.0
        m_min = elliptic_K_inverse(k_lo) if k_lo > pi / 2 else 0.0
        m_max = elliptic_K_inverse(k_hi)
        e_min = (2.0 * m_min - 1.0) / (8.0 * a)
        e_max = (2.0 * m_max - 1.0) / (8.0 * a)
        if e_min > e_max:
            raise EmptyWindowError(f"pendulum window empty at tau={tau}")
        return EnergyWindow(e_min, e_max)

    if kind == models.MORSE:
        if abs(tau - 1.0) > 1e-12:
            raise UnsupportedTauError(
                "the Morse protocol runs at tau = 1 only (harmonic trapping times)")
        return EnergyWindow(0.0, inf)

    # infinite well
    if tau <= 0:
        raise UnsupportedTauError("well probing ratio must be positive")
    return EnergyWindow(9.0 / (16.0 * tau * tau), 9.0 / (4.0 * tau * tau))


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------
#
# Phase-space conventions (position q, reduced momentum p):
#   harmonic/Kerr : q, p in sqrt(hbar/m omega0) units, eps = (q^2+p^2)/2 (+Kerr term)
#   pendulum      : q = phi in (-pi, pi], p = l/hbar, eps = 4|a|p^2 - cos(q)/(8|a|)
#   Morse         : q = c x, p scaled so eps = p^2/(2 lambda) + (lambda/2)(1-e^q)^2
#   well          : q in L units in [-1/2, 1/2], p = velocity dq/dt, eps = (p/2)^2
# Each pair is canonical up to a constant rescaling of p, so uniform sampling
# in (q, p) is uniform in canonical phase-space area.

_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1
_YOSHIDA_C = np.array([_YOSHIDA_W1 / 2, (_YOSHIDA_W0 + _YOSHIDA_W1) / 2,
                       (_YOSHIDA_W0 + _YOSHIDA_W1) / 2, _YOSHIDA_W1 / 2])
_YOSHIDA_D = np.array([_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1])


def _yoshida4(q, p, inv_mass, force, s_total, n_steps):
    """Fourth-order symplectic composition for H = p^2/(2m) + V(q)."""
    h = s_total / n_steps
    q = np.array(q, dtype=float, copy=True)
    p = np.array(p, dtype=float, copy=True)
    for _ in range(n_steps):
        q += _YOSHIDA_C[0] * h * inv_mass * p
        for i in range(3):
            p += _YOSHIDA_D[i] * h * force(q)
            q += _YOSHIDA_C[i + 1] * h * inv_mass * p
    return q, p


def hamiltonian_value(model, q, p):
    """Dimensionless energy eps(q, p) under the conventions above."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    kind = model.kind
    if kind == models.HARMONIC:
        return 0.5 * (q * q + p * p)
    if kind == models.KERR:
        h0 = 0.5 * (q * q + p * p)
        return h0 + 0.5 * model.alpha * h0 * h0
    if kind == models.PENDULUM:
        a = abs(model.alpha)
        return 4.0 * a * p * p - np.cos(q) / (8.0 * a)
    if kind == models.MORSE:
        lam = model.lambda_morse
        return p * p / (2.0 * lam) + 0.5 * lam * (1.0 - np.exp(q)) ** 2
    return 0.25 * p * p  # well: p is dq/dt, eps = (p/2)^2


def _pendulum_force_and_mass(model):
    a = abs(model.alpha)
    return (lambda q: -np.sin(q) / (8.0 * a)), 1.0 / (8.0 * a)


def _morse_force_and_mass(model):
    lam = model.lambda_morse

    def force(q):
        eq = np.exp(q)
        return lam * (1.0 - eq) * eq

    return force, lam


def _well_position(q0, p0, t):
    """Exact free flight with specular wall reflections, L = 1."""
    x = np.asarray(q0, dtype=float) + np.asarray(p0, dtype=float) * t
    # fold onto [-1/2, 3/2) then reflect the upper half
    y = np.mod(x + 0.5, 2.0)
    return np.where(y <= 1.0, y - 0.5, 1.5 - y)


def _positions_at(model, q0, p0, times, n_steps_per_unit=2048):
    """Positions q(t) for a batch of initial states at each listed time.

    ``times`` must be sorted ascending; returns array (len(times), batch).
    """
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    kind = model.kind
    out = np.empty((len(times), len(q0)))

    if kind in (models.HARMONIC, models.KERR):
        h0 = 0.5 * (q0 * q0 + p0 * p0)
        omega = 1.0 if kind == models.HARMONIC else 1.0 + model.alpha * h0
        for i, t in enumerate(times):
            phase = 2.0 * pi * omega * t
            out[i] = q0 * np.cos(phase) + p0 * np.sin(phase)
        return out

    if kind == models.WELL:
        for i, t in enumerate(times):
            out[i] = _well_position(q0, p0, t)
        return out

    force, mass = (_pendulum_force_and_mass(model) if kind == models.PENDULUM
                   else _morse_force_and_mass(model))
    q, p = q0, p0
    prev_t = 0.0
    for i, t in enumerate(times):
        dt = t - prev_t
        if dt > 0:
            s = 2.0 * pi * dt
            n = max(8, int(np.ceil(n_steps_per_unit * dt)))
            q, p = _yoshida4(q, p, 1.0 / mass, force, s, n)
        if kind == models.PENDULUM:
            out[i] = np.mod(q + pi, 2.0 * pi) - pi
        else:
            out[i] = q
        prev_t = t
    return out


def integrate_trajectory(model, q0, p0, t, drift_tol=1e-9):
    """(q, p) after time t (units 2*pi/omega0).

    Harmonic/Kerr precess exactly; the well uses exact wall reflections;
    pendulum and Morse use a fourth-order symplectic integrator whose step
    is refined until the relative energy drift is below ``drift_tol``.
    """
    kind = model.kind
    if kind in (models.HARMONIC, models.KERR):
        h0 = 0.5 * (q0 * q0 + p0 * p0)
        omega = 1.0 if kind == models.HARMONIC else 1.0 + model.alpha * h0
        phase = 2.0 * pi * omega * t
        return (q0 * cos(phase) + p0 * sin(phase),
                -q0 * sin(phase) + p0 * cos(phase))
    if kind == models.WELL:
        if not -0.5 <= q0 <= 0.5:
            raise DomainError("well position outside [-1/2, 1/2]")
        x = q0 + p0 * t
        y = (x + 0.5) % 2.0
        if y <= 1.0:
            return y - 0.5, p0
        return 1.5 - y, -p0

    force, mass = (_pendulum_force_and_mass(model) if kind == models.PENDULUM
                   else _morse_force_and_mass(model))
    e0 = float(hamiltonian_value(model, q0, p0))
    scale = max(abs(e0), 1.0)
    n = max(64, int(abs(t) * 512))
    while True:
        q, p = _yoshida4(np.array([q0]), np.array([p0]), 1.0 / mass, force,
                         2.0 * pi * t, n)
        drift = abs(float(hamiltonian_value(model, q[0], p[0])) - e0) / scale
        if drift <= drift_tol or n > 2 ** 22:
            break
        n *= 2
    q_out = float(q[0])
    if kind == models.PENDULUM:
        q_out = (q_out + pi) % (2.0 * pi) - pi
    return q_out, float(p[0])


def morse_bound_position(model, e, t):
    """Closed-form bound trajectory starting at the inner turning point.

    Initial condition p(0) = 0 on the positive-q side; e must be below the
    dissociation energy.
    """
    de = models.morse_dissociation_energy(model)
    r = e / de
    if not 0.0 <= r < 1.0:
        raise DomainError("closed-form Morse trajectory requires 0 <= E < De")
    period = 1.0 / sqrt(1.0 - r)
    return float(np.log((1.0 - r) / (1.0 - sqrt(r) * np.cos(2.0 * pi * t / period))))


# ---------------------------------------------------------------------------
# classical score oracle
# ---------------------------------------------------------------------------

ENERGY_CAP = 50.0  # finite sampling cap when the window is unbounded above


def _sampling_box(model, window):
    """Bounding (q, p) box whose interior covers the windowed region."""
    kind = model.kind
    e_hi = window.e_max
    if kind == models.MORSE:
        de = models.morse_dissociation_energy(model)
        e_hi = min(e_hi, 2.0 * de)
    if isinf(e_hi):
        e_hi = ENERGY_CAP

    if kind in (models.HARMONIC, models.KERR):
        if kind == models.KERR and model.alpha != 0.0:
            h0 = 2.0 * e_hi / (1.0 + sqrt(max(1.0 + 2.0 * model.alpha * e_hi, 0.0)))
        else:
            h0 = e_hi
        r = sqrt(2.0 * h0)
        return (-r, r), (-r, r), e_hi
    if kind == models.PENDULUM:
        a = abs(model.alpha)
        p_max = sqrt(max(e_hi + 1.0 / (8.0 * a), 0.0) / (4.0 * a))
        return (-pi, pi), (-p_max, p_max), e_hi
    if kind == models.MORSE:
        lam = model.lambda_morse
        de = 0.5 * lam
        # q_hi solves V = e_hi on the steep side; open side capped at q = -10
        q_hi = np.log(1.0 + sqrt(min(e_hi / de, 4.0)))
        p_max = sqrt(2.0 * lam * e_hi)
        return (-10.0, q_hi), (-p_max, p_max), e_hi
    # well
    v_max = 2.0 * sqrt(e_hi)
    return (-0.5, 0.5), (-v_max, v_max), e_hi


def classical_score_oracle(model, window, tau, n_samples, seed,
                           batch_size=100_000):
    """Maximum P3 over uniformly sampled classical states in the window.

    Sampling is uniform in canonical phase-space area via rejection inside
    a bounding box; P3 is evaluated exactly from the trajectories at the
    three probing times. Deterministic given *seed* (Philox streams).
    """
    if n_samples <= 0:
        raise DomainError("n_samples must be positive")
    (q_lo, q_hi), (p_lo, p_hi), e_cap = _sampling_box(model, window)
    kerr_h0_cap = (1.0 / abs(model.alpha)
                   if model.kind == models.KERR and model.alpha < 0 else None)
    times = [tau / 3.0, 2.0 * tau / 3.0]
    rng = np.random.Generator(np.random.Philox(key=seed))
    best = 0.0
    remaining = n_samples
    while remaining > 0:
        n = min(batch_size, remaining)
        # oversample to survive rejection
        q = rng.uniform(q_lo, q_hi, size=2 * n)
        p = rng.uniform(p_lo, p_hi, size=2 * n)
        e = hamiltonian_value(model, q, p)
        keep = (e >= window.e_min) & (e <= min(window.e_max, e_cap))
        if kerr_h0_cap is not None:
            keep &= 0.5 * (q * q + p * p) <= kerr_h0_cap
        # drop the trivial fixed point at the origin (its score is 1/2)
        keep &= ~((np.abs(q) < POS_BOUNDARY_TOL) & (np.abs(p) < POS_BOUNDARY_TOL))
        q, p = q[keep][:n], p[keep][:n]
        if len(q) == 0:
            raise EmptyWindowError("rejection sampler found no states in the window")
        score = pos(q)
        qs = _positions_at(model, q, p, times)
        for row in qs:
            score = score + pos(row)
        best = max(best, float(np.max(score)) / 3.0)
        remaining -= n
    return best
