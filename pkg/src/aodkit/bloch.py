"""Adaptive RK4 integration of a driven two-level system.

Independent reference dynamics for validating the closed-form Rabi
formulas used by the virtual lab: the state is integrated directly from
the Schrodinger equation in the rotating frame,

    i d/dt (cg, ce) = H (cg, ce),   H = 0.5 * [[-delta, omega(t)],
                                               [omega(t), delta]].

Step-doubling error control with local extrapolation; the drive may be
any callable of time (amplitude ramps included).
"""

import numpy as np

from .errors import ValidationError


def _deriv(t, state, omega, delta):
    om = omega(t) if callable(omega) else omega
    cg, ce = state
    return np.array([
        -0.5j * (-delta * cg + om * ce),
        -0.5j * (om * cg + delta * ce),
    ])


def _rk4_step(t, state, h, omega, delta):
    k1 = _deriv(t, state, omega, delta)
    k2 = _deriv(t + 0.5 * h, state + 0.5 * h * k1, omega, delta)
    k3 = _deriv(t + 0.5 * h, state + 0.5 * h * k2, omega, delta)
    k4 = _deriv(t + h, state + h * k3, omega, delta)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def excited_population(omega, detuning, duration, tol=1e-11):
    """Excited-state population after driving from the ground state.

    ``omega`` is the (possibly time-dependent) Rabi rate in rad/s.
    Accuracy is controlled by the per-step tolerance ``tol``; the
    default holds closed-form comparisons to well under 1e-8.
    """
    if duration < 0.0:
        raise ValidationError("duration must be >= 0")
    if duration == 0.0:
        return 0.0

    state = np.array([1.0 + 0.0j, 0.0j])
    t = 0.0
    h = duration / 64.0
    while t < duration:
        h = min(h, duration - t)
        full = _rk4_step(t, state, h, omega, detuning)
        half = _rk4_step(t, state, 0.5 * h, omega, detuning)
        double = _rk4_step(t + 0.5 * h, half, 0.5 * h, omega, detuning)
        err = float(np.max(np.abs(double - full)))
        if err > tol and h > 1e-18 * duration:
            h *= 0.5
            continue
        state = double + (double - full) / 15.0  # 5th-order local extrapolation
        t += h
        if err < tol / 32.0:
            h *= 2.0
    return float(np.abs(state[1]) ** 2)
