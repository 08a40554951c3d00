"""Anamorphic prism-pair design: expansion ratio, solving and tolerancing.

A pair of wedge prisms used near grazing incidence expands a beam along
one axis only.  Refraction at each of the four surfaces scales the beam
width by ``cos(theta_refracted) / cos(theta_incident)``; the expansion
factor M is the product over the surfaces.

Angle convention
----------------
Quoted mounting angles are referenced against different datums, so the
module implements the two candidate conventions below and calibrates
against a known reference design (alpha = 39 deg, alpha' = 14.75 deg,
beta = beta' = 30 deg, n = 1.476, M = 4.7):

``normal-chained``
    ``alpha`` is the incidence angle from the first entry-face normal;
    the second prism's incidence is ``alpha' + theta4`` with ``theta4``
    the exit angle of prism 1 (geometry chained through the exit ray).

``grazing-chained``
    ``alpha`` is the grazing angle between beam and entry face, so the
    incidence from the normal is ``90 deg - alpha``; ``alpha'`` is the
    face-to-face angle between the prisms, giving a second incidence of
    ``(90 deg - alpha') + theta4``.

Only ``grazing-chained`` reproduces the reference design (M = 4.693,
0.15 % from 4.7; the normal-referenced reading gives M = 1.08), so it is
the calibrated default.  All angles in this module are degrees; the
convention in force is recorded in every report.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfeasibleDesignError,
    TotalInternalReflectionError,
    UnachievableTargetError,
    ValidationError,
)

CONVENTIONS = ("normal-chained", "grazing-chained")

ANCHOR_DESIGN_ANGLES = (39.0, 14.75, 30.0, 30.0, 1.476)
ANCHOR_EXPANSION = 4.7
ANCHOR_TOLERANCE = 0.15  # fractional agreement required to accept a convention

ANGLE_NAMES = ("alpha", "alpha_prime", "beta", "beta_prime")


@dataclass(frozen=True)
class PrismPairDesign:
    """Mounting and wedge angles (degrees) plus refractive index.

    ``alpha`` and ``alpha_prime`` follow the module-level angle
    convention; ``beta`` and ``beta_prime`` are the wedge (apex) angles
    of the first and second prism.
    """

    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float
    refractive_index: float

    def __post_init__(self):
        for name in ("alpha", "alpha_prime"):
            v = getattr(self, name)
            if not (0.0 < v < 90.0):
                raise ValidationError(f"{name} must lie in (0, 90) degrees, got {v}")
        for name in ("beta", "beta_prime"):
            v = getattr(self, name)
            if not (0.0 <= v < 90.0):
                raise ValidationError(f"{name} must lie in [0, 90) degrees, got {v}")
        if not (1.0 <= self.refractive_index < 5.0):
            raise ValidationError(
                f"refractive_index must lie in [1, 5), got {self.refractive_index}"
            )

    def angles(self):
        return (self.alpha, self.alpha_prime, self.beta, self.beta_prime)


# ---------------------------------------------------------------------------
# Vectorised four-surface trace
# ---------------------------------------------------------------------------


def _single_prism(theta1_deg, wedge_deg, n):
    """Trace one prism (entry + exit surface), all angles in degrees.

    Returns (width_factor, exit_angle_deg, fail) where ``fail`` is 0 for a
    feasible trace, 1 if the ray cannot strike the entry face
    (|theta1| >= 90) and 2 for total internal reflection at the exit.
    """
    theta1 = np.radians(np.asarray(theta1_deg, dtype=float))
    fail = np.zeros(theta1.shape, dtype=int)
    graze = np.abs(theta1) >= math.pi / 2.0
    fail[graze] = 1
    t1 = np.where(graze, 0.0, theta1)

    t2 = np.arcsin(np.sin(t1) / n)  # |sin t1| / n < 1 always for n >= 1
    t3 = t2 - np.radians(wedge_deg)
    s4 = n * np.sin(t3)
    tir = (np.abs(s4) > 1.0) & (fail == 0)
    fail[tir] = 2
    t4 = np.arcsin(np.clip(s4, -1.0, 1.0))

    m = (np.cos(t2) / np.cos(t1)) * (np.cos(t4) / np.cos(t3))
    m = np.where(fail == 0, m, np.nan)
    return m, np.degrees(t4), fail


def _expansion_many(alpha, alpha_prime, beta, beta_prime, n, convention):
    """Expansion factor for broadcast arrays of angles (degrees).

    Returns (values, fail_surface); ``fail_surface`` is 0 where feasible,
    else the 1-based index of the first offending surface.
    """
    if convention not in CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    alpha, alpha_prime, beta, beta_prime = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (alpha, alpha_prime, beta, beta_prime))
    )
    shape = alpha.shape
    alpha, alpha_prime, beta, beta_prime = (
        np.atleast_1d(a) for a in (alpha, alpha_prime, beta, beta_prime)
    )
    if convention == "grazing-chained":
        theta1 = 90.0 - alpha
    else:
        theta1 = alpha

    m1, theta4, fail1 = _single_prism(theta1, beta, n)

    if convention == "grazing-chained":
        theta1b = (90.0 - alpha_prime) + theta4
    else:
        theta1b = alpha_prime + theta4
    m2, _, fail2 = _single_prism(theta1b, beta_prime, n)

    surface = np.zeros(m1.shape, dtype=int)
    surface[fail2 == 2] = 4
    surface[fail2 == 1] = 3
    surface[fail1 == 2] = 2
    surface[fail1 == 1] = 1

    values = np.where(surface == 0, m1 * m2, np.nan)
    return values.reshape(shape), surface.reshape(shape)


_SURFACE_LABEL = {
    1: "entry face of prism 1",
    2: "exit face of prism 1",
    3: "entry face of prism 2",
    4: "exit face of prism 2",
}


def expansion_factor(design, convention=None):
    """Single-axis expansion ratio M of a prism pair.

    Raises :class:`TotalInternalReflectionError` (surfaces 2 and 4) or
    :class:`InfeasibleDesignError` (grazing overflow at surfaces 1 and 3)
    for geometries no ray can traverse.
    """
    conv = convention or calibrated_convention()
    values, surface = _expansion_many(
        design.alpha, design.alpha_prime, design.beta, design.beta_prime,
        design.refractive_index, conv,
    )
    surf = int(surface)
    if surf:
        msg = f"infeasible prism geometry at the {_SURFACE_LABEL[surf]} (surface {surf})"
        if surf in (2, 4):
            raise TotalInternalReflectionError(msg, surface_index=surf)
        raise InfeasibleDesignError(msg, surface_index=surf)
    return float(values)


@functools.lru_cache(maxsize=1)
def calibrated_convention():
    """Angle convention selected by the reference-design calibration.

    Tries the candidate conventions in declaration order and returns the
    first that reproduces the reference expansion within 15 %.
    """
    a, ap, b, bp, n = ANCHOR_DESIGN_ANGLES
    design = PrismPairDesign(a, ap, b, bp, n)
    for conv in CONVENTIONS:
        try:
            m = expansion_factor(design, convention=conv)
        except InfeasibleDesignError:
            continue
        if abs(m - ANCHOR_EXPANSION) <= ANCHOR_TOLERANCE * ANCHOR_EXPANSION:
            return conv
    raise AssertionError("no angle convention reproduces the reference design")


# ---------------------------------------------------------------------------
# Design-space exploration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionContour:
    """M over an (alpha, alpha_prime) grid; infeasible points flagged."""

    alpha: np.ndarray
    alpha_prime: np.ndarray
    values: np.ndarray  # shape (len(alpha), len(alpha_prime)), NaN where infeasible
    feasible: np.ndarray
    convention: str


def _check_grid(name, grid):
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D grid")
    if arr.size > 1 and not np.all(np.diff(arr) > 0.0):
        raise ValidationError(f"{name} must be strictly increasing")
    return arr


def expansion_contour(alpha_grid, alpha_prime_grid, beta, beta_prime, refractive_index,
                      convention=None):
    """Expansion factor over a mounting-angle grid.

    Grid points whose geometry is infeasible are flagged in ``feasible``
    and carried as NaN in ``values`` rather than dropped.
    """
    conv = convention or calibrated_convention()
    alphas = _check_grid("alpha_grid", alpha_grid)
    alpha_primes = _check_grid("alpha_prime_grid", alpha_prime_grid)
    values, surface = _expansion_many(
        alphas[:, None], alpha_primes[None, :], beta, beta_prime, refractive_index, conv,
    )
    return ExpansionContour(
        alpha=alphas,
        alpha_prime=alpha_primes,
        values=values,
        feasible=surface == 0,
        convention=conv,
    )


@dataclass(frozen=True)
class AlphaPrimeSolution:
    """Result of solving the second mounting angle for a target M."""

    alpha_prime: float
    expansion: float
    degenerate: bool
    convention: str


def solve_alpha_prime(target, alpha, beta, beta_prime, refractive_index,
                      bracket=(5.0, 60.0), convention=None):
    """Solve the second mounting angle producing expansion ``target``.

    Bisection on the documented default bracket (5 to 60 degrees, where M
    is monotone for grazing-style designs).  If the bracket endpoints do
    not straddle the target, an :class:`UnachievableTargetError` reports
    the achievable range on the bracket; an interval over which M is flat
    at the target returns an endpoint flagged as degenerate.
    """
    if target <= 0.0:
        raise ValidationError(f"target expansion must be positive, got {target}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValidationError(f"bracket must be an increasing pair, got {bracket}")
    conv = convention or calibrated_convention()

    def m_of(ap):
        return expansion_factor(
            PrismPairDesign(alpha, ap, beta, beta_prime, refractive_index), convention=conv,
        )

    def m_or_nan(ap):
        try:
            return m_of(ap)
        except InfeasibleDesignError:
            return math.nan

    m_lo, m_hi = m_or_nan(lo), m_or_nan(hi)
    if math.isnan(m_lo) or math.isnan(m_hi):
        scan = [m_or_nan(a) for a in np.linspace(lo, hi, 65)]
        feas = [m for m in scan if not math.isnan(m)]
        if feas:
            msg = (f"bracket endpoint(s) infeasible for alpha={alpha}, beta={beta}; "
                   f"feasible M range on bracket: {min(feas):.4g}..{max(feas):.4g}")
            achievable = (min(feas), max(feas))
        else:
            msg = f"no feasible geometry on bracket {bracket}"
            achievable = (math.nan, math.nan)
        raise UnachievableTargetError(msg, achievable=achievable)

    g_lo, g_hi = m_lo - target, m_hi - target
    rel = 1e-6
    if abs(g_lo) <= rel * target and abs(g_hi) <= rel * target:
        # Flat at the target across the whole interval: degenerate solve.
        return AlphaPrimeSolution(alpha_prime=lo, expansion=m_lo, degenerate=True,
                                  convention=conv)
    if g_lo == 0.0:
        return AlphaPrimeSolution(lo, m_lo, False, conv)
    if g_hi == 0.0:
        return AlphaPrimeSolution(hi, m_hi, False, conv)
    if g_lo * g_hi > 0.0:
        raise UnachievableTargetError(
            f"target M = {target} not achievable on bracket {bracket}; "
            f"achievable range {min(m_lo, m_hi):.4g}..{max(m_lo, m_hi):.4g}",
            achievable=(min(m_lo, m_hi), max(m_lo, m_hi)),
        )

    a, b = lo, hi
    g_a = g_lo
    for _ in range(200):
        mid = 0.5 * (a + b)
        g_mid = m_of(mid) - target
        if abs(g_mid) <= 1e-9 * target or (b - a) < 1e-12:
            break
        if (g_a > 0.0) == (g_mid > 0.0):
            a, g_a = mid, g_mid
        else:
            b = mid
    mid = 0.5 * (a + b)
    m_mid = m_of(mid)
    assert abs(m_mid - target) <= rel * target, "bisection failed to converge"
    return AlphaPrimeSolution(alpha_prime=mid, expansion=m_mid, degenerate=False,
                              convention=conv)


# ---------------------------------------------------------------------------
# Sensitivity and tolerancing
# ---------------------------------------------------------------------------

_SENSITIVITY_STEP = 1e-4  # degrees, central differences


def sensitivity(design, convention=None):
    """Relative derivative of M per mounting angle, percent per degree.

    Returns ``{angle_name: 100 * d ln M / d angle}`` (signed) evaluated
    by central differences at the design point.
    """
    conv = convention or calibrated_convention()
    base = list(design.angles())
    out = {}
    for i, name in enumerate(ANGLE_NAMES):
        plus, minus = list(base), list(base)
        plus[i] += _SENSITIVITY_STEP
        minus[i] -= _SENSITIVITY_STEP
        m_plus = expansion_factor(
            PrismPairDesign(*plus, design.refractive_index), convention=conv)
        m_minus = expansion_factor(
            PrismPairDesign(*minus, design.refractive_index), convention=conv)
        out[name] = 100.0 * (math.log(m_plus) - math.log(m_minus)) / (2.0 * _SENSITIVITY_STEP)
    return out


@dataclass(frozen=True)
class ToleranceSpec:
    """Half-width mounting tolerances per angle, degrees (>= 0)."""

    alpha: float = 1.0
    alpha_prime: float = 1.0
    beta: float = 0.25
    beta_prime: float = 0.25

    def __post_init__(self):
        for name in ANGLE_NAMES:
            if getattr(self, name) < 0.0:
                raise ValidationError(f"tolerance {name} must be >= 0")

    def as_tuple(self):
        return (self.alpha, self.alpha_prime, self.beta, self.beta_prime)


@dataclass(frozen=True)
class ToleranceReport:
    """Monte-Carlo mounting-tolerance study of the expansion factor.

    Relative errors are measured on the log scale, ``|ln(M / M0)|``
    (consistent with the percent-per-degree sensitivity definition); the
    linear-scale worst case ``max |M - M0| / M0`` is carried alongside.
    The worst case includes the deterministic corners of the tolerance
    box, so it always dominates every single-angle error regardless of
    sample count.
    """

    design_expansion: float
    convention: str
    samples: int
    feasible_samples: int
    infeasible_samples: int
    seed: int
    mean: float
    std: float
    minimum: float
    maximum: float
    worst_case_relative_error: float
    worst_case_linear_error: float
    per_angle_relative_errors: dict
    tolerances: dict
    values: np.ndarray = None  # feasible sampled M values, when requested


_MC_CHUNK = 65536


def tolerance_monte_carlo(design, tolerances, samples, seed, convention=None,
                          keep_values=False):
    """Uniform Monte-Carlo sweep of mounting errors.

    Each sample draws the four angle errors independently and uniformly
    within ``+/- tolerances``; infeasible geometries are counted, not
    silently dropped.  Draws derive from ``SeedSequence((seed, chunk))``
    so results are reproducible and independent of chunking.
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    if seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed}")
    conv = convention or calibrated_convention()
    m0 = expansion_factor(design, convention=conv)
    tol = np.asarray(tolerances.as_tuple(), dtype=float)
    base = np.asarray(design.angles(), dtype=float)
    n = design.refractive_index

    def eval_points(offsets):
        angles = base[None, :] + offsets
        values, surface = _expansion_many(
            angles[:, 0], angles[:, 1], angles[:, 2], angles[:, 3], n, conv)
        return values, surface

    mean_acc = sq_acc = 0.0
    feasible = 0
    infeasible = 0
    vmin, vmax = math.inf, -math.inf
    worst_log = 0.0
    worst_lin = 0.0
    kept = [] if keep_values else None

    done = 0
    chunk_index = 0
    while done < samples:
        count = min(_MC_CHUNK, samples - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, chunk_index))))
        offsets = rng.uniform(-1.0, 1.0, size=(count, 4)) * tol[None, :]
        values, surface = eval_points(offsets)
        good = surface == 0
        vals = values[good]
        feasible += int(good.sum())
        infeasible += int(count - good.sum())
        if vals.size:
            mean_acc += float(vals.sum())
            sq_acc += float((vals**2).sum())
            vmin = min(vmin, float(vals.min()))
            vmax = max(vmax, float(vals.max()))
            worst_log = max(worst_log, float(np.abs(np.log(vals / m0)).max()))
            worst_lin = max(worst_lin, float(np.abs(vals / m0 - 1.0).max()))
            if kept is not None:
                kept.append(vals)
        done += count
        chunk_index += 1

    # Deterministic probes: single-angle faces and the 16 tolerance-box
    # corners.  They lie inside the tolerance region, so folding them into
    # the worst case keeps it an upper bound on every single-angle error.
    per_angle = {}
    for i, name in enumerate(ANGLE_NAMES):
        errs = []
        for sign in (+1.0, -1.0):
            off = np.zeros((1, 4))
            off[0, i] = sign * tol[i]
            values, surface = eval_points(off)
            if surface[0] == 0:
                errs.append(abs(math.log(float(values[0]) / m0)))
        per_angle[name] = max(errs) if errs else math.nan
        for e in errs:
            worst_log = max(worst_log, e)
    corners = np.array([[sa, sb, sc, sd] for sa in (-1, 1) for sb in (-1, 1)
                        for sc in (-1, 1) for sd in (-1, 1)], dtype=float) * tol[None, :]
    values, surface = eval_points(corners)
    good = surface == 0
    if good.any():
        vals = values[good]
        worst_log = max(worst_log, float(np.abs(np.log(vals / m0)).max()))
        worst_lin = max(worst_lin, float(np.abs(vals / m0 - 1.0).max()))
        vmin = min(vmin, float(vals.min()))
        vmax = max(vmax, float(vals.max()))

    if feasible == 0:
        raise InfeasibleDesignError(
            "every Monte-Carlo sample was infeasible; tolerances exceed the feasible region",
            surface_index=0,
        )
    mean = mean_acc / feasible
    var = max(sq_acc / feasible - mean**2, 0.0)
    return ToleranceReport(
        design_expansion=m0,
        convention=conv,
        samples=samples,
        feasible_samples=feasible,
        infeasible_samples=infeasible,
        seed=seed,
        mean=mean,
        std=math.sqrt(var),
        minimum=vmin,
        maximum=vmax,
        worst_case_relative_error=worst_log,
        worst_case_linear_error=worst_lin,
        per_angle_relative_errors=per_angle,
        tolerances={name: float(t) for name, t in zip(ANGLE_NAMES, tol)},
        values=np.concatenate(kept) if kept else None,
    )
