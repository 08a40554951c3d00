"""Virtual Rabi-experiment lab.

Simulates the calibration experiments run on a real addressing system
(beam-profile scans, chain scans, crosstalk and switching measurements)
with closed-form two-level dynamics, optional binomial shot noise and a
deterministic seeding scheme, then provides the matching fit routines so
generated data round-trip back to the injected parameters.

Shot noise draws ``binomial(shots, P1) / shots`` per point from a
generator seeded with ``SeedSequence((seed, point index, ...))``: traces
are reproducible for a given seed and independent of evaluation order.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from . import aod_model
from .addressing_analyzer import relative_rate
from .errors import (
    FitFailureError,
    OutOfRangeError,
    UnbracketedMinimumError,
    ValidationError,
)

# ---------------------------------------------------------------------------
# Drives and traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RabiDrive:
    """Resonant-frame drive: peak Rabi rate (rad/s), duration, detuning."""

    peak_rabi: float
    duration: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.peak_rabi < 0.0:
            raise ValidationError("peak_rabi must be >= 0")
        if self.duration < 0.0:
            raise ValidationError("duration must be >= 0")
        if not math.isfinite(self.detuning):
            raise ValidationError("detuning must be finite")

    @classmethod
    def from_pi_time(cls, pi_time, duration=None, detuning=0.0):
        """Drive whose resonant pi time is ``pi_time`` (s)."""
        if pi_time <= 0.0:
            raise ValidationError("pi_time must be positive")
        peak = math.pi / pi_time
        return cls(peak_rabi=peak, duration=pi_time if duration is None else duration,
                   detuning=detuning)

    @property
    def pi_time(self):
        if self.peak_rabi == 0.0:
            return math.inf
        return math.pi / self.peak_rabi


def rabi_probability(drive, t):
    """Two-level excitation probability after driving for time ``t``.

    ``P1 = (omega^2 / omega_g^2) sin^2(omega_g t / 2)`` with the
    generalised rate ``omega_g = sqrt(omega^2 + delta^2)``; zero drive
    returns zero.
    """
    om, dl = drive.peak_rabi, drive.detuning
    og = math.hypot(om, dl)
    t = np.asarray(t, dtype=float)
    if og == 0.0:
        p = np.zeros(t.shape)
    else:
        p = (om / og) ** 2 * np.sin(0.5 * og * t) ** 2
    return float(p) if np.ndim(t) == 0 else p


@dataclass(frozen=True)
class ScanTrace:
    """One measured curve: P1 (or |P1 difference|) against a swept variable.

    ``kind`` labels the sweep axis: ``"frequency"`` (Hz), ``"time"`` (s)
    or ``"extra_time"`` (s).  ``shots`` is None for noiseless traces.
    """

    kind: str
    x: np.ndarray
    values: np.ndarray
    shots: int = None  # type: ignore[assignment]
    seed: int = None  # type: ignore[assignment]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("frequency", "time", "extra_time"):
            raise ValidationError(f"unknown trace kind {self.kind!r}")
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise ValidationError("x and values must be matching 1-D arrays")
        if np.any((v < 0.0) | (v > 1.0)):
            raise ValidationError("trace values must lie in [0, 1]")
        if self.shots is not None and self.shots < 1:
            raise ValidationError("shots must be >= 1 or None")
        x = x.copy(); x.flags.writeable = False
        v = v.copy(); v.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)


def _measure(p, shots, seed, *index):
    """Apply binomial projection noise; noiseless when shots is None."""
    if shots is None:
        return float(p)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, *index))))
    return rng.binomial(shots, min(max(p, 0.0), 1.0)) / shots


def _resolve_seed(shots, seed):
    if shots is None:
        return seed
    seed = 0 if seed is None else int(seed)
    if seed < 0:
        raise ValidationError("seed must be a non-negative integer")
    return seed


def _check_grid(name, x, allow_negative=False):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValidationError(f"{name} must hold at least two points")
    if not np.all(np.diff(arr) > 0.0):
        raise ValidationError(f"{name} must be strictly increasing")
    if not allow_negative and arr[0] < 0.0:
        raise ValidationError(f"{name} must be non-negative")
    return arr


# ---------------------------------------------------------------------------
# Beam-profile scan
# ---------------------------------------------------------------------------


def simulate_profile_scan(ion_waist, steering_efficiency, drive, frequencies,
                          center_frequency, shots=None, seed=None,
                          mode="intensity"):
    """Rabi response of a single ion as the beam is scanned over it.

    The tone at ``f`` parks the spot ``steering_efficiency * (f - fc)``
    from the ion; the local Rabi rate follows :func:`relative_rate`, and
    each point reports P1 after driving for ``drive.duration``.
    """
    if ion_waist <= 0.0:
        raise ValidationError("ion_waist must be positive")
    if steering_efficiency == 0.0:
        raise ValidationError("steering_efficiency must be nonzero")
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size < 4:
        raise ValidationError("frequencies must hold at least four points")
    seed = _resolve_seed(shots, seed)

    offsets = steering_efficiency * (freqs - center_frequency)
    rates = drive.peak_rabi * relative_rate(ion_waist, offsets, mode=mode)
    p1 = np.array([
        _measure(rabi_probability(replace(drive, peak_rabi=r), drive.duration),
                 shots, seed, i)
        for i, r in enumerate(rates)
    ])
    return ScanTrace(
        kind="frequency", x=freqs, values=p1, shots=shots, seed=seed,
        meta={
            "ion_waist": float(ion_waist),
            "steering_efficiency": float(steering_efficiency),
            "center_frequency": float(center_frequency),
            "peak_rabi": float(drive.peak_rabi),
            "duration": float(drive.duration),
            "mode": mode,
        },
    )


@dataclass(frozen=True)
class ProfileFit:
    """Recovered beam parameters from a profile scan."""

    waist: float
    center_frequency: float
    peak_rabi: float
    residual_rms: float
    mode: str


def fit_gaussian_profile(trace, drive, steering_efficiency, mode="intensity"):
    """Recover waist and centre from a profile-scan trace.

    Fits ``P1(f) = sin^2(0.5 T omega0 r(eff (f - fc); w))`` for
    ``(omega0, fc, w)`` with ``T = drive.duration``.  Raises
    :class:`FitFailureError` when the trace carries no signal or the
    optimiser fails to converge.
    """
    if trace.kind != "frequency":
        raise ValidationError("profile fit expects a frequency-scan trace")
    freqs, p1 = trace.x, trace.values
    t = drive.duration
    if t <= 0.0:
        raise ValidationError("drive duration must be positive")
    peak = float(p1.max())
    if peak < 1e-3:
        raise FitFailureError("profile scan carries no signal above 1e-3")

    power = 2.0 if mode == "intensity" else 1.0
    f0_init = float(freqs[np.argmax(p1)])
    om_init = 2.0 * math.asin(math.sqrt(min(peak, 1.0))) / t
    above = freqs[p1 >= 0.5 * peak]
    half_span = max(0.5 * (above[-1] - above[0]), abs(freqs[1] - freqs[0]))
    w_init = max(abs(steering_efficiency) * half_span, 1e-12)

    def model(params, f):
        om0, fc, w = params
        off = steering_efficiency * (f - fc)
        rate = om0 * np.exp(-power * off**2 / w**2)
        return np.sin(0.5 * rate * t) ** 2

    def residuals(params):
        return model(params, freqs) - p1

    span = float(freqs[-1] - freqs[0])
    result = least_squares(
        residuals,
        x0=[om_init, f0_init, w_init],
        bounds=([1e-6 * om_init, freqs[0] - span, 1e-3 * w_init],
                [1e4 * om_init, freqs[-1] + span, 1e4 * w_init]),
        x_scale=[om_init, max(span, 1.0), w_init],
    )
    if not result.success:
        raise FitFailureError(f"profile fit did not converge: {result.message}")
    rms = float(np.sqrt(np.mean(result.fun**2)))
    noise_floor = 0.5 / math.sqrt(trace.shots) if trace.shots else 0.05
    if rms > max(0.25 * peak, 3.0 * noise_floor):
        raise FitFailureError(
            f"profile fit residual rms {rms:.3g} rejects the Gaussian model")
    om0, fc, w = (float(v) for v in result.x)
    return ProfileFit(waist=abs(w), center_frequency=fc, peak_rabi=om0,
                      residual_rms=rms, mode=mode)


# ---------------------------------------------------------------------------
# Chain scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainScanResult:
    """Per-ion responses and their upper envelope for a frequency sweep."""

    envelope: ScanTrace
    per_ion: np.ndarray
    ion_positions: np.ndarray


def simulate_chain_scan(chain, ion_waist, steering_efficiency, drive,
                        frequencies, center_frequency, shots=None, seed=None,
                        mode="intensity"):
    """Scan the addressing beam across a whole chain.

    Every ion responds to the spot parked at the tone's position; the
    envelope is the per-frequency maximum over ions (what a camera-style
    "any ion bright" readout shows).  Ions outside the swept steering
    range cannot be reached and raise :class:`OutOfRangeError` listing
    the unreachable indices.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size < 4:
        raise ValidationError("frequencies must hold at least four points")
    seed = _resolve_seed(shots, seed)

    spots = steering_efficiency * (freqs - center_frequency)
    lo, hi = float(np.min(spots)), float(np.max(spots))
    positions = chain.array
    unreachable = [i for i, p in enumerate(positions) if not (lo <= p <= hi)]
    if unreachable:
        raise OutOfRangeError(
            f"ions {unreachable} lie outside the swept steering range "
            f"[{lo:.3e}, {hi:.3e}] m", indices=unreachable)

    offsets = positions[:, None] - spots[None, :]
    rates = drive.peak_rabi * relative_rate(ion_waist, offsets, mode=mode)
    og = np.hypot(rates, drive.detuning)
    with np.errstate(invalid="ignore", divide="ignore"):
        p1 = np.where(og > 0.0,
                      (rates / np.where(og > 0.0, og, 1.0)) ** 2
                      * np.sin(0.5 * og * drive.duration) ** 2,
                      0.0)
    if shots is not None:
        noisy = np.empty_like(p1)
        for i in range(p1.shape[0]):
            for j in range(p1.shape[1]):
                noisy[i, j] = _measure(p1[i, j], shots, seed, j, i)
        p1 = noisy

    envelope = ScanTrace(
        kind="frequency", x=freqs, values=p1.max(axis=0), shots=shots, seed=seed,
        meta={
            "ion_count": len(chain),
            "ion_waist": float(ion_waist),
            "steering_efficiency": float(steering_efficiency),
            "center_frequency": float(center_frequency),
            "peak_rabi": float(drive.peak_rabi),
            "duration": float(drive.duration),
            "mode": mode,
        },
    )
    return ChainScanResult(envelope=envelope, per_ion=p1, ion_positions=positions)


def count_resolved_peaks(trace, height=0.5, depth=0.5):
    """Number of well-separated peaks in a scan trace.

    A peak must reach ``height`` and be separated from its neighbours by
    valleys at least ``depth * height`` below it (prominence test).
    """
    from scipy.signal import find_peaks

    peaks, _ = find_peaks(trace.values, height=height, prominence=depth * height)
    return int(peaks.size)


# ---------------------------------------------------------------------------
# Crosstalk experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrosstalkExperiment:
    """Fitted Rabi rates on every ion while one target is addressed.

    ``bounded[i]`` marks ions whose oscillation never developed inside
    the time grid; for those, ``ratios[i]`` is an upper bound inferred
    from the largest observed excitation, not a fitted value.
    """

    target_index: int
    rabi_rates: np.ndarray
    rabi_sigmas: np.ndarray
    ratios: np.ndarray
    ratio_sigmas: np.ndarray
    bounded: np.ndarray
    target_trace: ScanTrace
    neighbor_traces: tuple
    mode: str


def _fit_sinusoid(times, p1):
    """Fit ``P1 = A sin^2(omega t / 2)``; returns (omega, sigma_omega)."""
    n = times.size
    span = float(times[-1] - times[0])
    peak = float(p1.max())
    # Frequency seed from the dominant spectral line, falling back to the
    # quarter-oscillation growth rate when the grid resolves < 1 period.
    detrended = p1 - p1.mean()
    spectrum = np.abs(np.fft.rfft(detrended))
    if spectrum.size > 1:
        k = 1 + int(np.argmax(spectrum[1:]))
        om_fft = 2.0 * math.pi * k * (n - 1) / (span * n)
    else:
        om_fft = math.pi / span
    om_growth = 2.0 * math.asin(math.sqrt(min(peak, 1.0))) / float(times[np.argmax(p1)] or span)

    def residuals(params):
        om, a = params
        return a * np.sin(0.5 * om * times) ** 2 - p1

    best = None
    for om0 in {om_fft, om_growth}:
        if not (om0 > 0.0 and math.isfinite(om0)):
            continue
        try:
            res = least_squares(residuals, x0=[om0, max(peak, 0.1)],
                                bounds=([0.0, 0.0], [np.inf, 1.05]),
                                x_scale=[om0, 1.0])
        except ValueError:
            continue
        if res.success and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitFailureError("sinusoid fit did not converge")
    om = float(best.x[0])

    dof = max(n - 2, 1)
    jac = best.jac
    try:
        cov = np.linalg.inv(jac.T @ jac) * (2.0 * best.cost / dof)
        sigma = float(math.sqrt(max(cov[0, 0], 0.0)))
    except np.linalg.LinAlgError:
        sigma = math.inf
    return om, sigma


BOUND_THRESHOLD = 0.5  # below this max P1 the quarter oscillation never happened


def simulate_crosstalk_experiment(chain, ion_waist, target_index, times, drive,
                                  shots=None, seed=None, mode="intensity"):
    """Drive one target ion and watch every ion's slow Rabi flopping.

    The target is driven at ``drive.peak_rabi``; neighbours flop at the
    crosstalk-suppressed rate.  The target is measured on its own short
    grid (two pi times) so its fast oscillation stays resolved; the
    neighbours use the supplied long ``times`` grid.  Rates are fitted
    per ion and reported as ratios to the fitted target rate.
    """
    times = _check_grid("times", times)
    if not (0 <= target_index < len(chain)):
        raise ValidationError(f"target_index {target_index} outside chain of {len(chain)}")
    if drive.peak_rabi <= 0.0:
        raise ValidationError("crosstalk experiment needs a nonzero drive")
    seed = _resolve_seed(shots, seed)

    positions = chain.array
    offsets = np.abs(positions - positions[target_index])
    rates = drive.peak_rabi * relative_rate(ion_waist, offsets, mode=mode)

    pi_time = math.pi / drive.peak_rabi
    target_times = np.linspace(0.0, 2.0 * pi_time, times.size)

    def trace_for(ion, grid, tag):
        d = replace(drive, peak_rabi=float(rates[ion]))
        p = rabi_probability(d, grid)
        vals = np.array([
            _measure(p[k], shots, seed, tag, ion, k) for k in range(grid.size)
        ]) if shots is not None else p
        return ScanTrace(kind="time", x=grid, values=vals, shots=shots, seed=seed,
                         meta={"ion": ion, "true_rabi": float(rates[ion]), "mode": mode})

    target_trace = trace_for(target_index, target_times, 0)
    neighbor_traces = tuple(
        trace_for(i, times, 1) for i in range(len(chain))
    )

    om_target, sig_target = _fit_sinusoid(target_times, target_trace.values)

    n = len(chain)
    oms = np.zeros(n)
    sigs = np.zeros(n)
    bounded = np.zeros(n, dtype=bool)
    for i, tr in enumerate(neighbor_traces):
        if i == target_index:
            oms[i], sigs[i] = om_target, sig_target
            continue
        peak = float(tr.values.max())
        if peak < BOUND_THRESHOLD:
            # Never reached a quarter oscillation: report the rate that
            # would just produce the largest observed excitation by the
            # end of the grid (an upper bound; sin is concave there).
            oms[i] = 2.0 * math.asin(math.sqrt(min(peak, 1.0))) / float(times[-1])
            sigs[i] = 0.0
            bounded[i] = True
        else:
            oms[i], sigs[i] = _fit_sinusoid(times, tr.values)

    ratios = oms / om_target
    rel = np.zeros(n)
    nonzero = oms > 0.0
    rel[nonzero] = (sigs[nonzero] / oms[nonzero]) ** 2
    ratio_sigs = ratios * np.sqrt(rel + (sig_target / om_target) ** 2)

    return CrosstalkExperiment(
        target_index=target_index,
        rabi_rates=oms,
        rabi_sigmas=sigs,
        ratios=ratios,
        ratio_sigmas=ratio_sigs,
        bounded=bounded,
        target_trace=target_trace,
        neighbor_traces=neighbor_traces,
        mode=mode,
    )


# ---------------------------------------------------------------------------
# Switching experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureDelay:
    """Drive turns on instantly after a fixed dead time."""

    delay: float

    def __post_init__(self):
        if self.delay < 0.0:
            raise ValidationError("delay must be >= 0")

    def area(self, duration):
        return np.maximum(np.asarray(duration, dtype=float) - self.delay, 0.0)

    def describe(self):
        return {"model": "pure_delay", "delay": float(self.delay)}


@dataclass(frozen=True)
class TransitRamp:
    """Amplitude follows the acoustic transit ramp of an AOD retune."""

    spec: aod_model.AodSpec
    kind: str = "field_overlap"

    def area(self, duration):
        return aod_model.ramp_area(self.spec, duration, model=self.kind)

    def describe(self):
        return {"model": "transit_ramp", "kind": self.kind,
                "switch_time": aod_model.theoretical_switch_time(self.spec)}


@dataclass(frozen=True)
class SwitchSequence:
    """Hop-and-drive sequence probing the retune dead time.

    Ion 0 gets a settled pi/2 pulse (duration ``pi2_time_ion0``); the
    deflector then hops to ion 1 and drives for ``pi2_time_ion1`` plus a
    swept extra time.  ``settle_time`` is the wait before the first pulse
    (the first pulse is always fully settled).  ``model`` maps drive
    duration after the hop to accumulated Rabi phase per unit rate.
    """

    pi2_time_ion0: float
    pi2_time_ion1: float
    model: object
    settle_time: float = 0.0

    def __post_init__(self):
        for name in ("pi2_time_ion0", "pi2_time_ion1"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive")
        if self.settle_time < 0.0:
            raise ValidationError("settle_time must be >= 0")
        if not hasattr(self.model, "area"):
            raise ValidationError("model must expose an area(duration) method")


@dataclass(frozen=True)
class SwitchingResult:
    """Traces of both ions and their absolute population difference."""

    ion0: ScanTrace
    ion1: ScanTrace
    delta: ScanTrace


def simulate_switching_experiment(sequence, extra_times, shots=None, seed=None):
    """Sweep the extra drive time on the second ion after a hop.

    Ion 0 ends at P1 = 1/2 exactly (settled pi/2 pulse).  Ion 1's phase
    is ``omega1 * area(pi2_time_ion1 + extra)``, with ``omega1``
    calibrated so a settled pulse of ``pi2_time_ion1`` is exactly pi/2.
    The |difference| trace dips to zero when the extra time compensates
    the switching dead time.
    """
    extra = _check_grid("extra_times", extra_times)
    seed = _resolve_seed(shots, seed)

    omega1 = 0.5 * math.pi / sequence.pi2_time_ion1
    phase = omega1 * np.asarray(sequence.model.area(sequence.pi2_time_ion1 + extra))
    p1_ion1 = np.sin(0.5 * phase) ** 2
    p1_ion0 = np.full(extra.shape, 0.5)

    if shots is not None:
        p1_ion0 = np.array([_measure(p, shots, seed, i, 0) for i, p in enumerate(p1_ion0)])
        p1_ion1 = np.array([_measure(p, shots, seed, i, 1) for i, p in enumerate(p1_ion1)])

    meta = {"sequence": sequence.model.describe(),
            "pi2_time_ion0": float(sequence.pi2_time_ion0),
            "pi2_time_ion1": float(sequence.pi2_time_ion1),
            "settle_time": float(sequence.settle_time)}
    ion0 = ScanTrace(kind="extra_time", x=extra, values=p1_ion0, shots=shots,
                     seed=seed, meta=dict(meta, ion=0))
    ion1 = ScanTrace(kind="extra_time", x=extra, values=p1_ion1, shots=shots,
                     seed=seed, meta=dict(meta, ion=1))
    delta = ScanTrace(kind="extra_time", x=extra,
                      values=np.abs(p1_ion0 - p1_ion1), shots=shots, seed=seed,
                      meta=dict(meta, ion="delta"))
    return SwitchingResult(ion0=ion0, ion1=ion1, delta=delta)


@dataclass(frozen=True)
class SwitchTimeFit:
    """Quadratic-vertex estimate of the switching dead time."""

    switch_time: float
    sigma: float
    minimum_index: int


_FIT_HALF_WINDOW = 3


def fit_switch_time(trace):
    """Locate the dip of a |difference| trace by a local quadratic fit.

    The global minimum must be interior to the grid (bracketed); a
    quadratic is fitted over up to seven surrounding points and its
    vertex returned with a covariance-propagated 1-sigma uncertainty.
    """
    x, y = trace.x, trace.values
    n = x.size
    i_min = int(np.argmin(y))
    if i_min == 0 or i_min == n - 1:
        raise UnbracketedMinimumError(
            f"trace minimum sits at grid edge (index {i_min}); extend the sweep")
    lo = max(0, i_min - _FIT_HALF_WINDOW)
    hi = min(n, i_min + _FIT_HALF_WINDOW + 1)
    if hi - lo < 5:
        raise UnbracketedMinimumError("too few points around the minimum for a quadratic fit")

    # Normalised abscissa keeps the Vandermonde system well conditioned
    # for nanosecond-scale grids expressed in seconds.
    t0 = float(x[i_min])
    dx = float(np.mean(np.diff(x[lo:hi])))
    u = (x[lo:hi] - t0) / dx
    coeffs, cov = np.polyfit(u, y[lo:hi], 2, cov=True)
    a, b = float(coeffs[0]), float(coeffs[1])
    if a <= 0.0:
        raise UnbracketedMinimumError("no upward curvature around the minimum")
    vertex = -b / (2.0 * a)
    grad = np.array([b / (2.0 * a * a), -1.0 / (2.0 * a)])
    var = float(grad @ cov[:2, :2] @ grad)
    return SwitchTimeFit(
        switch_time=t0 + vertex * dx,
        sigma=math.sqrt(max(var, 0.0)) * dx,
        minimum_index=i_min,
    )
