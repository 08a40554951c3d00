"""Acousto-optic deflector physics: steering, efficiency, switching.

An AOD driven at frequency ``f`` deflects the first diffraction order by
``lambda * f / V``; only the offset from the centre frequency matters for
steering, so all angles here are relative to the centre-frequency output
direction.  Switching dynamics follow the acoustic wave crossing the
optical spot at the crystal: the new tone's column sweeps across the
Gaussian field, giving an error-function amplitude ramp.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfinv

from . import beam_optics
from .errors import OutOfBandWarning, TrainStructureError, ValidationError

# sinc^2(x) = 1/2 at this argument (np.sinc normalisation, sin(pi x)/(pi x));
# sets the efficiency-width default so the band edges sit at half efficiency.
HALF_POWER_SINC_ARG = 0.44294647068945237
# The acoustic front must travel ~1.3 beam radii past the spot centre for the
# diffracted amplitude to settle; the same factor defines the switch time.
SWITCH_TIME_FACTOR = 1.3


@dataclass(frozen=True)
class AodSpec:
    """Acousto-optic deflector operating parameters (SI units).

    ``crystal_waist`` is the 1/e^2 optical beam radius inside the
    crystal along the acoustic direction; ``efficiency_width`` is the
    sinc-squared frequency scale, defaulting to half efficiency exactly
    at the rated band edges.
    """

    center_frequency: float
    bandwidth: float
    acoustic_velocity: float
    optical_wavelength: float
    crystal_waist: float
    peak_efficiency: float = 1.0
    efficiency_width: float = None  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("center_frequency", "bandwidth", "acoustic_velocity",
                     "optical_wavelength", "crystal_waist"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive, got {v}")
        if not (0.0 < self.peak_efficiency <= 1.0):
            raise ValidationError(
                f"peak_efficiency must lie in (0, 1], got {self.peak_efficiency}")
        if self.efficiency_width is None:
            object.__setattr__(
                self, "efficiency_width",
                self.bandwidth / (2.0 * HALF_POWER_SINC_ARG))
        if self.efficiency_width <= 0.0:
            raise ValidationError("efficiency_width must be positive")

    def band(self):
        half = 0.5 * self.bandwidth
        return (self.center_frequency - half, self.center_frequency + half)

    def deflector(self, drive_frequency=None):
        """Matching train element for this deflector."""
        return beam_optics.AodDeflector(
            center_frequency=self.center_frequency,
            acoustic_velocity=self.acoustic_velocity,
            drive_frequency=drive_frequency,
        )


def in_band(spec, drive_frequency):
    lo, hi = spec.band()
    return bool(np.all((drive_frequency >= lo) & (drive_frequency <= hi)))


def deflection_angle(spec, drive_frequency):
    """First-order deflection (rad) relative to the centre-frequency output.

    Out-of-band frequencies are allowed (the physics stays linear) but
    emit an :class:`OutOfBandWarning`.
    """
    f = np.asarray(drive_frequency, dtype=float)
    if not in_band(spec, f):
        warnings.warn(
            f"drive frequency outside the rated band {spec.band()}",
            OutOfBandWarning, stacklevel=2)
    theta = spec.optical_wavelength * (f - spec.center_frequency) / spec.acoustic_velocity
    return float(theta) if np.ndim(drive_frequency) == 0 else theta


def full_band_swing(spec):
    """Total deflection swing across the rated bandwidth, lambda * B / V."""
    return spec.optical_wavelength * spec.bandwidth / spec.acoustic_velocity


def steering_map(spec, train, drive_frequency):
    """Transverse displacement at the train's terminal plane for one tone.

    The train must contain exactly one :class:`~aodkit.beam_optics.AodDeflector`
    with at least one focusing lens after it (angle-to-position mapping);
    otherwise the train cannot steer and a :class:`TrainStructureError`
    is raised.  Equivalent to tracing a centred beam through the train
    with the deflector driven at ``drive_frequency`` and reading the
    final x centroid.
    """
    elements = list(train)
    aod_indices = [i for i, el in enumerate(elements)
                   if isinstance(el, beam_optics.AodDeflector)]
    if len(aod_indices) != 1:
        raise TrainStructureError(
            f"steering requires exactly one AodDeflector in the train, found {len(aod_indices)}")
    idx = aod_indices[0]
    downstream = elements[idx + 1:]
    if not any(isinstance(el, beam_optics.ThinLens) and el.axis in ("x", "both")
               for el in downstream):
        raise TrainStructureError(
            "steering requires a focusing lens on the x axis after the deflector")

    theta = deflection_angle(spec, drive_frequency)
    # Ray state (ux, tx, uz, tz) from the deflector output onward; an
    # ImageRotator mixes the transverse components.
    ux, tx, uz, tz = 0.0, theta, 0.0, 0.0
    for el in downstream:
        if isinstance(el, beam_optics.ImageRotator):
            ca, sa = math.cos(el.angle), math.sin(el.angle)
            ux, uz = ca * ux - sa * uz, sa * ux + ca * uz
            tx, tz = ca * tx - sa * tz, sa * tx + ca * tz
            continue
        (a, b), (c, d) = el.ray_matrix("x")
        ux, tx = a * ux + b * tx, c * ux + d * tx
        (a, b), (c, d) = el.ray_matrix("z")
        uz, tz = a * uz + b * tz, c * uz + d * tz
    return ux


def diffraction_efficiency(spec, drive_frequency):
    """Power diffraction efficiency, ``eta0 * sinc^2((f - fc) / width)``."""
    f = np.asarray(drive_frequency, dtype=float)
    eta = spec.peak_efficiency * np.sinc((f - spec.center_frequency) / spec.efficiency_width) ** 2
    return float(eta) if np.ndim(drive_frequency) == 0 else eta


def theoretical_switch_time(spec):
    """Time for the new tone's front to reach the beam centre, 1.3 w / V."""
    return SWITCH_TIME_FACTOR * spec.crystal_waist / spec.acoustic_velocity


RAMP_MODELS = ("field_overlap", "linear")


def transit_ramp(spec, t, model="field_overlap"):
    """Normalised diffracted-amplitude ramp after an instantaneous retune.

    At ``t = 0`` the new tone's acoustic front enters the crystal
    ``1.3 w`` upstream of the spot centre and travels at the acoustic
    velocity.  ``field_overlap`` (default) is the overlap of the swept
    column with the Gaussian field, ``0.5 (1 + erf((V t - 1.3 w) / w))``;
    ``linear`` is a straight ramp reaching 1 at twice the switch time.
    Both cross 1/2 exactly when the front passes the spot centre, i.e. at
    :func:`theoretical_switch_time`.
    """
    ts = theoretical_switch_time(spec)
    tau = spec.crystal_waist / spec.acoustic_velocity  # beam-radius transit time
    t = np.asarray(t, dtype=float)
    if model == "field_overlap":
        a = 0.5 * (1.0 + erf((t - ts) / tau))
    elif model == "linear":
        a = np.clip(t / (2.0 * ts), 0.0, 1.0)
    else:
        raise ValidationError(f"unknown ramp model {model!r}; expected one of {RAMP_MODELS}")
    return float(a) if np.ndim(t) == 0 else a


def ramp_area(spec, duration, model="field_overlap"):
    """Closed-form integral of :func:`transit_ramp` from 0 to ``duration``.

    The integral of the amplitude ramp is the accumulated Rabi phase per
    unit peak Rabi rate, used by the switching experiment.
    """
    ts = theoretical_switch_time(spec)
    tau = spec.crystal_waist / spec.acoustic_velocity
    d = np.asarray(duration, dtype=float)
    if np.any(d < 0.0):
        raise ValidationError("duration must be >= 0")
    if model == "field_overlap":
        def antideriv(t):
            u = (t - ts) / tau
            return 0.5 * t + 0.5 * tau * (u * erf(u) + np.exp(-u**2) / math.sqrt(math.pi))
        area = antideriv(d) - antideriv(0.0)
    elif model == "linear":
        area = np.where(d <= 2.0 * ts, d**2 / (4.0 * ts), d - ts)
    else:
        raise ValidationError(f"unknown ramp model {model!r}; expected one of {RAMP_MODELS}")
    return float(area) if np.ndim(duration) == 0 else area


def rise_time_10_90(spec):
    """10 % to 90 % amplitude rise time of the field-overlap ramp."""
    tau = spec.crystal_waist / spec.acoustic_velocity
    return 2.0 * float(erfinv(0.8)) * tau


@dataclass(frozen=True)
class MonitorChain:
    """Pick-off photodiode chain: sampler, responsivity, transimpedance."""

    sample_fraction: float
    responsivity: float
    transimpedance_gain: float

    def __post_init__(self):
        if not (0.0 < self.sample_fraction < 1.0):
            raise ValidationError("sample_fraction must lie in (0, 1)")
        for name in ("responsivity", "transimpedance_gain"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive")


def monitor_voltage(chain, beam_power, efficiency):
    """Photodiode output voltage for a given diffracted-beam power.

    ``V = P * eta * fraction * R * G``; linear in the efficiency, so the
    monitor trace is an exact proxy for the diffraction response.
    """
    if beam_power < 0.0:
        raise ValidationError("beam_power must be >= 0")
    eta = np.asarray(efficiency, dtype=float)
    if np.any(eta < 0.0) or np.any(eta > 1.0):
        raise ValidationError("efficiency must lie in [0, 1]")
    v = beam_power * eta * chain.sample_fraction * chain.responsivity * chain.transimpedance_gain
    return float(v) if np.ndim(efficiency) == 0 else v
