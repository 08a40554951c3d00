"""Individual-addressing quality: crosstalk, clipping, misalignment.

The addressed ion sits at the centre of a focused Gaussian spot; its
neighbours see the spot's tails.  For a Raman pair delivered through the
same deflector path the Rabi rate follows the local intensity, so the
default coupling mode is ``"intensity"`` (rate ratio
``exp(-2 d^2 / w^2)``); ``"amplitude"`` (single-field coupling,
``exp(-d^2 / w^2)``) is available everywhere the mode matters.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import beam_optics
from .errors import ValidationError

COUPLING_MODES = ("intensity", "amplitude")


@dataclass(frozen=True)
class IonChain:
    """Ion positions (m) along the steering axis, strictly increasing."""

    positions: tuple

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        if len(pos) < 1:
            raise ValidationError("chain needs at least one ion")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValidationError("ion positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def uniform(cls, count, spacing, center=0.0):
        """Evenly spaced chain of ``count`` ions centred on ``center``."""
        if count < 1:
            raise ValidationError("count must be >= 1")
        if spacing <= 0.0:
            raise ValidationError("spacing must be positive")
        offset = 0.5 * (count - 1) * spacing
        return cls(tuple(center - offset + i * spacing for i in range(count)))

    def __len__(self):
        return len(self.positions)

    @property
    def array(self):
        return np.asarray(self.positions)


def _check_mode(mode):
    if mode not in COUPLING_MODES:
        raise ValidationError(f"mode must be one of {COUPLING_MODES}, got {mode!r}")


def relative_rate(waist, offset, mode="intensity"):
    """Rabi rate at ``offset`` from the spot centre relative to the centre."""
    _check_mode(mode)
    if waist <= 0.0:
        raise ValidationError("waist must be positive")
    d2 = np.asarray(offset, dtype=float) ** 2
    power = 2.0 if mode == "intensity" else 1.0
    r = np.exp(-power * d2 / waist**2)
    return float(r) if np.ndim(offset) == 0 else r


@dataclass(frozen=True)
class CrosstalkMatrix:
    """``values[i, j]``: rate at ion ``i`` relative to the addressed target
    when the beam is centred on ``beam_centers[j]``."""

    values: np.ndarray
    ion_positions: np.ndarray
    beam_centers: np.ndarray
    waist: float
    mode: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def worst_offdiagonal(self):
        """Largest neighbour rate over all (ion, centre) pairs, ``i != j``."""
        v = self.values
        if v.shape[0] < 2 or v.shape[1] < 2:
            return 0.0
        mask = ~np.eye(v.shape[0], v.shape[1], dtype=bool)
        return float(v[mask].max())


def crosstalk_matrix(chain, waist, beam_centers=None, mode="intensity"):
    """Ideal-Gaussian crosstalk matrix for a chain.

    ``beam_centers`` defaults to the ion positions themselves (perfectly
    pointed addressing); the diagonal is then exactly 1.
    """
    _check_mode(mode)
    centers = chain.array if beam_centers is None else np.asarray(beam_centers, dtype=float)
    offsets = chain.array[:, None] - centers[None, :]
    values = relative_rate(waist, offsets, mode=mode)
    return CrosstalkMatrix(
        values=np.atleast_2d(values),
        ion_positions=chain.array,
        beam_centers=centers,
        waist=waist,
        mode=mode,
        meta={"model": "ideal-gaussian"},
    )


DEFAULT_CLIP_GRID = 2**13


def clipped_crosstalk(chain, ion_plane_waist, clipping_ratio, *,
                      collimated_waist=1.5e-3, wavelength=355e-9,
                      focal_length=0.1, grid_count=DEFAULT_CLIP_GRID,
                      mode="intensity"):
    """Crosstalk matrix when the collimated beam is clipped by an aperture.

    The collimated Gaussian (radius ``collimated_waist``) passes a hard
    aperture of half-width ``clipping_ratio * collimated_waist`` and is
    focused by an ideal lens; diffraction ripple from the truncation
    raises the far tails above the ideal Gaussian.  The focal pattern in
    units of the ideal focal waist depends only on the clipping ratio, so
    the focal field is probed at ion offsets rescaled by the ratio of the
    ideal focal waist to ``ion_plane_waist`` (the demagnification the
    full imaging path would apply).

    Built on the wave-optics path: :func:`aodkit.beam_optics.diffract`
    applies the aperture, and the exact discrete Fourier transform of the
    clipped profile gives the focal field at each ion position.
    """
    _check_mode(mode)
    if clipping_ratio <= 0.0:
        raise ValidationError("clipping_ratio must be positive")
    if ion_plane_waist <= 0.0:
        raise ValidationError("ion_plane_waist must be positive")

    profile = beam_optics.gaussian_profile(
        wavelength=wavelength,
        waist_radius=collimated_waist,
        count=grid_count,
        half_extent=max(6.0, 1.5 * clipping_ratio) * collimated_waist,
    )
    aperture = beam_optics.Aperture(half_width=clipping_ratio * collimated_waist)
    clipped = beam_optics.diffract(profile, aperture, distance=0.0)

    focal_waist = beam_optics.focused_waist(wavelength, focal_length, collimated_waist)
    demag = focal_waist / ion_plane_waist

    positions = chain.array
    offsets = (positions[:, None] - positions[None, :]).ravel()
    amps = beam_optics.focused_field_at(clipped, focal_length, offsets * demag)
    center_amp = beam_optics.focused_field_at(clipped, focal_length, np.array([0.0]))[0]
    rel = np.abs(amps) / abs(center_amp)
    values = (rel**2 if mode == "intensity" else rel).reshape(len(chain), len(chain))

    return CrosstalkMatrix(
        values=values,
        ion_positions=positions,
        beam_centers=positions,
        waist=ion_plane_waist,
        mode=mode,
        meta={
            "model": "clipped-aperture",
            "clipping_ratio": float(clipping_ratio),
            "collimated_waist": float(collimated_waist),
            "focal_length": float(focal_length),
            "grid_count": int(grid_count),
        },
    )


def misalignment_imbalance(mis_angle, half_range, perpendicular_waist):
    """Worst-case rate imbalance from steering-axis misalignment.

    A steering axis rotated by ``mis_angle`` from the chain axis walks
    the spot off the ions perpendicular to the chain; at the chain ends
    (``half_range`` from the centre ion) the intensity drops by
    ``1 - exp(-2 (half_range sin(mis_angle) / w_perp)^2)``.
    """
    if perpendicular_waist <= 0.0:
        raise ValidationError("perpendicular_waist must be positive")
    if half_range < 0.0:
        raise ValidationError("half_range must be >= 0")
    excursion = half_range * math.sin(mis_angle)
    return 1.0 - math.exp(-2.0 * (excursion / perpendicular_waist) ** 2)


@dataclass(frozen=True)
class SteeringLine:
    """Sampled steering trajectory in the image plane, points (u, v) in m."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValidationError("points must be an (n >= 2, 2) array")
        if np.allclose(pts, pts[0]):
            raise ValidationError("steering line is degenerate (all points coincide)")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def direction(self):
        """Unit principal direction of the point set (sign-ambiguous)."""
        centered = self.points - self.points.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        return vt[0]


def relative_steering_error(line_a, line_b):
    """Angle (rad, in [0, pi/2]) between two steering directions."""
    da, db = line_a.direction(), line_b.direction()
    return math.acos(min(abs(float(np.dot(da, db))), 1.0))
