"""YAML system configuration: parsing, validation, unit conversion.

Operator-facing units follow lab conventions (lengths in um, frequencies
in MHz, times in ns, angles in degrees); everything is converted to SI
at this boundary so the library below never sees a unit suffix.

Validation is strict and total: unknown keys, missing required fields,
type and range problems are all collected into one
:class:`~aodkit.errors.ConfigError` listing every violation.
"""

import hashlib
import math
import os
from dataclasses import dataclass

import yaml

from .. import aod_model, beam_optics
from ..addressing_analyzer import COUPLING_MODES, IonChain
from ..errors import ConfigError, ValidationError
from ..prism_designer import PrismPairDesign, ToleranceSpec

UM = 1e-6
MM = 1e-3
MHZ = 1e6
NS = 1e-9

_MISSING = object()


def _positive(v):
    return None if v > 0 else "must be positive"


def _non_negative(v):
    return None if v >= 0 else "must be >= 0"


def _nonzero(v):
    return None if v != 0 else "must be nonzero"


def _fraction(v):
    return None if 0.0 <= v <= 1.0 else "must lie in [0, 1]"


class _Section:
    """One mapping level of the config with violation accumulation."""

    def __init__(self, data, path, violations):
        self.data = data if isinstance(data, dict) else {}
        self.path = path
        self.violations = violations
        self.seen = set()
        if data is not None and not isinstance(data, dict):
            violations.append(f"{path}: must be a mapping")

    def get(self, key, *, required=False, default=None, types=(int, float),
            check=None, choices=None, scale=None):
        self.seen.add(key)
        if key not in self.data or self.data[key] is None:
            if required:
                self.violations.append(f"{self.path}.{key}: required field is missing")
            return default
        v = self.data[key]
        if isinstance(v, bool) and bool not in types:
            self.violations.append(f"{self.path}.{key}: expected a number, got a boolean")
            return default
        if not isinstance(v, types):
            names = "/".join(t.__name__ for t in types)
            self.violations.append(
                f"{self.path}.{key}: expected {names}, got {type(v).__name__}")
            return default
        if choices is not None and v not in choices:
            self.violations.append(
                f"{self.path}.{key}: must be one of {sorted(choices)}, got {v!r}")
            return default
        if check is not None:
            msg = check(v)
            if msg:
                self.violations.append(f"{self.path}.{key}: {msg}")
                return default
        if scale is not None:
            return float(v) * scale
        return v

    def subsection(self, key):
        self.seen.add(key)
        sub = self.data.get(key)
        if sub is None:
            return None
        return _Section(sub, f"{self.path}.{key}", self.violations)

    def finish(self):
        for key in sorted(set(self.data) - self.seen):
            self.violations.append(f"{self.path}.{key}: unknown key")


# ---------------------------------------------------------------------------
# Typed sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrismSection:
    design: PrismPairDesign
    target_expansion: float
    tolerances: ToleranceSpec
    monte_carlo_samples: int


@dataclass(frozen=True)
class AddressingSection:
    ion_waist: float
    perpendicular_waist: float
    coupling: str
    misalignment_angle: float  # rad
    steering_half_range: float
    clipping_ratios: tuple
    collimated_waist: float


@dataclass(frozen=True)
class ProfileScanSetup:
    waist: float
    pi_time: float
    drive_time: float
    center_frequency: float
    frequency_start: float
    frequency_stop: float
    points: int
    shots: int  # None for noiseless
    steering_efficiency: float  # None -> derive from the train


@dataclass(frozen=True)
class ChainScanSetup:
    pi_time: float
    drive_time: float
    frequency_start: float
    frequency_stop: float
    points: int
    shots: int
    steering_efficiency: float


@dataclass(frozen=True)
class CrosstalkSetup:
    target_ion: int
    pi_time: float
    max_time: float
    points: int
    shots: int


@dataclass(frozen=True)
class SwitchingSetup:
    model: str  # pure_delay | transit_ramp | linear_ramp
    switch_delay: float
    settle_time: float
    pi2_time_ion0: float
    pi2_time_ion1: float
    extra_start: float
    extra_stop: float
    points: int
    shots: int


@dataclass(frozen=True)
class ExperimentsSection:
    profile_scan: ProfileScanSetup
    chain_scan: ChainScanSetup
    crosstalk: CrosstalkSetup
    switching: SwitchingSetup


@dataclass(frozen=True)
class SystemConfig:
    """Fully validated configuration; sections absent from the file are None."""

    path: str
    digest: str
    seed: int
    output_directory: str
    wavelength: float
    input_beam: beam_optics.AstigmaticBeam
    train: beam_optics.OpticalTrain
    prism: PrismSection
    aod: aod_model.AodSpec
    monitor: aod_model.MonitorChain
    beam_power: float
    chain: IonChain
    addressing: AddressingSection
    experiments: ExperimentsSection


# ---------------------------------------------------------------------------
# Section builders
# ---------------------------------------------------------------------------


def _build_beam(sec, wavelength):
    wx = sec.get("waist_x_um", required=True, check=_positive, scale=UM)
    wz = sec.get("waist_z_um", required=True, check=_positive, scale=UM)
    px = sec.get("waist_position_x_um", default=0.0, scale=UM)
    pz = sec.get("waist_position_z_um", default=0.0, scale=UM)
    sec.finish()
    if None in (wx, wz) or wavelength is None:
        return None
    return beam_optics.AstigmaticBeam(
        wavelength=wavelength,
        x=beam_optics.BeamAxis(waist_radius=wx, waist_position=px),
        z=beam_optics.BeamAxis(waist_radius=wz, waist_position=pz),
    )


_ELEMENT_KEYS = {
    "free_space": {"length_um"},
    "thin_lens": {"focal_length_um", "axis"},
    "anamorphic_scaler": {"mx", "mz"},
    "imaging_system": {"magnification"},
    "aod": {"drive_frequency_mhz"},
    "image_rotator": {"angle_deg"},
    "beam_sampler": {"sample_fraction"},
}


def _build_train(entries, path, violations, aod_spec):
    if not isinstance(entries, list) or not entries:
        violations.append(f"{path}: must be a non-empty list of elements")
        return None
    elements = []
    ok = True
    for i, entry in enumerate(entries):
        epath = f"{path}[{i}]"
        if not isinstance(entry, dict):
            violations.append(f"{epath}: must be a mapping with a 'type' key")
            ok = False
            continue
        etype = entry.get("type")
        if etype == "aperture":
            violations.append(
                f"{epath}: apertures are wave-optics only and cannot sit in a "
                "propagation train")
            ok = False
            continue
        if etype not in _ELEMENT_KEYS:
            violations.append(
                f"{epath}.type: must be one of {sorted(_ELEMENT_KEYS)}, got {etype!r}")
            ok = False
            continue
        unknown = set(entry) - _ELEMENT_KEYS[etype] - {"type"}
        for key in sorted(unknown):
            violations.append(f"{epath}.{key}: unknown key for element {etype!r}")
            ok = False
        sec = _Section(entry, epath, violations)
        sec.seen.update(entry.keys())
        before = len(violations)
        try:
            if etype == "free_space":
                elements.append(beam_optics.FreeSpace(
                    sec.get("length_um", required=True, check=_non_negative, scale=UM) or 0.0))
            elif etype == "thin_lens":
                f = sec.get("focal_length_um", required=True, check=_nonzero, scale=UM)
                axis = sec.get("axis", default="both", types=(str,),
                               choices=("x", "z", "both"))
                if f is not None:
                    elements.append(beam_optics.ThinLens(f, axis=axis))
            elif etype == "anamorphic_scaler":
                elements.append(beam_optics.AnamorphicScaler(
                    mx=sec.get("mx", default=1.0, check=_positive),
                    mz=sec.get("mz", default=1.0, check=_positive)))
            elif etype == "imaging_system":
                m = sec.get("magnification", required=True, check=_nonzero)
                if m is not None:
                    elements.append(beam_optics.ImagingSystem(float(m)))
            elif etype == "aod":
                if aod_spec is None:
                    violations.append(
                        f"{epath}: an 'aod' element needs the top-level aod section")
                else:
                    drive = sec.get("drive_frequency_mhz", check=_positive, scale=MHZ)
                    elements.append(aod_spec.deflector(drive_frequency=drive))
            elif etype == "image_rotator":
                angle = sec.get("angle_deg", required=True)
                if angle is not None:
                    elements.append(beam_optics.ImageRotator(math.radians(float(angle))))
            elif etype == "beam_sampler":
                frac = sec.get("sample_fraction", required=True, check=_fraction)
                if frac is not None:
                    elements.append(beam_optics.BeamSampler(float(frac)))
        except ValidationError as exc:
            violations.append(f"{epath}: {exc}")
            ok = False
        if len(violations) > before:
            ok = False
    if not ok:
        return None
    return beam_optics.OpticalTrain(tuple(elements))


def _build_prism(sec):
    alpha = sec.get("alpha_deg", required=True, check=_positive)
    alpha_prime = sec.get("alpha_prime_deg", required=True, check=_positive)
    beta = sec.get("beta_deg", required=True, check=_non_negative)
    beta_prime = sec.get("beta_prime_deg", required=True, check=_non_negative)
    index = sec.get("refractive_index", required=True,
                    check=lambda v: None if 1.0 <= v < 5.0 else "must lie in [1, 5)")
    target = sec.get("target_expansion", default=None, check=_positive)
    samples = sec.get("monte_carlo_samples", default=100000, types=(int,), check=_positive)
    tol_sec = sec.subsection("tolerances_deg")
    if tol_sec is not None:
        tol = ToleranceSpec(
            alpha=tol_sec.get("alpha", default=1.0, check=_non_negative),
            alpha_prime=tol_sec.get("alpha_prime", default=1.0, check=_non_negative),
            beta=tol_sec.get("beta", default=0.25, check=_non_negative),
            beta_prime=tol_sec.get("beta_prime", default=0.25, check=_non_negative),
        )
        tol_sec.finish()
    else:
        tol = ToleranceSpec()
    sec.finish()
    if None in (alpha, alpha_prime, beta, beta_prime, index):
        return None
    try:
        design = PrismPairDesign(float(alpha), float(alpha_prime), float(beta),
                                 float(beta_prime), float(index))
    except ValidationError as exc:
        sec.violations.append(f"{sec.path}: {exc}")
        return None
    return PrismSection(design=design,
                        target_expansion=float(target) if target else None,
                        tolerances=tol, monte_carlo_samples=int(samples))


def _build_aod(sec, wavelength):
    fc = sec.get("center_frequency_mhz", required=True, check=_positive, scale=MHZ)
    bw = sec.get("bandwidth_mhz", required=True, check=_positive, scale=MHZ)
    vel = sec.get("acoustic_velocity_m_s", required=True, check=_positive)
    waist = sec.get("crystal_waist_um", required=True, check=_positive, scale=UM)
    peak = sec.get("peak_efficiency", default=1.0,
                   check=lambda v: None if 0 < v <= 1 else "must lie in (0, 1]")
    width = sec.get("efficiency_width_mhz", default=None, check=_positive, scale=MHZ)
    sec.finish()
    if None in (fc, bw, vel, waist) or wavelength is None:
        return None
    return aod_model.AodSpec(
        center_frequency=fc, bandwidth=bw, acoustic_velocity=float(vel),
        optical_wavelength=wavelength, crystal_waist=waist,
        peak_efficiency=float(peak), efficiency_width=width)


def _build_monitor(sec):
    frac = sec.get("sample_fraction", required=True,
                   check=lambda v: None if 0 < v < 1 else "must lie in (0, 1)")
    resp = sec.get("responsivity_a_w", required=True, check=_positive)
    gain = sec.get("tia_gain_v_a", required=True, check=_positive)
    power = sec.get("beam_power_w", required=True, check=_positive)
    sec.finish()
    if None in (frac, resp, gain, power):
        return None
    chain = aod_model.MonitorChain(sample_fraction=float(frac),
                                   responsivity=float(resp),
                                   transimpedance_gain=float(gain))
    return chain, float(power)


def _build_chain(sec):
    positions = sec.get("positions_um", default=None, types=(list,))
    count = sec.get("count", default=None, types=(int,), check=_positive)
    spacing = sec.get("spacing_um", default=None, check=_positive, scale=UM)
    center = sec.get("center_um", default=0.0, scale=UM)
    sec.finish()
    if positions is not None:
        bad = [p for p in positions if isinstance(p, bool) or not isinstance(p, (int, float))]
        if bad:
            sec.violations.append(f"{sec.path}.positions_um: entries must be numbers")
            return None
        try:
            return IonChain(tuple(float(p) * UM for p in positions))
        except ValidationError as exc:
            sec.violations.append(f"{sec.path}.positions_um: {exc}")
            return None
    if count is None or spacing is None:
        sec.violations.append(
            f"{sec.path}: provide either positions_um or both count and spacing_um")
        return None
    return IonChain.uniform(int(count), spacing, center=center)


def _build_addressing(sec):
    waist = sec.get("ion_waist_um", required=True, check=_positive, scale=UM)
    perp = sec.get("perpendicular_waist_um", required=True, check=_positive, scale=UM)
    coupling = sec.get("coupling", default="intensity", types=(str,),
                       choices=COUPLING_MODES)
    mis = sec.get("misalignment_deg", default=1.0)
    half = sec.get("steering_half_range_um", default=75.0, check=_non_negative, scale=UM)
    ratios = sec.get("clipping_ratios", default=[0.6, 0.8, 1.0, 1.2, 1.5, 2.0, 2.5, 3.0],
                     types=(list,))
    coll = sec.get("collimated_waist_um", default=1500.0, check=_positive, scale=UM)
    sec.finish()
    if None in (waist, perp):
        return None
    clean_ratios = []
    for i, r in enumerate(ratios):
        if isinstance(r, bool) or not isinstance(r, (int, float)) or r <= 0:
            sec.violations.append(
                f"{sec.path}.clipping_ratios[{i}]: must be a positive number")
        else:
            clean_ratios.append(float(r))
    return AddressingSection(
        ion_waist=waist, perpendicular_waist=perp, coupling=coupling,
        misalignment_angle=math.radians(float(mis)),
        steering_half_range=half, clipping_ratios=tuple(clean_ratios),
        collimated_waist=coll)


def _get_shots(sec):
    shots = sec.get("shots", default=None, types=(int,), check=_positive)
    return int(shots) if shots is not None else None


def _build_experiments(sec):
    profile = chain_scan = crosstalk = switching = None

    ps = sec.subsection("profile_scan")
    if ps is not None:
        profile = ProfileScanSetup(
            waist=ps.get("waist_um", required=True, check=_positive, scale=UM),
            pi_time=ps.get("pi_time_ns", required=True, check=_positive, scale=NS),
            drive_time=ps.get("drive_time_ns", required=True, check=_positive, scale=NS),
            center_frequency=ps.get("beam_center_mhz", required=True, check=_positive,
                                    scale=MHZ),
            frequency_start=ps.get("frequency_start_mhz", required=True, check=_positive,
                                   scale=MHZ),
            frequency_stop=ps.get("frequency_stop_mhz", required=True, check=_positive,
                                  scale=MHZ),
            points=ps.get("points", default=201, types=(int,),
                          check=lambda v: None if v >= 4 else "need at least 4 points"),
            shots=_get_shots(ps),
            steering_efficiency=ps.get("steering_efficiency_um_per_mhz", default=None,
                                       check=_nonzero, scale=UM / MHZ),
        )
        ps.finish()

    cs = sec.subsection("chain_scan")
    if cs is not None:
        chain_scan = ChainScanSetup(
            pi_time=cs.get("pi_time_ns", required=True, check=_positive, scale=NS),
            drive_time=cs.get("drive_time_ns", required=True, check=_positive, scale=NS),
            frequency_start=cs.get("frequency_start_mhz", required=True, check=_positive,
                                   scale=MHZ),
            frequency_stop=cs.get("frequency_stop_mhz", required=True, check=_positive,
                                  scale=MHZ),
            points=cs.get("points", default=1601, types=(int,),
                          check=lambda v: None if v >= 4 else "need at least 4 points"),
            shots=_get_shots(cs),
            steering_efficiency=cs.get("steering_efficiency_um_per_mhz", default=None,
                                       check=_nonzero, scale=UM / MHZ),
        )
        cs.finish()

    ct = sec.subsection("crosstalk")
    if ct is not None:
        crosstalk = CrosstalkSetup(
            target_ion=ct.get("target_ion", required=True, types=(int,),
                              check=_non_negative),
            pi_time=ct.get("pi_time_ns", required=True, check=_positive, scale=NS),
            max_time=ct.get("max_time_ns", required=True, check=_positive, scale=NS),
            points=ct.get("points", default=400, types=(int,),
                          check=lambda v: None if v >= 8 else "need at least 8 points"),
            shots=_get_shots(ct),
        )
        ct.finish()

    sw = sec.subsection("switching")
    if sw is not None:
        switching = SwitchingSetup(
            model=sw.get("model", default="pure_delay", types=(str,),
                         choices=("pure_delay", "transit_ramp", "linear_ramp")),
            switch_delay=sw.get("switch_delay_ns", default=0.0, check=_non_negative,
                                scale=NS),
            settle_time=sw.get("settle_time_ns", default=0.0, check=_non_negative,
                               scale=NS),
            pi2_time_ion0=sw.get("pi2_time_ion0_ns", required=True, check=_positive,
                                 scale=NS),
            pi2_time_ion1=sw.get("pi2_time_ion1_ns", required=True, check=_positive,
                                 scale=NS),
            extra_start=sw.get("extra_time_start_ns", default=0.0, check=_non_negative,
                               scale=NS),
            extra_stop=sw.get("extra_time_stop_ns", required=True, check=_positive,
                              scale=NS),
            points=sw.get("points", default=181, types=(int,),
                          check=lambda v: None if v >= 8 else "need at least 8 points"),
            shots=_get_shots(sw),
        )
        sw.finish()

    sec.finish()
    return ExperimentsSection(profile_scan=profile, chain_scan=chain_scan,
                              crosstalk=crosstalk, switching=switching)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def parse_config(path):
    """Parse and validate a YAML system configuration.

    Raises :class:`ConfigError` for a missing file, a YAML syntax error
    (with line and column) or any schema violation; on success returns a
    :class:`SystemConfig` with SI values and constructed library objects.
    """
    if not os.path.exists(path):
        raise ConfigError(f"configuration file not found: {path}")
    with open(path, "rb") as fh:
        raw_bytes = fh.read()
    digest = hashlib.sha256(raw_bytes).hexdigest()

    try:
        data = yaml.safe_load(raw_bytes)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML parse error{where}: {exc.problem or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc

    if data is None:
        raise ConfigError("configuration file is empty")
    if not isinstance(data, dict):
        raise ConfigError("top level of the configuration must be a mapping")

    violations = []
    root = _Section(data, "config", violations)

    seed = root.get("seed", default=None, types=(int,), check=_non_negative)
    out_sec = root.subsection("output")
    outdir = None
    if out_sec is not None:
        outdir = out_sec.get("directory", default=None, types=(str,))
        out_sec.finish()

    sys_sec = root.subsection("system")
    wavelength = None
    if sys_sec is None:
        violations.append("config.system: required section is missing")
    else:
        wavelength = sys_sec.get("wavelength_um", required=True, check=_positive, scale=UM)
        sys_sec.finish()

    aod_sec = root.subsection("aod")
    aod = _build_aod(aod_sec, wavelength) if aod_sec is not None else None

    beam_sec = root.subsection("input_beam")
    beam = _build_beam(beam_sec, wavelength) if beam_sec is not None else None

    root.seen.add("train")
    train = None
    if "train" in data:
        train = _build_train(data["train"], "config.train", violations, aod)

    prism_sec = root.subsection("prism")
    prism = _build_prism(prism_sec) if prism_sec is not None else None

    mon_sec = root.subsection("monitor")
    monitor = beam_power = None
    if mon_sec is not None:
        built = _build_monitor(mon_sec)
        if built is not None:
            monitor, beam_power = built

    chain_sec = root.subsection("chain")
    chain = _build_chain(chain_sec) if chain_sec is not None else None

    addr_sec = root.subsection("addressing")
    addressing = _build_addressing(addr_sec) if addr_sec is not None else None

    exp_sec = root.subsection("experiments")
    if exp_sec is not None:
        experiments = _build_experiments(exp_sec)
    else:
        experiments = ExperimentsSection(None, None, None, None)

    root.finish()
    if violations:
        raise ConfigError(f"invalid configuration ({len(violations)} problem(s))",
                          violations)

    return SystemConfig(
        path=str(path), digest=digest,
        seed=int(seed) if seed is not None else None,
        output_directory=outdir,
        wavelength=wavelength, input_beam=beam, train=train, prism=prism,
        aod=aod, monitor=monitor, beam_power=beam_power, chain=chain,
        addressing=addressing, experiments=experiments,
    )
