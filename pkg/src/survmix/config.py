"""Run configuration: a strict INI document parsed into domain objects.

Sections and keys are validated against a fixed schema; unknown sections or
keys are errors, not warnings, because a silently ignored typo can corrupt a
whole Monte-Carlo study. The shipped default configuration encodes the
two-stratum demonstration scenario (50/50 strata, control rates 0.1/0.5,
research rates 0.05/0.25, 500 per arm).
"""

import configparser
from dataclasses import dataclass
from importlib import resources

from .frailty import MixtureArm, TwoArmTruth
from .trial import COUPLINGS, CensoringSpec, TrialConfig

DEFAULT_SEED = 20260808

_SCHEMA = {
    "truth.control": {"weights", "rates"},
    "truth.research": {"weights", "rates"},
    "trial": {"n_per_arm", "coupling", "seed"},
    "censoring": {"kind", "admin_time", "rate"},
    "grid": {"min", "max", "points"},
    "fit": {"covariates", "cutpoints"},
    "estimands": {"landmark", "rmst_horizon", "ratio_time", "sensitivity_replicates"},
    "output": {"dir"},
}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    truth: TwoArmTruth
    trial: TrialConfig
    grid_min: float
    grid_max: float
    grid_points: int
    covariates: tuple
    cutpoints: tuple
    landmark: float
    rmst_horizon: float
    ratio_time: float
    sensitivity_replicates: int
    out_dir: str


def _parse_floats(raw, field):
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{field}: expected a list of numbers, got {raw!r}") from None


def _get(parser, section, key, convert, default, field_kind="value"):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    try:
        return convert(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{section}.{key}: invalid {field_kind} {raw!r}") from None


def parse_config(text, origin="<config>"):
    """Parse configuration text into a RunConfig, rejecting unknown keys."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as err:
        raise ConfigError(f"{origin}: {err}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        unknown = set(parser.options(section)) - _SCHEMA[section]
        if unknown:
            raise ConfigError(
                f"{origin}: unknown key {sorted(unknown)[0]!r} in section [{section}]"
            )

    arms = {}
    for label in ("control", "research"):
        section = f"truth.{label}"
        if not parser.has_section(section):
            raise ConfigError(f"{origin}: missing required section [{section}]")
        for key in ("weights", "rates"):
            if not parser.has_option(section, key):
                raise ConfigError(f"{origin}: missing {section}.{key}")
        try:
            arms[label] = MixtureArm(
                weights=_parse_floats(parser.get(section, "weights"), f"{section}.weights"),
                rates=_parse_floats(parser.get(section, "rates"), f"{section}.rates"),
            )
        except ValueError as err:
            raise ConfigError(f"{origin}: [{section}] {err}") from None
    truth = TwoArmTruth(control=arms["control"], research=arms["research"])

    kind = _get(parser, "censoring", "kind", str, "none")
    admin_time = _get(parser, "censoring", "admin_time", float, None, "number")
    rate = _get(parser, "censoring", "rate", float, None, "number")
    try:
        censoring = CensoringSpec(kind=kind, admin_time=admin_time, rate=rate)
    except ValueError as err:
        raise ConfigError(f"{origin}: [censoring] {err}") from None

    coupling = _get(parser, "trial", "coupling", str, "comonotone")
    if coupling not in COUPLINGS:
        raise ConfigError(f"{origin}: trial.coupling must be one of {COUPLINGS}")
    try:
        trial = TrialConfig(
            truth=truth,
            n_per_arm=_get(parser, "trial", "n_per_arm", int, 500, "integer"),
            coupling=coupling,
            censoring=censoring,
            seed=_get(parser, "trial", "seed", int, DEFAULT_SEED, "integer"),
        )
    except ValueError as err:
        raise ConfigError(f"{origin}: [trial] {err}") from None

    grid_min = _get(parser, "grid", "min", float, 0.0, "number")
    grid_max = _get(parser, "grid", "max", float, 30.0, "number")
    grid_points = _get(parser, "grid", "points", int, 601, "integer")
    if grid_min < 0.0 or grid_max <= grid_min or grid_points < 1:
        raise ConfigError(f"{origin}: [grid] needs 0 <= min < max and points >= 1")

    covariates = tuple(
        _get(parser, "fit", "covariates", lambda raw: raw.replace(",", " ").split(),
             ["arm"])
    )
    for name in covariates:
        if name not in ("arm", "stratum"):
            raise ConfigError(f"{origin}: fit.covariates must be arm or arm, stratum")
    cutpoints = _get(parser, "fit", "cutpoints",
                     lambda raw: _parse_floats(raw, "fit.cutpoints"), ())
    if any(b <= a for a, b in zip(cutpoints, cutpoints[1:])) or \
            any(c <= 0 for c in cutpoints):
        raise ConfigError(f"{origin}: fit.cutpoints must be positive and increasing")

    landmark = _get(parser, "estimands", "landmark", float, 1.0, "number")
    rmst_horizon = _get(parser, "estimands", "rmst_horizon", float, 10.0, "number")
    ratio_time = _get(parser, "estimands", "ratio_time", float, landmark, "number")
    replicates = _get(parser, "estimands", "sensitivity_replicates", int, 200, "integer")
    for field, value in (("landmark", landmark), ("rmst_horizon", rmst_horizon),
                         ("ratio_time", ratio_time)):
        if not value > 0.0:
            raise ConfigError(f"{origin}: estimands.{field} must be > 0")
    if replicates < 2:
        raise ConfigError(f"{origin}: estimands.sensitivity_replicates must be >= 2")

    return RunConfig(
        truth=truth,
        trial=trial,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_points=grid_points,
        covariates=covariates,
        cutpoints=tuple(cutpoints),
        landmark=landmark,
        rmst_horizon=rmst_horizon,
        ratio_time=ratio_time,
        sensitivity_replicates=replicates,
        out_dir=_get(parser, "output", "dir", str, "out"),
    )


def load_config(path):
    """Read and parse a configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text, origin=str(path))


def default_config_text():
    """Text of the shipped default configuration."""
    return resources.files("survmix").joinpath("data/default.cfg").read_text("utf-8")


def default_config():
    """The shipped demonstration scenario as a parsed RunConfig."""
    return parse_config(default_config_text(), origin="<default>")
