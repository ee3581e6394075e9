"""Potential-outcomes simulator for an idealised two-arm randomised trial.

Each individual carries a latent stratum and a *pair* of potential event
times: the time they would fail under control and under research treatment.
The marginal law of each potential time is fixed by the arm's mixture; the
joint law is not identified by any trial, so the coupling between the pair is
a configuration choice:

    comonotone   both times invert one shared uniform,
                 T(z) = -log(U) / rate(stratum, z)  (rank-preserving)
    independent  each time inverts its own uniform

Either way the observable marginals are identical. Every random quantity is a
pure function of (seed, individual id, stream), so generation order and
parallelism cannot change a dataset.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .frailty import MixtureArm, TwoArmTruth

COUPLING_COMONOTONE = "comonotone"
COUPLING_INDEPENDENT = "independent"
COUPLINGS = (COUPLING_INDEPENDENT, COUPLING_COMONOTONE)

CENSORING_KINDS = ("none", "administrative", "exponential", "both")

DEFAULT_N_PER_ARM = 500


@dataclass(frozen=True)
class CensoringSpec:
    """Right-censoring mechanism applied on top of the potential event times."""

    kind: str = "none"
    admin_time: float = None
    rate: float = None

    def __post_init__(self):
        if self.kind not in CENSORING_KINDS:
            raise ValueError(f"censoring kind must be one of {CENSORING_KINDS}, got {self.kind!r}")
        needs_admin = self.kind in ("administrative", "both")
        needs_rate = self.kind in ("exponential", "both")
        if needs_admin:
            if self.admin_time is None or not self.admin_time > 0.0:
                raise ValueError("administrative censoring needs admin_time > 0")
        elif self.admin_time is not None:
            raise ValueError(f"admin_time is not used with kind={self.kind!r}")
        if needs_rate:
            if self.rate is None or not self.rate > 0.0:
                raise ValueError("exponential censoring needs rate > 0")
        elif self.rate is not None:
            raise ValueError(f"rate is not used with kind={self.kind!r}")

    def label(self):
        """Compact label for tables, e.g. 'admin@2' or 'admin@2+exp@0.1'."""
        parts = []
        if self.kind in ("administrative", "both"):
            parts.append(f"admin@{self.admin_time:g}")
        if self.kind in ("exponential", "both"):
            parts.append(f"exp@{self.rate:g}")
        return "+".join(parts) if parts else "none"


@dataclass(frozen=True)
class TrialConfig:
    truth: TwoArmTruth
    n_per_arm: int = DEFAULT_N_PER_ARM
    coupling: str = COUPLING_COMONOTONE
    censoring: CensoringSpec = CensoringSpec()
    seed: int = 0

    def __post_init__(self):
        if self.n_per_arm < 1:
            raise ValueError("n_per_arm must be >= 1")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {COUPLINGS}, got {self.coupling!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        # Potential outcomes need one latent stratum per individual, so the
        # two arms must share the stratum distribution.
        c, r = self.truth.control, self.truth.research
        if c.weights != r.weights:
            raise ValueError(
                "simulation requires identical stratum weights in both arms; "
                f"got control {c.weights} vs research {r.weights}"
            )


@dataclass(frozen=True)
class IndividualRecord:
    id: int
    arm: int
    stratum: int
    potential_time_0: float
    potential_time_1: float
    observed_time: float
    event: bool


class Dataset:
    """Simulated trial data, stored column-wise; immutable after creation.

    Columns: ids, arm, stratum, potential_time_0, potential_time_1,
    observed_time, event. `records()` materialises row objects on demand.
    """

    _COLUMNS = ("ids", "arm", "stratum", "potential_time_0",
                "potential_time_1", "observed_time", "event")

    def __init__(self, ids, arm, stratum, potential_time_0, potential_time_1,
                 observed_time, event, config):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.arm = np.asarray(arm, dtype=np.int64)
        self.stratum = np.asarray(stratum, dtype=np.int64)
        self.potential_time_0 = np.asarray(potential_time_0, dtype=float)
        self.potential_time_1 = np.asarray(potential_time_1, dtype=float)
        self.observed_time = np.asarray(observed_time, dtype=float)
        self.event = np.asarray(event, dtype=bool)
        self.config = config
        n = self.ids.size
        for name in self._COLUMNS:
            col = getattr(self, name)
            if col.size != n:
                raise ValueError(f"column {name} has length {col.size}, expected {n}")
            col.flags.writeable = False

    def __len__(self):
        return self.ids.size

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.config == other.config and all(
            np.array_equal(getattr(self, c), getattr(other, c))
            for c in self._COLUMNS)

    def records(self):
        """Row view as a tuple of IndividualRecord."""
        return tuple(
            IndividualRecord(int(i), int(a), int(s), float(p0), float(p1), float(o), bool(e))
            for i, a, s, p0, p1, o, e in zip(
                self.ids, self.arm, self.stratum, self.potential_time_0,
                self.potential_time_1, self.observed_time, self.event)
        )

    def assigned_potential_time(self):
        return np.where(self.arm == 0, self.potential_time_0, self.potential_time_1)

    def covariate_matrix(self, names):
        """Covariate columns for regression, e.g. ('arm',) or ('arm', 'stratum')."""
        allowed = {"arm": self.arm, "stratum": self.stratum}
        try:
            cols = [allowed[n] for n in names]
        except KeyError as err:
            raise ValueError(f"unknown covariate {err.args[0]!r}; choose from arm, stratum")
        return np.column_stack([c.astype(float) for c in cols])


def _potential_times(config):
    truth, n = config.truth, config.n_per_arm
    ids = np.arange(2 * n, dtype=np.int64)
    arm = (ids >= n).astype(np.int64)

    cum_weights = np.cumsum(truth.control.weights)
    u_strat = rng.substream_uniforms(config.seed, ids, rng.STREAM_STRATUM)
    stratum = np.searchsorted(cum_weights, u_strat, side="left")
    stratum = np.minimum(stratum, len(cum_weights) - 1)

    rates_0 = np.asarray(truth.control.rates)[stratum]
    rates_1 = np.asarray(truth.research.rates)[stratum]
    u0 = rng.substream_uniforms(config.seed, ids, rng.STREAM_EVENT_PRIMARY)
    if config.coupling == COUPLING_COMONOTONE:
        log_u0 = -np.log(u0)
        t0 = log_u0 / rates_0
        t1 = log_u0 / rates_1
    else:
        u1 = rng.substream_uniforms(config.seed, ids, rng.STREAM_EVENT_SECONDARY)
        t0 = -np.log(u0) / rates_0
        t1 = -np.log(u1) / rates_1
    return ids, arm, stratum, t0, t1


def apply_censoring(dataset, spec, seed):
    """Re-derive observed_time and event from the potential times under `spec`.

    Administrative: observe min(T, admin_time); exponential: min(T, C) with
    C ~ Exponential(rate) drawn independently per individual from the
    censoring substream of `seed`; 'both' takes the min of all three.
    """
    t_assigned = dataset.assigned_potential_time()
    censor = np.full(len(dataset), np.inf)
    if spec.kind in ("administrative", "both"):
        censor = np.minimum(censor, spec.admin_time)
    if spec.kind in ("exponential", "both"):
        censor = np.minimum(
            censor,
            rng.substream_exponentials(seed, dataset.ids, rng.STREAM_CENSORING, spec.rate),
        )
    observed = np.minimum(t_assigned, censor)
    event = t_assigned <= censor
    config = dataset.config
    if config is not None and config.censoring != spec:
        config = replace(config, censoring=spec)
    return Dataset(dataset.ids, dataset.arm, dataset.stratum,
                   dataset.potential_time_0, dataset.potential_time_1,
                   observed, event, config)


def simulate(config):
    """Draw the full trial: strata, coupled potential times, then censoring.

    Deterministic given config.seed. Exactly n_per_arm individuals per arm,
    ids 0 .. 2n-1, arm 0 (control) first.
    """
    ids, arm, stratum, t0, t1 = _potential_times(config)
    uncensored = Dataset(ids, arm, stratum, t0, t1,
                         np.where(arm == 0, t0, t1), np.ones(ids.size, dtype=bool),
                         config)
    if config.censoring.kind == "none":
        return uncensored
    return apply_censoring(uncensored, config.censoring, config.seed)
