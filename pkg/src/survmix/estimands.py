"""Alternative causal effect summaries beyond the fitted hazard ratio.

Landmark survival contrasts, restricted mean survival time, the
log-survival-probability ratio (equivalently the cumulative-hazard ratio),
and a Monte-Carlo experiment showing how the fitted average hazard ratio
moves with the censoring distribution. Every summary can be computed from the
closed-form truth or from Kaplan-Meier curves of a dataset.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .estimators import StepCurve, cox_fit_dataset, kaplan_meier
from .frailty import TwoArmTruth, marginal_survival
from .trial import simulate

SOURCE_TRUTH = "truth"
SOURCE_ESTIMATED = "estimated"

LANDMARK_KINDS = ("difference", "ratio", "risk_difference")


@dataclass(frozen=True)
class EstimandReport:
    name: str
    source: str
    horizon: float
    value: float
    per_arm: dict

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("estimand horizon must be > 0")
        if not math.isfinite(self.value):
            raise ValueError(f"estimand {self.name} is not finite: {self.value}")


@dataclass(frozen=True)
class EstimatedCurves:
    """Kaplan-Meier curves per arm plus their supported follow-up ranges."""

    control: StepCurve
    research: StepCurve
    max_time_control: float
    max_time_research: float

    @classmethod
    def from_sample(cls, time, event, arm):
        time = np.asarray(time, dtype=float)
        event = np.asarray(event, dtype=bool)
        arm = np.asarray(arm)
        curves, max_times = [], []
        for z in (0, 1):
            mask = arm == z
            if not mask.any():
                raise ValueError(f"no observations in arm {z}")
            curves.append(kaplan_meier(time[mask], event[mask]))
            max_times.append(float(time[mask].max()))
        return cls(curves[0], curves[1], max_times[0], max_times[1])

    @classmethod
    def from_dataset(cls, dataset):
        return cls.from_sample(dataset.observed_time, dataset.event, dataset.arm)

    @property
    def max_supported_time(self):
        return min(self.max_time_control, self.max_time_research)


def _source_label(source):
    return SOURCE_TRUTH if isinstance(source, TwoArmTruth) else SOURCE_ESTIMATED


def _survival_pair(source, t):
    """Survival in both arms at t, from truth or estimated curves."""
    if isinstance(source, TwoArmTruth):
        return marginal_survival(source.control, t), marginal_survival(source.research, t)
    if t > source.max_supported_time:
        raise ValueError(
            f"time {t:g} is beyond the estimated curves; the maximum supported "
            f"landmark is {source.max_supported_time:g}"
        )
    return float(source.control.at(t)), float(source.research.at(t))


def landmark_contrast(source, t_star, kind="difference"):
    """Contrast of the arm survival probabilities at the landmark t_star."""
    if kind not in LANDMARK_KINDS:
        raise ValueError(f"kind must be one of {LANDMARK_KINDS}, got {kind!r}")
    if not t_star > 0.0:
        raise ValueError("landmark time must be > 0")
    s0, s1 = _survival_pair(source, t_star)
    if kind == "difference":
        value = s1 - s0
    elif kind == "ratio":
        value = s1 / s0
    else:
        # (1-s1) - (1-s0) algebraically; written to negate `difference` exactly
        value = s0 - s1
    return EstimandReport(name=f"landmark_{kind}", source=_source_label(source),
                          horizon=float(t_star), value=float(value),
                          per_arm={"control": s0, "research": s1})


def _rmst_truth(arm, tau):
    """Closed form: sum_k w_k (1 - exp(-rate_k tau)) / rate_k."""
    w = np.asarray(arm.weights)
    lam = np.asarray(arm.rates)
    return float(np.sum(w * (1.0 - np.exp(-lam * tau)) / lam))


def _rmst_step(curve, tau):
    """Exact area under a right-continuous step survival curve on [0, tau]."""
    cut = curve.times[curve.times < tau]
    edges = np.concatenate([[0.0], cut, [tau]])
    heights = curve.at(edges[:-1])
    return float(np.sum(np.diff(edges) * heights))


def rmst(source, arm, horizon):
    """Restricted mean survival time to `horizon` for one arm, or the
    research-minus-control difference when arm='difference'."""
    if not horizon > 0.0:
        raise ValueError("rmst horizon must be > 0")
    if arm not in ("control", "research", "difference"):
        raise ValueError(f"arm must be control, research or difference, got {arm!r}")
    per_arm = {}
    needed = ("control", "research") if arm == "difference" else (arm,)
    for label in needed:
        if isinstance(source, TwoArmTruth):
            per_arm[label] = _rmst_truth(getattr(source, label), horizon)
        else:
            max_time = getattr(source, f"max_time_{label}")
            if horizon > max_time:
                raise ValueError(
                    f"rmst horizon {horizon:g} exceeds the last observed time "
                    f"{max_time:g} in the {label} arm"
                )
            per_arm[label] = _rmst_step(getattr(source, label), horizon)
    if arm == "difference":
        value = per_arm["research"] - per_arm["control"]
        name = "rmst_difference"
    else:
        value = per_arm[arm]
        name = f"rmst_{arm}"
    return EstimandReport(name=name, source=_source_label(source),
                          horizon=float(horizon), value=value, per_arm=per_arm)


def log_survival_ratio(source, t):
    """log S_research(t) / log S_control(t), the cumulative-hazard ratio.

    Under proportional hazards this is constant in t and equals the hazard
    ratio itself, which is what makes it a population-level causal contrast.
    Undefined where either survival equals 1 (no events yet) or 0.
    """
    if not t > 0.0:
        raise ValueError("time must be > 0")
    s0, s1 = _survival_pair(source, t)
    for label, s in (("control", s0), ("research", s1)):
        if not 0.0 < s < 1.0:
            raise ValueError(
                f"log-survival ratio undefined at t={t:g}: {label} survival is {s:g}"
            )
    value = math.log(s1) / math.log(s0)
    return EstimandReport(name="log_survival_ratio", source=_source_label(source),
                          horizon=float(t), value=value,
                          per_arm={"control": s0, "research": s1})


@dataclass(frozen=True)
class SensitivityRow:
    spec_label: str
    mean_beta: float
    mc_se: float
    n_ok: int
    n_failed: int


def censoring_sensitivity(config, specs, replicates):
    """Monte-Carlo mean of the arm-only Cox log-HR under each censoring spec.

    Replicate r of every spec reruns the trial with the child seed
    derive_seed(config.seed, r), so specs are compared on identical
    potential-outcome draws and scheduling cannot affect results. Replicates
    whose fit fails or does not converge are excluded and counted.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    seeds = [rng.derive_seed(config.seed, r) for r in range(replicates)]
    rows = []
    for spec in specs:
        betas = []
        failed = 0
        for seed_r in seeds:
            try:
                dataset = simulate(replace(config, seed=seed_r, censoring=spec))
                fit = cox_fit_dataset(dataset, covariates=("arm",))
            except ValueError:
                failed += 1
                continue
            if not fit.converged:
                failed += 1
                continue
            betas.append(fit.log_hr)
        betas = np.asarray(betas)
        n_ok = betas.size
        mean = float(betas.mean()) if n_ok else float("nan")
        mc_se = float(betas.std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else float("nan")
        rows.append(SensitivityRow(spec_label=spec.label(), mean_beta=mean,
                                   mc_se=mc_se, n_ok=n_ok, n_failed=failed))
    return rows
