import numpy as np
import pytest

from survmix import MixtureArm, TwoArmTruth


@pytest.fixture
def two_point_truth():
    """Two 50/50 strata; stratum-wise treatment rate ratio 0.5 in both."""
    return TwoArmTruth(
        control=MixtureArm(weights=(0.5, 0.5), rates=(0.1, 0.5)),
        research=MixtureArm(weights=(0.5, 0.5), rates=(0.05, 0.25)),
    )


@pytest.fixture
def single_rate_truth():
    """One stratum per arm: exact proportional hazards with ratio 0.5."""
    return TwoArmTruth(
        control=MixtureArm(weights=(1.0,), rates=(0.1,)),
        research=MixtureArm(weights=(1.0,), rates=(0.05,)),
    )


def brute_partial_loglik(beta, time, event, x):
    """Reference Breslow partial log likelihood via explicit risk-set loops."""
    time = np.asarray(time, dtype=float)
    x = np.asarray(x, dtype=float)
    ll = 0.0
    for i in range(time.size):
        if event[i]:
            at_risk = time >= time[i]
            ll += beta * x[i] - np.log(np.sum(np.exp(beta * x[at_risk])))
    return ll
