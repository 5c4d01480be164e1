"""Shared desk-scale scenario builders for the test suite."""

import numpy as np
import pytest

from swarmdefense import (
    AttackerInit,
    DefenderInit,
    HvuPath,
    Model1Params,
    Model2Params,
    ParamDomain,
    ScenarioConfig,
    SwarmModel,
    WeaponParams,
)

MODEL1 = dict(alpha=0.5, d0=1.0, d1=6.0, alpha_h=6.0, h0=3.0, k1=5.0, k2=5.0)
# Interaction radii widened so the 5-agent cluster stays mutually connected:
# stable neighbor sets keep finite-difference oracles clean.
MODEL2 = dict(r_al=6.0, w_al=0.75, r_coh=6.0, w_coh=0.75, r_sep=2.0, w_sep=0.5, r_i=4.0, w_i=4.5, k1=5.0)


def desk_scenario(kind="vbap", **overrides):
    """5 attackers vs 2 defenders, t_f = 10; the workhorse test scenario.

    Attacker weapon intensity is 0.5 (an order above the full-scale
    nominal 0.05) so terminal costs land around 1e-2 and difference
    quotients are well conditioned.
    """
    if kind == "vbap":
        model = SwarmModel("vbap", Model1Params(**MODEL1))
        uncertain = ParamDomain("d0", 0.5, 1.5, nominal=1.0)
    else:
        model = SwarmModel("reynolds", Model2Params(**MODEL2))
        uncertain = ParamDomain("w_sep", 0.1, 0.9, nominal=0.5)
    base = dict(
        n=3,
        n_attackers=5,
        n_defenders=2,
        t_f=10.0,
        dt=0.05,
        model=model,
        weapons=WeaponParams(lambda_d=2.0, sigma_d=2.0, lambda_a=0.5, sigma_a=2.0),
        hvu=HvuPath(kind="static", position=np.zeros(3)),
        attackers=AttackerInit(kind="lattice", standoff=10.0, spacing=1.0, jitter=0.2, seed=7),
        defenders=DefenderInit(kind="explicit", positions=np.array([[5.0, 1.5, 0.0], [5.0, -1.5, 0.0]])),
        u_max=2.0,
        uncertain=uncertain,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


@pytest.fixture
def cfg_vbap():
    return desk_scenario("vbap")


@pytest.fixture
def cfg_reynolds():
    return desk_scenario("reynolds")


@pytest.fixture
def rng():
    return np.random.default_rng(42)
