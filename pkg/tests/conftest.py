import copy

import pytest

from convoy_orbit.config import load_bundled, parse_scenario
from convoy_orbit.metrics_io import MetricsTable, header, record_to_row
from convoy_orbit.sim_engine import Simulation

BASE = {
    "name": "smoke",
    "N_T": 3,
    "convoy": {"path": "stationary", "speed_profile": "stationary",
               "points": [[0.0, 0.0], [2.0, 0.5], [4.0, 1.0]]},
    "V_T_max": 0.0,
    "N_A": 3,
    "V_A_min": 0.4,
    "V_A_max": 1.2,
    "omega_max": 1.5,
    "d_c": 1,
    "k_s": 0.5,
    "k_psi": 1.5,
    "k_gamma": 20.0,
    "delta": 0.8,
    "dt": 0.02,
    "duration": 60.0,
    "altitude": {"mission": 1.0, "separation": 0.3, "k_z": 1.0},
    "agents": {"seed": 11, "half_width": 4.0},
}


def scenario_dict(**changes):
    d = copy.deepcopy(BASE)
    d.update(changes)
    return d


def make_config(**changes):
    return parse_scenario(scenario_dict(**changes))


def table_from(sim):
    cols = header(len(sim.agents), len(sim.convoy.positions(0.0)))
    return MetricsTable.from_rows(cols, [record_to_row(r) for r in sim.records])


@pytest.fixture
def smoke_config():
    return make_config()


@pytest.fixture(scope="session")
def sim1_run():
    sim = Simulation(load_bundled("matlab_sim_1"))
    sim.run()
    return sim
