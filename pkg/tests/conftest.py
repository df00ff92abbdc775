import pytest

from quasidp import FiniteMdp, random_mdp


@pytest.fixture
def single_state():
    # one state, one control, self-loop: fixed point g/(1-alpha) = 2
    return FiniteMdp([[0]], {(0, 0): 1.0}, {(0, 0): [1.0]}, 0.5)


@pytest.fixture
def chain2():
    # deterministic chain into an absorbing zero-cost state: V = [1, 0]
    return FiniteMdp(
        [[0], [0]],
        {(0, 0): 1.0, (1, 0): 0.0},
        {(0, 0): [0.0, 1.0], (1, 0): [0.0, 1.0]},
        0.9,
    )


@pytest.fixture(scope="session")
def model20():
    return random_mdp(20, 4, 0.9, seed=1)


@pytest.fixture(scope="session")
def model5():
    return random_mdp(5, 2, 0.9, seed=3)


TWO_STATE_DOC = """\
{"n_states": 2, "discount": 0.9, "weights": [1.0, 1.0],
 "controls": [[0,1],[0]],
 "cost": {"0,0": 1.0, "0,1": 2.0, "1,0": 0.0},
 "transition": {"0,0": [1.0, 0.0], "0,1": [0.0, 1.0], "1,0": [0.0, 1.0]}}
"""
