import numpy as np
import pytest

from conicgames import catalog, evaluate_quantum_strategy


@pytest.fixture(scope="session")
def chsh():
    return catalog.chsh_game()


@pytest.fixture(scope="session")
def chsh_strategy():
    return catalog.chsh_optimal_strategy()


@pytest.fixture(scope="session")
def chsh_quantum_p(chsh_strategy):
    return evaluate_quantum_strategy(chsh_strategy)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (M + M.conj().T) / 2
