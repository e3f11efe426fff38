import numpy as np
import pytest

from wfasva import models


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_words(rng, alphabet, count, max_len=8):
    out = []
    for _ in range(count):
        k = int(rng.integers(0, max_len + 1))
        out.append([alphabet[i] for i in rng.integers(0, len(alphabet), size=k)])
    return out


def path_sum(A, word):
    """f(x) as a sum over all state sequences of products of weights."""
    import itertools

    n = A.n
    total = 0.0
    for states in itertools.product(range(n), repeat=len(word) + 1):
        w = A.alpha[states[0]]
        for t, a in enumerate(word):
            w *= A[a][states[t], states[t + 1]]
        total += w * A.beta[states[-1]]
    return total


@pytest.fixture
def golden():
    return {name: make() for name, make in models.GOLDEN.items()}


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
