import numpy as np

from fedcrit.nn import Network, loss_gradient


def finite_difference_gradient(net, X, target, loss, step=1e-5):
    """Central differences of the batch loss, one coordinate at a time."""
    grad = np.zeros_like(net.params)
    for j in range(net.params.size):
        p = net.params.copy()
        p[j] += step
        up, _ = loss_gradient(Network(net.spec, p), X, target, loss)
        p[j] -= 2 * step
        down, _ = loss_gradient(Network(net.spec, p), X, target, loss)
        grad[j] = (up - down) / (2 * step)
    return grad


def blobs(seed, n=100, scale01=False):
    """Two well separated 2-D Gaussian blobs labelled 0 and 1."""
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal([-2, -2], 0.5, (n // 2, 2)), rng.normal([2, 2], 0.5, (n - n // 2, 2))])
    y = np.repeat([0, 1], [n // 2, n - n // 2])
    if scale01:
        X = (X - X.min(axis=0)) / (X.max(axis=0) - X.min(axis=0))
    return X, y


# lines printed by the acceptance suite, repeated in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
