import numpy as np


def random_reversible(rng, n, density=0.6):
    """Random connected reversible chain as (T, pi) from a symmetric weight matrix."""
    while True:
        W = rng.uniform(0.1, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
        W = np.triu(W, 1)
        W = W + W.T + np.diag(rng.uniform(0, 0.5, size=n))
        # ring keeps it connected
        for i in range(n):
            j = (i + 1) % n
            if n > 1 and W[i, j] == 0:
                W[i, j] = W[j, i] = 0.3
        if np.all(W.sum(axis=1) > 0):
            break
    T = W / W.sum(axis=1, keepdims=True)
    pi = W.sum(axis=1) / W.sum()
    return T, pi


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
