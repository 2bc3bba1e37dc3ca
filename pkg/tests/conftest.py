from pathlib import Path

import numpy as np
import pytest

from semifb.fsm import WeightedGraph

FIXTURES = Path(__file__).parent / "fixtures"


def random_case(seed, k_max=6, arc_max=12, n_max=7, lo=-5.0, hi=0.0):
    """Arbitrary weighted graph plus likelihoods.

    Unlike ``random_graph`` the weights are unnormalized, and initial and
    final vectors are random subsets with random weights.
    """
    rng = np.random.default_rng(seed)
    K = int(rng.integers(1, k_max + 1))
    N = int(rng.integers(1, n_max + 1))
    A = int(rng.integers(1, min(arc_max, K * K) + 1))
    flat = rng.choice(K * K, size=A, replace=False)
    arcs = [(int(f // K), int(f % K), float(w)) for f, w in zip(flat, rng.uniform(-3.0, 1.0, A))]
    n_init = int(rng.integers(1, K + 1))
    n_fin = int(rng.integers(1, K + 1))
    initial = [(int(s), float(w)) for s, w in zip(rng.choice(K, n_init, replace=False), rng.uniform(-2, 0, n_init))]
    final = [(int(s), float(w)) for s, w in zip(rng.choice(K, n_fin, replace=False), rng.uniform(-2, 0, n_fin))]
    g = WeightedGraph.build(K, arcs, initial, final)
    V = rng.uniform(lo, hi, (K, N))
    return g, V


def one_state_graph(loop=0.0):
    return WeightedGraph.build(1, [(0, 0, loop)], [(0, 0.0)], [(0, 0.0)])


# -- acceptance summary --------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _ACCEPTANCE[name] = (report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][2:])):
        ok, detail = _ACCEPTANCE[name]
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
