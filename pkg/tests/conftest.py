import pytest

from partgcn import Assignment, SbmSpec, build_graph, build_plan, generate_sbm


@pytest.fixture
def p4():
    """Path 0-1-2-3 with scalar features 1..4."""
    return build_graph([(0, 1), (1, 2), (2, 3)], 4, features=[[1.0], [2.0], [3.0], [4.0]],
                       labels=[0, 0, 1, 1], train_mask=[True] * 4)


@pytest.fixture
def p4_plan(p4):
    return build_plan(p4, Assignment([0, 0, 1, 1], 2))


@pytest.fixture
def star():
    """K1,5: center 0 in partition 0, leaves 1..5 in partition 1."""
    g = build_graph([(0, k) for k in range(1, 6)], 6)
    return g, build_plan(g, Assignment([0, 1, 1, 1, 1, 1], 2))


@pytest.fixture
def triangles():
    return build_graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], 6)


@pytest.fixture(scope="session")
def small_sbm():
    return generate_sbm(SbmSpec(2, 60, 0.15, 0.02, feature_dim=5), seed=3)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        detail = dict(report.user_properties).get("detail", "")
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(_acceptance):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}  {detail}")
