import pytest

from sitecalc.workbench import generators as g


@pytest.fixture(scope="session")
def skel2():
    return g.gen_finset_skeleton(2)


@pytest.fixture(scope="session")
def skel2_model():
    return g.finset_skeleton_model(2)


@pytest.fixture(scope="session")
def arrow():
    return g.walking_arrow()


@pytest.fixture(scope="session")
def trivial():
    return g.trivial_category()


@pytest.fixture(scope="session")
def diamond():
    return g.four_element_poset()


def find_morphism(c, name):
    return c.morphism_names.index(name)


def obj(c, name):
    return c.object_names.index(name)


# PASS/FAIL lines recorded by the acceptance tests
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
