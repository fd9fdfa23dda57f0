import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def rule13():
    from ilctiling.kskdissect import load_rule

    return load_rule(13)


@pytest.fixture(scope="session")
def rule17():
    from ilctiling.kskdissect import load_rule

    return load_rule(17)
