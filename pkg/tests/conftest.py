import pytest

from superquant.potential import (ConvexPotential, certify_strict_convexity,
                                  parse, quadratic_potential,
                                  tilted_hyperbolic_potential)

PARSED_SOURCES = (
    "x1^2 + x2^2 + 0.5*x1*x2",
    "exp(x1) + exp(x2)",
    "2*sqrt(x1^2+1) + 2*sqrt(x2^2+1) + 0.25*(x1+x2)^2",
)


def certified_from_source(text: str, dims=(2, 0)) -> ConvexPotential:
    candidate = ConvexPotential(parse(text), dims, source=text)
    box = [(-2.0, 2.0)] * (dims[0] + dims[1])
    cert = certify_strict_convexity(candidate, box, grid_density=7)
    return candidate.with_certificate(cert)


@pytest.fixture(scope="session")
def quadratic2():
    return quadratic_potential(2)


@pytest.fixture(scope="session")
def tilted():
    return tilted_hyperbolic_potential((3.0, -2.0), 0.5)


@pytest.fixture(scope="session")
def parsed_potentials():
    return [certified_from_source(text) for text in PARSED_SOURCES]


@pytest.fixture(scope="session")
def suite_potentials(quadratic2, tilted, parsed_potentials):
    return [quadratic2, tilted, *parsed_potentials]
