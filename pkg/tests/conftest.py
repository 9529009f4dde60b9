import pytest

from gridr3 import (
    Bus,
    Generator,
    Line,
    Load,
    NetworkCase,
    load_bundled_rts24,
)


@pytest.fixture(scope="session")
def rts24() -> NetworkCase:
    return load_bundled_rts24()


def make_triangle(
    gen_mw: float = 100.0,
    load2_mw: float = 60.0,
    load3_mw: float = 40.0,
    rating_mw: float = 800.0,
    b_pu: float = 1.0,
) -> NetworkCase:
    """Three buses in a ring, one generator at bus 1, loads at buses 2/3."""
    return NetworkCase(
        buses=(Bus(1), Bus(2), Bus(3)),
        lines=(
            Line(1, 1, 2, b_pu, rating_mw),
            Line(2, 1, 3, b_pu, rating_mw),
            Line(3, 2, 3, b_pu, rating_mw),
        ),
        generators=(Generator(1, 1, 0.0, gen_mw),),
        loads=(Load(2, load2_mw), Load(3, load3_mw)),
    )


def make_two_bus(
    gen_mw: float = 100.0, load_mw: float = 80.0, rating_mw: float = 50.0
) -> NetworkCase:
    return NetworkCase(
        buses=(Bus(1), Bus(2)),
        lines=(Line(1, 1, 2, 10.0, rating_mw),),
        generators=(Generator(1, 1, 0.0, gen_mw),),
        loads=(Load(2, load_mw),),
    )


@pytest.fixture
def triangle() -> NetworkCase:
    return make_triangle()


@pytest.fixture
def two_bus() -> NetworkCase:
    return make_two_bus()
