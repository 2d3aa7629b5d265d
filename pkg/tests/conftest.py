import pytest

from epiq.statespace import AttributeDef, ObjectRegistry, full_state


@pytest.fixture
def registry():
    """One particle with an ordered position (4 cells) and a binary spin."""
    return ObjectRegistry.build(
        [
            AttributeDef(id="position", kind="ordered", values=(1, 2, 3, 4)),
            AttributeDef(id="spin", kind="binary", values=("up", "down")),
        ],
        {"particle": ["position", "spin"]},
    )


@pytest.fixture
def whole(registry):
    return full_state(registry)
