import pytest

from maskguard.datagen import make_classification_corpus
from maskguard.units import Language, SourceUnit


@pytest.fixture
def simple_c():
    return SourceUnit(id="simple-c", text="int f(int a){return a;}", language=Language.C)


@pytest.fixture
def simple_java():
    return SourceUnit(
        id="simple-java",
        text="int f(int a) { if (a > 0) { a = a - 1; } return a; }",
        language=Language.JAVA,
    )


@pytest.fixture(scope="session")
def reference_corpus():
    """Fixed 20-file corpus backing the pinned infiller outputs."""
    return make_classification_corpus(20, seed=0, id_prefix="ref")


@pytest.fixture(scope="session")
def medium_corpus():
    return make_classification_corpus(120, seed=1, id_prefix="med")
