import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lassim.corpus import load_source, make_corpus  # noqa: E402
from lassim.image import read_image, to_luma  # noqa: E402

CORPUS_SIZE = 120


@pytest.fixture(scope="session")
def natural_image():
    """272x480 luma crop of the scikit-image camera picture."""
    return np.ascontiguousarray(load_source("camera")[100:372, 16:496])


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus")
    make_corpus(path, CORPUS_SIZE)
    return path


@pytest.fixture(scope="session")
def natural_images(corpus_dir):
    """First 20 corpus crops as luma planes."""
    return [to_luma(read_image(p)) for p in sorted(corpus_dir.glob("*.png"))[:20]]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
