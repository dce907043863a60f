import sys
from pathlib import Path

import pytest

from pimsim.config import ArchConfig

sys.path.insert(0, str(Path(__file__).parent))

# Desk-scale configs used across the suites. CFG_SMALL keeps the default
# word width (N=32) with few rows so gate-level streams replay quickly;
# CFG_TINY shrinks the word to N=4 for exhaustive half-gate enumeration.
CFG_SMALL = ArchConfig(rows_h=34, num_crossbars=4)
CFG_TINY = ArchConfig(rows_h=12, cols_w=64, word_n=4, num_crossbars=4,
                      user_regs=8)
CFG_SCALE = ArchConfig(rows_h=1026, num_crossbars=64)


@pytest.fixture
def cfg_small():
    return CFG_SMALL


@pytest.fixture
def cfg_tiny():
    return CFG_TINY
