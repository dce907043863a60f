"""Simulator semantics: reference equivalence, masks, moves, isolation."""

import numpy as np
import pytest

from pimsim.config import ArchConfig, ColumnAddress
from pimsim.errors import AmbiguousRead, InvalidMove, UninitializedOutput
from pimsim.microops import (
    CrossbarMask,
    Gate,
    HLogic,
    Layout,
    Move,
    RangeMask,
    Read,
    RowMask,
    VLogic,
    Write,
    encode,
    format_trace,
    parse_trace,
)
from pimsim.simulator import Simulator
from conftest import CFG_TINY
from refsim import NaiveSim, random_mask, random_microop

CFG = CFG_TINY  # 12 rows, 16-wide partitions, N=4, 4 crossbars


def _random_state(rng, sim, naive):
    for xb in range(CFG.num_crossbars):
        grid = rng.random((CFG.rows_h, CFG.cols_w)) < 0.5
        sim.set_grid(xb, grid)
        naive.grids[xb] = grid.copy()


def _grids(sim):
    return [sim.get_grid(xb) for xb in range(CFG.num_crossbars)]


def test_reference_equivalence_fuzz():
    rng = np.random.default_rng(21)
    sim = Simulator(CFG, strict_init=False)
    naive = NaiveSim(CFG, strict_init=False)
    _random_state(rng, sim, naive)
    reads_sim, reads_naive = [], []
    for i in range(600):
        op = random_microop(rng, CFG)
        if rng.random() < 0.1:
            # exercise reads via singleton masks
            xb = int(rng.integers(0, CFG.num_crossbars))
            row = int(rng.integers(0, CFG.rows_h))
            for m in (CrossbarMask(RangeMask(xb, xb, 1)),
                      RowMask(RangeMask(row, row, 1))):
                sim.execute(m)
                naive.execute(m)
            op = Read(int(rng.integers(0, CFG.partition_width)))
        r1 = sim.execute(op)
        r2 = naive.execute(op)
        if r1 is not None:
            reads_sim.append(r1)
            reads_naive.append(r2)
        if i % 50 == 0:
            for g1, g2 in zip(_grids(sim), naive.grids):
                assert np.array_equal(g1, g2), f"state diverged at op {i}"
    assert reads_sim == reads_naive and reads_sim
    for g1, g2 in zip(_grids(sim), naive.grids):
        assert np.array_equal(g1, g2)


def test_move_equivalence_fuzz():
    rng = np.random.default_rng(22)
    sim = Simulator(CFG, strict_init=False)
    naive = NaiveSim(CFG, strict_init=False)
    _random_state(rng, sim, naive)
    done = 0
    while done < 60:
        mask = random_mask(rng, CFG.num_crossbars)
        op = Move(int(rng.integers(0, CFG.num_crossbars)),
                  int(rng.integers(0, CFG.rows_h)), int(rng.integers(0, CFG.rows_h)),
                  int(rng.integers(0, CFG.partition_width)),
                  int(rng.integers(0, CFG.partition_width)))
        sim.execute(CrossbarMask(mask))
        naive.execute(CrossbarMask(mask))
        try:
            sim.execute(op)
        except InvalidMove:
            with pytest.raises(InvalidMove):
                naive.execute(op)
            continue
        naive.execute(op)
        done += 1
        for g1, g2 in zip(_grids(sim), naive.grids):
            assert np.array_equal(g1, g2)


def test_move_descending_distance():
    """The stored destination field is non-negative; the distance is signed."""
    sim = Simulator(CFG, strict_init=False)
    sim.execute(RowMask(RangeMask(0, 0, 1)))
    sim.execute(CrossbarMask(RangeMask(3, 3, 1)))
    sim.execute(Write(2, 0b1011))
    # Move word from crossbar 3 down to crossbar 1 (distance -2).
    sim.execute(Move(1, 0, 5, 2, 7))
    sim.execute(CrossbarMask(RangeMask(1, 1, 1)))
    sim.execute(RowMask(RangeMask(5, 5, 1)))
    assert sim.execute(Read(7)) == 0b1011


def test_move_overlap_and_range_rejected():
    sim = Simulator(CFG)
    sim.execute(CrossbarMask(RangeMask(0, 2, 1)))
    with pytest.raises(InvalidMove):
        sim.execute(Move(1, 0, 0, 0, 1))  # dests {1,2,3} overlap srcs
    with pytest.raises(InvalidMove):
        sim.execute(Move(3, 0, 0, 0, 1))  # dests {3,4,5} out of range
    sim2 = Simulator(CFG)
    sim2.execute(CrossbarMask(RangeMask(2, 3, 1)))
    with pytest.raises(InvalidMove):
        sim2.execute(Move(1, 0, 0, 0, 0))  # distance -1: dest 2 overlaps srcs


def test_read_requires_singleton_masks():
    sim = Simulator(CFG)
    with pytest.raises(AmbiguousRead):
        sim.execute(Read(0))


def test_checked_mode_raises_on_uninitialized_output():
    sim = Simulator(CFG, strict_init=True)
    sim.execute(RowMask(RangeMask(0, 0, 1)))
    op = HLogic(Gate.NOT, ColumnAddress(0, 0), ColumnAddress(0, 0),
                ColumnAddress(1, 1), 1, 0)
    with pytest.raises(UninitializedOutput):
        sim.execute(op)  # fresh state: output cell is 0
    init = HLogic(Gate.INIT1, ColumnAddress(0, 0), ColumnAddress(0, 0),
                  ColumnAddress(1, 1), 1, 0)
    sim.execute(init)
    sim.execute(op)  # now legal


def test_physical_mode_one_directional():
    sim = Simulator(CFG, strict_init=False)
    sim.execute(RowMask(RangeMask(0, 0, 1)))
    # NOT with input 0 would produce 1, but a 0 output cell cannot rise.
    op = HLogic(Gate.NOT, ColumnAddress(0, 0), ColumnAddress(0, 0),
                ColumnAddress(1, 1), 1, 0)
    sim.execute(op)
    grid = sim.get_grid(0)
    assert not grid[0, 1 * CFG.partition_width + 1]


def test_vlogic_ignores_row_mask():
    sim = Simulator(CFG, strict_init=False)
    sim.execute(RowMask(RangeMask(3, 3, 1)))  # mask far from the rows used
    sim.execute(VLogic(Gate.INIT1, 0, 7, 5))
    grid = sim.get_grid(0)
    width = CFG.partition_width
    assert all(grid[7, p * width + 5] for p in range(CFG.word_n))


def test_run_trace_roundtrip_and_profile():
    layout = Layout(CFG)
    ops = [
        CrossbarMask(RangeMask(0, 0, 1)),
        RowMask(RangeMask(2, 2, 1)),
        Write(4, 0b0110),
        Read(4),
    ]
    text = format_trace([encode(op, layout) for op in ops])
    sim = Simulator(CFG)
    reads, delta = sim.run_trace(parse_trace(text))
    assert reads == [0b0110]
    assert delta.total == 4
    assert delta.counts["Write"] == 1 and delta.counts["Read"] == 1


def test_counters_one_cycle_per_microop():
    sim = Simulator(CFG, strict_init=False)
    rng = np.random.default_rng(3)
    n = 50
    for _ in range(n):
        sim.execute(random_microop(rng, CFG))
    assert sim.counters.total == n


def test_snapshot_stable():
    sim = Simulator(CFG)
    before = sim.snapshot()
    sim.execute(RowMask(RangeMask(1, 1, 1)))  # masks change no cells
    assert sim.snapshot() == before
    sim.execute(Write(0, 0xF))
    assert sim.snapshot() != before
