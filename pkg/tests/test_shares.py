import pytest

from impact_tracker.errors import ClockSkew
from impact_tracker.sensors.base import (
    ProcessTreeSnapshot,
    SystemUsage,
    sample_utilization_shares,
)


def tree(t, cpu, rss=100.0, sm=None, root=10):
    return ProcessTreeSnapshot(
        root_pid=root,
        timestamp=t,
        members={root: (cpu, rss)},
        gpu_proc_util={(root, 0): sm} if sm is not None else {},
    )


def system(t, busy, mem_used=1000.0, total_sm=None):
    return SystemUsage(
        timestamp=t,
        busy_cpu_time_s=busy,
        mem_used_bytes=mem_used,
        gpu_total_sm_util={0: total_sm} if total_sm is not None else {},
    )


def test_quarter_cpu_share():
    # tree used 0.5 cpu-s of 2.0 busy cpu-s -> credited 25%
    shares = sample_utilization_shares(
        tree(0.0, cpu=1.0), tree(1.0, cpu=1.5),
        system(0.0, busy=10.0), system(1.0, busy=12.0),
    )
    assert shares.p_cpu == pytest.approx(0.25)


def test_idle_gpu_share_is_zero():
    shares = sample_utilization_shares(
        tree(0.0, cpu=0.0, sm=0.0), tree(1.0, cpu=0.0, sm=0.0),
        system(0.0, busy=0.0, total_sm=0.0), system(1.0, busy=1.0, total_sm=0.0),
    )
    assert shares.p_gpu[0] == 0.0


def test_sole_process_gets_full_shares():
    shares = sample_utilization_shares(
        tree(0.0, cpu=0.0, rss=500.0, sm=80.0),
        tree(1.0, cpu=1.0, rss=500.0, sm=80.0),
        system(0.0, busy=0.0, mem_used=500.0, total_sm=80.0),
        system(1.0, busy=1.0, mem_used=500.0, total_sm=80.0),
    )
    assert shares.p_cpu == 1.0
    assert shares.p_dram == 1.0
    assert shares.p_gpu[0] == 1.0


def test_dram_share_is_rss_fraction_at_interval_end():
    shares = sample_utilization_shares(
        tree(0.0, cpu=0.0, rss=100.0), tree(1.0, cpu=0.0, rss=250.0),
        system(0.0, busy=0.0, mem_used=1000.0), system(1.0, busy=1.0, mem_used=1000.0),
    )
    assert shares.p_dram == pytest.approx(0.25)


def test_zero_busy_denominator_gives_zero():
    shares = sample_utilization_shares(
        tree(0.0, cpu=0.0), tree(1.0, cpu=0.0),
        system(0.0, busy=5.0), system(1.0, busy=5.0),
    )
    assert shares.p_cpu == 0.0


def test_clock_skew_rejected():
    with pytest.raises(ClockSkew):
        sample_utilization_shares(
            tree(1.0, cpu=0.0), tree(1.0, cpu=0.0),
            system(1.0, busy=0.0), system(1.0, busy=1.0),
        )


def test_disjoint_trees_shares_sum_to_at_most_one():
    a_prev, a_next = tree(0.0, cpu=0.0, root=10), tree(1.0, cpu=0.5, root=10)
    b_prev, b_next = tree(0.0, cpu=0.0, root=20), tree(1.0, cpu=1.5, root=20)
    sys_prev, sys_next = system(0.0, busy=0.0), system(1.0, busy=2.0)
    sa = sample_utilization_shares(a_prev, a_next, sys_prev, sys_next)
    sb = sample_utilization_shares(b_prev, b_next, sys_prev, sys_next)
    assert sa.p_cpu == pytest.approx(0.25)
    assert sb.p_cpu == pytest.approx(0.75)
    assert sa.p_cpu + sb.p_cpu <= 1.0 + 1e-12


def test_exited_child_drops_from_members_without_negative_delta():
    prev = ProcessTreeSnapshot(root_pid=10, timestamp=0.0,
                               members={10: (1.0, 100.0), 11: (2.0, 100.0)})
    next = ProcessTreeSnapshot(root_pid=10, timestamp=1.0,
                               members={10: (1.5, 100.0)})
    shares = sample_utilization_shares(
        prev, next, system(0.0, busy=0.0), system(1.0, busy=1.0)
    )
    assert shares.p_cpu == pytest.approx(0.5)
