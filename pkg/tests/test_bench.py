import csv
import io
import logging

import pytest

import bench
from bench import (
    BenchCase, BenchReport, check_speedup_floor, checksum_mismatches, emit_table, run_bench, run_sweep, speedups,
    synthesize_inputs,
)
from error_handling import ResourceError
from utils.constants import BENCH_CSV_COLUMNS


def fake_report(workload, n, threads, variant, median, checksum=1.0):
    case = BenchCase(workload, n, threads, variant, repetitions=1)
    return BenchReport(case, (median, median, median), checksum, (median,))


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestBenchCase:
    @pytest.mark.parametrize('kwargs', [
        dict(workload='sort', n=8, threads=1, variant='naive'),
        dict(workload='center', n=8, threads=1, variant='fast'),
        dict(workload='center', n=8, threads=1, variant='naive', repetitions=0),
        dict(workload='center', n=1, threads=1, variant='naive'),
        dict(workload='mantel', n=2, threads=1, variant='naive'),
        dict(workload='center', n=8, threads=1, variant='naive', tile=0),
    ])
    def test_rejects_bad_cases(self, kwargs):
        with pytest.raises(ValueError):
            BenchCase(**kwargs)


class TestSynthesize:
    def test_inputs_are_validated(self):
        x, y = synthesize_inputs(32, 'mantel', seed=4)
        assert x.validated and y.validated
        assert x.n == y.n == 32

    def test_single_input_for_other_workloads(self):
        x, y = synthesize_inputs(16, 'center', seed=4, precision='f32')
        assert y is None
        assert x.data.dtype.name == 'float32'

    def test_seed_determines_input(self):
        a, _ = synthesize_inputs(20, 'center', seed=1)
        b, _ = synthesize_inputs(20, 'center', seed=1)
        c, _ = synthesize_inputs(20, 'center', seed=2)
        assert (a.data == b.data).all()
        assert not (a.data == c.data).all()

    def test_allocation_failure(self, monkeypatch):
        def explode(*args, **kwargs):
            raise MemoryError
        monkeypatch.setattr(bench, '_synthetic_matrix', explode)
        with pytest.raises(ResourceError) as info:
            synthesize_inputs(1000, 'mantel', seed=0)
        assert info.value.attempted_bytes == 2 * 1000 * 1000 * 8


class TestRunBench:
    def test_center_variants_agree(self):
        naive = run_bench(BenchCase('center', 256, 1, 'naive', repetitions=1))
        optimized = run_bench(BenchCase('center', 256, 1, 'optimized', repetitions=1))
        assert optimized.checksum == pytest.approx(naive.checksum, rel=1e-9)
        assert checksum_mismatches([naive, optimized]) == []

    def test_timing_summary_ordered(self):
        report = run_bench(BenchCase('validate', 64, 1, 'optimized', repetitions=3))
        assert report.min_s <= report.median_s <= report.max_s
        assert len(report.timings) == 3
        assert report.checksum == 3.0

    def test_mantel_checksum_thread_independent(self):
        one = run_bench(BenchCase('mantel', 128, 1, 'optimized', repetitions=1, permutations=99))
        four = run_bench(BenchCase('mantel', 128, 4, 'optimized', repetitions=1, permutations=99))
        assert one.checksum == four.checksum

    def test_repeat_runs_identical(self):
        case = BenchCase('mantel', 24, 1, 'naive', repetitions=1, permutations=20, seed=9)
        assert run_bench(case).checksum == run_bench(case).checksum

    def test_sweep_covers_every_combination(self):
        reports = run_sweep(workloads=('validate', 'center'), sizes=(16, 32), threads_list=(1,), repetitions=1)
        keys = {(r.case.workload, r.case.n, r.case.threads, r.case.variant) for r in reports}
        assert len(reports) == len(keys) == 8
        assert checksum_mismatches(reports) == []


class TestComparisons:
    def test_speedups(self):
        reports = [fake_report('center', 64, 1, 'naive', 2.0), fake_report('center', 64, 1, 'optimized', 0.5),
                   fake_report('center', 128, 1, 'naive', 1.0)]
        assert speedups(reports) == {('center', 64, 1): 4.0}

    def test_checksum_mismatch(self):
        reports = [fake_report('mantel', 8, 1, 'naive', 1.0, checksum=1.0),
                   fake_report('mantel', 8, 1, 'optimized', 1.0, checksum=1.1)]
        assert checksum_mismatches(reports) == [(('mantel', 8, 1), 1.0, 1.1)]

    def test_speedup_floor_is_soft(self, caplog):
        reports = [fake_report('center', 8192, 4, 'naive', 2.0), fake_report('center', 8192, 4, 'optimized', 1.0),
                   fake_report('center', 256, 4, 'naive', 1.0), fake_report('center', 256, 4, 'optimized', 1.0)]
        with caplog.at_level(logging.WARNING):
            misses = check_speedup_floor(reports)
        assert misses == [(('center', 8192, 4), 2.0)]
        assert 'below' in caplog.text


class TestEmitTable:
    def test_header_only(self):
        assert parse_csv(emit_table([])) == [list(BENCH_CSV_COLUMNS)]

    def test_single_row(self):
        rows = parse_csv(emit_table([fake_report('validate', 16, 2, 'optimized', 0.25, checksum=3.0)]))
        assert len(rows) == 2
        assert rows[1][:6] == ['validate', '16', '2', 'optimized', '16', '1']
        assert rows[1][6:] == ['0.250000', '0.250000', '0.250000', '3.0']

    def test_rows_sorted(self):
        reports = [fake_report('validate', 16, 1, 'optimized', 1.0), fake_report('mantel', 16, 1, 'naive', 1.0),
                   fake_report('center', 32, 1, 'optimized', 1.0), fake_report('center', 32, 1, 'naive', 1.0),
                   fake_report('center', 16, 4, 'naive', 1.0)]
        rows = parse_csv(emit_table(reports))[1:]
        assert [(r[0], r[1], r[2], r[3]) for r in rows] == [
            ('center', '16', '4', 'naive'),
            ('center', '32', '1', 'naive'),
            ('center', '32', '1', 'optimized'),
            ('mantel', '16', '1', 'naive'),
            ('validate', '16', '1', 'optimized'),
        ]

    def test_text_table(self):
        reports = [fake_report('center', 1024, 4, 'naive', 3.0), fake_report('center', 1024, 4, 'optimized', 1.5),
                   fake_report('mantel', 64, 1, 'naive', 0.5)]
        text = emit_table(reports, fmt='text')
        assert 'center, 4 cores - 1024 x 1024' in text
        assert '8.0' in text
        assert '2.0x' in text
        assert 'speedup' in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_table([], fmt='json')
