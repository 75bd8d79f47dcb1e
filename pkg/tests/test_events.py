from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdfkit.core import Calibration, GdfType
from gdfkit.diagnostics import Diagnostics
from gdfkit.errors import CapacityError, DomainError, StructureError
from gdfkit.events import (
    SPARSE_SAMPLE_TYPE,
    EventCodeRegistry,
    EventTable,
    convert_mode,
    describe_event,
    default_event_rate,
    dur_from_sparse_value,
    event_table_position,
    event_table_size,
    extract_sparse_samples,
    flatten_spans,
    pair_mode1_events,
    parse_event_table,
    sparse_value_from_dur,
    write_event_table,
)
from gdfkit.header import ChannelInfo


def mode1(pos, typ, rate=256.0):
    return EventTable(1, rate, np.array(pos, "<u4"), np.array(typ, "<u2"))


def mode3(pos, typ, chn, dur, rate=256.0):
    return EventTable(3, rate, np.array(pos, "<u4"), np.array(typ, "<u2"),
                      np.array(chn, "<u2"), np.array(dur, "<u4"))


class TestPosition:
    def test_formula(self):
        assert event_table_position(2, 10, 8) == 592

    def test_zero_records(self):
        assert event_table_position(4, 0, 8) == 1024

    def test_ongoing_recording_has_no_table(self):
        with pytest.raises(DomainError):
            event_table_position(2, -1, 8)


class TestSerialization:
    def test_empty_mode1_is_8_bytes(self):
        data = write_event_table(EventTable.empty(1, 100.0))
        assert len(data) == 8
        assert data[0] == 1
        parsed = parse_event_table(data)
        assert parsed.n_events == 0

    def test_empty_mode3_is_8_bytes(self):
        assert len(write_event_table(EventTable.empty(3, 100.0))) == 8

    def test_mode3_two_events_is_32_bytes(self):
        t = mode3([1, 5], [0x0300, 0x0411], [0, 2], [0, 100])
        assert len(write_event_table(t)) == 32
        assert event_table_size(3, 2) == 32

    def test_size_formulas(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            nev = int(rng.integers(0, 10_000))
            pos = rng.integers(1, 1 << 31, nev)
            typ = rng.integers(0, 1 << 16, nev)
            t1 = EventTable(1, 128.0, pos, typ)
            assert len(write_event_table(t1)) == 8 + 6 * nev
            t3 = EventTable(3, 128.0, pos, typ,
                            rng.integers(0, 4, nev), rng.integers(0, 1000, nev))
            assert len(write_event_table(t3)) == 8 + 12 * nev

    def test_round_trip(self):
        t = mode3([1, 5, 9], [0x0300, 0x7FFF, 0x0411], [0, 2, 0], [0, 77, 100])
        data = write_event_table(t)
        assert parse_event_table(data) == t
        assert write_event_table(parse_event_table(data)) == data

    def test_one_based_positions(self):
        t = mode1([1], [0x0300])
        assert t.times_seconds()[0] == 0.0

    def test_bad_mode(self):
        data = bytearray(write_event_table(EventTable.empty(1, 1.0)))
        data[0] = 2
        with pytest.raises(StructureError):
            parse_event_table(bytes(data))

    def test_truncated(self):
        data = write_event_table(mode1([1, 2], [3, 4]))
        with pytest.raises(StructureError):
            parse_event_table(data[:-1])
        with pytest.raises(StructureError):
            parse_event_table(data[:5])

    def test_capacity(self):
        oversized = EventTable(1, 1.0, np.ones(1 << 24, "<u4"), np.ones(1 << 24, "<u2"))
        with pytest.raises(CapacityError):
            write_event_table(oversized)

    def test_mode1_rejects_chn(self):
        with pytest.raises(DomainError):
            EventTable(1, 1.0, np.array([1], "<u4"), np.array([1], "<u2"),
                       chn=np.array([0], "<u2"))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 200), st.sampled_from([1, 3]), st.integers(0, 1 << 31))
def test_serialization_identity(nev, mode, seed):
    rng = np.random.default_rng(seed)
    t = EventTable(
        mode, float(rng.integers(1, 10_000)),
        rng.integers(1, 1 << 32, nev, dtype=np.uint64).astype("<u4"),
        rng.integers(0, 1 << 16, nev).astype("<u2"),
        rng.integers(0, 8, nev).astype("<u2") if mode == 3 else None,
        rng.integers(0, 1 << 20, nev).astype("<u4") if mode == 3 else None,
    )
    data = write_event_table(t)
    assert len(data) == event_table_size(mode, nev)
    assert parse_event_table(data) == t


class TestPairing:
    def test_simple_span(self):
        t = mode1([100, 500], [0x0411, 0x8411])
        paired = pair_mode1_events(t)
        assert paired.spans == [type(paired.spans[0])(0x0411, 100, 500)]
        assert paired.spans[0].duration == 400
        assert not paired.orphan_ends

    def test_lone_start_is_open(self):
        diags = Diagnostics()
        paired = pair_mode1_events(mode1([10], [0x0300]), diags)
        assert paired.spans[0].end is None
        assert any(d.rule == "event.open_span" for d in diags)

    def test_orphan_end_diagnosed(self):
        diags = Diagnostics()
        paired = pair_mode1_events(mode1([10], [0x8411]), diags)
        assert paired.orphan_ends == [(0x8411, 10)]
        assert any(d.rule == "event.unmatched_end" for d in diags)

    def test_nested_spans_stack_discipline(self):
        t = mode1([10, 50, 70, 110], [0x0411, 0x0411, 0x8411, 0x8411])
        paired = pair_mode1_events(t)
        assert [(s.start, s.end) for s in paired.spans] == [(10, 110), (50, 70)]

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 10_000),
                              st.integers(0, 0xFFFF)), max_size=40))
    def test_flatten_restores_multiset(self, rows):
        t = mode1([r[0] for r in rows], [r[1] for r in rows])
        flat = flatten_spans(pair_mode1_events(t))
        assert Counter(flat) == Counter((typ, pos) for pos, typ in rows)


class TestConvertMode:
    def test_mode1_to_mode3(self):
        t = mode1([100, 500], [0x0411, 0x8411])
        converted = convert_mode(t, 3)
        assert converted.mode == 3
        assert converted.pos.tolist() == [100]
        assert converted.dur.tolist() == [400]
        assert converted.chn.tolist() == [0]

    def test_mode3_to_mode1(self):
        t = mode3([100], [0x0411], [0], [400])
        converted = convert_mode(t, 1)
        assert converted.pos.tolist() == [100, 500]
        assert converted.typ.tolist() == [0x0411, 0x8411]

    def test_zero_duration_stays_single(self):
        t = mode3([5], [0x0300], [0], [0])
        converted = convert_mode(t, 1)
        assert converted.pos.tolist() == [5]
        assert converted.typ.tolist() == [0x0300]

    def test_sparse_rows_unconvertible(self):
        t = mode3([5], [SPARSE_SAMPLE_TYPE], [1], [42])
        with pytest.raises(DomainError):
            convert_mode(t, 1)

    def test_channel_dropped_warning(self):
        diags = Diagnostics()
        convert_mode(mode3([5], [0x0300], [2], [0]), 1, diags)
        assert any(d.rule == "event.channel_dropped" for d in diags)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 1000), st.integers(0, 50)),
                    max_size=20),
           st.integers(0, 1 << 30))
    def test_mode3_round_trip(self, rows, seed):
        # one code per row: stack pairing cannot round-trip a zero-duration
        # event sitting inside an open span of the same code
        rng = np.random.default_rng(seed)
        typs = rng.choice(np.arange(1, 0x7FFF), size=len(rows),
                          replace=False).tolist()
        t = mode3([r[0] for r in rows], typs, [0] * len(rows),
                  [r[1] for r in rows])
        back = convert_mode(convert_mode(t, 1), 3)
        want = Counter(zip(t.pos.tolist(), t.typ.tolist(), t.dur.tolist()))
        got = Counter(zip(back.pos.tolist(), back.typ.tolist(), back.dur.tolist()))
        assert got == want

    def test_mode3_round_trip_nested_same_code(self):
        t = mode3([10, 20], [0x0411, 0x0411], [0, 0], [100, 30])
        back = convert_mode(convert_mode(t, 1), 3)
        want = Counter([(10, 0x0411, 100), (20, 0x0411, 30)])
        got = Counter(zip(back.pos.tolist(), back.typ.tolist(), back.dur.tolist()))
        assert got == want

    def test_paired_mode1_round_trip(self):
        t = mode1([10, 20, 30, 45], [0x0411, 0x8411, 0x0412, 0x8412])
        back = convert_mode(convert_mode(t, 3), 1)
        assert Counter(zip(back.pos.tolist(), back.typ.tolist())) == \
            Counter(zip(t.pos.tolist(), t.typ.tolist()))


class TestSparseSamples:
    def _channels(self):
        return [
            ChannelInfo(label="eeg", samples_per_record=4, gdf_type=GdfType.INT16),
            ChannelInfo(label="marker", samples_per_record=0, gdf_type=GdfType.UINT32,
                        cal=Calibration(0.0, 1.0, 0.0, 100.0)),
            ChannelInfo(label="temp", samples_per_record=0, gdf_type=GdfType.INT16,
                        cal=Calibration(-50.0, 50.0, -500.0, 500.0)),
        ]

    def test_extract_scaled_midpoint(self):
        t = mode3([10], [SPARSE_SAMPLE_TYPE], [2], [50])
        samples = extract_sparse_samples(t, self._channels())
        (s,) = samples[1]
        assert (s.pos, s.raw, s.physical) == (10, 50, 0.5)

    def test_endpoint_exact(self):
        t = mode3([3], [SPARSE_SAMPLE_TYPE], [2], [100])
        (s,) = extract_sparse_samples(t, self._channels())[1]
        assert s.physical == 1.0

    def test_signed_reinterpretation(self):
        t = mode3([3], [SPARSE_SAMPLE_TYPE], [3], [0xFFFF])
        (s,) = extract_sparse_samples(t, self._channels())[2]
        assert s.raw == -1

    def test_bad_channel_reference(self):
        diags = Diagnostics()
        t = mode3([3, 4], [SPARSE_SAMPLE_TYPE, SPARSE_SAMPLE_TYPE], [0, 1], [1, 1])
        out = extract_sparse_samples(t, self._channels(), diags)
        assert not any(out.values())
        assert sum(d.rule == "event.sparse_channel_invalid" for d in diags) == 2

    def test_value_round_trip(self):
        for gdf_type, values in [
            (GdfType.INT8, [-128, -1, 0, 127]),
            (GdfType.UINT16, [0, 65535]),
            (GdfType.INT24, [-8_388_608, 8_388_607, -1]),
            (GdfType.INT32, [-(1 << 31), (1 << 31) - 1]),
            (GdfType.FLOAT32, [0.5, -2.25]),
        ]:
            for v in values:
                dur = dur_from_sparse_value(v, gdf_type)
                assert 0 <= dur < 1 << 32
                assert sparse_value_from_dur(dur, gdf_type) == v

    def test_wide_types_rejected(self):
        with pytest.raises(DomainError):
            sparse_value_from_dur(0, GdfType.INT64)
        with pytest.raises(DomainError):
            dur_from_sparse_value(0.0, GdfType.FLOAT64)


class TestRegistry:
    def test_builtin_codes(self):
        assert describe_event(0x0300) == "Trigger, start of Trial (unspecific)"
        assert describe_event(0x0000) == "No event"
        assert describe_event(0x7FFF) == "non-equidistant sampled value"

    def test_end_flag(self):
        assert describe_event(0x8101) == "end of: artifact:EOG"
        assert describe_event(0x8411) == "end of: Stage 1"

    def test_unknown(self):
        assert describe_event(0x0223) == "user-defined (0x0223)"

    def test_user_entries_shadow(self):
        reg = EventCodeRegistry({0x0300: "my trigger"})
        assert reg.describe(0x0300) == "my trigger"
        assert reg.describe(0x0301) == "Left - cue onset (BCI experiment)"

    def test_tag1_index_mapping(self):
        reg = EventCodeRegistry()
        reg.add_descriptions(["Left", "Right"])
        assert reg.describe(1) == "Left"
        assert reg.describe(2) == "Right"

    def test_from_text(self):
        reg = EventCodeRegistry.from_text("# comment\n0x0010 blink\n")
        assert reg.describe(0x0010) == "blink"


def test_default_event_rate():
    channels = [
        ChannelInfo(label="a", samples_per_record=16),
        ChannelInfo(label="b", samples_per_record=64),
        ChannelInfo(label="s", samples_per_record=0),
    ]
    assert default_event_rate(channels, 1, 4) == 256.0
    assert default_event_rate([], 1, 1) == 0.0
