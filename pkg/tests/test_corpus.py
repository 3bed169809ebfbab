import io
import math

import pytest
from hypothesis import given, strategies as st

from phoneseg.core import read_segmentations, write_segmentations
from phoneseg.corpus import (
    BUCKEYE_NONSPEECH,
    OrderingError,
    ParseError,
    UtteranceAnnotation,
    annotation_to_segmentation,
    load_buckeye_dir,
    load_timit_dir,
    parse_buckeye_phones,
    parse_timit_phn,
    sample_validation,
    speaker_split,
    split_buckeye_chunks,
    timit_split,
)

NS = {"SIL"}
HEADER = "signal s01\ntype 0\ncolor 121\nseparator ;\nnfields 1\n#\n"


def speech_time(anns, nonspeech):
    return math.fsum(e - s for a in anns for s, e, lab in a.intervals if lab not in nonspeech)


# --- TIMIT -------------------------------------------------------------------

def test_timit_single_line():
    ann = parse_timit_phn("0 3050 h#\n")
    assert ann.intervals == ((0.0, 0.190625, "h#"),)


def test_timit_empty():
    assert parse_timit_phn("").intervals == ()


def test_timit_two_lines_to_boundaries():
    seg = annotation_to_segmentation(parse_timit_phn("0 160 a\n160 320 b"))
    assert seg.boundaries == (0.0, 0.01, 0.02)


def test_timit_errors():
    with pytest.raises(ParseError, match=":2:"):
        parse_timit_phn("0 160 a\n160 b\n")
    with pytest.raises(ParseError):
        parse_timit_phn("0 1.5 a\n")
    with pytest.raises(OrderingError):
        parse_timit_phn("160 320 b\n0 160 a\n")
    with pytest.raises(OrderingError):
        parse_timit_phn("0 160 a\n100 320 b\n")


def test_timit_dir(fixtures):
    anns = load_timit_dir(fixtures / "timit")
    ids = [a.utterance_id for a in anns]
    assert ids == ["test_mdab0_si1039", "train_fcjf0_sa1", "train_fcjf0_sx127"]
    assert anns[1].speaker_id == "fcjf0"
    sa1 = annotation_to_segmentation(anns[1])
    assert sa1.boundaries[:3] == (0.0, 3050 / 16000, 4559 / 16000)
    assert sa1.boundaries[-1] == 12500 / 16000
    assert len(sa1) == 10


def test_timit_split_keeps_standard_test_set():
    ids = [f"train_s{k}_u" for k in range(40)] + ["test_a_u", "test_b_u"]
    split = timit_split(ids, seed=3)
    assert split["test"] == ["test_a_u", "test_b_u"]
    assert len(split["valid"]) == 4 and len(split["train"]) == 36
    assert timit_split(ids, seed=3) == split


# --- Buckeye -------------------------------------------------------------------

def test_buckeye_reconstruction():
    ann = parse_buckeye_phones(HEADER + "  0.25 121 a\n  0.40 121 b\n")
    assert ann.intervals == ((0.0, 0.25, "a"), (0.25, 0.40, "b"))


def test_buckeye_errors():
    with pytest.raises(OrderingError):
        parse_buckeye_phones(HEADER + "  0.40 121 a\n  0.25 121 b\n")
    with pytest.raises(ParseError, match="header"):
        parse_buckeye_phones("  0.25 121 a\n")
    with pytest.raises(ParseError):
        parse_buckeye_phones(HEADER + "  x 121 a\n")


# golden parse of tests/fixtures/buckeye/s0101a.phones, read off the file by hand:
# comment after ';' ignored, repeated 4.30 record dropped
BUCKEYE_GOLDEN = (
    (0.0, 0.102385, "{B_TRANS}"), (0.102385, 0.48, "SIL"), (0.48, 0.55, "hh"),
    (0.55, 0.62, "ay"), (0.62, 0.70, "m"), (0.70, 0.73, "SIL"), (0.73, 0.80, "ay"),
    (0.80, 0.90, "n"), (0.90, 2.90, "SIL"), (2.90, 3.00, "s"), (3.00, 3.10, "ih"),
    (3.10, 3.18, "k"), (3.18, 3.30, "VOCNOISE"), (3.30, 4.10, "IVER"),
    (4.10, 4.20, "ah"), (4.20, 4.30, "n"), (4.30, 4.90, "{E_TRANS}"),
)


def test_buckeye_fixture_golden(fixtures):
    [ann] = load_buckeye_dir(fixtures / "buckeye")
    assert ann.utterance_id == "s0101a"
    assert ann.speaker_id == "s01"
    assert ann.intervals == BUCKEYE_GOLDEN


def test_buckeye_fixture_chunks(fixtures):
    [ann] = load_buckeye_dir(fixtures / "buckeye")
    chunks = split_buckeye_chunks(ann)
    assert [c.utterance_id for c in chunks] == ["s0101a_000", "s0101a_001", "s0101a_002"]
    assert [c.offset_sec for c in chunks] == pytest.approx([0.46, 2.88, 4.08])
    first = chunks[0].intervals
    assert [lab for _, _, lab in first] == ["SIL", "hh", "ay", "m", "SIL", "ay", "n", "SIL"]
    assert first[0][1] - first[0][0] == pytest.approx(0.02)
    assert first[-1][1] - first[-1][0] == pytest.approx(0.02)
    assert [lab for _, _, lab in chunks[2].intervals] == ["IVER", "ah", "n", "{E_TRANS}"]
    assert speech_time(chunks, BUCKEYE_NONSPEECH) == pytest.approx(0.87, abs=1e-9)


# --- annotation -> segmentation ------------------------------------------------

def test_annotation_to_segmentation():
    ann = UtteranceAnnotation("u", "", ((0, 1, "a"), (1, 2, "b")))
    assert annotation_to_segmentation(ann).boundaries == (0.0, 1.0, 2.0)
    one = UtteranceAnnotation("u", "", ((0, 0.5, "a"),))
    assert annotation_to_segmentation(one).boundaries == (0.0, 0.5)
    # starts plus the final end: the end of a phone followed by a gap is not a boundary
    gap = UtteranceAnnotation("u", "", ((0, 1, "a"), (1.5, 2, "b")))
    assert annotation_to_segmentation(gap).boundaries == (0.0, 1.5, 2.0)
    assert annotation_to_segmentation(UtteranceAnnotation("u")).boundaries == ()


def test_annotation_invariants():
    with pytest.raises(OrderingError):
        UtteranceAnnotation("u", "", ((0, 1, "a"), (0.5, 2, "b")))
    with pytest.raises(OrderingError):
        UtteranceAnnotation("u", "", ((1, 1, "a"),))


# --- chunking ------------------------------------------------------------------

def test_chunk_at_long_silence():
    ann = UtteranceAnnotation("rec", "s01", (
        (0.0, 0.3, "a"), (0.3, 0.6, "b"), (0.6, 2.6, "SIL"), (2.6, 2.9, "c"), (2.9, 3.0, "d"),
    ))
    c0, c1 = split_buckeye_chunks(ann, NS)
    assert c0.intervals == ((0.0, 0.3, "a"), (0.3, 0.6, "b"), (0.6, pytest.approx(0.62), "SIL"))
    assert c1.offset_sec == pytest.approx(2.58)
    assert c1.intervals[0][2] == "SIL"
    assert c1.intervals[0][1] - c1.intervals[0][0] == pytest.approx(0.02)
    assert c1.intervals[-1][1] == pytest.approx(0.42)
    assert c0.speaker_id == c1.speaker_id == "s01"


def test_all_speech_is_single_unchanged_chunk():
    ann = UtteranceAnnotation("rec", "s01", ((0.0, 0.3, "a"), (0.3, 0.6, "b")))
    assert split_buckeye_chunks(ann, NS) == [ann]


def test_short_internal_silence_stays():
    ann = UtteranceAnnotation("rec", "", ((0.0, 0.3, "a"), (0.3, 0.33, "SIL"), (0.33, 0.6, "b")))
    [chunk] = split_buckeye_chunks(ann, NS)
    assert chunk.intervals == ann.intervals


def test_edges_trimmed_even_without_split():
    ann = UtteranceAnnotation("rec", "", ((0.0, 0.3, "SIL"), (0.3, 0.6, "a"), (0.6, 0.7, "SIL")))
    [chunk] = split_buckeye_chunks(ann, NS)
    assert chunk.offset_sec == pytest.approx(0.28)
    assert [lab for *_, lab in chunk.intervals] == ["SIL", "a", "SIL"]
    assert chunk.duration == pytest.approx(0.34)


def test_silence_only_recording_has_no_chunks():
    ann = UtteranceAnnotation("rec", "", ((0.0, 3.0, "SIL"),))
    assert split_buckeye_chunks(ann, NS) == []


def test_empty_nonspeech_set_rejected():
    with pytest.raises(ValueError):
        split_buckeye_chunks(UtteranceAnnotation("rec"), set())


labels = st.sampled_from(["a", "b", "SIL", "NOISE"])
recordings = st.lists(st.tuples(st.floats(0.005, 1.5), labels), min_size=1, max_size=30)


@given(recordings, st.floats(0.05, 1.0), st.sampled_from([0.0, 0.01, 0.02]))
def test_chunking_laws(parts, min_gap, edge):
    t = 0.0
    ivs = []
    for dur, lab in parts:
        ivs.append((t, t + dur, lab))
        t += dur
    ann = UtteranceAnnotation("rec", "", tuple(ivs))
    ns = {"SIL", "NOISE"}
    chunks = split_buckeye_chunks(ann, ns, edge, min_gap)
    assert speech_time(chunks, ns) == pytest.approx(speech_time([ann], ns), abs=1e-9)
    for c in chunks:
        speech = [(s, e) for s, e, lab in c.intervals if lab not in ns]
        assert speech
        assert speech[0][0] - c.intervals[0][0] <= edge + 1e-9
        assert c.intervals[-1][1] - speech[-1][1] <= edge + 1e-9


# --- splits ----------------------------------------------------------------------

@pytest.mark.parametrize("n, sizes", [(40, (32, 4, 4)), (10, (8, 1, 1)), (3, (1, 1, 1))])
def test_speaker_split_sizes(n, sizes):
    sp = speaker_split([f"s{k:02d}" for k in range(n)], seed=7)
    assert (len(sp.train), len(sp.valid), len(sp.test)) == sizes


def test_speaker_split_deterministic():
    spk = [f"s{k:02d}" for k in range(40)]
    assert speaker_split(spk, seed=1) == speaker_split(list(reversed(spk)), seed=1)
    assert speaker_split(spk, seed=1) != speaker_split(spk, seed=2)


def test_speaker_split_errors():
    with pytest.raises(ValueError):
        speaker_split(["a", "b", "c"], ratios=(0.8, 0.1, 0.2))
    with pytest.raises(ValueError):
        speaker_split(["a", "b"])


@given(st.lists(st.text(min_size=1, max_size=4), min_size=3, unique=True), st.integers())
def test_speaker_split_partitions(speakers, seed):
    sp = speaker_split(speakers, seed=seed)
    assert sp.train | sp.valid | sp.test == set(speakers)
    assert not (sp.train & sp.valid or sp.train & sp.test or sp.valid & sp.test)


def test_sample_validation():
    ids = [f"u{k}" for k in range(50)]
    train, valid = sample_validation(ids, 0.1, seed=0)
    assert len(valid) == 5 and len(train) == 45
    assert set(train).isdisjoint(valid)
    assert sample_validation(ids, 0.1, seed=0) == (train, valid)


# --- round trip through canonical JSONL -------------------------------------------

def test_fixture_jsonl_round_trip(fixtures):
    anns = load_timit_dir(fixtures / "timit") + split_buckeye_chunks(
        load_buckeye_dir(fixtures / "buckeye")[0])
    segs = [annotation_to_segmentation(a) for a in anns]
    buf = io.StringIO()
    write_segmentations(segs, buf)
    assert read_segmentations(io.StringIO(buf.getvalue())) == segs
