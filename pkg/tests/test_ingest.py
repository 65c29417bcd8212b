import numpy as np
import pytest

from txdiff.ingest import (
    AlignmentSet,
    NoAlignment,
    ParseError,
    ReadSet,
    TranscriptCatalog,
    load_alignment_set,
    parse_alignments,
    parse_catalog,
    uniform_alignment_prob,
    write_alignments,
    write_catalog,
)


class TestUniformProb:
    def test_values(self):
        assert uniform_alignment_prob(100, 10) == 1 / 91
        assert uniform_alignment_prob(50, 50) == 1.0
        assert uniform_alignment_prob(50, 26) == 1 / 25

    def test_read_longer_than_transcript(self):
        with pytest.raises(NoAlignment):
            uniform_alignment_prob(10, 11)


@pytest.fixture
def catalog_file(tmp_path):
    p = tmp_path / "catalog.tsv"
    p.write_text("# two transcripts\nT1\t100\nT2\t50\n", encoding="utf-8")
    return p


class TestCatalog:
    def test_parse(self, catalog_file):
        cat = parse_catalog(catalog_file)
        assert cat.ids == ["T1", "T2"]
        assert cat.lengths.tolist() == [100, 50]

    def test_duplicate_ids(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("T1\t10\nT1\t20\n", encoding="utf-8")
        with pytest.raises(ParseError):
            parse_catalog(p)

    def test_bad_length(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("T1\tten\n", encoding="utf-8")
        with pytest.raises(ParseError, match="bad.tsv:1"):
            parse_catalog(p)


class TestAlignmentParsing:
    def test_minimal_precomputed(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t2\tT1:0.5;T2:0.25\n", encoding="utf-8")
        rs = parse_alignments(p, cat)
        assert rs.n_reads == 1
        tr, prob = rs.read(0)
        assert tr.tolist() == [0, 1]
        assert prob.tolist() == [0.5, 0.25]

    def test_uniform_mode(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t2\tT1:10;T2:10\n", encoding="utf-8")
        rs = parse_alignments(p, cat, mode="uniform")
        _, prob = rs.read(0)
        np.testing.assert_allclose(prob, [1 / 91, 1 / 41])

    def test_uniform_drops_oversized_pair(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t2\tT1:60;T2:60\n", encoding="utf-8")
        rs = parse_alignments(p, cat, mode="uniform")
        tr, prob = rs.read(0)
        assert tr.tolist() == [0]  # the length-50 target cannot host a 60-mer
        np.testing.assert_allclose(prob, [1 / 41])

    def test_unknown_transcript_names_line(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t1\tT1:0.5\nr2\t1\tTX:0.5\n", encoding="utf-8")
        with pytest.raises(ParseError, match=r":2: unknown transcript id 'TX'"):
            parse_alignments(p, cat)

    def test_duplicate_transcript_in_read(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t2\tT1:0.5;T1:0.5\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            parse_alignments(p, cat)

    def test_nonpositive_probability(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t1\tT1:0.0\n", encoding="utf-8")
        with pytest.raises(ParseError, match="non-positive"):
            parse_alignments(p, cat)

    def test_count_mismatch(self, tmp_path, catalog_file):
        cat = parse_catalog(catalog_file)
        p = tmp_path / "a.tsv"
        p.write_text("r1\t3\tT1:0.5\n", encoding="utf-8")
        with pytest.raises(ParseError, match="declared 3"):
            parse_alignments(p, cat)


class TestRoundTrip:
    def test_serialize_parse_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        cat = TranscriptCatalog([f"T{i}" for i in range(6)], rng.integers(60, 200, 6))
        ids, sizes, tr, prob = [], [], [], []
        for i in range(40):
            n = rng.integers(1, 4)
            targets = rng.choice(6, size=n, replace=False)
            ids.append(f"r{i}")
            sizes.append(n)
            tr.extend(targets)
            prob.extend(rng.uniform(1e-8, 1.0, size=n))
        rs = ReadSet(ids, np.concatenate([[0], np.cumsum(sizes)]), tr, prob)
        path = tmp_path / "a.tsv"
        write_alignments(path, rs, cat)
        rs2 = parse_alignments(path, cat)
        assert rs2 == rs

    def test_pooling_and_totals(self, tmp_path):
        cat_path = tmp_path / "cat.tsv"
        cat_path.write_text("T1\t100\nT2\t100\n", encoding="utf-8")
        (tmp_path / "a1.tsv").write_text("r1\t1\tT1:0.5\n", encoding="utf-8")
        (tmp_path / "a2.tsv").write_text("r2\t1\tT2:0.5\nr3\t1\tT1:0.1\n", encoding="utf-8")
        (tmp_path / "b1.tsv").write_text("q1\t1\tT2:0.9\n", encoding="utf-8")
        aset = load_alignment_set(
            cat_path, [tmp_path / "a1.tsv", tmp_path / "a2.tsv"], [tmp_path / "b1.tsv"]
        )
        assert aset.r == 3 and aset.s == 1
        assert aset.reads_a.ids == ["r1", "r2", "r3"]

    def test_catalog_round_trip(self, tmp_path):
        cat = TranscriptCatalog(["A", "B"], [10, 20])
        p = tmp_path / "cat.tsv"
        write_catalog(p, cat)
        assert parse_catalog(p) == cat
