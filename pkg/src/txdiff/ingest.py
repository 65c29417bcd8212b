"""Parsing of transcript catalogs and per-read alignment-probability files.

Two-condition input; replicate files of one condition are pooled at load
time.  Probabilities are stored in linear space; samplers move to log space
internally where needed.
"""

import logging

import numpy as np

log = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


class NoAlignment(ValueError):
    """A read longer than its target transcript has no placement."""


def uniform_alignment_prob(transcript_length, read_length):
    """Placement probability under the uniform read-start model.

    A read of length l on a transcript of length L has L - l + 1 possible
    start positions, each equally likely.
    """
    if read_length < 1:
        raise ValueError("read length must be >= 1")
    if read_length > transcript_length:
        raise NoAlignment(
            f"read of length {read_length} exceeds transcript length {transcript_length}"
        )
    return 1.0 / (transcript_length - read_length + 1)


class TranscriptCatalog:
    """Ordered transcript ids with lengths; ids are unique."""

    def __init__(self, ids, lengths):
        self.ids = list(ids)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        if len(self.ids) != self.lengths.size:
            raise ValueError("ids and lengths differ in size")
        if (self.lengths < 1).any():
            raise ValueError("transcript lengths must be >= 1")
        self.index = {t: i for i, t in enumerate(self.ids)}
        if len(self.index) != len(self.ids):
            raise ValueError("duplicate transcript ids")

    @property
    def n(self):
        return len(self.ids)

    def __eq__(self, other):
        return self.ids == other.ids and (self.lengths == other.lengths).all()


class ReadSet:
    """Sparse per-read alignments in CSR-like layout.

    offsets[i]:offsets[i+1] slices the flat (transcript, probability) arrays
    for read i; every read has at least one entry and strictly positive
    probabilities.
    """

    def __init__(self, ids, offsets, tr, prob):
        self.ids = list(ids)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.tr = np.asarray(tr, dtype=np.int32)
        self.prob = np.asarray(prob, dtype=np.float64)
        if self.offsets[0] != 0 or self.offsets[-1] != self.tr.size:
            raise ValueError("inconsistent CSR offsets")
        if (np.diff(self.offsets) < 1).any():
            raise ValueError("every read needs at least one alignment")
        if (self.prob <= 0).any():
            raise ValueError("alignment probabilities must be strictly positive")

    @property
    def n_reads(self):
        return len(self.ids)

    def read(self, i):
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return self.tr[lo:hi], self.prob[lo:hi]

    def __eq__(self, other):
        return (
            self.ids == other.ids
            and self.offsets.shape == other.offsets.shape
            and (self.offsets == other.offsets).all()
            and (self.tr == other.tr).all()
            and (self.prob == other.prob).all()
        )

    @classmethod
    def empty(cls):
        return cls([], [0], [], [])

    @classmethod
    def concat(cls, readsets):
        readsets = list(readsets)
        if not readsets:
            return cls.empty()
        ids = [i for rs in readsets for i in rs.ids]
        sizes = [np.diff(rs.offsets) for rs in readsets]
        offsets = np.concatenate([[0], np.cumsum(np.concatenate(sizes))])
        tr = np.concatenate([rs.tr for rs in readsets])
        prob = np.concatenate([rs.prob for rs in readsets])
        return cls(ids, offsets, tr, prob)

    def subset(self, keep_mask):
        keep = np.flatnonzero(keep_mask)
        ids = [self.ids[i] for i in keep]
        tr, prob, sizes = [], [], []
        for i in keep:
            t, p = self.read(i)
            tr.append(t)
            prob.append(p)
            sizes.append(t.size)
        if not sizes:
            return ReadSet.empty()
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        return ReadSet(ids, offsets, np.concatenate(tr), np.concatenate(prob))


class AlignmentSet:
    """Catalog plus pooled reads for the two conditions."""

    def __init__(self, catalog, reads_a, reads_b):
        self.catalog = catalog
        self.reads_a = reads_a
        self.reads_b = reads_b
        for rs in (reads_a, reads_b):
            if rs.tr.size and (rs.tr.min() < 0 or rs.tr.max() >= catalog.n):
                raise ValueError("alignment transcript index out of range")

    @property
    def r(self):
        return self.reads_a.n_reads

    @property
    def s(self):
        return self.reads_b.n_reads

    def __eq__(self, other):
        return (
            self.catalog == other.catalog
            and self.reads_a == other.reads_a
            and self.reads_b == other.reads_b
        )


def parse_catalog(path):
    ids, lengths = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 2 fields, got {len(parts)}")
            try:
                length = int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"bad length {parts[1]!r}") from None
            if length < 1:
                raise ParseError(path, lineno, "transcript length must be >= 1")
            ids.append(parts[0])
            lengths.append(length)
    try:
        return TranscriptCatalog(ids, lengths)
    except ValueError as exc:
        raise ParseError(path, 0, str(exc)) from None


def parse_alignments(path, catalog, mode="precomputed"):
    """Parse one alignment file into a ReadSet.

    Lines are ``read_id <TAB> n_aligns <TAB> tr:val;tr:val;...`` where val is
    a probability (precomputed mode) or the read length (uniform mode, turned
    into a placement probability against each target).
    """
    if mode not in ("precomputed", "uniform"):
        raise ValueError(f"unknown alignment mode {mode!r}")
    ids, sizes, tr_all, prob_all = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(path, lineno, f"expected 3 fields, got {len(parts)}")
            read_id, n_str, pairs = parts
            try:
                n_aligns = int(n_str)
            except ValueError:
                raise ParseError(path, lineno, f"bad alignment count {n_str!r}") from None
            entries = [e for e in pairs.split(";") if e]
            if len(entries) != n_aligns:
                raise ParseError(
                    path, lineno, f"declared {n_aligns} alignments, found {len(entries)}"
                )
            tr, prob, seen = [], [], set()
            for entry in entries:
                tid, _, val = entry.rpartition(":")
                if not tid:
                    raise ParseError(path, lineno, f"malformed entry {entry!r}")
                k = catalog.index.get(tid)
                if k is None:
                    raise ParseError(path, lineno, f"unknown transcript id {tid!r}")
                if k in seen:
                    raise ParseError(path, lineno, f"duplicate transcript {tid!r} in read")
                seen.add(k)
                if mode == "precomputed":
                    try:
                        p = float(val)
                    except ValueError:
                        raise ParseError(path, lineno, f"bad probability {val!r}") from None
                    if not p > 0:
                        raise ParseError(path, lineno, f"non-positive probability {val!r}")
                else:
                    try:
                        rlen = int(val)
                    except ValueError:
                        raise ParseError(path, lineno, f"bad read length {val!r}") from None
                    try:
                        p = uniform_alignment_prob(int(catalog.lengths[k]), rlen)
                    except NoAlignment as exc:
                        log.warning("%s:%d: dropping alignment of %s to %s: %s",
                                    path, lineno, read_id, tid, exc)
                        continue
                    except ValueError as exc:
                        raise ParseError(path, lineno, str(exc)) from None
                tr.append(k)
                prob.append(p)
            if not tr:
                raise ParseError(path, lineno, f"read {read_id!r} has no usable alignment")
            ids.append(read_id)
            sizes.append(len(tr))
            tr_all.extend(tr)
            prob_all.extend(prob)
    offsets = np.concatenate([[0], np.cumsum(sizes)]) if sizes else np.array([0])
    return ReadSet(ids, offsets, np.array(tr_all, dtype=np.int32), np.array(prob_all))


def load_alignment_set(catalog_path, cond_a_paths, cond_b_paths, mode="precomputed"):
    """Parse the catalog and pool per-condition replicate files."""
    catalog = parse_catalog(catalog_path)
    reads_a = ReadSet.concat([parse_alignments(p, catalog, mode) for p in cond_a_paths])
    reads_b = ReadSet.concat([parse_alignments(p, catalog, mode) for p in cond_b_paths])
    return AlignmentSet(catalog, reads_a, reads_b)


def write_catalog(path, catalog):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, length in zip(catalog.ids, catalog.lengths):
            fh.write(f"{tid}\t{int(length)}\n")


def write_alignments(path, readset, catalog):
    """Serialize in precomputed mode; floats use shortest round-trip repr."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, read_id in enumerate(readset.ids):
            tr, prob = readset.read(i)
            pairs = ";".join(f"{catalog.ids[k]}:{float(p)!r}" for k, p in zip(tr, prob))
            fh.write(f"{read_id}\t{tr.size}\t{pairs}\n")
