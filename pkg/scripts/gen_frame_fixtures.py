#!/usr/bin/env python3
"""Regenerate the golden frame byte fixtures under fixtures/frames/.

The fixtures pin the wire layout together with the bundled stopword list
(whose digest prefix rides in every header). Regenerate only on a
deliberate, versioned protocol change.
"""

from pathlib import Path

from semcom.dou import MeaningSelection
from semcom.lexicon import SynsetId
from semcom.protocol import (
    AckFrame,
    CloseFrame,
    DataFrame,
    DouReportFrame,
    FrameCodec,
    NackFrame,
    ParaphraseFrame,
    RetryFrame,
    compute_checksum,
)

OUT = Path(__file__).resolve().parents[1] / "fixtures" / "frames"


def frames():
    sel = MeaningSelection((SynsetId("n", 1001), SynsetId("n", 2002)))
    checksum = compute_checksum(sel)
    alt = MeaningSelection((SynsetId("n", 1002), SynsetId("n", 2002)))
    alt_checksum = compute_checksum(alt)
    empty = compute_checksum(MeaningSelection(()))
    yield "data_two_entries", DataFrame("the bank is steep", checksum.entries, checksum.digest)
    yield "data_empty_selection", DataFrame("nothing to choose", empty.entries, empty.digest)
    yield "ack", AckFrame()
    yield "nack_two_entries", NackFrame(alt_checksum.entries, alt_checksum.digest)
    yield "paraphrase", ParaphraseFrame("the depository institution is steep")
    yield "dou_report", DouReportFrame(0.7, 0.9)
    yield "retry", RetryFrame("the lender is steep", checksum.entries[:1], compute_checksum(MeaningSelection(checksum.entries[:1])).digest)
    yield "close", CloseFrame()


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    codec = FrameCodec()
    for name, frame in frames():
        path = OUT / f"{name}.bin"
        path.write_bytes(codec.encode(frame))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
