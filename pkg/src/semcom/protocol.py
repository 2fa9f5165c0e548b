"""Feedback wire protocol: semantic checksums, frames, and session machines.

A session is one sender and one receiver over a reliable ordered duplex
channel. Each round the sender transmits a sentence plus its meaning
selection and a checksum over it; the receiver answers with a checksum
verdict (and, on mismatch, its own full selection so the word-level score
is computable), then offers its reconstruction of the sentence. The sender
scores both levels, reports them, and either retries with a better
candidate transmission or closes.

Frame layout (all integers big-endian):

    magic "SMCM" | version 0x01 | frame type | stopword digest[0:4] |
    payload length u32 | payload

The stopword-digest prefix makes a silently diverged preprocessing
configuration a visible wire error instead of a corrupted score.
"""

from __future__ import annotations

import hashlib
import queue
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional, Protocol as TypingProtocol

from .dou import DouReport, MeaningSelection, difficulty_vector, match_vector, sdou, wdou
from .lexicon import LexicalDatabase, SynsetId
from .paraphrase import (
    DEFAULT_TOP_K,
    DEFAULT_VARIANT_COUNT,
    ParaphraseProvider,
    filter_top_k,
    select_best_transmission,
)
from .pipeline import extract_word_units, stopword_digest
from .similarity import EmbeddingProvider

MAGIC = b"SMCM"
VERSION = 0x01
HEADER_SIZE = 14
MAX_PAYLOAD = (1 << 32) - 1
MAX_U16 = (1 << 16) - 1


class FrameType(IntEnum):
    DATA = 0x01
    CHECKSUM_ACK = 0x02
    CHECKSUM_NACK = 0x03
    PARAPHRASE = 0x04
    DOU_REPORT = 0x05
    RETRY = 0x06
    CLOSE = 0x07


class FrameError(ValueError):
    pass


class BadMagic(FrameError):
    pass


class UnknownVersion(FrameError):
    pass


class UnknownFrameType(FrameError):
    pass


class StopwordDigestMismatch(FrameError):
    """The two parties are not running the same stopword list."""


class Truncated(FrameError):
    pass


class LengthOverflow(FrameError):
    pass


class PayloadError(FrameError):
    pass


class UnresolvedEntryError(ValueError):
    """A checksum was requested over a selection with unresolved entries."""


class ChannelClosed(ConnectionError):
    pass


class SessionError(RuntimeError):
    """The peer broke a protocol precondition (e.g. diverging pipelines)."""


# --- semantic checksum ------------------------------------------------------


@dataclass(frozen=True)
class SemanticChecksum:
    entries: tuple[SynsetId, ...]
    digest: bytes


def canonical_entries(entries) -> str:
    return ";".join(f"{sid.pos}:{sid.offset:08d}" for sid in entries)


def compute_checksum(selection: MeaningSelection) -> SemanticChecksum:
    """SHA-256 over the canonical rendering of an entirely resolved selection."""
    if not selection.resolved:
        raise UnresolvedEntryError("cannot checksum a selection with unresolved entries")
    entries = tuple(selection.choices)
    if len(entries) > MAX_U16:
        raise LengthOverflow(f"{len(entries)} checksum entries exceed the wire limit")
    digest = hashlib.sha256(canonical_entries(entries).encode("utf-8")).digest()
    return SemanticChecksum(entries, digest)


# --- frames -----------------------------------------------------------------


@dataclass(frozen=True)
class DataFrame:
    sentence: str
    entries: tuple[SynsetId, ...]
    digest: bytes
    frame_type = FrameType.DATA


@dataclass(frozen=True)
class RetryFrame:
    sentence: str
    entries: tuple[SynsetId, ...]
    digest: bytes
    frame_type = FrameType.RETRY


@dataclass(frozen=True)
class AckFrame:
    frame_type = FrameType.CHECKSUM_ACK


@dataclass(frozen=True)
class NackFrame:
    entries: tuple[SynsetId, ...]
    digest: bytes
    frame_type = FrameType.CHECKSUM_NACK


@dataclass(frozen=True)
class ParaphraseFrame:
    sentence: str
    frame_type = FrameType.PARAPHRASE


@dataclass(frozen=True)
class DouReportFrame:
    sim_w: float
    sim_s: float
    frame_type = FrameType.DOU_REPORT


@dataclass(frozen=True)
class CloseFrame:
    frame_type = FrameType.CLOSE


Frame = (DataFrame, RetryFrame, AckFrame, NackFrame, ParaphraseFrame, DouReportFrame, CloseFrame)


def _encode_sentence(sentence: str) -> bytes:
    raw = sentence.encode("utf-8")
    if len(raw) > MAX_U16:
        raise LengthOverflow(f"sentence of {len(raw)} bytes exceeds the u16 field")
    return struct.pack(">H", len(raw)) + raw


def _encode_entries(entries) -> bytes:
    if len(entries) > MAX_U16:
        raise LengthOverflow(f"{len(entries)} entries exceed the u16 field")
    parts = [struct.pack(">H", len(entries))]
    for sid in entries:
        parts.append(sid.pos.encode("ascii") + struct.pack(">I", sid.offset))
    return b"".join(parts)


def _check_digest(digest: bytes) -> bytes:
    if len(digest) != 32:
        raise PayloadError(f"checksum digest must be 32 bytes, got {len(digest)}")
    return digest


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise Truncated(f"payload ended {self._pos + n - len(self._data)} bytes early")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def sentence(self) -> str:
        return self.take(self.u16()).decode("utf-8")

    def entries(self) -> tuple[SynsetId, ...]:
        count = self.u16()
        out = []
        for _ in range(count):
            pos = self.take(1).decode("ascii", errors="replace")
            offset = self.u32()
            try:
                out.append(SynsetId(pos, offset))
            except ValueError as exc:
                raise PayloadError(str(exc)) from None
        return tuple(out)

    def finish(self):
        if self._pos != len(self._data):
            raise PayloadError(f"{len(self._data) - self._pos} unexpected trailing payload bytes")


class FrameCodec:
    """Encodes and decodes frames under one stopword-list digest."""

    def __init__(self, stopword_sha256: Optional[bytes] = None):
        digest = stopword_digest() if stopword_sha256 is None else stopword_sha256
        if len(digest) < 4:
            raise ValueError("stopword digest must provide at least 4 bytes")
        self.digest_prefix = bytes(digest[:4])

    def encode(self, frame) -> bytes:
        kind = frame.frame_type
        if kind in (FrameType.DATA, FrameType.RETRY):
            payload = _encode_sentence(frame.sentence) + _encode_entries(frame.entries) + _check_digest(frame.digest)
        elif kind == FrameType.CHECKSUM_NACK:
            payload = _encode_entries(frame.entries) + _check_digest(frame.digest)
        elif kind == FrameType.PARAPHRASE:
            payload = _encode_sentence(frame.sentence)
        elif kind == FrameType.DOU_REPORT:
            payload = struct.pack(">dd", frame.sim_w, frame.sim_s)
        elif kind in (FrameType.CHECKSUM_ACK, FrameType.CLOSE):
            payload = b""
        else:  # pragma: no cover - frame classes enumerate the types
            raise UnknownFrameType(str(kind))
        if len(payload) > MAX_PAYLOAD:
            raise LengthOverflow(f"payload of {len(payload)} bytes")
        header = MAGIC + bytes((VERSION, kind)) + self.digest_prefix + struct.pack(">I", len(payload))
        return header + payload

    def decode(self, data: bytes):
        if len(data) < HEADER_SIZE:
            raise Truncated(f"frame of {len(data)} bytes is shorter than the header")
        if data[:4] != MAGIC:
            raise BadMagic(data[:4].hex())
        if data[4] != VERSION:
            raise UnknownVersion(f"version {data[4]:#04x}")
        try:
            kind = FrameType(data[5])
        except ValueError:
            raise UnknownFrameType(f"frame type {data[5]:#04x}") from None
        if data[6:10] != self.digest_prefix:
            raise StopwordDigestMismatch(
                f"peer stopword digest {data[6:10].hex()} != local {self.digest_prefix.hex()}"
            )
        (length,) = struct.unpack(">I", data[10:14])
        payload = data[HEADER_SIZE:]
        if len(payload) < length:
            raise Truncated(f"payload has {len(payload)} of {length} bytes")
        if len(payload) > length:
            raise PayloadError(f"{len(payload) - length} bytes beyond the declared payload")
        reader = _Reader(payload)
        if kind in (FrameType.DATA, FrameType.RETRY):
            sentence = reader.sentence()
            entries = reader.entries()
            digest = reader.take(32)
            frame = (DataFrame if kind == FrameType.DATA else RetryFrame)(sentence, entries, digest)
        elif kind == FrameType.CHECKSUM_NACK:
            frame = NackFrame(reader.entries(), reader.take(32))
        elif kind == FrameType.PARAPHRASE:
            frame = ParaphraseFrame(reader.sentence())
        elif kind == FrameType.DOU_REPORT:
            sim_w, sim_s = struct.unpack(">dd", reader.take(16))
            frame = DouReportFrame(sim_w, sim_s)
        elif kind == FrameType.CHECKSUM_ACK:
            frame = AckFrame()
        else:
            frame = CloseFrame()
        reader.finish()
        return frame


# --- channels ---------------------------------------------------------------


class Channel(TypingProtocol):
    def send(self, data: bytes) -> None:
        ...

    def recv(self) -> bytes:
        ...


class QueueChannel:
    """One endpoint of an in-process duplex pair; safe across threads."""

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, data: bytes) -> None:
        self._outbox.put(data)

    def recv(self) -> bytes:
        item = self._inbox.get()
        if item is None:
            raise ChannelClosed("peer hung up")
        return item

    def close(self) -> None:
        self._outbox.put(None)


def channel_pair() -> tuple[QueueChannel, QueueChannel]:
    a, b = queue.Queue(), queue.Queue()
    return QueueChannel(a, b), QueueChannel(b, a)


class StreamChannel:
    """Frames over a byte stream (socket file or pipe); framing via the header."""

    def __init__(self, reader, writer):
        self._reader = reader
        self._writer = writer

    def send(self, data: bytes) -> None:
        self._writer.write(data)
        self._writer.flush()

    def _read_exact(self, n: int) -> bytes:
        chunks = b""
        while len(chunks) < n:
            piece = self._reader.read(n - len(chunks))
            if not piece:
                raise ChannelClosed("stream ended mid-frame" if chunks else "stream closed")
            chunks += piece
        return chunks

    def recv(self) -> bytes:
        header = self._read_exact(HEADER_SIZE)
        (length,) = struct.unpack(">I", header[10:14])
        return header + self._read_exact(length)


# --- session reports and receiver behaviors ---------------------------------


@dataclass(frozen=True)
class SessionReport:
    dou: DouReport
    checksum_matched: bool
    rounds: int
    transcript: tuple
    role: str
    final_sentence: str

    def as_dict(self) -> dict:
        return {
            "role": self.role,
            "rounds": self.rounds,
            "checksum_matched": self.checksum_matched,
            "final_sentence": self.final_sentence,
            "dou": self.dou.as_dict(),
            "transcript": [list(t) for t in self.transcript],
        }


class ReceiverBehavior(TypingProtocol):
    def respond(
        self,
        db: LexicalDatabase,
        sentence: str,
        units,
        sender_selection: MeaningSelection,
        round_index: int,
    ) -> tuple[MeaningSelection, str]:
        ...


class PerfectReceiver:
    """Understands everything: copies the sender's selection, echoes the sentence."""

    def respond(self, db, sentence, units, sender_selection, round_index):
        return MeaningSelection(tuple(sender_selection.choices)), sentence


# --- policies ----------------------------------------------------------------


@dataclass(frozen=True)
class SenderPolicy:
    max_rounds: int = 3
    f_threshold: float = 0.1
    variant_count: int = DEFAULT_VARIANT_COUNT
    top_k: int = DEFAULT_TOP_K
    seed: int = 0
    reference_mode: str = "paraphrase"  # "paraphrase" or "original"
    retry_trial: Optional[Callable[[str], DouReport]] = None


@dataclass(frozen=True)
class Providers:
    embedder: EmbeddingProvider
    paraphraser: ParaphraseProvider


def _session_sim_w(units, v=None):
    """Eq.-style word score; a unit-less sentence is vacuously understood."""
    if not units:
        return 1.0, []
    u = [unit.importance for unit in units]
    d = difficulty_vector(units)
    if v is None:
        v = [1] * len(units)
    detail = list(zip(v, u, d.values))
    return wdou(v, u, d), detail


def planning_trial(
    db: LexicalDatabase,
    embedder: EmbeddingProvider,
    reference_sentence: str,
) -> Callable[[str], DouReport]:
    """Sender-local candidate scoring used to pick a retry transmission.

    Word level scores the expected agreement of a receiver that guesses
    uniformly (probability 1/f per unit); sentence level scores how well the
    candidate preserves the reference meaning. No receiver interaction.
    """
    ref_vec = embedder.embed([reference_sentence])[0]

    def trial(candidate: str) -> DouReport:
        units = extract_word_units(db, candidate)
        if units:
            u = [unit.importance for unit in units]
            d = difficulty_vector(units).values
            sim_w = sum(ui * di / unit.sense_count for ui, di, unit in zip(u, d, units))
        else:
            sim_w = 1.0
        sim_s = sdou(ref_vec, embedder.embed([candidate])[0])
        return DouReport.build(sim_w, sim_s)

    return trial


# --- state machines ----------------------------------------------------------


class _TranscriptMixin:
    def _note(self, direction: str, frame, nbytes: int):
        self.transcript.append((direction, FrameType(frame.frame_type).name, nbytes))


class SenderMachine(_TranscriptMixin):
    def __init__(
        self,
        db: LexicalDatabase,
        sentence: str,
        selection: Optional[MeaningSelection],
        providers: Providers,
        policy: SenderPolicy = SenderPolicy(),
    ):
        self.db = db
        self.original = sentence
        self.providers = providers
        self.policy = policy
        self.transcript: list = []
        self.rounds = 0
        self.done = False
        self.checksum_matched = False
        self._report: Optional[DouReport] = None
        self._state = "start"
        units = extract_word_units(db, sentence)
        if selection is None:
            selection = MeaningSelection.first_sense(units)
        if len(selection) != len(units):
            raise SessionError(
                f"selection of length {len(selection)} for {len(units)} word units"
            )
        self.units = units
        self.selection = selection
        self.sentence = sentence
        if policy.reference_mode == "original":
            self.reference = sentence
        else:
            self.reference = providers.paraphraser.reference(sentence)
        self._sim_w = 0.0
        self._detail: list = []

    def start(self) -> list:
        if self._state != "start":
            raise SessionError("session already started")
        self.rounds = 1
        self._state = "await_reply"
        return [self._data_frame(DataFrame)]

    def _data_frame(self, cls):
        checksum = compute_checksum(self.selection)
        return cls(self.sentence, checksum.entries, checksum.digest)

    def handle(self, frame) -> list:
        if self.done:
            raise SessionError("session is closed")
        kind = frame.frame_type
        if self._state == "await_reply" and kind == FrameType.CHECKSUM_ACK:
            self.checksum_matched = True
            self._sim_w, self._detail = _session_sim_w(self.units)
            self._state = "await_paraphrase"
            return []
        if self._state == "await_reply" and kind == FrameType.CHECKSUM_NACK:
            self.checksum_matched = False
            receiver_sel = MeaningSelection(tuple(frame.entries))
            if len(receiver_sel) != len(self.selection):
                raise SessionError(
                    f"receiver sent {len(receiver_sel)} entries for {len(self.selection)} units"
                )
            v = match_vector(self.selection, receiver_sel)
            self._sim_w, self._detail = _session_sim_w(self.units, v)
            self._state = "await_paraphrase"
            return []
        if self._state == "await_paraphrase" and kind == FrameType.PARAPHRASE:
            return self._finish_round(frame.sentence)
        raise SessionError(f"unexpected {FrameType(kind).name} in state {self._state}")

    def _finish_round(self, receiver_sentence: str) -> list:
        embedder = self.providers.embedder
        ref_vec, recv_vec, orig_vec = embedder.embed(
            [self.reference, receiver_sentence, self.original]
        )
        sim_s = sdou(ref_vec, recv_vec)
        extra = sdou(orig_vec, recv_vec) if self.reference != self.original else None
        self._report = DouReport.build(
            self._sim_w, sim_s, rounds=self.rounds, word_detail=self._detail, sim_s_vs_original=extra
        )
        out = [DouReportFrame(self._sim_w, sim_s)]
        if self._report.objective_f > self.policy.f_threshold and self.rounds < self.policy.max_rounds:
            out.append(self._retry_frame())
            self._state = "await_reply"
        else:
            out.append(CloseFrame())
            self._state = "done"
            self.done = True
        return out

    def _retry_frame(self) -> RetryFrame:
        policy = self.policy
        variants = self.providers.paraphraser.generate(
            self.original, policy.variant_count, seed=policy.seed
        )
        top = filter_top_k(self.original, variants, self.providers.embedder, policy.top_k)
        trial = policy.retry_trial or planning_trial(self.db, self.providers.embedder, self.reference)
        chosen, _ = select_best_transmission(self.original, [v for v, _ in top], trial)
        self.rounds += 1
        self.sentence = chosen
        self.units = extract_word_units(self.db, chosen)
        self.selection = MeaningSelection.first_sense(self.units)
        return self._data_frame(RetryFrame)

    def report(self) -> SessionReport:
        if self._report is None:
            raise SessionError("session produced no report")
        return SessionReport(
            dou=self._report,
            checksum_matched=self.checksum_matched,
            rounds=self.rounds,
            transcript=tuple(self.transcript),
            role="sender",
            final_sentence=self.sentence,
        )


class ReceiverMachine(_TranscriptMixin):
    def __init__(
        self,
        db: LexicalDatabase,
        behavior: ReceiverBehavior,
        providers: Providers,
    ):
        self.db = db
        self.behavior = behavior
        self.providers = providers
        self.transcript: list = []
        self.rounds = 0
        self.done = False
        self.checksum_matched = False
        self._sim_w = 0.0
        self._detail: list = []
        self._reported: Optional[DouReport] = None
        self._sentence = ""
        self._receiver_sentence = ""
        self._state = "await_data"

    def handle(self, frame) -> list:
        if self.done:
            raise SessionError("session is closed")
        kind = frame.frame_type
        if self._state == "await_data" and kind in (FrameType.DATA, FrameType.RETRY):
            return self._handle_data(frame)
        if self._state == "await_report" and kind == FrameType.DOU_REPORT:
            self._reported = DouReport.build(
                frame.sim_w, frame.sim_s, rounds=self.rounds, word_detail=self._detail
            )
            self._state = "await_data"
            return []
        if kind == FrameType.CLOSE:
            self.done = True
            self._state = "done"
            return []
        raise SessionError(f"unexpected {FrameType(kind).name} in state {self._state}")

    def _handle_data(self, frame) -> list:
        self.rounds += 1
        self._sentence = frame.sentence
        units = extract_word_units(self.db, frame.sentence)
        if len(frame.entries) != len(units):
            raise SessionError(
                f"sender sent {len(frame.entries)} entries but the pipeline yields {len(units)} units"
            )
        sender_sel = MeaningSelection(tuple(frame.entries))
        sel_r, sentence_r = self.behavior.respond(
            self.db, frame.sentence, units, sender_sel, self.rounds - 1
        )
        checksum = compute_checksum(sel_r)
        self.checksum_matched = checksum.digest == frame.digest
        v = match_vector(sender_sel, sel_r)
        self._sim_w, self._detail = _session_sim_w(units, v)
        self._receiver_sentence = sentence_r
        reply = AckFrame() if self.checksum_matched else NackFrame(checksum.entries, checksum.digest)
        self._state = "await_report"
        return [reply, ParaphraseFrame(sentence_r)]

    @property
    def local_sim_w(self) -> float:
        return self._sim_w

    def report(self) -> SessionReport:
        if self._reported is None:
            raise SessionError("session produced no report")
        dou = DouReport.build(
            self._sim_w,
            self._reported.sim_s,
            rounds=self.rounds,
            word_detail=self._detail,
        )
        return SessionReport(
            dou=dou,
            checksum_matched=self.checksum_matched,
            rounds=self.rounds,
            transcript=tuple(self.transcript),
            role="receiver",
            final_sentence=self._receiver_sentence,
        )


# --- session drivers ----------------------------------------------------------


def run_local_session(
    db: LexicalDatabase,
    sentence: str,
    providers: Providers,
    behavior: Optional[ReceiverBehavior] = None,
    selection: Optional[MeaningSelection] = None,
    policy: SenderPolicy = SenderPolicy(),
    codec: Optional[FrameCodec] = None,
) -> tuple[SessionReport, SessionReport]:
    """One full session in-process; frames still pass through the codec."""
    codec = codec or FrameCodec()
    sender = SenderMachine(db, sentence, selection, providers, policy)
    receiver = ReceiverMachine(db, behavior or PerfectReceiver(), providers)
    pending = [(receiver, sender, f) for f in sender.start()]
    while pending:
        target, source, frame = pending.pop(0)
        data = codec.encode(frame)
        source._note("sent", frame, len(data))
        decoded = codec.decode(data)
        target._note("recv", decoded, len(data))
        replies = target.handle(decoded)
        pending.extend((source, target, f) for f in replies)
    return sender.report(), receiver.report()


def _drive(machine, channel: Channel, codec: FrameCodec, opening: list) -> None:
    for frame in opening:
        data = codec.encode(frame)
        channel.send(data)
        machine._note("sent", frame, len(data))
    while not machine.done:
        data = channel.recv()
        frame = codec.decode(data)
        machine._note("recv", frame, len(data))
        for reply in machine.handle(frame):
            raw = codec.encode(reply)
            channel.send(raw)
            machine._note("sent", reply, len(raw))


def sender_run(
    db: LexicalDatabase,
    sentence: str,
    selection: Optional[MeaningSelection],
    providers: Providers,
    policy: SenderPolicy,
    channel: Channel,
    codec: Optional[FrameCodec] = None,
) -> SessionReport:
    codec = codec or FrameCodec()
    machine = SenderMachine(db, sentence, selection, providers, policy)
    _drive(machine, channel, codec, machine.start())
    return machine.report()


def receiver_run(
    db: LexicalDatabase,
    behavior: ReceiverBehavior,
    providers: Providers,
    channel: Channel,
    codec: Optional[FrameCodec] = None,
) -> SessionReport:
    codec = codec or FrameCodec()
    machine = ReceiverMachine(db, behavior, providers)
    _drive(machine, channel, codec, [])
    return machine.report()
