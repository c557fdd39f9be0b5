from typing import Optional

from corpus_io.babi import parse_babi, serialize_babi, write_origin_sidecar
from corpus_io.raw_file import RawFile, sha256_hex
from corpus_io.smd import parse_smd, serialize_smd
from dialog_model.dialog import DialogCorpus

FORMATS = ("babi", "smd")


def parse_corpus(file: RawFile, fmt: str, origin_sidecar: Optional[RawFile] = None) -> DialogCorpus:
    if fmt == "babi":
        return parse_babi(file, origin_sidecar=origin_sidecar)
    if fmt == "smd":
        return parse_smd(file)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def serialize(corpus: DialogCorpus) -> bytes:
    if corpus.source_format == "babi":
        return serialize_babi(corpus)
    return serialize_smd(corpus)


def corpus_digest(corpus: DialogCorpus) -> str:
    """Checksum of the serialized corpus, including bAbI origin flags."""
    data = serialize(corpus)
    if corpus.source_format == "babi":
        data += b"\0" + write_origin_sidecar(corpus)
    return sha256_hex(data)
