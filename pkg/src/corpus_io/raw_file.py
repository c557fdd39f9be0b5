import hashlib
from dataclasses import dataclass
from pathlib import Path

from errors import CorpusParseError


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class RawFile:
    path: str
    data: bytes

    @classmethod
    def read(cls, path) -> "RawFile":
        return cls(path=str(path), data=Path(path).read_bytes())

    @classmethod
    def from_text(cls, text: str, path: str = "<memory>") -> "RawFile":
        return cls(path=path, data=text.encode("utf-8"))

    @property
    def checksum(self) -> str:
        return sha256_hex(self.data)

    def text(self) -> str:
        """UTF-8 decoded content with line endings normalized to \\n."""
        try:
            decoded = self.data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorpusParseError(f"invalid UTF-8 in {self.path} at byte offset {e.start}") from e
        return decoded.replace("\r\n", "\n").replace("\r", "\n")
