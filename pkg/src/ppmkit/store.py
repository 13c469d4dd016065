"""Append-only versioned policy store on the local filesystem.

Layout under the store root:

    <vendor>/<policy>/<n>.ppm     canonical text of version n (1-based)
    <vendor>/<policy>/index       one line per version:
                                  "<n>\t<rfc3339 utc timestamp>\t<sha256 hex>"
    <vendor>/<policy>/.lock       advisory lock taken for every put

Versions are immutable once written. Writes go to a temporary file in the
same directory followed by an atomic rename, so a crash mid-write never
leaves a truncated version visible.
"""

from __future__ import annotations

import datetime
import hashlib
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from filelock import FileLock

from ppmkit import parser, printer
from ppmkit.model import PolicyInstance

_SLUG_RE = re.compile(r"^[a-z0-9-]+$")


class StoreError(Exception):
    pass


class InvalidKeyError(StoreError):
    pass


class UnknownPolicyError(StoreError):
    pass


class UnknownVersionError(StoreError):
    pass


class DuplicateVersionError(StoreError):
    """The exact same canonical text is already the latest stored version."""


class CorruptStoreError(StoreError):
    pass


@dataclass(frozen=True)
class PolicyKey:
    vendor: str
    policy: str

    def __post_init__(self) -> None:
        for part in (self.vendor, self.policy):
            if not _SLUG_RE.match(part):
                raise InvalidKeyError(
                    f"key part {part!r} must match [a-z0-9-]+"
                )

    def __str__(self) -> str:
        return f"{self.vendor}/{self.policy}"


@dataclass(frozen=True)
class VersionInfo:
    version: int
    timestamp: str
    digest: str

    def to_obj(self) -> dict:
        return {
            "version": self.version,
            "timestamp": self.timestamp,
            "digest": self.digest,
        }


@dataclass(frozen=True)
class StoredPolicy:
    key: PolicyKey
    info: VersionInfo
    text: str

    @property
    def instance(self) -> PolicyInstance:
        result = parser.parse(self.text, source_name=str(self.key))
        if result.instance is None:
            raise CorruptStoreError(f"stored version {self.info.version} of {self.key} no longer parses")
        return result.instance


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _now_rfc3339() -> str:
    return (
        datetime.datetime.now(datetime.timezone.utc)
        .replace(microsecond=0)
        .isoformat()
        .replace("+00:00", "Z")
    )


class PolicyStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, key: PolicyKey) -> Path:
        return self.root / key.vendor / key.policy

    def _read_index(self, key: PolicyKey) -> list[VersionInfo]:
        index_path = self._dir(key) / "index"
        if not index_path.exists():
            return []
        infos: list[VersionInfo] = []
        for lineno, line in enumerate(index_path.read_text(encoding="utf-8").splitlines(), 1):
            parts = line.split("\t")
            if len(parts) != 3 or not parts[0].isdigit():
                raise CorruptStoreError(f"{index_path}:{lineno}: malformed index line")
            infos.append(VersionInfo(int(parts[0]), parts[1], parts[2]))
        for expected, info in enumerate(infos, 1):
            if info.version != expected:
                raise CorruptStoreError(f"{index_path}: version gap at {info.version}")
        return infos

    def _atomic_write(self, path: Path, data: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def put(self, key: PolicyKey, instance: PolicyInstance) -> VersionInfo:
        """Append a new version. Rejects a put whose canonical text equals
        the latest stored version, so retries are safe no-ops to detect."""
        text = printer.print_canonical(instance)
        directory = self._dir(key)
        directory.mkdir(parents=True, exist_ok=True)
        with FileLock(str(directory / ".lock")):
            infos = self._read_index(key)
            digest = _digest(text)
            if infos and infos[-1].digest == digest:
                raise DuplicateVersionError(
                    f"{key}: identical to stored version {infos[-1].version}"
                )
            info = VersionInfo(len(infos) + 1, _now_rfc3339(), digest)
            self._atomic_write(directory / f"{info.version}.ppm", text)
            index_lines = [
                f"{i.version}\t{i.timestamp}\t{i.digest}" for i in infos + [info]
            ]
            self._atomic_write(directory / "index", "\n".join(index_lines) + "\n")
            return info

    def versions(self, key: PolicyKey) -> list[VersionInfo]:
        infos = self._read_index(key)
        if not infos:
            raise UnknownPolicyError(f"no stored policy {key}")
        return infos

    def get(self, key: PolicyKey, version: Optional[int] = None) -> StoredPolicy:
        infos = self.versions(key)
        if version is None:
            info = infos[-1]
        elif 1 <= version <= len(infos):
            info = infos[version - 1]
        else:
            raise UnknownVersionError(f"{key} has no version {version}")
        path = self._dir(key) / f"{info.version}.ppm"
        if not path.exists():
            raise CorruptStoreError(f"{path} listed in index but missing")
        text = path.read_text(encoding="utf-8")
        if _digest(text) != info.digest:
            raise CorruptStoreError(f"{path} does not match its recorded digest")
        return StoredPolicy(key=key, info=info, text=text)

    def list_policies(self) -> list[tuple[PolicyKey, VersionInfo]]:
        """All stored policies with their latest version, sorted by key."""
        result: list[tuple[PolicyKey, VersionInfo]] = []
        if not self.root.exists():
            return result
        for vendor_dir in sorted(self.root.iterdir()):
            if not vendor_dir.is_dir():
                continue
            for policy_dir in sorted(vendor_dir.iterdir()):
                if not (policy_dir / "index").exists():
                    continue
                key = PolicyKey(vendor_dir.name, policy_dir.name)
                infos = self._read_index(key)
                if infos:
                    result.append((key, infos[-1]))
        return result
