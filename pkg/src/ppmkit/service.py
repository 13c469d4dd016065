"""HTTP service exposing validation, storage and analysis.

Every JSON payload is produced by `ppmkit.payloads` and serialized with
`ppmkit.jsonio.dumps`, so responses are byte-identical to the CLI's JSON
output for the same inputs.
"""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import PlainTextResponse

from ppmkit import analysis, jsonio, parser, payloads, rules
from ppmkit.model import PolicyInstance
from ppmkit.store import (
    DuplicateVersionError,
    CorruptStoreError,
    InvalidKeyError,
    PolicyKey,
    PolicyStore,
    StoreError,
    UnknownPolicyError,
    UnknownVersionError,
)

MAX_BODY_BYTES = 5 * 1024 * 1024
DEFAULT_LISTEN = "127.0.0.1:8642"

_KEY_REF_RE = re.compile(r"^([a-z0-9-]+)/([a-z0-9-]+)(?:@(\d+))?$")


def _json_response(obj, status_code: int = 200) -> Response:
    return Response(
        content=payloads.dumps(obj),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str) -> Response:
    return _json_response({"error": message}, status_code)


def create_app(store: Optional[PolicyStore] = None) -> FastAPI:
    if store is None:
        store = PolicyStore(Path(os.environ.get("PPM_STORE", "store")))
    app = FastAPI(title="ppmkit", docs_url=None, redoc_url=None)

    async def read_body(request: Request) -> Optional[str]:
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return None
        try:
            return body.decode("utf-8")
        except UnicodeDecodeError:
            return None

    def load_ref(ref: str):
        """Resolve 'vendor/policy' or 'vendor/policy@n' to an instance."""
        match = _KEY_REF_RE.match(ref)
        if not match:
            raise InvalidKeyError(f"bad policy reference {ref!r}")
        key = PolicyKey(match.group(1), match.group(2))
        version = int(match.group(3)) if match.group(3) else None
        stored = store.get(key, version)
        return key, stored

    @app.post("/api/validate")
    async def validate_endpoint(request: Request):
        text = await read_body(request)
        if text is None:
            return _error(400, "body must be UTF-8 text of at most 5 MiB")
        result = parser.parse(text)
        return _json_response(payloads.validation_obj(result))

    @app.get("/api/rules")
    async def rules_endpoint():
        return _json_response(payloads.rules_obj())

    @app.get("/api/policies")
    async def list_endpoint():
        entries = [(str(key), info) for key, info in store.list_policies()]
        return _json_response(payloads.listing_obj(entries))

    @app.put("/api/policies/{vendor}/{policy}")
    async def put_endpoint(vendor: str, policy: str, request: Request):
        text = await read_body(request)
        if text is None:
            return _error(400, "body must be UTF-8 text of at most 5 MiB")
        try:
            key = PolicyKey(vendor, policy)
        except InvalidKeyError as exc:
            return _error(404, str(exc))
        result = parser.parse(text, source_name=str(key))
        if result.instance is None:
            return _json_response(
                {
                    "error": "document does not parse",
                    "parse_diagnostics": [d.to_obj() for d in result.diagnostics],
                },
                422,
            )
        try:
            info = store.put(key, result.instance)
        except DuplicateVersionError as exc:
            return _error(409, str(exc))
        report = rules.validate(result.instance, result.spans)
        return _json_response(
            payloads.put_obj(str(key), info, report.error_count), 201
        )

    @app.get("/api/policies/{vendor}/{policy}")
    async def get_endpoint(vendor: str, policy: str, request: Request, version: Optional[int] = None):
        try:
            key = PolicyKey(vendor, policy)
            stored = store.get(key, version)
        except (InvalidKeyError, UnknownPolicyError, UnknownVersionError) as exc:
            return _error(404, str(exc))
        accept = request.headers.get("accept", "")
        if "application/json" in accept:
            try:
                instance = stored.instance
            except CorruptStoreError as exc:
                return _error(422, str(exc))
            return _json_response(payloads.policy_obj(str(key), stored.info, instance))
        return PlainTextResponse(stored.text, media_type="text/plain; charset=utf-8")

    @app.get("/api/policies/{vendor}/{policy}/taxonomy")
    async def taxonomy_endpoint(vendor: str, policy: str, version: Optional[int] = None):
        try:
            key = PolicyKey(vendor, policy)
            stored = store.get(key, version)
            instance = stored.instance
        except (InvalidKeyError, UnknownPolicyError, UnknownVersionError) as exc:
            return _error(404, str(exc))
        except CorruptStoreError as exc:
            return _error(422, str(exc))
        return _json_response(payloads.taxonomy_obj(instance))

    @app.get("/api/compare")
    async def compare_endpoint(a: str, b: str):
        try:
            _key_a, stored_a = load_ref(a)
            _key_b, stored_b = load_ref(b)
            instance_a = stored_a.instance
            instance_b = stored_b.instance
        except (InvalidKeyError, UnknownPolicyError, UnknownVersionError) as exc:
            return _error(404, str(exc))
        except CorruptStoreError as exc:
            return _error(422, str(exc))
        return _json_response(payloads.compare_obj(instance_a, instance_b, a, b))

    @app.get("/api/stats")
    async def stats_endpoint(keys: Optional[str] = None):
        instances: list[PolicyInstance] = []
        try:
            if keys:
                refs = [part for part in keys.split(",") if part]
                for ref in refs:
                    _key, stored = load_ref(ref)
                    instances.append(stored.instance)
            else:
                for key, _info in store.list_policies():
                    instances.append(store.get(key).instance)
        except (InvalidKeyError, UnknownPolicyError, UnknownVersionError) as exc:
            return _error(404, str(exc))
        except CorruptStoreError as exc:
            return _error(422, str(exc))
        stats = analysis.corpus_stats(instances)
        return _json_response(payloads.stats_obj(stats, len(instances)))

    return app


def parse_listen(listen: str) -> tuple[str, int]:
    host, _sep, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {listen!r}")
    return host, int(port)


def serve(listen: Optional[str] = None, store_path: Optional[str] = None) -> None:
    import uvicorn

    listen = listen or os.environ.get("PPM_LISTEN", DEFAULT_LISTEN)
    host, port = parse_listen(listen)
    store = PolicyStore(Path(store_path or os.environ.get("PPM_STORE", "store")))
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
