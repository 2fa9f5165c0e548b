"""HTTP plumbing shared by the remote embedding and paraphrase clients."""

from __future__ import annotations

import requests


class TransportError(ConnectionError):
    """Connection failure or timeout; no partial result is produced."""


class ServerError(RuntimeError):
    """The model server answered with a non-2xx status."""


class ProtocolError(ValueError):
    """The model server answered 2xx but the body violates the wire contract."""


def post_json(endpoint: str, path: str, body: dict, timeout: float) -> dict:
    url = endpoint.rstrip("/") + path
    try:
        response = requests.post(url, json=body, timeout=timeout)
    except (requests.ConnectionError, requests.Timeout) as exc:
        raise TransportError(f"POST {url}: {exc}") from exc
    if not 200 <= response.status_code < 300:
        raise ServerError(f"POST {url}: status {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise ProtocolError(f"POST {url}: body is not JSON") from exc
    if not isinstance(payload, dict):
        raise ProtocolError(f"POST {url}: expected a JSON object")
    return payload
