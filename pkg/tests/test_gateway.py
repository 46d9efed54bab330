from __future__ import annotations

import json
import threading

import pytest

from medbrain.errors import NoScriptError, ProtocolError, TransportError
from medbrain.gateway import (
    GenerationParams,
    RemoteBackend,
    ScriptRule,
    ScriptedBackend,
    backoff_delay,
)


class TestScriptedBackend:
    def test_substring_rule(self):
        backend = ScriptedBackend([ScriptRule(contains="extract keywords", response="Mpox, PCR")])
        result = backend.complete("please extract keywords from this")
        assert result.text == "Mpox, PCR"
        assert result.backend_id == "scripted"

    def test_exact_rule(self):
        backend = ScriptedBackend([ScriptRule(equals="ping", response="pong")])
        assert backend.complete("ping").text == "pong"
        with pytest.raises(NoScriptError):
            backend.complete("ping ")

    def test_first_matching_rule_wins(self):
        backend = ScriptedBackend(
            [
                ScriptRule(contains="alpha", response="first"),
                ScriptRule(contains="alp", response="second"),
            ]
        )
        assert backend.complete("alpha beta").text == "first"

    def test_default_response(self):
        backend = ScriptedBackend([], default_response="OK")
        assert backend.complete("anything whatsoever").text == "OK"

    def test_no_match_no_default_raises(self):
        backend = ScriptedBackend([ScriptRule(contains="x", response="y")])
        with pytest.raises(NoScriptError):
            backend.complete("nothing relevant")

    def test_pure_function_of_rules_and_prompt(self):
        backend = ScriptedBackend([ScriptRule(contains="a", response="b")])
        texts = {backend.complete("has a in it").text for _ in range(10)}
        assert texts == {"b"}

    def test_empty_prompt_rejected(self):
        backend = ScriptedBackend([], default_response="OK")
        with pytest.raises(ValueError):
            backend.complete("")

    def test_rule_needs_exactly_one_matcher(self):
        with pytest.raises(ValueError):
            ScriptRule(response="r")
        with pytest.raises(ValueError):
            ScriptRule(response="r", contains="a", equals="b")

    def test_from_file(self, tmp_path):
        rules = {
            "rules": [{"contains": "q", "response": "a"}],
            "default": "fallback",
        }
        path = tmp_path / "rules.json"
        path.write_text(json.dumps(rules), encoding="utf-8")
        backend = ScriptedBackend.from_file(path)
        assert backend.complete("a q here").text == "a"
        assert backend.complete("other").text == "fallback"


class TestBackoff:
    def test_schedule_doubles_and_caps(self):
        assert [backoff_delay(i) for i in range(5)] == [0.5, 1.0, 2.0, 4.0, 4.0]


@pytest.fixture()
def completion_server():
    """Chat-completion stub that records requests and can fail on demand."""
    import http.server

    state = {"requests": [], "fail_times": 0, "mode": "ok"}

    class Handler(http.server.BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers["Content-Length"])
            body = json.loads(self.rfile.read(length))
            state["requests"].append(
                {"path": self.path, "body": body,
                 "auth": self.headers.get("Authorization")}
            )
            if state["fail_times"] > 0:
                state["fail_times"] -= 1
                self.send_response(503)
                self.end_headers()
                return
            if state["mode"] == "malformed":
                payload = b'{"unexpected": true}'
            else:
                content = "echo:" + body["messages"][0]["content"]
                payload = json.dumps(
                    {"choices": [{"message": {"role": "assistant", "content": content}}]}
                ).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}", state
    server.shutdown()


def _fast_backend(base_url):
    return RemoteBackend(base_url, "test-model", sleep=lambda _s: None)


class TestRemoteBackend:
    def test_round_trip_and_wire_shape(self, completion_server):
        base, state = completion_server
        backend = _fast_backend(base)
        result = backend.complete("hello there", GenerationParams(max_new_tokens=64))
        assert result.text == "echo:hello there"
        assert result.backend_id == "remote:test-model"
        request = state["requests"][0]
        assert request["path"] == "/v1/chat/completions"
        assert request["body"]["model"] == "test-model"
        assert request["body"]["temperature"] == 0.0
        assert request["body"]["max_tokens"] == 64
        assert request["body"]["messages"] == [{"role": "user", "content": "hello there"}]

    def test_prompt_bytes_not_altered_in_transit(self, completion_server):
        base, state = completion_server
        prompt = "line one\n\n  spaced\ttabbed, ünïcode ∞"
        _fast_backend(base).complete(prompt)
        assert state["requests"][0]["body"]["messages"][0]["content"] == prompt

    def test_retries_then_succeeds(self, completion_server):
        base, state = completion_server
        state["fail_times"] = 2
        result = _fast_backend(base).complete("q", GenerationParams(retries=2))
        assert result.text == "echo:q"
        assert len(state["requests"]) == 3

    def test_attempt_count_never_exceeds_one_plus_retries(self, completion_server):
        base, state = completion_server
        state["fail_times"] = 99
        with pytest.raises(TransportError):
            _fast_backend(base).complete("q", GenerationParams(retries=2))
        assert len(state["requests"]) == 3

    def test_unreachable_endpoint_is_transport_error(self):
        backend = _fast_backend("http://127.0.0.1:9")
        with pytest.raises(TransportError):
            backend.complete("q", GenerationParams(retries=1, timeout=0.2))

    def test_malformed_body_is_protocol_error(self, completion_server):
        base, state = completion_server
        state["mode"] = "malformed"
        with pytest.raises(ProtocolError):
            _fast_backend(base).complete("q")
        assert len(state["requests"]) == 1  # protocol errors are not retried

    def test_empty_prompt_rejected(self, completion_server):
        base, _ = completion_server
        with pytest.raises(ValueError):
            _fast_backend(base).complete("")

    def test_auth_token_sent_but_never_logged(self, completion_server, monkeypatch, capsys):
        base, state = completion_server
        monkeypatch.setenv("MEDBRAIN_LLM_TOKEN", "secret-token-123")
        _fast_backend(base).complete("q")
        assert state["requests"][0]["auth"] == "Bearer secret-token-123"
        out = capsys.readouterr()
        assert "secret-token-123" not in out.out + out.err

    def test_no_auth_header_without_token(self, completion_server, monkeypatch):
        base, state = completion_server
        monkeypatch.delenv("MEDBRAIN_LLM_TOKEN", raising=False)
        _fast_backend(base).complete("q")
        assert state["requests"][0]["auth"] is None


class TestGenerationParams:
    def test_defaults(self):
        params = GenerationParams()
        assert params.temperature == 0.0
        assert params.max_new_tokens == 512
        assert params.timeout == 30.0
        assert params.retries == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            GenerationParams(temperature=-1)
        with pytest.raises(ValueError):
            GenerationParams(max_new_tokens=0)
        with pytest.raises(ValueError):
            GenerationParams(retries=-1)
