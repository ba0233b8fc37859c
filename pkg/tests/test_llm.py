"""Tests for nvpersona.llm — gateway, backends and clip descriptions."""

import json
from pathlib import Path

import httpx
import pytest

from nvpersona.behavior.schema import ActionSchema
from nvpersona.errors import (
    AuthMissing,
    ConfigError,
    GatewayTimeout,
    InvalidEndpoint,
    PartialCatalog,
    ScriptExhausted,
    TransportError,
)
from nvpersona.llm.backends import (
    BackendConfig,
    BackendKind,
    HttpBackend,
    ReplayBackend,
    ScriptedBackend,
    build_backend,
)
from nvpersona.llm.describe import (
    ClipManifest,
    ClipSpec,
    generate_descriptions,
    load_clip_manifest,
)
from nvpersona.llm.gateway import ChatMessage, ChatRequest, Gateway, complete
from nvpersona.persona.catalog import load_catalog
from nvpersona.simulation.config import CONFIG_DIR

KEY_ENV = "NVPERSONA_TEST_KEY"


def _request(**context: str) -> ChatRequest:
    return ChatRequest(
        messages=(ChatMessage("system", "Be brief."), ChatMessage("user", "Hi")),
        context=context,
    )


def _reply(content: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})


class _Flaky:
    """Answers ``good`` requests, then fails every later one."""

    def __init__(self, good: int) -> None:
        self.good = good
        self.calls = 0

    @property
    def descriptor(self) -> str:
        return "flaky"

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        if self.calls > self.good:
            raise TransportError(503, "down")
        return f"Movement number {self.calls}."


class TestChatRequest:
    """Tests for the request shape."""

    def test_needs_system_first(self) -> None:
        with pytest.raises(ValueError):
            ChatRequest(messages=(ChatMessage("user", "Hi"),))

    def test_needs_messages(self) -> None:
        with pytest.raises(ValueError):
            ChatRequest(messages=())

    def test_wire_omits_unset_fields(self) -> None:
        body = _request(trial_id="t").to_wire()
        assert set(body) == {"model", "messages"}
        assert body["messages"][0] == {"role": "system", "content": "Be brief."}

    def test_wire_with_temperature_and_seed(self) -> None:
        request = ChatRequest(
            messages=(ChatMessage("system", "x"),), temperature=0.7, seed=5
        )
        assert request.to_wire()["temperature"] == 0.7
        assert request.to_wire()["seed"] == 5


class TestScriptedBackend:
    """Tests for canned responses."""

    def test_in_order(self) -> None:
        backend = ScriptedBackend.from_responses(["a", "b"])
        assert backend.complete(_request()) == "a"
        assert backend.complete(_request()) == "b"
        with pytest.raises(ScriptExhausted):
            backend.complete(_request())

    def test_cycle(self) -> None:
        backend = ScriptedBackend.from_responses(["a", "b"], cycle=True)
        replies = [backend.complete(_request()) for _ in range(5)]
        assert replies == ["a", "b", "a", "b", "a"]

    def test_sessions_are_independent(self) -> None:
        backend = ScriptedBackend.from_responses(["a", "b"])
        assert backend.complete(_request(trial_id="t1")) == "a"
        assert backend.complete(_request(trial_id="t2")) == "a"
        assert backend.complete(_request(trial_id="t1")) == "b"

    def test_filters(self, tmp_path: Path) -> None:
        script = tmp_path / "script.jsonl"
        lines = [
            {"script": {"cycle": False}},
            {"content": "seller says hi", "speaker": "generic"},
            {
                "content": {"text": "Hi!", "face": ["Smile Broadly"]},
                "speaker": "personality",
                "personality": "extrovert",
            },
            "anyone",
        ]
        script.write_text("\n".join(json.dumps(x) for x in lines) + "\n")
        backend = ScriptedBackend.from_file(script)
        ext = {"speaker": "personality", "personality": "extrovert"}
        assert json.loads(backend.complete(_request(**ext))) == {
            "text": "Hi!",
            "face": ["Smile Broadly"],
        }
        assert backend.complete(_request(speaker="generic")) == "seller says hi"
        intro = {"speaker": "personality", "personality": "introvert"}
        assert backend.complete(_request(**intro)) == "anyone"
        assert backend.descriptor == "scripted:script.jsonl"

    def test_bad_line(self, tmp_path: Path) -> None:
        script = tmp_path / "script.jsonl"
        script.write_text('"ok"\n{not json\n')
        with pytest.raises(ConfigError):
            ScriptedBackend.from_file(script)

    def test_record_without_content(self, tmp_path: Path) -> None:
        script = tmp_path / "script.jsonl"
        script.write_text('{"speaker": "generic"}\n')
        with pytest.raises(ConfigError):
            ScriptedBackend.from_file(script)

    def test_gateway_wraps_backend(self) -> None:
        gateway = Gateway(ScriptedBackend.from_responses(["a"]), max_concurrency=1)
        assert complete(_request(), gateway) == "a"
        assert gateway.descriptor == "scripted:<inline>"

    def test_gateway_needs_a_slot(self) -> None:
        with pytest.raises(ValueError):
            Gateway(ScriptedBackend(), max_concurrency=0)


class TestHttpBackend:
    """Tests for the chat-completion client against a mock transport."""

    def _backend(
        self, handler: object, *, max_attempts: int = 3
    ) -> HttpBackend:
        return HttpBackend(
            endpoint="https://llm.test/v1/chat/completions",
            api_key_env=KEY_ENV,
            max_attempts=max_attempts,
            backoff_base=0.0,
            transport=httpx.MockTransport(handler),  # type: ignore[arg-type]
        )

    def test_success(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        seen: list[httpx.Request] = []

        def handler(request: httpx.Request) -> httpx.Response:
            seen.append(request)
            return _reply("Hello!")

        backend = self._backend(handler)
        assert backend.complete(_request(trial_id="t")) == "Hello!"
        assert seen[0].headers["Authorization"] == "Bearer secret"
        body = json.loads(seen[0].content)
        assert "context" not in body
        assert body["messages"][1] == {"role": "user", "content": "Hi"}

    def test_missing_key(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv(KEY_ENV, raising=False)
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(request)
            return _reply("x")

        with pytest.raises(AuthMissing) as info:
            self._backend(handler).complete(_request())
        assert info.value.env_var == KEY_ENV
        assert calls == []

    def test_retries_server_errors(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        statuses = iter([503, 429, 200])

        def handler(request: httpx.Request) -> httpx.Response:
            status = next(statuses)
            if status == 200:
                return _reply("finally")
            return httpx.Response(status, text="busy")

        assert self._backend(handler).complete(_request()) == "finally"

    def test_gives_up_after_max_attempts(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(request)
            return httpx.Response(500, text="boom")

        with pytest.raises(TransportError) as info:
            self._backend(handler, max_attempts=2).complete(_request())
        assert info.value.status == 500
        assert len(calls) == 2

    def test_client_errors_are_not_retried(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(request)
            return httpx.Response(400, text="bad request")

        with pytest.raises(TransportError) as info:
            self._backend(handler).complete(_request())
        assert not info.value.transient
        assert len(calls) == 1

    def test_timeout(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(request)
            raise httpx.ReadTimeout("slow", request=request)

        with pytest.raises(GatewayTimeout):
            self._backend(handler, max_attempts=2).complete(_request())
        assert len(calls) == 2

    def test_connection_error(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")

        def handler(request: httpx.Request) -> httpx.Response:
            raise httpx.ConnectError("refused", request=request)

        with pytest.raises(TransportError) as info:
            self._backend(handler, max_attempts=1).complete(_request())
        assert info.value.status == 0
        assert info.value.transient

    def test_reply_without_content(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"choices": []})

        with pytest.raises(TransportError):
            self._backend(handler).complete(_request())

    def test_invalid_endpoint(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(KEY_ENV, "secret")
        calls: list[httpx.Request] = []
        backend = HttpBackend(
            endpoint="http://localhost:9n",
            api_key_env=KEY_ENV,
            max_attempts=3,
            backoff_base=0.0,
            transport=httpx.MockTransport(calls.append),  # type: ignore[arg-type]
        )
        with pytest.raises(InvalidEndpoint, match="localhost:9n"):
            backend.complete(_request())
        assert calls == []


class TestReplayBackend:
    """Tests for replaying recorded payloads."""

    def test_replays_by_trial_and_speaker(self, tmp_path: Path) -> None:
        trials = tmp_path / "trials"
        trials.mkdir()
        records = [
            {"trial_id": "t", "turn_index": 0, "speaker": "generic",
             "raw": "Q1", "origin": "engine"},
            {"trial_id": "t", "turn_index": 1, "speaker": "personality",
             "raw": "first", "origin": "model"},
            {"trial_id": "t", "turn_index": 2, "speaker": "generic",
             "raw": "thanks", "origin": "model"},
            {"trial_id": "t", "turn_index": 3, "speaker": "personality",
             "raw": "second", "origin": "model"},
        ]
        (trials / "t.jsonl").write_text(
            "".join(json.dumps(r) + "\n" for r in records)
        )
        backend = ReplayBackend(run_dir=tmp_path)
        personality = _request(trial_id="t", speaker="personality")
        assert backend.complete(personality) == "first"
        assert backend.complete(_request(trial_id="t", speaker="generic")) == "thanks"
        assert backend.complete(personality) == "second"
        with pytest.raises(ScriptExhausted):
            backend.complete(personality)

    def test_needs_trials_dir(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError):
            ReplayBackend(run_dir=tmp_path)


class TestBackendConfig:
    """Tests for backend settings and construction."""

    def test_defaults(self) -> None:
        config = BackendConfig.from_dict(None)
        assert config.kind is BackendKind.SCRIPTED
        assert config.max_attempts == 3

    def test_unknown_kind(self) -> None:
        with pytest.raises(ConfigError):
            BackendConfig.from_dict({"kind": "carrier-pigeon"})

    def test_spec_scripted(self) -> None:
        config = BackendConfig().with_spec("scripted:/tmp/s.jsonl")
        assert config.kind is BackendKind.SCRIPTED
        assert config.script == "/tmp/s.jsonl"

    def test_spec_http_endpoint(self) -> None:
        config = BackendConfig(timeout=5.0).with_spec("http:https://x.test/chat")
        assert config.kind is BackendKind.HTTP
        assert config.endpoint == "https://x.test/chat"
        assert config.timeout == 5.0

    def test_spec_unknown(self) -> None:
        with pytest.raises(ConfigError):
            BackendConfig().with_spec("smoke-signals")

    def test_build_scripted_needs_file(self) -> None:
        with pytest.raises(ConfigError):
            build_backend(BackendConfig(kind=BackendKind.SCRIPTED))

    def test_build_http(self) -> None:
        backend = build_backend(
            BackendConfig(kind=BackendKind.HTTP, endpoint="https://x.test/chat")
        )
        assert backend.descriptor == "http:https://x.test/chat"

    def test_build_demo_script(self) -> None:
        config = BackendConfig(
            kind=BackendKind.SCRIPTED, script=str(CONFIG_DIR / "demo_script.jsonl")
        )
        assert build_backend(config).descriptor == "scripted:demo_script.jsonl"


class TestDescribeClips:
    """Tests for the offline description step."""

    def test_shipped_manifest_covers_schema(self, schema: ActionSchema) -> None:
        manifest = load_clip_manifest(CONFIG_DIR / "clip_manifest.yaml")
        manifest.check_covers(schema)

    def test_manifest_with_unknown_action(self, schema: ActionSchema) -> None:
        manifest = ClipManifest.from_entries([ClipSpec("Moonwalk", "clip_01")])
        with pytest.raises(ConfigError):
            manifest.check_covers(schema)

    def test_manifest_entry_needs_clip(self, tmp_path: Path) -> None:
        path = tmp_path / "clips.yaml"
        path.write_text("clips:\n  - {action: Nod}\n")
        with pytest.raises(ConfigError):
            load_clip_manifest(path)

    def test_clip_prompt(self) -> None:
        clip = ClipSpec("Nod", "body_nod_01", duration=1.2, body_parts=("head",))
        assert clip.to_prompt() == (
            "Clip: body_nod_01\nDuration: 1.2 s\nMoving body parts: head"
        )

    def test_generates_k_per_action(
        self, tmp_path: Path, schema: ActionSchema
    ) -> None:
        manifest = load_clip_manifest(CONFIG_DIR / "clip_manifest.yaml")
        backend = ScriptedBackend.from_responses(["The  head moves.\n"], cycle=True)
        out = tmp_path / "descriptions.jsonl"
        catalog = generate_descriptions(manifest, backend, 2, out, schema=schema)
        assert catalog.total() == 58
        assert catalog.descriptions["Nod"] == ["The head moves.", "The head moves."]
        loaded, complete = load_catalog(out)
        assert complete
        assert loaded.k == 2

    def test_complete_catalog_is_left_alone(
        self, tmp_path: Path, schema: ActionSchema
    ) -> None:
        manifest = load_clip_manifest(CONFIG_DIR / "clip_manifest.yaml")
        out = tmp_path / "descriptions.jsonl"
        generate_descriptions(
            manifest, ScriptedBackend.from_responses(["x"], cycle=True), 1, out
        )
        before = out.read_text()
        idle = ScriptedBackend()
        generate_descriptions(manifest, idle, 1, out)
        assert out.read_text() == before

    def test_partial_then_resume(self, tmp_path: Path, schema: ActionSchema) -> None:
        manifest = load_clip_manifest(CONFIG_DIR / "clip_manifest.yaml")
        out = tmp_path / "descriptions.jsonl"
        with pytest.raises(PartialCatalog) as info:
            generate_descriptions(manifest, _Flaky(good=5), 1, out, schema=schema)
        assert info.value.done == 5
        assert info.value.total == 29
        partial, complete = load_catalog(out)
        assert not complete
        assert partial.total() == 5

        resumed = _Flaky(good=100)
        catalog = generate_descriptions(manifest, resumed, 1, out, schema=schema)
        assert resumed.calls == 24
        assert catalog.descriptions["Avert Gaze"] == ["Movement number 1."]
        assert load_catalog(out)[1]

    def test_k_must_be_positive(self, tmp_path: Path) -> None:
        manifest = load_clip_manifest(CONFIG_DIR / "clip_manifest.yaml")
        with pytest.raises(ConfigError):
            generate_descriptions(manifest, ScriptedBackend(), 0, tmp_path / "c.jsonl")
