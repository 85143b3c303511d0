"""Completion gateway: mock scripting, retries, code-block extraction."""
import pytest

from evoracer import llm


def req(text="improve this", request_id="r1"):
    return llm.LlmRequest(model="m", system_text="sys", user_text=text,
                          request_id=request_id)


def test_request_validates_ranges():
    with pytest.raises(ValueError):
        llm.LlmRequest(model="m", system_text="", user_text="", temperature=3.0)
    with pytest.raises(ValueError):
        llm.LlmRequest(model="m", system_text="", user_text="", top_p=0.0)


def test_surrogate_tokens_rounds_up():
    assert llm.surrogate_tokens("one two three") == 4      # ceil(3 * 1.3)
    assert llm.surrogate_tokens("") == 0
    assert llm.surrogate_tokens("word") == 2               # ceil(1.3)


def test_mock_match_entries_win_over_plain():
    provider = llm.MockProvider([
        {"match": "broken", "response": "FIX"},
        {"response": "A"},
        {"response": "B"},
    ])
    cfg = llm.ProviderConfig(provider=provider, max_retries=0)
    assert llm.complete(req("this is broken code"), cfg).text == "FIX"
    assert llm.complete(req(), cfg).text == "A"
    assert llm.complete(req(), cfg).text == "B"
    assert llm.complete(req(), cfg).text == "A"  # plain entries cycle


def test_mock_scripted_failures_consume_retries():
    provider = llm.MockProvider([{"response": "ok", "fail_times": 2}])
    cfg = llm.ProviderConfig(provider=provider, max_retries=3)
    response = llm.complete(req(), cfg)
    assert response.text == "ok"
    assert response.attempt == 3
    assert len(cfg.attempts_log) == 3


def test_retries_exhausted_raises_provider_failure():
    provider = llm.MockProvider([{"response": "ok", "fail_times": 5}])
    cfg = llm.ProviderConfig(provider=provider, max_retries=2)
    with pytest.raises(llm.ProviderFailure):
        llm.complete(req(), cfg)


def test_auth_failure_is_not_retried():
    class Denier:
        name = "denier"
        calls = 0

        def send(self, request):
            self.calls += 1
            raise llm.AuthFailure("no token")

    provider = Denier()
    cfg = llm.ProviderConfig(provider=provider, max_retries=3)
    with pytest.raises(llm.AuthFailure):
        llm.complete(req(), cfg)
    assert provider.calls == 1


def test_http_provider_reads_credential_from_env(monkeypatch):
    provider = llm.HttpProvider("http://localhost:1/v1", "TEST_TOKEN_VAR")
    monkeypatch.delenv("TEST_TOKEN_VAR", raising=False)
    with pytest.raises(llm.AuthFailure):
        provider.send(req())


def test_extract_first_matching_code_block():
    text = ("Some prose.\n```cpp\nint unrelated() { return 0; }\n```\n"
            "```cpp\ndouble score(int x) { return x; }\n```\n")
    block = llm.extract_code_block(text, "double score(int x)")
    assert block.startswith("double score")


def test_extract_requires_fenced_block():
    with pytest.raises(llm.NoCodeBlock):
        llm.extract_code_block("no code here", "double f(int)")


def test_extract_requires_function_name():
    with pytest.raises(llm.SignatureAbsent):
        llm.extract_code_block("```\nint other() {}\n```", "double f(int)")


def test_function_name_of_signature():
    assert llm.function_name_of("double evaluate_placement_quality(int a)") == \
        "evaluate_placement_quality"
    assert llm.function_name_of("def score_candidate(x, y):") == "score_candidate"
