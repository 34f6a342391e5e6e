import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from tsecues.prompts import PromptSpec, RephraseClient, render_template
from tsecues.prompts.rephrase import cue_keywords, validate_variation

CUES = [("gender", "female", None), ("distance", "nearer", None)]


def _spec():
    return PromptSpec(mixture_id="m", cue_subset=CUES, verb="extract", form="imperative",
                      variation_idx=0, text=render_template("extract", CUES))


@pytest.fixture
def server():
    state = {"replies": [], "requests": []}

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            state["requests"].append((body, self.headers.get("Authorization")))
            reply = state["replies"].pop(0) if state["replies"] else {"variations": []}
            if reply == "500":
                self.send_response(500)
                self.end_headers()
                return
            data = json.dumps(reply).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    state["url"] = f"http://127.0.0.1:{httpd.server_address[1]}/"
    yield state
    httpd.shutdown()


def test_keywords_and_validation():
    kw = cue_keywords(CUES)
    assert validate_variation("Isolate the female voice that is closer to the mic.", kw)
    assert not validate_variation("Identify and extract the female speaker nearer the mic.", kw)
    assert not validate_variation("Find the female speaker nearer the microphone.", kw)
    assert not validate_variation("Extract the female speaker.", kw)


def test_rephrase_accepts_valid_and_replaces_invalid(server, tmp_path):
    good = "Isolate the female talker who is closer to the microphone."
    server["replies"].append({"variations": [good, "Identify the female speaker closer to the mic.",
                                             "Extract the male one."]})
    client = RephraseClient(url=server["url"], token="tok", cache_dir=tmp_path, retries=0)
    out = client.rephrase(_spec(), 5)
    assert out[0] == good
    assert out[1] == render_template("extract", CUES, "imperative", 1)
    assert out[4] == render_template("extract", CUES, "imperative", 4)
    body, auth = server["requests"][0]
    assert body == {"prompt": _spec().text, "n": 5} and auth == "Bearer tok"
    # cached: second call makes no request
    assert client.rephrase(_spec(), 5) == out
    assert len(server["requests"]) == 1


def test_rephrase_falls_back_on_server_error(server):
    server["replies"].extend(["500", "500"])
    client = RephraseClient(url=server["url"], retries=1, timeout=5)
    out = client.rephrase(_spec(), 5)
    assert out == [render_template("extract", CUES, "imperative", v) for v in range(5)]
    assert len(server["requests"]) == 2


def test_rephrase_disabled_without_url(monkeypatch):
    monkeypatch.delenv("TSECUES_REPHRASE_URL", raising=False)
    client = RephraseClient()
    assert not client.enabled
    assert client.rephrase_many([_spec()], 2) == [[render_template("extract", CUES, "imperative", v)
                                                   for v in range(2)]]


def test_rephrase_env_url(monkeypatch, server):
    monkeypatch.setenv("TSECUES_REPHRASE_URL", server["url"])
    assert RephraseClient().url == server["url"]
