from __future__ import annotations

import json
import re
import threading
from pathlib import Path
import time

import pytest
from fastapi.testclient import TestClient

from ctem.service import create_app

from conftest import make_config


def service_config(tmp_path, **overrides):
    base = dict(
        debug=True,
        data_dir=str(tmp_path / "data"),
        heartbeat_seconds=30.0,
    )
    base.update(overrides)
    return make_config(**base)


@pytest.fixture
def client(tmp_path):
    app = create_app(service_config(tmp_path))
    with TestClient(app) as c:
        yield c


def new_session(client, persona=None) -> str:
    body = {} if persona is None else {"persona": persona}
    response = client.post("/v1/sessions", json=body)
    assert response.status_code == 201
    return response.json()["session_id"]


class TestHttpBasics:
    def test_healthz(self, client):
        assert client.get("/v1/healthz").json() == {"status": "ok"}

    def test_create_session_with_persona(self, client):
        session_id = new_session(client, "learner")
        assert session_id

    def test_unknown_persona_rejected(self, client):
        response = client.post("/v1/sessions", json={"persona": "nonexistent"})
        assert response.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.get("/v1/sessions/nope/state").status_code == 404
        assert client.post("/v1/sessions/nope/messages", json={"text": "x"}).status_code == 404

    def test_message_roundtrip(self, client):
        session_id = new_session(client)
        response = client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hello!"})
        assert response.status_code == 200
        assert response.json()["message_id"]
        state = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()
        assert state["debug"]["user_turn_count"] == 1
        assert state["debug"]["turn_count"] >= 2  # reply appended

    def test_empty_message_422(self, client):
        session_id = new_session(client)
        assert (
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": ""}).status_code
            == 422
        )


class TestStateEndpoint:
    def test_redacted_view_has_no_floats(self, client):
        session_id = new_session(client)
        client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hey"})
        body = client.get(f"/v1/sessions/{session_id}/state").text
        assert not re.search(r"\d+\.\d+", body)
        view = json.loads(body)
        assert set(view["tone_labels"]) == {"energy", "valence", "arousal"}
        assert view["familiarity_band"] in ("stranger", "acquaintance", "close")

    def test_debug_view_exposes_numbers(self, client):
        session_id = new_session(client)
        view = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()
        assert "physio" in view["debug"]

    def test_debug_gated_by_config(self, tmp_path):
        app = create_app(service_config(tmp_path, debug=False))
        with TestClient(app) as client:
            session_id = new_session(client)
            view = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()
            assert "debug" not in view


class TestPersonaEndpoints:
    def test_get_then_put(self, client):
        session_id = new_session(client, "learner")
        persona = client.get(f"/v1/sessions/{session_id}/persona").json()
        assert persona["baseline_motivation"]["psycho_goal_persistence"] == 1.0
        persona["baseline_motivation"]["social_prosocial_motivation"] = 1.0
        response = client.put(
            f"/v1/sessions/{session_id}/persona",
            json={
                "character_notes": "suddenly outgoing",
                "baseline_motivation": persona["baseline_motivation"],
            },
        )
        assert response.status_code == 200
        updated = client.get(f"/v1/sessions/{session_id}/persona").json()
        assert updated["character_notes"] == "suddenly outgoing"
        assert updated["baseline_motivation"]["social_prosocial_motivation"] == 1.0

    def test_out_of_range_field_named(self, client):
        session_id = new_session(client)
        persona = client.get(f"/v1/sessions/{session_id}/persona").json()
        persona["baseline_motivation"]["social_prosocial_motivation"] = 1.4
        response = client.put(
            f"/v1/sessions/{session_id}/persona",
            json={"baseline_motivation": persona["baseline_motivation"]},
        )
        assert response.status_code == 422
        assert "prosocial" in json.dumps(response.json())

    def test_put_conflicts_with_inflight_generation(self, client):
        session_id = new_session(client)
        manager = client.app.state.manager
        engine = manager.sessions[session_id].engine

        class SlowGen:
            def generate(self, prompt, max_length):
                time.sleep(0.8)
                return "slow reply"

        engine.generator = SlowGen()
        errors = []

        def send():
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hi!"})

        worker = threading.Thread(target=send)
        worker.start()
        time.sleep(0.3)
        response = client.put(
            f"/v1/sessions/{session_id}/persona", json={"character_notes": "nope"}
        )
        worker.join()
        assert response.status_code == 409

    def test_persona_swap_preserves_relationship(self, client):
        session_id = new_session(client)
        client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hello"})
        before = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
        client.put(f"/v1/sessions/{session_id}/persona", json={"character_notes": "new vibe"})
        after = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
        assert after["physio"] == before["physio"]
        assert after["familiarity"] == before["familiarity"]
        assert after["turn_count"] == before["turn_count"]


class TestTimelineAndReactions:
    def advance_until_post(self, client, session_id, max_batches=40):
        for _ in range(max_batches):
            client.post(f"/v1/sessions/{session_id}/advance", json={"ticks": 10})
            posts = client.get(f"/v1/sessions/{session_id}/timeline").json()["posts"]
            if posts:
                return posts
        pytest.fail("no timeline post generated")

    def test_posts_newest_first_and_reference_behaviors(self, tmp_path):
        app = create_app(service_config(tmp_path, timeline_post_probability=1.0))
        with TestClient(app) as client:
            session_id = new_session(client)
            posts = self.advance_until_post(client, session_id)
            times = [p["sim_time"] for p in posts]
            assert times == sorted(times, reverse=True)
            assert all(p["behavior_id"] for p in posts)

    def test_like_reaction_reaches_feedback(self, tmp_path):
        app = create_app(service_config(tmp_path, timeline_post_probability=1.0))
        with TestClient(app) as client:
            session_id = new_session(client)
            posts = self.advance_until_post(client, session_id)
            post_id = posts[0]["id"]
            response = client.post(
                f"/v1/sessions/{session_id}/timeline/{post_id}/reactions",
                json={"kind": "like"},
            )
            assert response.status_code == 204
            debug = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
            assert "like" in debug["last_feedback"]["explicit_signals"]
            posts = client.get(f"/v1/sessions/{session_id}/timeline").json()["posts"]
            target = next(p for p in posts if p["id"] == post_id)
            assert target["reactions"][0]["kind"] == "like"

    def test_unknown_post_404(self, client):
        session_id = new_session(client)
        response = client.post(
            f"/v1/sessions/{session_id}/timeline/999/reactions", json={"kind": "like"}
        )
        assert response.status_code == 404

    def test_bad_kind_422(self, client):
        session_id = new_session(client)
        response = client.post(
            f"/v1/sessions/{session_id}/timeline/1/reactions", json={"kind": "wave"}
        )
        assert response.status_code == 422


class TestWebSocketStream:
    def test_message_produces_agent_event(self, client):
        session_id = new_session(client)
        with client.websocket_connect(f"/v1/sessions/{session_id}/stream") as ws:
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hello!"})
            event = ws.receive_json()
            while event["type"] not in ("agent_message",):
                event = ws.receive_json()
            assert event["text"]

    def test_unknown_session_closed(self, client):
        with pytest.raises(Exception):
            with client.websocket_connect("/v1/sessions/ghost/stream") as ws:
                ws.receive_json()

    def test_cursor_resume_no_loss_no_duplicates(self, client):
        session_id = new_session(client)
        received = []
        with client.websocket_connect(f"/v1/sessions/{session_id}/stream") as ws:
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "first!"})
            event = ws.receive_json()
            while event["type"] != "agent_message":
                event = ws.receive_json()
            received.append(event)
        cursor = received[-1]["seq"]
        client.post(f"/v1/sessions/{session_id}/messages", json={"text": "second!"})
        with client.websocket_connect(
            f"/v1/sessions/{session_id}/stream?cursor={cursor}"
        ) as ws:
            event = ws.receive_json()
            while event["type"] != "agent_message":
                assert event.get("seq", cursor + 1) > cursor
                event = ws.receive_json()
            received.append(event)
        seqs = [e["seq"] for e in received]
        assert len(set(seqs)) == len(seqs)
        assert "second" in received[-1]["text"] or received[-1]["seq"] > cursor

    def test_heartbeat_when_idle(self, tmp_path):
        app = create_app(service_config(tmp_path, heartbeat_seconds=0.1))
        with TestClient(app) as client:
            session_id = new_session(client)
            with client.websocket_connect(f"/v1/sessions/{session_id}/stream") as ws:
                event = ws.receive_json()
                assert event["type"] == "heartbeat"


class TestConcurrency:
    def test_hundred_concurrent_posts_serialize(self, client):
        session_id = new_session(client)
        errors = []

        def post(i):
            try:
                response = client.post(
                    f"/v1/sessions/{session_id}/messages", json={"text": f"msg {i}"}
                )
                assert response.status_code == 200
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=post, args=(i,)) for i in range(100)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        debug = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
        assert debug["user_turn_count"] == 100


class TestRestartContinuity:
    def test_sessions_survive_service_restart(self, tmp_path):
        config = service_config(tmp_path)
        app = create_app(config)
        with TestClient(app) as client:
            session_id = new_session(client)
            for i in range(3):
                client.post(f"/v1/sessions/{session_id}/messages", json={"text": f"note {i}"})
            before = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
        # context exit persists sessions via the shutdown hook
        app2 = create_app(service_config(tmp_path))
        with TestClient(app2) as client:
            after = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
            assert after["user_turn_count"] == before["user_turn_count"]
            assert after["turn_count"] == before["turn_count"]
            assert after["tick"] == before["tick"]
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "still there?"})
            final = client.get(f"/v1/sessions/{session_id}/state?debug=1").json()["debug"]
            assert final["user_turn_count"] == before["user_turn_count"] + 1


class TestIdlePersistence:
    def test_idle_sessions_snapshot_without_shutdown(self, tmp_path):
        config = service_config(tmp_path)
        app = create_app(config)
        with TestClient(app) as client:
            session_id = new_session(client)
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hi"})
            manager = client.app.state.manager
            manager.sessions[session_id].last_active -= 3600  # simulate an hour idle
            persisted = manager.persist_idle(config.session_idle_persist_seconds)
            assert persisted == [session_id]
            assert (Path(config.data_dir) / f"{session_id}.snapshot.json").exists()
            # already persisted and still idle: nothing new to write
            assert manager.persist_idle(config.session_idle_persist_seconds) == []


class TestProactivePush:
    def test_proactive_message_arrives_unprompted(self, tmp_path):
        config = service_config(
            tmp_path,
            tick_minutes=240,
            familiarity_eta=1.0,
            proactive_p_base=1.0,
        )
        app = create_app(config)
        with TestClient(app) as client:
            session_id = new_session(client)
            client.post(f"/v1/sessions/{session_id}/messages", json={"text": "hi friend!"})
            # cross the day boundary so familiarity becomes positive, then idle
            for _ in range(12):
                client.post(f"/v1/sessions/{session_id}/advance", json={"ticks": 1})
                engine = client.app.state.manager.sessions[session_id].engine
                proactive = [
                    e
                    for e in engine.outbox
                    if e["type"] == "agent_message" and e.get("mode") == "proactive"
                ]
                if proactive:
                    break
            assert proactive, "agent never initiated within the fixture schedule"
