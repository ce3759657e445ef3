// Browser entry point: one server-URL setting, then wiring.

import { ApiClient, ApiError, streamUrl } from "./client.js";
import { personaPutBody } from "./persona.js";
import { renderApp } from "./render.js";
import * as store from "./store.js";
import { EventStream } from "./stream.js";
import { ServerEvent, SessionView, emptyView } from "./types.js";

const SERVER_URL =
  (window as unknown as { CTEM_SERVER_URL?: string }).CTEM_SERVER_URL ?? "http://127.0.0.1:8000";

let view: SessionView;
let client: ApiClient;
let stream: EventStream;
let sendCounter = 0;

function update(next: SessionView): void {
  view = next;
  const root = document.getElementById("app");
  if (!root) return;
  const draft = document.getElementById("draft") as HTMLInputElement | null;
  const draftValue = draft?.value ?? "";
  root.innerHTML = renderApp(view);
  bind();
  const restored = document.getElementById("draft") as HTMLInputElement | null;
  if (restored) restored.value = draftValue;
}

async function sendMessage(text: string): Promise<void> {
  const key = `local-${++sendCounter}`;
  update(store.optimisticUserMessage(view, key, text));
  if (view.connection !== "open") {
    update(store.queueWhileOffline(view, { kind: "message", text, key }));
    return;
  }
  try {
    await client.sendMessage(view.sessionId, text);
    update(store.confirmUserMessage(view, key));
  } catch {
    update(store.rollbackUserMessage(view, key));
  }
}

async function flushQueue(): Promise<void> {
  const [actions, drained] = store.drainQueue(view);
  update(drained);
  for (const action of actions) {
    try {
      await client.sendMessage(view.sessionId, action.text);
      update(store.confirmUserMessage(view, action.key));
    } catch {
      update(store.rollbackUserMessage(view, action.key));
    }
  }
}

async function like(postId: number): Promise<void> {
  update(store.optimisticLike(view, postId));
  try {
    await client.react(view.sessionId, postId, "like");
  } catch {
    update(store.rollbackLike(view, postId));
  }
}

async function pushPersona(): Promise<void> {
  const p = view.persona;
  try {
    await client.putPersona(
      view.sessionId,
      personaPutBody(p.notes, p.baseline, p.warmth, p.interactivity),
    );
    update(store.personaLoaded(view, p.notes, {
      ...p.baseline,
      social_prosocial_motivation: p.warmth,
      social_group_affiliation: p.warmth,
      psycho_curiosity_drive: p.interactivity,
      social_self_presentation: p.interactivity,
    }));
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      update(store.personaConflicted(view));
    } else if (error instanceof ApiError && error.status === 422) {
      const detail = (error.detail as { detail?: { field?: string; message?: string } })?.detail;
      update(store.personaRejected(view, detail?.message ?? "invalid persona value"));
    }
  }
}

function bind(): void {
  const composer = document.getElementById("composer");
  composer?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const draft = document.getElementById("draft") as HTMLInputElement;
    const text = draft.value.trim();
    if (text) {
      draft.value = "";
      void sendMessage(text);
    }
  });
  document.querySelectorAll("[data-like]").forEach((button) => {
    button.addEventListener("click", () =>
      void like(Number((button as HTMLElement).dataset.like)),
    );
  });
  document.querySelectorAll("[data-comment]").forEach((button) => {
    button.addEventListener("click", () => {
      const id = Number((button as HTMLElement).dataset.comment);
      const text = window.prompt("your comment:");
      if (text) void client.react(view.sessionId, id, "comment", text);
    });
  });
  for (const slider of ["warmth", "interactivity"] as const) {
    const input = document.getElementById(slider) as HTMLInputElement | null;
    input?.addEventListener("change", () => {
      update(store.personaSliderMoved(view, slider, Number(input.value) / 100));
      void pushPersona();
    });
  }
  document.getElementById("persona-retry")?.addEventListener("click", () => void pushPersona());
}

async function boot(): Promise<void> {
  client = new ApiClient(SERVER_URL);
  const { session_id } = await client.createSession();
  view = emptyView(session_id);
  update(view);

  const persona = await client.getPersona(session_id);
  update(store.personaLoaded(view, persona.character_notes, persona.baseline_motivation));
  const state = await client.getState(session_id);
  update(store.stateFetched(view, state.tone_labels, state.familiarity_band, state.current_behavior));
  const timeline = await client.getTimeline(session_id);
  update(store.timelineBackfill(view, timeline.posts));

  stream = new EventStream(
    (cursor) => streamUrl(SERVER_URL, session_id, cursor),
    {
      onEvent: (event) => update(store.applyServerEvent(view, event as unknown as ServerEvent)),
      onConnectionChange: (state) => {
        const wasOpen = view.connection === "open";
        update(store.connectionChanged(view, state));
        if (state === "open" && !wasOpen) void flushQueue();
      },
    },
    (url) => new WebSocket(url) as unknown as import("./stream.js").WsLike,
  );
  stream.connect();
}

void boot();
