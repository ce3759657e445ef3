// Pure view-state transitions. Every mutation of what the user sees comes
// through here, driven either by a server event or by an explicit local
// action (optimistic send, rollback, connection changes). No business
// logic: the server decides what happened; this file only folds it in.

import {
  ChatMessage,
  PendingAction,
  ServerEvent,
  SessionView,
} from "./types.js";

export function applyServerEvent(view: SessionView, event: ServerEvent): SessionView {
  if (event.type === "heartbeat") {
    return view;
  }
  const seq = event.seq ?? 0;
  if (seq <= view.cursor) {
    return view; // replayed duplicate after reconnect
  }
  const next: SessionView = { ...view, cursor: seq };
  switch (event.type) {
    case "agent_message": {
      const message: ChatMessage = {
        key: `srv-${seq}`,
        from: "agent",
        text: event.text ?? "",
        emojiTag: event.emoji_tag ?? null,
        mode: event.mode,
      };
      next.messages = [...view.messages, message];
      return next;
    }
    case "timeline_post": {
      if (!event.post) return next;
      const rest = view.timeline.filter((p) => p.id !== event.post!.id);
      next.timeline = [event.post, ...rest].sort((a, b) => b.sim_time - a.sim_time);
      return next;
    }
    case "state_change": {
      next.tone = event.tone_labels ?? view.tone;
      return next;
    }
  }
}

export function applyEventLog(view: SessionView, events: ServerEvent[]): SessionView {
  return events.reduce(applyServerEvent, view);
}

export function timelineBackfill(
  view: SessionView,
  posts: SessionView["timeline"],
): SessionView {
  const known = new Set(view.timeline.map((p) => p.id));
  const merged = [...view.timeline, ...posts.filter((p) => !known.has(p.id))];
  return { ...view, timeline: merged.sort((a, b) => b.sim_time - a.sim_time) };
}

// -- local (optimistic) actions ----------------------------------------------

export function optimisticUserMessage(view: SessionView, key: string, text: string): SessionView {
  const message: ChatMessage = { key, from: "user", text, pending: true };
  return { ...view, messages: [...view.messages, message] };
}

export function confirmUserMessage(view: SessionView, key: string): SessionView {
  return {
    ...view,
    messages: view.messages.map((m) => (m.key === key ? { ...m, pending: false } : m)),
  };
}

export function rollbackUserMessage(view: SessionView, key: string): SessionView {
  return {
    ...view,
    messages: view.messages.map((m) =>
      m.key === key ? { ...m, pending: false, failed: true } : m,
    ),
  };
}

export function optimisticLike(view: SessionView, postId: number): SessionView {
  if (view.likedPosts.includes(postId)) return view;
  return { ...view, likedPosts: [...view.likedPosts, postId] };
}

export function rollbackLike(view: SessionView, postId: number): SessionView {
  return { ...view, likedPosts: view.likedPosts.filter((id) => id !== postId) };
}

// -- connection and the offline queue -----------------------------------------

export function connectionChanged(
  view: SessionView,
  connection: SessionView["connection"],
): SessionView {
  return { ...view, connection };
}

export function queueWhileOffline(view: SessionView, action: PendingAction): SessionView {
  return { ...view, pendingQueue: [...view.pendingQueue, action] };
}

export function drainQueue(view: SessionView): [PendingAction[], SessionView] {
  return [view.pendingQueue, { ...view, pendingQueue: [] }];
}

// -- persona editor ------------------------------------------------------------

export function personaLoaded(
  view: SessionView,
  notes: string,
  baseline: Record<string, number>,
): SessionView {
  return {
    ...view,
    persona: {
      ...view.persona,
      notes,
      baseline,
      warmth: baseline["social_prosocial_motivation"] ?? 0.5,
      interactivity: baseline["psycho_curiosity_drive"] ?? 0.5,
      fieldError: null,
      retryPrompt: false,
    },
  };
}

export function personaSliderMoved(
  view: SessionView,
  slider: "warmth" | "interactivity",
  value: number,
): SessionView {
  return { ...view, persona: { ...view.persona, [slider]: value } };
}

export function personaRejected(view: SessionView, fieldError: string): SessionView {
  return { ...view, persona: { ...view.persona, fieldError } };
}

export function personaConflicted(view: SessionView): SessionView {
  return { ...view, persona: { ...view.persona, retryPrompt: true } };
}

export function stateFetched(
  view: SessionView,
  tone: SessionView["tone"],
  familiarityBand: string | null,
  currentBehavior: string | null,
): SessionView {
  return { ...view, tone, familiarityBand, currentBehavior };
}
