// View = f(state). Renders the whole app as an HTML string so the
// transcript is reproducible from a recorded event log alone; main.ts
// swaps it into the page and binds the handful of controls by id.

import { emojiArt } from "./emoji.js";
import { SessionView } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function renderBanner(view: SessionView): string {
  if (view.connection === "open") return "";
  const label = view.connection === "connecting" ? "connecting…" : "connection lost, retrying…";
  return `<div class="banner" data-state="${view.connection}">${label}</div>`;
}

function renderMessages(view: SessionView): string {
  const items = view.messages
    .map((m) => {
      const classes = ["bubble", m.from, m.pending ? "pending" : "", m.failed ? "failed" : ""]
        .filter(Boolean)
        .join(" ");
      const art = m.from === "agent" ? emojiArt(m.emojiTag) : "";
      const proactive = m.mode === "proactive" ? `<span class="proactive-dot" title="Auri started this"></span>` : "";
      const status = m.pending ? " ⏳" : m.failed ? " ⚠️ not sent" : "";
      return `<li class="${classes}" data-key="${m.key}">${proactive}${escapeHtml(m.text)}${art ? ` <span class="emoji">${art}</span>` : ""}${status}</li>`;
    })
    .join("");
  return `<ul id="messages">${items}</ul>`;
}

function renderToneBadge(view: SessionView): string {
  if (!view.tone) return `<div id="tone" class="tone empty"></div>`;
  const { energy, valence, arousal } = view.tone;
  return `<div id="tone" class="tone">` +
    `<span class="chip">${energy}</span>` +
    `<span class="chip">${valence}</span>` +
    `<span class="chip">${arousal}</span>` +
    (view.familiarityBand ? `<span class="chip band">${view.familiarityBand}</span>` : "") +
    (view.currentBehavior ? `<span class="chip doing">${escapeHtml(view.currentBehavior)}</span>` : "") +
    `</div>`;
}

function renderTimeline(view: SessionView): string {
  const items = view.timeline
    .map((post) => {
      const liked = view.likedPosts.includes(post.id);
      const hearts = post.reactions.filter((r) => r.kind === "like").length;
      return (
        `<li class="post" data-post-id="${post.id}">` +
        `<p>${escapeHtml(post.text)}</p>` +
        `<button class="like ${liked ? "liked" : ""}" data-like="${post.id}">` +
        `${liked ? "♥" : "♡"} ${hearts}</button>` +
        `<button class="comment" data-comment="${post.id}">comment</button>` +
        `</li>`
      );
    })
    .join("");
  return `<ul id="timeline">${items}</ul>`;
}

function renderPersonaEditor(view: SessionView): string {
  const p = view.persona;
  return (
    `<div id="persona">` +
    `<label>warmth <input id="warmth" type="range" min="0" max="100" value="${Math.round(p.warmth * 100)}"></label>` +
    `<label>interactivity <input id="interactivity" type="range" min="0" max="100" value="${Math.round(p.interactivity * 100)}"></label>` +
    (p.fieldError ? `<p class="field-error">${escapeHtml(p.fieldError)}</p>` : "") +
    (p.retryPrompt ? `<p class="retry-prompt">Auri is mid-thought; retry? <button id="persona-retry">retry</button></p>` : "") +
    `</div>`
  );
}

export function renderApp(view: SessionView): string {
  return (
    renderBanner(view) +
    renderToneBadge(view) +
    renderMessages(view) +
    renderTimeline(view) +
    renderPersonaEditor(view) +
    `<form id="composer"><input id="draft" type="text" placeholder="say something…">` +
    `<button type="submit">send</button></form>`
  );
}
