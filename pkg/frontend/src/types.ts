// Wire types for the chat service protocol.

export interface ToneLabels {
  energy: string;
  valence: string;
  arousal: string;
}

export interface TimelinePostWire {
  id: number;
  sim_time: number;
  text: string;
  behavior_id: string;
  reactions: { kind: string; text?: string | null; at: number }[];
}

export interface ServerEvent {
  seq?: number;
  type: "agent_message" | "timeline_post" | "state_change" | "heartbeat";
  text?: string;
  emoji_tag?: string | null;
  mode?: string;
  post?: TimelinePostWire;
  tone_labels?: ToneLabels;
}

export interface ChatMessage {
  key: string;
  from: "user" | "agent";
  text: string;
  emojiTag?: string | null;
  mode?: string;
  pending?: boolean;
  failed?: boolean;
}

export interface PersonaEditor {
  notes: string;
  baseline: Record<string, number>;
  warmth: number;
  interactivity: number;
  fieldError: string | null;
  retryPrompt: boolean;
}

export type ConnectionState = "connecting" | "open" | "reconnecting";

export interface PendingAction {
  kind: "message";
  text: string;
  key: string;
}

export interface SessionView {
  sessionId: string;
  connection: ConnectionState;
  cursor: number;
  messages: ChatMessage[];
  timeline: TimelinePostWire[];
  likedPosts: number[];
  tone: ToneLabels | null;
  familiarityBand: string | null;
  currentBehavior: string | null;
  persona: PersonaEditor;
  pendingQueue: PendingAction[];
}

export function emptyView(sessionId: string): SessionView {
  return {
    sessionId,
    connection: "connecting",
    cursor: 0,
    messages: [],
    timeline: [],
    likedPosts: [],
    tone: null,
    familiarityBand: null,
    currentBehavior: null,
    persona: {
      notes: "",
      baseline: {},
      warmth: 0.5,
      interactivity: 0.5,
      fieldError: null,
      retryPrompt: false,
    },
    pendingQueue: [],
  };
}
