// Placeholder art for the agent's emoji tags. Swap this map to re-skin.

const ART: Record<string, string> = {
  good_night: "🌙",
  companionship: "🫂",
  emo: "🌧️",
  happy: "🌞",
  scared: "😨",
  angry: "💢",
  finger_heart: "🫰",
  sad: "💧",
};

export function emojiArt(tag: string | null | undefined): string {
  if (!tag) return "";
  return ART[tag] ?? "✨";
}
