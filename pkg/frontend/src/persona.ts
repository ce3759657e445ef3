// The persona editor exposes two sliders over the 12-dim motivation space:
// warmth drives the caring/belonging dims, interactivity the curiosity and
// expressiveness dims. Everything else passes through from the loaded
// persona untouched.

export const WARMTH_DIMS = ["social_prosocial_motivation", "social_group_affiliation"];
export const INTERACTIVITY_DIMS = ["psycho_curiosity_drive", "social_self_presentation"];

export interface PersonaPutBody {
  character_notes: string;
  baseline_motivation: Record<string, number>;
}

export function personaPutBody(
  notes: string,
  baseline: Record<string, number>,
  warmth: number,
  interactivity: number,
): PersonaPutBody {
  const motivation = { ...baseline };
  for (const dim of WARMTH_DIMS) {
    motivation[dim] = warmth;
  }
  for (const dim of INTERACTIVITY_DIMS) {
    motivation[dim] = interactivity;
  }
  return { character_notes: notes, baseline_motivation: motivation };
}
