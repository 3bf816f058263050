// Qualitative evaluation checklist: the operator frames each scene in
// turn and compares variants on it.

export interface Scene {
  id: string;
  label: string;
}

export const SCENES: Scene[] = [
  { id: "neutral", label: "Neutral environment, no objects" },
  { id: "wound-1", label: "Wound photo A (held to camera)" },
  { id: "wound-2", label: "Wound photo B (held to camera)" },
  { id: "lookalike-1", label: "Everyday objects in wound-like colors, scene A" },
  { id: "lookalike-2", label: "Everyday objects in wound-like colors, scene B" },
  { id: "mixed", label: "Two objects, one wound-colored" },
];
