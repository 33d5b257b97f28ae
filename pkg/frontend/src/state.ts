// Decision form model. The one rule that matters: submit stays disabled
// until a verdict is chosen, and a remove verdict cannot ship with the
// "ok" reason. The server enforces the same pair, this is just the
// client-side mirror so the button state is honest.

export const VERDICTS = ["keep", "remove"] as const;
export const REASONS = ["ok", "faulty", "out_of_context", "irrelevant", "personal_info"] as const;

export type Verdict = (typeof VERDICTS)[number];
export type Reason = (typeof REASONS)[number];

export interface DecisionForm {
  verdict: Verdict | null;
  reason: Reason;
}

export function emptyForm(): DecisionForm {
  return { verdict: null, reason: "ok" };
}

export function canSubmit(form: DecisionForm): boolean {
  if (form.verdict === null) return false;
  return !(form.verdict === "remove" && form.reason === "ok");
}

export const REASON_LABELS: Record<Reason, string> = {
  ok: "ok",
  faulty: "faulty",
  out_of_context: "out of context",
  irrelevant: "irrelevant",
  personal_info: "personal info",
};
