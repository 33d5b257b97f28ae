// Thin client over the annotation service. Every number shown in the UI
// comes out of these calls; nothing is recomputed on this side.

export interface QueueEntry {
  id: string;
  package: string;
  enclosing_class: string;
  kind: string;
  code: string;
  documentation: string;
  repo: string;
  license_id: string;
  uses_lambda: boolean;
  flags: string[];
}

export interface DecisionBody {
  annotator_id: string;
  entry_id: string;
  verdict: string;
  reason: string;
}

export interface DecisionAck extends DecisionBody {
  timestamp: number;
}

export interface AgreementView {
  session: string;
  kappa: number | null;
  items: number;
  raters: number;
  status: "ok" | "pending";
}

export interface ProgressView {
  session: string;
  phase: string;
  total_items: number;
  total_assignments: number;
  decided_assignments: number;
  complete: boolean;
  per_annotator: Record<string, { assigned: number; decided: number }>;
}

/** Server said no: carries the status and the `detail` payload. */
export class ApiError extends Error {
  constructor(readonly status: number, detail: unknown) {
    super(detailText(detail));
  }
}

/** fetch itself failed: server unreachable, timeout, connection dropped. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
  }
}

function detailText(detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (Array.isArray(detail)) {
    // pydantic validation errors arrive as a list of {msg, loc, ...}
    return detail
      .map((d) => (d && typeof d === "object" && "msg" in d ? String(d.msg) : JSON.stringify(d)))
      .join("; ");
  }
  return JSON.stringify(detail);
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new NetworkError(err);
  }
  let body: unknown;
  try {
    body = await response.json();
  } catch (err) {
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    throw new NetworkError(err);
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? (body as { detail: unknown }).detail
        : body;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export function fetchQueue(annotator: string): Promise<QueueEntry[]> {
  return request(`/api/queue?annotator=${encodeURIComponent(annotator)}`);
}

export function submitDecision(body: DecisionBody): Promise<DecisionAck> {
  return request("/api/decision", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

export function fetchAgreement(session: string): Promise<AgreementView> {
  return request(`/api/agreement?session=${encodeURIComponent(session)}`);
}

export function fetchProgress(session: string): Promise<ProgressView> {
  return request(`/api/progress?session=${encodeURIComponent(session)}`);
}
