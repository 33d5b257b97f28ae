// Session state machine. The server owns the truth: the controller keeps
// a queue snapshot, walks it one entry at a time, and only advances once
// a decision has been acknowledged with a 200. Nothing is marked decided
// locally ahead of the ack, so a dropped connection can never desync the
// visible position from the decision log.

import {
  AgreementView,
  ApiError,
  DecisionAck,
  NetworkError,
  ProgressView,
  QueueEntry,
  fetchAgreement,
  fetchProgress,
  fetchQueue,
  submitDecision,
} from "./api.js";
import { DecisionForm, REASONS, Reason, Verdict, canSubmit, emptyForm } from "./state.js";

export interface Api {
  fetchQueue: typeof fetchQueue;
  submitDecision: typeof submitDecision;
  fetchAgreement: typeof fetchAgreement;
  fetchProgress: typeof fetchProgress;
}

const liveApi: Api = { fetchQueue, submitDecision, fetchAgreement, fetchProgress };

export interface Current {
  entry: QueueEntry;
  index: number;
  total: number;
}

export class ReviewController {
  queue: QueueEntry[] = [];
  position = 0;
  form: DecisionForm = emptyForm();
  banner: string | null = null;
  inlineError: string | null = null;
  progress: ProgressView | null = null;
  agreement: AgreementView | null = null;
  loaded = false;
  private inflight = false;
  private listeners: Array<() => void> = [];

  constructor(
    readonly annotator: string,
    readonly session: string,
    private api: Api = liveApi,
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  current(): Current | null {
    const entry = this.queue[this.position];
    if (!entry) return null;
    return { entry, index: this.position, total: this.queue.length };
  }

  done(): boolean {
    return this.loaded && this.position >= this.queue.length;
  }

  /** Fetch a fresh queue snapshot plus the dashboard numbers. */
  async load(): Promise<void> {
    try {
      this.queue = await this.api.fetchQueue(this.annotator);
      this.position = 0;
      this.loaded = true;
      this.banner = null;
      await this.refreshDashboard();
    } catch (err) {
      this.fail(err);
    }
    this.notify();
  }

  private async refreshDashboard(): Promise<void> {
    this.progress = await this.api.fetchProgress(this.session);
    this.agreement = await this.api.fetchAgreement(this.session);
  }

  setVerdict(verdict: Verdict): void {
    this.form.verdict = verdict;
    this.inlineError = null;
    this.notify();
  }

  setReason(reason: Reason): void {
    this.form.reason = reason;
    this.inlineError = null;
    this.notify();
  }

  /** POST the current form; advance only once the server acknowledges. */
  async submit(): Promise<DecisionAck | null> {
    const current = this.current();
    if (!current || !canSubmit(this.form) || this.inflight) return null;
    this.inflight = true;
    this.inlineError = null;
    let ack: DecisionAck;
    try {
      ack = await this.api.submitDecision({
        annotator_id: this.annotator,
        entry_id: current.entry.id,
        verdict: this.form.verdict as string,
        reason: this.form.reason,
      });
    } catch (err) {
      this.fail(err);
      this.notify();
      return null;
    } finally {
      this.inflight = false;
    }
    this.position += 1;
    this.form = emptyForm();
    this.banner = null;
    try {
      await this.refreshDashboard();
    } catch (err) {
      this.fail(err);
    }
    this.notify();
    return ack;
  }

  /** Skip without deciding; the entry stays pending on the server. */
  next(): void {
    if (this.current()) {
      this.position += 1;
      this.form = emptyForm();
      this.inlineError = null;
      this.notify();
    }
  }

  private fail(err: unknown): void {
    if (err instanceof NetworkError) {
      this.banner = err.message;
    } else if (err instanceof ApiError) {
      this.inlineError = err.message;
    } else {
      throw err;
    }
  }

  /**
   * Keyboard map: k keep, r/x remove, 1..5 reasons, enter submit (or
   * retry when the network banner is up), n skip ahead.
   */
  async handleKey(key: string): Promise<void> {
    if (key === "k") {
      this.setVerdict("keep");
    } else if (key === "r" || key === "x") {
      this.setVerdict("remove");
    } else if (key >= "1" && key <= String(REASONS.length)) {
      const reason = REASONS[Number(key) - 1];
      if (reason) this.setReason(reason);
    } else if (key === "Enter") {
      if (this.banner !== null && !this.loaded) {
        await this.load();
      } else {
        await this.submit();
      }
    } else if (key === "n") {
      this.next();
    }
  }
}
