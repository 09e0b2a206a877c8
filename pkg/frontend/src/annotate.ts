/** Annotation mode: fetch the next diagnostic example, collect a primary
 * move plus the acceptable set, submit, advance. Unsent records survive
 * network failures in a retry buffer; duplicate submissions (409) skip
 * forward. */

import { AnnotationPayload, ApiClient, ApiError, DiagnosticExample, Progress } from "./api.js";
import { LabelSet } from "./labels.js";

export type SubmitOutcome = "submitted" | "duplicate-skipped" | "buffered";

export class AnnotationController {
  current: DiagnosticExample | null = null;
  progress: Progress = { done: 0, total: 0 };
  finished = false;
  primary: string | null = null;
  acceptable = new Set<string>();
  readonly retryBuffer: AnnotationPayload[] = [];
  lastSubmitted: AnnotationPayload | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly labels: LabelSet,
    readonly annotatorId: string,
  ) {}

  async next(): Promise<void> {
    const resp = await this.api.diagnosticNext(this.annotatorId);
    this.progress = resp.progress;
    this.finished = resp.done;
    this.current = resp.done ? null : (resp.example ?? null);
    this.primary = null;
    this.acceptable = new Set();
  }

  /** Choosing a primary always marks it acceptable too. */
  setPrimary(label: string): void {
    if (!this.labels.has(label)) {
      throw new Error(`unknown label: ${label}`);
    }
    this.primary = label;
    this.acceptable.add(label);
  }

  /** The primary cannot be removed from the acceptable set. */
  toggleAcceptable(label: string): void {
    if (!this.labels.has(label)) {
      throw new Error(`unknown label: ${label}`);
    }
    if (label === this.primary) {
      return;
    }
    if (this.acceptable.has(label)) {
      this.acceptable.delete(label);
    } else {
      this.acceptable.add(label);
    }
  }

  canSubmit(): boolean {
    return this.current !== null && this.primary !== null;
  }

  buildPayload(): AnnotationPayload {
    if (!this.current || !this.primary) {
      throw new Error("nothing to submit");
    }
    return {
      annotator_id: this.annotatorId,
      example_id: this.current.example_id,
      primary: this.primary,
      acceptable: [...this.acceptable].sort(
        (a, b) => this.labels.labels.indexOf(a) - this.labels.labels.indexOf(b),
      ),
    };
  }

  async submit(): Promise<SubmitOutcome> {
    const payload = this.buildPayload();
    const outcome = await this.send(payload);
    if (outcome !== "buffered") {
      await this.next();
    }
    return outcome;
  }

  private async send(payload: AnnotationPayload): Promise<SubmitOutcome> {
    try {
      await this.api.submitAnnotation(payload);
      this.lastSubmitted = payload;
      return "submitted";
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return "duplicate-skipped"; // someone already stored it; move on
      }
      if (err instanceof ApiError) {
        throw err; // validation problems are bugs, not retry material
      }
      this.retryBuffer.push(payload); // network failure: keep it locally
      return "buffered";
    }
  }

  /** Resend everything the network ate; stops at the first failure. */
  async retryPending(): Promise<number> {
    let sent = 0;
    while (this.retryBuffer.length > 0) {
      const payload = this.retryBuffer.shift()!;
      const outcome = await this.send(payload); // re-buffers itself at the tail
      if (outcome === "buffered") {
        this.retryBuffer.pop();
        this.retryBuffer.unshift(payload); // keep original order
        break;
      }
      sent += 1;
    }
    if (this.retryBuffer.length === 0 && sent > 0) {
      await this.next();
    }
    return sent;
  }
}
