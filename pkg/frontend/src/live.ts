/** Live-discussion mode: the user enters turns one by one; after each turn
 * the service's next-move distribution is fetched and rendered before the
 * next entry. The client owns the running transcript; the service pads or
 * truncates to its window size. */

import { ApiClient, ContextItem, PredictResponse, Role } from "./api.js";
import { LabelSet } from "./labels.js";

export interface Turn {
  item: ContextItem;
  prediction: PredictResponse;
  latencyMs: number;
}

export class LiveController {
  readonly turns: Turn[] = [];
  coldStart: PredictResponse | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly labels: LabelSet,
  ) {}

  /** Prediction with an empty context: what should happen before anyone
   * has spoken. */
  async reset(): Promise<PredictResponse> {
    this.turns.length = 0;
    this.coldStart = await this.api.predict([]);
    return this.coldStart;
  }

  transcript(): ContextItem[] {
    return this.turns.map((t) => t.item);
  }

  /** Append a turn and fetch the distribution for what should follow it.
   * Student turns are always tagged as the wait move; teacher turns default
   * to the generic tag when none is chosen. */
  async addTurn(role: Role, speakerId: string, text: string, talkMove?: string): Promise<Turn> {
    let tag: string;
    if (role === "student") {
      tag = this.labels.waitLabel; // not user-overridable
    } else {
      tag = talkMove ?? this.labels.defaultTeacherLabel;
      if (!this.labels.has(tag) || tag === this.labels.waitLabel) {
        throw new Error(`invalid teacher talk move tag: ${tag}`);
      }
    }
    const item: ContextItem = { speaker_id: speakerId, role, text, talk_move: tag };
    const context = [...this.transcript(), item];
    const started = performance.now();
    const prediction = await this.api.predict(context);
    const turn: Turn = { item, prediction, latencyMs: performance.now() - started };
    this.turns.push(turn);
    return turn;
  }

  /** Percentages for the 8-bar chart; sums to 100 up to rounding. */
  bars(prediction: PredictResponse): { label: string; percent: number }[] {
    return this.labels.labels.map((label, i) => ({
      label,
      percent: 100 * (prediction.probs[i] ?? 0),
    }));
  }
}
